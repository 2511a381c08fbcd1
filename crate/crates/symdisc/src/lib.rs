//! Invariant-metric bounds on the symmetrized polydisc G_n.
//!
//! The exact values of the Carathéodory distance, the Lempert function and
//! the Kobayashi–Royden-type metrics of G_n are unknown in general, so this
//! crate computes *certified sandwich intervals* instead:
//!
//! * **lower bounds** come from the explicit rational family f_λ and its
//!   chain compositions — every evaluated torus parameter is a certificate
//!   ([`lower::rho`], [`lower::p_lower`]);
//! * **upper bounds** come from explicitly validated analytic discs —
//!   polynomial maps of the unit disc whose boundary image is checked
//!   against the root-membership oracle ([`disc`]).
//!
//! The [`domain`] module holds the geometry of G_n itself (σ_n, two
//! independent membership oracles, projections, automorphisms and the
//! gauges of product domains G_2 × G), and [`verify`] packages the bound
//! machinery into reproducible, re-checkable experiment reports exposed by
//! the `symdisc` command-line tool.
//!
//! # Quick start
//!
//! ```
//! use symdisc::config::GridConfig;
//! use symdisc::domain::{member, Point};
//! use symdisc::lower::{rho, Direction};
//! use symdisc::scalar::cx;
//!
//! // (2, 1) lies on the boundary of G_2.
//! let z = Point::new(vec![cx(2.0, 0.0), cx(1.0, 0.0)]).unwrap();
//! assert!(member(&z).unwrap().margin.abs() < 1e-9);
//!
//! // The infinitesimal lower bound at the origin along e_2 in C^4 is 1/2.
//! let r = rho(&Direction::basis(4, 2), &GridConfig::default());
//! assert_eq!(r.value, 0.5);
//! ```
//!
//! The `examples/` directory walks through each capability; the
//! `acceptance` integration test runs the full verification ladder.

pub mod config;
pub mod disc;
pub mod domain;
pub mod error;
pub mod lower;
pub mod optim;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod verify;

pub use config::{ConfigBundle, GridConfig, SearchConfig};
pub use error::{Error, Result};
pub use scalar::{cx, Cx};

/// Configure the global rayon pool from the `SYMDISC_THREADS` environment
/// variable. Call once at startup; later calls are ignored.
pub fn init_threads_from_env() {
    if let Ok(v) = std::env::var("SYMDISC_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
