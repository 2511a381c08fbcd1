//! Scalar hyperbolic geometry on the unit disc.
//!
//! The Möbius pseudodistance |a − b| / |1 − conj(a)·b| and its inverse
//! hyperbolic tangent, the Poincaré distance, are the measuring sticks for
//! every bound in this crate: lower bounds push points into the disc and
//! measure them here, upper bounds come back as tanh⁻¹ of a disc parameter.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar. All public operations reject non-finite components.
pub type Cx = Complex64;

/// Shorthand constructor.
pub const fn cx(re: f64, im: f64) -> Cx {
    Complex64::new(re, im)
}

/// Largest argument accepted by [`atanh_guarded`]; anything closer to 1 is an
/// input error rather than a value to silently saturate.
pub const ATANH_GUARD: f64 = 1e-15;

pub(crate) fn ensure_finite(label: &str, a: Cx) -> Result<()> {
    if a.re.is_finite() && a.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{label} has non-finite component: {a}")))
    }
}

/// Whether `a` lies in the open unit disc.
pub fn in_open_disc(a: Cx) -> bool {
    a.norm_sqr() < 1.0
}

/// Möbius pseudodistance |a − b| / |1 − conj(a)·b| for points of the open
/// unit disc. Symmetric, zero exactly on the diagonal, and invariant under
/// disc automorphisms.
pub fn mobius(a: Cx, b: Cx) -> Result<f64> {
    ensure_finite("mobius argument a", a)?;
    ensure_finite("mobius argument b", b)?;
    if !in_open_disc(a) || !in_open_disc(b) {
        return Err(Error::Domain(format!(
            "mobius arguments must lie in the open unit disc (|a| = {}, |b| = {})",
            a.norm(),
            b.norm()
        )));
    }
    let num = (a - b).norm();
    let den = (cx(1.0, 0.0) - a.conj() * b).norm();
    Ok(num / den)
}

/// tanh⁻¹ computed as ½·ln((1+x)/(1−x)), guarded so that Inf never leaks
/// into bound arithmetic: arguments above 1 − 1e−15 are rejected.
pub fn atanh_guarded(x: f64) -> Result<f64> {
    if !x.is_finite() || !(0.0..=1.0 - ATANH_GUARD).contains(&x) {
        return Err(Error::Domain(format!(
            "atanh argument must lie in [0, 1 - 1e-15], got {x:e}"
        )));
    }
    Ok(0.5 * ((1.0 + x) / (1.0 - x)).ln())
}

/// Poincaré distance on the unit disc: tanh⁻¹ of [`mobius`].
pub fn poincare(a: Cx, b: Cx) -> Result<f64> {
    atanh_guarded(mobius(a, b)?)
}

/// Disc automorphism x ↦ (x − c)/(1 − conj(c)·x) sending `c` to the origin.
pub fn disc_automorphism(c: Cx, x: Cx) -> Cx {
    (x - c) / (cx(1.0, 0.0) - c.conj() * x)
}

/// Inverse of [`disc_automorphism`]: x ↦ (x + c)/(1 + conj(c)·x).
pub fn disc_automorphism_inv(c: Cx, x: Cx) -> Cx {
    (x + c) / (cx(1.0, 0.0) + c.conj() * x)
}

/// Point at hyperbolic parameter `t` ∈ [0, 1] along the geodesic from `a`
/// to `b` (t = 0 gives `a`, t = 1 gives `b`, t = ½ the midpoint).
pub fn geodesic_point(a: Cx, b: Cx, t: f64) -> Cx {
    let bp = disc_automorphism(a, b);
    let r = bp.norm();
    if r == 0.0 {
        return a;
    }
    let walked = (t * r.atanh()).tanh();
    disc_automorphism_inv(a, bp * (walked / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_at_origin_is_modulus() {
        let b = cx(0.3, -0.4);
        assert!((mobius(cx(0.0, 0.0), b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mobius_identity_case() {
        let a = cx(0.2, 0.7);
        assert_eq!(mobius(a, a).unwrap(), 0.0);
    }

    #[test]
    fn mobius_half_minus_half() {
        // |a - b| / |1 - conj(a) b| = 1 / 1.25
        let v = mobius(cx(0.5, 0.0), cx(-0.5, 0.0)).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
    }

    #[test]
    fn mobius_rejects_closed_disc_boundary() {
        assert!(mobius(cx(1.0, 0.0), cx(0.0, 0.0)).is_err());
        assert!(mobius(cx(0.0, 0.0), cx(0.0, -1.2)).is_err());
        assert!(mobius(cx(f64::NAN, 0.0), cx(0.0, 0.0)).is_err());
    }

    #[test]
    fn poincare_quarter() {
        let v = poincare(cx(0.0, 0.0), cx(0.25, 0.0)).unwrap();
        assert!((v - 0.25f64.atanh()).abs() < 1e-15);
        assert!((v - 0.255_412_811_882_995_3).abs() < 1e-12);
    }

    #[test]
    fn poincare_zero_cases() {
        assert_eq!(poincare(cx(0.0, 0.0), cx(0.0, 0.0)).unwrap(), 0.0);
        let a = cx(-0.3, 0.1);
        assert_eq!(poincare(a, a).unwrap(), 0.0);
    }

    #[test]
    fn atanh_guard_rejects_near_one() {
        assert!(atanh_guarded(1.0 - 1e-16).is_err());
        assert!(atanh_guarded(1.0).is_err());
        assert!(atanh_guarded(-0.1).is_err());
        assert!(atanh_guarded(0.999).is_ok());
    }

    #[test]
    fn automorphism_round_trip() {
        let c = cx(0.4, -0.2);
        let x = cx(-0.1, 0.55);
        let y = disc_automorphism(c, x);
        let back = disc_automorphism_inv(c, y);
        assert!((back - x).norm() < 1e-14);
    }

    #[test]
    fn geodesic_midpoint_equidistant() {
        let a = cx(0.3, 0.1);
        let b = cx(-0.5, 0.2);
        let m = geodesic_point(a, b, 0.5);
        let da = poincare(a, m).unwrap();
        let db = poincare(m, b).unwrap();
        assert!((da - db).abs() < 1e-12, "da = {da}, db = {db}");
        let dab = poincare(a, b).unwrap();
        assert!((da + db - dab).abs() < 1e-12);
    }
}
