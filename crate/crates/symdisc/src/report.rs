//! Machine-readable experiment reports.
//!
//! Every verification command produces an [`ExperimentReport`]: inputs,
//! assertions with observed values and thresholds, certified intervals and
//! the witnesses behind them, all serializable to JSON. Reports are
//! reproducible bit-for-bit given (version, seed, config fingerprint) —
//! wall-clock metadata lives in a `meta` block excluded from comparisons —
//! and every asserted pass can be re-checked from the serialized witnesses
//! alone (see [`crate::verify::recheck_report`]).
//!
//! Wire conventions: complex numbers are two-element arrays [re, im];
//! points and directions are arrays of those.

use serde::{Deserialize, Serialize};

use crate::config::ConfigBundle;
use crate::disc::{DiscMap, DiscWitness};
use crate::domain::{Point, Region, Verdict};
use crate::error::{Error, Result};
use crate::lower::Direction;
use crate::scalar::{cx, Cx};

pub type WireCx = [f64; 2];

pub fn to_wire(c: Cx) -> WireCx {
    [c.re, c.im]
}

pub fn from_wire(w: WireCx) -> Cx {
    cx(w[0], w[1])
}

pub fn point_to_wire(p: &Point) -> Vec<WireCx> {
    p.coords().iter().map(|&c| to_wire(c)).collect()
}

pub fn point_from_wire(w: &[WireCx]) -> Result<Point> {
    Point::new(w.iter().map(|&c| from_wire(c)).collect())
}

pub fn direction_to_wire(d: &Direction) -> Vec<WireCx> {
    d.components().iter().map(|&c| to_wire(c)).collect()
}

pub fn direction_from_wire(w: &[WireCx]) -> Result<Direction> {
    Direction::new(w.iter().map(|&c| from_wire(c)).collect())
}

/// Serialized disc certificate: coefficient table plus the validation
/// outcome it was accepted under.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WireDisc {
    pub coeffs: Vec<Vec<WireCx>>,
    pub alpha: f64,
    pub margin: f64,
    pub validate_radius: f64,
    pub interp_error: f64,
}

impl WireDisc {
    pub fn from_witness(w: &DiscWitness) -> Self {
        Self {
            coeffs: w.disc.coeffs().iter().map(|row| row.iter().map(|&c| to_wire(c)).collect()).collect(),
            alpha: w.alpha,
            margin: w.margin,
            validate_radius: w.validate_radius,
            interp_error: w.interp_error,
        }
    }

    pub fn disc(&self) -> Result<DiscMap> {
        DiscMap::new(
            self.coeffs
                .iter()
                .map(|row| row.iter().map(|&c| from_wire(c)).collect())
                .collect(),
        )
    }
}

/// Witness payloads attached to assertions and intervals.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Maximizing torus angles of a two-point lower bound.
    TorusPoint { angles: Vec<f64>, value: f64 },
    /// Maximizing circle angle of the infinitesimal lower bound.
    CircleAngle { angle: f64, value: f64, closed_form: bool },
    /// A validated analytic-disc certificate.
    Disc(WireDisc),
    /// Bottleneck matching permutation.
    Matching { permutation: Vec<usize>, value: f64 },
    /// Direction decomposition with per-part disc certificates.
    Decomposition { parts: Vec<Vec<WireCx>>, values: Vec<f64>, discs: Vec<WireDisc> },
    /// Chain of intermediate points with per-segment certificates.
    Chain { points: Vec<Vec<WireCx>>, values: Vec<f64>, discs: Vec<WireDisc> },
    /// Detected flat-embedding signs (z_n = s_a·w_1, z_2n = s_b·w_2).
    EmbeddingSigns { s_a: f64, s_b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    /// observed <= threshold
    Le,
    /// observed >= threshold
    Ge,
    /// |observed| <= threshold
    AbsLe,
}

impl Cmp {
    pub fn eval(&self, observed: f64, threshold: f64) -> bool {
        match self {
            Cmp::Le => observed <= threshold,
            Cmp::Ge => observed >= threshold,
            Cmp::AbsLe => observed.abs() <= threshold,
        }
    }
}

/// One checked statement. `kind` + `inputs` + `witnesses` carry enough to
/// recompute `observed` without re-running any search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    pub kind: String,
    pub description: String,
    #[serde(default)]
    pub inputs: serde_json::Value,
    pub observed: f64,
    pub threshold: f64,
    pub cmp: Cmp,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

impl Assertion {
    pub fn new(
        id: impl Into<String>,
        kind: impl Into<String>,
        description: impl Into<String>,
        observed: f64,
        threshold: f64,
        cmp: Cmp,
    ) -> Self {
        let pass = cmp.eval(observed, threshold);
        Self {
            id: id.into(),
            kind: kind.into(),
            description: description.into(),
            inputs: serde_json::Value::Null,
            observed,
            threshold,
            cmp,
            pass,
            witnesses: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, inputs: serde_json::Value) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }
}

/// A certified sandwich attached to a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    /// Whether the interval closed below lower + 1e−4 at this budget; gap
    /// claims are never asserted, only recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapsed: Option<bool>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Wall-clock metadata, excluded from determinism comparisons.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Meta {
    pub runtime_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config_fingerprint: String,
    pub config: ConfigBundle,
    #[serde(default)]
    pub inputs: serde_json::Value,
    pub assertions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<IntervalRecord>,
    pub passed: bool,
    #[serde(default)]
    pub meta: Meta,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, cfg: &ConfigBundle) -> Self {
        Self {
            experiment: experiment.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.grid.seed,
            config_fingerprint: cfg.fingerprint(),
            config: cfg.clone(),
            inputs: serde_json::Value::Null,
            assertions: Vec::new(),
            intervals: Vec::new(),
            passed: true,
            meta: Meta::default(),
        }
    }

    pub fn push(&mut self, a: Assertion) {
        self.passed &= a.pass;
        self.assertions.push(a);
    }

    pub fn finish(&mut self, started: std::time::Instant) {
        self.meta.runtime_ms = started.elapsed().as_millis();
    }

    /// Canonical serialization with wall-clock metadata zeroed: two runs
    /// with the same seed and config must agree byte-for-byte on this.
    pub fn determinism_key(&self) -> String {
        let mut clone = self.clone();
        clone.meta = Meta::default();
        serde_json::to_string(&clone).expect("report serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Flat CSV view: one row per assertion.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,id,kind,observed,threshold,cmp,pass\n");
        for a in &self.assertions {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:?},{}\n",
                self.experiment, a.id, a.kind, a.observed, a.threshold, a.cmp, a.pass
            ));
        }
        out
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "experiment: {}   seed: {}   fingerprint: {}\n",
            self.experiment,
            self.seed,
            &self.config_fingerprint[..16]
        ));
        for a in &self.assertions {
            out.push_str(&format!(
                "  [{}] {:<44} observed {: >13.6e}  vs {: >10.3e} ({:?})\n",
                if a.pass { "PASS" } else { "FAIL" },
                a.id,
                a.observed,
                a.threshold,
                a.cmp
            ));
        }
        for iv in &self.intervals {
            out.push_str(&format!(
                "  interval {:<36} [{: >13.9}, {: >13.9}] width {:.3e}{}\n",
                iv.label,
                iv.lower,
                iv.upper,
                iv.upper - iv.lower,
                match iv.collapsed {
                    Some(true) => "  (collapsed)",
                    Some(false) => "  (did not collapse at this budget)",
                    None => "",
                }
            ));
        }
        out.push_str(&format!(
            "  result: {}   runtime: {} ms\n",
            if self.passed { "ALL PASS" } else { "FAILURES" },
            self.meta.runtime_ms
        ));
        out
    }
}

/// Wire verdict for membership reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireVerdict {
    pub class: Region,
    /// Absent when the sup sweep hit a pole (margin is -inf).
    pub margin: Option<f64>,
    pub pole: bool,
}

impl WireVerdict {
    pub fn from_verdict(v: &Verdict) -> Self {
        Self {
            class: v.class,
            margin: if v.margin.is_finite() { Some(v.margin) } else { None },
            pole: v.pole,
        }
    }
}

pub fn parse_json_value<T: serde::de::DeserializeOwned>(v: &serde_json::Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("bad {what}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_through_json() {
        let cfg = ConfigBundle::default();
        let mut rep = ExperimentReport::new("demo", &cfg);
        rep.push(
            Assertion::new("demo.a", "value", "demo assertion", 0.5, 1.0, Cmp::Le)
                .with_witness(Witness::TorusPoint { angles: vec![0.25], value: 0.5 }),
        );
        let text = rep.to_json_pretty();
        let back = ExperimentReport::from_json(&text).unwrap();
        assert_eq!(rep.determinism_key(), back.determinism_key());
        assert!(back.passed);
    }

    #[test]
    fn meta_excluded_from_determinism_key() {
        let cfg = ConfigBundle::default();
        let mut a = ExperimentReport::new("demo", &cfg);
        let mut b = ExperimentReport::new("demo", &cfg);
        a.meta.runtime_ms = 123;
        b.meta.runtime_ms = 456;
        assert_eq!(a.determinism_key(), b.determinism_key());
    }

    #[test]
    fn cmp_semantics() {
        assert!(Cmp::Le.eval(1.0, 1.0));
        assert!(!Cmp::Le.eval(1.1, 1.0));
        assert!(Cmp::Ge.eval(2.0, 1.0));
        assert!(Cmp::AbsLe.eval(-0.5, 1.0));
        assert!(!Cmp::AbsLe.eval(-1.5, 1.0));
    }
}
