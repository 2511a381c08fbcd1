//! Monic complex polynomials: stable nested evaluation, Vieta expansion,
//! and an Ehrlich–Aberth simultaneous root iteration.
//!
//! The solver returns multiple roots as clusters of nearby simple roots; no
//! symbolic multiplicity detection is attempted. [`refine_root_multiset`]
//! post-processes such clusters (Newton on a derivative of matching order,
//! then a Vieta backward-error gate) so that downstream max-modulus margins
//! stay accurate even at high multiplicity.

use crate::error::{Error, Result};
use crate::scalar::{cx, ensure_finite, Cx};

/// Iteration cap for the simultaneous root iteration.
pub const ROOT_ITERATION_CAP: usize = 200;

/// Default residual tolerance for [`MonicPoly::solve_roots`].
pub const ROOT_TOL: f64 = 1e-12;

/// Monic polynomial t^n + c_1 t^(n-1) + ... + c_n, stored by its trailing
/// coefficients c_1..c_n.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPoly {
    coeffs: Vec<Cx>,
}

impl MonicPoly {
    pub fn new(coeffs: Vec<Cx>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("monic polynomial must have degree >= 1".into()));
        }
        for (j, &c) in coeffs.iter().enumerate() {
            ensure_finite(&format!("coefficient c_{}", j + 1), c)?;
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    /// Value at `t` by Horner's scheme.
    pub fn eval(&self, t: Cx) -> Cx {
        let mut acc = cx(1.0, 0.0);
        for &c in &self.coeffs {
            acc = acc * t + c;
        }
        acc
    }

    /// Value and first derivative at `t` in one pass.
    pub fn eval_with_derivative(&self, t: Cx) -> (Cx, Cx) {
        let mut p = cx(1.0, 0.0);
        let mut dp = cx(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    /// Vieta expansion of ∏ (t − r_i).
    pub fn from_roots(roots: &[Cx]) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::Domain("root multiset must be non-empty".into()));
        }
        let mut dense = vec![cx(1.0, 0.0)];
        for (i, &r) in roots.iter().enumerate() {
            ensure_finite(&format!("root {i}"), r)?;
            let mut next = vec![cx(0.0, 0.0); dense.len() + 1];
            for (k, &d) in dense.iter().enumerate() {
                next[k] += d;
                next[k + 1] -= r * d;
            }
            dense = next;
        }
        Ok(Self { coeffs: dense[1..].to_vec() })
    }

    /// Backward-error bound used by the solver contract: every returned root
    /// r satisfies |p(r)| <= tol * (1 + |r|)^n.
    pub fn residual_bound(&self, root: Cx, tol: f64) -> f64 {
        tol * (1.0 + root.norm()).powi(self.degree() as i32)
    }

    /// All roots with multiplicity. Degree 1 and 2 are dispatched to closed
    /// forms; degree >= 3 runs the Ehrlich–Aberth iteration from guesses on a
    /// slightly perturbed circle. Fails explicitly (never silently) when the
    /// residual contract is not met within [`ROOT_ITERATION_CAP`] sweeps.
    pub fn solve_roots(&self, tol: f64) -> Result<Vec<Cx>> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Domain(format!("root tolerance must be positive, got {tol}")));
        }
        match self.degree() {
            1 => Ok(vec![-self.coeffs[0]]),
            2 => Ok(quadratic_roots(self.coeffs[0], self.coeffs[1]).to_vec()),
            _ => self.aberth(tol),
        }
    }

    fn aberth(&self, tol: f64) -> Result<Vec<Cx>> {
        let n = self.degree();

        // Fujiwara-style inclusion radius for the initial circle.
        let mut bound = 0.0f64;
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut m = c.norm();
            if j + 1 == n {
                m *= 0.5;
            }
            bound = bound.max(m.powf(1.0 / (j + 1) as f64));
        }
        let radius = (2.0 * bound).max(0.5);

        let mut z: Vec<Cx> = (0..n)
            .map(|i| {
                let theta = std::f64::consts::TAU * (i as f64 + 0.37) / n as f64 + 0.113;
                let rho = radius * (0.85 + 0.05 * i as f64 / n as f64);
                Cx::from_polar(rho, theta)
            })
            .collect();

        let mut contract_met = false;
        let mut prev_corr = f64::INFINITY;
        let mut stall = 0usize;
        let mut polish_left = 80usize;
        let mut worst_residual = f64::INFINITY;

        for _iter in 0..ROOT_ITERATION_CAP {
            let mut all_ok = true;
            worst_residual = 0.0;
            let mut newton = vec![cx(0.0, 0.0); n];
            for i in 0..n {
                let (p, dp) = self.eval_with_derivative(z[i]);
                let resid = p.norm();
                worst_residual = worst_residual.max(resid / (1.0 + z[i].norm()).powi(n as i32));
                if resid > self.residual_bound(z[i], tol) {
                    all_ok = false;
                }
                newton[i] = if dp.norm() > 0.0 {
                    p / dp
                } else {
                    // stationary point: nudge off it
                    cx(1e-6 * (1.0 + z[i].norm()), 0.0)
                };
            }
            if all_ok {
                contract_met = true;
            }

            let mut max_corr = 0.0f64;
            for i in 0..n {
                let mut s = cx(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        let d = z[i] - z[j];
                        if d.norm() > 0.0 {
                            s += cx(1.0, 0.0) / d;
                        }
                    }
                }
                let den = cx(1.0, 0.0) - newton[i] * s;
                let corr = if den.norm() > 1e-300 { newton[i] / den } else { newton[i] };
                max_corr = max_corr.max(corr.norm());
                z[i] -= corr;
            }

            if contract_met {
                // Polish phase: multiple-root clusters keep contracting
                // linearly after the residual contract is met, so keep
                // sweeping while corrections still shrink.
                if max_corr >= 0.75 * prev_corr {
                    stall += 1;
                } else {
                    stall = 0;
                }
                polish_left = polish_left.saturating_sub(1);
                if stall >= 3 || polish_left == 0 || max_corr < 1e-16 * (1.0 + radius) {
                    return Ok(z);
                }
            }
            prev_corr = max_corr;
        }

        if contract_met {
            Ok(z)
        } else {
            Err(Error::NonConvergent { iterations: ROOT_ITERATION_CAP, residual: worst_residual })
        }
    }
}

/// Roots of t^2 + b t + c by the cancellation-avoiding quadratic formula.
pub(crate) fn quadratic_roots(b: Cx, c: Cx) -> [Cx; 2] {
    let disc = b * b - cx(4.0, 0.0) * c;
    let mut s = disc.sqrt();
    if (b.conj() * s).re < 0.0 {
        s = -s;
    }
    let q = -(b + s) / cx(2.0, 0.0);
    if q.norm() == 0.0 {
        [q, -b - q]
    } else {
        [q, c / q]
    }
}

fn dense_from_monic(p: &MonicPoly) -> Vec<Cx> {
    let mut dense = Vec::with_capacity(p.degree() + 1);
    dense.push(cx(1.0, 0.0));
    dense.extend_from_slice(p.coeffs());
    dense
}

fn dense_derivative(dense: &[Cx]) -> Vec<Cx> {
    let n = dense.len() - 1;
    (0..n).map(|i| dense[i] * cx((n - i) as f64, 0.0)).collect()
}

fn dense_eval_with_derivative(dense: &[Cx], t: Cx) -> (Cx, Cx) {
    let mut p = cx(0.0, 0.0);
    let mut dp = cx(0.0, 0.0);
    for &c in dense {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

/// Relative coefficient gate for accepting a collapsed cluster multiset.
const CLUSTER_BACKWARD_TOL: f64 = 1e-10;

/// Single-linkage clustering scale, relative to 1 + max |root|.
const CLUSTER_LINK_SCALE: f64 = 0.05;

/// Collapse clusters of computed roots onto refined common centers when (and
/// only when) the collapsed multiset reproduces the polynomial coefficients
/// to near working precision.
///
/// A cluster of q approximants straddles a true q-fold root at distance
/// ~(eps)^(1/q), which is fatal for max-modulus margins near the unit
/// circle. The q-fold root is, however, a *simple* root of the (q−1)-th
/// derivative, so a Newton step there recovers it to full precision. The
/// Vieta backward gate rejects the collapse whenever the cluster was a pair
/// of genuinely distinct roots.
pub fn refine_root_multiset(p: &MonicPoly, roots: &[Cx]) -> Vec<Cx> {
    let n = roots.len();
    if n < 2 || n != p.degree() {
        return roots.to_vec();
    }
    let max_mod = roots.iter().map(|r| r.norm()).fold(0.0f64, f64::max);
    let link = CLUSTER_LINK_SCALE * (1.0 + max_mod);

    // single-linkage components
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while comp[i] != i {
            comp[i] = comp[comp[i]];
            i = comp[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() <= link {
                let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                comp[a] = b;
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut comp, i);
        match owner[root] {
            Some(c) => clusters[c].push(i),
            None => {
                owner[root] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }
    if clusters.iter().all(|c| c.len() == 1) {
        return roots.to_vec();
    }

    let dense = dense_from_monic(p);
    let mut candidate = Vec::with_capacity(n);
    for cluster in &clusters {
        let q = cluster.len();
        if q == 1 {
            candidate.push(roots[cluster[0]]);
            continue;
        }
        let centroid = cluster.iter().map(|&i| roots[i]).sum::<Cx>() / cx(q as f64, 0.0);
        let spread = cluster
            .iter()
            .map(|&i| (roots[i] - centroid).norm())
            .fold(0.0f64, f64::max);

        // Newton on the (q-1)-th derivative, where the q-fold root is simple.
        let mut d = dense.clone();
        for _ in 0..(q - 1) {
            d = dense_derivative(&d);
        }
        let mut center = centroid;
        let mut ok = false;
        for _ in 0..40 {
            let (v, dv) = dense_eval_with_derivative(&d, center);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            center -= step;
            if step.norm() <= 1e-15 * (1.0 + center.norm()) {
                ok = true;
                break;
            }
        }
        if !ok || (center - centroid).norm() > 2.0 * spread + 1e-9 {
            center = centroid;
        }
        candidate.extend(std::iter::repeat(center).take(q));
    }

    let Ok(reconstructed) = MonicPoly::from_roots(&candidate) else {
        return roots.to_vec();
    };
    let scale = 1.0 + p.coeffs().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let backward = p
        .coeffs()
        .iter()
        .zip(reconstructed.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    if backward <= CLUSTER_BACKWARD_TOL * scale {
        candidate
    } else {
        roots.to_vec()
    }
}
