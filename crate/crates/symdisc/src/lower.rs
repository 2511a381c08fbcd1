//! Certified lower bounds.
//!
//! * `rho` — the infinitesimal lower bound at the origin,
//!   ρ_n(X) = max over |λ| = 1 of |Σ_j j X_j λ^(j−1)| / n, with the closed
//!   form (k|X_k| + l|X_l|)/n on two-index supports.
//! * `p_lower` — the two-point Carathéodory lower bound
//!   p(z, w) = max over the (n−1)-torus of the Poincaré distance between
//!   the chain values of z and w.
//!
//! Every evaluated torus point certifies a valid lower bound, so the grid
//! and local-search machinery can only under-report, never overshoot.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::GridConfig;
use crate::domain::{f_chain, member, Point};
use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::scalar::{cx, ensure_finite, poincare, Cx};

/// Tangent vector at the origin of C^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    x: Vec<Cx>,
}

impl Direction {
    pub fn new(x: Vec<Cx>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Domain("direction dimension must be >= 1".into()));
        }
        for (k, &c) in x.iter().enumerate() {
            ensure_finite(&format!("component X_{}", k + 1), c)?;
        }
        Ok(Self { x })
    }

    /// Standard basis vector e_k (1-based) in C^n.
    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "basis index out of range");
        let mut x = vec![cx(0.0, 0.0); n];
        x[k - 1] = cx(1.0, 0.0);
        Self { x }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn components(&self) -> &[Cx] {
        &self.x
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|c| c.norm() == 0.0)
    }

    /// Indices (1-based) of non-zero components.
    pub fn support(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn scaled(&self, c: Cx) -> Self {
        Self { x: self.x.iter().map(|&v| c * v).collect() }
    }

    pub fn sub(&self, other: &Direction) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Domain("direction dimensions differ".into()));
        }
        Direction::new(self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect())
    }

    /// The point t·X (used by secant quotients).
    pub fn point_at(&self, t: f64) -> Result<Point> {
        Point::new(self.x.iter().map(|&c| cx(t, 0.0) * c).collect())
    }
}

/// Value of ρ with its maximizing circle parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoBound {
    pub value: f64,
    /// Angle of the maximizing λ on the unit circle.
    pub witness_angle: f64,
    /// Set when the two-support closed form (k|X_k| + l|X_l|)/n supplied the
    /// value (the grid is still run and must agree).
    pub closed_form: bool,
}

fn rho_objective(x: &Direction, theta: f64) -> f64 {
    let lambda = Cx::from_polar(1.0, theta);
    let n = x.dim();
    let mut acc = cx(0.0, 0.0);
    for j in (1..=n).rev() {
        acc = acc * lambda + cx(j as f64, 0.0) * x.x[j - 1];
    }
    acc.norm() / n as f64
}

/// The infinitesimal lower bound ρ_n(X): a dense circle grid followed by
/// golden-section refinement around the best arc; on supports contained in
/// two indices {k, l}, the closed form (k|X_k| + l|X_l|)/n is returned and
/// the grid value is required to agree within the grid tolerance.
pub fn rho(x: &Direction, grid: &GridConfig) -> RhoBound {
    let m = grid.rho_grid;
    let mut best = f64::NEG_INFINITY;
    let mut best_theta = 0.0;
    for i in 0..m {
        let theta = std::f64::consts::TAU * i as f64 / m as f64;
        let v = rho_objective(x, theta);
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    let h = std::f64::consts::TAU / m as f64;
    let (theta_star, refined) = golden_max(|t| rho_objective(x, t), best_theta - h, best_theta + h, grid.refine_iters);
    let grid_value = refined.max(best);
    let witness_angle = theta_star.rem_euclid(std::f64::consts::TAU);

    let support = x.support();
    if support.len() <= 2 {
        let closed = support
            .iter()
            .map(|&k| k as f64 * x.x[k - 1].norm())
            .sum::<f64>()
            / x.dim() as f64;
        debug_assert!(
            (closed - grid_value).abs() <= 1e-6 * (1.0 + closed),
            "closed form {closed} vs grid {grid_value}"
        );
        return RhoBound { value: closed, witness_angle, closed_form: true };
    }
    RhoBound { value: grid_value, witness_angle, closed_form: false }
}

/// Two-point lower bound with its maximizing torus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PLowerBound {
    pub value: f64,
    /// Angles (θ_1, ..., θ_(n−1)) of the witnessing torus point; entry i
    /// drives the projection out of dimension i + 2.
    pub witness_angles: Vec<f64>,
}

fn torus_objective(z: &Point, w: &Point, angles: &[f64]) -> f64 {
    let lambdas: Vec<Cx> = angles.iter().map(|&t| Cx::from_polar(1.0, t)).collect();
    let (Ok(a), Ok(b)) = (f_chain(z, &lambdas), f_chain(w, &lambdas)) else {
        return f64::NEG_INFINITY;
    };
    match poincare(a, b) {
        Ok(d) => d,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn refine_coordinatewise(
    z: &Point,
    w: &Point,
    angles: &mut Vec<f64>,
    mut best: f64,
    grid: &GridConfig,
    h0: f64,
) -> f64 {
    let mut h = h0;
    for _ in 0..8 {
        let mut improved = 0.0f64;
        for i in 0..angles.len() {
            let center = angles[i];
            let (t, v) = golden_max(
                |t| {
                    let mut a = angles.clone();
                    a[i] = t;
                    torus_objective(z, w, &a)
                },
                center - h,
                center + h,
                grid.refine_iters,
            );
            if v > best {
                improved = improved.max(v - best);
                best = v;
                angles[i] = t;
            }
        }
        h *= 0.35;
        if improved < grid.tol {
            break;
        }
    }
    best
}

/// Certified two-point lower bound p(z, w) for the Carathéodory distance.
///
/// Exhaustive (n−1)-torus grid plus coordinate-wise golden refinement for
/// n <= 4; seeded multi-start stochastic coordinate search for n >= 5 (the
/// result is then a heuristic maximum, but any evaluated torus point is a
/// valid certificate). Both inputs must be strictly inside G_n.
pub fn p_lower(z: &Point, w: &Point, grid: &GridConfig) -> Result<PLowerBound> {
    grid.validate()?;
    let n = z.dim();
    if w.dim() != n {
        return Err(Error::Domain("p_lower arguments must share a dimension".into()));
    }
    for p in [z, w] {
        let v = member(p)?;
        if !v.is_inside() {
            return Err(Error::NotMember { n, margin: v.margin });
        }
    }
    if n == 1 {
        return Ok(PLowerBound { value: poincare(z.coords()[0], w.coords()[0])?, witness_angles: vec![] });
    }
    if z == w {
        return Ok(PLowerBound { value: 0.0, witness_angles: vec![0.0; n - 1] });
    }

    let dims = n - 1;
    let mut best = f64::NEG_INFINITY;
    let mut best_angles = vec![0.0; dims];

    if n <= 4 {
        // the 1-angle sweep is cheap, so n = 2 gets the dense circle grid
        let m = if n == 2 { grid.coarse_torus.max(grid.coarse_circle) } else { grid.coarse_torus };
        let mut idx = vec![0usize; dims];
        loop {
            let angles: Vec<f64> = idx
                .iter()
                .map(|&i| std::f64::consts::TAU * i as f64 / m as f64)
                .collect();
            let v = torus_objective(z, w, &angles);
            if v > best {
                best = v;
                best_angles = angles;
            }
            // odometer
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == dims {
                    break;
                }
            }
            if k == dims {
                break;
            }
        }
        let h = std::f64::consts::TAU / m as f64;
        best = refine_coordinatewise(z, w, &mut best_angles, best, grid, h);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(grid.seed ^ 0x706c_6f77);
        for _ in 0..grid.multistarts {
            let mut angles: Vec<f64> = (0..dims).map(|_| std::f64::consts::TAU * rng.gen::<f64>()).collect();
            let start = torus_objective(z, w, &angles);
            let v = refine_coordinatewise(z, w, &mut angles, start, grid, 0.8);
            if v > best {
                best = v;
                best_angles = angles;
            }
        }
    }

    if !best.is_finite() {
        return Err(Error::Search("no finite torus objective value found".into()));
    }
    let witness_angles: Vec<f64> = best_angles
        .iter()
        .map(|t| t.rem_euclid(std::f64::consts::TAU))
        .collect();
    Ok(PLowerBound { value: best, witness_angles })
}

/// Re-evaluate the torus objective at recorded witness angles (used when
/// rechecking serialized reports; no search involved).
pub fn p_lower_at(z: &Point, w: &Point, angles: &[f64]) -> Result<f64> {
    let n = z.dim();
    if n == 1 {
        return poincare(z.coords()[0], w.coords()[0]);
    }
    if angles.len() != n - 1 {
        return Err(Error::Domain("witness angle count must equal n - 1".into()));
    }
    let v = torus_objective(z, w, angles);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Search("witness angles hit a pole".into()))
    }
}

/// Secant quotient p(0, tX)/t; converges to ρ(X) as t → 0 from above.
pub fn rho_secant(x: &Direction, t: f64, grid: &GridConfig) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("secant step must be positive, got {t}")));
    }
    let w = x.point_at(t)?;
    let origin = Point::zero(x.dim());
    let bound = p_lower(&origin, &w, grid)?;
    Ok(bound.value / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_member;

    #[test]
    fn rho_basis_closed_form() {
        let grid = GridConfig::default();
        for n in 2..=8usize {
            for k in 1..=n {
                let r = rho(&Direction::basis(n, k), &grid);
                assert!(r.closed_form);
                assert_eq!(r.value, k as f64 / n as f64);
            }
        }
    }

    #[test]
    fn rho_zero_direction() {
        let grid = GridConfig::default();
        let r = rho(&Direction::new(vec![cx(0.0, 0.0); 3]).unwrap(), &grid);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn rho_two_support_value() {
        let grid = GridConfig::default();
        // n = 3, X = (1, 0, 2): (1·1 + 3·2)/3 = 7/3
        let x = Direction::new(vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(2.0, 0.0)]).unwrap();
        let r = rho(&x, &grid);
        assert!((r.value - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rho_full_support_grid_vs_direct_scan() {
        // independent dense-scan oracle for a generic direction
        let grid = GridConfig::default();
        let x = Direction::new(vec![cx(0.3, 0.1), cx(-0.2, 0.5), cx(0.7, -0.4)]).unwrap();
        let r = rho(&x, &grid);
        assert!(!r.closed_form);
        let mut scan = 0.0f64;
        for i in 0..200_000 {
            let theta = std::f64::consts::TAU * i as f64 / 200_000.0;
            scan = scan.max(rho_objective(&x, theta));
        }
        assert!((r.value - scan).abs() < 1e-8, "grid {} scan {scan}", r.value);
        assert!(r.value >= scan - 1e-12);
    }

    #[test]
    fn rho_homogeneity_and_rotation_invariance() {
        let grid = GridConfig::default();
        let x = Direction::new(vec![cx(0.4, -0.1), cx(0.0, 0.3), cx(0.2, 0.2), cx(-0.5, 0.0)]).unwrap();
        let base = rho(&x, &grid).value;

        let c = cx(-1.3, 0.7);
        let scaled = rho(&x.scaled(c), &grid).value;
        assert!((scaled - c.norm() * base).abs() < 1e-10);

        // weighted rotation (Λ_λ X)_j = λ^j X_j leaves the value unchanged
        let lam = Cx::from_polar(1.0, 1.234);
        let mut pow = cx(1.0, 0.0);
        let rotated: Vec<Cx> = x
            .components()
            .iter()
            .map(|&v| {
                pow *= lam;
                pow * v
            })
            .collect();
        let rot = rho(&Direction::new(rotated).unwrap(), &grid).value;
        assert!((rot - base).abs() < 1e-10);
    }

    #[test]
    fn p_lower_identity_and_symmetry() {
        let grid = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (_, z) = sample_member(3, 0.8, &mut rng);
        let (_, w) = sample_member(3, 0.8, &mut rng);
        assert_eq!(p_lower(&z, &z, &grid).unwrap().value, 0.0);
        let a = p_lower(&z, &w, &grid).unwrap().value;
        let b = p_lower(&w, &z, &grid).unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn p_lower_axis_example() {
        // z = 0, w = (0, -0.25): f_λ(w) = -0.25 λ has constant modulus, so
        // the bound is atanh(0.25); brute-force over a λ grid confirms.
        let grid = GridConfig::default();
        let z = Point::zero(2);
        let w = Point::new(vec![cx(0.0, 0.0), cx(-0.25, 0.0)]).unwrap();
        let b = p_lower(&z, &w, &grid).unwrap();
        assert!((b.value - 0.25f64.atanh()).abs() < 1e-10);

        let mut brute = 0.0f64;
        for i in 0..4096 {
            let lam = Cx::from_polar(1.0, std::f64::consts::TAU * i as f64 / 4096.0);
            let fz = crate::domain::f_diag(&z, lam).unwrap();
            let fw = crate::domain::f_diag(&w, lam).unwrap();
            brute = brute.max(poincare(fz, fw).unwrap());
        }
        assert!((b.value - brute).abs() < 1e-10);
    }

    #[test]
    fn p_lower_extremal_pair() {
        // w = σ(a, a) = (2a, a²) has f_λ(w) = a for every λ
        let grid = GridConfig::default();
        let a = 0.3;
        let z = Point::zero(2);
        let w = Point::new(vec![cx(2.0 * a, 0.0), cx(a * a, 0.0)]).unwrap();
        let b = p_lower(&z, &w, &grid).unwrap();
        assert!((b.value - a.atanh()).abs() < 1e-10);
    }

    #[test]
    fn p_lower_rejects_outsiders() {
        let grid = GridConfig::default();
        let z = Point::zero(2);
        let w = Point::new(vec![cx(1.0, 1.0), cx(0.0, 0.0)]).unwrap();
        assert!(matches!(p_lower(&z, &w, &grid), Err(Error::NotMember { .. })));
    }

    #[test]
    fn witness_angles_reproduce_value() {
        let grid = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (_, z) = sample_member(3, 0.7, &mut rng);
        let (_, w) = sample_member(3, 0.7, &mut rng);
        let b = p_lower(&z, &w, &grid).unwrap();
        let again = p_lower_at(&z, &w, &b.witness_angles).unwrap();
        assert!((again - b.value).abs() < 1e-12);
    }

    #[test]
    fn secant_approaches_rho() {
        let grid = GridConfig::default();
        // ρ_2(e_1) = 1/2
        let x = Direction::basis(2, 1);
        let s = rho_secant(&x, 1e-3, &grid).unwrap();
        assert!((s - 0.5).abs() < 5e-3, "secant {s}");

        // ρ_3(e_3) = 1
        let x = Direction::basis(3, 3);
        let s = rho_secant(&x, 1e-3, &grid).unwrap();
        assert!((s - 1.0).abs() < 1e-2, "secant {s}");
    }

    #[test]
    fn secant_rejects_nonmembers_and_bad_t() {
        let grid = GridConfig::default();
        let x = Direction::basis(2, 1);
        assert!(rho_secant(&x, -1.0, &grid).is_err());
        // t large enough to leave G_2 along e_1 (|roots| of t^2 - 3t = {0, 3})
        assert!(rho_secant(&x, 3.0, &grid).is_err());
    }

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
}
