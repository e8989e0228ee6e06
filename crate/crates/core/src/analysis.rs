//! Alpha-theory quantities and the complexity diagnostics of a tracked path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::interval::{PointMatrix, RealInterval};
use crate::krawczyk::point_norm;
use crate::polysys::{higher_tensor_norm_bound, Coefficient, SparseSystem, SquareSystem};
use crate::tracker::TrackTrace;

/// `1 - sqrt(2) / 2`, the largest `u = gamma r` under which the radius floor is claimed.
pub const U_THRESHOLD: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// Alpha-theory data at a certified point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaData {
    pub beta: f64,
    pub gamma_upper: f64,
    /// `gamma_upper * r`.
    pub u: f64,
    pub r_theory: f64,
}

impl AlphaData {
    pub fn new<C: Coefficient>(f: &SparseSystem<C>, x: &[Complex64], y: &PointMatrix, r: f64, rho: f64) -> Self {
        let beta = beta(f, x, y);
        let gamma_upper = gamma_upper(f, x, y);
        Self { beta, gamma_upper, u: gamma_upper * r, r_theory: r_theory(beta, rho) }
    }

    /// Whether the radius floor applies here.
    pub fn u_condition(&self) -> bool {
        self.u <= U_THRESHOLD
    }

    /// `r >= r_theory` whenever the floor applies.
    pub fn floor_holds(&self, r: f64) -> bool {
        !self.u_condition() || r >= self.r_theory
    }
}

/// `||Y F(x)||` with `Y` standing in for `JF(x)^{-1}`.
pub fn beta<S: SquareSystem>(f: &S, x: &[Complex64], y: &PointMatrix) -> f64 {
    point_norm(&y.mul_vec(&f.eval_point(x)))
}

/// Upper bound on `sup_k ||Y J^k F(x) / k!||^{1/(k-1)}` over `2 <= k <= deg F`.
pub fn gamma_upper<C: Coefficient>(f: &SparseSystem<C>, x: &[Complex64], y: &PointMatrix) -> f64 {
    (2..=f.degree())
        .map(|k| higher_tensor_norm_bound(f, y, x, k).powf(1.0 / f64::from(k - 1)))
        .fold(0.0, f64::max)
}

/// `beta / (rho + 1)`.
pub fn r_theory(beta: f64, rho: f64) -> f64 {
    beta / (rho + 1.0)
}

/// `curvature_term / speed_term`, or infinity when the homotopy is stationary at `x`.
pub fn eta_step(speed_term: f64, curvature_term: f64) -> f64 {
    if speed_term > 0.0 {
        curvature_term / speed_term
    } else {
        f64::INFINITY
    }
}

/// Left-endpoint Riemann estimate of the weighted path length
/// `sum dt (speed + curvature) / r` over the recorded steps.
///
/// Not rigorous: the integrand is sampled only at accepted step starts.
pub fn weighted_length(trace: &TrackTrace) -> f64 {
    trace.steps.iter().map(|s| s.dt * (s.speed_term + s.curvature_term) / s.r).sum()
}

/// `20 (sqrt(m) - 1)` rescaled to radius `r`: the exact length of the
/// univariate path `x^2 - (1 + t (m - 1))` at constant radius.
pub fn univariate_length(m: f64, r: f64) -> f64 {
    (m.sqrt() - 1.0) / r
}

/// Step-count bound `(1 + tau)(1 + eta) L / ((tau - rho) r_min)`.
pub fn complexity_bound(length: f64, r_min: f64, eta_max: f64, rho: f64, tau: f64) -> f64 {
    (1.0 + tau) * (1.0 + eta_max) * length / ((tau - rho) * r_min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub r_min: f64,
    pub eta_max: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "P")]
    pub steps: usize,
    /// `None` when `eta_max` is infinite.
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
    /// Fraction of accepted steps with `u <= 1 - sqrt(2)/2`.
    pub u_condition_rate: f64,
    /// `L = 0`, so the bound says nothing.
    pub degenerate: bool,
}

impl ComplexityReport {
    pub fn regularity_failed(&self) -> bool {
        !self.eta_max.is_finite()
    }
}

/// Assembles the report using the Riemann estimate of `L`.
pub fn complexity_report(trace: &TrackTrace, rho: f64, tau: f64) -> ComplexityReport {
    complexity_report_with_length(trace, weighted_length(trace), rho, tau)
}

/// Assembles the report for a known path length.
pub fn complexity_report_with_length(trace: &TrackTrace, length: f64, rho: f64, tau: f64) -> ComplexityReport {
    let r_min = trace.r_min();
    let eta_max = trace.eta_max();
    let steps = trace.steps.len();
    let bound = eta_max.is_finite().then(|| complexity_bound(length, r_min, eta_max, rho, tau));
    let satisfied = bound.map(|b| (steps as f64) <= b);
    let met = trace.steps.iter().filter(|s| s.alpha.u_condition()).count();
    ComplexityReport {
        r_min,
        eta_max,
        length,
        steps,
        bound,
        bound_satisfied: satisfied,
        u_condition_rate: if steps == 0 { 0.0 } else { met as f64 / steps as f64 },
        degenerate: length == 0.0,
    }
}

/// `(tau - rho) r`, rounded down.
pub(crate) fn slack(rho: f64, tau: f64, r: f64) -> f64 {
    RealInterval::point(tau).sub(RealInterval::point(rho)).mul(RealInterval::point(r)).lo()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{PolySystem, Term};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn quad(a: f64) -> PolySystem {
        PolySystem::new(1, vec![vec![Term::new(c(1.0), vec![2]), Term::new(c(-a), vec![0])]]).unwrap()
    }

    #[test]
    fn beta_examples() {
        let y = PointMatrix::scalar(c(1.0 / 3.0));
        assert!((beta(&quad(2.0), &[c(1.5)], &y) - 0.25 / 3.0).abs() < 1e-15);
        assert_eq!(beta(&quad(4.0), &[c(2.0)], &PointMatrix::scalar(c(0.25))), 0.0);
        // F(x) = c, JF(x) = d with c = 3 - 2i, d = 4: |c/d| componentwise max.
        let f = PolySystem::new(1, vec![vec![Term::new(c(4.0), vec![1]), Term::new(Complex64::new(3.0, -2.0), vec![0])]])
            .unwrap();
        assert!((beta(&f, &[c(0.0)], &PointMatrix::scalar(c(0.25))) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_upper(&quad(2.0), &[c(1.5)], &PointMatrix::scalar(c(1.0 / 3.0)));
        assert!((g - 1.0 / 3.0).abs() < 1e-14);
        let lin = PolySystem::new(
            2,
            vec![
                vec![Term::new(c(1.0), vec![1, 0]), Term::new(c(2.0), vec![0, 1])],
                vec![Term::new(c(3.0), vec![1, 0]), Term::new(c(-1.0), vec![0, 0])],
            ],
        )
        .unwrap();
        assert_eq!(gamma_upper(&lin, &[c(0.3), c(0.7)], &PointMatrix::identity(2)), 0.0);
        // x^3: k = 2 gives |Y 6x/2| = 3x/(3x^2) and k = 3 gives (|Y|)^{1/2}.
        let cubic = PolySystem::new(1, vec![vec![Term::new(c(1.0), vec![3]), Term::new(c(-1.0), vec![0])]]).unwrap();
        let y = PointMatrix::scalar(c(1.0 / 3.0));
        let g3 = gamma_upper(&cubic, &[c(1.0)], &y);
        assert!((g3 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radius_floor_and_eta() {
        assert!((r_theory(0.08333, 0.125) - 0.074071).abs() < 1e-6);
        assert_eq!(r_theory(0.0, 0.125), 0.0);
        assert_eq!(eta_step(4.5, 0.0), 0.0);
        assert!(eta_step(0.0, 0.0).is_infinite());
        assert!((eta_step(2.0, 0.1) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn univariate_length_and_bound() {
        assert!((univariate_length(10.0, 0.05) - 43.2456).abs() < 1e-4);
        assert!((univariate_length(100.0, 0.05) - 180.0).abs() < 1e-12);
        let b = complexity_bound(43.2456, 0.05, 0.0, 0.125, 0.875);
        assert!((b - 2162.28).abs() < 0.01);
    }

    #[test]
    fn slack_rounds_down() {
        let s = slack(0.125, 0.875, 0.05);
        assert!(s <= 0.0375 && s > 0.0375 - 1e-17);
    }
}
