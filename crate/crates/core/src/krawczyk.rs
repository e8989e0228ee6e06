//! The Krawczyk operator and solution refinement.
//!
//! `K(F, x, r, Y) = -Y F(x) + (Id - Y JF(x + rB)) rB`, evaluated in interval
//! arithmetic. If `||K|| < r rho` then `F` has exactly one zero in `x + rB`,
//! it lies within `r rho` of `x`, and `z -> z - Y F(z)` is a
//! `rho`-contraction on the box.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{IntervalBox, PointMatrix, RealInterval};
use crate::polysys::SquareSystem;

/// `x` together with a Krawczyk certificate of radius `r` at threshold `rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPoint {
    pub x: Vec<Complex64>,
    pub r: f64,
    pub y: PointMatrix,
    pub rho: f64,
    /// Homotopy time the certificate refers to, if any.
    pub t: Option<f64>,
    /// `||K(F, x, r, Y)||` when the certificate was issued.
    pub krawczyk_norm: f64,
}

impl CertifiedPoint {
    /// Box `x + rB` known to contain exactly one zero.
    pub fn region(&self) -> IntervalBox {
        IntervalBox::around(&self.x, self.r)
    }

    /// Runs a fresh Krawczyk test against `f` at the stored threshold.
    pub fn reverify<S: SquareSystem>(&self, f: &S) -> bool {
        krawczyk_test(f, &self.x, self.r, &self.y, self.rho).passed
    }
}

/// Outcome of one Krawczyk test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrawczykResult {
    #[serde(rename = "K")]
    pub k: IntervalBox,
    pub norm: f64,
    pub radius: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// `-Y F(x) + (Id - Y JF(x + rB)) rB`.
pub fn krawczyk_operator<S: SquareSystem>(f: &S, x: &[Complex64], r: f64, y: &PointMatrix) -> IntervalBox {
    let n = f.dim();
    debug_assert_eq!(x.len(), n);
    debug_assert!(r > 0.0);
    let fx = f.eval_box(&IntervalBox::from_point(x));
    let newton = y.mul_box(&fx);
    let jac = f.jacobian_box(&IntervalBox::around(x, r));
    let contraction = y.mul_interval(&jac).identity_minus();
    contraction
        .apply(&IntervalBox::scaled_unit(n, r))
        .expect("dimensions agree")
        .sub(&newton)
}

/// `r * threshold`, rounded down so that a pass is never granted by rounding.
pub(crate) fn scaled_threshold(r: f64, threshold: f64) -> f64 {
    RealInterval::point(r).mul(RealInterval::point(threshold)).lo()
}

/// Evaluates the Krawczyk operator and compares its norm with `r * threshold`.
pub fn krawczyk_test<S: SquareSystem>(f: &S, x: &[Complex64], r: f64, y: &PointMatrix, threshold: f64) -> KrawczykResult {
    let k = krawczyk_operator(f, x, r, y);
    let norm = k.norm();
    KrawczykResult { passed: norm < scaled_threshold(r, threshold), k, norm, radius: r, threshold }
}

/// Infinity norm of a point vector viewed in `R^{2n}`.
pub fn point_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.re.abs()).max(z.im.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOptions {
    /// Looser threshold the input is expected to satisfy; enters the shrink guard.
    pub tau: f64,
    /// Cap on passes through the certification loop.
    pub max_iterations: usize,
    /// Run the radius doubling phase.
    pub expand: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { tau: 7.0 / 8.0, max_iterations: 200, expand: true }
    }
}

/// Result of [`refine_solution`] with bookkeeping.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub point: CertifiedPoint,
    /// Operator value at the returned `(x, r, Y)`.
    pub k: IntervalBox,
    /// Krawczyk operator evaluations, including the failed doubling test.
    pub evaluations: usize,
    pub newton_steps: usize,
    pub halvings: usize,
    pub doublings: usize,
}

/// Refines a `tau`-approximate solution into a `rho`-approximate one.
///
/// While the test at `rho` fails, either halves the radius (when the
/// quasi-Newton correction is already below `(1 - rho) tau r / 8`) or takes the
/// step `x <- x - Y F(x)`, then refreshes `Y = JF(x)^{-1}`. Once certified,
/// doubles `r` while the doubled test passes and `2r <= 1`.
///
/// The current `Y` is used both in the guard and in the Newton step.
pub fn refine_solution<S: SquareSystem>(
    f: &S,
    x: &[Complex64],
    r: f64,
    y: &PointMatrix,
    rho: f64,
    opts: &RefineOptions,
) -> Result<Refinement> {
    if !(rho > 0.0 && rho < opts.tau && opts.tau < 1.0) {
        return Err(Error::Usage(format!("need 0 < rho < tau < 1, got rho = {rho}, tau = {}", opts.tau)));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Usage(format!("radius must be positive, got {r}")));
    }
    let guard_factor = (1.0 - rho) * opts.tau / 8.0;
    let mut x = x.to_vec();
    let mut r = r;
    let mut y = y.clone();
    let mut evaluations = 0;
    let mut newton_steps = 0;
    let mut halvings = 0;
    let mut iterations = 0;

    let mut current = loop {
        let test = krawczyk_test(f, &x, r, &y, rho);
        evaluations += 1;
        if test.passed {
            break test;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::RefinementDiverged { iterations });
        }
        iterations += 1;
        let step = y.mul_vec(&f.eval_point(&x));
        if point_norm(&step) <= guard_factor * r {
            r *= 0.5;
            halvings += 1;
        } else {
            for (xi, si) in x.iter_mut().zip(&step) {
                *xi -= si;
            }
            newton_steps += 1;
        }
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::RefinementDiverged { iterations });
        }
        y = f.jacobian_point(&x).approx_inverse()?;
    };

    let mut doublings = 0;
    if opts.expand {
        while 2.0 * r <= 1.0 {
            let test = krawczyk_test(f, &x, 2.0 * r, &y, rho);
            evaluations += 1;
            if !test.passed {
                break;
            }
            r *= 2.0;
            doublings += 1;
            current = test;
        }
    }

    Ok(Refinement {
        point: CertifiedPoint { x, r, y, rho, t: None, krawczyk_norm: current.norm },
        k: current.k,
        evaluations,
        newton_steps,
        halvings,
        doublings,
    })
}
