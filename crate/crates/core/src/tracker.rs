//! Certified path tracking with a constant predictor.
//!
//! Both trackers alternate a refinement at the tight threshold `rho` with a
//! step over which the looser threshold `tau` is guaranteed. The adaptive
//! tracker finds the step by halving until an interval Krawczyk test over the
//! time slab passes; the a priori tracker computes it in closed form from the
//! speed and curvature of the homotopy at the current certificate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{eta_step, slack, AlphaData};
use crate::error::{Error, Result};
use crate::homotopy::AffineHomotopy;
use crate::interval::{IntervalBox, PointMatrix, RealInterval};
use crate::krawczyk::{krawczyk_operator, refine_solution, scaled_threshold, CertifiedPoint, RefineOptions};
use crate::polysys::{IntervalPolySystem, SquareSystem};

/// Multiplier applied to the closed-form step so that rounding in the slab
/// enclosure can never eat the whole slack.
pub const APRIORI_SAFETY: f64 = 1.0 - 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackMode {
    Adaptive,
    Apriori,
}

impl TrackMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackMode::Adaptive => "adaptive",
            TrackMode::Apriori => "apriori",
        }
    }
}

impl std::str::FromStr for TrackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(TrackMode::Adaptive),
            "apriori" => Ok(TrackMode::Apriori),
            _ => Err(Error::Usage(format!("unknown mode {s:?}"))),
        }
    }
}

/// How `{F_t : t in T}` is enclosed for the slab test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlabEnclosure {
    /// `K(F_t) - [0, dt] (Y F1(x) + (Y JF1(x + rB)) rB)`, using that the
    /// homotopy is affine in `t`.
    #[default]
    Split,
    /// Substitute `T` into every coefficient and evaluate naively.
    Substituted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackOptions {
    pub rho: f64,
    pub tau: f64,
    /// Radius handed to the first refinement.
    pub initial_radius: f64,
    /// Run the doubling phase of each refinement.
    pub expand_radius: bool,
    pub max_refine_iterations: usize,
    pub max_steps: usize,
    /// Adaptive steps below this raise [`Error::StepUnderflow`].
    pub min_step: f64,
    pub slab: SlabEnclosure,
    /// Re-run the slab test on every a priori step.
    pub verify_steps: bool,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            rho: 1.0 / 8.0,
            tau: 7.0 / 8.0,
            initial_radius: 1e-2,
            expand_radius: true,
            max_refine_iterations: 200,
            max_steps: 5_000_000,
            min_step: 1e-15,
            slab: SlabEnclosure::Split,
            verify_steps: false,
        }
    }
}

impl TrackOptions {
    fn check(&self) -> Result<()> {
        if !(0.0 < self.rho && self.rho < self.tau && self.tau < 1.0) {
            return Err(Error::Usage(format!("need 0 < rho < tau < 1, got rho = {}, tau = {}", self.rho, self.tau)));
        }
        if !(self.initial_radius > 0.0 && self.initial_radius.is_finite()) {
            return Err(Error::Usage(format!("initial radius must be positive, got {}", self.initial_radius)));
        }
        Ok(())
    }

    fn refine(&self) -> RefineOptions {
        RefineOptions { tau: self.tau, max_iterations: self.max_refine_iterations, expand: self.expand_radius }
    }
}

/// One accepted step from `t` to `t + dt`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub r: f64,
    #[serde(flatten)]
    pub alpha: AlphaData,
    /// `||Y F1(x)||`.
    pub speed_term: f64,
    /// `r ||Y JF1(x + rB)||`.
    pub curvature_term: f64,
    pub eta_step: f64,
    /// `||K(F_t, x, r, Y)||` after refinement.
    pub krawczyk_norm: f64,
    /// Norm of the slab operator that accepted (adaptive) or re-checked (a priori) the step.
    pub slab_norm: Option<f64>,
    pub slab_verified: Option<bool>,
    /// Krawczyk evaluations spent on this step, refinement included.
    pub evaluations: usize,
    pub newton_steps: usize,
    pub mode: TrackMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackTrace {
    pub mode: TrackMode,
    pub start: Vec<Complex64>,
    pub steps: Vec<StepRecord>,
    #[serde(rename = "final")]
    pub final_point: CertifiedPoint,
    /// Alpha data of the final refinement at `t = 1`.
    pub final_alpha: AlphaData,
    /// Total Krawczyk evaluations along the path.
    pub iterations: usize,
    pub success: bool,
}

impl TrackTrace {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn r_min(&self) -> f64 {
        self.steps.iter().map(|s| s.r).fold(self.final_point.r, f64::min)
    }

    pub fn eta_max(&self) -> f64 {
        self.steps.iter().map(|s| s.eta_step).fold(0.0, f64::max)
    }

    pub fn dt_min(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).fold(f64::INFINITY, f64::min)
    }

    pub fn dt_median(&self) -> f64 {
        let mut dts: Vec<f64> = self.steps.iter().map(|s| s.dt).collect();
        if dts.is_empty() {
            return f64::NAN;
        }
        dts.sort_by(f64::total_cmp);
        let m = dts.len() / 2;
        if dts.len() % 2 == 1 {
            dts[m]
        } else {
            0.5 * (dts[m - 1] + dts[m])
        }
    }

    /// Mean of `r_i / r_theory` over refinements with `beta > 0`.
    pub fn avg_r_ratio(&self) -> f64 {
        let ratios: Vec<f64> = self
            .steps
            .iter()
            .map(|s| (s.r, s.alpha))
            .chain(std::iter::once((self.final_point.r, self.final_alpha)))
            .filter(|(_, a)| a.r_theory > 0.0)
            .map(|(r, a)| r / a.r_theory)
            .collect();
        if ratios.is_empty() {
            f64::INFINITY
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialises")
    }
}

/// `Y F1(x)` and `(Y JF1(x + rB)) rB`, the two parts of the time derivative of
/// the Krawczyk operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Drift {
    pub speed_box: IntervalBox,
    pub curvature_box: IntervalBox,
    /// `||Y F1(x)||`.
    pub speed_term: f64,
    /// `r ||Y JF1(x + rB)||`, rounded up.
    pub curvature_term: f64,
}

impl Drift {
    pub fn new(h: &AffineHomotopy, x: &[Complex64], r: f64, y: &PointMatrix) -> Self {
        let f1 = h.f1_enclosure();
        let speed_box = y.mul_box(&f1.eval_box(&IntervalBox::from_point(x)));
        let jm = y.mul_interval(&f1.jacobian_box(&IntervalBox::around(x, r)));
        let curvature_box = jm.apply(&IntervalBox::scaled_unit(x.len(), r)).expect("dimensions agree");
        let curvature_term = RealInterval::point(r).mul(RealInterval::point(jm.norm())).hi();
        Self { speed_term: speed_box.norm(), speed_box, curvature_box, curvature_term }
    }

    pub fn eta(&self) -> f64 {
        eta_step(self.speed_term, self.curvature_term)
    }

    fn total(&self) -> IntervalBox {
        self.speed_box.add(&self.curvature_box)
    }
}

/// `min(bound, 1 - t)` with `bound = (tau - rho) r / (speed + r curvature)`.
///
/// Returns `1 - t` when the homotopy does not move at `x`.
pub fn apriori_stepsize(h: &AffineHomotopy, t: f64, p: &CertifiedPoint, tau: f64) -> f64 {
    let drift = Drift::new(h, &p.x, p.r, &p.y);
    let bound = apriori_bound(&drift, p.rho, tau, p.r);
    bound.min(1.0 - t)
}

fn apriori_bound(drift: &Drift, rho: f64, tau: f64, r: f64) -> f64 {
    let denom = RealInterval::point(drift.speed_term).add(RealInterval::point(drift.curvature_term)).hi();
    if denom == 0.0 {
        return f64::INFINITY;
    }
    let num = RealInterval::point(slack(rho, tau, r));
    num.div(RealInterval::point(denom)).expect("positive denominator").lo() * APRIORI_SAFETY
}

/// Largest representable `t' <= 1` with `t' - t <= bound` in exact arithmetic.
fn advance(t: f64, bound: f64) -> f64 {
    let rest = RealInterval::point(1.0).sub(RealInterval::point(t)).hi();
    if bound >= rest {
        return 1.0;
    }
    let mut next = t + bound;
    while next > t && RealInterval::point(next).sub(RealInterval::point(t)).hi() > bound {
        next = next.next_down();
    }
    next
}

/// Upper bound on `t_next - t`.
fn offset(t: f64, t_next: f64) -> f64 {
    RealInterval::point(t_next).sub(RealInterval::point(t)).hi()
}

/// Slab operator from a cached core `K(F_t, x, r, Y)` and drift.
fn split_slab(core: &IntervalBox, drift: &Drift, width: f64) -> IntervalBox {
    core.sub(&drift.total().mul_real(RealInterval::new(0.0, width)))
}

/// Krawczyk operator for the whole family `{F_s : s in [t, t_next]}`.
pub fn slab_krawczyk(
    h: &AffineHomotopy,
    t: f64,
    t_next: f64,
    x: &[Complex64],
    r: f64,
    y: &PointMatrix,
    enclosure: SlabEnclosure,
) -> Result<IntervalBox> {
    if !(0.0 <= t && t <= t_next && t_next <= 1.0) {
        return Err(Error::Usage(format!("bad time slab [{t}, {t_next}]")));
    }
    Ok(match enclosure {
        SlabEnclosure::Split => {
            let core = krawczyk_operator(&h.enclosure_at(t)?, x, r, y);
            split_slab(&core, &Drift::new(h, x, r, y), offset(t, t_next))
        }
        SlabEnclosure::Substituted => {
            let ft = h.over_interval(RealInterval::new(t, t_next))?;
            krawczyk_operator(&ft, x, r, y)
        }
    })
}

/// Whether `x` is certified at `tau` for every `F_s`, `s in [t, t_next]`.
pub fn slab_test(
    h: &AffineHomotopy,
    t: f64,
    t_next: f64,
    p: &CertifiedPoint,
    tau: f64,
    enclosure: SlabEnclosure,
) -> Result<(bool, f64)> {
    let k = slab_krawczyk(h, t, t_next, &p.x, p.r, &p.y, enclosure)?;
    let norm = k.norm();
    Ok((norm < scaled_threshold(p.r, tau), norm))
}

pub fn track_adaptive(h: &AffineHomotopy, start: &[Complex64], opts: &TrackOptions) -> Result<TrackTrace> {
    track(h, start, TrackMode::Adaptive, opts)
}

pub fn track_apriori(h: &AffineHomotopy, start: &[Complex64], opts: &TrackOptions) -> Result<TrackTrace> {
    track(h, start, TrackMode::Apriori, opts)
}

/// Fresh alpha data at a certified point, preconditioned by `JF_t(x)^{-1}`.
fn alpha_at(ft: &IntervalPolySystem, p: &CertifiedPoint) -> AlphaData {
    let y = ft.jacobian_point(&p.x).approx_inverse().unwrap_or_else(|_| p.y.clone());
    AlphaData::new(ft, &p.x, &y, p.r, p.rho)
}

/// Runs the adaptive or a priori tracker from `start` at `t = 0` to `t = 1`.
pub fn track(h: &AffineHomotopy, start: &[Complex64], mode: TrackMode, opts: &TrackOptions) -> Result<TrackTrace> {
    opts.check()?;
    if start.len() != h.dim() {
        return Err(Error::Usage(format!("start has {} coordinates, homotopy has {}", start.len(), h.dim())));
    }
    let refine_opts = opts.refine();
    let mut t = 0.0_f64;
    let mut x = start.to_vec();
    let mut r = opts.initial_radius;
    let mut y = h.enclosure_at(0.0)?.jacobian_point(&x).approx_inverse()?;
    let mut dt = 1.0_f64;
    let mut steps = Vec::new();
    let mut iterations = 0;
    let mut ft = h.enclosure_at(0.0)?;
    let mut slab = ft.clone();

    loop {
        h.write_over_interval(RealInterval::point(t), &mut ft)?;
        let refined = refine_solution(&ft, &x, r, &y, opts.rho, &refine_opts)?;
        iterations += refined.evaluations;
        let mut point = refined.point;
        point.t = Some(t);
        let alpha = alpha_at(&ft, &point);

        if t >= 1.0 {
            return Ok(TrackTrace {
                mode,
                start: start.to_vec(),
                steps,
                final_point: point,
                final_alpha: alpha,
                iterations,
                success: true,
            });
        }
        if steps.len() >= opts.max_steps {
            return Err(Error::StepLimit { steps: steps.len() });
        }

        let drift = Drift::new(h, &point.x, point.r, &point.y);
        let mut evaluations = refined.evaluations;
        let (t_next, slab_norm, slab_verified) = match mode {
            TrackMode::Apriori => {
                let t_next = advance(t, apriori_bound(&drift, opts.rho, opts.tau, point.r));
                if t_next <= t {
                    return Err(Error::StepUnderflow { t, dt: 0.0 });
                }
                if opts.verify_steps {
                    let k = match opts.slab {
                        SlabEnclosure::Split => split_slab(&refined.k, &drift, offset(t, t_next)),
                        SlabEnclosure::Substituted => {
                            h.write_over_interval(RealInterval::new(t, t_next), &mut slab)?;
                            krawczyk_operator(&slab, &point.x, point.r, &point.y)
                        }
                    };
                    let norm = k.norm();
                    (t_next, Some(norm), Some(norm < scaled_threshold(point.r, opts.tau)))
                } else {
                    (t_next, None, None)
                }
            }
            TrackMode::Adaptive => {
                let threshold = scaled_threshold(point.r, opts.tau);
                dt = (2.0 * dt).min(1.0 - t);
                loop {
                    if dt < opts.min_step {
                        return Err(Error::StepUnderflow { t, dt });
                    }
                    let t_next = if dt >= 1.0 - t { 1.0 } else { t + dt };
                    let k = match opts.slab {
                        SlabEnclosure::Split => split_slab(&refined.k, &drift, offset(t, t_next)),
                        SlabEnclosure::Substituted => {
                            h.write_over_interval(RealInterval::new(t, t_next), &mut slab)?;
                            krawczyk_operator(&slab, &point.x, point.r, &point.y)
                        }
                    };
                    evaluations += 1;
                    iterations += 1;
                    let norm = k.norm();
                    if norm < threshold && t_next > t {
                        break (t_next, Some(norm), Some(true));
                    }
                    dt *= 0.5;
                }
            }
        };

        steps.push(StepRecord {
            t,
            dt: t_next - t,
            r: point.r,
            alpha,
            speed_term: drift.speed_term,
            curvature_term: drift.curvature_term,
            eta_step: drift.eta(),
            krawczyk_norm: point.krawczyk_norm,
            slab_norm,
            slab_verified,
            evaluations,
            newton_steps: refined.newton_steps,
            mode,
        });
        t = t_next;
        x = point.x;
        r = point.r;
        y = point.y;
    }
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

    fn univariate(m: f64) -> AffineHomotopy {
        AffineHomotopy::make_linear(quad(1.0), quad(m), c(1.0)).unwrap()
    }

    fn certified_at_one(r: f64) -> CertifiedPoint {
        CertifiedPoint { x: vec![c(1.0)], r, y: PointMatrix::scalar(c(0.5)), rho: 0.125, t: Some(0.0), krawczyk_norm: 0.0 }
    }

    #[test]
    fn apriori_step_on_univariate() {
        let h = univariate(10.0);
        let dt = apriori_stepsize(&h, 0.0, &certified_at_one(0.05), 0.875);
        // 0.75 * 0.05 / 4.5
        assert!((dt - 0.0083333333).abs() < 1e-9);
        assert!(dt <= 0.75 * 0.05 / 4.5);
        let dt2 = apriori_stepsize(&h, 0.0, &certified_at_one(0.1), 0.875);
        assert!((dt2 / dt - 2.0).abs() < 1e-12);
        assert_eq!(apriori_stepsize(&h, 0.999, &certified_at_one(0.05), 0.875), 1.0 - 0.999);
    }

    #[test]
    fn stationary_homotopy_takes_the_whole_step() {
        let g = quad(1.0);
        let h = AffineHomotopy::make_linear(g.clone(), g, c(1.0)).unwrap();
        let p = certified_at_one(0.05);
        assert_eq!(apriori_stepsize(&h, 0.25, &p, 0.875), 0.75);
        for mode in [TrackMode::Adaptive, TrackMode::Apriori] {
            let tr = track(&h, &[c(1.0)], mode, &TrackOptions::default()).unwrap();
            assert_eq!(tr.steps.len(), 1);
            assert_eq!(tr.steps[0].dt, 1.0);
            assert!(tr.eta_max().is_infinite());
        }
    }

    #[test]
    fn advance_never_overshoots() {
        for &(t, b) in &[(0.1, 0.0123), (0.3, 1e-7), (0.999999, 1e-5), (0.7, 0.3), (1e-300, 1e-17)] {
            let n = advance(t, b);
            assert!(n > t && n <= 1.0);
            assert!(offset(t, n) <= b || n == 1.0);
        }
    }

    #[test]
    fn univariate_paths_end_at_the_root() {
        let h = univariate(10.0);
        let root = 10f64.sqrt();
        for mode in [TrackMode::Adaptive, TrackMode::Apriori] {
            let opts = TrackOptions { verify_steps: true, ..TrackOptions::default() };
            let tr = track(&h, &[c(1.0)], mode, &opts).unwrap();
            let p = &tr.final_point;
            assert!(tr.success);
            assert!((p.x[0] - c(root)).norm() <= p.r * p.rho);
            assert!(p.region().contains_point(&[c(root)]));
            assert!(p.reverify(&h.enclosure_at(1.0).unwrap()));
            assert!(tr.steps.iter().all(|s| s.slab_verified == Some(true)));
            let mut t = 0.0;
            for s in &tr.steps {
                assert_eq!(s.t, t);
                assert!(s.dt > 0.0);
                t = s.t + s.dt;
            }
            assert_eq!(t, 1.0);
            assert_eq!(tr.eta_max(), 0.0);
        }
    }

    #[test]
    fn bezout_pair_reaches_both_roots() {
        let h = AffineHomotopy::make_linear(quad(1.0), quad(10.0), crate::homotopy::random_gamma(11)).unwrap();
        let mut ends = Vec::new();
        for s in [c(1.0), c(-1.0)] {
            let tr = track_apriori(&h, &[s], &TrackOptions::default()).unwrap();
            ends.push(tr.final_point.x[0]);
        }
        ends.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ends[0] + c(10f64.sqrt())).norm() < 1e-2);
        assert!((ends[1] - c(10f64.sqrt())).norm() < 1e-2);
    }

    #[test]
    fn substituted_slab_also_tracks() {
        let h = univariate(10.0);
        let opts = TrackOptions { slab: SlabEnclosure::Substituted, ..TrackOptions::default() };
        let tr = track_adaptive(&h, &[c(1.0)], &opts).unwrap();
        assert!(tr.final_point.region().contains_point(&[c(10f64.sqrt())]));
    }

    #[test]
    fn dimension_and_threshold_checks() {
        let h = univariate(10.0);
        assert!(matches!(track_apriori(&h, &[c(1.0), c(2.0)], &TrackOptions::default()), Err(Error::Usage(_))));
        let bad = TrackOptions { rho: 0.9, ..TrackOptions::default() };
        assert!(matches!(track_apriori(&h, &[c(1.0)], &bad), Err(Error::Usage(_))));
    }
}
