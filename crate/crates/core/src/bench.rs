//! Benchmark families, Bézout start systems and the statistics pipeline.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{complexity_report, complexity_report_with_length, univariate_length, ComplexityReport};
use crate::error::{Error, Result};
use crate::homotopy::{random_gamma, AffineHomotopy};
use crate::krawczyk::CertifiedPoint;
use crate::polysys::{PolySystem, Term};
use crate::tracker::{track, TrackMode, TrackOptions, TrackTrace};

/// Katsura system in `n_vars` unknowns `u_0, ..., u_{N-1}`:
/// `u_0 + 2 sum_{i>0} u_i = 1` and, for `k < N - 1`,
/// `sum_{i=-(N-1)}^{N-1} u_{|i|} u_{|k-i|} = u_k` with `u_j = 0` for `j >= N`.
pub fn gen_katsura(n_vars: usize) -> Result<PolySystem> {
    if n_vars < 2 {
        return Err(Error::Usage(format!("katsura needs at least 2 variables, got {n_vars}")));
    }
    let n = n_vars as i64;
    let mono = |pairs: &[(usize, u32)]| {
        let mut e = vec![0u32; n_vars];
        for &(j, k) in pairs {
            e[j] += k;
        }
        e
    };
    let one = Complex64::new(1.0, 0.0);
    let mut polys = Vec::with_capacity(n_vars);
    let mut linear = vec![Term::new(one, mono(&[(0, 1)]))];
    linear.extend((1..n_vars).map(|i| Term::new(Complex64::new(2.0, 0.0), mono(&[(i, 1)]))));
    linear.push(Term::new(-one, mono(&[])));
    polys.push(linear);
    for k in 0..n - 1 {
        let mut terms = Vec::new();
        for i in -(n - 1)..=(n - 1) {
            let (a, b) = (i.unsigned_abs() as usize, (k - i).unsigned_abs() as usize);
            if a < n_vars && b < n_vars {
                terms.push(Term::new(one, mono(&[(a, 1), (b, 1)])));
            }
        }
        terms.push(Term::new(-one, mono(&[(k as usize, 1)])));
        polys.push(terms);
    }
    let sys = PolySystem::new(n_vars, polys)?;
    // merge repeated monomials
    sys.combine(one, &sys, Complex64::new(0.0, 0.0))
}

/// Every monomial of total degree at most `degree` with a standard complex
/// Gaussian coefficient drawn from a generator seeded by `seed`.
pub fn gen_random_dense(n_vars: usize, degree: u32, seed: u64) -> Result<PolySystem> {
    if n_vars == 0 {
        return Err(Error::Usage("random system needs at least 1 variable".into()));
    }
    let mut exps = Vec::new();
    fn rec(n: usize, j: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[j] = e;
            rec(n, j + 1, left - e, cur, out);
        }
        cur[j] = 0;
    }
    rec(n_vars, 0, degree, &mut vec![0; n_vars], &mut exps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let polys = (0..n_vars)
        .map(|_| {
            exps.iter()
                .map(|e| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Term::new(Complex64::new(re * scale, im * scale), e.clone())
                })
                .collect()
        })
        .collect();
    PolySystem::new(n_vars, polys)
}

/// `g_i = x_i^{d_i} - 1` with all `prod d_i` tuples of roots of unity.
pub fn bezout_start(degrees: &[u32]) -> Result<(PolySystem, Vec<Vec<Complex64>>)> {
    let n = degrees.len();
    if n == 0 || degrees.contains(&0) {
        return Err(Error::Usage(format!("degrees must be positive, got {degrees:?}")));
    }
    let polys = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut e = vec![0; n];
            e[i] = d;
            vec![Term::new(Complex64::new(1.0, 0.0), e), Term::new(Complex64::new(-1.0, 0.0), vec![0; n])]
        })
        .collect();
    let roots = |d: u32| -> Vec<Complex64> {
        (0..d)
            .map(|k| match (4 * k) % (4 * d) {
                0 => Complex64::new(1.0, 0.0),
                q if q == 2 * d => Complex64::new(-1.0, 0.0),
                q if q == d => Complex64::new(0.0, 1.0),
                q if q == 3 * d => Complex64::new(0.0, -1.0),
                _ => Complex64::from_polar(1.0, TAU * f64::from(k) / f64::from(d)),
            })
            .collect()
    };
    let mut starts = vec![Vec::new()];
    for &d in degrees {
        let rs = roots(d);
        starts = starts
            .into_iter()
            .flat_map(|s: Vec<Complex64>| {
                rs.iter().map(move |&z| {
                    let mut v = s.clone();
                    v.push(z);
                    v
                })
            })
            .collect();
    }
    Ok((PolySystem::new(n, polys)?, starts))
}

/// Total degrees of the polynomials of `f`.
pub fn degrees_of(f: &PolySystem) -> Vec<u32> {
    f.polys().iter().map(|p| p.degree()).collect()
}

#[derive(Clone, Debug)]
pub struct BenchSystem {
    pub label: String,
    pub system: PolySystem,
    pub degrees: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct BenchmarkSuite {
    pub name: String,
    pub seed: u64,
    pub systems: Vec<BenchSystem>,
}

impl BenchmarkSuite {
    pub fn katsura(min: usize, max: usize, seed: u64) -> Result<Self> {
        let systems = (min..=max)
            .map(|n| {
                let system = gen_katsura(n)?;
                Ok(BenchSystem { label: format!("katsura{n}"), degrees: degrees_of(&system), system })
            })
            .collect::<Result<_>>()?;
        Ok(Self { name: "katsura".into(), seed, systems })
    }

    pub fn random(min: usize, max: usize, seed: u64) -> Result<Self> {
        let systems = (min..=max)
            .map(|n| {
                let system = gen_random_dense(n, 2, seed.wrapping_add(n as u64))?;
                Ok(BenchSystem { label: format!("random{n}"), degrees: degrees_of(&system), system })
            })
            .collect::<Result<_>>()?;
        Ok(Self { name: "random".into(), seed, systems })
    }

    pub fn by_name(name: &str, min: usize, max: usize, seed: u64) -> Result<Self> {
        match name {
            "katsura" => Self::katsura(min, max, seed),
            "random" => Self::random(min, max, seed),
            _ => Err(Error::Usage(format!("unknown suite {name:?}"))),
        }
    }

    /// Bézout homotopies for every system, in suite order.
    pub fn homotopies(&self) -> Result<Vec<(AffineHomotopy, Vec<Vec<Complex64>>)>> {
        self.systems
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (g, starts) = bezout_start(&s.degrees)?;
                let gamma = random_gamma(self.seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
                Ok((AffineHomotopy::make_linear(g, s.system.clone(), gamma)?, starts))
            })
            .collect()
    }
}

/// Per-path statistics, one CSV row each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathStats {
    pub label: String,
    pub path_id: usize,
    pub mode: TrackMode,
    pub iterations: usize,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_median: f64,
    pub r_min: f64,
    pub avg_r_ratio: f64,
    pub eta_max: f64,
    pub success: bool,
}

pub const CSV_HEADER: &str = "label,path_id,mode,iterations,steps,dt_min,dt_median,r_min,avg_r_ratio,eta_max,success";

impl PathStats {
    pub fn from_trace(label: &str, path_id: usize, tr: &TrackTrace) -> Self {
        Self {
            label: label.to_string(),
            path_id,
            mode: tr.mode,
            iterations: tr.iterations,
            steps: tr.step_count(),
            dt_min: tr.dt_min(),
            dt_median: tr.dt_median(),
            r_min: tr.r_min(),
            avg_r_ratio: tr.avg_r_ratio(),
            eta_max: tr.eta_max(),
            success: tr.success,
        }
    }

    fn failed(label: &str, path_id: usize, mode: TrackMode) -> Self {
        Self {
            label: label.to_string(),
            path_id,
            mode,
            iterations: 0,
            steps: 0,
            dt_min: f64::NAN,
            dt_median: f64::NAN,
            r_min: f64::NAN,
            avg_r_ratio: f64::NAN,
            eta_max: f64::NAN,
            success: false,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            self.label,
            self.path_id,
            self.mode.as_str(),
            self.iterations,
            self.steps,
            self.dt_min,
            self.dt_median,
            self.r_min,
            self.avg_r_ratio,
            self.eta_max,
            self.success
        )
    }
}

/// Everything kept from one tracked path; full traces are dropped to bound memory.
#[derive(Clone, Debug, Serialize)]
pub struct PathOutcome {
    pub stats: PathStats,
    pub start: Vec<Complex64>,
    pub final_point: Option<CertifiedPoint>,
    pub report: Option<ComplexityReport>,
    /// Steps whose slab re-check failed (a priori mode with verification).
    pub slab_failures: usize,
    pub slab_checked: usize,
    /// Refinements with `u` small enough for the radius floor to apply.
    pub floor_checked: usize,
    pub floor_violations: usize,
    /// `beta <= 1.1 r (rho + 1)` failures at certified points.
    pub beta_violations: usize,
    pub error: Option<String>,
}

impl PathOutcome {
    fn from_trace(label: &str, path_id: usize, tr: &TrackTrace, opts: &TrackOptions) -> Self {
        let records = tr.steps.iter().map(|s| (s.r, s.alpha)).chain(std::iter::once((tr.final_point.r, tr.final_alpha)));
        let (mut floor_checked, mut floor_violations, mut beta_violations) = (0, 0, 0);
        for (r, a) in records {
            if a.u_condition() {
                floor_checked += 1;
                if !a.floor_holds(r) {
                    floor_violations += 1;
                }
            }
            if a.beta > 1.1 * r * (opts.rho + 1.0) {
                beta_violations += 1;
            }
        }
        let checked: Vec<bool> = tr.steps.iter().filter_map(|s| s.slab_verified).collect();
        Self {
            stats: PathStats::from_trace(label, path_id, tr),
            start: tr.start.clone(),
            final_point: Some(tr.final_point.clone()),
            report: Some(complexity_report(tr, opts.rho, opts.tau)),
            slab_failures: checked.iter().filter(|ok| !**ok).count(),
            slab_checked: checked.len(),
            floor_checked,
            floor_violations,
            beta_violations,
            error: None,
        }
    }
}

/// Results of [`run_suite`] in deterministic suite order.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub paths: Vec<PathOutcome>,
}

/// Per-system, per-mode averages over successful paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub label: String,
    pub mode: TrackMode,
    pub paths: usize,
    pub failures: usize,
    pub iterations: f64,
    pub steps: f64,
    pub dt_min: f64,
    pub dt_median: f64,
    pub r_min: f64,
    pub avg_r_ratio: f64,
    pub eta_max: f64,
}

impl SuiteResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.paths {
            let _ = writeln!(out, "{}", p.stats.csv_row());
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            suite: &'a str,
            paths: Vec<&'a PathStats>,
            reports: Vec<&'a Option<ComplexityReport>>,
            summary: Vec<SummaryRow>,
        }
        serde_json::to_string_pretty(&Out {
            suite: &self.suite,
            paths: self.paths.iter().map(|p| &p.stats).collect(),
            reports: self.paths.iter().map(|p| &p.report).collect(),
            summary: self.summary(),
        })
        .expect("suite serialises")
    }

    pub fn all_succeeded(&self) -> bool {
        self.paths.iter().all(|p| p.stats.success)
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, TrackMode)> = Vec::new();
        for p in &self.paths {
            let k = (p.stats.label.clone(), p.stats.mode);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(label, mode)| {
                let rows: Vec<&PathStats> =
                    self.paths.iter().map(|p| &p.stats).filter(|s| s.label == label && s.mode == mode).collect();
                let ok: Vec<&&PathStats> = rows.iter().filter(|s| s.success).collect();
                let mean = |f: &dyn Fn(&PathStats) -> f64| {
                    if ok.is_empty() {
                        f64::NAN
                    } else {
                        ok.iter().map(|s| f(s)).sum::<f64>() / ok.len() as f64
                    }
                };
                SummaryRow {
                    paths: rows.len(),
                    failures: rows.len() - ok.len(),
                    iterations: mean(&|s| s.iterations as f64),
                    steps: mean(&|s| s.steps as f64),
                    dt_min: mean(&|s| s.dt_min),
                    dt_median: mean(&|s| s.dt_median),
                    r_min: mean(&|s| s.r_min),
                    avg_r_ratio: mean(&|s| s.avg_r_ratio),
                    eta_max: mean(&|s| s.eta_max),
                    label,
                    mode,
                }
            })
            .collect()
    }
}

/// Which trackers [`run_suite`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeSelection {
    Adaptive,
    Apriori,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> &'static [TrackMode] {
        match self {
            ModeSelection::Adaptive => &[TrackMode::Adaptive],
            ModeSelection::Apriori => &[TrackMode::Apriori],
            ModeSelection::Both => &[TrackMode::Adaptive, TrackMode::Apriori],
        }
    }
}

impl std::str::FromStr for ModeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(ModeSelection::Adaptive),
            "apriori" => Ok(ModeSelection::Apriori),
            "both" => Ok(ModeSelection::Both),
            _ => Err(Error::Usage(format!("unknown mode {s:?}"))),
        }
    }
}

/// Tracks every path of every system on a pool of `threads` workers
/// (`0` uses the default pool size). Failures are recorded per path.
pub fn run_suite(suite: &BenchmarkSuite, modes: ModeSelection, opts: &TrackOptions, threads: usize) -> Result<SuiteResult> {
    let homotopies = suite.homotopies()?;
    let mut jobs = Vec::new();
    for (sys, (h, starts)) in suite.systems.iter().zip(&homotopies) {
        for &mode in modes.modes() {
            for (path_id, s) in starts.iter().enumerate() {
                jobs.push((sys.label.as_str(), h, path_id, s, mode));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot build worker pool: {e}")))?;
    let paths = pool.install(|| {
        jobs.par_iter()
            .map(|&(label, h, path_id, start, mode)| match track(h, start, mode, opts) {
                Ok(tr) => PathOutcome::from_trace(label, path_id, &tr, opts),
                Err(e) => PathOutcome {
                    stats: PathStats::failed(label, path_id, mode),
                    start: start.clone(),
                    final_point: None,
                    report: None,
                    slab_failures: 0,
                    slab_checked: 0,
                    floor_checked: 0,
                    floor_violations: 0,
                    beta_violations: 0,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    Ok(SuiteResult { suite: suite.name.clone(), paths })
}

/// One row of the univariate validation table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnivariateRow {
    pub m: f64,
    /// Accepted steps `P`.
    pub steps: usize,
    /// Krawczyk evaluations.
    pub iterations: usize,
    /// Radius held along the path.
    pub radius: f64,
    /// `(sqrt(m) - 1) / radius`.
    pub length: f64,
    /// `P / L`.
    pub ratio: f64,
    pub report: ComplexityReport,
    pub final_point: CertifiedPoint,
}

pub const UNIVARIATE_RADIUS: f64 = 0.05;

/// Tracks `x^2 - 1 -> x^2 - m` with `gamma = 1` from `x = 1` at a pinned
/// radius of 0.05 and compares the step count with the exact path length.
pub fn validate_univariate(ms: &[f64], rho: f64, tau: f64) -> Result<Vec<UnivariateRow>> {
    let quad = |a: f64| {
        PolySystem::new(
            1,
            vec![vec![Term::new(Complex64::new(1.0, 0.0), vec![2]), Term::new(Complex64::new(-a, 0.0), vec![0])]],
        )
    };
    let opts = TrackOptions { rho, tau, initial_radius: UNIVARIATE_RADIUS, expand_radius: false, ..TrackOptions::default() };
    ms.iter()
        .map(|&m| {
            if !(m > 1.0 && m.is_finite()) {
                return Err(Error::Usage(format!("m must exceed 1, got {m}")));
            }
            let h = AffineHomotopy::make_linear(quad(1.0)?, quad(m)?, Complex64::new(1.0, 0.0))?;
            let tr = track(&h, &[Complex64::new(1.0, 0.0)], TrackMode::Apriori, &opts)?;
            let radius = tr.steps.iter().map(|s| s.r).fold(tr.final_point.r, f64::min);
            let length = univariate_length(m, radius);
            let steps = tr.step_count();
            Ok(UnivariateRow {
                m,
                steps,
                iterations: tr.iterations,
                radius,
                length,
                ratio: steps as f64 / length,
                report: complexity_report_with_length(&tr, length, rho, tau),
                final_point: tr.final_point,
            })
        })
        .collect()
}

pub fn univariate_csv(rows: &[UnivariateRow]) -> String {
    let mut out = String::from("m,steps,iterations,radius,L,ratio\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.m, r.steps, r.iterations, r.radius, r.length, r.ratio);
    }
    out
}
