//! Straight-line homotopies `F_t = (1 - t) gamma g + t f`.
//!
//! The homotopy is affine in `t`: `F_t = gamma g + t F1` with the
//! time-independent direction `F1 = f - gamma g`, so every derivative of `F_t`
//! is affine in `t` as well. Enclosures are built from interval coefficients
//! for `gamma g` and `F1`, which makes `F_T` rigorous for any `T` in `[0, 1]`.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, RealInterval};
use crate::polysys::{IntervalPolySystem, PolySystem, SystemJson, Term};

/// A coefficient of `F_t` over a shared exponent vector.
#[derive(Clone, Debug)]
struct AffineTerm {
    exps: Vec<u32>,
    base: ComplexInterval,
    slope: ComplexInterval,
}

#[derive(Clone, Debug)]
pub struct AffineHomotopy {
    start: PolySystem,
    target: PolySystem,
    gamma: Complex64,
    f1: PolySystem,
    f1_enc: IntervalPolySystem,
    terms: Vec<Vec<AffineTerm>>,
    /// `F_0` enclosed, with terms in the order of `terms`.
    shape: IntervalPolySystem,
}

/// Draws `exp(2 pi i theta)` with `theta` uniform in `[0, 1)`.
pub fn random_gamma(seed: u64) -> Complex64 {
    let theta: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    Complex64::from_polar(1.0, TAU * theta)
}

impl AffineHomotopy {
    /// Builds `F_t = (1 - t) gamma g + t f`.
    pub fn make_linear(start: PolySystem, target: PolySystem, gamma: Complex64) -> Result<Self> {
        if start.dim() != target.dim() {
            return Err(Error::Usage(format!(
                "start system has dimension {} but target has {}",
                start.dim(),
                target.dim()
            )));
        }
        if !(gamma.re.is_finite() && gamma.im.is_finite()) || gamma == Complex64::new(0.0, 0.0) {
            return Err(Error::Usage(format!("invalid gamma {gamma}")));
        }
        let n = start.dim();
        let gamma_enc = ComplexInterval::point(gamma);
        let mut terms = Vec::with_capacity(n);
        for (g, f) in start.polys().iter().zip(target.polys()) {
            let mut index: HashMap<&[u32], usize> = HashMap::new();
            let mut poly: Vec<AffineTerm> = Vec::new();
            for t in g.terms() {
                let scaled = ComplexInterval::point(t.coeff).mul(gamma_enc);
                match index.get(t.exps.as_slice()) {
                    Some(&k) => {
                        poly[k].base = poly[k].base.add(scaled);
                        poly[k].slope = poly[k].slope.sub(scaled);
                    }
                    None => {
                        index.insert(&t.exps, poly.len());
                        poly.push(AffineTerm { exps: t.exps.clone(), base: scaled, slope: -scaled });
                    }
                }
            }
            for t in f.terms() {
                let c = ComplexInterval::point(t.coeff);
                match index.get(t.exps.as_slice()) {
                    Some(&k) => poly[k].slope = poly[k].slope.add(c),
                    None => {
                        index.insert(&t.exps, poly.len());
                        poly.push(AffineTerm { exps: t.exps.clone(), base: ComplexInterval::zero(), slope: c });
                    }
                }
            }
            terms.push(poly);
        }
        let f1_enc = IntervalPolySystem::new(
            n,
            terms.iter().map(|p| p.iter().map(|t| Term::new(t.slope, t.exps.clone())).collect()).collect(),
        )?;
        let shape = IntervalPolySystem::new(
            n,
            terms.iter().map(|p| p.iter().map(|t| Term::new(t.base, t.exps.clone())).collect()).collect(),
        )?;
        let f1 = target.combine(Complex64::new(1.0, 0.0), &start, -gamma)?;
        Ok(Self { start, target, gamma, f1, f1_enc, terms, shape })
    }

    pub fn from_json(j: HomotopyJson) -> Result<Self> {
        let start = PolySystem::try_from(j.start)?;
        let target = PolySystem::try_from(j.target)?;
        let gamma = match j.gamma {
            GammaJson::Fixed([re, im]) => Complex64::new(re, im),
            GammaJson::Random(ref s) if s == "random" => random_gamma(j.seed.unwrap_or(0)),
            GammaJson::Random(s) => return Err(Error::Parse(format!("gamma must be [re, im] or \"random\", got {s:?}"))),
        };
        Self::make_linear(start, target, gamma)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(serde_json::from_str(s)?)
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn start(&self) -> &PolySystem {
        &self.start
    }

    pub fn target(&self) -> &PolySystem {
        &self.target
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    /// `F1 = f - gamma g` in floating point.
    pub fn f1(&self) -> &PolySystem {
        &self.f1
    }

    /// Enclosure of `F1 = f - gamma g`.
    pub fn f1_enclosure(&self) -> &IntervalPolySystem {
        &self.f1_enc
    }

    /// `F_t` with coefficients `(1 - t) gamma g + t f` in floating point.
    pub fn at(&self, t: f64) -> Result<PolySystem> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Usage(format!("t = {t} is outside [0, 1]")));
        }
        self.start.combine((1.0 - t) * self.gamma, &self.target, Complex64::new(t, 0.0))
    }

    /// Enclosure of `{F_t : t in T}` obtained by substituting `T` into each
    /// affine coefficient `gamma g_c + t (f_c - gamma g_c)`.
    pub fn over_interval(&self, t: RealInterval) -> Result<IntervalPolySystem> {
        let mut sys = self.shape.clone();
        self.write_over_interval(t, &mut sys)?;
        Ok(sys)
    }

    /// Same as [`over_interval`](Self::over_interval) but overwrites `sys`,
    /// which must have been produced by this homotopy.
    pub fn write_over_interval(&self, t: RealInterval, sys: &mut IntervalPolySystem) -> Result<()> {
        if t.lo() < 0.0 || t.hi() > 1.0 {
            return Err(Error::Usage(format!("time interval {t:?} is not inside [0, 1]")));
        }
        debug_assert_eq!(sys.polys().len(), self.terms.len());
        sys.set_coefficients(|i, k| {
            let a = &self.terms[i][k];
            a.base.add(a.slope.mul_real(t))
        });
        Ok(())
    }

    /// Rigorous enclosure of `F_t` at a single time.
    pub fn enclosure_at(&self, t: f64) -> Result<IntervalPolySystem> {
        self.over_interval(RealInterval::point(t))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaJson {
    Fixed([f64; 2]),
    Random(String),
}

/// `{"start": system, "target": system, "gamma": [re, im] | "random", "seed": int}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyJson {
    pub start: SystemJson,
    pub target: SystemJson,
    pub gamma: GammaJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalBox;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn quad(a: f64) -> PolySystem {
        PolySystem::new(1, vec![vec![Term::new(c(1.0), vec![2]), Term::new(c(-a), vec![0])]]).unwrap()
    }

    fn coeff_of(f: &PolySystem, i: usize, exps: &[u32]) -> Complex64 {
        f.polys()[i].terms().iter().filter(|t| t.exps == exps).map(|t| t.coeff).sum()
    }

    #[test]
    fn univariate_linear_homotopy() {
        let h = AffineHomotopy::make_linear(quad(1.0), quad(10.0), c(1.0)).unwrap();
        // F1 = -9
        assert_eq!(coeff_of(h.f1(), 0, &[0]), c(-9.0));
        assert_eq!(coeff_of(h.f1(), 0, &[2]), c(0.0));
        let half = h.at(0.5).unwrap();
        assert_eq!(coeff_of(&half, 0, &[2]), c(1.0));
        assert_eq!(coeff_of(&half, 0, &[0]), c(-5.5));
        assert_eq!(h.at(0.0).unwrap(), quad(1.0));
        let end = h.at(1.0).unwrap();
        assert_eq!(coeff_of(&end, 0, &[2]), c(1.0));
        assert_eq!(coeff_of(&end, 0, &[0]), c(-10.0));
        assert!(matches!(h.at(1.5), Err(Error::Usage(_))));
        assert!(matches!(h.at(-0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn substituting_the_unit_interval() {
        let h = AffineHomotopy::make_linear(quad(1.0), quad(10.0), c(1.0)).unwrap();
        let s = h.over_interval(RealInterval::new(0.0, 1.0)).unwrap();
        let constant = s.polys()[0].terms().iter().find(|t| t.exps == [0]).unwrap().coeff;
        assert!(constant.re.contains(-10.0) && constant.re.contains(-1.0));
        assert!((constant.re.lo() + 10.0).abs() < 1e-14 && (constant.re.hi() + 1.0).abs() < 1e-14);
        assert!(matches!(h.over_interval(RealInterval::new(0.5, 1.5)), Err(Error::Usage(_))));
        let p = h.over_interval(RealInterval::point(0.25)).unwrap();
        let v = p.eval_interval(&IntervalBox::from_point(&[c(2.0)]));
        assert!(v[0].contains(c(4.0 - 0.25 * 9.0 - 1.0)));
        assert!(v[0].re.width() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let g2 = PolySystem::new(
            2,
            vec![vec![Term::new(c(1.0), vec![1, 0])], vec![Term::new(c(1.0), vec![0, 1])]],
        )
        .unwrap();
        assert!(matches!(AffineHomotopy::make_linear(g2, quad(2.0), c(1.0)), Err(Error::Usage(_))));
    }

    #[test]
    fn gamma_is_seeded_and_unimodular() {
        let a = random_gamma(7);
        assert_eq!(a, random_gamma(7));
        assert!((a.norm() - 1.0).abs() < 1e-15);
        assert_ne!(a, random_gamma(8));
    }

    #[test]
    fn json_round_trip() {
        let src = format!(
            r#"{{"start": {}, "target": {}, "gamma": "random", "seed": 3}}"#,
            quad(1.0).to_json_string(),
            quad(4.0).to_json_string()
        );
        let h = AffineHomotopy::from_json_str(&src).unwrap();
        assert_eq!(h.gamma(), random_gamma(3));
        let fixed = src.replace("\"random\"", "[0.0, 1.0]");
        assert_eq!(AffineHomotopy::from_json_str(&fixed).unwrap().gamma(), Complex64::new(0.0, 1.0));
        let bad = src.replace("\"random\"", "\"sometimes\"");
        assert!(matches!(AffineHomotopy::from_json_str(&bad), Err(Error::Parse(_))));
    }
}
