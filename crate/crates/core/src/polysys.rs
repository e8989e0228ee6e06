//! Sparse square polynomial systems over the complex numbers.
//!
//! A system stores its terms with either point coefficients ([`PolySystem`])
//! or interval coefficients ([`IntervalPolySystem`]). Both evaluate at points
//! and over interval boxes using the natural interval extension, and both
//! carry a symbolic Jacobian whose coefficients are enclosures, so
//! `jacobian_box` is rigorous even when `k * c` is not representable.

use std::collections::HashMap;
use std::fmt::Debug;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, IntervalBox, IntervalMatrix, PointMatrix, RealInterval};

/// Coefficient field of a [`SparseSystem`].
pub trait Coefficient: Copy + Debug + PartialEq + Send + Sync {
    fn enclose(self) -> ComplexInterval;
    fn approx(self) -> Complex64;
    /// Enclosure of `self * v`.
    fn times(self, v: ComplexInterval) -> ComplexInterval;
    fn is_zero(self) -> bool;
}

impl Coefficient for Complex64 {
    #[inline]
    fn enclose(self) -> ComplexInterval {
        ComplexInterval::point(self)
    }
    #[inline]
    fn approx(self) -> Complex64 {
        self
    }
    #[inline]
    fn times(self, v: ComplexInterval) -> ComplexInterval {
        v.mul_point(self)
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Coefficient for ComplexInterval {
    #[inline]
    fn enclose(self) -> ComplexInterval {
        self
    }
    #[inline]
    fn approx(self) -> Complex64 {
        self.mid()
    }
    #[inline]
    fn times(self, v: ComplexInterval) -> ComplexInterval {
        v.mul(self)
    }
    fn is_zero(self) -> bool {
        self.re == RealInterval::zero() && self.im == RealInterval::zero()
    }
}

/// `coeff * x_1^{e_1} ... x_n^{e_n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<C> {
    pub coeff: C,
    pub exps: Vec<u32>,
}

pub type Monomial = Term<Complex64>;

impl<C: Coefficient> Term<C> {
    pub fn new(coeff: C, exps: Vec<u32>) -> Self {
        Self { coeff, exps }
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

/// Powers `x_j^e` for `e = 0..=max_deg`, shared by every term evaluated on
/// the same box.
struct BoxPowers {
    stride: usize,
    data: Vec<ComplexInterval>,
}

impl BoxPowers {
    fn new(x: &IntervalBox, max_deg: usize) -> Self {
        let stride = max_deg + 1;
        let mut data = Vec::with_capacity(stride * x.len());
        for xi in x.iter() {
            data.push(ComplexInterval::point(Complex64::new(1.0, 0.0)));
            let mut p = *xi;
            for e in 1..=max_deg {
                if e > 1 {
                    p = p.mul(*xi);
                }
                data.push(p);
            }
        }
        Self { stride, data }
    }

    #[inline]
    fn get(&self, j: usize, e: u32) -> ComplexInterval {
        self.data[j * self.stride + e as usize]
    }
}

struct PointPowers {
    stride: usize,
    data: Vec<Complex64>,
}

impl PointPowers {
    fn new(x: &[Complex64], max_deg: usize) -> Self {
        let stride = max_deg + 1;
        let mut data = Vec::with_capacity(stride * x.len());
        for &xi in x {
            let mut p = Complex64::new(1.0, 0.0);
            data.push(p);
            for _ in 1..=max_deg {
                p *= xi;
                data.push(p);
            }
        }
        Self { stride, data }
    }

    #[inline]
    fn get(&self, j: usize, e: u32) -> Complex64 {
        self.data[j * self.stride + e as usize]
    }
}

/// A single polynomial as a list of terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<C> {
    terms: Vec<Term<C>>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn new(terms: Vec<Term<C>>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[Term<C>] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_zero())
    }

    fn eval_with(&self, pows: &BoxPowers) -> ComplexInterval {
        let mut sum = ComplexInterval::zero();
        for term in &self.terms {
            let mut prod: Option<ComplexInterval> = None;
            for (j, &e) in term.exps.iter().enumerate() {
                if e > 0 {
                    let p = pows.get(j, e);
                    prod = Some(match prod {
                        None => p,
                        Some(a) => a.mul(p),
                    });
                }
            }
            let value = match prod {
                None => term.coeff.enclose(),
                Some(a) => term.coeff.times(a),
            };
            sum = sum.add(value);
        }
        sum
    }

    fn eval_point_with(&self, pows: &PointPowers) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                term.exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .fold(term.coeff.approx(), |acc, (j, &e)| acc * pows.get(j, e))
            })
            .sum()
    }

    pub fn eval_point(&self, x: &[Complex64]) -> Complex64 {
        self.eval_point_with(&PointPowers::new(x, self.degree() as usize))
    }

    pub fn eval_box(&self, x: &IntervalBox) -> ComplexInterval {
        self.eval_with(&BoxPowers::new(x, self.degree() as usize))
    }

    /// Symbolic `d/dx_j`, with enclosed coefficients `e_j * c`.
    pub fn derivative(&self, j: usize) -> Polynomial<ComplexInterval> {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exps[j] > 0)
            .map(|t| {
                let mut exps = t.exps.clone();
                exps[j] -= 1;
                let k = Complex64::new(t.exps[j] as f64, 0.0);
                Term::new(t.coeff.enclose().mul_point(k), exps)
            })
            .collect();
        Polynomial { terms }
    }
}

/// `n x n` matrix of polynomials with enclosed coefficients (a symbolic Jacobian).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    n: usize,
    degree: u32,
    entries: Vec<Polynomial<ComplexInterval>>,
}

impl PolyMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial<ComplexInterval> {
        &self.entries[i * self.n + j]
    }

    pub fn eval_box(&self, x: &IntervalBox) -> IntervalMatrix {
        let pows = BoxPowers::new(x, self.degree as usize);
        IntervalMatrix::from_raw(self.n, self.entries.iter().map(|p| p.eval_with(&pows)).collect())
    }

    pub fn eval_point(&self, x: &[Complex64]) -> PointMatrix {
        let pows = PointPowers::new(x, self.degree as usize);
        PointMatrix::from_raw(self.n, self.entries.iter().map(|p| p.eval_point_with(&pows)).collect())
    }
}

/// Square sparse polynomial system `F: C^n -> C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem<C> {
    n: usize,
    degree: u32,
    polys: Vec<Polynomial<C>>,
    jac: PolyMatrix,
    plan: Plan,
}

/// Straight-line program shared by a system and its Jacobian.
///
/// Monomial 0 is the constant; monomial `k > 0` is monomial `monos[k].0`
/// times `x_{monos[k].1}`, so each one costs a single multiplication.
#[derive(Clone, Debug, PartialEq)]
struct Plan {
    monos: Vec<(u32, u32)>,
    poly_terms: Vec<Vec<u32>>,
    jac_terms: Vec<Vec<u32>>,
    /// Source term index and exponent factor of each Jacobian term.
    jac_src: Vec<Vec<(u32, f64)>>,
}

fn intern(index: &mut HashMap<Vec<u32>, u32>, monos: &mut Vec<(u32, u32)>, e: &[u32]) -> u32 {
    if let Some(&k) = index.get(e) {
        return k;
    }
    let j = e.iter().rposition(|&a| a > 0).expect("constant monomial is interned first");
    let mut parent = e.to_vec();
    parent[j] -= 1;
    let p = intern(index, monos, &parent);
    let k = monos.len() as u32;
    monos.push((p, j as u32));
    index.insert(e.to_vec(), k);
    k
}

impl Plan {
    fn new<C: Coefficient>(n: usize, polys: &[Polynomial<C>], jac: &[Polynomial<ComplexInterval>]) -> Self {
        let mut index = HashMap::from([(vec![0; n], 0)]);
        let mut monos = vec![(0, 0)];
        let mut poly_terms = Vec::with_capacity(polys.len());
        for p in polys {
            poly_terms.push(p.terms.iter().map(|t| intern(&mut index, &mut monos, &t.exps)).collect());
        }
        let mut jac_terms = Vec::with_capacity(jac.len());
        for p in jac {
            jac_terms.push(p.terms.iter().map(|t| intern(&mut index, &mut monos, &t.exps)).collect());
        }
        let jac_src = (0..n * n)
            .map(|e| {
                let j = e % n;
                polys[e / n]
                    .terms
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.exps[j] > 0)
                    .map(|(k, t)| (k as u32, f64::from(t.exps[j])))
                    .collect()
            })
            .collect();
        Self { monos, poly_terms, jac_terms, jac_src }
    }

    fn box_values(&self, x: &IntervalBox) -> Vec<ComplexInterval> {
        let mut v = Vec::with_capacity(self.monos.len());
        v.push(ComplexInterval::point(Complex64::new(1.0, 0.0)));
        for &(p, j) in &self.monos[1..] {
            let xj = x[j as usize];
            let m = if p == 0 { xj } else { v[p as usize].mul(xj) };
            v.push(m);
        }
        v
    }

    fn point_values(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.monos.len());
        v.push(Complex64::new(1.0, 0.0));
        for &(p, j) in &self.monos[1..] {
            let m = v[p as usize] * x[j as usize];
            v.push(m);
        }
        v
    }
}

fn sum_box<C: Coefficient>(terms: &[Term<C>], idx: &[u32], v: &[ComplexInterval]) -> ComplexInterval {
    terms.iter().zip(idx).fold(ComplexInterval::zero(), |acc, (t, &k)| {
        acc.add(if k == 0 { t.coeff.enclose() } else { t.coeff.times(v[k as usize]) })
    })
}

fn sum_point<C: Coefficient>(terms: &[Term<C>], idx: &[u32], v: &[Complex64]) -> Complex64 {
    terms.iter().zip(idx).map(|(t, &k)| t.coeff.approx() * v[k as usize]).sum()
}

/// System with point coefficients, as read from input.
pub type PolySystem = SparseSystem<Complex64>;
/// System with interval coefficients, e.g. a homotopy over a time interval.
pub type IntervalPolySystem = SparseSystem<ComplexInterval>;

impl<C: Coefficient> SparseSystem<C> {
    /// Validates squareness and exponent lengths and builds the Jacobian.
    pub fn new(n: usize, polys: Vec<Vec<Term<C>>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("system dimension must be at least 1".into()));
        }
        if polys.len() != n {
            return Err(Error::Usage(format!("system is not square: {} polynomials in {n} variables", polys.len())));
        }
        for (i, p) in polys.iter().enumerate() {
            if let Some(t) = p.iter().find(|t| t.exps.len() != n) {
                return Err(Error::Usage(format!(
                    "polynomial {i} has an exponent vector of length {} (expected {n})",
                    t.exps.len()
                )));
            }
        }
        let polys: Vec<Polynomial<C>> = polys.into_iter().map(Polynomial::new).collect();
        let degree = polys.iter().map(Polynomial::degree).max().unwrap_or(0);
        let entries: Vec<_> = polys.iter().flat_map(|p| (0..n).map(move |j| p.derivative(j))).collect();
        let jac_degree = entries.iter().map(Polynomial::degree).max().unwrap_or(0);
        let plan = Plan::new(n, &polys, &entries);
        Ok(Self { n, degree, polys, jac: PolyMatrix { n, degree: jac_degree, entries }, plan })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Maximum total degree over all terms.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn polys(&self) -> &[Polynomial<C>] {
        &self.polys
    }

    pub fn jacobian(&self) -> &PolyMatrix {
        &self.jac
    }

    /// `F(x)` in floating point (interval coefficients use their midpoints).
    pub fn eval_point(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.n);
        let v = self.plan.point_values(x);
        self.polys.iter().zip(&self.plan.poly_terms).map(|(p, idx)| sum_point(&p.terms, idx, &v)).collect()
    }

    /// Natural interval extension of `F` over `x`.
    pub fn eval_interval(&self, x: &IntervalBox) -> IntervalBox {
        debug_assert_eq!(x.len(), self.n);
        let v = self.plan.box_values(x);
        self.polys.iter().zip(&self.plan.poly_terms).map(|(p, idx)| sum_box(&p.terms, idx, &v)).collect()
    }

    pub fn jacobian_point(&self, x: &[Complex64]) -> PointMatrix {
        let v = self.plan.point_values(x);
        let entries = self.jac.entries.iter().zip(&self.plan.jac_terms);
        PointMatrix::from_raw(self.n, entries.map(|(p, idx)| sum_point(&p.terms, idx, &v)).collect())
    }

    /// Natural interval extension of `JF` over `x`.
    pub fn jacobian_interval(&self, x: &IntervalBox) -> IntervalMatrix {
        let v = self.plan.box_values(x);
        let entries = self.jac.entries.iter().zip(&self.plan.jac_terms);
        IntervalMatrix::from_raw(self.n, entries.map(|(p, idx)| sum_box(&p.terms, idx, &v)).collect())
    }

    /// Overwrites the coefficient of term `k` of polynomial `i` with `f(i, k)`
    /// and refreshes the Jacobian to match. Supports and term order are kept.
    pub fn set_coefficients(&mut self, mut f: impl FnMut(usize, usize) -> C) {
        for (i, p) in self.polys.iter_mut().enumerate() {
            for (k, t) in p.terms.iter_mut().enumerate() {
                t.coeff = f(i, k);
            }
        }
        for (e, entry) in self.jac.entries.iter_mut().enumerate() {
            let src = &self.polys[e / self.n].terms;
            for (t, &(k, factor)) in entry.terms.iter_mut().zip(&self.plan.jac_src[e]) {
                t.coeff = src[k as usize].coeff.enclose().mul_point(Complex64::new(factor, 0.0));
            }
        }
    }

    /// The same system with every coefficient replaced by its enclosure.
    pub fn to_interval(&self) -> IntervalPolySystem {
        self.map_coeffs(|c| c.enclose())
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(C) -> D) -> SparseSystem<D> {
        let polys = self
            .polys
            .iter()
            .map(|p| p.terms.iter().map(|t| Term::new(f(t.coeff), t.exps.clone())).collect())
            .collect();
        SparseSystem::new(self.n, polys).expect("coefficient map preserves shape")
    }

    /// Entries of the `k`-th derivative tensor at `x`, enclosed.
    ///
    /// Returns one list per output polynomial; each list has one entry per
    /// multiset `j_1 <= ... <= j_k` of variable indices, in the order of
    /// [`index_multisets`].
    pub fn derivative_tensor(&self, x: &[Complex64], k: u32) -> Vec<Vec<ComplexInterval>> {
        let sets = index_multisets(self.n, k);
        let xb = IntervalBox::from_point(x);
        let pows = BoxPowers::new(&xb, self.degree as usize);
        self.polys
            .iter()
            .map(|p| sets.iter().map(|s| tensor_entry(p, &s.counts, &pows)).collect())
            .collect()
    }
}

/// A multiset of `k` variable indices and the number of ordered tuples it stands for.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexMultiset {
    pub counts: Vec<u32>,
    pub orderings: f64,
}

/// All multisets of size `k` drawn from `0..n`, in lexicographic order.
pub fn index_multisets(n: usize, k: u32) -> Vec<IndexMultiset> {
    fn rec(n: usize, start: usize, left: u32, counts: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(counts.clone());
            return;
        }
        for j in start..n {
            counts[j] += 1;
            rec(n, j, left - 1, counts, out);
            counts[j] -= 1;
        }
    }
    let mut raw = Vec::new();
    rec(n, 0, k, &mut vec![0; n], &mut raw);
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    raw.into_iter()
        .map(|counts| {
            let orderings = fact(k) / counts.iter().map(|&c| fact(c)).product::<f64>();
            IndexMultiset { counts, orderings }
        })
        .collect()
}

/// `d^{|b|} p / dx^b` at the point behind `pows`, where `b` is `counts`.
fn tensor_entry<C: Coefficient>(p: &Polynomial<C>, counts: &[u32], pows: &BoxPowers) -> ComplexInterval {
    let mut sum = ComplexInterval::zero();
    for term in p.terms() {
        if term.exps.iter().zip(counts).any(|(&a, &b)| a < b) {
            continue;
        }
        let mut factor = 1.0_f64;
        let mut value: Option<ComplexInterval> = None;
        for (j, (&a, &b)) in term.exps.iter().zip(counts).enumerate() {
            for m in 0..b {
                factor *= f64::from(a - m);
            }
            let e = a - b;
            if e > 0 {
                let pw = pows.get(j, e);
                value = Some(value.map_or(pw, |v| v.mul(pw)));
            }
        }
        // falling factorials of small exponents are exact in f64
        let coeff = term.coeff.enclose().mul_point(Complex64::new(factor, 0.0));
        sum = sum.add(value.map_or(coeff, |v| v.mul(coeff)));
    }
    sum
}

/// Row-sum bound on `||Y T / k!||` for a tensor given by [`SparseSystem::derivative_tensor`].
pub fn preconditioned_tensor_bound(tensor: &[Vec<ComplexInterval>], y: &PointMatrix, n: usize, k: u32) -> f64 {
    let sets = index_multisets(n, k);
    let kfact: f64 = (1..=k).map(f64::from).product();
    let mut best = 0.0_f64;
    for i in 0..y.dim() {
        let mut row = 0.0_f64;
        for (s, set) in sets.iter().enumerate() {
            let entry = (0..y.dim()).fold(ComplexInterval::zero(), |acc, l| acc.add(tensor[l][s].mul_point(y.get(i, l))));
            row = (row + (entry.re.magnitude() + entry.im.magnitude()).next_up() * set.orderings).next_up();
        }
        best = best.max(row);
    }
    (best / kfact).next_up()
}

/// Upper bound on `||Y J^k F(x) / k!||` using the multilinear row-sum norm.
///
/// Returns 0 when `k` exceeds the degree of `F`.
pub fn higher_tensor_norm_bound<C: Coefficient>(f: &SparseSystem<C>, y: &PointMatrix, x: &[Complex64], k: u32) -> f64 {
    if k > f.degree() {
        return 0.0;
    }
    preconditioned_tensor_bound(&f.derivative_tensor(x, k), y, f.dim(), k)
}

/// Evaluation interface shared by fixed systems and homotopy slices.
pub trait SquareSystem {
    fn dim(&self) -> usize;
    fn eval_point(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn jacobian_point(&self, x: &[Complex64]) -> PointMatrix;
    fn eval_box(&self, x: &IntervalBox) -> IntervalBox;
    fn jacobian_box(&self, x: &IntervalBox) -> IntervalMatrix;
}

impl<C: Coefficient> SquareSystem for SparseSystem<C> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_point(&self, x: &[Complex64]) -> Vec<Complex64> {
        SparseSystem::eval_point(self, x)
    }
    fn jacobian_point(&self, x: &[Complex64]) -> PointMatrix {
        SparseSystem::jacobian_point(self, x)
    }
    fn eval_box(&self, x: &IntervalBox) -> IntervalBox {
        self.eval_interval(x)
    }
    fn jacobian_box(&self, x: &IntervalBox) -> IntervalMatrix {
        self.jacobian_interval(x)
    }
}

impl<S: SquareSystem + ?Sized> SquareSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval_point(&self, x: &[Complex64]) -> Vec<Complex64> {
        (**self).eval_point(x)
    }
    fn jacobian_point(&self, x: &[Complex64]) -> PointMatrix {
        (**self).jacobian_point(x)
    }
    fn eval_box(&self, x: &IntervalBox) -> IntervalBox {
        (**self).eval_box(x)
    }
    fn jacobian_box(&self, x: &IntervalBox) -> IntervalMatrix {
        (**self).jacobian_box(x)
    }
}

impl PolySystem {
    /// `c * F`, coefficientwise in floating point.
    pub fn scaled(&self, c: Complex64) -> PolySystem {
        self.map_coeffs(|a| a * c)
    }

    /// Coefficientwise `a F + b G` over the union of supports.
    ///
    /// Terms of `self` come first in their original order; terms only in
    /// `other` follow. Exponent vectors repeated within a polynomial are merged
    /// and terms whose combined coefficient is exactly zero are dropped.
    pub fn combine(&self, a: Complex64, other: &PolySystem, b: Complex64) -> Result<PolySystem> {
        if self.n != other.n {
            return Err(Error::Usage(format!("dimension mismatch: {} vs {}", self.n, other.n)));
        }
        let polys = self
            .polys
            .iter()
            .zip(&other.polys)
            .map(|(p, q)| {
                let mut index: HashMap<&[u32], usize> = HashMap::new();
                let mut terms: Vec<Monomial> = Vec::new();
                for (src, w) in [(p, a), (q, b)] {
                    for t in src.terms() {
                        let v = t.coeff * w;
                        match index.get(t.exps.as_slice()) {
                            Some(&k) => terms[k].coeff += v,
                            None => {
                                index.insert(&t.exps, terms.len());
                                terms.push(Term::new(v, t.exps.clone()));
                            }
                        }
                    }
                }
                terms.retain(|t| !t.coeff.is_zero());
                terms
            })
            .collect();
        PolySystem::new(self.n, polys)
    }

    pub fn from_json_str(s: &str) -> Result<PolySystem> {
        serde_json::from_str::<SystemJson>(s)?.try_into()
    }

    pub fn to_json(&self) -> SystemJson {
        SystemJson::from(self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("system serialises")
    }
}

/// `{"c": [re, im], "e": [e_1, ..., e_n]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub c: [f64; 2],
    pub e: Vec<u32>,
}

/// `{"n": n, "polys": [[term, ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: usize,
    pub polys: Vec<Vec<TermJson>>,
}

impl TryFrom<SystemJson> for PolySystem {
    type Error = Error;

    fn try_from(j: SystemJson) -> Result<Self> {
        let bad = j.polys.iter().flatten().find(|t| !(t.c[0].is_finite() && t.c[1].is_finite()));
        if let Some(t) = bad {
            return Err(Error::Parse(format!("non-finite coefficient {:?}", t.c)));
        }
        let polys = j
            .polys
            .into_iter()
            .map(|p| p.into_iter().map(|t| Term::new(Complex64::new(t.c[0], t.c[1]), t.e)).collect())
            .collect();
        PolySystem::new(j.n, polys).map_err(|e| match e {
            Error::Usage(m) => Error::Parse(m),
            other => other,
        })
    }
}

impl From<&PolySystem> for SystemJson {
    fn from(f: &PolySystem) -> Self {
        SystemJson {
            n: f.n,
            polys: f
                .polys
                .iter()
                .map(|p| p.terms().iter().map(|t| TermJson { c: [t.coeff.re, t.coeff.im], e: t.exps.clone() }).collect())
                .collect(),
        }
    }
}

impl Serialize for PolySystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolySystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SystemJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// `x^2 - a` in one variable.
    fn quad(a: f64) -> PolySystem {
        PolySystem::new(1, vec![vec![Term::new(c(1.0), vec![2]), Term::new(c(-a), vec![0])]]).unwrap()
    }

    fn real_box(lo: f64, hi: f64) -> IntervalBox {
        IntervalBox::new(vec![ComplexInterval::new(RealInterval::new(lo, hi), RealInterval::zero())])
    }

    #[test]
    fn point_evaluation() {
        assert_eq!(quad(2.0).eval_point(&[c(1.5)]), vec![c(0.25)]);
        assert_eq!(quad(1.0).eval_point(&[c(1.0)]), vec![c(0.0)]);
    }

    #[test]
    fn interval_evaluation_of_monotone_square() {
        let v = quad(2.0).eval_interval(&real_box(1.3, 1.7));
        let re = v[0].re;
        assert!(re.contains(1.69 - 2.0) && re.contains(2.89 - 2.0));
        assert!((re.lo() - (-0.31)).abs() < 1e-14 && (re.hi() - 0.89).abs() < 1e-14);
        assert!(v[0].im.magnitude() < 1e-300);
    }

    #[test]
    fn point_box_only_widens_by_rounding() {
        let f = quad(2.0);
        let v = f.eval_interval(&IntervalBox::from_point(&[c(1.5)]));
        assert!(v[0].contains(c(0.25)));
        assert!(v[0].re.width() < 1e-14);
    }

    #[test]
    fn symbolic_jacobians() {
        let j = quad(2.0).jacobian().entry(0, 0).clone();
        assert_eq!(j.terms().len(), 1);
        assert_eq!(j.terms()[0].exps, vec![1]);
        assert!(j.terms()[0].coeff.contains(c(2.0)));

        let sys = PolySystem::new(
            2,
            vec![
                vec![Term::new(c(1.0), vec![2, 0]), Term::new(c(-1.0), vec![0, 0])],
                vec![Term::new(c(1.0), vec![0, 2]), Term::new(c(-1.0), vec![0, 0])],
            ],
        )
        .unwrap();
        let jac = sys.jacobian_point(&[c(3.0), c(-2.0)]);
        assert_eq!(jac.get(0, 0), c(6.0));
        assert_eq!(jac.get(1, 1), c(-4.0));
        assert!(sys.jacobian().entry(0, 1).is_zero());
        assert!(sys.jacobian().entry(1, 0).is_zero());
        // Second derivatives of a quadratic are constant.
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(sys.jacobian().entry(i, j).derivative(k).degree(), 0);
                }
            }
        }
    }

    #[test]
    fn interval_jacobian_example() {
        let m = quad(2.0).jacobian_interval(&real_box(1.3, 1.7));
        let e = m.get(0, 0);
        assert!(e.re.contains(2.6) && e.re.contains(3.4));
        assert!((e.re.lo() - 2.6).abs() < 1e-14 && (e.re.hi() - 3.4).abs() < 1e-14);
        let p = quad(2.0).jacobian_interval(&IntervalBox::from_point(&[c(1.5)]));
        assert!(p.get(0, 0).contains(c(3.0)) && p.get(0, 0).re.width() < 1e-14);
    }

    #[test]
    fn tensor_bounds() {
        let y = PointMatrix::scalar(c(1.0 / 3.0));
        let b = higher_tensor_norm_bound(&quad(2.0), &y, &[c(1.5)], 2);
        assert!((b - 1.0 / 3.0).abs() < 1e-14 && b >= 1.0 / 3.0);
        assert_eq!(higher_tensor_norm_bound(&quad(2.0), &y, &[c(1.5)], 3), 0.0);
        let lin = PolySystem::new(1, vec![vec![Term::new(c(2.0), vec![1]), Term::new(c(1.0), vec![0])]]).unwrap();
        assert_eq!(higher_tensor_norm_bound(&lin, &y, &[c(0.3)], 2), 0.0);
    }

    #[test]
    fn multisets_count_orderings() {
        let sets = index_multisets(3, 2);
        assert_eq!(sets.len(), 6);
        let total: f64 = sets.iter().map(|s| s.orderings).sum();
        assert_eq!(total, 9.0);
        let sets = index_multisets(2, 3);
        assert_eq!(sets.iter().map(|s| s.orderings).sum::<f64>(), 8.0);
    }

    #[test]
    fn json_rejects_malformed_systems() {
        let non_square = r#"{"n": 2, "polys": [[{"c": [1, 0], "e": [1, 0]}]]}"#;
        assert!(matches!(PolySystem::from_json_str(non_square), Err(Error::Parse(_))));
        let bad_exps = r#"{"n": 1, "polys": [[{"c": [1, 0], "e": [1, 0]}]]}"#;
        assert!(matches!(PolySystem::from_json_str(bad_exps), Err(Error::Parse(_))));
        let ok = r#"{"n": 1, "polys": [[{"c": [1, 0], "e": [2]}, {"c": [-2, 0], "e": [0]}]]}"#;
        let f = PolySystem::from_json_str(ok).unwrap();
        assert_eq!(f, quad(2.0));
    }

    #[test]
    fn combine_merges_supports() {
        let g = quad(1.0);
        let f = quad(10.0);
        let h = g.combine(c(0.5), &f, c(0.5)).unwrap();
        assert_eq!(h, quad(5.5));
    }
}
