//! Real and complex interval arithmetic with outward rounding.
//!
//! Endpoints are `f64`. Every elementary operation computes its endpoints in
//! round-to-nearest and then moves the lower endpoint one representable value
//! down and the upper endpoint one representable value up, so the result
//! always encloses the exact set image. Sums whose rounding error is zero
//! and point products whose rounding error is zero (both detected with
//! error-free transformations) are not widened, nor are products with an
//! exact zero factor.
//!
//! Complex intervals are rectangles `Re(I) + i Im(I)`. Vectors of them form an
//! [`IntervalBox`], whose norm is the maximum magnitude over all real and
//! imaginary parts (the infinity norm of `C^n` viewed as `R^{2n}`).

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

/// `a + b` and its rounding error; the error is non-finite on overflow.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e.is_finite() && e >= 0.0 {
        s
    } else {
        down(s)
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e.is_finite() && e <= 0.0 {
        s
    } else {
        up(s)
    }
}

/// Enclosure of the exact product `a b`, widened only if `a b` is inexact.
#[inline]
fn exact_product(a: f64, b: f64) -> RealInterval {
    let p = a * b;
    let e = a.mul_add(b, -p);
    if !e.is_finite() || !p.is_finite() {
        RealInterval { lo: down(p), hi: up(p) }
    } else if e > 0.0 {
        RealInterval { lo: p, hi: up(p) }
    } else if e < 0.0 {
        RealInterval { lo: down(p), hi: p }
    } else {
        RealInterval::point(p)
    }
}

#[inline]
fn min4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a.min(b).min(c.min(d))
}

#[inline]
fn max4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a.max(b).max(c.max(d))
}

/// A closed real interval `[lo, hi]`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct RealInterval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for RealInterval {
    type Error = String;

    fn try_from(v: [f64; 2]) -> Result<Self, String> {
        RealInterval::try_new(v[0], v[1]).ok_or_else(|| format!("invalid interval [{}, {}]", v[0], v[1]))
    }
}

impl From<RealInterval> for [f64; 2] {
    fn from(i: RealInterval) -> Self {
        [i.lo, i.hi]
    }
}

impl fmt::Debug for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

#[allow(clippy::should_implement_trait)]
impl RealInterval {
    /// Builds `[lo, hi]`.
    ///
    /// Panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).unwrap_or_else(|| panic!("invalid interval [{lo}, {hi}]"))
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub const fn zero() -> Self {
        Self::point(0.0)
    }

    /// `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: f64) -> Self {
        Self::new(-r, r)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    /// Width, rounded up.
    pub fn width(&self) -> f64 {
        up(self.hi - self.lo)
    }

    /// `max |a|` over the interval. Exact, since `abs` never rounds.
    #[inline]
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    fn is_exact_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    #[inline]
    pub fn add(self, rhs: Self) -> Self {
        Self { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }

    #[inline]
    pub fn sub(self, rhs: Self) -> Self {
        Self { lo: add_down(self.lo, -rhs.hi), hi: add_up(self.hi, -rhs.lo) }
    }

    #[inline]
    pub fn mul(self, rhs: Self) -> Self {
        if self.is_exact_zero() || rhs.is_exact_zero() {
            return Self::zero();
        }
        if self.lo == self.hi && rhs.lo == rhs.hi {
            return exact_product(self.lo, rhs.lo);
        }
        let (a, b, c, d) = (self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi);
        Self { lo: down(min4(a, b, c, d)), hi: up(max4(a, b, c, d)) }
    }

    /// Product with the point `k`.
    #[inline]
    pub fn scale(self, k: f64) -> Self {
        if k == 0.0 || self.is_exact_zero() {
            return Self::zero();
        }
        if self.lo == self.hi {
            return exact_product(self.lo, k);
        }
        let (a, b) = (self.lo * k, self.hi * k);
        if a <= b {
            Self { lo: down(a), hi: up(b) }
        } else {
            Self { lo: down(b), hi: up(a) }
        }
    }

    /// `{a^2 : a in I}`, tighter than `I * I` when `I` straddles zero.
    pub fn sqr(self) -> Self {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.contains_zero() {
            Self { lo: 0.0, hi: up(a.max(b)) }
        } else {
            Self { lo: down(a.min(b)).max(0.0), hi: up(a.max(b)) }
        }
    }

    pub fn div(self, rhs: Self) -> Result<Self> {
        if rhs.contains_zero() {
            return Err(Error::Domain(format!("division by {rhs:?}")));
        }
        let (a, b, c, d) = (self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi);
        Ok(Self { lo: down(min4(a, b, c, d)), hi: up(max4(a, b, c, d)) })
    }
}

impl Neg for RealInterval {
    type Output = Self;
    fn neg(self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for RealInterval {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RealInterval::add(self, rhs)
    }
}

impl Sub for RealInterval {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        RealInterval::sub(self, rhs)
    }
}

impl Mul for RealInterval {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        RealInterval::mul(self, rhs)
    }
}

/// Binary operation selector for [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A complex rectangle `Re + i Im`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexInterval {
    pub re: RealInterval,
    pub im: RealInterval,
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + i{:?}", self.re, self.im)
    }
}

#[allow(clippy::should_implement_trait)]
impl ComplexInterval {
    pub const fn new(re: RealInterval, im: RealInterval) -> Self {
        Self { re, im }
    }

    pub const fn point(z: Complex64) -> Self {
        Self { re: RealInterval::point(z.re), im: RealInterval::point(z.im) }
    }

    pub const fn zero() -> Self {
        Self { re: RealInterval::zero(), im: RealInterval::zero() }
    }

    /// `[-r, r] + i[-r, r]`.
    pub fn square(r: f64) -> Self {
        Self { re: RealInterval::symmetric(r), im: RealInterval::symmetric(r) }
    }

    pub fn mid(&self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    /// `max(|Re|, |Im|)`.
    #[inline]
    pub fn magnitude(&self) -> f64 {
        self.re.magnitude().max(self.im.magnitude())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    pub fn contains_origin(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.re.is_subset_of(&other.re) && self.im.is_subset_of(&other.im)
    }

    #[inline]
    pub fn add(self, rhs: Self) -> Self {
        Self { re: self.re.add(rhs.re), im: self.im.add(rhs.im) }
    }

    #[inline]
    pub fn sub(self, rhs: Self) -> Self {
        Self { re: self.re.sub(rhs.re), im: self.im.sub(rhs.im) }
    }

    #[inline]
    pub fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re.mul(rhs.re).sub(self.im.mul(rhs.im)),
            im: self.re.mul(rhs.im).add(self.im.mul(rhs.re)),
        }
    }

    /// Product with a complex point.
    #[inline]
    pub fn mul_point(self, c: Complex64) -> Self {
        if c.im == 0.0 {
            return Self { re: self.re.scale(c.re), im: self.im.scale(c.re) };
        }
        Self {
            re: self.re.scale(c.re).sub(self.im.scale(c.im)),
            im: self.re.scale(c.im).add(self.im.scale(c.re)),
        }
    }

    /// Product with a real interval.
    #[inline]
    pub fn mul_real(self, s: RealInterval) -> Self {
        Self { re: self.re.mul(s), im: self.im.mul(s) }
    }

    /// Quotient via `I * conj(J) / (Re(J)^2 + Im(J)^2)`.
    ///
    /// Fails when the rectangle `J` contains the origin.
    pub fn div(self, rhs: Self) -> Result<Self> {
        if rhs.contains_origin() {
            return Err(Error::Domain(format!("division by {rhs:?}, which contains 0")));
        }
        let denom = rhs.re.sqr().add(rhs.im.sqr());
        if denom.lo() <= 0.0 {
            return Err(Error::Domain(format!("denominator of {rhs:?} is not bounded away from 0")));
        }
        let re = self.re.mul(rhs.re).add(self.im.mul(rhs.im));
        let im = self.im.mul(rhs.re).sub(self.re.mul(rhs.im));
        Ok(Self { re: re.div(denom)?, im: im.div(denom)? })
    }
}

impl Neg for ComplexInterval {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Add for ComplexInterval {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ComplexInterval::add(self, rhs)
    }
}

impl Sub for ComplexInterval {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ComplexInterval::sub(self, rhs)
    }
}

impl Mul for ComplexInterval {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ComplexInterval::mul(self, rhs)
    }
}

/// Applies `op` to two complex intervals.
pub fn arith(op: ArithOp, lhs: ComplexInterval, rhs: ComplexInterval) -> Result<ComplexInterval> {
    Ok(match op {
        ArithOp::Add => lhs.add(rhs),
        ArithOp::Sub => lhs.sub(rhs),
        ArithOp::Mul => lhs.mul(rhs),
        ArithOp::Div => lhs.div(rhs)?,
    })
}

/// A vector of complex intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox(Vec<ComplexInterval>);

impl IntervalBox {
    pub fn new(entries: Vec<ComplexInterval>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![ComplexInterval::zero(); n])
    }

    /// The degenerate box `{x}`.
    pub fn from_point(x: &[Complex64]) -> Self {
        Self(x.iter().map(|&z| ComplexInterval::point(z)).collect())
    }

    /// `B = ([-1, 1] + i[-1, 1])^n`.
    pub fn unit(n: usize) -> Self {
        Self::scaled_unit(n, 1.0)
    }

    /// `r B`, for `r >= 0`.
    pub fn scaled_unit(n: usize, r: f64) -> Self {
        Self(vec![ComplexInterval::square(r); n])
    }

    /// `x + r B`, rounded outward.
    pub fn around(x: &[Complex64], r: f64) -> Self {
        let rb = ComplexInterval::square(r);
        Self(x.iter().map(|&z| ComplexInterval::point(z).add(rb)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexInterval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[ComplexInterval] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<ComplexInterval> {
        self.0
    }

    pub fn mid(&self) -> Vec<Complex64> {
        self.0.iter().map(ComplexInterval::mid).collect()
    }

    /// `max_i max(|Re I_i|, |Im I_i|)`; zero for an empty box.
    pub fn norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, c| acc.max(c.magnitude()))
    }

    pub fn contains_point(&self, x: &[Complex64]) -> bool {
        x.len() == self.len() && self.0.iter().zip(x).all(|(c, &z)| c.contains(z))
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset_of(b))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        Self(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a.add(b)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        Self(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a.sub(b)).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|&a| -a).collect())
    }

    pub fn mul_real(&self, s: RealInterval) -> Self {
        Self(self.0.iter().map(|&a| a.mul_real(s)).collect())
    }
}

impl Index<usize> for IntervalBox {
    type Output = ComplexInterval;
    fn index(&self, i: usize) -> &ComplexInterval {
        &self.0[i]
    }
}

impl FromIterator<ComplexInterval> for IntervalBox {
    fn from_iter<T: IntoIterator<Item = ComplexInterval>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Box norm of `V`. See [`IntervalBox::norm`].
pub fn box_norm(v: &IntervalBox) -> f64 {
    v.norm()
}

/// `B` in dimension `n`.
pub fn unit_box(n: usize) -> IntervalBox {
    IntervalBox::unit(n)
}

/// Square matrix of complex intervals, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMatrix {
    n: usize,
    data: Vec<ComplexInterval>,
}

impl IntervalMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ComplexInterval::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ComplexInterval::point(Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ComplexInterval>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Usage("interval matrix rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_point(m: &PointMatrix) -> Self {
        Self { n: m.n, data: m.data.iter().map(|&z| ComplexInterval::point(z)).collect() }
    }

    pub(crate) fn from_raw(n: usize, data: Vec<ComplexInterval>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ComplexInterval {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ComplexInterval) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[ComplexInterval] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `M V` with `(M V)_i = sum_j M_ij V_j`.
    pub fn apply(&self, v: &IntervalBox) -> Result<IntervalBox> {
        if v.len() != self.n {
            return Err(Error::Usage(format!(
                "cannot apply a {n}x{n} matrix to a box of length {}",
                v.len(),
                n = self.n
            )));
        }
        Ok((0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .fold(ComplexInterval::zero(), |acc, (&m, &x)| acc.add(m.mul(x)))
            })
            .collect())
    }

    /// `Id - M`.
    pub fn identity_minus(&self) -> Self {
        let n = self.n;
        let one = ComplexInterval::point(Complex64::new(1.0, 0.0));
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(k, &m)| if k / n == k % n { one.sub(m) } else { -m })
            .collect();
        Self { n, data }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.n, rhs.n);
        Self { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a.add(b)).collect() }
    }

    pub fn mul_real(&self, s: RealInterval) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| a.mul_real(s)).collect() }
    }

    /// `max_i sum_j (|Re M_ij| + |Im M_ij|)`, rounded up.
    ///
    /// Equals `box_norm(M B)` and bounds the induced norm of every point
    /// matrix contained in `M`.
    pub fn norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .fold(0.0_f64, |acc, m| add_up(add_up(acc, m.re.magnitude()), m.im.magnitude()))
            })
            .fold(0.0, f64::max)
    }

    pub fn contains_point(&self, m: &PointMatrix) -> bool {
        m.n == self.n && self.data.iter().zip(&m.data).all(|(a, &z)| a.contains(z))
    }
}

/// Row-sum bound on `sup ||A||` over point matrices `A` in `M`.
pub fn mat_box_norm(m: &IntervalMatrix) -> f64 {
    m.norm()
}

/// Square matrix of complex floating-point numbers, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl PointMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Usage("matrix rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    /// 1x1 matrix `[[z]]`.
    pub fn scalar(z: Complex64) -> Self {
        Self { n: 1, data: vec![z] }
    }

    pub(crate) fn from_raw(n: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Floating-point product `A v` (not an enclosure).
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// Floating-point product `A B` (not an enclosure).
    pub fn mul_mat(&self, rhs: &PointMatrix) -> PointMatrix {
        let n = self.n;
        let mut out = PointMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    /// Enclosure of `A V` for a point matrix `A` and interval box `V`.
    pub fn mul_box(&self, v: &IntervalBox) -> IntervalBox {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .fold(ComplexInterval::zero(), |acc, (&a, &x)| acc.add(x.mul_point(a)))
            })
            .collect()
    }

    /// Enclosure of `A M` for a point matrix `A` and interval matrix `M`.
    pub fn mul_interval(&self, m: &IntervalMatrix) -> IntervalMatrix {
        let n = self.n;
        debug_assert_eq!(m.dim(), n);
        let mut data = vec![ComplexInterval::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j].add(m.get(k, j).mul_point(a));
                }
            }
        }
        IntervalMatrix::from_raw(n, data)
    }

    /// Max row sum of `|Re| + |Im|`, i.e. the induced norm bound used for boxes.
    pub fn norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|z| z.re.abs() + z.im.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Approximate inverse by LU factorisation with partial pivoting.
    ///
    /// A pivot smaller than `1e-14` times the largest input magnitude is
    /// reported as [`Error::SingularJacobian`].
    pub fn approx_inverse(&self) -> Result<PointMatrix> {
        let n = self.n;
        if !self.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let threshold = 1e-14 * scale;
        if scale == 0.0 {
            return Err(Error::SingularJacobian);
        }
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
            if pmag < threshold {
                return Err(Error::SingularJacobian);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= factor * u;
                }
            }
        }
        // Solve LU X = P I column by column.
        let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for (i, v) in col.iter_mut().enumerate() {
                *v = if perm[i] == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            }
            for i in 0..n {
                for k in 0..i {
                    let l = lu[i * n + k];
                    let ck = col[k];
                    col[i] -= l * ck;
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let u = lu[i * n + k];
                    let ck = col[k];
                    col[i] -= u * ck;
                }
                col[i] /= lu[i * n + i];
            }
            for i in 0..n {
                inv[i * n + c] = col[i];
            }
        }
        let out = PointMatrix::from_raw(n, inv);
        if !out.is_finite() {
            return Err(Error::SingularJacobian);
        }
        Ok(out)
    }
}

/// `A^{-1}` in floating point. See [`PointMatrix::approx_inverse`].
pub fn approx_inverse(a: &PointMatrix) -> Result<PointMatrix> {
    a.approx_inverse()
}
