//! Brute-force root oracle: multi-start Newton in plain floating point.
//!
//! Evaluation and linear solves are written out here from the system's
//! terms so that nothing is shared with the certified code paths.

use krawczyk_track::polysys::PolySystem;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `(exponents, coefficient)` per term, per equation.
type Dense = Vec<Vec<(Vec<u32>, Complex64)>>;

fn dense(f: &PolySystem) -> Dense {
    f.polys().iter().map(|p| p.terms().iter().map(|t| (t.exps.clone(), t.coeff)).collect()).collect()
}

fn value_and_jacobian(f: &Dense, x: &[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let n = x.len();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut jac = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, terms) in f.iter().enumerate() {
        for (e, c) in terms {
            let mut m = *c;
            for (xj, &k) in x.iter().zip(e) {
                m *= xj.powu(k);
            }
            v[i] += m;
            for j in 0..n {
                if e[j] == 0 {
                    continue;
                }
                let mut d = *c * f64::from(e[j]);
                for (l, (xl, &k)) in x.iter().zip(e).enumerate() {
                    d *= xl.powu(if l == j { k - 1 } else { k });
                }
                jac[i][j] += d;
            }
        }
    }
    (v, jac)
}

/// Solves `a z = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))?;
        if a[p][k].norm() == 0.0 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for (i, row) in rest.iter_mut().enumerate() {
            let m = row[k] / pivot[k];
            for (v, p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *v -= m * p;
            }
            let s = b[k];
            b[k + 1 + i] -= m * s;
        }
    }
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: Complex64 = (k + 1..n).map(|j| a[k][j] * z[j]).sum();
        z[k] = (b[k] - s) / a[k][k];
    }
    Some(z)
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.re - y.re).abs().max((x.im - y.im).abs())).fold(0.0, f64::max)
}

fn newton(f: &Dense, mut x: Vec<Complex64>, iters: usize) -> Option<Vec<Complex64>> {
    for _ in 0..iters {
        let (v, j) = value_and_jacobian(f, &x);
        let dx = solve(j, v)?;
        let step = dx.iter().map(|d| d.norm()).fold(0.0, f64::max);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
        if !step.is_finite() {
            return None;
        }
        if step <= 1e-14 * (1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
            return Some(x);
        }
    }
    None
}

pub struct Roots {
    pub roots: Vec<Vec<Complex64>>,
    pub starts: usize,
}

/// Runs Newton from random complex starts until `expected` distinct roots
/// (separated by more than `1e-8`) are found or `max_starts` is spent.
pub fn all_roots(f: &PolySystem, expected: usize, seed: u64, max_starts: usize) -> Roots {
    let g = dense(f);
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots: Vec<Vec<Complex64>> = Vec::new();
    let mut starts = 0;
    while roots.len() < expected && starts < max_starts {
        starts += 1;
        let scale = [0.5, 1.0, 2.0, 4.0][starts % 4];
        let x0: Vec<Complex64> = (0..n)
            .map(|_| {
                let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                Complex64::new(a, b) * scale
            })
            .collect();
        let Some(x) = newton(&g, x0, 100) else { continue };
        let (v, _) = value_and_jacobian(&g, &x);
        let size = 1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if v.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-9 * size.powi(f.degree() as i32) {
            continue;
        }
        if roots.iter().all(|r| dist(r, &x) > 1e-8) {
            roots.push(x);
        }
    }
    Roots { roots, starts }
}

/// Oracle root inside the closed box `x + rB`, if any.
pub fn root_in_box<'a>(roots: &'a [Vec<Complex64>], x: &[Complex64], r: f64) -> Option<&'a Vec<Complex64>> {
    roots.iter().find(|z| dist(z, x) <= r)
}
