//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod newton;

use krawczyk_track::interval::{arith, ArithOp, ComplexInterval, RealInterval};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TRIPLES: usize = 10_000;
pub const SAMPLES: usize = 100;

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn holds(i: &RealInterval, v: &BigRational) -> bool {
    q(i.lo()) <= *v && *v <= q(i.hi())
}

pub fn endpoint(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => f64::from(rng.random_range(-8i32..=8)),
        2 => rng.random_range(-1.0..1.0) * 1e-8,
        _ => rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-3..=3)),
    }
}

pub fn real_interval(rng: &mut ChaCha8Rng) -> RealInterval {
    let a = endpoint(rng);
    match rng.random_range(0..6) {
        0 => RealInterval::point(a),
        1 => RealInterval::zero(),
        2 => RealInterval::new(-a.abs(), a.abs()),
        _ => {
            let b = endpoint(rng);
            RealInterval::new(a.min(b), a.max(b))
        }
    }
}

pub fn complex_interval(rng: &mut ChaCha8Rng) -> ComplexInterval {
    ComplexInterval::new(real_interval(rng), real_interval(rng))
}

pub fn sample_real(rng: &mut ChaCha8Rng, i: RealInterval) -> f64 {
    match rng.random_range(0..8) {
        0 => i.lo(),
        1 => i.hi(),
        _ => (i.lo() + rng.random::<f64>() * (i.hi() - i.lo())).clamp(i.lo(), i.hi()),
    }
}

pub fn sample(rng: &mut ChaCha8Rng, z: ComplexInterval) -> Complex64 {
    Complex64::new(sample_real(rng, z.re), sample_real(rng, z.im))
}

/// `a op b` computed exactly.
pub fn exact(op: ArithOp, a: Complex64, b: Complex64) -> (BigRational, BigRational) {
    let (ar, ai, br, bi) = (q(a.re), q(a.im), q(b.re), q(b.im));
    match op {
        ArithOp::Add => (ar + br, ai + bi),
        ArithOp::Sub => (ar - br, ai - bi),
        ArithOp::Mul => (&ar * &br - &ai * &bi, &ar * &bi + &ai * &br),
        ArithOp::Div => {
            let d = &br * &br + &bi * &bi;
            ((&ar * &br + &ai * &bi) / &d, (&ai * &br - &ar * &bi) / &d)
        }
    }
}

#[derive(Debug, Default)]
pub struct FuzzReport {
    pub evaluated: usize,
    pub rejected: usize,
    pub checked: usize,
    pub violations: usize,
}

/// Draws `TRIPLES` operand pairs, cycling through the four operations, and
/// checks `SAMPLES` exact results per pair against the computed enclosure.
/// Denominators containing the origin must be rejected and are redrawn.
pub fn fuzz_complex_arithmetic(seed: u64) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];
    let mut rep = FuzzReport::default();
    for k in 0..TRIPLES {
        let op = ops[k % ops.len()];
        let i = complex_interval(&mut rng);
        let mut j = complex_interval(&mut rng);
        while op == ArithOp::Div && j.contains_origin() {
            rep.rejected += 1;
            if arith(op, i, j).is_ok() {
                rep.violations += 1;
            }
            j = complex_interval(&mut rng);
        }
        let Ok(out) = arith(op, i, j) else {
            rep.violations += 1;
            continue;
        };
        rep.evaluated += 1;
        for _ in 0..SAMPLES {
            let (a, b) = (sample(&mut rng, i), sample(&mut rng, j));
            if op == ArithOp::Div && b == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (re, im) = exact(op, a, b);
            if !(holds(&out.re, &re) && holds(&out.im, &im)) {
                rep.violations += 1;
            }
            rep.checked += 1;
        }
    }
    rep
}
