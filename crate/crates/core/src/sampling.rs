//! Deterministic sampling of directions and hemisphere frequencies.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent generator for sample `index` of a sweep seeded by `seed`.
///
/// Sweeps run in parallel; keying each sample's stream on its index keeps
/// results independent of scheduling.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let inv = 1.0 / base as f64;
    while i > 0 {
        f *= inv;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// `count` low-discrepancy points on the unit sphere `S^{dim-1}`.
///
/// `dim = 1` alternates `+1, -1`; `dim = 2` uses equispaced angles with a
/// seeded offset; higher dimensions map a randomly shifted Halton sequence
/// through Box-Muller pairs.
pub fn sphere_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && dim <= 2 * PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    match dim {
        1 => (0..count)
            .map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }])
            .collect(),
        2 => {
            let offset: f64 = rng.random();
            (0..count)
                .map(|k| {
                    let th = 2.0 * PI * (k as f64 + offset) / count as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect()
        }
        _ => {
            let pairs = dim.div_ceil(2);
            let shift: Vec<f64> = (0..2 * pairs).map(|_| rng.random()).collect();
            (0..count)
                .map(|k| {
                    let mut v = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let u1 = (radical_inverse(k as u64 + 1, PRIMES[2 * p]) + shift[2 * p]).fract();
                        let u2 = (radical_inverse(k as u64 + 1, PRIMES[2 * p + 1]) + shift[2 * p + 1]).fract();
                        let r = (-2.0 * (1.0 - u1).max(1e-300).ln()).sqrt();
                        let th = 2.0 * PI * u2;
                        v.push(r * th.cos());
                        v.push(r * th.sin());
                    }
                    v.truncate(dim);
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                    v.iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// Uniformly random unit vector in `R^dim`.
pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Geometric grid of `count` points from `min` to `max` inclusive.
pub fn geometric_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}
