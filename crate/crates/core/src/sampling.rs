//! Seeded sampling helpers shared by the constant estimators and property suites.

use alloc::vec::Vec;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut SampleRng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.random_range(lo..hi)))
}

/// Random direction on the unit sphere (rejection sampling in the unit ball).
pub fn unit_vec(rng: &mut SampleRng, n: usize) -> DVector<f64> {
    loop {
        let v = uniform_vec(rng, n, -1.0, 1.0);
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

/// Points of the tensor grid with `per_axis` nodes per joint over `[lo, hi]`.
pub fn tensor_grid(n: usize, per_axis: usize, lo: f64, hi: f64) -> Vec<DVector<f64>> {
    if per_axis == 0 || n == 0 {
        return Vec::new();
    }
    let node = |i: usize| {
        if per_axis == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
        }
    };
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            DVector::from_iterator(
                n,
                (0..n).map(|_| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    node(i)
                }),
            )
        })
        .collect()
}
