#![allow(dead_code)]

use std::f64::consts::PI;

use mhdl::geometry::FlowMap;
use mhdl::grid::{BoundaryField, GridSpec, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, n, n).unwrap()
}

/// Band-limited in x₁, x₂ (|k| ≤ kmax), a few smooth modes in x₃; sup ≤ 1 roughly.
pub fn smooth_scalar(g: GridSpec, seed: u64, kmax: i64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for _ in 0..6 {
        let k1 = rng.gen_range(-kmax..=kmax) as f64;
        let k2 = rng.gen_range(-kmax..=kmax) as f64;
        let m = rng.gen_range(0..3) as f64;
        let (c, ph, ph3) = (rng.gen_range(-1.0..1.0) / 6.0, rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..PI));
        modes.push((k1, k2, m, c, ph, ph3));
    }
    ScalarField::from_fn(g, |x1, x2, x3| {
        modes
            .iter()
            .map(|&(k1, k2, m, c, ph, ph3)| c * (2.0 * PI * (k1 * x1 + k2 * x2) + ph).cos() * (PI * m * x3 + ph3).cos())
            .sum()
    })
}

pub fn smooth_vector(g: GridSpec, seed: u64, kmax: i64) -> VectorField {
    VectorField::new([0, 1, 2].map(|i| smooth_scalar(g, seed.wrapping_mul(31).wrapping_add(i), kmax)))
}

pub fn smooth_boundary(g: GridSpec, seed: u64, kmax: i64) -> BoundaryField {
    smooth_scalar(g, seed, kmax).trace()
}

/// `η = Id + amp·d` with a smooth displacement.
pub fn smooth_map(g: GridSpec, seed: u64, amp: f64) -> FlowMap {
    FlowMap::from_displacement(smooth_vector(g, seed, 2).scaled(amp))
}

pub fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    (a - b).max_abs()
}

pub fn vmax_diff(a: &VectorField, b: &VectorField) -> f64 {
    (a - b).max_abs()
}
