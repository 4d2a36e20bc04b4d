//! Initial data built from stream functions and vector potentials, so that
//! `div v₀ = 0`, `div b₀ = 0` and `b₀·N = 0` hold on the grid by construction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{partial, MagneticParam};
use crate::grid::{GridSpec, ScalarField, VectorField};

/// `‖div b₀‖₀` accepted for presets; they are exact up to round-off.
pub const PRESET_DIV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `v₀ = 0`, `b₀ = 0`.
    Trivial,
    /// `v₀ = 0`, `b₀ = (β(x₃), 0, 0)`: a steady state.
    Shear,
    /// Small potential-flow wave along `x₁` in the sheared horizontal field
    /// `b0_amp·(1, β(x₃), 0)`. The wave does not depend on `x₂`, so only the
    /// uniform component acts on it: an Alfvén oscillation with angular
    /// frequency `2π·b0_amp` at linear order.
    Demo,
    /// `v₀ = (sin 2πx₂, sin 2πx₁, 0)`, whose initial pressure has no sign on `Γ`.
    TaylorViolating,
    /// Seeded random vector potential and random tangential `b₀`.
    Random,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Trivial, Preset::Shear, Preset::Demo, Preset::TaylorViolating, Preset::Random];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Trivial => "trivial",
            Preset::Shear => "shear",
            Preset::Demo => "demo",
            Preset::TaylorViolating => "taylor-violating",
            Preset::Random => "random",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    /// Velocity scale.
    pub amp: f64,
    /// Magnetic scale.
    pub b0_amp: f64,
    pub seed: u64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self { amp: 1e-3, b0_amp: 0.5, seed: 1 }
    }
}

/// Shear profile `β(x₃) = 1 + sin(πx₃)/2`.
pub fn shear_profile(x3: f64) -> f64 {
    1.0 + 0.5 * (PI * x3).sin()
}

fn shear_field(grid: GridSpec, b0_amp: f64) -> VectorField {
    VectorField::from_fn(grid, |_, _, z| [b0_amp * shear_profile(z), 0.0, 0.0])
}

/// `curl A` with grid derivatives; its discrete divergence vanishes because
/// horizontal and vertical derivatives commute.
pub fn discrete_curl(a: &VectorField) -> VectorField {
    let d = |c: usize, j: usize| partial(a.component(c), j);
    VectorField::new([&d(2, 1) - &d(1, 2), &d(0, 2) - &d(2, 0), &d(1, 0) - &d(0, 1)])
}

/// Potential flow `curl(0, ψ, 0)` with `ψ = sin(2πx₁)sinh(2π(x₃−½))/(2π cosh π)`.
pub fn demo_velocity(grid: GridSpec, amp: f64) -> VectorField {
    let psi = ScalarField::from_fn(grid, |x, _, z| {
        amp * (2.0 * PI * x).sin() * (2.0 * PI * (z - 0.5)).sinh() / (2.0 * PI * PI.cosh())
    });
    let zero = ScalarField::zeros(grid);
    discrete_curl(&VectorField::new([zero.clone(), psi, zero]))
}

fn random_fields(grid: GridSpec, p: &PresetParams) -> (VectorField, VectorField) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let tp = 2.0 * PI;
    let mut pot = [
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
    ];
    for c in pot.iter_mut() {
        for _ in 0..4 {
            let (k1, k2) = (rng.gen_range(-2i32..=2) as f64, rng.gen_range(-2i32..=2) as f64);
            let m3 = rng.gen_range(0.5..2.0);
            let (a, ph) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..tp));
            let f = ScalarField::from_fn(grid, |x, y, z| a * (tp * (k1 * x + k2 * y) + ph).cos() * (PI * m3 * z).cos());
            *c += &f;
        }
    }
    let norm = 1.0 / (tp * 4.0);
    let v = discrete_curl(&VectorField::new(pot)).scaled(p.amp * norm);
    let (c1, c2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (k1, k2) = (rng.gen_range(1i32..=2) as f64, rng.gen_range(0i32..=2) as f64);
    let phi = ScalarField::from_fn(grid, |x, y, z| (tp * (k1 * x + k2 * y)).sin() * (1.0 + z) / tp);
    let b = VectorField::new([
        &partial(&phi, 1) + &ScalarField::from_fn(grid, |_, _, z| c1 * shear_profile(z)),
        &partial(&phi, 0).scaled(-1.0) + &ScalarField::from_fn(grid, |_, _, z| c2 * (PI * z).cos()),
        ScalarField::zeros(grid),
    ])
    .scaled(p.b0_amp);
    (v, b)
}

/// `(v₀, b₀)` for a preset.
pub fn build(preset: Preset, grid: GridSpec, p: &PresetParams) -> Result<(VectorField, MagneticParam)> {
    if !p.amp.is_finite() || !p.b0_amp.is_finite() {
        return Err(Error::InvalidParameter("preset amplitudes must be finite".into()));
    }
    let (v, b) = match preset {
        Preset::Trivial => (VectorField::zeros(grid), VectorField::zeros(grid)),
        Preset::Shear => (VectorField::zeros(grid), shear_field(grid, p.b0_amp)),
        Preset::Demo => (
            demo_velocity(grid, p.amp),
            VectorField::from_fn(grid, |_, _, z| [p.b0_amp, p.b0_amp * shear_profile(z), 0.0]),
        ),
        Preset::TaylorViolating => (
            VectorField::from_fn(grid, |x, y, _| [p.amp * (2.0 * PI * y).sin(), p.amp * (2.0 * PI * x).sin(), 0.0]),
            VectorField::zeros(grid),
        ),
        Preset::Random => random_fields(grid, p),
    };
    Ok((v, MagneticParam::new(b, PRESET_DIV_TOL)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::divergence;

    #[test]
    fn presets_are_divergence_free() {
        let g = GridSpec::new(16, 16, 12).unwrap();
        for pr in Preset::ALL {
            let (v, b) = build(pr, g, &PresetParams::default()).unwrap();
            assert!(divergence(&v).max_abs() < 1e-12, "{pr}");
            assert!(divergence(b.field()).max_abs() < 1e-12, "{pr}");
            assert_eq!(b.field().component(2).trace().max_abs(), 0.0);
        }
    }

    #[test]
    fn names_round_trip() {
        for pr in Preset::ALL {
            assert_eq!(pr.name().parse::<Preset>().unwrap(), pr);
        }
        assert!("nope".parse::<Preset>().is_err());
    }
}
