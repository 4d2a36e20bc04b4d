//! Discrete Sobolev norms.
//!
//! Volume norms sum the L² quadrature norms of every `∂₁^a ∂₂^b ∂₃^c f` with
//! `a + b + c ≤ s`: horizontal factors by Parseval, vertical factors by
//! repeated first differences, trapezoid weights across levels.

use super::fd::vertical_derivative;
use super::spectral::{derivative_wavenumber, true_wavenumber, Spectrum};
use super::{BoundaryField, ScalarField, TensorField, VectorField};
use crate::error::{Error, Result};

pub const MAX_VOLUME_INDEX: usize = 4;

fn plane_energy(s: &Spectrum, p: usize, weight: &[f64]) -> f64 {
    let np = s.grid().plane_len() as f64;
    s.plane(p).iter().zip(weight).map(|(z, w)| z.norm_sqr() * w).sum::<f64>() / (np * np)
}

/// Squared discrete `H^s(Ω)` norm, `s ∈ 0..=4`.
pub fn volume_norm_sq(f: &ScalarField, s: usize) -> Result<f64> {
    if s > MAX_VOLUME_INDEX {
        return Err(Error::SobolevIndex(s as f64));
    }
    let g = f.grid();
    let (n1, n2) = (g.n1(), g.n2());
    let mut total = 0.0;
    let mut dc = f.clone();
    for c in 0..=s {
        if c > 0 {
            dc = vertical_derivative(&dc, 1);
        }
        let rem = s - c;
        // Σ_{a+b ≤ rem} k1^{2a} k2^{2b} per mode.
        let mut weight = Vec::with_capacity(g.plane_len());
        for i2 in 0..n2 {
            let q2 = derivative_wavenumber(i2, n2).powi(2);
            for i1 in 0..n1 {
                let q1 = derivative_wavenumber(i1, n1).powi(2);
                let mut w = 0.0;
                for a in 0..=rem {
                    for b in 0..=rem - a {
                        w += q1.powi(a as i32) * q2.powi(b as i32);
                    }
                }
                weight.push(w);
            }
        }
        let spec = Spectrum::of_field(&dc);
        let n3 = g.n3();
        for k in 0..=n3 {
            let tw = if k == 0 || k == n3 { 0.5 } else { 1.0 } * g.h3();
            total += tw * plane_energy(&spec, k, &weight);
        }
    }
    Ok(total)
}

/// `∫_Ω f` by horizontal means and trapezoid weights across levels.
pub fn integral(f: &ScalarField) -> f64 {
    let g = f.grid();
    let n3 = g.n3();
    let np = g.plane_len() as f64;
    (0..=n3)
        .map(|k| {
            let tw = if k == 0 || k == n3 { 0.5 } else { 1.0 } * g.h3();
            tw * f.level(k).iter().sum::<f64>() / np
        })
        .sum()
}

pub fn volume_norm(f: &ScalarField, s: usize) -> Result<f64> {
    volume_norm_sq(f, s).map(f64::sqrt)
}

pub fn vector_volume_norm_sq(v: &VectorField, s: usize) -> Result<f64> {
    v.components().iter().map(|c| volume_norm_sq(c, s)).sum()
}

pub fn tensor_volume_norm_sq(t: &TensorField, s: usize) -> Result<f64> {
    t.entries().iter().map(|c| volume_norm_sq(c, s)).sum()
}

/// Squared spectral `H^s(Γ)` norm summed over both faces; `s` a half-integer in `[-1/2, 7/2]`.
pub fn boundary_norm_sq(g: &BoundaryField, s: f64) -> Result<f64> {
    let twice = 2.0 * s;
    if !(-1.0..=7.0).contains(&twice) || twice.fract() != 0.0 {
        return Err(Error::SobolevIndex(s));
    }
    let grid = g.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let mut weight = Vec::with_capacity(grid.plane_len());
    for i2 in 0..n2 {
        let q2 = true_wavenumber(i2, n2).powi(2);
        for i1 in 0..n1 {
            weight.push((1.0 + true_wavenumber(i1, n1).powi(2) + q2).powf(s));
        }
    }
    let spec = Spectrum::of_boundary(g);
    Ok(plane_energy(&spec, 0, &weight) + plane_energy(&spec, 1, &weight))
}

pub fn boundary_norm(g: &BoundaryField, s: f64) -> Result<f64> {
    boundary_norm_sq(g, s).map(f64::sqrt)
}

pub fn vector_boundary_norm_sq(g: &[BoundaryField], s: f64) -> Result<f64> {
    g.iter().map(|c| boundary_norm_sq(c, s)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Face, GridSpec};
    use std::f64::consts::PI;

    #[test]
    fn unit_constant_has_unit_norm() {
        let g = GridSpec::new(8, 8, 8).unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert!((volume_norm(&f, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((volume_norm(&f, 4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_norms_match_integrals() {
        let g = GridSpec::new(16, 8, 8).unwrap();
        let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        assert!((volume_norm(&f, 0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
        let exact = (0.5 + 2.0 * PI * PI).sqrt();
        assert!((volume_norm(&f, 1).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let g = GridSpec::new(8, 8, 8).unwrap();
        assert!(volume_norm(&ScalarField::zeros(g), 5).is_err());
        let b = BoundaryField::zeros(g);
        assert!(boundary_norm(&b, 4.0).is_err());
        assert!(boundary_norm(&b, -1.0).is_err());
        assert!(boundary_norm(&b, 0.25).is_err());
        assert!(boundary_norm(&b, 3.5).is_ok());
    }

    #[test]
    fn boundary_norm_examples() {
        let g = GridSpec::new(8, 8, 8).unwrap();
        let one = BoundaryField::constant(g, 1.0);
        assert!((boundary_norm(&one, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let mut c = BoundaryField::zeros(g);
        for (j, x) in c.face_mut(Face::Top).iter_mut().enumerate() {
            *x = (2.0 * PI * (j % 8) as f64 / 8.0).cos();
        }
        assert!((boundary_norm(&c, 0.0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
    }
}
