//! Horizontal mollification and the κ-regularization built on it.
//!
//! `Λ_κ` is the Fourier multiplier `m(κ|2πk|)` applied level by level; `Λ_κ²`
//! uses `m²`. The true wavenumber, Nyquist included, enters `|k|`.

use crate::elliptic::{harmonic_extension, harmonic_extension_vector};
use crate::error::{Error, Result};
use crate::geometry::{CofactorData, FlowMap};
use crate::grid::{
    inverse_surface_laplacian, surface_laplacian, tangential_derivative_boundary, BoundaryField, ScalarField,
    Spectrum, VectorField,
};

/// Default multiplier profile `m(r) = exp(−r²)`.
pub fn gaussian(r: f64) -> f64 {
    (-r * r).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct MollifierSpec {
    kappa: f64,
    profile: fn(f64) -> f64,
}

impl MollifierSpec {
    pub fn new(kappa: f64) -> Result<Self> {
        Self::with_profile(kappa, gaussian)
    }

    /// `profile` must satisfy `m(0) = 1` and `0 < m ≤ 1`; checked at a few radii.
    pub fn with_profile(kappa: f64, profile: fn(f64) -> f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} must be positive")));
        }
        if (profile(0.0) - 1.0).abs() > 0.0 || [0.5, 1.0, 2.0].iter().any(|&r| !(profile(r) > 0.0 && profile(r) <= 1.0)) {
            return Err(Error::InvalidParameter("mollifier profile must map into (0, 1] with m(0) = 1".into()));
        }
        Ok(Self { kappa, profile })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Multiplier at the wavevector `(k1, k2)` (already scaled by 2π), raised to `power`.
    pub fn symbol(&self, k1: f64, k2: f64, power: i32) -> f64 {
        (self.profile)(self.kappa * (k1 * k1 + k2 * k2).sqrt()).powi(power)
    }
}

fn mollify_spectrum(s: &Spectrum, spec: &MollifierSpec, power: i32) -> Spectrum {
    s.apply_real(|k1, k2| spec.symbol(k1, k2, power))
}

/// `Λ_κ^power f`, level by level.
pub fn mollify_field(f: &ScalarField, spec: &MollifierSpec, power: i32) -> ScalarField {
    mollify_spectrum(&Spectrum::of_field(f), spec, power).to_field()
}

pub fn mollify_vector(u: &VectorField, spec: &MollifierSpec, power: i32) -> VectorField {
    u.map(|c| mollify_field(c, spec, power))
}

pub fn mollify_boundary(g: &BoundaryField, spec: &MollifierSpec, power: i32) -> BoundaryField {
    mollify_spectrum(&Spectrum::of_boundary(g), spec, power).to_boundary()
}

/// `Λ_κ` on a field.
pub fn mollify(f: &ScalarField, spec: &MollifierSpec) -> ScalarField {
    mollify_field(f, spec, 1)
}

/// Harmonic correction `u + H(Λ_κ²u|Γ − u|Γ)` of one periodic field.
fn smooth_component(u: &ScalarField, spec: &MollifierSpec) -> ScalarField {
    let tr = u.trace();
    let corr = &mollify_boundary(&tr, spec, 2) - &tr;
    u + &harmonic_extension(&corr)
}

/// `η^κ`: equals `Λ_κ²η` on `Γ` and differs from `η` by a harmonic field.
///
/// Only the periodic displacement is smoothed; `Λ_κ` fixes the identity.
/// The map is linear, so it also sends `∂_tη` to `∂_tη^κ`.
pub fn boundary_smoother(eta: &FlowMap, spec: &MollifierSpec) -> FlowMap {
    FlowMap::from_displacement(smooth_vector(eta.displacement(), spec))
}

/// The boundary smoother applied to a periodic vector field.
pub fn smooth_vector(u: &VectorField, spec: &MollifierSpec) -> VectorField {
    u.map(|c| smooth_component(c, spec))
}

/// Boundary value of `ψ^κ` for component `i`, before the harmonic extension.
fn modification_trace(
    lap_d: &[BoundaryField; 3],
    lap_sd: &[BoundaryField; 3],
    a_tr: &[[BoundaryField; 2]; 3],
    v_tr: &BoundaryField,
    spec: &MollifierSpec,
) -> BoundaryField {
    let sv = mollify_boundary(v_tr, spec, 2);
    let dsv = [tangential_derivative_boundary(&sv, 1), tangential_derivative_boundary(&sv, 2)];
    let dv = [tangential_derivative_boundary(v_tr, 1), tangential_derivative_boundary(v_tr, 2)];
    let mut s = BoundaryField::zeros(v_tr.grid());
    for j in 0..3 {
        for al in 0..2 {
            let t1 = &(&lap_d[j] * &a_tr[j][al]) * &dsv[al];
            let t2 = &(&lap_sd[j] * &a_tr[j][al]) * &dv[al];
            s = &s + &(&t1 - &t2);
        }
    }
    inverse_surface_laplacian(&s)
}

/// `ψ^κ`: harmonic, with trace `Δ∗⁻¹ℙ(Δ∗η_j 𝒜^κ_jα ∂_αΛ_κ²v − Δ∗Λ_κ²η_j 𝒜^κ_jα ∂_α v)`,
/// `α` horizontal. `Δ∗` annihilates the identity part of `η` on each face.
pub fn modification_term(eta: &FlowMap, v: &VectorField, cof_kappa: &CofactorData, spec: &MollifierSpec) -> VectorField {
    let d = eta.displacement();
    let grid = d.grid();
    if v.max_abs() == 0.0 || d.max_abs() == 0.0 {
        return VectorField::zeros(grid);
    }
    let d_tr: Vec<BoundaryField> = d.components().iter().map(ScalarField::trace).collect();
    let lap_d = [surface_laplacian(&d_tr[0]), surface_laplacian(&d_tr[1]), surface_laplacian(&d_tr[2])];
    let lap_sd = [
        surface_laplacian(&mollify_boundary(&d_tr[0], spec, 2)),
        surface_laplacian(&mollify_boundary(&d_tr[1], spec, 2)),
        surface_laplacian(&mollify_boundary(&d_tr[2], spec, 2)),
    ];
    let a_tr = [0, 1, 2].map(|j| [cof_kappa.a.get(j, 0).trace(), cof_kappa.a.get(j, 1).trace()]);
    let traces = [0, 1, 2].map(|i| modification_trace(&lap_d, &lap_sd, &a_tr, &v.component(i).trace(), spec));
    harmonic_extension_vector(&traces)
}

/// `[Λ_κ, h]g = Λ_κ(hg) − hΛ_κg`.
pub fn mollifier_commutator(h: &BoundaryField, g: &BoundaryField, spec: &MollifierSpec) -> BoundaryField {
    &mollify_boundary(&(h * g), spec, 1) - &(h * &mollify_boundary(g, spec, 1))
}
