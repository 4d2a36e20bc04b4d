//! Observers: energy, conserved quantities, good-unknown identities and the
//! empirical lemma harness. Nothing here mutates a state.

mod good_unknowns;
mod lemmas;

pub use good_unknowns::{commutator_c, good_unknown_residual, good_unknowns, tangential_t, GoodUnknownResidual};
pub use lemmas::{kappa_scale, lemma_harness, LemmaCheck, LemmaId, LemmaSetup};

use crate::dynamics::FlowState;
use crate::elliptic::taylor_minimum;
use crate::error::{Band, Result};
use crate::geometry::{cofactor_with, div_a, divergence, piola_residual, CofactorData, CofactorOptions};
use crate::grid::{
    boundary_norm_sq, integral, tangential_derivative, vector_volume_norm_sq, volume_norm, BoundaryField, GridSpec,
    ScalarField, VectorField,
};
use crate::smoothing::{boundary_smoother, mollify_vector, MollifierSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `‖v‖₄²`.
    pub v4sq: f64,
    /// `‖η‖₄²` of the full map `Id + d`.
    pub eta4sq: f64,
    /// `‖b₀·∇η‖₄²`.
    pub beta4sq: f64,
    /// `|∂̄⁴η·n|₀²`.
    pub trace_term: f64,
    /// `|∂̄⁴Λ_κη_i𝒜^κ_{i3}|₀²`, present when `κ > 0`.
    pub kappa_trace: Option<f64>,
    pub total: f64,
}

/// `‖Id‖₄²` on the grid: only `x_i` and `∂_i x_i = 1` contribute.
fn identity_norm_sq(grid: GridSpec) -> f64 {
    (0..3).map(|i| integral(&coordinate(grid, i).map(|x| x * x)) + 1.0).sum()
}

fn coordinate(grid: GridSpec, i: usize) -> ScalarField {
    ScalarField::from_fn(grid, |x1, x2, x3| [x1, x2, x3][i])
}

/// `‖Id + d‖₄² = ‖Id‖₄² + 2⟨Id, d⟩₄ + ‖d‖₄²`; the cross term only sees the
/// zeroth and first derivatives of `Id`.
fn map_norm_sq(d: &VectorField) -> Result<f64> {
    let g = d.grid();
    let mut cross = 0.0;
    for i in 0..3 {
        let di = d.component(i);
        cross += integral(&(&coordinate(g, i) * di)) + integral(&crate::geometry::partial(di, i));
    }
    Ok(identity_norm_sq(g) + 2.0 * cross + vector_volume_norm_sq(d, 4)?)
}

/// All fourth-order tangential derivatives `∂₁^a∂₂^b f`, `a + b = 4`.
fn fourth_tangential(f: &ScalarField) -> Vec<ScalarField> {
    (0..=4)
        .map(|a| {
            let mut out = f.clone();
            for _ in 0..a {
                out = tangential_derivative(&out, 1);
            }
            for _ in 0..4 - a {
                out = tangential_derivative(&out, 2);
            }
            out
        })
        .collect()
}

/// `Σ_{a+b=4} |Σ_i ∂₁^a∂₂^b u_i · w_i|₀²` on both faces.
fn weighted_trace_sq(u: &VectorField, w: &[BoundaryField; 3]) -> Result<f64> {
    let g = u.grid();
    let derivs: Vec<Vec<ScalarField>> = (0..3).map(|i| fourth_tangential(u.component(i))).collect();
    let mut total = 0.0;
    for a in 0..=4 {
        let mut s = BoundaryField::zeros(g);
        for i in 0..3 {
            s = &s + &(&derivs[i][a].trace() * &w[i]);
        }
        total += boundary_norm_sq(&s, 0.0)?;
    }
    Ok(total)
}

/// `𝔈 = ‖v‖₄² + ‖η‖₄² + ‖b₀·∇η‖₄² + |∂̄⁴η·n|₀²`, plus the κ trace when `κ > 0`.
pub fn energy(state: &FlowState) -> Result<EnergyReport> {
    let d = state.eta.displacement();
    let v4sq = vector_volume_norm_sq(&state.v, 4)?;
    let eta4sq = map_norm_sq(d)?;
    let beta4sq = if state.b0.is_zero() {
        0.0
    } else {
        vector_volume_norm_sq(&crate::geometry::pullback_field(state.b0.field(), &state.eta), 4)?
    };
    let cof = cofactor_with(&state.eta, CofactorOptions { j_min: f64::MIN_POSITIVE, enforce_band: false })?;
    let trace_term = weighted_trace_sq(d, &crate::geometry::normals(&cof))?;
    let kappa_trace = if state.kappa > 0.0 {
        let spec = MollifierSpec::new(state.kappa)?;
        let ck = cofactor_with(&boundary_smoother(&state.eta, &spec), CofactorOptions { j_min: f64::MIN_POSITIVE, enforce_band: false })?;
        let a3: [BoundaryField; 3] = std::array::from_fn(|i| ck.a.get(i, 2).trace());
        Some(weighted_trace_sq(&mollify_vector(d, &spec, 1), &a3)?)
    } else {
        None
    };
    let total = v4sq + eta4sq + beta4sq + trace_term + kappa_trace.unwrap_or(0.0);
    Ok(EnergyReport { v4sq, eta4sq, beta4sq, trace_term, kappa_trace, total })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    /// `max|J − 1|`.
    pub j_dev: f64,
    /// `max|𝒜_ij − δ_ij|`.
    pub a_dev: f64,
    /// Max norm of `∂_j(J𝒜_ij)`.
    pub piola: f64,
    /// `‖div_{𝒜^κ}v‖₀`.
    pub div_v: f64,
    /// `‖b_direct − b₀·∇η‖₀`; zero when no directly integrated field is tracked.
    pub frozen_mismatch: f64,
    /// `min_Γ(−∇q·N)`.
    pub taylor_min: f64,
    /// `‖div b₀‖₀`.
    pub divb0: f64,
    /// `max|J^κ − 1|` and `max|𝒜^κ − I|`, the quantities held in the working band.
    pub j_kappa_dev: f64,
    pub a_kappa_dev: f64,
}

impl InvariantReport {
    /// Band monitors currently outside `1/8`.
    pub fn band_exits(&self) -> Vec<Band> {
        let mut out = Vec::new();
        if self.j_kappa_dev > crate::geometry::BAND_WIDTH {
            out.push(Band::Jacobian);
        }
        if self.a_kappa_dev > crate::geometry::BAND_WIDTH {
            out.push(Band::Cofactor);
        }
        out
    }

    /// `TaylorViolation` when `taylor_min < λ/2`.
    pub fn check_taylor(&self, t: f64, lambda: f64) -> Result<()> {
        if self.taylor_min < 0.5 * lambda {
            return Err(crate::Error::TaylorViolation { t, min: self.taylor_min, floor: 0.5 * lambda });
        }
        Ok(())
    }
}

fn kappa_cofactor(state: &FlowState) -> Result<CofactorData> {
    let opts = CofactorOptions { j_min: f64::MIN_POSITIVE, enforce_band: false };
    if state.kappa > 0.0 {
        cofactor_with(&boundary_smoother(&state.eta, &MollifierSpec::new(state.kappa)?), opts)
    } else {
        cofactor_with(&state.eta, opts)
    }
}

/// Conserved quantities and monitors of a state. `b_direct` is the field
/// integrated by its own evolution equation, when tracked.
pub fn invariants(state: &FlowState, b_direct: Option<&VectorField>) -> Result<InvariantReport> {
    let opts = CofactorOptions { j_min: f64::MIN_POSITIVE, enforce_band: false };
    let cof = cofactor_with(&state.eta, opts)?;
    let ck = kappa_cofactor(state)?;
    let frozen_mismatch = match b_direct {
        Some(b) => {
            let diff = b - &crate::geometry::pullback_field(state.b0.field(), &state.eta);
            vector_volume_norm_sq(&diff, 0)?.sqrt()
        }
        None => 0.0,
    };
    Ok(InvariantReport {
        j_dev: cof.j_deviation(),
        a_dev: cof.a_deviation(),
        piola: piola_residual(&cof).max_abs(),
        div_v: volume_norm(&div_a(&state.v, &ck), 0)?,
        frozen_mismatch,
        // `+ 0.0` maps a signed zero at rest to `0`.
        taylor_min: taylor_minimum(&state.q) + 0.0,
        divb0: volume_norm(&divergence(state.b0.field()), 0)?,
        j_kappa_dev: ck.j_deviation(),
        a_kappa_dev: ck.a_deviation(),
    })
}
