//! Alinhac good unknowns with `𝒯 = ∂̄₁²Δ∗` standing for the fourth-order
//! tangential operator, and the residuals of the identities they satisfy.

use crate::dynamics::FlowState;
use crate::error::Result;
use crate::geometry::{cofactor_with, directional, gradient, lorentz_force, partial, CofactorData, CofactorOptions};
use crate::grid::{boundary_norm_sq, vector_volume_norm_sq, volume_norm, ScalarField, Spectrum, VectorField};
use crate::smoothing::{boundary_smoother, mollify_vector, MollifierSpec};

/// `𝒯f = ∂₁²Δ∗f`.
pub fn tangential_t(f: &ScalarField) -> ScalarField {
    Spectrum::of_field(f).derivative(1).derivative(1).laplacian().to_field()
}

/// `𝒮f = ∂₁Δ∗f`, so that `𝒯 = 𝒮∂₁`.
fn half_t(f: &ScalarField) -> ScalarField {
    Spectrum::of_field(f).derivative(1).laplacian().to_field()
}

struct Geometry {
    cof: CofactorData,
    /// `𝒯η^κ` (only the displacement contributes).
    t_eta: VectorField,
    /// `𝒮(∂₁∂_ℓη^κ_m)` at index `3ℓ + m`, and the undifferentiated factors.
    y: Vec<ScalarField>,
    s_y: Vec<ScalarField>,
}

fn geometry(state: &FlowState) -> Result<(Geometry, Option<MollifierSpec>)> {
    let opts = CofactorOptions { j_min: f64::MIN_POSITIVE, enforce_band: false };
    let spec = if state.kappa > 0.0 { Some(MollifierSpec::new(state.kappa)?) } else { None };
    let ek = match &spec {
        Some(s) => boundary_smoother(&state.eta, s),
        None => state.eta.clone(),
    };
    let cof = cofactor_with(&ek, opts)?;
    let d = ek.displacement();
    let t_eta = d.map(tangential_t);
    let mut y = Vec::with_capacity(9);
    for l in 0..3 {
        for m in 0..3 {
            y.push(partial(&partial(d.component(m), 0), l));
        }
    }
    let s_y = y.iter().map(half_t).collect();
    Ok((Geometry { cof, t_eta, y, s_y }, spec))
}

fn grad_a_partials(df: &[ScalarField; 3], a: &CofactorData) -> VectorField {
    VectorField::new(std::array::from_fn(|i| {
        let mut out = a.a.get(i, 0) * &df[0];
        out += &(a.a.get(i, 1) * &df[1]);
        out += &(a.a.get(i, 2) * &df[2]);
        out
    }))
}

/// `f ↦ 𝒯f − 𝒯η^κ·∇_{𝒜^κ}f`.
fn good(f: &ScalarField, g: &Geometry) -> ScalarField {
    let ga = grad_a_partials(&gradient(f), &g.cof);
    let mut out = tangential_t(f);
    for m in 0..3 {
        out -= &(g.t_eta.component(m) * ga.component(m));
    }
    out
}

/// `𝒞_i(f) = [𝒯, 𝒜_ij, ∂_jf] + 𝒯η^κ·∇_𝒜(∂^𝒜_i f) − [𝒮, 𝒜_iℓ𝒜_mj]∂₁∂_ℓη^κ_m ∂_jf`,
/// the remainder in `𝒯(∂^𝒜_i f) = ∂^𝒜_i(𝒯f − 𝒯η^κ·∇_𝒜f) + 𝒞_i(f)`.
fn commutator_with(f: &ScalarField, g: &Geometry) -> VectorField {
    let a = &g.cof.a;
    let df = gradient(f);
    let t_df: Vec<ScalarField> = df.iter().map(tangential_t).collect();
    let ga = grad_a_partials(&df, &g.cof);
    VectorField::new(std::array::from_fn(|i| {
        let mut out = ScalarField::zeros(f.grid());
        for j in 0..3 {
            let aij = a.get(i, j);
            // Symmetric commutator [𝒯, 𝒜_ij, ∂_jf].
            out += &tangential_t(&(aij * &df[j]));
            out -= &(&tangential_t(aij) * &df[j]);
            out -= &(aij * &t_df[j]);
            // [𝒮, 𝒜_iℓ𝒜_mj] acting on ∂₁∂_ℓη^κ_m, then times ∂_jf.
            let mut prod = ScalarField::zeros(f.grid());
            let mut unc = ScalarField::zeros(f.grid());
            for l in 0..3 {
                for m in 0..3 {
                    let x = a.get(i, l) * a.get(m, j);
                    prod += &(&x * &g.y[3 * l + m]);
                    unc += &(&x * &g.s_y[3 * l + m]);
                }
            }
            out -= &(&(&half_t(&prod) - &unc) * &df[j]);
        }
        // 𝒯η^κ_m ∂^𝒜_m(∂^𝒜_i f).
        let inner = grad_a_partials(&gradient(ga.component(i)), &g.cof);
        for m in 0..3 {
            out += &(g.t_eta.component(m) * inner.component(m));
        }
        out
    }))
}

/// `(𝒱, 𝒬)` of a state, built on `η^κ` and `𝒜^κ`.
pub fn good_unknowns(state: &FlowState) -> Result<(VectorField, ScalarField)> {
    let (g, _) = geometry(state)?;
    Ok((state.v.map(|c| good(c, &g)), good(&state.q, &g)))
}

/// `𝒞(f)` for a state's geometry.
pub fn commutator_c(state: &FlowState, f: &ScalarField) -> Result<VectorField> {
    let (g, _) = geometry(state)?;
    Ok(commutator_with(f, &g))
}

/// L² residuals of the three good-unknown identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodUnknownResidual {
    /// `𝒱_t + ∇_{𝒜^κ}𝒬 − (b₀·∇)𝒯(b₀·∇η) − F`, with `v_t` from the momentum equation.
    pub momentum: f64,
    /// `𝒯(div_{𝒜^κ}v) − ∇_{𝒜^κ}·𝒱 − 𝒞_i(v_i)`.
    pub div: f64,
    /// `𝒬 + 𝒯(Λ_κ²η_i)𝒜^κ_{i3}∂₃q` on `Γ`.
    pub bc: f64,
}

pub fn good_unknown_residual(state: &FlowState) -> Result<GoodUnknownResidual> {
    let (g, spec) = geometry(state)?;
    let grid = state.grid();
    let q = &state.q;
    let qq = good(q, &g);

    // Momentum: with 𝒱_t = 𝒯v_t − ∂_t(𝒯η^κ·∇_𝒜v), the time derivative of the
    // geometric term cancels against F and only 𝒯v_t is needed.
    let b0 = state.b0.field();
    let mut v_t = grad_a_partials(&gradient(q), &g.cof).scaled(-1.0);
    let beta = if state.b0.is_zero() { VectorField::zeros(grid) } else { crate::geometry::pullback_field(b0, &state.eta) };
    if !state.b0.is_zero() {
        v_t += &lorentz_force(b0, &state.eta);
    }
    let t_beta = beta.map(tangential_t);
    let c_q = commutator_with(q, &g);
    let grad_qq = grad_a_partials(&gradient(&qq), &g.cof);
    let mut mom = v_t.map(tangential_t);
    mom += &grad_qq;
    mom -= &directional(b0, &t_beta);
    mom += &c_q;
    // [𝒯, b₀·∇](b₀·∇η)
    mom -= &(&directional(b0, &beta).map(tangential_t) - &directional(b0, &t_beta));
    let momentum = vector_volume_norm_sq(&mom, 0)?.sqrt();

    let mut lhs = tangential_t(&crate::geometry::div_a(&state.v, &g.cof));
    let vv = state.v.map(|c| good(c, &g));
    lhs -= &crate::geometry::div_a(&vv, &g.cof);
    for i in 0..3 {
        lhs -= commutator_with(state.v.component(i), &g).component(i);
    }
    let div = volume_norm(&lhs, 0)?;

    let smoothed = match &spec {
        Some(s) => mollify_vector(state.eta.displacement(), s, 2),
        None => state.eta.displacement().clone(),
    };
    let d3q = partial(q, 2).trace();
    let mut bc = qq.trace();
    for i in 0..3 {
        let term = &(&tangential_t(smoothed.component(i)).trace() * &g.cof.a.get(i, 2).trace()) * &d3q;
        bc = &bc + &term;
    }
    let bc = boundary_norm_sq(&bc, 0.0)?.sqrt();
    Ok(GoodUnknownResidual { momentum, div, bc })
}
