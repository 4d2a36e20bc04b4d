//! The magnetic field integrated from `∂_t b = b·∇_𝒜 η̇`, independently of
//! the pullback `b = b₀·∇η`. The equation is pointwise in space, so only
//! the coefficients `𝒜(t)` and `∇η̇(t)` are needed between step endpoints.

use crate::error::Result;
use crate::geometry::{cofactor_with, vector_gradient, CofactorOptions, FlowMap};
use crate::grid::{TensorField, VectorField};

/// Supplies `(𝒜(t), ∇η̇(t))` at any time inside a step.
pub trait CoefficientProvider {
    fn coefficients(&self, t: f64) -> Result<(TensorField, TensorField)>;
}

impl<F: Fn(f64) -> Result<(TensorField, TensorField)>> CoefficientProvider for F {
    fn coefficients(&self, t: f64) -> Result<(TensorField, TensorField)> {
        self(t)
    }
}

/// Cubic Hermite interpolation of `η` between two step endpoints, using the
/// rates `η̇` at both ends.
#[derive(Debug, Clone)]
pub struct HermiteSegment {
    pub t0: f64,
    pub dt: f64,
    pub eta0: VectorField,
    pub eta1: VectorField,
    pub rate0: VectorField,
    pub rate1: VectorField,
    pub j_min: f64,
}

impl HermiteSegment {
    fn at(&self, t: f64) -> (VectorField, VectorField) {
        let s = (t - self.t0) / self.dt;
        let h = self.dt;
        let (s2, s3) = (s * s, s * s * s);
        let mut eta = self.eta0.scaled(2.0 * s3 - 3.0 * s2 + 1.0);
        eta.axpy(h * (s3 - 2.0 * s2 + s), &self.rate0);
        eta.axpy(-2.0 * s3 + 3.0 * s2, &self.eta1);
        eta.axpy(h * (s3 - s2), &self.rate1);
        let mut rate = (&self.eta1 - &self.eta0).scaled((6.0 * s - 6.0 * s2) / h);
        rate.axpy(3.0 * s2 - 4.0 * s + 1.0, &self.rate0);
        rate.axpy(3.0 * s2 - 2.0 * s, &self.rate1);
        (eta, rate)
    }
}

impl CoefficientProvider for HermiteSegment {
    fn coefficients(&self, t: f64) -> Result<(TensorField, TensorField)> {
        let (d, rate) = self.at(t);
        let opts = CofactorOptions { j_min: self.j_min, enforce_band: false };
        let cof = cofactor_with(&FlowMap::from_displacement(d), opts)?;
        Ok((cof.a, vector_gradient(&rate)))
    }
}

/// `f(b)_i = b_k 𝒜_kℓ ∂_ℓ η̇_i`, pointwise.
fn tendency(b: &VectorField, a: &TensorField, grad_rate: &TensorField) -> VectorField {
    let g = b.grid();
    let mut out = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
    let bc = b.components();
    for p in 0..g.len() {
        let am = a.at(p);
        let gr = grad_rate.at(p);
        let bp = [bc[0].values()[p], bc[1].values()[p], bc[2].values()[p]];
        // w_ℓ = b_k 𝒜_kℓ
        let w: [f64; 3] = std::array::from_fn(|l| (0..3).map(|k| bp[k] * am[k][l]).sum());
        for (i, o) in out.iter_mut().enumerate() {
            o[p] = (0..3).map(|l| w[l] * gr[i][l]).sum();
        }
    }
    VectorField::new(out.map(|d| crate::grid::ScalarField::from_vec(g, d)))
}

/// One classical RK4 step of the magnetic-field equation over `[t0, t0 + dt]`.
pub fn evolve_b_along(b: &VectorField, t0: f64, dt: f64, provider: &dyn CoefficientProvider) -> Result<VectorField> {
    let (a0, g0) = provider.coefficients(t0)?;
    let (am, gm) = provider.coefficients(t0 + 0.5 * dt)?;
    let (a1, g1) = provider.coefficients(t0 + dt)?;
    let k1 = tendency(b, &a0, &g0);
    let mut s = b.clone();
    s.axpy(0.5 * dt, &k1);
    let k2 = tendency(&s, &am, &gm);
    let mut s = b.clone();
    s.axpy(0.5 * dt, &k2);
    let k3 = tendency(&s, &am, &gm);
    let mut s = b.clone();
    s.axpy(dt, &k3);
    let k4 = tendency(&s, &a1, &g1);
    let mut out = b.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// Advances `b` across one step of a run, from the endpoint data of that step.
pub fn evolve_b_direct(b: &VectorField, segment: &HermiteSegment) -> Result<VectorField> {
    evolve_b_along(b, segment.t0, segment.dt, segment)
}
