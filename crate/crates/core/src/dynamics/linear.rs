//! The ε–κ linear problem around frozen coefficients, and its three
//! sub-problems.
//!
//! With `𝒜̃` frozen, the pressure is fixed by differentiating
//! `div_𝒜̃ v = 0` in time: `𝒜̃∂(𝒜̃∂q) = ∂_t𝒜̃∂v + 𝒜̃∂((b₀·∇)²η)`.
//! Callers pass `𝔣³ = −(∂_t𝒜̃∂v + 𝒜̃∂((b₀·∇)²η))` so that
//! `−𝒜̃∂(𝒜̃∂q) = 𝔣³` holds.

use super::state::{Scheme, StepperConfig};
use crate::elliptic::{pressure_coefficient, solve_variable, SolveStats, SolverConfig, VariableOperator, DEFAULT_E_MIN};
use crate::error::{Error, Result};
use crate::geometry::{grad_a_from_partials, gradient, lorentz_force, CofactorData, FlowMap, MagneticParam};
use crate::grid::{BoundaryField, GridSpec, ScalarField, TensorField, VectorField};

/// Safety factor of the explicit ε-term.
pub const C_STAB: f64 = 0.2;

/// Samples on the uniform grid `t0 + m·dt`, linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn new(t0: f64, dt: f64, samples: Vec<T>) -> Self {
        Self { t0, dt, samples }
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn last(&self) -> Option<&T> {
        self.samples.last()
    }
    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }
    /// `(m, θ)` with `t = t_m + θ·dt`, clamped to the sampled range.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.samples.len();
        let x = ((t - self.t0) / self.dt).clamp(0.0, (n - 1) as f64);
        let m = (x.floor() as usize).min(n.saturating_sub(2));
        (m, x - m as f64)
    }
}

impl TimeSeries<VectorField> {
    pub fn at(&self, t: f64) -> VectorField {
        if self.samples.len() == 1 {
            return self.samples[0].clone();
        }
        let (m, th) = self.locate(t);
        if th == 0.0 {
            return self.samples[m].clone();
        }
        let mut out = self.samples[m].scaled(1.0 - th);
        out.axpy(th, &self.samples[m + 1]);
        out
    }
}

/// `dt ≤ C_STAB·h²/(ε·max|b₀|²)`; infinite when the ε-term vanishes.
pub fn stability_bound(grid: GridSpec, eps: f64, b0: &MagneticParam) -> f64 {
    let bmax2 = (0..grid.len())
        .map(|p| b0.field().components().iter().map(|c| c.values()[p].powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    if eps == 0.0 || bmax2 == 0.0 {
        f64::INFINITY
    } else {
        C_STAB * grid.min_spacing().powi(2) / (eps * bmax2)
    }
}

/// `(b₀·∇)²η` for a displacement.
fn lorentz_of(b0: &MagneticParam, d: &VectorField) -> VectorField {
    if b0.is_zero() {
        return VectorField::zeros(d.grid());
    }
    lorentz_force(b0.field(), &FlowMap::from_displacement(d.clone()))
}

/// `∂_tη − ε(b₀·∇)²η = 𝔣¹` by forward Euler on the sample grid of `f1`.
/// Returns the displacement at every sample time; no boundary condition is imposed.
pub fn solve_linear_eta(
    f1: &TimeSeries<VectorField>,
    eps: f64,
    b0: &MagneticParam,
    eta0: &VectorField,
) -> Result<TimeSeries<VectorField>> {
    let dt = f1.dt;
    let bound = stability_bound(eta0.grid(), eps, b0);
    if dt > bound {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let mut out = Vec::with_capacity(f1.len());
    let mut d = eta0.clone();
    out.push(d.clone());
    for m in 0..f1.len().saturating_sub(1) {
        let mut inc = f1.samples[m].clone();
        if eps > 0.0 {
            inc.axpy(eps, &lorentz_of(b0, &d));
        }
        d.axpy(dt, &inc);
        out.push(d.clone());
    }
    Ok(TimeSeries::new(f1.t0, dt, out))
}

/// `∂_tv = 𝔣²` integrated by Simpson's rule per step (RK4 on a pure quadrature).
pub fn solve_linear_v(
    f2: &dyn Fn(f64) -> Result<VectorField>,
    v0: &VectorField,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<TimeSeries<VectorField>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut v = v0.clone();
    out.push(v.clone());
    let mut f_lo = f2(t0)?;
    for m in 0..steps {
        let t = t0 + m as f64 * dt;
        let f_mid = f2(t + 0.5 * dt)?;
        let f_hi = f2(t + dt)?;
        v.axpy(dt / 6.0, &f_lo);
        v.axpy(2.0 * dt / 3.0, &f_mid);
        v.axpy(dt / 6.0, &f_hi);
        out.push(v.clone());
        f_lo = f_hi;
    }
    Ok(TimeSeries::new(t0, dt, out))
}

/// `−𝒜̃_ij ∂_j(𝒜̃_iℓ ∂_ℓ q) = 𝔣³`, `q = 0` on the faces, solved in the
/// `J̃`-weighted divergence form `−Div(J̃𝒜̃ᵀ𝒜̃∇q) = J̃𝔣³`.
pub fn solve_linear_q(
    cof_tilde: &CofactorData,
    f3: &ScalarField,
    guess: Option<&ScalarField>,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolveStats)> {
    let op = VariableOperator::new(pressure_coefficient(&cof_tilde.a, &cof_tilde.j), DEFAULT_E_MIN)?;
    solve_variable(&op, &(f3 * &cof_tilde.j), &BoundaryField::zeros(f3.grid()), guess, cfg)
}

/// Frozen coefficients at one instant: `𝒜̃^κ`, `J̃^κ`, `∂_t𝒜̃^κ`, and `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSample {
    pub cof: CofactorData,
    pub dt_a: TensorField,
    pub psi: VectorField,
}

impl CoefficientSample {
    /// `𝒜̃ = I`, `∂_t𝒜̃ = 0`, `ψ = 0`.
    pub fn identity(grid: GridSpec) -> Self {
        Self { cof: CofactorData::identity(grid), dt_a: TensorField::zeros(grid), psi: VectorField::zeros(grid) }
    }

    fn lerp(a: &Self, b: &Self, th: f64) -> Self {
        let mix = |x: &ScalarField, y: &ScalarField| {
            let mut o = x.scaled(1.0 - th);
            o.axpy(th, y);
            o
        };
        let mixt = |x: &TensorField, y: &TensorField| x.zip_map(y, mix);
        Self {
            cof: CofactorData {
                grad_eta: mixt(&a.cof.grad_eta, &b.cof.grad_eta),
                a: mixt(&a.cof.a, &b.cof.a),
                j: mix(&a.cof.j, &b.cof.j),
            },
            dt_a: mixt(&a.dt_a, &b.dt_a),
            psi: a.psi.zip_map(&b.psi, mix),
        }
    }
}

/// Coefficient samples on a uniform time grid.
pub type LinearCoefficients = TimeSeries<CoefficientSample>;

impl LinearCoefficients {
    pub fn sample_at(&self, t: f64) -> CoefficientSample {
        if self.samples.len() == 1 {
            return self.samples[0].clone();
        }
        let (m, th) = self.locate(t);
        if th == 0.0 {
            return self.samples[m].clone();
        }
        CoefficientSample::lerp(&self.samples[m], &self.samples[m + 1], th)
    }
}

/// Unknowns of the linear problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub t: f64,
    /// Displacement `η − Id`.
    pub eta: VectorField,
    pub v: VectorField,
    pub q: ScalarField,
}

impl LinearState {
    pub fn initial(v0: VectorField) -> Self {
        let g = v0.grid();
        Self { t: 0.0, eta: VectorField::zeros(g), v: v0, q: ScalarField::zeros(g) }
    }
}

struct LinearRhs {
    eta_dot: VectorField,
    v_dot: VectorField,
    q: ScalarField,
    stats: SolveStats,
}

fn linear_rhs(
    d: &VectorField,
    v: &VectorField,
    c: &CoefficientSample,
    b0: &MagneticParam,
    eps: f64,
    solver: &SolverConfig,
    guess: Option<&ScalarField>,
) -> Result<LinearRhs> {
    let lor = lorentz_of(b0, d);
    let mut eta_dot = v + &c.psi;
    if eps > 0.0 {
        eta_dot.axpy(eps, &lor);
    }
    // 𝔣³ = −(∂_t𝒜̃_iℓ ∂_ℓ v_i + 𝒜̃_iℓ ∂_ℓ L_i)
    let mut f3 = ScalarField::zeros(d.grid());
    for i in 0..3 {
        let dv = gradient(v.component(i));
        let dl = gradient(lor.component(i));
        for l in 0..3 {
            f3 -= &(c.dt_a.get(i, l) * &dv[l]);
            f3 -= &(c.cof.a.get(i, l) * &dl[l]);
        }
    }
    let (q, stats) = solve_linear_q(&c.cof, &f3, guess, solver)?;
    let mut v_dot = grad_a_from_partials(&gradient(&q), &c.cof.a).scaled(-1.0);
    v_dot += &lor;
    Ok(LinearRhs { eta_dot, v_dot, q, stats })
}

/// One step of the ε–κ problem `∂_tη − ε(b₀·∇)²η = v + ψ`,
/// `∂_tv + ∇_𝒜̃q = (b₀·∇)²η`, `div_𝒜̃v = 0`, `q = 0` on `Γ`.
pub fn step_eps_kappa(
    state: &LinearState,
    coeffs: &LinearCoefficients,
    b0: &MagneticParam,
    eps: f64,
    cfg: &StepperConfig,
) -> Result<(LinearState, SolveStats)> {
    let dt = cfg.dt;
    let bound = stability_bound(state.v.grid(), eps, b0);
    if dt > bound {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let t = state.t;
    let c0 = coeffs.sample_at(t);
    let k1 = linear_rhs(&state.eta, &state.v, &c0, b0, eps, &cfg.solver, Some(&state.q))?;
    let (deta, dv, mut iters) = match cfg.scheme {
        Scheme::Euler => (k1.eta_dot.scaled(dt), k1.v_dot.scaled(dt), k1.stats.iterations),
        Scheme::Rk4 => {
            let cm = coeffs.sample_at(t + 0.5 * dt);
            let c1 = coeffs.sample_at(t + dt);
            let stage = |k: &LinearRhs, a: f64, c: &CoefficientSample| {
                let mut d = state.eta.clone();
                d.axpy(a, &k.eta_dot);
                let mut v = state.v.clone();
                v.axpy(a, &k.v_dot);
                linear_rhs(&d, &v, c, b0, eps, &cfg.solver, Some(&k.q))
            };
            let k2 = stage(&k1, 0.5 * dt, &cm)?;
            let k3 = stage(&k2, 0.5 * dt, &cm)?;
            let k4 = stage(&k3, dt, &c1)?;
            let comb = |f: fn(&LinearRhs) -> &VectorField| {
                let mut s = f(&k1).clone();
                s.axpy(2.0, f(&k2));
                s.axpy(2.0, f(&k3));
                s += f(&k4);
                s.scaled(dt / 6.0)
            };
            let it = k1.stats.iterations + k2.stats.iterations + k3.stats.iterations + k4.stats.iterations;
            (comb(|k| &k.eta_dot), comb(|k| &k.v_dot), it)
        }
    };
    let mut next = state.clone();
    next.eta += &deta;
    next.v += &dv;
    next.t = t + dt;
    let c_end = coeffs.sample_at(next.t);
    let end = linear_rhs(&next.eta, &next.v, &c_end, b0, eps, &cfg.solver, Some(&k1.q))?;
    iters += end.stats.iterations;
    next.q = end.q;
    if !next.eta.is_finite() || !next.v.is_finite() {
        return Err(Error::NonFinite("linear step"));
    }
    Ok((next, SolveStats { iterations: iters, residual: end.stats.residual }))
}
