//! Linearization iteration for the κ-problem: iterate `n + 1` solves the
//! ε–κ linear problem with `𝒜̃ = 𝒜^{κ(n)}` and `ψ = ψ^{κ(n)}` built from
//! iterate `n`. Iterates 0 and 1 are `(η, v, q) = (Id, 0, 0)`.

use super::linear::{step_eps_kappa, CoefficientSample, LinearCoefficients, LinearState, TimeSeries};
use super::state::StepperConfig;
use crate::elliptic::cofactor_time_derivative;
use crate::error::{Error, Result};
use crate::geometry::{cofactor, directional, FlowMap, MagneticParam};
use crate::grid::{tensor_volume_norm_sq, vector_volume_norm_sq, ScalarField, TensorField, VectorField};
use crate::smoothing::{modification_term, smooth_vector, MollifierSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub kappa: f64,
    pub eps: f64,
    pub horizon: f64,
    pub n_max: usize,
    pub tol: f64,
    /// Consecutive non-contracting iterations that abort the construction.
    pub patience: usize,
    pub stepper: StepperConfig,
}

/// One iterate sampled on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub eta: Vec<VectorField>,
    pub v: Vec<VectorField>,
    pub q: Vec<ScalarField>,
    /// `∂_tη = v + ψ` of the previous iterate.
    pub rate: Vec<VectorField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub n: usize,
    pub dt: f64,
    pub horizon: f64,
    pub current: Iterate,
    /// `Ψ⁽ⁿ⁾` for `n = 1, 2, …`.
    pub psi_history: Vec<f64>,
    pub converged: bool,
}

impl IterationState {
    pub fn ratios(&self) -> Vec<f64> {
        self.psi_history.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

fn seed(grid: crate::grid::GridSpec, m: usize) -> Iterate {
    Iterate {
        eta: vec![VectorField::zeros(grid); m],
        v: vec![VectorField::zeros(grid); m],
        q: vec![ScalarField::zeros(grid); m],
        rate: vec![VectorField::zeros(grid); m],
    }
}

/// `𝒜^{κ}`, `∂_t𝒜^{κ}` and `ψ^{κ}` of one iterate at every sample.
fn coefficients(it: &Iterate, spec: &MollifierSpec, dt: f64) -> Result<LinearCoefficients> {
    let mut samples = Vec::with_capacity(it.eta.len());
    for m in 0..it.eta.len() {
        let eta = FlowMap::from_displacement(it.eta[m].clone());
        let ek = FlowMap::from_displacement(smooth_vector(&it.eta[m], spec));
        let cof = cofactor(&ek)?;
        let dt_a = cofactor_time_derivative(&cof.a, &smooth_vector(&it.rate[m], spec));
        let psi = modification_term(&eta, &it.v[m], &cof, spec);
        samples.push(CoefficientSample { cof, dt_a, psi });
    }
    Ok(TimeSeries::new(0.0, dt, samples))
}

/// Discrete `Ψ⁽ⁿ⁾ = max_t(‖v̄‖₃² + ‖η̄‖₃² + ‖b₀·∇η̄‖₃²) + max_t‖𝒜̄^κ‖₂²`.
pub fn contraction_metric(
    next: &Iterate,
    cur: &Iterate,
    a_cur: &[TensorField],
    a_prev: &[TensorField],
    b0: &MagneticParam,
) -> Result<f64> {
    let mut first = 0.0_f64;
    let mut second = 0.0_f64;
    for m in 0..next.eta.len() {
        let dv = &next.v[m] - &cur.v[m];
        let de = &next.eta[m] - &cur.eta[m];
        let mut s = vector_volume_norm_sq(&dv, 3)? + vector_volume_norm_sq(&de, 3)?;
        if !b0.is_zero() {
            s += vector_volume_norm_sq(&directional(b0.field(), &de), 3)?;
        }
        first = first.max(s);
        let da = a_cur[m].zip_map(&a_prev[m], |x, y| x - y);
        second = second.max(tensor_volume_norm_sq(&da, 2)?);
    }
    Ok(first + second)
}

/// Runs the iteration until `Ψ⁽ⁿ⁾ ≤ tol·Ψ⁽¹⁾` or `n = n_max`. The test is
/// relative because `Ψ` stagnates at a round-off floor that scales with `Ψ⁽¹⁾`.
pub fn fixed_point_construct(v0: &VectorField, b0: &MagneticParam, cfg: &IterationConfig) -> Result<IterationState> {
    if !(cfg.kappa > 0.0) {
        return Err(Error::InvalidParameter("the iteration needs kappa > 0".into()));
    }
    let spec = MollifierSpec::new(cfg.kappa)?;
    let dt = cfg.stepper.dt;
    let steps = (cfg.horizon / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - cfg.horizon).abs() > 1e-9 * cfg.horizon {
        return Err(Error::InvalidParameter("horizon must be a positive multiple of dt".into()));
    }
    let grid = v0.grid();
    let mut prev_a: Vec<TensorField> = vec![TensorField::identity(grid); steps + 1];
    let mut cur = seed(grid, steps + 1);
    let mut history = Vec::new();
    let mut bad = 0;
    let mut n = 1;
    loop {
        let coeffs = match coefficients(&cur, &spec, dt) {
            // An iterate outside the admissible maps has left the ball the
            // contraction lives in.
            Err(Error::SingularMap { .. }) => {
                return Err(Error::NoContraction { n, ratios: history.windows(2).map(|w| w[1] / w[0]).collect() })
            }
            other => other?,
        };
        let mut st = LinearState::initial(v0.clone());
        let mut next = Iterate {
            eta: vec![st.eta.clone()],
            v: vec![st.v.clone()],
            q: vec![ScalarField::zeros(grid)],
            rate: vec![&st.v + &coeffs.samples[0].psi],
        };
        for m in 0..steps {
            st = step_eps_kappa(&st, &coeffs, b0, cfg.eps, &cfg.stepper)?.0;
            next.rate.push(&st.v + &coeffs.samples[m + 1].psi);
            next.eta.push(st.eta.clone());
            next.v.push(st.v.clone());
            next.q.push(st.q.clone());
        }
        // q at t = 0 comes from the first step's pressure solve at the start point.
        next.q[0] = next.q.get(1).cloned().unwrap_or_else(|| ScalarField::zeros(grid));
        let cur_a: Vec<TensorField> = coeffs.samples.iter().map(|c| c.cof.a.clone()).collect();
        let psi = contraction_metric(&next, &cur, &cur_a, &prev_a, b0)?;
        history.push(psi);
        prev_a = cur_a;
        cur = next;
        if psi <= cfg.tol * history[0] {
            return Ok(IterationState { n, dt, horizon: cfg.horizon, current: cur, psi_history: history, converged: true });
        }
        if history.len() >= 2 {
            let r = history[history.len() - 1] / history[history.len() - 2];
            bad = if r >= 1.0 { bad + 1 } else { 0 };
            if bad >= cfg.patience {
                let ratios = history.windows(2).map(|w| w[1] / w[0]).collect();
                return Err(Error::NoContraction { n, ratios });
            }
        }
        if n >= cfg.n_max {
            return Ok(IterationState { n, dt, horizon: cfg.horizon, current: cur, psi_history: history, converged: false });
        }
        n += 1;
    }
}

/// Retries with the horizon halved after each `NoContraction`, at most
/// `max_halvings` times. Returns the final state and the horizons tried.
pub fn fixed_point_with_halving(
    v0: &VectorField,
    b0: &MagneticParam,
    cfg: &IterationConfig,
    max_halvings: usize,
) -> Result<(IterationState, Vec<f64>)> {
    let mut c = *cfg;
    let mut tried = Vec::new();
    loop {
        tried.push(c.horizon);
        match fixed_point_construct(v0, b0, &c) {
            Err(Error::NoContraction { .. }) if tried.len() <= max_halvings => {
                c.horizon *= 0.5;
                // Keep the horizon a whole number of steps.
                let steps = (c.horizon / c.stepper.dt).round().max(1.0);
                c.stepper.dt = c.horizon / steps;
            }
            other => return other.map(|s| (s, tried)),
        }
    }
}
