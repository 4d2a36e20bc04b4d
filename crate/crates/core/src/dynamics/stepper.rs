use super::state::{FlowState, Scheme, StepperConfig};
use crate::elliptic::{cofactor_time_derivative, pressure_sources, solve_pressure, taylor_minimum, SolveStats};
use crate::error::{Error, Result};
use crate::geometry::{cofactor_with, grad_a, lorentz_force, CofactorData, CofactorOptions, FlowMap, MagneticParam};
use crate::grid::{dealias, ScalarField, VectorField};
use crate::smoothing::{boundary_smoother, modification_term, smooth_vector, MollifierSpec};

/// Tendencies of the κ-problem at one state, with the quantities built on the way.
#[derive(Debug, Clone)]
pub struct Rhs {
    /// `∂_tη = v + ψ^κ`.
    pub eta_dot: VectorField,
    /// `∂_tv = −∇_{𝒜^κ}q + (b₀·∇)²η`.
    pub v_dot: VectorField,
    pub q: ScalarField,
    pub psi: VectorField,
    pub cof_kappa: CofactorData,
    pub stats: SolveStats,
}

pub(crate) fn rhs_parts(
    eta: &FlowMap,
    v: &VectorField,
    b0: &MagneticParam,
    kappa: f64,
    cfg: &StepperConfig,
    q_guess: Option<&ScalarField>,
) -> Result<Rhs> {
    let opts = CofactorOptions { j_min: cfg.j_min, enforce_band: cfg.enforce_bands };
    let spec = if kappa > 0.0 { Some(MollifierSpec::new(kappa)?) } else { None };
    let eta_k = match &spec {
        Some(s) => boundary_smoother(eta, s),
        None => eta.clone(),
    };
    let cof_kappa = cofactor_with(&eta_k, opts)?;
    let psi = match &spec {
        Some(s) => modification_term(eta, v, &cof_kappa, s),
        None => VectorField::zeros(v.grid()),
    };
    let mut eta_dot = v + &psi;
    let rate_k = match &spec {
        Some(s) => smooth_vector(&eta_dot, s),
        None => eta_dot.clone(),
    };
    let dt_a = cofactor_time_derivative(&cof_kappa.a, &rate_k);
    let sources = pressure_sources(eta, v, &cof_kappa, &dt_a, b0.field());
    let (q, stats) = solve_pressure(&sources, &cof_kappa, q_guess, &cfg.solver)?;
    let mut v_dot = grad_a(&q, &cof_kappa).scaled(-1.0);
    if !b0.is_zero() {
        v_dot += &lorentz_force(b0.field(), eta);
    }
    if cfg.dealias {
        eta_dot = eta_dot.map(dealias);
        v_dot = v_dot.map(dealias);
    }
    if !eta_dot.is_finite() || !v_dot.is_finite() {
        return Err(Error::NonFinite("right-hand side"));
    }
    Ok(Rhs { eta_dot, v_dot, q, psi, cof_kappa, stats })
}

/// Right-hand side of the κ-problem at `state`. `κ = 0` drops the smoothing
/// and `ψ^κ`, which is the unsmoothed system.
pub fn rhs_kappa(state: &FlowState, cfg: &StepperConfig) -> Result<Rhs> {
    rhs_parts(&state.eta, &state.v, &state.b0, state.kappa, cfg, Some(&state.q))
}

/// Advances a state with a cached right-hand side at the current time.
#[derive(Debug, Clone)]
pub struct Integrator {
    state: FlowState,
    cfg: StepperConfig,
    rhs: Option<Rhs>,
    last_iterations: usize,
}

impl Integrator {
    pub fn new(state: FlowState, cfg: StepperConfig) -> Self {
        Self { state, cfg, rhs: None, last_iterations: 0 }
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn into_state(self) -> FlowState {
        self.state
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// CG iterations summed over the stages of the last step.
    pub fn last_iterations(&self) -> usize {
        self.last_iterations
    }

    /// Right-hand side at the current state; also refreshes `state.q`.
    pub fn current_rhs(&mut self) -> Result<&Rhs> {
        if self.rhs.is_none() {
            let r = rhs_kappa(&self.state, &self.cfg)?;
            self.state.q = r.q.clone();
            self.rhs = Some(r);
        }
        Ok(self.rhs.as_ref().expect("just computed"))
    }

    fn stage(&self, k: &Rhs, a: f64, q_guess: &ScalarField) -> Result<Rhs> {
        let s = &self.state;
        let eta = s.eta.shifted(&k.eta_dot, a);
        let mut v = s.v.clone();
        v.axpy(a, &k.v_dot);
        rhs_parts(&eta, &v, &s.b0, s.kappa, &self.cfg, Some(q_guess))
    }

    /// One step of the configured scheme, then the Taylor monitor on the new pressure.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        let k1 = match self.rhs.take() {
            Some(r) => r,
            None => rhs_kappa(&self.state, &self.cfg)?,
        };
        let mut iters = k1.stats.iterations;
        let (deta, dv) = match self.cfg.scheme {
            Scheme::Euler => (k1.eta_dot.scaled(dt), k1.v_dot.scaled(dt)),
            Scheme::Rk4 => {
                let k2 = self.stage(&k1, 0.5 * dt, &k1.q)?;
                let k3 = self.stage(&k2, 0.5 * dt, &k2.q)?;
                let k4 = self.stage(&k3, dt, &k3.q)?;
                iters += k2.stats.iterations + k3.stats.iterations + k4.stats.iterations;
                let comb = |a: &VectorField, b: &VectorField, c: &VectorField, d: &VectorField| {
                    let mut s = a.clone();
                    s.axpy(2.0, b);
                    s.axpy(2.0, c);
                    s += d;
                    s.scaled(dt / 6.0)
                };
                (
                    comb(&k1.eta_dot, &k2.eta_dot, &k3.eta_dot, &k4.eta_dot),
                    comb(&k1.v_dot, &k2.v_dot, &k3.v_dot, &k4.v_dot),
                )
            }
        };
        let mut next = self.state.clone();
        next.eta = next.eta.shifted(&deta, 1.0);
        next.v += &dv;
        next.t += dt;
        let r = rhs_parts(&next.eta, &next.v, &next.b0, next.kappa, &self.cfg, Some(&k1.q))?;
        iters += r.stats.iterations;
        next.q = r.q.clone();
        if !next.eta.displacement().is_finite() || !next.v.is_finite() {
            return Err(Error::NonFinite("time step"));
        }
        self.state = next;
        self.rhs = Some(r);
        self.last_iterations = iters;
        if let Some(lambda) = self.cfg.lambda {
            let min = taylor_minimum(&self.state.q);
            if min < 0.5 * lambda {
                return Err(Error::TaylorViolation { t: self.state.t, min, floor: 0.5 * lambda });
            }
        }
        Ok(())
    }
}

/// One step from `state`; the returned state carries the pressure at its own time.
pub fn step(state: &FlowState, cfg: &StepperConfig) -> Result<FlowState> {
    let mut it = Integrator::new(state.clone(), *cfg);
    it.step()?;
    Ok(it.into_state())
}
