//! Run orchestration: builds the initial data, steps or iterates, and emits
//! the series and snapshots.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Mode, RunConfig};
use crate::diagnostics::{energy, invariants};
use crate::dynamics::{
    evolve_b_direct, fixed_point_with_halving, FlowState, HermiteSegment, Integrator, IterationConfig, IterationState,
    StepperConfig,
};
use crate::elliptic::{initial_pressure, taylor_minimum, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{pullback_field, FlowMap, MagneticParam};
use crate::grid::{ScalarField, VectorField};
use crate::io::{append_series, write_snapshot, SeriesRow};
use crate::presets::build;

/// Process exit codes; a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Config = 1,
    Taylor = 2,
    Solver = 3,
}

impl ExitCode {
    pub fn of(e: &Error) -> Self {
        match e {
            Error::TaylorViolation { .. } => ExitCode::Taylor,
            Error::Config { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidParameter(_)
            | Error::SobolevIndex(_)
            | Error::GridMismatch
            | Error::Format(_)
            | Error::Series(_)
            | Error::Io(_) => ExitCode::Config,
            Error::SingularMap { .. }
            | Error::BandExit { .. }
            | Error::Coefficient(_)
            | Error::NoConvergence { .. }
            | Error::StabilityViolation { .. }
            | Error::NoContraction { .. }
            | Error::NonFinite(_) => ExitCode::Solver,
        }
    }
}

/// A run that stopped early, with the time reached.
#[derive(Debug)]
pub struct RunFailure {
    pub t: f64,
    pub error: Error,
}

impl RunFailure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::of(&self.error)
    }
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self { t: 0.0, error }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    /// Measured Taylor floor `λ = min_Γ(−∇q₀·N)`.
    pub lambda: f64,
    pub rows: Vec<SeriesRow>,
    pub final_state: FlowState,
    /// Directly integrated magnetic field, when tracked.
    pub b_direct: Option<VectorField>,
    /// Horizons tried by the constructive mode.
    pub horizons: Vec<f64>,
}

impl RunSummary {
    /// `max_t 𝔈(t) / 𝔈(0)`.
    pub fn energy_growth(&self) -> f64 {
        let e0 = self.rows[0].energy.total;
        self.rows.iter().map(|r| r.energy.total / e0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Initial state and measured `λ` for a configuration.
pub fn initial_state(cfg: &RunConfig) -> Result<(FlowState, f64)> {
    let grid = cfg.grid()?;
    let (v0, b0) = build(cfg.preset, grid, &cfg.preset_params())?;
    let lambda = taylor_minimum(&initial_pressure(&v0, b0.field()));
    Ok((FlowState::initial(v0, b0, cfg.kappa, cfg.epsilon)?, lambda))
}

pub fn stepper_config(cfg: &RunConfig, lambda: Option<f64>) -> Result<StepperConfig> {
    let mut s = StepperConfig::new(cfg.dt)?;
    s.scheme = cfg.scheme;
    s.lambda = lambda;
    s.enforce_bands = cfg.enforce_bands;
    s.dealias = cfg.dealias;
    s.solver = SolverConfig { tol: cfg.solver_tol, max_iter: cfg.solver_max_iter };
    Ok(s)
}

fn snapshot_path(prefix: &Path, step: usize) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("_{step:06}.mhdl"));
    PathBuf::from(name)
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    rows: Vec<SeriesRow>,
    clock: Instant,
}

impl Recorder<'_> {
    fn record(&mut self, state: &FlowState, b_direct: Option<&VectorField>, iterations: usize, step: usize) -> Result<()> {
        let wall_ms = if self.cfg.wall_clock {
            let ms = self.clock.elapsed().as_secs_f64() * 1e3;
            self.clock = Instant::now();
            ms
        } else {
            0.0
        };
        let row = SeriesRow {
            t: state.t,
            energy: energy(state)?,
            invariants: invariants(state, b_direct)?,
            solver_iterations: iterations as u64,
            wall_ms,
        };
        if let Some(p) = &self.cfg.series {
            append_series(&row, p)?;
        }
        if let Some(prefix) = &self.cfg.snapshot {
            if self.cfg.snapshot_every > 0 && step.is_multiple_of(self.cfg.snapshot_every) {
                write_snapshot(state, &snapshot_path(prefix, step))?;
            }
        }
        self.rows.push(row);
        Ok(())
    }
}

fn start_outputs(cfg: &RunConfig) -> Result<()> {
    if let Some(p) = &cfg.series {
        // A run owns its series file.
        std::fs::write(p, b"")?;
    }
    Ok(())
}

/// Executes a configured run.
pub fn run(cfg: &RunConfig) -> std::result::Result<RunSummary, RunFailure> {
    cfg.validate()?;
    start_outputs(cfg)?;
    match cfg.mode {
        Mode::Nonlinear => run_nonlinear(cfg),
        Mode::Constructive => run_constructive(cfg),
    }
}

fn rate_of(it: &mut Integrator) -> Result<VectorField> {
    Ok(it.current_rhs()?.eta_dot.clone())
}

fn run_nonlinear(cfg: &RunConfig) -> std::result::Result<RunSummary, RunFailure> {
    let steps = cfg.steps()?;
    let (state, lambda) = initial_state(cfg)?;
    // λ = 0 is a state at rest with no pressure; only a negative floor is ill-posed.
    if cfg.taylor_monitor && !(lambda >= 0.0) {
        return Err(RunFailure { t: 0.0, error: Error::TaylorViolation { t: 0.0, min: lambda, floor: 0.0 } });
    }
    let scfg = stepper_config(cfg, cfg.taylor_monitor.then_some(lambda))?;
    let mut rec = Recorder { cfg, rows: Vec::with_capacity(steps + 1), clock: Instant::now() };
    let mut b = cfg.track_b.then(|| pullback_field(state.b0.field(), &state.eta));
    let mut it = Integrator::new(state, scfg);
    let at = |it: &Integrator, e: Error| RunFailure { t: it.state().t, error: e };
    let rate0 = rate_of(&mut it).map_err(|e| at(&it, e))?;
    rec.record(it.state(), b.as_ref(), 0, 0).map_err(|e| at(&it, e))?;
    let mut rate = rate0;
    for n in 1..=steps {
        let eta0 = it.state().eta.displacement().clone();
        let t0 = it.state().t;
        it.step().map_err(|e| at(&it, e))?;
        let rate1 = rate_of(&mut it).map_err(|e| at(&it, e))?;
        if let Some(bd) = &b {
            let seg = HermiteSegment {
                t0,
                dt: cfg.dt,
                eta0,
                eta1: it.state().eta.displacement().clone(),
                rate0: rate,
                rate1: rate1.clone(),
                j_min: scfg.j_min,
            };
            b = Some(evolve_b_direct(bd, &seg).map_err(|e| at(&it, e))?);
        }
        rate = rate1;
        let iters = it.last_iterations();
        rec.record(it.state(), b.as_ref(), iters, n).map_err(|e| at(&it, e))?;
    }
    Ok(RunSummary { steps, lambda, rows: rec.rows, final_state: it.into_state(), b_direct: b, horizons: Vec::new() })
}

pub fn iteration_config(cfg: &RunConfig) -> Result<IterationConfig> {
    Ok(IterationConfig {
        kappa: cfg.kappa,
        eps: cfg.epsilon,
        horizon: cfg.t_final,
        n_max: cfg.n_max,
        tol: cfg.iter_tol,
        patience: cfg.patience,
        stepper: stepper_config(cfg, None)?,
    })
}

/// State at sample `m` of the converged iterate.
pub fn iterate_state(st: &IterationState, m: usize, b0: &MagneticParam, kappa: f64, epsilon: f64) -> FlowState {
    let it = &st.current;
    FlowState {
        t: m as f64 * st.dt,
        eta: FlowMap::from_displacement(it.eta[m].clone()),
        v: it.v[m].clone(),
        q: it.q.get(m).cloned().unwrap_or_else(|| ScalarField::zeros(b0.grid())),
        b0: b0.clone(),
        kappa,
        epsilon,
    }
}

fn run_constructive(cfg: &RunConfig) -> std::result::Result<RunSummary, RunFailure> {
    let (state, lambda) = initial_state(cfg)?;
    let icfg = iteration_config(cfg)?;
    let (st, horizons) = fixed_point_with_halving(&state.v, &state.b0, &icfg, cfg.max_halvings)?;
    let mut rec = Recorder { cfg, rows: Vec::new(), clock: Instant::now() };
    let samples = st.current.eta.len();
    let mut last = state;
    for m in 0..samples {
        let s = iterate_state(&st, m, &last.b0, cfg.kappa, cfg.epsilon);
        rec.record(&s, None, st.n, m).map_err(|e| RunFailure { t: s.t, error: e })?;
        last = s;
    }
    Ok(RunSummary { steps: samples - 1, lambda, rows: rec.rows, final_state: last, b_direct: None, horizons })
}
