use crate::elliptic::SolverConfig;
use crate::error::{Error, Result};
use crate::geometry::{FlowMap, MagneticParam, DEFAULT_J_MIN};
use crate::grid::{GridSpec, ScalarField, VectorField};

/// `(t, η, v, q)` together with the parameters `b₀, κ, ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub eta: FlowMap,
    pub v: VectorField,
    /// Pressure from the most recent solve.
    pub q: ScalarField,
    pub b0: MagneticParam,
    pub kappa: f64,
    pub epsilon: f64,
}

impl FlowState {
    /// State at `t = 0` with `η = Id` and `q = 0`.
    pub fn initial(v0: VectorField, b0: MagneticParam, kappa: f64, epsilon: f64) -> Result<Self> {
        let grid = v0.grid();
        if b0.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if !(kappa >= 0.0 && kappa.is_finite()) || !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter("kappa and epsilon must be finite and nonnegative".into()));
        }
        if !v0.is_finite() {
            return Err(Error::NonFinite("initial velocity"));
        }
        Ok(Self {
            t: 0.0,
            eta: FlowMap::identity(grid),
            v: v0,
            q: ScalarField::zeros(grid),
            b0,
            kappa,
            epsilon,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.v.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Taylor floor `λ`; the monitor trips below `λ/2`. `None` disables it.
    pub lambda: Option<f64>,
    /// Reject states whose `|J^κ − 1|` or `|𝒜^κ − I|` exceeds `1/8`.
    pub enforce_bands: bool,
    pub j_min: f64,
    /// Two-thirds truncation of the tendencies.
    pub dealias: bool,
    pub solver: SolverConfig,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        Ok(Self {
            dt,
            scheme: Scheme::Rk4,
            lambda: None,
            enforce_bands: false,
            j_min: DEFAULT_J_MIN,
            dealias: false,
            solver: SolverConfig::default(),
        })
    }
}
