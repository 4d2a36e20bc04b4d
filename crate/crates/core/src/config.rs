//! Run configuration: line-oriented `key = value` text with `#` comments.
//!
//! Keys (defaults in parentheses):
//!
//! | key | value |
//! |-----|-------|
//! | `n1`, `n2` | even horizontal node counts ≥ 8 (16) |
//! | `n3` | vertical intervals ≥ 8; fields have `n3 + 1` levels (16) |
//! | `fd_order` | vertical difference order, `2` or `4` (2) |
//! | `preset` | `trivial`, `shear`, `demo`, `taylor-violating`, `random` (demo) |
//! | `amp`, `b0_amp` | preset velocity and field scales (1e-3, 0.5) |
//! | `seed` | seed of the random preset (1) |
//! | `kappa`, `epsilon` | smoothing scale and ε-regularization, ≥ 0 (0.05, 0) |
//! | `dt`, `t_final` | step and horizon; `t_final` a whole number of steps (1e-3, 0.05) |
//! | `scheme` | `rk4` or `euler` (rk4) |
//! | `mode` | `nonlinear` or `constructive` (nonlinear) |
//! | `taylor_monitor`, `enforce_bands`, `dealias`, `track_b`, `wall_clock` | booleans (true, false, false, false, false) |
//! | `solver_tol`, `solver_max_iter` | pressure solver controls (1e-10, 500) |
//! | `n_max`, `iter_tol`, `patience`, `max_halvings` | constructive iteration; `iter_tol` is relative to the first `Ψ` (20, 1e-20, 3, 4) |
//! | `series`, `snapshot`, `report` | output paths (none) |
//! | `snapshot_every` | steps between snapshots, 0 for none (0) |
//! | `lemma`, `samples` | lemma harness: a lemma name or `all`, sample count (all, 100) |
//! | `levels` | study refinement levels, 0 for the study's own default (0) |

use std::path::PathBuf;

use crate::diagnostics::LemmaId;
use crate::dynamics::Scheme;
use crate::error::{Error, Result};
use crate::grid::{FdOrder, GridSpec};
use crate::presets::{Preset, PresetParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The smoothed nonlinear problem, stepped in time.
    Nonlinear,
    /// The linearization iteration on the ε–κ problem.
    Constructive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub fd_order: FdOrder,
    pub preset: Preset,
    pub amp: f64,
    pub b0_amp: f64,
    pub seed: u64,
    pub kappa: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    pub taylor_monitor: bool,
    pub enforce_bands: bool,
    pub dealias: bool,
    pub track_b: bool,
    pub wall_clock: bool,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub n_max: usize,
    pub iter_tol: f64,
    pub patience: usize,
    pub max_halvings: usize,
    pub series: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub snapshot_every: usize,
    pub report: Option<PathBuf>,
    /// `None` runs every lemma.
    pub lemma: Option<LemmaId>,
    pub samples: usize,
    /// Parameter levels of a study; 0 picks the study default.
    pub levels: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PresetParams::default();
        Self {
            n1: 16,
            n2: 16,
            n3: 16,
            fd_order: FdOrder::Second,
            preset: Preset::Demo,
            amp: p.amp,
            b0_amp: p.b0_amp,
            seed: p.seed,
            kappa: 0.05,
            epsilon: 0.0,
            dt: 1e-3,
            t_final: 0.05,
            scheme: Scheme::Rk4,
            mode: Mode::Nonlinear,
            taylor_monitor: true,
            enforce_bands: false,
            dealias: false,
            track_b: false,
            wall_clock: false,
            solver_tol: 1e-10,
            solver_max_iter: 500,
            n_max: 20,
            iter_tol: 1e-20,
            patience: 3,
            max_halvings: 4,
            series: None,
            snapshot: None,
            snapshot_every: 0,
            report: None,
            lemma: None,
            samples: 100,
            levels: 0,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::with_order(self.n1, self.n2, self.n3, self.fd_order)
    }

    pub fn preset_params(&self) -> PresetParams {
        PresetParams { amp: self.amp, b0_amp: self.b0_amp, seed: self.seed }
    }

    /// Number of steps to `t_final`; an error unless it is a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_final / self.dt).round();
        if !(n >= 1.0) || (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::InvalidParameter(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }

    /// Cross-field checks that single values cannot express.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.steps()?;
        Ok(())
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Config { line, column, message: message.into() }
}

struct Value<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Value<'_> {
    fn fail(&self, m: impl Into<String>) -> Error {
        err(self.line, self.column, m)
    }
    fn f64(&self) -> Result<f64> {
        let x: f64 = self.text.parse().map_err(|_| self.fail(format!("expected a number, found {:?}", self.text)))?;
        if !x.is_finite() {
            return Err(self.fail("value must be finite"));
        }
        Ok(x)
    }
    fn positive(&self) -> Result<f64> {
        let x = self.f64()?;
        if x <= 0.0 {
            return Err(self.fail("value must be positive"));
        }
        Ok(x)
    }
    fn nonnegative(&self) -> Result<f64> {
        let x = self.f64()?;
        if x < 0.0 {
            return Err(self.fail("value must be nonnegative"));
        }
        Ok(x)
    }
    fn usize(&self) -> Result<usize> {
        self.text.parse().map_err(|_| self.fail(format!("expected a nonnegative integer, found {:?}", self.text)))
    }
    fn u64(&self) -> Result<u64> {
        self.text.parse().map_err(|_| self.fail(format!("expected a nonnegative integer, found {:?}", self.text)))
    }
    fn bool(&self) -> Result<bool> {
        match self.text {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.fail(format!("expected true or false, found {:?}", self.text))),
        }
    }
    fn path(&self) -> Result<PathBuf> {
        let t = self.text;
        let inner = if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') { &t[1..t.len() - 1] } else { t };
        if inner.is_empty() {
            return Err(self.fail("empty path"));
        }
        Ok(PathBuf::from(inner))
    }
}

/// 1-based character column of a byte offset.
fn column_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<(String, usize, usize)> = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let key_start = content.len() - content.trim_start().len();
        let eq = content.find('=').ok_or_else(|| err(line_no, column_of(raw, key_start), "expected `key = value`"))?;
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(err(line_no, column_of(raw, key_start), "missing key"));
        }
        let after = &content[eq + 1..];
        let value_text = after.trim();
        let value_start = eq + 1 + (after.len() - after.trim_start().len());
        if value_text.is_empty() {
            return Err(err(line_no, column_of(raw, eq) + 1, format!("missing value for `{key}`")));
        }
        if seen.iter().any(|(k, _, _)| k == key) {
            return Err(err(line_no, column_of(raw, key_start), format!("duplicate key `{key}`")));
        }
        let v = Value { text: value_text, line: line_no, column: column_of(raw, value_start) };
        match key {
            "n1" => cfg.n1 = v.usize()?,
            "n2" => cfg.n2 = v.usize()?,
            "n3" => cfg.n3 = v.usize()?,
            "fd_order" => {
                cfg.fd_order = FdOrder::from_usize(v.usize()?).ok_or_else(|| v.fail("fd_order must be 2 or 4"))?
            }
            "preset" => cfg.preset = v.text.parse().map_err(|m: String| v.fail(m))?,
            "amp" => cfg.amp = v.f64()?,
            "b0_amp" => cfg.b0_amp = v.f64()?,
            "seed" => cfg.seed = v.u64()?,
            "kappa" => cfg.kappa = v.nonnegative()?,
            "epsilon" => cfg.epsilon = v.nonnegative()?,
            "dt" => cfg.dt = v.positive()?,
            "t_final" => cfg.t_final = v.positive()?,
            "scheme" => {
                cfg.scheme = match v.text {
                    "rk4" => Scheme::Rk4,
                    "euler" => Scheme::Euler,
                    _ => return Err(v.fail("scheme must be rk4 or euler")),
                }
            }
            "mode" => {
                cfg.mode = match v.text {
                    "nonlinear" => Mode::Nonlinear,
                    "constructive" => Mode::Constructive,
                    _ => return Err(v.fail("mode must be nonlinear or constructive")),
                }
            }
            "taylor_monitor" => cfg.taylor_monitor = v.bool()?,
            "enforce_bands" => cfg.enforce_bands = v.bool()?,
            "dealias" => cfg.dealias = v.bool()?,
            "track_b" => cfg.track_b = v.bool()?,
            "wall_clock" => cfg.wall_clock = v.bool()?,
            "solver_tol" => cfg.solver_tol = v.positive()?,
            "solver_max_iter" => cfg.solver_max_iter = v.usize()?.max(1),
            "n_max" => cfg.n_max = v.usize()?.max(1),
            "iter_tol" => cfg.iter_tol = v.nonnegative()?,
            "patience" => cfg.patience = v.usize()?.max(1),
            "max_halvings" => cfg.max_halvings = v.usize()?,
            "series" => cfg.series = Some(v.path()?),
            "snapshot" => cfg.snapshot = Some(v.path()?),
            "snapshot_every" => cfg.snapshot_every = v.usize()?,
            "report" => cfg.report = Some(v.path()?),
            "lemma" => {
                cfg.lemma = if v.text == "all" { None } else { Some(v.text.parse().map_err(|m: String| v.fail(m))?) }
            }
            "samples" => cfg.samples = v.usize()?.max(1),
            "levels" => cfg.levels = v.usize()?,
            _ => return Err(err(line_no, column_of(raw, key_start), format!("unknown key `{key}`"))),
        }
        seen.push((key.to_string(), line_no, column_of(raw, key_start)));
    }
    // Cross-field errors point at the last line that set one of the keys involved.
    let at = |keys: &[&str]| {
        seen.iter().rev().find(|(k, _, _)| keys.contains(&k.as_str())).map(|&(_, l, c)| (l, c)).unwrap_or((1, 1))
    };
    if let Err(e) = cfg.grid() {
        let (l, c) = at(&["n1", "n2", "n3", "fd_order"]);
        return Err(err(l, c, e.to_string()));
    }
    if let Err(e) = cfg.steps() {
        let (l, c) = at(&["dt", "t_final"]);
        return Err(err(l, c, e.to_string()));
    }
    Ok(cfg)
}
