//! Parameter studies built from independent runs. Jobs of one study run on
//! separate threads; each owns its state, so results do not depend on
//! scheduling.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::config::{Mode, RunConfig};
use crate::diagnostics::{lemma_harness, LemmaCheck, LemmaId, LemmaSetup};
use crate::dynamics::{fixed_point_construct, fixed_point_with_halving, IterationState};
use crate::error::{Error, Result};
use crate::grid::{vector_volume_norm_sq, VectorField};
use crate::run::{initial_state, iteration_config, run, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    DtConvergence,
    KappaSweep,
    EpsSweep,
    Contraction,
}

impl StudyKind {
    pub const ALL: [StudyKind; 4] =
        [StudyKind::DtConvergence, StudyKind::KappaSweep, StudyKind::EpsSweep, StudyKind::Contraction];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::DtConvergence => "dt-convergence",
            StudyKind::KappaSweep => "kappa-sweep",
            StudyKind::EpsSweep => "eps-sweep",
            StudyKind::Contraction => "contraction",
        }
    }

    fn default_levels(self) -> usize {
        match self {
            StudyKind::DtConvergence => 3,
            StudyKind::KappaSweep => 5,
            StudyKind::EpsSweep => 4,
            StudyKind::Contraction => 2,
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StudyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown study {s:?}"))
    }
}

/// A study result as CSV text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub header: String,
    pub lines: Vec<String>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.clone();
        s.push('\n');
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn l2(a: &VectorField, b: &VectorField, s: usize) -> Result<f64> {
    Ok(vector_volume_norm_sq(&(a - b), s)?.sqrt())
}

/// `log₂` of successive ratios.
pub fn orders(diffs: &[f64]) -> Vec<f64> {
    diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Runs `f` on every item concurrently, preserving order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    std::thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|x| s.spawn(|| f(x))).collect();
        handles.into_iter().map(|h| h.join().expect("study job panicked")).collect()
    })
}

fn quiet(cfg: &RunConfig) -> RunConfig {
    RunConfig { series: None, snapshot: None, report: None, snapshot_every: 0, wall_clock: false, ..cfg.clone() }
}

fn run_all(cfgs: &[RunConfig]) -> Result<Vec<RunSummary>> {
    par_map(cfgs, |c| run(c).map_err(|f| f.error)).into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtConvergence {
    pub dts: Vec<f64>,
    /// `‖η_dt − η_{dt/2}‖₀` at the horizon, one per consecutive pair.
    pub eta_diff: Vec<f64>,
    pub v_diff: Vec<f64>,
    /// `‖b_direct − b₀·∇η‖₀` at the horizon, per level.
    pub frozen: Vec<f64>,
}

impl DtConvergence {
    pub fn eta_order(&self) -> Vec<f64> {
        orders(&self.eta_diff)
    }
    pub fn v_order(&self) -> Vec<f64> {
        orders(&self.v_diff)
    }
    pub fn frozen_order(&self) -> Vec<f64> {
        orders(&self.frozen)
    }

    pub fn report(&self) -> Report {
        let (eo, vo, fo) = (self.eta_order(), self.v_order(), self.frozen_order());
        let lines = (0..self.dts.len())
            .map(|i| {
                format!(
                    "{},{},{},{},{},{},{}",
                    cell(Some(self.dts[i])),
                    cell(self.eta_diff.get(i).copied()),
                    cell(eo.get(i).copied()),
                    cell(self.v_diff.get(i).copied()),
                    cell(vo.get(i).copied()),
                    cell(Some(self.frozen[i])),
                    cell(fo.get(i).copied()),
                )
            })
            .collect();
        Report { header: "dt,eta_diff,eta_order,v_diff,v_order,frozen_mismatch,frozen_order".into(), lines }
    }
}

/// Repeats the run at `dt, dt/2, …` and measures self-convergence and the
/// frozen-in mismatch of the directly integrated field.
pub fn dt_convergence(cfg: &RunConfig) -> Result<DtConvergence> {
    let levels = if cfg.levels == 0 { StudyKind::DtConvergence.default_levels() } else { cfg.levels };
    if levels < 2 {
        return Err(Error::InvalidParameter("dt-convergence needs at least 2 levels".into()));
    }
    let base = RunConfig { mode: Mode::Nonlinear, track_b: true, ..quiet(cfg) };
    let cfgs: Vec<RunConfig> =
        (0..levels).map(|i| RunConfig { dt: cfg.dt / f64::from(1u32 << i), ..base.clone() }).collect();
    let runs = run_all(&cfgs)?;
    let mut eta_diff = Vec::new();
    let mut v_diff = Vec::new();
    for w in runs.windows(2) {
        let (a, b) = (&w[0].final_state, &w[1].final_state);
        eta_diff.push(l2(a.eta.displacement(), b.eta.displacement(), 0)?);
        v_diff.push(l2(&a.v, &b.v, 0)?);
    }
    let frozen = runs.iter().map(|r| r.rows.last().map_or(0.0, |row| row.invariants.frozen_mismatch)).collect();
    Ok(DtConvergence { dts: cfgs.iter().map(|c| c.dt).collect(), eta_diff, v_diff, frozen })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: &'static str,
    pub params: Vec<f64>,
    /// `‖η_p − η_{p/2}‖₂` at the horizon for each consecutive pair.
    pub diffs: Vec<f64>,
}

impl Sweep {
    /// `diff_i / diff_{i+1}`.
    pub fn ratios(&self) -> Vec<f64> {
        self.diffs.windows(2).map(|w| w[0] / w[1]).collect()
    }

    pub fn monotone(&self) -> bool {
        self.diffs.windows(2).all(|w| w[1] < w[0])
    }

    pub fn report(&self) -> Report {
        let r = self.ratios();
        let lines = (0..self.diffs.len())
            .map(|i| {
                format!(
                    "{},{},{},{}",
                    cell(Some(self.params[i])),
                    cell(Some(self.params[i + 1])),
                    cell(Some(self.diffs[i])),
                    cell(r.get(i).copied())
                )
            })
            .collect();
        Report { header: format!("{0},{0}_half,eta_diff_h2,ratio", self.name), lines }
    }
}

fn sweep(
    cfg: &RunConfig,
    name: &'static str,
    levels: usize,
    first: f64,
    set: impl Fn(&RunConfig, f64) -> RunConfig,
) -> Result<Sweep> {
    if levels < 2 || !(first > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} sweep needs a positive start and 2 levels")));
    }
    let params: Vec<f64> = (0..levels).map(|i| first / f64::from(1u32 << i)).collect();
    let cfgs: Vec<RunConfig> = params.iter().map(|&p| set(&quiet(cfg), p)).collect();
    let runs = run_all(&cfgs)?;
    let diffs = runs
        .windows(2)
        .map(|w| l2(w[0].final_state.eta.displacement(), w[1].final_state.eta.displacement(), 2))
        .collect::<Result<_>>()?;
    Ok(Sweep { name, params, diffs })
}

/// Nonlinear runs at `κ, κ/2, …` starting from the configured `κ`.
pub fn kappa_sweep(cfg: &RunConfig) -> Result<Sweep> {
    let levels = if cfg.levels == 0 { StudyKind::KappaSweep.default_levels() } else { cfg.levels };
    sweep(cfg, "kappa", levels, cfg.kappa, |c, k| RunConfig { kappa: k, mode: Mode::Nonlinear, ..c.clone() })
}

/// Constructive runs at `ε, ε/2, …` starting from the configured `ε`.
pub fn eps_sweep(cfg: &RunConfig) -> Result<Sweep> {
    let levels = if cfg.levels == 0 { StudyKind::EpsSweep.default_levels() } else { cfg.levels };
    sweep(cfg, "epsilon", levels, cfg.epsilon, |c, e| RunConfig { epsilon: e, mode: Mode::Constructive, ..c.clone() })
}

/// One fixed-point construction of the contraction study.
#[derive(Debug)]
pub struct ContractionRun {
    pub requested: f64,
    /// Horizons tried, the last being the one that was accepted or failed.
    pub horizons: Vec<f64>,
    pub outcome: Result<IterationState>,
}

impl ContractionRun {
    /// True when the horizon had to be halved after a `NoContraction`.
    pub fn halved(&self) -> bool {
        self.horizons.len() > 1
    }
}

#[derive(Debug)]
pub struct Contraction {
    pub runs: Vec<ContractionRun>,
}

impl Contraction {
    pub fn report(&self) -> Report {
        let mut lines = Vec::new();
        for r in &self.runs {
            let last = r.horizons.last().copied().unwrap_or(r.requested);
            match &r.outcome {
                Ok(st) => {
                    let ratios = st.ratios();
                    for (i, psi) in st.psi_history.iter().enumerate() {
                        let ratio = if i == 0 { None } else { ratios.get(i - 1).copied() };
                        lines.push(format!(
                            "{},{},{},{},{},{},{}",
                            cell(Some(r.requested)),
                            cell(Some(last)),
                            r.horizons.len() - 1,
                            i + 1,
                            cell(Some(*psi)),
                            cell(ratio),
                            if st.converged { "converged" } else { "n_max" }
                        ));
                    }
                }
                Err(e) => lines.push(format!(
                    "{},{},{},,,,\"{}\"",
                    cell(Some(r.requested)),
                    cell(Some(last)),
                    r.horizons.len() - 1,
                    e.to_string().replace('"', "'")
                )),
            }
        }
        Report { header: "requested_t,horizon,halvings,n,psi,ratio,status".into(), lines }
    }
}

/// The construction at the configured horizon `T` and, with halving, at
/// `T·10^{level}` for each further level.
pub fn contraction(cfg: &RunConfig) -> Result<Contraction> {
    let levels = if cfg.levels == 0 { StudyKind::Contraction.default_levels() } else { cfg.levels };
    let (state, _) = initial_state(cfg)?;
    let base = iteration_config(cfg)?;
    let horizons: Vec<f64> = (0..levels).map(|i| cfg.t_final * 10f64.powi(i as i32)).collect();
    let runs = par_map(&horizons, |&t| {
        let c = crate::dynamics::IterationConfig { horizon: t, ..base };
        if t == cfg.t_final {
            ContractionRun { requested: t, horizons: vec![t], outcome: fixed_point_construct(&state.v, &state.b0, &c) }
        } else {
            match fixed_point_with_halving(&state.v, &state.b0, &c, cfg.max_halvings) {
                Ok((st, tried)) => ContractionRun { requested: t, horizons: tried, outcome: Ok(st) },
                Err(e) => ContractionRun { requested: t, horizons: vec![t], outcome: Err(e) },
            }
        }
    });
    Ok(Contraction { runs })
}

/// Runs the configured study and returns its report.
pub fn study(kind: StudyKind, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    Ok(match kind {
        StudyKind::DtConvergence => dt_convergence(cfg)?.report(),
        StudyKind::KappaSweep => kappa_sweep(cfg)?.report(),
        StudyKind::EpsSweep => eps_sweep(cfg)?.report(),
        StudyKind::Contraction => contraction(cfg)?.report(),
    })
}

/// The lemma harness on the configured grid, `κ`, seed and sample count.
pub fn lemma_checks(cfg: &RunConfig) -> Result<Vec<LemmaCheck>> {
    cfg.validate()?;
    let setup = LemmaSetup { grid: cfg.grid()?, kappa: cfg.kappa, samples: cfg.samples, seed: cfg.seed };
    let lemmas: Vec<LemmaId> = match cfg.lemma {
        Some(l) => vec![l],
        None => LemmaId::ALL.to_vec(),
    };
    par_map(&lemmas, |&l| lemma_harness(l, &setup)).into_iter().collect()
}

pub fn lemma_report(checks: &[LemmaCheck]) -> Report {
    let lines = checks.iter().map(|c| format!("{},{},{}", c.lemma.name(), c.samples, cell(Some(c.ratio)))).collect();
    Report { header: "lemma,samples,ratio".into(), lines }
}
