use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::crossing::{contradiction_chain, detect_crossing, ChainVerdict, CrossingReport};
use super::initial::initial_field;
use super::monitors::{lipschitz_norm, lipschitz_norm_spectral, modulus_monitor, MonitorSettings};
use super::stepper::{StepDiagnostics, Stepper};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::write_snapshot;
use crate::kernel::{InterfaceField, MuskatOperator};
use crate::modulus::Modulus;

/// Slack allowed on the maximum principles.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-6;
/// Relative growth of the Lipschitz norm tolerated above `L`.
pub const LIPSCHITZ_SLACK: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub step: u64,
    pub t: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub lipschitz: f64,
    pub lipschitz_spectral: f64,
    pub min_deficit: f64,
    /// Lower bound on the deficit of pairs beyond the scanned radius.
    pub far_bound: f64,
    /// Budget and slope ratio of the step that produced this state.
    pub max_budget: f64,
    pub max_slope_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MonitorLog {
    pub records: Vec<MonitorRecord>,
    pub crossings: Vec<CrossingReport>,
}

fn nonincreasing(values: impl Iterator<Item = f64>, slack: f64) -> bool {
    let mut prev = f64::INFINITY;
    for v in values {
        if v > prev + slack {
            return false;
        }
        prev = v;
    }
    true
}

impl MonitorLog {
    pub fn sup_norm_nonincreasing(&self, slack: f64) -> bool {
        nonincreasing(self.records.iter().map(|r| r.sup_norm), slack)
    }

    pub fn l2_norm_nonincreasing(&self, slack: f64) -> bool {
        nonincreasing(self.records.iter().map(|r| r.l2_norm), slack)
    }

    pub fn lipschitz_max(&self) -> f64 {
        self.records.iter().map(|r| r.lipschitz).fold(0.0, f64::max)
    }

    pub fn min_deficit(&self) -> f64 {
        self.records.iter().map(|r| r.min_deficit).fold(f64::INFINITY, f64::min)
    }
}

/// `true` iff `max |f|` never increases by more than the slack.
pub fn sup_norm_monitor(log: &MonitorLog) -> bool {
    log.sup_norm_nonincreasing(MAX_PRINCIPLE_SLACK)
}

/// First crossing recorded in the log.
pub fn breakthrough_detect(log: &MonitorLog) -> Option<&CrossingReport> {
    log.crossings.first()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunState {
    pub field: InterfaceField,
    pub modulus: Modulus,
    pub step_count: u64,
    pub dt: f64,
    pub monitors: MonitorLog,
}

/// One RK4 step of `state`.
pub fn step(mut state: RunState, stepper: &Stepper) -> Result<RunState> {
    let (next, _) = stepper.step(&state.field, state.step_count)?;
    state.field = next;
    state.step_count += 1;
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Clean,
    BlowUp,
    MonitorFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Clean => 0,
            Self::BlowUp => 2,
            Self::MonitorFailure => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorSummary {
    pub sup_norm_nonincreasing: bool,
    pub l2_norm_nonincreasing: bool,
    pub lipschitz_initial: f64,
    pub lipschitz_max: f64,
    /// Checked only when the initial data satisfy `f in [0, 1]` and
    /// `lipschitz <= L`.
    pub lipschitz_within_budget: Option<bool>,
    pub min_deficit: f64,
    pub modulus_positive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub config_echo: String,
    pub config: RunConfig,
    pub status: RunStatus,
    pub exit_code: i32,
    pub strength: f64,
    pub dt: f64,
    pub stability_bound: f64,
    pub start_step: u64,
    pub final_step: u64,
    pub final_time: f64,
    pub checkpoints: usize,
    pub monitors: MonitorSummary,
    pub failures: Vec<String>,
    pub crossing: Option<CrossingReport>,
    pub chain: Option<ChainVerdict>,
    pub chain_error: Option<String>,
    pub blowup: Option<String>,
}

/// What a checkpoint produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub record: MonitorRecord,
    pub crossing: Option<CrossingReport>,
}

/// A run in progress: stepper, state and monitor bookkeeping.
#[derive(Clone, Debug)]
pub struct Simulation {
    config: RunConfig,
    stepper: Stepper,
    state: RunState,
    settings: MonitorSettings,
    start_step: u64,
    total_steps: u64,
    last_diag: StepDiagnostics,
    initial_in_hypotheses: bool,
    chain: Option<std::result::Result<ChainVerdict, String>>,
    blowup: Option<String>,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let field = initial_field(config)?;
        Self::from_field(config, field)
    }

    /// Continues from a snapshot; the step counter is `round(t / dt)`.
    pub fn from_field(config: &RunConfig, field: InterfaceField) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        if field.grid != grid {
            return Err(Error::Configuration(format!(
                "snapshot grid (n = {}, P = {}) does not match the config (n = {}, P = {})",
                field.grid.n(),
                field.grid.period(),
                grid.n(),
                grid.period()
            )));
        }
        let op = MuskatOperator::new(grid, config.quadrature_spec()?)?;
        let stepper = Stepper::from_factor(op, config.dt_factor)?.with_budget_cap(config.quadrature.budget_cap);
        let dt = stepper.dt();
        let start_step = (field.time / dt).round() as u64;
        let total_steps = config
            .steps
            .map(|s| s as u64)
            .unwrap_or_else(|| (config.horizon / dt - 1e-9).ceil().max(0.0) as u64);
        let modulus = Modulus::new(config.l)?;
        let initial_in_hypotheses = field.min() >= 0.0 && field.max() <= 1.0 && lipschitz_norm(&field) <= config.l;
        let settings = MonitorSettings {
            scan: config.monitors.scan,
            radius_cap: config.monitors.radius_cap,
            random_pairs: config.monitors.random_pairs,
            seed: config.seed,
        };
        Ok(Self {
            config: config.clone(),
            stepper,
            state: RunState {
                field,
                modulus,
                step_count: start_step,
                dt,
                monitors: MonitorLog::default(),
            },
            settings,
            start_step,
            total_steps,
            last_diag: StepDiagnostics {
                max_budget: 0.0,
                max_slope_ratio: 0.0,
            },
            initial_in_hypotheses,
            chain: None,
            blowup: None,
        })
    }

    /// Fault-injection hook; see [`Stepper::with_rhs_sign`].
    pub fn with_rhs_sign(mut self, sign: f64) -> Self {
        self.stepper = self.stepper.with_rhs_sign(sign);
        self
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    /// Overwrites the field values in place, keeping the current time.
    pub fn replace_values(&mut self, values: Vec<f64>) -> Result<()> {
        let f = &self.state.field;
        self.state.field = InterfaceField::new(f.grid, values, f.time)?;
        Ok(())
    }

    pub fn advance(&mut self) -> Result<StepDiagnostics> {
        let (next, diag) = self.stepper.step(&self.state.field, self.state.step_count)?;
        self.state.field = next;
        self.state.step_count += 1;
        self.last_diag = diag;
        Ok(diag)
    }

    /// Records monitors for the current state and looks for a crossing. A
    /// crossing also triggers the bound chain.
    pub fn checkpoint(&mut self) -> Result<Checkpoint> {
        let field = &self.state.field;
        let m = &self.state.modulus;
        let j = m.j(field.time)?;
        let check = modulus_monitor(field, j, m, &self.settings);
        let record = MonitorRecord {
            step: self.state.step_count,
            t: field.time,
            sup_norm: field.sup_norm(),
            l2_norm: field.l2_norm(),
            lipschitz: lipschitz_norm(field),
            lipschitz_spectral: lipschitz_norm_spectral(field),
            min_deficit: check.min_deficit,
            far_bound: check.far_bound,
            max_budget: self.last_diag.max_budget,
            max_slope_ratio: self.last_diag.max_slope_ratio,
        };
        let crossing = detect_crossing(field, m, &check, self.state.step_count);
        if let Some(report) = &crossing {
            if self.chain.is_none() {
                let verdict = self
                    .stepper
                    .operator()
                    .evaluate(field, None)
                    .and_then(|rates| contradiction_chain(report, field, &rates, m));
                self.chain = Some(verdict.map_err(|e| e.to_string()));
            }
            self.state.monitors.crossings.push(report.clone());
        }
        self.state.monitors.records.push(record.clone());
        Ok(Checkpoint { record, crossing })
    }

    fn is_checkpoint(&self, step: u64) -> bool {
        step.is_multiple_of(self.config.checkpoint_every as u64) || step == self.total_steps
    }

    /// Steps to the end, calling `on_checkpoint` after every checkpoint
    /// past the start. Stops early at a crossing or a blow-up.
    pub fn run<F>(&mut self, mut on_checkpoint: F) -> Result<RunStatus>
    where
        F: FnMut(&Checkpoint, &InterfaceField) -> Result<()>,
    {
        if self.checkpoint()?.crossing.is_some() {
            return Ok(self.status());
        }
        while self.state.step_count < self.total_steps {
            match self.advance() {
                Ok(_) => {}
                Err(Error::NonFinite(msg)) => {
                    self.blowup = Some(msg);
                    return Ok(RunStatus::BlowUp);
                }
                Err(e) => return Err(e),
            }
            if self.is_checkpoint(self.state.step_count) {
                let cp = self.checkpoint()?;
                on_checkpoint(&cp, &self.state.field)?;
                if cp.crossing.is_some() {
                    break;
                }
            }
        }
        Ok(self.status())
    }

    fn failures(&self) -> Vec<String> {
        let log = &self.state.monitors;
        let mut out = Vec::new();
        if !log.sup_norm_nonincreasing(MAX_PRINCIPLE_SLACK) {
            out.push("sup norm increased".to_string());
        }
        if !log.l2_norm_nonincreasing(MAX_PRINCIPLE_SLACK) {
            out.push("L2 norm increased".to_string());
        }
        if !(log.min_deficit() > 0.0) {
            out.push(format!("modulus deficit reached {:.3e}", log.min_deficit()));
        }
        if let Some(c) = log.crossings.first() {
            out.push(format!("crossing detected at t = {} between {:?} and {:?}", c.t0, c.x0, c.y0));
        }
        if self.initial_in_hypotheses && log.lipschitz_max() > self.config.l * (1.0 + LIPSCHITZ_SLACK) {
            out.push(format!("Lipschitz norm grew to {}", log.lipschitz_max()));
        }
        out
    }

    pub fn status(&self) -> RunStatus {
        if self.blowup.is_some() {
            RunStatus::BlowUp
        } else if self.config.monitors.assert && !self.failures().is_empty() {
            RunStatus::MonitorFailure
        } else {
            RunStatus::Clean
        }
    }

    pub fn summary(&self) -> RunSummary {
        let log = &self.state.monitors;
        let status = self.status();
        let lip_max = log.lipschitz_max();
        let (chain, chain_error) = match &self.chain {
            Some(Ok(v)) => (Some(v.clone()), None),
            Some(Err(e)) => (None, Some(e.clone())),
            None => (None, None),
        };
        RunSummary {
            config_echo: self.config.to_text(),
            config: self.config.clone(),
            status,
            exit_code: status.exit_code(),
            strength: self.stepper.strength(),
            dt: self.stepper.dt(),
            stability_bound: self.stepper.stability_bound(),
            start_step: self.start_step,
            final_step: self.state.step_count,
            final_time: self.state.field.time,
            checkpoints: log.records.len(),
            monitors: MonitorSummary {
                sup_norm_nonincreasing: log.sup_norm_nonincreasing(MAX_PRINCIPLE_SLACK),
                l2_norm_nonincreasing: log.l2_norm_nonincreasing(MAX_PRINCIPLE_SLACK),
                lipschitz_initial: log.records.first().map_or(f64::NAN, |r| r.lipschitz),
                lipschitz_max: lip_max,
                lipschitz_within_budget: self
                    .initial_in_hypotheses
                    .then_some(lip_max <= self.config.l * (1.0 + LIPSCHITZ_SLACK)),
                min_deficit: log.min_deficit(),
                modulus_positive: log.min_deficit() > 0.0,
            },
            failures: self.failures(),
            crossing: log.crossings.first().cloned(),
            chain,
            chain_error,
            blowup: self.blowup.clone(),
        }
    }
}

/// Files written by [`run_to_dir`].
pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FINAL_SNAPSHOT: &str = "final.musk";

pub fn snapshot_name(step: u64) -> String {
    format!("snapshot_{step:08}.musk")
}

fn run_inner(config: &RunConfig, resume: Option<&Path>) -> Result<RunSummary> {
    let dir: PathBuf = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let mut sim = match resume {
        Some(path) => Simulation::from_field(config, crate::io::read_snapshot(path)?)?,
        None => Simulation::new(config)?,
    };
    let mut csv = BufWriter::new(fs::File::create(dir.join(SERIES_FILE))?);
    writeln!(csv, "t,sup_norm,l2_norm,lipschitz,min_deficit")?;
    let snapshots = config.monitors.snapshots;
    sim.run(|cp, field| {
        let r = &cp.record;
        writeln!(csv, "{},{},{},{},{}", r.t, r.sup_norm, r.l2_norm, r.lipschitz, r.min_deficit)?;
        if snapshots {
            write_snapshot(&dir.join(snapshot_name(r.step)), field)?;
        }
        Ok(())
    })?;
    csv.flush()?;
    write_snapshot(&dir.join(FINAL_SNAPSHOT), &sim.state().field)?;
    let summary = sim.summary();
    fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Runs `config` (optionally from a snapshot) and writes the time series,
/// snapshots and JSON summary into `config.output_dir`. Deterministic runs
/// execute on a single worker thread.
pub fn run_to_dir(config: &RunConfig, resume: Option<&Path>) -> Result<RunSummary> {
    if config.deterministic && rayon::current_num_threads() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::Configuration(e.to_string()))?;
        pool.install(|| run_inner(config, resume))
    } else {
        run_inner(config, resume)
    }
}
