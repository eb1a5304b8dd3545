//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, unknown keys are errors.
//! [`RunConfig::to_text`] produces a canonical form that parses back to an
//! identical value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::PairScan;
use crate::error::{Error, Result};
use crate::kernel::{Interpolation, PeriodicGrid, QuadratureSpec, TailMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Mode,
    RandomLipschitz,
    FixtureCrossing,
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mode" => Ok(Self::Mode),
            "random-lipschitz" => Ok(Self::RandomLipschitz),
            "fixture-crossing" => Ok(Self::FixtureCrossing),
            other => Err(format!(
                "unknown initial.kind `{other}` (expected mode, random-lipschitz or fixture-crossing)"
            )),
        }
    }
}

impl std::fmt::Display for InitialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mode => "mode",
            Self::RandomLipschitz => "random-lipschitz",
            Self::FixtureCrossing => "fixture-crossing",
        })
    }
}

/// Quadrature keys; `None` means "derive from the grid".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rho0: Option<f64>,
    pub outer_radius: Option<f64>,
    pub rings: usize,
    pub sectors: usize,
    pub interpolation: Interpolation,
    pub tail: TailMode,
    pub budget_cap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorConfig {
    pub scan: PairScan,
    pub radius_cap: f64,
    pub random_pairs: usize,
    /// Turn monitor failures into exit code 3.
    pub assert: bool,
    /// Write a snapshot at every checkpoint, not only at the end.
    pub snapshots: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub period: f64,
    pub l: f64,
    pub dt_factor: f64,
    /// Final time; ignored when `steps` is set.
    pub horizon: f64,
    pub steps: Option<usize>,
    pub checkpoint_every: usize,
    pub seed: u64,
    pub deterministic: bool,
    pub output_dir: PathBuf,
    pub quadrature: QuadratureConfig,
    pub monitors: MonitorConfig,
    pub initial_kind: InitialKind,
    pub initial_params: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 64,
            period: 128.0 * std::f64::consts::PI,
            l: 2.0,
            dt_factor: 0.25,
            horizon: 50.0,
            steps: None,
            checkpoint_every: 10,
            seed: 0,
            deterministic: true,
            output_dir: PathBuf::from("run"),
            quadrature: QuadratureConfig {
                rho0: None,
                outer_radius: None,
                rings: 24,
                sectors: 16,
                interpolation: Interpolation::Bicubic,
                tail: TailMode::Spectral,
                budget_cap: None,
            },
            monitors: MonitorConfig {
                scan: PairScan::Auto,
                radius_cap: f64::INFINITY,
                random_pairs: 1_000_000,
                assert: true,
                snapshots: true,
            },
            initial_kind: InitialKind::Mode,
            initial_params: BTreeMap::new(),
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Config {
        line,
        message: format!("bad value `{value}` for `{key}`: {e}"),
    })
}

fn parse_optional<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if value == "auto" {
        Ok(None)
    } else {
        parse_value(line, key, value).map(Some)
    }
}

fn parse_params(line: usize, value: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("initial.params entry `{item}` is not `name=value`"),
        })?;
        let k = k.trim();
        out.insert(k.to_string(), parse_value(line, k, v.trim())?);
    }
    Ok(out)
}

fn optional<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => c.n = parse_value(line, key, value)?,
                "period" => c.period = parse_value(line, key, value)?,
                "L" => c.l = parse_value(line, key, value)?,
                "dt_factor" => c.dt_factor = parse_value(line, key, value)?,
                "horizon" => c.horizon = parse_value(line, key, value)?,
                "steps" => c.steps = parse_optional(line, key, value)?,
                "checkpoint_every" => c.checkpoint_every = parse_value(line, key, value)?,
                "seed" => c.seed = parse_value(line, key, value)?,
                "deterministic" => c.deterministic = parse_value(line, key, value)?,
                "output_dir" => c.output_dir = PathBuf::from(value),
                "quadrature.rho0" => c.quadrature.rho0 = parse_optional(line, key, value)?,
                "quadrature.outer_radius" => c.quadrature.outer_radius = parse_optional(line, key, value)?,
                "quadrature.rings" => c.quadrature.rings = parse_value(line, key, value)?,
                "quadrature.sectors" => c.quadrature.sectors = parse_value(line, key, value)?,
                "quadrature.interpolation" => c.quadrature.interpolation = parse_value(line, key, value)?,
                "quadrature.tail" => c.quadrature.tail = parse_value(line, key, value)?,
                "quadrature.budget_cap" => c.quadrature.budget_cap = parse_optional(line, key, value)?,
                "monitors.scan" => c.monitors.scan = parse_value(line, key, value)?,
                "monitors.radius_cap" => c.monitors.radius_cap = parse_value(line, key, value)?,
                "monitors.random_pairs" => c.monitors.random_pairs = parse_value(line, key, value)?,
                "monitors.assert" => c.monitors.assert = parse_value(line, key, value)?,
                "monitors.snapshots" => c.monitors.snapshots = parse_value(line, key, value)?,
                "initial.kind" => c.initial_kind = parse_value(line, key, value)?,
                "initial.params" => c.initial_params = parse_params(line, value)?,
                other => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text form; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let q = &self.quadrature;
        let m = &self.monitors;
        let params: Vec<String> = self.initial_params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("n", self.n.to_string());
        put("period", self.period.to_string());
        put("L", self.l.to_string());
        put("dt_factor", self.dt_factor.to_string());
        put("horizon", self.horizon.to_string());
        put("steps", optional(&self.steps));
        put("checkpoint_every", self.checkpoint_every.to_string());
        put("seed", self.seed.to_string());
        put("deterministic", self.deterministic.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("quadrature.rho0", optional(&q.rho0));
        put("quadrature.outer_radius", optional(&q.outer_radius));
        put("quadrature.rings", q.rings.to_string());
        put("quadrature.sectors", q.sectors.to_string());
        put("quadrature.interpolation", q.interpolation.to_string());
        put("quadrature.tail", q.tail.to_string());
        put("quadrature.budget_cap", optional(&q.budget_cap));
        put("monitors.scan", m.scan.to_string());
        put("monitors.radius_cap", m.radius_cap.to_string());
        put("monitors.random_pairs", m.random_pairs.to_string());
        put("monitors.assert", m.assert.to_string());
        put("monitors.snapshots", m.snapshots.to_string());
        put("initial.kind", self.initial_kind.to_string());
        put("initial.params", params.join(", "));
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::Config { line: 0, message };
        self.grid()?;
        crate::modulus::nu_of(self.l)?;
        if !(self.dt_factor > 0.0 && self.dt_factor.is_finite()) {
            return Err(bad(format!("dt_factor must be positive, got {}", self.dt_factor)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(bad(format!("horizon must be finite and >= 0, got {}", self.horizon)));
        }
        if self.checkpoint_every == 0 {
            return Err(bad("checkpoint_every must be >= 1".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(bad("output_dir must not be empty".into()));
        }
        if !(self.monitors.radius_cap > 0.0) {
            return Err(bad(format!("monitors.radius_cap must be positive, got {}", self.monitors.radius_cap)));
        }
        self.quadrature_spec()?.validate(&self.grid()?)
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.period, self.n)
    }

    pub fn quadrature_spec(&self) -> Result<QuadratureSpec> {
        let grid = self.grid()?;
        let base = QuadratureSpec::for_grid(&grid);
        let q = &self.quadrature;
        Ok(QuadratureSpec {
            rho0: q.rho0.unwrap_or(base.rho0),
            outer_radius: q.outer_radius.unwrap_or(base.outer_radius),
            rings: q.rings,
            sectors: q.sectors,
            interpolation: q.interpolation,
            tail: q.tail,
        })
    }

    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.initial_params.get(name).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_echo_roundtrips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn parses_comments_and_params() {
        let text = "# demo\nn = 32 # grid\nperiod = 20\nL = 2\ninitial.kind = mode\ninitial.params = k1=2, amplitude=0.05\nquadrature.rho0 = 0.01\nsteps = 100\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.n, 32);
        assert_eq!(c.steps, Some(100));
        assert_eq!(c.param("k1", 1.0), 2.0);
        assert_eq!(c.param("k2", 0.0), 0.0);
        assert_eq!(c.quadrature.rho0, Some(0.01));
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match RunConfig::parse("n = 64\nbogus = 1\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::parse("n = 48\n").is_err());
        assert!(RunConfig::parse("L = 0.5\n").is_err());
        assert!(RunConfig::parse("initial.kind = wave\n").is_err());
    }
}
