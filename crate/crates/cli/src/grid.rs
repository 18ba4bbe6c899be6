//! Sweep grid files.
//!
//! ```toml
//! batches = 50
//!
//! [[axis]]
//! name = "gamma_nr_per_ns"
//! log = { from = 0.001, to = 10.0, points = 12 }
//!
//! [[axis]]
//! name = "gamma_sf_per_ns"
//! values = [0.001, 0.01]
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use qdot_kmc::sweep::{linspace, logspace, Axis, GridSpec};
use serde::Deserialize;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisEntry {
    pub name: String,
    pub values: Option<Vec<f64>>,
    pub log: Option<Range>,
    pub lin: Option<Range>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub batches: Option<u32>,
    pub burn_in_cycles: Option<u64>,
    #[serde(default)]
    pub axis: Vec<AxisEntry>,
}

fn axis_named(name: &str) -> Result<Axis> {
    Ok(match name {
        "gamma_nr_per_ns" => Axis::GammaNr,
        "gamma_sf_per_ns" => Axis::GammaSf,
        "purcell" => Axis::Purcell,
        "period_ns" => Axis::PeriodT,
        "p_in" => Axis::PIn,
        other => bail!(
            "unknown axis `{other}`; expected gamma_nr_per_ns, gamma_sf_per_ns, purcell, period_ns or p_in"
        ),
    })
}

impl AxisEntry {
    fn values(&self) -> Result<Vec<f64>> {
        match (&self.values, self.log, self.lin) {
            (Some(v), None, None) => Ok(v.clone()),
            (None, Some(r), None) => Ok(logspace(r.from, r.to, r.points)),
            (None, None, Some(r)) => Ok(linspace(r.from, r.to, r.points)),
            _ => bail!("axis `{}`: give exactly one of values, log or lin", self.name),
        }
    }
}

impl GridFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading grid {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid grid {}", path.display()))
    }

    /// Combines the grid with the run config that supplies every fixed value.
    pub fn spec(&self, config: &RunConfig) -> Result<GridSpec> {
        let mut spec = GridSpec::new(config.scheme())
            .with_base(config.params()?)
            .with_period(config.schedule.period_ns)
            .with_levels(config.dot.n_levels)
            .with_cycles(config.schedule.cycles)
            .with_seed(config.run.seed);
        if let Some(b) = self.batches {
            spec.batches = b;
        }
        if let Some(b) = self.burn_in_cycles {
            spec.burn_in_cycles = b;
        }
        for entry in &self.axis {
            spec = spec.with_axis(axis_named(&entry.name)?, entry.values()?);
        }
        spec.validate()?;
        Ok(spec)
    }
}
