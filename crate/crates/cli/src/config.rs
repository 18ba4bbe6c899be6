//! Run configuration read from TOML, environment and command-line flags.
//!
//! Precedence, lowest first: built-in defaults, the config file, `QDSIM_*`
//! environment variables, command-line flags. Physical quantities carry
//! their unit in the key name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qdot_kmc::observables::G2Config;
use qdot_kmc::{CaptureStatistics, ObservableConfig, Polarization, PulseSchedule, RateParams, Scheme};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "QDSIM_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rates {
    pub gamma_r_per_ns: f64,
    pub gamma_nr_per_ns: f64,
    pub gamma_sf_per_ns: f64,
    pub purcell: f64,
}

impl Default for Rates {
    fn default() -> Self {
        let p = RateParams::default();
        Self {
            gamma_r_per_ns: p.gamma_r,
            gamma_nr_per_ns: p.gamma_nr,
            gamma_sf_per_ns: p.gamma_sf,
            purcell: p.purcell,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Nonresonant,
    Resonant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub period_ns: f64,
    pub cycles: u64,
    pub scheme: SchemeKind,
    /// Mean carriers of each type per above-band pulse.
    pub p_in: f64,
    pub polarization: Polarization,
    pub capture: CaptureStatistics,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            period_ns: 10.0,
            cycles: 1_000_000,
            scheme: SchemeKind::Nonresonant,
            p_in: 0.01,
            polarization: Polarization::UpDown,
            capture: CaptureStatistics::Paired,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dot {
    pub n_levels: u8,
}

impl Default for Dot {
    fn default() -> Self {
        Self { n_levels: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Observables {
    pub decay_bin_ns: f64,
    pub g2_bin_ns: f64,
    pub g2_max_lag_ns: f64,
    pub blinking: bool,
}

impl Default for Observables {
    fn default() -> Self {
        Self {
            decay_bin_ns: 0.05,
            g2_bin_ns: 1.0,
            g2_max_lag_ns: 100.0,
            blinking: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Run {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Default for Run {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rates: Rates,
    pub schedule: Schedule,
    pub dot: Dot,
    pub observables: Observables,
    pub run: Run,
}

/// Values given on the command line; `None` leaves the config untouched.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub cycles: Option<u64>,
}

const SECTIONS: [&str; 5] = ["rates", "schedule", "dot", "observables", "run"];

/// Parses an environment value as a TOML value, falling back to a bare string.
fn env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `QDSIM_<SECTION>_<KEY>` variables to a parsed config table.
pub fn apply_env<I>(table: &mut toml::Table, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = SECTIONS
            .iter()
            .find_map(|s| rest.strip_prefix(s).and_then(|k| k.strip_prefix('_')).map(|k| (*s, k)))
        else {
            bail!("{name}: no config section matches; expected {ENV_PREFIX}<SECTION>_<KEY>");
        };
        let entry = table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let Some(section_table) = entry.as_table_mut() else {
            bail!("{name}: `{section}` is not a table in the config file");
        };
        section_table.insert(key.to_string(), env_value(&raw));
    }
    Ok(())
}

impl RunConfig {
    /// Loads `path` (or defaults), then environment variables from `vars`.
    pub fn load<I>(path: Option<&Path>, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?,
            None => String::new(),
        };
        let origin = path.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
        // Parsing the text directly keeps line and column in the diagnostic.
        toml::from_str::<RunConfig>(&text).with_context(|| format!("invalid config {origin}"))?;
        let mut table: toml::Table =
            toml::from_str(&text).with_context(|| format!("invalid config {origin}"))?;
        apply_env(&mut table, vars)?;
        let config: RunConfig = table
            .try_into()
            .with_context(|| format!("invalid config after applying {ENV_PREFIX}* variables"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(out) = &o.out {
            self.run.out_dir = out.clone();
        }
        if let Some(workers) = o.workers {
            self.run.workers = workers;
        }
        if let Some(cycles) = o.cycles {
            self.schedule.cycles = cycles;
        }
        self.validate()
    }

    /// Checks every field against the simulation types, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        self.params().context("[rates]")?;
        self.schedule().context("[schedule]")?;
        if self.dot.n_levels == 0 {
            bail!("[dot] n_levels: must be >= 1");
        }
        self.observable_config().validate().context("[observables]")?;
        if self.run.workers == 0 {
            bail!("[run] workers: must be >= 1");
        }
        Ok(())
    }

    pub fn params(&self) -> Result<RateParams> {
        let r = &self.rates;
        RateParams::new(r.gamma_r_per_ns, r.gamma_nr_per_ns, r.gamma_sf_per_ns, r.purcell)
            .map_err(|e| anyhow::anyhow!(rename_field(e.to_string())))
    }

    pub fn scheme(&self) -> Scheme {
        match self.schedule.scheme {
            SchemeKind::Nonresonant => Scheme::NonResonant {
                p_in: self.schedule.p_in,
                capture: self.schedule.capture,
            },
            SchemeKind::Resonant => Scheme::Resonant {
                polarization: self.schedule.polarization,
            },
        }
    }

    pub fn schedule(&self) -> Result<PulseSchedule> {
        PulseSchedule::new(self.schedule.period_ns, self.schedule.cycles, self.scheme())
            .map_err(|e| anyhow::anyhow!(rename_field(e.to_string())))
    }

    pub fn observable_config(&self) -> ObservableConfig {
        let o = &self.observables;
        ObservableConfig {
            period_t: self.schedule.period_ns,
            decay_bin: o.decay_bin_ns,
            g2: Some(G2Config {
                bin: o.g2_bin_ns,
                max_lag: o.g2_max_lag_ns,
            }),
            blinking: o.blinking,
        }
    }
}

/// Maps library parameter names onto the config keys that set them.
fn rename_field(message: String) -> String {
    [
        ("`gamma_r`", "`gamma_r_per_ns`"),
        ("`gamma_nr`", "`gamma_nr_per_ns`"),
        ("`gamma_sf`", "`gamma_sf_per_ns`"),
        ("`period_t`", "`period_ns`"),
        ("`n_cycles`", "`cycles`"),
        ("`decay_bin`", "`decay_bin_ns`"),
        ("`g2_bin`", "`g2_bin_ns`"),
        ("`g2_max_lag`", "`g2_max_lag_ns`"),
    ]
    .iter()
    .fold(message, |m, (from, to)| m.replace(from, to))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, vars: &[(&str, &str)]) -> Result<RunConfig> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        let vars = vars.iter().map(|(k, v)| (k.to_string(), v.to_string()));
        RunConfig::load(Some(&path), vars)
    }

    #[test]
    fn defaults_are_the_baseline() {
        let c = RunConfig::load(None, Vec::new()).unwrap();
        assert_eq!(c.params().unwrap(), RateParams::default());
        assert_eq!(c.schedule.period_ns, 10.0);
        assert_eq!(c.dot.n_levels, 2);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = load("[rates]\ngamma_r_per_ns = 1.0\ngamma_nr = 0.1\n", &[]).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("gamma_nr"), "{msg}");
    }

    #[test]
    fn negative_rate_names_the_key() {
        let err = load("[rates]\ngamma_nr_per_ns = -0.1\n", &[]).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("gamma_nr_per_ns"), "{msg}");
    }

    #[test]
    fn environment_overrides_file_and_flags_override_environment() {
        let mut c = load(
            "[rates]\ngamma_nr_per_ns = 0.2\n[schedule]\nscheme = \"resonant\"\n",
            &[
                ("QDSIM_RATES_GAMMA_NR_PER_NS", "0.05"),
                ("QDSIM_RUN_SEED", "9"),
                ("QDSIM_SCHEDULE_CAPTURE", "independent"),
                ("OTHER", "x"),
            ],
        )
        .unwrap();
        assert_eq!(c.rates.gamma_nr_per_ns, 0.05);
        assert_eq!(c.run.seed, 9);
        assert_eq!(c.schedule.capture, CaptureStatistics::Independent);
        assert_eq!(c.scheme(), Scheme::resonant());
        c.apply(&Overrides {
            seed: Some(3),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(c.run.seed, 3);
    }

    #[test]
    fn unknown_environment_section_is_rejected() {
        assert!(load("", &[("QDSIM_COLOUR", "red")]).is_err());
        assert!(load("", &[("QDSIM_RATES_GAMMA", "1")]).is_err());
    }
}
