//! Self-checks of the stochastic solver against exact references.
//!
//! Three suites: Monte-Carlo emission probabilities against the exact Markov
//! chain on a one-level dot, the closed-form bright/dark populations against a
//! fourth-order Runge-Kutta integration, and the reported standard errors
//! against the spread of repeated runs.

use serde::Serialize;

use crate::error::Result;
use crate::excitation::Scheme;
use crate::kinetics::{ExcitonClass, RateParams};
use crate::reference::{analytic_bright_dark, ctmc_emission_probability};
use crate::sweep::{run_sweep, Axis, GridSpec, SweepOptions};

#[derive(Clone, Debug)]
pub struct ValidationConfig {
    pub cycles: u64,
    pub seed: u64,
    pub workers: usize,
    pub repeats: u32,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            cycles: 100_000,
            seed: 0,
            workers: 1,
            repeats: 20,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub scheme: &'static str,
    pub gamma_nr: f64,
    pub gamma_sf: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    pub exact: f64,
    /// |MC − exact| in units of the standard error.
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticCheck {
    pub t: f64,
    pub closed_form: (f64, f64),
    pub integrated: (f64, f64),
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationCheck {
    pub repeats: u32,
    pub mean: f64,
    /// Sample standard deviation of the repeated estimates.
    pub spread: f64,
    pub mean_stderr: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub oracle: Vec<OracleCheck>,
    pub analytic: Vec<AnalyticCheck>,
    pub calibration: CalibrationCheck,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.oracle.iter().all(|c| c.pass)
            && self.analytic.iter().all(|c| c.pass)
            && self.calibration.pass
    }
}

pub const ORACLE_GAMMA_NR: [f64; 3] = [0.01, 0.1, 1.0];
pub const ORACLE_GAMMA_SF: [f64; 3] = [0.001, 0.01, 0.1];

/// Monte-Carlo exciton output on a one-level dot against the exact chain.
pub fn oracle_suite(config: &ValidationConfig) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    for scheme in [Scheme::resonant(), Scheme::nonresonant(0.1)] {
        let spec = GridSpec::new(scheme)
            .with_levels(1)
            .with_cycles(config.cycles)
            .with_seed(config.seed)
            .with_axis(Axis::GammaNr, ORACLE_GAMMA_NR.to_vec())
            .with_axis(Axis::GammaSf, ORACLE_GAMMA_SF.to_vec());
        let options = SweepOptions {
            workers: config.workers,
            ..SweepOptions::default()
        };
        for p in run_sweep(&spec, &options)?.points {
            let exact = ctmc_emission_probability(&p.point.params, &scheme, 1, p.point.period_t)?
                .get(ExcitonClass::X);
            let mc = p.p_out(ExcitonClass::X);
            let se = p.stderr(ExcitonClass::X);
            let z = if se > 0.0 {
                (mc - exact).abs() / se
            } else if mc == exact {
                0.0
            } else {
                f64::INFINITY
            };
            out.push(OracleCheck {
                scheme: scheme.label(),
                gamma_nr: p.point.params.gamma_nr,
                gamma_sf: p.point.params.gamma_sf,
                monte_carlo: mc,
                stderr: se,
                exact,
                z,
                pass: z <= 3.0,
            });
        }
    }
    Ok(out)
}

/// Classic fourth-order Runge-Kutta for the bright/dark pair.
pub fn integrate_bright_dark(params: &RateParams, t_end: f64, steps: usize) -> (f64, f64) {
    let a = params.gamma_r * params.purcell + 2.0 * params.gamma_nr + 2.0 * params.gamma_sf;
    let d = 2.0 * params.gamma_nr + 2.0 * params.gamma_sf;
    let c = 2.0 * params.gamma_sf;
    let f = |b: f64, k: f64| (-a * b + c * k, c * b - d * k);
    let h = t_end / steps as f64;
    let (mut b, mut k) = (1.0, 0.0);
    for _ in 0..steps {
        let k1 = f(b, k);
        let k2 = f(b + 0.5 * h * k1.0, k + 0.5 * h * k1.1);
        let k3 = f(b + 0.5 * h * k2.0, k + 0.5 * h * k2.1);
        let k4 = f(b + h * k3.0, k + h * k3.1);
        b += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        k += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (b, k)
}

pub fn analytic_suite(params: &RateParams) -> Result<Vec<AnalyticCheck>> {
    [1.0, 5.0, 10.0]
        .into_iter()
        .map(|t| {
            let closed = analytic_bright_dark(params, t)?;
            let integrated = integrate_bright_dark(params, t, 20_000);
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
            let rel_err = rel(closed.0, integrated.0).max(if integrated.1 > 0.0 {
                rel(closed.1, integrated.1)
            } else {
                (closed.1 - integrated.1).abs()
            });
            Ok(AnalyticCheck {
                t,
                closed_form: closed,
                integrated,
                rel_err,
                pass: rel_err < 1e-9,
            })
        })
        .collect()
}

/// Repeats the baseline resonant point with `repeats` seeds and compares the
/// spread of the estimates with the mean reported standard error.
pub fn calibration_suite(config: &ValidationConfig) -> Result<CalibrationCheck> {
    let options = SweepOptions {
        workers: config.workers,
        ..SweepOptions::default()
    };
    let mut estimates = Vec::new();
    let mut errors = Vec::new();
    for r in 0..u64::from(config.repeats) {
        let spec = GridSpec::new(Scheme::resonant())
            .with_cycles(config.cycles)
            .with_seed(config.seed.wrapping_add(1 + r));
        let p = run_sweep(&spec, &options)?.points[0];
        estimates.push(p.p_out(ExcitonClass::X));
        errors.push(p.stderr(ExcitonClass::X));
    }
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let spread = (estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mean_stderr = errors.iter().sum::<f64>() / n;
    let ratio = spread / mean_stderr;
    Ok(CalibrationCheck {
        repeats: config.repeats,
        mean,
        spread,
        mean_stderr,
        ratio,
        pass: (1.0 / 1.5..=1.5).contains(&ratio),
    })
}

pub fn run_validation(config: &ValidationConfig) -> Result<ValidationReport> {
    Ok(ValidationReport {
        oracle: oracle_suite(config)?,
        analytic: analytic_suite(&RateParams::default())?,
        calibration: calibration_suite(config)?,
    })
}
