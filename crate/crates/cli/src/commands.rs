use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qdot_kmc::observables::G2Normalization;
use qdot_kmc::reference::{fit_exponentials, low_power_decay_curve, ExpFit, FitOrder};
use qdot_kmc::sweep::{logspace, run_sweep, saturation_scan, GridSpec, SweepOptions};
use qdot_kmc::validation::{run_validation, ValidationConfig};
use qdot_kmc::{run_trajectory, AccumulatorSet, ExcitonClass, ObservableConfig, Scheme};
use serde::Serialize;

use crate::config::{Overrides, RunConfig};
use crate::grid::GridFile;
use crate::output::OutDir;

fn simulate(config: &RunConfig, observables: ObservableConfig) -> Result<AccumulatorSet> {
    Ok(run_trajectory(
        config.params()?,
        &config.schedule()?,
        config.dot.n_levels,
        config.run.seed,
        observables,
    )?)
}

#[derive(Serialize)]
struct FitRow {
    order: u8,
    a_fast: f64,
    gamma_fast: f64,
    a_slow: f64,
    gamma_slow: f64,
    residual: f64,
}

const FIT_HEADER: [&str; 6] = ["order", "a_fast", "gamma_fast", "a_slow", "gamma_slow", "residual"];

impl From<&ExpFit> for FitRow {
    fn from(fit: &ExpFit) -> Self {
        match *fit {
            ExpFit::Single { model, residual } => FitRow {
                order: 1,
                a_fast: model.amplitude,
                gamma_fast: model.rate,
                a_slow: 0.0,
                gamma_slow: model.rate,
                residual,
            },
            ExpFit::Double { model, residual } => FitRow {
                order: 2,
                a_fast: model.a_fast,
                gamma_fast: model.gamma_fast,
                a_slow: model.a_slow,
                gamma_slow: model.gamma_slow,
                residual,
            },
        }
    }
}

pub fn decay(config: &RunConfig) -> Result<()> {
    let mut out = OutDir::create(&config.run.out_dir)?;
    let observables = ObservableConfig {
        g2: None,
        blinking: false,
        ..config.observable_config()
    };
    let acc = simulate(config, observables)?;
    let p_in = config.scheme().p_in().filter(|&p| p > 0.0);
    let curve = acc.decay_curve(p_in)?;
    let hist = acc.decay_hist();
    let rows: Vec<(f64, u64, f64)> = curve.iter().zip(hist).map(|(&(t, v), &n)| (t, n, v)).collect();
    out.csv("decay.csv", &["t_ns", "counts", "normalized"], &rows)?;

    if let Some(p) = p_in {
        let analytic = low_power_decay_curve(
            &config.params()?,
            config.schedule.period_ns,
            p,
            observables.decay_bin,
            hist.len(),
        );
        match analytic {
            Ok(a) => out.csv("decay_analytic.csv", &["t_ns", "normalized"], &a)?,
            Err(e) => eprintln!("warning: no analytic overlay: {e}"),
        }
    }

    let x: Vec<f64> = curve.iter().map(|p| p.0).collect();
    let y: Vec<f64> = hist.iter().map(|&n| n as f64).collect();
    let fit = match fit_exponentials(&x, &y, FitOrder::Two) {
        Ok(fit) => fit,
        Err(e) => {
            out.manifest("decay", config)?;
            bail!("decay fit refused ({} X photons): {e}", acc.class_count(ExcitonClass::X));
        }
    };
    let row = FitRow::from(&fit);
    out.csv(
        "decay_fit.csv",
        &["gamma_fast", "gamma_slow", "a_fast", "a_slow", "residual"],
        &[(row.gamma_fast, row.gamma_slow, row.a_fast, row.a_slow, row.residual)],
    )?;
    println!(
        "decay: {} X photons in {} cycles; gamma_fast {:.4} /ns, gamma_slow {:.4} /ns",
        acc.class_count(ExcitonClass::X),
        acc.n_cycles_seen(),
        row.gamma_fast,
        row.gamma_slow
    );
    out.manifest("decay", config)
}

pub fn g2(config: &RunConfig) -> Result<()> {
    let mut out = OutDir::create(&config.run.out_dir)?;
    let observables = ObservableConfig {
        blinking: false,
        ..config.observable_config()
    };
    let acc = simulate(config, observables)?;
    let hist = acc.g2().context("coincidence histogram missing")?;
    let rows: Vec<(f64, u64, f64)> = hist
        .curve(G2Normalization::Plateau)
        .iter()
        .map(|p| (p.tau, p.raw, p.normalized))
        .collect();
    out.csv("g2.csv", &["tau_ns", "raw", "normalized"], &rows)?;
    println!(
        "g2: {} X photons; g2(0) raw {}, normalized {:.4}",
        acc.class_count(ExcitonClass::X),
        hist.raw_at_lag(0),
        hist.normalized_at_lag(0, G2Normalization::Plateau)
    );
    out.manifest("g2", config)
}

/// Order-1 and order-2 fits of a dark-run histogram over lengths `1..=max`.
fn blink_fits(hist: &BTreeMap<u64, u64>) -> Result<(ExpFit, ExpFit)> {
    let last = hist.keys().next_back().copied().unwrap_or(0);
    let x: Vec<f64> = (1..=last).map(|k| k as f64).collect();
    let y: Vec<f64> = (1..=last).map(|k| *hist.get(&k).unwrap_or(&0) as f64).collect();
    Ok((
        fit_exponentials(&x, &y, FitOrder::One)?,
        fit_exponentials(&x, &y, FitOrder::Two)?,
    ))
}

pub fn blink(config: &RunConfig) -> Result<()> {
    let mut out = OutDir::create(&config.run.out_dir)?;
    let observables = ObservableConfig {
        g2: None,
        blinking: true,
        ..config.observable_config()
    };
    let acc = simulate(config, observables)?;
    let hist = acc.blink_hist();
    let rows: Vec<(u64, u64)> = hist.iter().map(|(&k, &n)| (k, n)).collect();
    out.csv("blink.csv", &["run_length_periods", "count"], &rows)?;
    match blink_fits(hist) {
        Ok((one, two)) => {
            out.csv("blink_fit.csv", &FIT_HEADER, &[FitRow::from(&one), FitRow::from(&two)])?;
            let improvement = 1.0 - two.residual() / one.residual();
            println!(
                "blink: {} dark runs; order-2 residual improvement {improvement:.3}",
                hist.values().sum::<u64>()
            );
        }
        Err(e) => {
            eprintln!("warning: blinking histogram not fitted: {e}");
            out.csv::<FitRow>("blink_fit.csv", &FIT_HEADER, &[])?;
        }
    }
    out.manifest("blink", config)
}

pub fn sweep(config: &RunConfig, grid: &Path, resume: bool) -> Result<()> {
    let mut out = OutDir::create(&config.run.out_dir)?;
    let spec = GridFile::load(grid)?.spec(config)?;
    let log = out.path("sweep.csv");
    let options = SweepOptions {
        workers: config.run.workers,
        log: Some(log),
        resume,
    };
    let r = run_sweep(&spec, &options)?;
    out.note("sweep.csv");
    out.note("sweep.csv.manifest.json");
    let best = r
        .argmax(ExcitonClass::X)
        .map(|i| r.points[i].point)
        .context("empty grid")?;
    println!(
        "sweep: {} points; brightest X at gamma_nr {} gamma_sf {} period {} ns",
        r.points.len(),
        best.params.gamma_nr,
        best.params.gamma_sf,
        best.period_t
    );
    out.manifest("sweep", config)
}

pub fn saturation(config: &RunConfig, from: f64, to: f64, points: usize) -> Result<()> {
    let scheme = config.scheme();
    if !matches!(scheme, Scheme::NonResonant { .. }) {
        bail!("saturation needs [schedule] scheme = \"nonresonant\"");
    }
    let mut out = OutDir::create(&config.run.out_dir)?;
    let base = GridSpec::new(scheme)
        .with_base(config.params()?)
        .with_period(config.schedule.period_ns)
        .with_levels(config.dot.n_levels)
        .with_cycles(config.schedule.cycles)
        .with_seed(config.run.seed);
    let options = SweepOptions {
        workers: config.run.workers,
        ..SweepOptions::default()
    };
    let p_in = logspace(from, to, points);
    let curve = saturation_scan(&base, &p_in, &options)?;
    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..p_in.len())
        .map(|i| (curve.p_in[i], curve.x[i], curve.x_err[i], curve.xx[i], curve.xx_err[i]))
        .collect();
    out.csv("saturation.csv", &["p_in", "x", "x_stderr", "xx", "xx_stderr"], &rows)?;
    println!(
        "saturation: X peaks at p_in {:?}, XX peaks at p_in {:?}",
        curve.x_peak(),
        curve.xx_peak()
    );
    out.manifest("saturation", config)
}

pub fn validate(config: &RunConfig, overrides: &Overrides) -> Result<()> {
    let mut out = OutDir::create(&config.run.out_dir)?;
    let vc = ValidationConfig {
        cycles: overrides.cycles.unwrap_or(ValidationConfig::default().cycles),
        seed: config.run.seed,
        workers: config.run.workers,
        ..ValidationConfig::default()
    };
    let mut report = run_validation(&vc)?;
    report.analytic = qdot_kmc::validation::analytic_suite(&config.params()?)?;

    let oracle: Vec<_> = report
        .oracle
        .iter()
        .map(|c| (c.scheme, c.gamma_nr, c.gamma_sf, c.monte_carlo, c.stderr, c.exact, c.z, c.pass))
        .collect();
    out.csv(
        "validate_oracle.csv",
        &["scheme", "gamma_nr", "gamma_sf", "monte_carlo", "stderr", "exact", "z", "pass"],
        &oracle,
    )?;
    let analytic: Vec<_> = report
        .analytic
        .iter()
        .map(|c| {
            (
                c.t,
                c.closed_form.0,
                c.closed_form.1,
                c.integrated.0,
                c.integrated.1,
                c.rel_err,
                c.pass,
            )
        })
        .collect();
    out.csv(
        "validate_analytic.csv",
        &["t_ns", "bright", "dark", "bright_rk4", "dark_rk4", "rel_err", "pass"],
        &analytic,
    )?;
    let c = &report.calibration;
    out.csv(
        "validate_calibration.csv",
        &["repeats", "mean", "spread", "mean_stderr", "ratio", "pass"],
        &[(c.repeats, c.mean, c.spread, c.mean_stderr, c.ratio, c.pass)],
    )?;
    out.manifest("validate", config)?;

    let failed_oracle = report.oracle.iter().filter(|c| !c.pass).count();
    let failed_analytic = report.analytic.iter().filter(|c| !c.pass).count();
    let worst = report.oracle.iter().map(|c| c.z).fold(0.0, f64::max);
    println!(
        "validate: oracle {}/{} within 3 sigma (worst z {worst:.2}), analytic {}/{}, \
         error-bar ratio {:.2}",
        report.oracle.len() - failed_oracle,
        report.oracle.len(),
        report.analytic.len() - failed_analytic,
        report.analytic.len(),
        c.ratio
    );
    if !report.passed() {
        bail!(
            "validation failed: {failed_oracle} oracle, {failed_analytic} analytic, calibration {}",
            if c.pass { "ok" } else { "out of range" }
        );
    }
    Ok(())
}
