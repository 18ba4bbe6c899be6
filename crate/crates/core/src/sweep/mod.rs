//! Parameter grids run as independent trajectories, one per point.
//!
//! Each point draws from its own ChaCha stream keyed by the grid's
//! `seed_base`, so a table does not depend on how many workers produced it.
//! Results can be streamed to an append-only CSV log that an interrupted
//! sweep resumes from.

mod grid;
mod log;
mod scans;

use std::path::PathBuf;

use rayon::prelude::*;

pub use grid::{linspace, logspace, Axis, AxisValues, GridPoint, GridSpec};
pub use log::{manifest_path, write_rows, LogRow, LOG_HEADER};
pub use scans::{repetition_scan, saturation_scan, RepetitionMap, SaturationCurve};

use crate::error::{Error, Result};
use crate::excitation::Trajectory;
use crate::kinetics::ExcitonClass;
use crate::observables::{PhotonRecord, PhotonSink};
use crate::rng::stream_rng;

/// Estimates for one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointResult {
    pub point: GridPoint,
    /// Photons per cycle for each class, indexed by [`ExcitonClass::index`].
    pub p_out: [f64; 5],
    pub stderr: [f64; 5],
    pub cycles: u64,
}

impl PointResult {
    pub fn p_out(&self, class: ExcitonClass) -> f64 {
        self.p_out[class.index()]
    }

    pub fn stderr(&self, class: ExcitonClass) -> f64 {
        self.stderr[class.index()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub spec: GridSpec,
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn values(&self, class: ExcitonClass) -> Vec<f64> {
        self.points.iter().map(|p| p.p_out(class)).collect()
    }

    /// Index of the brightest point for `class`; the first wins ties.
    pub fn argmax(&self, class: ExcitonClass) -> Option<usize> {
        argmax(&self.values(class))
    }

    pub fn rows(&self) -> Vec<LogRow> {
        self.points
            .iter()
            .flat_map(|p| LogRow::from_point(p, self.spec.seed_base))
            .collect()
    }
}

pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub workers: usize,
    /// Append-only CSV result log.
    pub log: Option<PathBuf>,
    /// Continue from an existing log instead of replacing it.
    pub resume: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            log: None,
            resume: false,
        }
    }
}

#[derive(Default)]
struct ClassCounter([u64; 5]);

impl PhotonSink for ClassCounter {
    fn photon(&mut self, photon: &PhotonRecord) -> Result<()> {
        self.0[photon.exciton_class.index()] += 1;
        Ok(())
    }

    fn cycle_end(&mut self, _cycle_index: u64) -> Result<()> {
        Ok(())
    }
}

/// Simulates one grid point: burn-in, then `batches` consecutive batches.
pub fn run_point(spec: &GridSpec, point: &GridPoint) -> Result<PointResult> {
    let rng = stream_rng(spec.seed_base, point.index as u64);
    let mut traj = Trajectory::new(point.params, point.period_t, point.scheme, spec.n_levels, rng)?;
    traj.run_cycles(spec.burn_in_cycles, &mut ClassCounter::default())?;

    let n = spec.cycles_per_point;
    let batches = u64::from(spec.batches);
    let mut per_batch = Vec::with_capacity(spec.batches as usize);
    for b in 0..batches {
        let len = n / batches + u64::from(b < n % batches);
        let mut counter = ClassCounter::default();
        traj.run_cycles(len, &mut counter)?;
        per_batch.push((len, counter.0));
    }

    let mut p_out = [0.0; 5];
    let mut stderr = [0.0; 5];
    for k in 0..5 {
        let total: u64 = per_batch.iter().map(|(_, c)| c[k]).sum();
        let p = total as f64 / n as f64;
        p_out[k] = p;
        stderr[k] = if per_batch.len() < 2 {
            (p * (1.0 - p)).max(0.0).sqrt() / (n as f64).sqrt()
        } else {
            let means: Vec<f64> = per_batch.iter().map(|(len, c)| c[k] as f64 / *len as f64).collect();
            let m = means.iter().sum::<f64>() / means.len() as f64;
            let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
            (var / means.len() as f64).sqrt()
        };
    }
    Ok(PointResult {
        point: *point,
        p_out,
        stderr,
        cycles: n,
    })
}

/// Runs every point of `spec`, in parallel on `options.workers` threads.
///
/// With a log, finished points are appended in grid order as they complete,
/// so the file is a prefix of the final table at every moment.
pub fn run_sweep(spec: &GridSpec, options: &SweepOptions) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.points()?;
    let mut done: Vec<PointResult> = Vec::new();
    let mut writer = match &options.log {
        Some(path) => {
            let (writer, previous) = log::open(path, spec, options.resume)?;
            done = previous;
            Some(writer)
        }
        None => None,
    };

    let workers = options.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    let chunk = 2 * workers;
    for block in points[done.len()..].chunks(chunk) {
        let results: Vec<PointResult> = pool.install(|| {
            block
                .par_iter()
                .map(|p| run_point(spec, p))
                .collect::<Result<Vec<_>>>()
        })?;
        if let Some(w) = writer.as_mut() {
            w.append(&results, spec.seed_base)?;
        }
        done.extend(results);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        points: done,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation::Scheme;
    use crate::kinetics::RateParams;

    #[test]
    fn argmax_takes_first_of_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn lossless_resonant_point_is_deterministic_source() {
        let spec = GridSpec::new(Scheme::resonant())
            .with_base(RateParams::new(1.0, 0.0, 0.0, 1.0).unwrap())
            .with_cycles(2_000);
        let r = run_sweep(&spec, &SweepOptions::default()).unwrap();
        let x = r.points[0].p_out(ExcitonClass::X);
        assert!((0.99..=1.0).contains(&x), "{x}");
    }

    #[test]
    fn zero_power_point_is_dark() {
        let spec = GridSpec::new(Scheme::nonresonant(0.0)).with_cycles(1_000);
        let r = run_sweep(&spec, &SweepOptions::default()).unwrap();
        assert!(r.points[0].p_out.iter().all(|&p| p == 0.0));
        assert!(r.points[0].stderr.iter().all(|&s| s == 0.0));
    }
}
