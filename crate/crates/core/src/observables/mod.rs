//! Photon streams turned into measurable quantities: decay histograms,
//! per-class emission probabilities, two-detector coincidences and dark-run
//! statistics.
//!
//! A [`Recorder`] is the single writer attached to one trajectory. It keeps
//! the streaming state that spans cycle boundaries (the coincidence window
//! and the open dark run) and writes finalized counts into an
//! [`AccumulatorSet`]. Sets from independent trajectories, or from
//! consecutive segments of one trajectory, merge by element-wise addition.

mod blink;
mod g2;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

pub use blink::blink_runs;
pub use g2::{g2_correlate, G2Histogram, G2Normalization, G2Point};

use crate::error::{Error, Result};
use crate::kinetics::ExcitonClass;

/// Beam-splitter output arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    I,
    II,
}

impl Detector {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Detector::I => 0,
            Detector::II => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub t_abs: f64,
    pub t_in_period: f64,
    pub cycle_index: u64,
    pub exciton_class: ExcitonClass,
    pub detector: Detector,
}

/// Receiver of a trajectory's photon stream.
pub trait PhotonSink {
    fn photon(&mut self, photon: &PhotonRecord) -> Result<()>;
    fn cycle_end(&mut self, cycle_index: u64) -> Result<()>;
}

impl PhotonSink for Vec<PhotonRecord> {
    fn photon(&mut self, photon: &PhotonRecord) -> Result<()> {
        self.push(*photon);
        Ok(())
    }

    fn cycle_end(&mut self, _cycle_index: u64) -> Result<()> {
        Ok(())
    }
}

impl<A: PhotonSink, B: PhotonSink> PhotonSink for (A, B) {
    fn photon(&mut self, photon: &PhotonRecord) -> Result<()> {
        self.0.photon(photon)?;
        self.1.photon(photon)
    }

    fn cycle_end(&mut self, cycle_index: u64) -> Result<()> {
        self.0.cycle_end(cycle_index)?;
        self.1.cycle_end(cycle_index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Config {
    /// Coincidence bin width δt in ns.
    pub bin: f64,
    /// Largest |τ| in ns.
    pub max_lag: f64,
}

impl G2Config {
    /// Number of positive lag bins.
    pub fn lag_bins(&self) -> usize {
        (self.max_lag / self.bin + 1e-9).floor() as usize
    }
}

/// Binning and feature switches shared by every set that is to be merged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableConfig {
    pub period_t: f64,
    /// Decay histogram bin width in ns.
    pub decay_bin: f64,
    pub g2: Option<G2Config>,
    pub blinking: bool,
}

impl Default for ObservableConfig {
    fn default() -> Self {
        Self {
            period_t: 10.0,
            decay_bin: 0.05,
            g2: None,
            blinking: true,
        }
    }
}

impl ObservableConfig {
    pub fn with_period(mut self, period_t: f64) -> Self {
        self.period_t = period_t;
        self
    }

    pub fn with_g2(mut self, bin: f64, max_lag: f64) -> Self {
        self.g2 = Some(G2Config { bin, max_lag });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_t > 0.0 && self.period_t.is_finite()) {
            return Err(Error::param("period_t", "must be > 0"));
        }
        if !(self.decay_bin > 0.0 && self.decay_bin.is_finite()) {
            return Err(Error::param("decay_bin", "must be > 0"));
        }
        if let Some(g2) = self.g2 {
            if !(g2.bin > 0.0 && g2.bin.is_finite()) {
                return Err(Error::param("g2_bin", "must be > 0"));
            }
            if !(g2.max_lag >= 0.0 && g2.max_lag.is_finite()) {
                return Err(Error::param("g2_max_lag", "must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn decay_bins(&self) -> usize {
        ((self.period_t / self.decay_bin) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Mergeable photon statistics of one or more trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulatorSet {
    config: ObservableConfig,
    decay_hist: Vec<u64>,
    class_counts: [u64; 5],
    detector_counts: [u64; 2],
    g2_hist: Vec<u64>,
    blink_hist: BTreeMap<u64, u64>,
    n_cycles_seen: u64,
}

impl AccumulatorSet {
    pub fn new(config: ObservableConfig) -> Result<Self> {
        config.validate()?;
        let g2_len = config.g2.map_or(0, |g| 2 * g.lag_bins() + 1);
        Ok(Self {
            config,
            decay_hist: vec![0; config.decay_bins()],
            class_counts: [0; 5],
            detector_counts: [0; 2],
            g2_hist: vec![0; g2_len],
            blink_hist: BTreeMap::new(),
            n_cycles_seen: 0,
        })
    }

    fn cleared(&self) -> Self {
        Self::new(self.config).expect("config already validated")
    }

    pub fn config(&self) -> &ObservableConfig {
        &self.config
    }

    /// Element-wise addition. Associative and commutative.
    pub fn merge(&mut self, other: &AccumulatorSet) -> Result<()> {
        if self.config != other.config {
            return Err(Error::LayoutMismatch);
        }
        for (a, b) in self.decay_hist.iter_mut().zip(&other.decay_hist) {
            *a += b;
        }
        for (a, b) in self.class_counts.iter_mut().zip(&other.class_counts) {
            *a += b;
        }
        for (a, b) in self.detector_counts.iter_mut().zip(&other.detector_counts) {
            *a += b;
        }
        for (a, b) in self.g2_hist.iter_mut().zip(&other.g2_hist) {
            *a += b;
        }
        for (&len, &n) in &other.blink_hist {
            *self.blink_hist.entry(len).or_default() += n;
        }
        self.n_cycles_seen += other.n_cycles_seen;
        Ok(())
    }

    pub fn n_cycles_seen(&self) -> u64 {
        self.n_cycles_seen
    }

    /// X-photon counts per `t_in_period` bin.
    pub fn decay_hist(&self) -> &[u64] {
        &self.decay_hist
    }

    pub fn class_count(&self, class: ExcitonClass) -> u64 {
        self.class_counts[class.index()]
    }

    pub fn class_counts(&self) -> [u64; 5] {
        self.class_counts
    }

    pub fn detector_count(&self, detector: Detector) -> u64 {
        self.detector_counts[detector.index()]
    }

    pub fn total_photons(&self) -> u64 {
        self.class_counts.iter().sum()
    }

    /// Dark-run histogram keyed by run length in periods.
    pub fn blink_hist(&self) -> &BTreeMap<u64, u64> {
        &self.blink_hist
    }

    /// Coincidence histogram, if g² accumulation was enabled.
    pub fn g2(&self) -> Option<G2Histogram> {
        self.config
            .g2
            .map(|g| G2Histogram::from_counts(g.bin, g.lag_bins(), self.g2_hist.clone()))
    }

    /// Photons of `class` per cycle.
    pub fn emission_probability(&self, class: ExcitonClass) -> f64 {
        if self.n_cycles_seen == 0 {
            return 0.0;
        }
        self.class_count(class) as f64 / self.n_cycles_seen as f64
    }

    /// Decay curve `(bin centre in ns, normalized counts)`.
    ///
    /// Counts are divided by cycles seen and bin width, and additionally by
    /// `p_in` for above-band pumping, giving photons per ns per pulse and per
    /// injected pair.
    pub fn decay_curve(&self, p_in: Option<f64>) -> Result<Vec<(f64, f64)>> {
        if self.n_cycles_seen == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let b = self.config.decay_bin;
        let mut norm = self.n_cycles_seen as f64 * b;
        if let Some(p) = p_in {
            if !(p > 0.0) {
                return Err(Error::param("p_in", "normalization needs p_in > 0"));
            }
            norm *= p;
        }
        Ok(self
            .decay_hist
            .iter()
            .enumerate()
            .map(|(i, &n)| ((i as f64 + 0.5) * b, n as f64 / norm))
            .collect())
    }
}

/// Single-writer sink for one trajectory.
#[derive(Clone, Debug)]
pub struct Recorder {
    acc: AccumulatorSet,
    window: VecDeque<(i64, Detector)>,
    window_capacity: usize,
    dark_run: u64,
    x_this_cycle: bool,
}

impl Recorder {
    /// Upper bound on X photons held inside one coincidence window.
    pub const DEFAULT_WINDOW_CAPACITY: usize = 1 << 20;

    pub fn new(config: ObservableConfig) -> Result<Self> {
        Ok(Self {
            acc: AccumulatorSet::new(config)?,
            window: VecDeque::new(),
            window_capacity: Self::DEFAULT_WINDOW_CAPACITY,
            dark_run: 0,
            x_this_cycle: false,
        })
    }

    pub fn with_window_capacity(mut self, capacity: usize) -> Self {
        self.window_capacity = capacity;
        self
    }

    pub fn accumulated(&self) -> &AccumulatorSet {
        &self.acc
    }

    /// Hands over everything finalized so far and keeps the streaming state,
    /// so the next segment of the same trajectory continues seamlessly.
    pub fn take(&mut self) -> AccumulatorSet {
        let fresh = self.acc.cleared();
        std::mem::replace(&mut self.acc, fresh)
    }

    /// Closes the trailing dark run and returns the remaining counts.
    pub fn finish(mut self) -> AccumulatorSet {
        if self.acc.config.blinking && self.dark_run > 0 {
            *self.acc.blink_hist.entry(self.dark_run).or_default() += 1;
        }
        self.acc
    }

    fn coincide(&mut self, t_abs: f64, detector: Detector) -> Result<()> {
        let Some(g2) = self.acc.config.g2 else {
            return Ok(());
        };
        let lags = g2.lag_bins() as i64;
        let bin = (t_abs / g2.bin).floor() as i64;
        while let Some(&(b0, _)) = self.window.front() {
            if bin - b0 > lags {
                self.window.pop_front();
            } else {
                break;
            }
        }
        for &(b0, d0) in &self.window {
            if d0 == detector {
                continue;
            }
            // τ is the detector-II bin minus the detector-I bin.
            let tau = match detector {
                Detector::II => bin - b0,
                Detector::I => b0 - bin,
            };
            self.acc.g2_hist[(tau + lags) as usize] += 1;
        }
        if self.window.len() >= self.window_capacity {
            return Err(Error::SinkCapacity(format!(
                "more than {} photons inside one coincidence window",
                self.window_capacity
            )));
        }
        self.window.push_back((bin, detector));
        Ok(())
    }
}

impl PhotonSink for Recorder {
    fn photon(&mut self, photon: &PhotonRecord) -> Result<()> {
        let acc = &mut self.acc;
        acc.class_counts[photon.exciton_class.index()] += 1;
        acc.detector_counts[photon.detector.index()] += 1;
        if photon.exciton_class != ExcitonClass::X {
            return Ok(());
        }
        let last = acc.decay_hist.len() - 1;
        let bin = ((photon.t_in_period / acc.config.decay_bin) as usize).min(last);
        acc.decay_hist[bin] += 1;
        self.x_this_cycle = true;
        self.coincide(photon.t_abs, photon.detector)
    }

    fn cycle_end(&mut self, _cycle_index: u64) -> Result<()> {
        self.acc.n_cycles_seen += 1;
        if self.acc.config.blinking {
            if self.x_this_cycle {
                if self.dark_run > 0 {
                    *self.acc.blink_hist.entry(self.dark_run).or_default() += 1;
                }
                self.dark_run = 0;
            } else {
                self.dark_run += 1;
            }
        }
        self.x_this_cycle = false;
        Ok(())
    }
}
