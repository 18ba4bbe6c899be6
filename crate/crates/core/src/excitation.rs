//! Pulse trains, carrier injection and the cycle-by-cycle trajectory runner.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{classify_emission, step_ssa, Column, QdState, RateParams};
use crate::observables::{AccumulatorSet, Detector, ObservableConfig, PhotonRecord, PhotonSink, Recorder};
use crate::rng::{trajectory_rng, SimRng};

/// Bright pair addressed by a resonant π-pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    /// (e↑, h⇓)
    #[default]
    UpDown,
    /// (e↓, h⇑)
    DownUp,
}

/// How an above-band pulse populates the dot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureStatistics {
    /// One Poisson draw gives the number of electrons and of holes alike.
    #[default]
    Paired,
    /// Electron and hole numbers are separate Poisson draws of mean `p_in`.
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// Above-band pumping; `p_in` is the mean number of carriers of each type per pulse.
    NonResonant {
        p_in: f64,
        #[serde(default)]
        capture: CaptureStatistics,
    },
    /// π-pulse on one bright exciton.
    Resonant { polarization: Polarization },
}

impl Scheme {
    /// Above-band pumping with pair-correlated capture.
    pub fn nonresonant(p_in: f64) -> Self {
        Scheme::NonResonant {
            p_in,
            capture: CaptureStatistics::Paired,
        }
    }

    pub fn resonant() -> Self {
        Scheme::Resonant {
            polarization: Polarization::UpDown,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Scheme::NonResonant { p_in, .. } = *self {
            if !p_in.is_finite() || p_in < 0.0 {
                return Err(Error::param("p_in", format!("must be finite and >= 0, got {p_in}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::NonResonant { .. } => "nonresonant",
            Scheme::Resonant { .. } => "resonant",
        }
    }

    /// Mean pairs per pulse, or `None` for resonant pumping.
    pub fn p_in(&self) -> Option<f64> {
        match *self {
            Scheme::NonResonant { p_in, .. } => Some(p_in),
            Scheme::Resonant { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Repetition period in ns.
    pub period_t: f64,
    pub n_cycles: u64,
    pub scheme: Scheme,
}

impl PulseSchedule {
    pub fn new(period_t: f64, n_cycles: u64, scheme: Scheme) -> Result<Self> {
        let schedule = Self {
            period_t,
            n_cycles,
            scheme,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.period_t.is_finite() || self.period_t <= 0.0 {
            return Err(Error::param("period_t", format!("must be > 0, got {}", self.period_t)));
        }
        if self.n_cycles == 0 {
            return Err(Error::param("n_cycles", "must be >= 1"));
        }
        self.scheme.validate()
    }

    /// Total simulated time in ns.
    pub fn span(&self) -> f64 {
        self.period_t * self.n_cycles as f64
    }
}

/// Places one carrier of a type whose preferred column is `first`.
#[inline]
fn capture(state: &mut QdState, first: Column) {
    if !state.try_add(first) {
        state.try_add(first.flipped());
    }
}

fn inject_carriers<R: Rng + ?Sized>(
    state: &QdState,
    n: u64,
    up: Column,
    down: Column,
    rng: &mut R,
) -> QdState {
    let mut next = *state;
    for _ in 0..n {
        if next.is_column_full(up) && next.is_column_full(down) {
            break;
        }
        let col = if rng.random::<bool>() { up } else { down };
        capture(&mut next, col);
    }
    next
}

fn poisson(p_in: f64) -> Option<Poisson<f64>> {
    // Poisson::new rejects a zero mean; nothing is drawn in that case.
    (p_in > 0.0).then(|| Poisson::new(p_in).expect("finite positive mean"))
}

#[inline]
fn draw<R: Rng + ?Sized>(dist: Option<&Poisson<f64>>, rng: &mut R) -> u64 {
    dist.map_or(0, |d| d.sample(rng) as u64)
}

fn inject_with<R: Rng + ?Sized>(
    state: &QdState,
    dist: Option<&Poisson<f64>>,
    capture: CaptureStatistics,
    rng: &mut R,
) -> QdState {
    let n_e = draw(dist, rng);
    let n_h = match capture {
        CaptureStatistics::Independent => draw(dist, rng),
        CaptureStatistics::Paired => n_e,
    };
    let next = inject_carriers(state, n_e, Column::ElectronUp, Column::ElectronDown, rng);
    inject_carriers(&next, n_h, Column::HoleUp, Column::HoleDown, rng)
}

/// Above-band pulse: Poisson numbers of electrons and holes with independent random spins.
///
/// A carrier whose chosen column is full moves to the opposite spin column if
/// that has room and is discarded otherwise.
pub fn inject_nonresonant<R: Rng + ?Sized>(
    state: &QdState,
    p_in: f64,
    capture: CaptureStatistics,
    rng: &mut R,
) -> QdState {
    let dist = poisson(p_in);
    inject_with(state, dist.as_ref(), capture, rng)
}

/// π-pulse: excites one bright pair only when the dot is empty.
pub fn inject_resonant(state: &QdState, polarization: Polarization) -> QdState {
    if !state.is_empty() {
        return *state;
    }
    let mut next = *state;
    let (e, h) = match polarization {
        Polarization::UpDown => (Column::ElectronUp, Column::HoleDown),
        Polarization::DownUp => (Column::ElectronDown, Column::HoleUp),
    };
    next.try_add(e);
    next.try_add(h);
    next
}

enum Injector {
    NonResonant(Option<Poisson<f64>>, CaptureStatistics),
    Resonant(Polarization),
}

/// A single dot driven by a pulse train.
///
/// The runner owns the dot state, the clock and the random stream, so a
/// trajectory may be advanced in several segments with identical results to
/// one uninterrupted run.
pub struct Trajectory<R = SimRng> {
    params: RateParams,
    period_t: f64,
    injector: Injector,
    state: QdState,
    rng: R,
    cycle: u64,
}

impl<R: Rng> Trajectory<R> {
    pub fn new(
        params: RateParams,
        period_t: f64,
        scheme: Scheme,
        n_levels: u8,
        rng: R,
    ) -> Result<Self> {
        params.validate()?;
        PulseSchedule::new(period_t, 1, scheme)?;
        let injector = match scheme {
            Scheme::NonResonant { p_in, capture } => Injector::NonResonant(poisson(p_in), capture),
            Scheme::Resonant { polarization } => Injector::Resonant(polarization),
        };
        Ok(Self {
            params,
            period_t,
            injector,
            state: QdState::empty(n_levels)?,
            rng,
            cycle: 0,
        })
    }

    pub fn state(&self) -> &QdState {
        &self.state
    }

    /// Index of the next cycle to run.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    /// Runs `n` pulse periods, forwarding photons and cycle ends to `sink`.
    pub fn run_cycles<S: PhotonSink + ?Sized>(&mut self, n: u64, sink: &mut S) -> Result<()> {
        for _ in 0..n {
            self.state = match &self.injector {
                Injector::NonResonant(dist, capture) => {
                    inject_with(&self.state, dist.as_ref(), *capture, &mut self.rng)
                }
                Injector::Resonant(pol) => inject_resonant(&self.state, *pol),
            };
            let origin = self.cycle as f64 * self.period_t;
            let mut t = 0.0;
            loop {
                let step = step_ssa(&self.state, &self.params, t, self.period_t, &mut self.rng)?;
                let Some(event) = step.event else { break };
                if event.kind.is_radiative() {
                    let class = classify_emission(&self.state)?;
                    let detector = if self.rng.random::<bool>() {
                        Detector::I
                    } else {
                        Detector::II
                    };
                    sink.photon(&PhotonRecord {
                        t_abs: origin + event.time,
                        t_in_period: event.time,
                        cycle_index: self.cycle,
                        exciton_class: class,
                        detector,
                    })?;
                }
                self.state = step.state;
                t = event.time;
            }
            sink.cycle_end(self.cycle)?;
            self.cycle += 1;
        }
        Ok(())
    }
}

/// Runs a full schedule from an empty dot and returns the accumulated counts.
pub fn run_trajectory(
    params: RateParams,
    schedule: &PulseSchedule,
    n_levels: u8,
    seed: u64,
    config: ObservableConfig,
) -> Result<AccumulatorSet> {
    schedule.validate()?;
    if let Some(g2) = config.g2 {
        if g2.max_lag > schedule.span() {
            return Err(Error::LagExceedsSpan {
                max_lag: g2.max_lag,
                span: schedule.span(),
            });
        }
    }
    let mut recorder = Recorder::new(config.with_period(schedule.period_t))?;
    let mut traj = Trajectory::new(
        params,
        schedule.period_t,
        schedule.scheme,
        n_levels,
        trajectory_rng(seed),
    )?;
    traj.run_cycles(schedule.n_cycles, &mut recorder)?;
    Ok(recorder.finish())
}
