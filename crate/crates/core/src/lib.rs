//! Kinetic Monte-Carlo simulation of carrier population dynamics in a single
//! quantum dot.
//!
//! The dot is described by the number of spin-up and spin-down electrons and
//! holes it holds. Between excitation pulses the populations evolve through
//! radiative recombination of spin-matched pairs, single-carrier non-radiative
//! loss and carrier spin flips, sampled exactly with the Gillespie direct
//! method. Photons are classified by the charge complex that emitted them and
//! accumulated into decay histograms, emission probabilities, coincidence
//! (g²) histograms and dark-run (blinking) statistics.
//!
//! [`reference`] holds exact oracles: the closed-form bright/dark exciton
//! decay, an exact continuous-time Markov chain for small dots, and
//! single/double exponential fitting. [`sweep`] runs reproducible, resumable
//! parameter grids.

pub mod error;
pub mod excitation;
pub mod kinetics;
pub mod observables;
pub mod reference;
pub mod rng;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};
pub use excitation::{run_trajectory, CaptureStatistics, Polarization, PulseSchedule, Scheme, Trajectory};
pub use kinetics::{
    classify_emission, step_ssa, total_rates, Column, Event, EventKind, ExcitonClass, QdState,
    RateParams, RateVector, Step,
};
pub use observables::{AccumulatorSet, Detector, ObservableConfig, PhotonRecord, Recorder};
