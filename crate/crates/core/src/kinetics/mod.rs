//! Dot state, rate composition and exact event sampling between pulses.

mod rates;
mod ssa;
mod state;

pub use rates::{total_rates, RateParams, RateVector};
pub use ssa::{step_ssa, Event, EventKind, SpinFlipChannel, Step};
pub use state::{classify_emission, Column, ExcitonClass, QdState};
