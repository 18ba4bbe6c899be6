use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::rates::{total_rates, RateParams};
use super::state::{Column, QdState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinFlipChannel {
    ElectronUpToDown,
    ElectronDownToUp,
    HoleUpToDown,
    HoleDownToUp,
}

impl SpinFlipChannel {
    pub fn source(self) -> Column {
        match self {
            SpinFlipChannel::ElectronUpToDown => Column::ElectronUp,
            SpinFlipChannel::ElectronDownToUp => Column::ElectronDown,
            SpinFlipChannel::HoleUpToDown => Column::HoleUp,
            SpinFlipChannel::HoleDownToUp => Column::HoleDown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// (e↑, h⇓) recombination.
    RadiativeUpDn,
    /// (e↓, h⇑) recombination.
    RadiativeDnUp,
    NonRadiative(Column),
    SpinFlip(SpinFlipChannel),
}

impl EventKind {
    /// Channels in the order of [`RateVector::as_array`](super::RateVector::as_array).
    pub const CHANNELS: [EventKind; 10] = [
        EventKind::RadiativeUpDn,
        EventKind::RadiativeDnUp,
        EventKind::NonRadiative(Column::ElectronUp),
        EventKind::NonRadiative(Column::ElectronDown),
        EventKind::NonRadiative(Column::HoleUp),
        EventKind::NonRadiative(Column::HoleDown),
        EventKind::SpinFlip(SpinFlipChannel::ElectronUpToDown),
        EventKind::SpinFlip(SpinFlipChannel::ElectronDownToUp),
        EventKind::SpinFlip(SpinFlipChannel::HoleUpToDown),
        EventKind::SpinFlip(SpinFlipChannel::HoleDownToUp),
    ];

    #[inline]
    pub fn is_radiative(self) -> bool {
        matches!(self, EventKind::RadiativeUpDn | EventKind::RadiativeDnUp)
    }

    /// Applies the event to `state`. Fails if the event is impossible there.
    pub fn apply(self, state: &QdState) -> Result<QdState> {
        let mut next = *state;
        let ok = match self {
            EventKind::RadiativeUpDn => {
                next.try_remove(Column::ElectronUp) && next.try_remove(Column::HoleDown)
            }
            EventKind::RadiativeDnUp => {
                next.try_remove(Column::ElectronDown) && next.try_remove(Column::HoleUp)
            }
            EventKind::NonRadiative(col) => next.try_remove(col),
            EventKind::SpinFlip(ch) => {
                next.try_remove(ch.source()) && next.try_add(ch.source().flipped())
            }
        };
        if ok {
            Ok(next)
        } else {
            Err(Error::InvalidState(format!("{self:?} is impossible from {state}")))
        }
    }
}

/// An event at absolute time `time` (ns) on the clock passed to [`step_ssa`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
}

/// Outcome of one SSA step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    /// `None` when the next event would fall at or after `t_end`.
    pub event: Option<Event>,
    pub state: QdState,
    pub time: f64,
}

/// One Gillespie direct-method step on `[t_now, t_end)`.
///
/// Draws an exponential waiting time at the total rate. If the event falls
/// before `t_end`, picks the channel in proportion to its rate and applies
/// it; otherwise returns the unchanged state at `t_end`.
pub fn step_ssa<R: Rng + ?Sized>(
    state: &QdState,
    params: &RateParams,
    t_now: f64,
    t_end: f64,
    rng: &mut R,
) -> Result<Step> {
    if t_now.is_nan() || t_end.is_nan() || t_now >= t_end {
        return Err(Error::TimeOrder { t_now, t_end });
    }
    let rates = total_rates(state, params).as_array();
    let total: f64 = rates.iter().sum();
    let idle = Step {
        event: None,
        state: *state,
        time: t_end,
    };
    if total <= 0.0 {
        return Ok(idle);
    }
    let wait: f64 = Exp1.sample(rng);
    let t_event = t_now + wait / total;
    if t_event >= t_end {
        return Ok(idle);
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    // Fall back to the last non-zero channel if rounding leaves target >= acc.
    let mut chosen = rates.iter().rposition(|&r| r > 0.0).unwrap_or(0);
    for (i, &r) in rates.iter().enumerate() {
        acc += r;
        if r > 0.0 && target < acc {
            chosen = i;
            break;
        }
    }
    let kind = EventKind::CHANNELS[chosen];
    Ok(Step {
        event: Some(Event {
            kind,
            time: t_event,
        }),
        state: kind.apply(state)?,
        time: t_event,
    })
}
