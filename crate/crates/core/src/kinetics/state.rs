use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One spin-resolved carrier column of the dot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Column {
    ElectronUp,
    ElectronDown,
    HoleUp,
    HoleDown,
}

impl Column {
    pub const ALL: [Column; 4] = [
        Column::ElectronUp,
        Column::ElectronDown,
        Column::HoleUp,
        Column::HoleDown,
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    /// The column with the same carrier type and reversed spin.
    #[inline]
    pub const fn flipped(self) -> Column {
        match self {
            Column::ElectronUp => Column::ElectronDown,
            Column::ElectronDown => Column::ElectronUp,
            Column::HoleUp => Column::HoleDown,
            Column::HoleDown => Column::HoleUp,
        }
    }
}

/// Occupancy of a dot with `n_levels` confinement levels per spin column.
///
/// Intraband relaxation is instantaneous, so occupied slots are always the
/// lowest levels of each column and the four counts describe the state
/// completely. Every count lies in `0..=n_levels`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QdState {
    counts: [u8; 4],
    n_levels: u8,
}

impl QdState {
    pub fn empty(n_levels: u8) -> Result<Self> {
        if n_levels == 0 {
            return Err(Error::param("n_levels", "a dot needs at least one level"));
        }
        Ok(Self {
            counts: [0; 4],
            n_levels,
        })
    }

    /// State from counts in the order `e↑, e↓, h⇑, h⇓`.
    pub fn new(n_levels: u8, e_up: u8, e_dn: u8, h_up: u8, h_dn: u8) -> Result<Self> {
        let mut state = Self::empty(n_levels)?;
        for (col, n) in Column::ALL.into_iter().zip([e_up, e_dn, h_up, h_dn]) {
            if n > n_levels {
                return Err(Error::InvalidState(format!(
                    "{col:?} holds {n} carriers but the dot has {n_levels} levels"
                )));
            }
            state.counts[col.index()] = n;
        }
        Ok(state)
    }

    /// Completely filled dot.
    pub fn full(n_levels: u8) -> Result<Self> {
        Self::new(n_levels, n_levels, n_levels, n_levels, n_levels)
    }

    #[inline]
    pub fn n_levels(&self) -> u8 {
        self.n_levels
    }

    #[inline]
    pub fn count(&self, col: Column) -> u8 {
        self.counts[col.index()]
    }

    #[inline]
    pub fn counts(&self) -> [u8; 4] {
        self.counts
    }

    #[inline]
    pub fn e_up(&self) -> u8 {
        self.counts[0]
    }

    #[inline]
    pub fn e_dn(&self) -> u8 {
        self.counts[1]
    }

    #[inline]
    pub fn h_up(&self) -> u8 {
        self.counts[2]
    }

    #[inline]
    pub fn h_dn(&self) -> u8 {
        self.counts[3]
    }

    #[inline]
    pub fn electrons(&self) -> u8 {
        self.counts[0] + self.counts[1]
    }

    #[inline]
    pub fn holes(&self) -> u8 {
        self.counts[2] + self.counts[3]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.counts == [0; 4]
    }

    #[inline]
    pub fn is_column_full(&self, col: Column) -> bool {
        self.count(col) >= self.n_levels
    }

    pub fn is_full(&self) -> bool {
        self.counts.iter().all(|&n| n >= self.n_levels)
    }

    /// Number of spin-matched pairs `(e↑,h⇓)` plus `(e↓,h⇑)`.
    #[inline]
    pub fn bright_pairs(&self) -> u8 {
        self.e_up().min(self.h_dn()) + self.e_dn().min(self.h_up())
    }

    /// Adds a carrier to `col`; returns false when the column is full.
    #[inline]
    pub fn try_add(&mut self, col: Column) -> bool {
        if self.is_column_full(col) {
            false
        } else {
            self.counts[col.index()] += 1;
            true
        }
    }

    /// Removes a carrier from `col`; returns false when the column is empty.
    #[inline]
    pub fn try_remove(&mut self, col: Column) -> bool {
        if self.counts[col.index()] == 0 {
            false
        } else {
            self.counts[col.index()] -= 1;
            true
        }
    }
}

impl fmt::Debug for QdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [eu, ed, hu, hd] = self.counts;
        write!(f, "[e↑{eu} e↓{ed} h⇑{hu} h⇓{hd} /{}]", self.n_levels)
    }
}

/// Charge complex responsible for a photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExcitonClass {
    X,
    XMinus,
    XPlus,
    XX,
    Higher,
}

impl ExcitonClass {
    pub const ALL: [ExcitonClass; 5] = [
        ExcitonClass::X,
        ExcitonClass::XMinus,
        ExcitonClass::XPlus,
        ExcitonClass::XX,
        ExcitonClass::Higher,
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    /// Class from total electron and hole numbers before emission.
    #[inline]
    pub fn from_totals(electrons: u8, holes: u8) -> Self {
        match (electrons, holes) {
            (1, 1) => ExcitonClass::X,
            (2, 1) => ExcitonClass::XMinus,
            (1, 2) => ExcitonClass::XPlus,
            (2, 2) => ExcitonClass::XX,
            _ => ExcitonClass::Higher,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExcitonClass::X => "X",
            ExcitonClass::XMinus => "X_minus",
            ExcitonClass::XPlus => "X_plus",
            ExcitonClass::XX => "XX",
            ExcitonClass::Higher => "Higher",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == label)
    }
}

impl fmt::Display for ExcitonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Classifies the complex that emits from `state_before`.
pub fn classify_emission(state_before: &QdState) -> Result<ExcitonClass> {
    if state_before.bright_pairs() == 0 {
        return Err(Error::NoRadiativePair(*state_before));
    }
    Ok(ExcitonClass::from_totals(
        state_before.electrons(),
        state_before.holes(),
    ))
}
