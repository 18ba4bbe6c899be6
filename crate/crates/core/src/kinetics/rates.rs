use serde::{Deserialize, Serialize};

use super::state::{Column, QdState};
use crate::error::{Error, Result};

/// Single-carrier rates in ns⁻¹ and the Purcell factor of the bright exciton.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub gamma_r: f64,
    pub gamma_nr: f64,
    pub gamma_sf: f64,
    pub purcell: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            gamma_r: 1.0,
            gamma_nr: 0.1,
            gamma_sf: 0.01,
            purcell: 1.0,
        }
    }
}

impl RateParams {
    pub fn new(gamma_r: f64, gamma_nr: f64, gamma_sf: f64, purcell: f64) -> Result<Self> {
        let params = Self {
            gamma_r,
            gamma_nr,
            gamma_sf,
            purcell,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("gamma_r", self.gamma_r),
            ("gamma_nr", self.gamma_nr),
            ("gamma_sf", self.gamma_sf),
            ("purcell", self.purcell),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::param(name, format!("must be finite and >= 0, got {value}")));
            }
        }
        Ok(())
    }

    /// Exciton non-radiative rate; both carriers of the pair can decay.
    pub fn gamma_nr_exciton(&self) -> f64 {
        2.0 * self.gamma_nr
    }

    pub fn gamma_sf_exciton(&self) -> f64 {
        2.0 * self.gamma_sf
    }

    /// Bright-exciton radiative rate including the Purcell factor.
    pub fn gamma_r_exciton(&self) -> f64 {
        self.gamma_r * self.purcell
    }

    /// Internal quantum efficiency of the exciton at the bulk radiative rate.
    pub fn eta_qe_x(&self) -> f64 {
        let denom = self.gamma_r + self.gamma_nr_exciton();
        if denom == 0.0 {
            0.0
        } else {
            self.gamma_r / denom
        }
    }

    /// Internal quantum efficiency with the Purcell-enhanced radiative rate.
    pub fn eta_qe_x_purcell(&self) -> f64 {
        let denom = self.gamma_r_exciton() + self.gamma_nr_exciton();
        if denom == 0.0 {
            0.0
        } else {
            self.gamma_r_exciton() / denom
        }
    }
}

/// Rates (ns⁻¹) of every event channel available from one state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    /// Recombination of (e↑, h⇓).
    pub r_rad_up_dn: f64,
    /// Recombination of (e↓, h⇑).
    pub r_rad_dn_up: f64,
    pub r_nr_e_up: f64,
    pub r_nr_e_dn: f64,
    pub r_nr_h_up: f64,
    pub r_nr_h_dn: f64,
    pub r_sf_e_up_to_dn: f64,
    pub r_sf_e_dn_to_up: f64,
    pub r_sf_h_up_to_dn: f64,
    pub r_sf_h_dn_to_up: f64,
}

impl RateVector {
    /// Components in the fixed channel order used for event selection.
    #[inline]
    pub fn as_array(&self) -> [f64; 10] {
        [
            self.r_rad_up_dn,
            self.r_rad_dn_up,
            self.r_nr_e_up,
            self.r_nr_e_dn,
            self.r_nr_h_up,
            self.r_nr_h_dn,
            self.r_sf_e_up_to_dn,
            self.r_sf_e_dn_to_up,
            self.r_sf_h_up_to_dn,
            self.r_sf_h_dn_to_up,
        ]
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    #[inline]
    pub fn radiative(&self) -> f64 {
        self.r_rad_up_dn + self.r_rad_dn_up
    }

    #[inline]
    pub fn non_radiative(&self) -> f64 {
        self.r_nr_e_up + self.r_nr_e_dn + self.r_nr_h_up + self.r_nr_h_dn
    }

    #[inline]
    pub fn spin_flip(&self) -> f64 {
        self.r_sf_e_up_to_dn + self.r_sf_e_dn_to_up + self.r_sf_h_up_to_dn + self.r_sf_h_dn_to_up
    }
}

/// Composes the channel rates of `state`.
///
/// Radiative channels follow the `min(N_e, N_h)` pairing of the spin-matched
/// columns. The Purcell factor applies only to the lone bright exciton; trion,
/// biexciton and higher complexes radiate at the bulk rate. A spin flip into a
/// full column is Pauli-blocked.
pub fn total_rates(state: &QdState, params: &RateParams) -> RateVector {
    let [eu, ed, hu, hd] = state.counts().map(f64::from);
    let purcell = if state.electrons() == 1 && state.holes() == 1 {
        params.purcell
    } else {
        1.0
    };
    let gamma_r = params.gamma_r * purcell;
    let flip = |from: Column| {
        if state.is_column_full(from.flipped()) {
            0.0
        } else {
            f64::from(state.count(from)) * params.gamma_sf
        }
    };
    RateVector {
        r_rad_up_dn: eu.min(hd) * gamma_r,
        r_rad_dn_up: ed.min(hu) * gamma_r,
        r_nr_e_up: eu * params.gamma_nr,
        r_nr_e_dn: ed * params.gamma_nr,
        r_nr_h_up: hu * params.gamma_nr,
        r_nr_h_dn: hd * params.gamma_nr,
        r_sf_e_up_to_dn: flip(Column::ElectronUp),
        r_sf_e_dn_to_up: flip(Column::ElectronDown),
        r_sf_h_up_to_dn: flip(Column::HoleUp),
        r_sf_h_dn_to_up: flip(Column::HoleDown),
    }
}
