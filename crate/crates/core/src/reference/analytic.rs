use crate::error::{Error, Result};
use crate::kinetics::RateParams;

/// Two-level bright/dark exciton model.
///
/// ```text
/// ρb' = -(Γr·F_P + 2Γnr + 2Γsf) ρb + 2Γsf ρd
/// ρd' = 2Γsf ρb - (2Γnr + 2Γsf) ρd
/// ```
///
/// The matrix is symmetric, so the solution is a sum of two exponentials
/// along orthogonal eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrightDark {
    emit: f64,
    bright_loss: f64,
    dark_loss: f64,
    coupling: f64,
}

/// One exponential mode `amp · exp(-rate·t)` of the bright population.
#[derive(Clone, Copy, Debug)]
struct Mode {
    rate: f64,
    bright: f64,
    dark: f64,
}

impl BrightDark {
    pub fn new(params: &RateParams) -> Self {
        let emit = params.gamma_r_exciton();
        let coupling = params.gamma_sf_exciton();
        let dark_loss = params.gamma_nr_exciton() + coupling;
        Self {
            emit,
            bright_loss: emit + dark_loss,
            dark_loss,
            coupling,
        }
    }

    /// `(Γ_fast, Γ_slow)`, the decay rates of the two modes.
    pub fn rates(&self) -> (f64, f64) {
        let (a, d, c) = (self.bright_loss, self.dark_loss, self.coupling);
        let mean = 0.5 * (a + d);
        let split = (0.25 * (a - d) * (a - d) + c * c).sqrt();
        let fast = mean + split;
        let slow = if fast > 0.0 { (a * d - c * c) / fast } else { 0.0 };
        (fast, slow)
    }

    fn modes(&self, initial: (f64, f64)) -> [Mode; 2] {
        let (b0, d0) = initial;
        let (a, d, c) = (self.bright_loss, self.dark_loss, self.coupling);
        if c == 0.0 {
            return [
                Mode {
                    rate: a,
                    bright: b0,
                    dark: 0.0,
                },
                Mode {
                    rate: d,
                    bright: 0.0,
                    dark: d0,
                },
            ];
        }
        let (fast, slow) = self.rates();
        // Eigenvector of the slow (largest) eigenvalue of [[-a, c], [c, -d]].
        let theta = 0.5 * (2.0 * c).atan2(d - a);
        let (s, co) = theta.sin_cos();
        let slow_proj = co * b0 + s * d0;
        let fast_proj = -s * b0 + co * d0;
        [
            Mode {
                rate: fast,
                bright: -s * fast_proj,
                dark: co * fast_proj,
            },
            Mode {
                rate: slow,
                bright: co * slow_proj,
                dark: s * slow_proj,
            },
        ]
    }

    /// `(ρb(t), ρd(t))` from the given initial populations.
    pub fn populations(&self, t: f64, initial: (f64, f64)) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::param("t", format!("must be >= 0, got {t}")));
        }
        Ok(self
            .modes(initial)
            .iter()
            .fold((0.0, 0.0), |(b, d), m| {
                let e = (-m.rate * t).exp();
                (b + m.bright * e, d + m.dark * e)
            }))
    }

    /// Bright-exciton photon emission rate `Γr·F_P·ρb(t)`.
    pub fn emission_density(&self, t: f64, initial: (f64, f64)) -> Result<f64> {
        Ok(self.emit * self.populations(t, initial)?.0)
    }

    /// Mean of `Γr·F_P·Σ_k ρb(t + kT)` over `[t0, t1]`: the emission of an
    /// excitation repeated every `period`, averaged over one histogram bin.
    pub fn periodic_bin_average(
        &self,
        t0: f64,
        t1: f64,
        period: f64,
        initial: (f64, f64),
    ) -> Result<f64> {
        if !(t0 >= 0.0 && t1 > t0 && period > 0.0) {
            return Err(Error::param("bin", format!("need 0 <= t0 < t1, got [{t0}, {t1}]")));
        }
        let mut total = 0.0;
        for m in self.modes(initial) {
            if m.bright == 0.0 {
                continue;
            }
            if m.rate <= 0.0 {
                return Err(Error::DegenerateData(
                    "bright population never decays; periodic sum diverges".into(),
                ));
            }
            let wrap = -(-m.rate * period).exp_m1();
            let integral = ((-m.rate * t0).exp() - (-m.rate * t1).exp()) / m.rate;
            total += m.bright * integral / (t1 - t0) / wrap;
        }
        Ok(self.emit * total)
    }
}

/// Populations after an exciton is prepared in the bright state at `t = 0`.
pub fn analytic_bright_dark(params: &RateParams, t: f64) -> Result<(f64, f64)> {
    BrightDark::new(params).populations(t, (1.0, 0.0))
}

/// Expected normalized X decay curve for above-band pumping in the
/// low-power limit, on the same bins as the simulated histogram.
///
/// Only single-pair pulses (probability `p_in·e^{-p_in}`) are counted. Random
/// spins make the captured pair bright or dark with equal odds, and dark
/// excitons carried over from earlier pulses add the periodic tail. Values
/// are photons per ns per pulse divided by `p_in`.
pub fn low_power_decay_curve(
    params: &RateParams,
    period: f64,
    p_in: f64,
    bin: f64,
    n_bins: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(p_in > 0.0) {
        return Err(Error::param("p_in", "must be > 0"));
    }
    let model = BrightDark::new(params);
    let weight = (-p_in).exp();
    (0..n_bins)
        .map(|i| {
            let t0 = i as f64 * bin;
            let t1 = ((i + 1) as f64 * bin).min(period);
            let v = model.periodic_bin_average(t0, t1, period, (0.5, 0.5))?;
            Ok((0.5 * (t0 + t1), weight * v))
        })
        .collect()
}
