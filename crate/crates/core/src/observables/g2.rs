use serde::{Deserialize, Serialize};

use super::{Detector, PhotonRecord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Normalization {
    Raw,
    /// Divide by the mean coincidence level over the largest |τ| decade,
    /// `max_lag / 10 <= |τ| <= max_lag`.
    Plateau,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G2Point {
    pub tau: f64,
    pub raw: u64,
    /// NaN when the plateau holds no coincidences.
    pub normalized: f64,
}

/// Coincidences between detector I at `t` and detector II at `t + τ`,
/// for `τ = k·bin`, `-lags <= k <= lags`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Histogram {
    bin: f64,
    lags: usize,
    counts: Vec<u64>,
}

impl G2Histogram {
    pub(crate) fn from_counts(bin: f64, lags: usize, counts: Vec<u64>) -> Self {
        debug_assert_eq!(counts.len(), 2 * lags + 1);
        Self { bin, lags, counts }
    }

    pub fn bin(&self) -> f64 {
        self.bin
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn raw_at_lag(&self, k: i64) -> u64 {
        let idx = k + self.lags as i64;
        if idx < 0 {
            return 0;
        }
        self.counts.get(idx as usize).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &G2Histogram) -> Result<()> {
        if self.bin != other.bin || self.lags != other.lags {
            return Err(Error::LayoutMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Mean raw coincidence level over the largest |τ| decade.
    pub fn plateau(&self) -> Option<f64> {
        let max_k = self.lags as i64;
        let min_k = ((self.lags as f64) / 10.0).ceil().max(1.0) as i64;
        if max_k < min_k {
            return None;
        }
        let (sum, n) = (min_k..=max_k)
            .flat_map(|k| [k, -k])
            .fold((0u64, 0u64), |(s, n), k| (s + self.raw_at_lag(k), n + 1));
        let mean = sum as f64 / n as f64;
        (mean > 0.0).then_some(mean)
    }

    pub fn curve(&self, normalization: G2Normalization) -> Vec<G2Point> {
        let scale = match normalization {
            G2Normalization::Raw => Some(1.0),
            G2Normalization::Plateau => self.plateau(),
        };
        let lags = self.lags as i64;
        (-lags..=lags)
            .map(|k| {
                let raw = self.raw_at_lag(k);
                G2Point {
                    tau: k as f64 * self.bin,
                    raw,
                    normalized: scale.map_or(f64::NAN, |s| raw as f64 / s),
                }
            })
            .collect()
    }

    /// Normalized value at `k` bins.
    pub fn normalized_at_lag(&self, k: i64, normalization: G2Normalization) -> f64 {
        let raw = self.raw_at_lag(k) as f64;
        match normalization {
            G2Normalization::Raw => raw,
            G2Normalization::Plateau => self.plateau().map_or(f64::NAN, |p| raw / p),
        }
    }
}

/// Coincidence histogram of one recorded photon stream.
///
/// `photons` must be time-ordered and belong to a single trajectory of
/// length `span` ns.
pub fn g2_correlate(
    photons: &[PhotonRecord],
    delta_t: f64,
    max_lag: f64,
    span: f64,
) -> Result<G2Histogram> {
    if !(delta_t > 0.0) {
        return Err(Error::param("delta_t", "must be > 0"));
    }
    if max_lag > span {
        return Err(Error::LagExceedsSpan { max_lag, span });
    }
    let lags = super::G2Config {
        bin: delta_t,
        max_lag,
    }
    .lag_bins();
    let mut counts = vec![0u64; 2 * lags + 1];
    let bins_of = |d: Detector| -> Vec<i64> {
        photons
            .iter()
            .filter(|p| p.detector == d)
            .map(|p| (p.t_abs / delta_t).floor() as i64)
            .collect()
    };
    let first = bins_of(Detector::I);
    let second = bins_of(Detector::II);
    let lags_i = lags as i64;
    let mut start = 0;
    for &b1 in &first {
        while start < second.len() && second[start] < b1 - lags_i {
            start += 1;
        }
        for &b2 in second[start..].iter().take_while(|&&b2| b2 <= b1 + lags_i) {
            counts[(b2 - b1 + lags_i) as usize] += 1;
        }
    }
    Ok(G2Histogram::from_counts(delta_t, lags, counts))
}
