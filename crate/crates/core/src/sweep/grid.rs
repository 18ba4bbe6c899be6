use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excitation::Scheme;
use crate::kinetics::RateParams;

/// A swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    GammaNr,
    GammaSf,
    Purcell,
    PeriodT,
    PIn,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::GammaNr => "gamma_nr",
            Axis::GammaSf => "gamma_sf",
            Axis::Purcell => "purcell",
            Axis::PeriodT => "period_t",
            Axis::PIn => "p_in",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisValues {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// `n` points evenly spaced in log scale from `start` to `end` inclusive.
pub fn logspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), end.ln());
            let mut v: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            // Endpoints exactly as given, not as exp(ln(x)).
            v[0] = start;
            v[n - 1] = end;
            v
        }
    }
}

/// `n` points evenly spaced from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// A Cartesian parameter grid and the simulation budget for each point.
///
/// Values not covered by an axis are taken from `base`, `period_t` and
/// `scheme`. Points are enumerated with the first axis varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<AxisValues>,
    pub base: RateParams,
    pub period_t: f64,
    pub scheme: Scheme,
    pub n_levels: u8,
    pub cycles_per_point: u64,
    /// Cycles simulated before estimators start counting.
    pub burn_in_cycles: u64,
    /// Batches used for the batch-means standard error.
    pub batches: u32,
    pub seed_base: u64,
}

impl GridSpec {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            axes: Vec::new(),
            base: RateParams::default(),
            period_t: 10.0,
            scheme,
            n_levels: 2,
            cycles_per_point: 1_000_000,
            burn_in_cycles: 1_000,
            batches: 50,
            seed_base: 0,
        }
    }

    pub fn with_axis(mut self, axis: Axis, values: Vec<f64>) -> Self {
        self.axes.push(AxisValues { axis, values });
        self
    }

    pub fn with_base(mut self, base: RateParams) -> Self {
        self.base = base;
        self
    }

    pub fn with_period(mut self, period_t: f64) -> Self {
        self.period_t = period_t;
        self
    }

    pub fn with_cycles(mut self, cycles_per_point: u64) -> Self {
        self.cycles_per_point = cycles_per_point;
        self
    }

    pub fn with_seed(mut self, seed_base: u64) -> Self {
        self.seed_base = seed_base;
        self
    }

    pub fn with_levels(mut self, n_levels: u8) -> Self {
        self.n_levels = n_levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.scheme.validate()?;
        if !self.period_t.is_finite() || self.period_t <= 0.0 {
            return Err(Error::param("period_t", format!("must be > 0, got {}", self.period_t)));
        }
        if self.n_levels == 0 {
            return Err(Error::param("n_levels", "must be >= 1"));
        }
        if self.batches == 0 {
            return Err(Error::param("batches", "must be >= 1"));
        }
        if self.cycles_per_point < u64::from(self.batches) {
            return Err(Error::param(
                "cycles_per_point",
                format!("must be at least the batch count {}", self.batches),
            ));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(Error::param("axes", format!("axis {} is empty", a.axis.label())));
            }
            if self.axes[..i].iter().any(|b| b.axis == a.axis) {
                return Err(Error::param("axes", format!("axis {} repeated", a.axis.label())));
            }
            if a.axis == Axis::PIn && self.scheme.p_in().is_none() {
                return Err(Error::param("axes", "p_in axis requires non-resonant pumping"));
            }
            for &v in &a.values {
                let ok = match a.axis {
                    Axis::PeriodT => v.is_finite() && v > 0.0,
                    _ => v.is_finite() && v >= 0.0,
                };
                if !ok {
                    return Err(Error::param(
                        "axes",
                        format!("{} value {v} out of range", a.axis.label()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `index` in enumeration order.
    pub fn point(&self, index: usize) -> Result<GridPoint> {
        if index >= self.len() {
            return Err(Error::param("index", format!("{index} outside grid of {}", self.len())));
        }
        let mut params = self.base;
        let mut period_t = self.period_t;
        let mut scheme = self.scheme;
        let mut rest = index;
        for a in self.axes.iter().rev() {
            let v = a.values[rest % a.values.len()];
            rest /= a.values.len();
            match a.axis {
                Axis::GammaNr => params.gamma_nr = v,
                Axis::GammaSf => params.gamma_sf = v,
                Axis::Purcell => params.purcell = v,
                Axis::PeriodT => period_t = v,
                Axis::PIn => {
                    if let Scheme::NonResonant { p_in, .. } = &mut scheme {
                        *p_in = v;
                    }
                }
            }
        }
        Ok(GridPoint {
            index,
            params,
            period_t,
            scheme,
        })
    }

    pub fn points(&self) -> Result<Vec<GridPoint>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub params: RateParams,
    pub period_t: f64,
    pub scheme: Scheme,
}

impl GridPoint {
    pub fn p_in(&self) -> f64 {
        self.scheme.p_in().unwrap_or(0.0)
    }
}
