//! Single and double exponential fits with Poisson-aware weights.
//!
//! The objective is `Σ (y - f(x))² / max(y, 1)`, minimized by damped
//! Gauss-Newton (Levenberg-Marquardt) over amplitudes and log-rates. Rates
//! stay positive by construction and amplitudes are projected onto `a >= 0`.
//! Three starts are seeded from log-slopes of the segments holding the first
//! half and the last tenth of the counts, and of the whole curve; the best
//! fit is kept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitOrder {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleExponential {
    pub amplitude: f64,
    pub rate: f64,
}

/// `a_fast·exp(-γ_fast·x) + a_slow·exp(-γ_slow·x)` with `γ_fast >= γ_slow`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiExponential {
    pub a_fast: f64,
    pub a_slow: f64,
    pub gamma_fast: f64,
    pub gamma_slow: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExpFit {
    Single {
        model: SingleExponential,
        residual: f64,
    },
    Double {
        model: BiExponential,
        residual: f64,
    },
}

impl ExpFit {
    /// Weighted sum of squared residuals at the optimum.
    pub fn residual(&self) -> f64 {
        match self {
            ExpFit::Single { residual, .. } | ExpFit::Double { residual, .. } => *residual,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExpFit::Single { model, .. } => model.amplitude * (-model.rate * x).exp(),
            ExpFit::Double { model, .. } => {
                model.a_fast * (-model.gamma_fast * x).exp()
                    + model.a_slow * (-model.gamma_slow * x).exp()
            }
        }
    }

    /// `(γ_fast, γ_slow)`; a single exponential reports its rate twice.
    pub fn rates(&self) -> (f64, f64) {
        match self {
            ExpFit::Single { model, .. } => (model.rate, model.rate),
            ExpFit::Double { model, .. } => (model.gamma_fast, model.gamma_slow),
        }
    }
}

/// Parameters are `[a_1, ln γ_1, a_2, ln γ_2, ...]`.
fn model_eval(params: &[f64], x: f64) -> f64 {
    params
        .chunks_exact(2)
        .map(|p| p[0] * (-p[1].exp() * x).exp())
        .sum()
}

fn objective(params: &[f64], x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| {
            let r = yi - model_eval(params, xi);
            wi * r * r
        })
        .sum()
}

/// Weighted linear least squares for the amplitudes at fixed rates.
fn amplitudes_for(rates: &[f64], x: &[f64], y: &[f64], w: &[f64]) -> Option<Vec<f64>> {
    let k = rates.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let basis: Vec<f64> = rates.iter().map(|g| (-g * xi).exp()).collect();
        for r in 0..k {
            b[r] += wi * basis[r] * yi;
            for c in 0..k {
                a[(r, c)] += wi * basis[r] * basis[c];
            }
        }
    }
    a.lu().solve(&b).map(|v| v.iter().map(|&c| c.max(0.0)).collect())
}

fn project(params: &mut [f64]) {
    for p in params.chunks_exact_mut(2) {
        p[0] = p[0].max(0.0);
    }
}

fn levenberg_marquardt(start: Vec<f64>, x: &[f64], y: &[f64], w: &[f64]) -> (Vec<f64>, f64) {
    let m = start.len();
    let mut params = start;
    let mut cost = objective(&params, x, y, w);
    let mut lambda = 1e-3;
    let mut quiet_steps = 0;
    for _ in 0..2000 {
        let mut jtj = DMatrix::<f64>::zeros(m, m);
        let mut jtr = DVector::<f64>::zeros(m);
        let mut row = vec![0.0; m];
        for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
            let mut f = 0.0;
            for (j, p) in params.chunks_exact(2).enumerate() {
                let rate = p[1].exp();
                let e = (-rate * xi).exp();
                f += p[0] * e;
                row[2 * j] = e;
                row[2 * j + 1] = -p[0] * rate * xi * e;
            }
            let r = yi - f;
            for a in 0..m {
                jtr[a] += wi * row[a] * r;
                for b in 0..m {
                    jtj[(a, b)] += wi * row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        let floor = 1e-12 * (0..m).map(|d| jtj[(d, d)]).fold(0.0, f64::max) + 1e-300;
        while lambda < 1e20 {
            let mut damped = jtj.clone();
            for d in 0..m {
                damped[(d, d)] += lambda * jtj[(d, d)].max(floor);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            project(&mut trial);
            let trial_cost = objective(&trial, x, y, w);
            if trial_cost.is_finite() && trial_cost < cost {
                let relative = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                params = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                quiet_steps = if relative < 1e-13 { quiet_steps + 1 } else { 0 };
                break;
            }
            lambda *= 4.0;
        }
        if !improved || quiet_steps >= 3 {
            break;
        }
    }
    (params, cost)
}

/// Least-squares slope of `ln y` on the positive samples of a segment.
fn log_slope_rate(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &yi)| yi > 0.0)
        .map(|(&xi, &yi)| (xi, yi.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rate = -sxy / sxx;
    (sxx > 0.0 && rate.is_finite() && rate > 0.0).then_some(rate)
}

/// First index at which the running sum of `y` reaches `q` of the total.
fn quantile_index(y: &[f64], q: f64) -> usize {
    let total: f64 = y.iter().sum();
    let mut acc = 0.0;
    for (i, &v) in y.iter().enumerate() {
        acc += v;
        if acc >= q * total {
            return i + 1;
        }
    }
    y.len()
}

/// Fits one or two exponentials to `(x, y)` samples.
pub fn fit_exponentials(x: &[f64], y: &[f64], order: FitOrder) -> Result<ExpFit> {
    if x.len() != y.len() {
        return Err(Error::DegenerateData("x and y differ in length".into()));
    }
    if x.len() < 4 {
        return Err(Error::DegenerateData(format!("{} samples, need at least 4", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) || y.iter().any(|&v| v < 0.0) {
        return Err(Error::DegenerateData("samples must be finite with y >= 0".into()));
    }
    if y[1..].iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateData("all counts beyond the first bin are zero".into()));
    }
    let w: Vec<f64> = y.iter().map(|&v| 1.0 / v.max(1.0)).collect();

    let n = x.len();
    let span = (x[n - 1] - x[0]).abs().max(f64::MIN_POSITIVE);
    let fallback = 1.0 / span;
    let head = quantile_index(y, 0.5).max(2).min(n);
    let tail = quantile_index(y, 0.9).min(n - 2);
    let early = log_slope_rate(&x[..head], &y[..head]).unwrap_or(fallback);
    let late = log_slope_rate(&x[tail..], &y[tail..]).unwrap_or(fallback);
    let whole = log_slope_rate(x, y).unwrap_or(fallback);

    let rate_starts: Vec<Vec<f64>> = match order {
        FitOrder::One => vec![vec![early], vec![whole], vec![late]],
        FitOrder::Two => {
            let (hi, lo) = if early >= late { (early, late) } else { (late, early) };
            let lo = if lo >= hi { hi / 5.0 } else { lo };
            vec![vec![hi, lo], vec![2.0 * hi, 0.5 * lo], vec![whole * 3.0, whole / 3.0]]
        }
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for rates in rate_starts {
        let Some(amps) = amplitudes_for(&rates, x, y, &w) else {
            continue;
        };
        let mut start: Vec<f64> = amps
            .iter()
            .zip(&rates)
            .flat_map(|(&a, &g)| [a, g.ln()])
            .collect();
        if start.chunks_exact(2).all(|p| p[0] == 0.0) {
            // Give the optimizer a non-flat starting point.
            start[0] = y.iter().copied().fold(0.0, f64::max);
        }
        let (params, cost) = levenberg_marquardt(start, x, y, &w);
        let finite = cost.is_finite() && params.iter().all(|p| p.is_finite());
        if finite && best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((params, cost));
        }
    }
    let (params, residual) =
        best.ok_or_else(|| Error::NonConvergence("no start produced a finite fit".into()))?;
    Ok(match order {
        FitOrder::One => ExpFit::Single {
            model: SingleExponential {
                amplitude: params[0],
                rate: params[1].exp(),
            },
            residual,
        },
        FitOrder::Two => {
            let (mut a1, mut g1) = (params[0], params[1].exp());
            let (mut a2, mut g2) = (params[2], params[3].exp());
            if g2 > g1 {
                std::mem::swap(&mut a1, &mut a2);
                std::mem::swap(&mut g1, &mut g2);
            }
            ExpFit::Double {
                model: BiExponential {
                    a_fast: a1,
                    a_slow: a2,
                    gamma_fast: g1,
                    gamma_slow: g2,
                },
                residual,
            }
        }
    })
}
