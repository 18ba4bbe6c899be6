use super::{argmax, run_sweep, Axis, AxisValues, GridSpec, SweepOptions};
use crate::error::{Error, Result};
use crate::kinetics::ExcitonClass;

/// Exciton and biexciton output against pump power.
#[derive(Clone, Debug, PartialEq)]
pub struct SaturationCurve {
    pub p_in: Vec<f64>,
    pub x: Vec<f64>,
    pub x_err: Vec<f64>,
    pub xx: Vec<f64>,
    pub xx_err: Vec<f64>,
}

impl SaturationCurve {
    /// Pump power of the largest exciton output.
    pub fn x_peak(&self) -> Option<f64> {
        argmax(&self.x).map(|i| self.p_in[i])
    }

    pub fn xx_peak(&self) -> Option<f64> {
        argmax(&self.xx).map(|i| self.p_in[i])
    }

    /// Least-squares slope of ln P_out against ln P_in over `[lo, hi]`.
    pub fn log_slope(&self, class: ExcitonClass, lo: f64, hi: f64) -> Result<f64> {
        let ys = match class {
            ExcitonClass::X => &self.x,
            ExcitonClass::XX => &self.xx,
            _ => return Err(Error::param("class", "only X and XX are scanned")),
        };
        let pts: Vec<(f64, f64)> = self
            .p_in
            .iter()
            .zip(ys)
            .filter(|(p, y)| **p >= lo * (1.0 - 1e-9) && **p <= hi * (1.0 + 1e-9) && **y > 0.0)
            .map(|(p, y)| (p.ln(), y.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::DegenerateData(format!(
                "{} positive points in [{lo}, {hi}]",
                pts.len()
            )));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }
}

/// Runs `base` over the given pump powers. `base` must be non-resonant.
pub fn saturation_scan(base: &GridSpec, p_in: &[f64], options: &SweepOptions) -> Result<SaturationCurve> {
    let mut spec = base.clone();
    spec.axes = vec![AxisValues {
        axis: Axis::PIn,
        values: p_in.to_vec(),
    }];
    let r = run_sweep(&spec, options)?;
    let pick = |class, err: bool| {
        r.points
            .iter()
            .map(|p| if err { p.stderr(class) } else { p.p_out(class) })
            .collect::<Vec<_>>()
    };
    Ok(SaturationCurve {
        p_in: p_in.to_vec(),
        x: pick(ExcitonClass::X, false),
        x_err: pick(ExcitonClass::X, true),
        xx: pick(ExcitonClass::XX, false),
        xx_err: pick(ExcitonClass::XX, true),
    })
}

/// Exciton output over repetition period and non-radiative rate.
#[derive(Clone, Debug, PartialEq)]
pub struct RepetitionMap {
    pub period_t: Vec<f64>,
    pub gamma_nr: Vec<f64>,
    /// `p_x[i][j]` belongs to `period_t[i]` and `gamma_nr[j]`.
    pub p_x: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

impl RepetitionMap {
    /// For each period, the index of the brightest non-radiative rate.
    pub fn ridge(&self) -> Vec<usize> {
        self.p_x.iter().map(|row| argmax(row).unwrap_or(0)).collect()
    }

    /// For each period, the index of the rate closest to 1/T in log scale.
    pub fn diagonal(&self) -> Vec<usize> {
        self.period_t
            .iter()
            .map(|&t| {
                let dist = |g: f64| (g * t).ln().abs();
                let mut best = 0;
                for (j, &g) in self.gamma_nr.iter().enumerate() {
                    if dist(g) < dist(self.gamma_nr[best]) {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

/// Runs `base` over every (T, Γnr) pair, T varying slowest.
pub fn repetition_scan(
    base: &GridSpec,
    period_t: &[f64],
    gamma_nr: &[f64],
    options: &SweepOptions,
) -> Result<RepetitionMap> {
    let mut spec = base.clone();
    spec.axes = vec![
        AxisValues {
            axis: Axis::PeriodT,
            values: period_t.to_vec(),
        },
        AxisValues {
            axis: Axis::GammaNr,
            values: gamma_nr.to_vec(),
        },
    ];
    let r = run_sweep(&spec, options)?;
    let cols = gamma_nr.len();
    let grid = |err: bool| {
        r.points
            .chunks(cols)
            .map(|row| {
                row.iter()
                    .map(|p| {
                        if err {
                            p.stderr(ExcitonClass::X)
                        } else {
                            p.p_out(ExcitonClass::X)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    Ok(RepetitionMap {
        period_t: period_t.to_vec(),
        gamma_nr: gamma_nr.to_vec(),
        p_x: grid(false),
        stderr: grid(true),
    })
}
