use nalgebra::{DMatrix, DVector, RowDVector};

use super::expm::expm;
use crate::error::{Error, Result};
use crate::excitation::{inject_resonant, CaptureStatistics, Scheme};
use crate::kinetics::{total_rates, Column, EventKind, ExcitonClass, QdState, RateParams};

/// Expected photons per period for each [`ExcitonClass`], indexed by
/// [`ExcitonClass::index`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassProbabilities(pub [f64; 5]);

impl ClassProbabilities {
    pub fn get(&self, class: ExcitonClass) -> f64 {
        self.0[class.index()]
    }
}

/// Exact continuous-time Markov chain over every count tuple of a small dot.
#[derive(Clone, Debug)]
pub struct CtmcModel {
    n_levels: u8,
    states: Vec<QdState>,
    /// Row convention: `generator[(from, to)]`, rows sum to zero.
    generator: DMatrix<f64>,
    /// Row-stochastic map applied at every pulse.
    pulse_map: DMatrix<f64>,
    /// Radiative rate of each state, in the column of the class it emits.
    emission: DMatrix<f64>,
}

impl CtmcModel {
    pub const MAX_LEVELS: u8 = 3;

    pub fn new(params: &RateParams, scheme: &Scheme, n_levels: u8) -> Result<Self> {
        params.validate()?;
        scheme.validate()?;
        if n_levels == 0 || n_levels > Self::MAX_LEVELS {
            return Err(Error::param(
                "n_levels",
                format!("exact chain supports 1..={} levels, got {n_levels}", Self::MAX_LEVELS),
            ));
        }
        let side = n_levels + 1;
        let mut states = Vec::with_capacity(usize::from(side).pow(4));
        for eu in 0..side {
            for ed in 0..side {
                for hu in 0..side {
                    for hd in 0..side {
                        states.push(QdState::new(n_levels, eu, ed, hu, hd)?);
                    }
                }
            }
        }
        let n = states.len();
        let mut model = Self {
            n_levels,
            states,
            generator: DMatrix::zeros(n, n),
            pulse_map: DMatrix::zeros(n, n),
            emission: DMatrix::zeros(n, 5),
        };
        model.build_generator(params)?;
        model.build_pulse_map(scheme)?;
        Ok(model)
    }

    pub fn states(&self) -> &[QdState] {
        &self.states
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn pulse_map(&self) -> &DMatrix<f64> {
        &self.pulse_map
    }

    pub fn index_of(&self, state: &QdState) -> usize {
        let side = usize::from(self.n_levels) + 1;
        state
            .counts()
            .iter()
            .fold(0, |idx, &c| idx * side + usize::from(c))
    }

    fn build_generator(&mut self, params: &RateParams) -> Result<()> {
        for (i, state) in self.states.iter().enumerate() {
            let rates = total_rates(state, params);
            for (kind, rate) in EventKind::CHANNELS.into_iter().zip(rates.as_array()) {
                if rate > 0.0 {
                    let j = self.index_of(&kind.apply(state)?);
                    self.generator[(i, j)] += rate;
                    self.generator[(i, i)] -= rate;
                }
            }
            let radiative = rates.radiative();
            if radiative > 0.0 {
                let class = ExcitonClass::from_totals(state.electrons(), state.holes());
                self.emission[(i, class.index())] = radiative;
            }
        }
        Ok(())
    }

    fn build_pulse_map(&mut self, scheme: &Scheme) -> Result<()> {
        match *scheme {
            Scheme::Resonant { polarization } => {
                for (i, state) in self.states.iter().enumerate() {
                    let j = self.index_of(&inject_resonant(state, polarization));
                    self.pulse_map[(i, j)] = 1.0;
                }
            }
            Scheme::NonResonant { p_in, capture } => {
                let full = self.index_of(&QdState::full(self.n_levels)?);
                let cap = 2 * self.n_levels;
                for i in 0..self.states.len() {
                    let state = self.states[i];
                    let free_e = cap - state.electrons();
                    let free_h = cap - state.holes();
                    match capture {
                        CaptureStatistics::Paired => {
                            let saturating = free_e.max(free_h);
                            let mut mass = 0.0;
                            for (pairs, pmf) in poisson_pmf(p_in, saturating) {
                                mass += pmf;
                                let electrons =
                                    capture_distribution(&state, Column::ElectronUp, pairs);
                                let holes = capture_distribution(&state, Column::HoleUp, pairs);
                                for &((eu, ed), pe) in &electrons {
                                    for &((hu, hd), ph) in &holes {
                                        let target = QdState::new(self.n_levels, eu, ed, hu, hd)?;
                                        let j = self.index_of(&target);
                                        self.pulse_map[(i, j)] += pmf * pe * ph;
                                    }
                                }
                            }
                            // Every pulse with `saturating` or more pairs fills the dot.
                            self.pulse_map[(i, full)] += (1.0 - mass).max(0.0);
                        }
                        CaptureStatistics::Independent => {
                            let electrons =
                                poisson_capture(&state, Column::ElectronUp, p_in, free_e);
                            let holes = poisson_capture(&state, Column::HoleUp, p_in, free_h);
                            for &((eu, ed), pe) in &electrons {
                                for &((hu, hd), ph) in &holes {
                                    let target = QdState::new(self.n_levels, eu, ed, hu, hd)?;
                                    let j = self.index_of(&target);
                                    self.pulse_map[(i, j)] += pe * ph;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Evolution over one period and the integrated per-class emission.
    ///
    /// Returns `(E, F)` with `E = exp(Q·T)` and `F = ∫₀ᵀ exp(Q·t) dt · R`,
    /// both from a single exponential of the block matrix `[[Q, R], [0, 0]]`.
    pub fn period_operators(&self, period: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::param("period_t", "must be > 0"));
        }
        let n = self.states.len();
        let mut block = DMatrix::zeros(n + 5, n + 5);
        block.view_mut((0, 0), (n, n)).copy_from(&self.generator);
        block.view_mut((0, n), (n, 5)).copy_from(&self.emission);
        let e = expm(&(block * period));
        Ok((
            e.view((0, 0), (n, n)).into_owned(),
            e.view((0, n), (n, 5)).into_owned(),
        ))
    }

    /// Distribution of the state just before a pulse in the periodic steady
    /// state reached from an empty dot.
    pub fn stationary_cycle_start(&self, period: f64) -> Result<DVector<f64>> {
        let (evolution, _) = self.period_operators(period)?;
        self.stationary_from(&(&self.pulse_map * evolution))
    }

    fn stationary_from(&self, cycle_map: &DMatrix<f64>) -> Result<DVector<f64>> {
        const TOL: f64 = 1e-12;
        const ITERS_PER_LEVEL: usize = 200;
        const MAX_DOUBLINGS: usize = 64;
        let n = self.states.len();
        let mut pi = RowDVector::zeros(n);
        pi[self.index_of(&QdState::empty(self.n_levels)?)] = 1.0;
        let mut map = cycle_map.clone();
        // Power iteration; after each block of iterations the map is squared
        // so slowly mixing chains still converge in bounded work.
        for _ in 0..MAX_DOUBLINGS {
            for _ in 0..ITERS_PER_LEVEL {
                let mut next = &pi * &map;
                // Rounding in long-period operators leaks mass; keep pi on the simplex.
                let total = next.sum();
                next /= total;
                let residual = (&next - &pi).abs().sum();
                pi = next;
                if residual < TOL {
                    return Ok(pi.transpose());
                }
            }
            map = &map * &map;
        }
        Err(Error::NonConvergence(
            "cycle-start distribution did not settle; the chain may be reducible".into(),
        ))
    }

    /// Expected photons per period for each class in the periodic steady state.
    pub fn emission_probability(&self, period: f64) -> Result<ClassProbabilities> {
        let (evolution, flux) = self.period_operators(period)?;
        let start = self.stationary_from(&(&self.pulse_map * &evolution))?;
        let after_pulse = start.transpose() * &self.pulse_map;
        let per_class = after_pulse * flux;
        let mut out = [0.0; 5];
        for (o, v) in out.iter_mut().zip(per_class.iter()) {
            *o = *v;
        }
        Ok(ClassProbabilities(out))
    }
}

/// `(k, P(k))` for `k < limit` under a Poisson law of mean `mean`.
fn poisson_pmf(mean: f64, limit: u8) -> impl Iterator<Item = (u8, f64)> {
    (0..limit).scan(1.0, move |pmf, k| {
        *pmf = if k == 0 {
            (-mean).exp()
        } else {
            *pmf * mean / f64::from(k)
        };
        Some((k, *pmf))
    })
}

/// Column counts of one carrier type after a Poisson number of captures.
fn poisson_capture(state: &QdState, up_col: Column, mean: f64, free: u8) -> Vec<((u8, u8), f64)> {
    let n = state.n_levels();
    let mut out: Vec<((u8, u8), f64)> = Vec::new();
    let mut mass = 0.0;
    let mut add = |key: (u8, u8), p: f64| match out.iter_mut().find(|(k, _)| *k == key) {
        Some(entry) => entry.1 += p,
        None => out.push((key, p)),
    };
    for (k, pmf) in poisson_pmf(mean, free) {
        mass += pmf;
        for (key, p) in capture_distribution(state, up_col, k) {
            add(key, pmf * p);
        }
    }
    // `free` or more captures fill both columns of this carrier type.
    add((n, n), (1.0 - mass).max(0.0));
    out
}

/// Distribution of `(up, down)` counts after `carriers` captures of one
/// carrier type; `up_col` names the up-spin column of that type.
fn capture_distribution(state: &QdState, up_col: Column, carriers: u8) -> Vec<((u8, u8), f64)> {
    let n = state.n_levels();
    let start = (state.count(up_col), state.count(up_col.flipped()));
    let side = usize::from(n) + 1;
    let mut dist = vec![0.0; side * side];
    dist[usize::from(start.0) * side + usize::from(start.1)] = 1.0;
    for _ in 0..carriers {
        let mut next = vec![0.0; side * side];
        for up in 0..=n {
            for dn in 0..=n {
                let p = dist[usize::from(up) * side + usize::from(dn)];
                if p == 0.0 {
                    continue;
                }
                let prefer_up = if up < n {
                    (up + 1, dn)
                } else if dn < n {
                    (up, dn + 1)
                } else {
                    (up, dn)
                };
                let prefer_dn = if dn < n {
                    (up, dn + 1)
                } else if up < n {
                    (up + 1, dn)
                } else {
                    (up, dn)
                };
                for (u, d) in [prefer_up, prefer_dn] {
                    next[usize::from(u) * side + usize::from(d)] += 0.5 * p;
                }
            }
        }
        dist = next;
    }
    let mut out = Vec::new();
    for up in 0..=n {
        for dn in 0..=n {
            let p = dist[usize::from(up) * side + usize::from(dn)];
            if p > 0.0 {
                out.push(((up, dn), p));
            }
        }
    }
    out
}

/// Exact steady-state photons per period for each class.
pub fn ctmc_emission_probability(
    params: &RateParams,
    scheme: &Scheme,
    n_levels: u8,
    period: f64,
) -> Result<ClassProbabilities> {
    CtmcModel::new(params, scheme, n_levels)?.emission_probability(period)
}
