//! Statistical checks of the solver against exact or independently derived
//! references.

use qdot_kmc::reference::{ctmc_emission_probability, fit_exponentials, ExpFit, FitOrder};
use qdot_kmc::rng::trajectory_rng;
use qdot_kmc::sweep::{run_point, GridSpec};
use qdot_kmc::{
    run_trajectory, step_ssa, total_rates, Column, Detector, ExcitonClass, ObservableConfig,
    PhotonRecord, PulseSchedule, QdState, RateParams, Scheme, Trajectory,
};
use rand_distr::{Distribution, Poisson};

fn baseline() -> RateParams {
    RateParams::default()
}

/// Kolmogorov-Smirnov distance of `samples` from Exp(rate).
fn ks_exponential(mut samples: Vec<f64>, rate: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn waiting_times_are_exponential() {
    let params = RateParams::new(1.0, 0.1, 0.01, 1.0).unwrap();
    let mut rng = trajectory_rng(21);
    for s in [
        QdState::new(2, 1, 0, 0, 1).unwrap(),
        QdState::new(2, 2, 1, 1, 2).unwrap(),
        QdState::new(2, 0, 1, 0, 0).unwrap(),
    ] {
        let rate = total_rates(&s, &params).total();
        let waits: Vec<f64> = (0..100_000)
            .map(|_| step_ssa(&s, &params, 0.0, f64::MAX, &mut rng).unwrap().event.unwrap().time)
            .collect();
        let d = ks_exponential(waits, rate);
        // Asymptotic 1% critical value.
        let critical = 1.628 / (100_000f64).sqrt();
        assert!(d < critical, "{s}: D = {d}, critical {critical}");
    }
}

#[test]
fn channel_frequencies_follow_rates() {
    let params = RateParams::new(1.0, 0.3, 0.2, 2.0).unwrap();
    let s = QdState::new(2, 1, 1, 2, 1).unwrap();
    let rates = total_rates(&s, &params).as_array();
    let total: f64 = rates.iter().sum();
    let n = 200_000;
    let mut counts = [0u64; 10];
    let mut rng = trajectory_rng(22);
    for _ in 0..n {
        let ev = step_ssa(&s, &params, 0.0, f64::MAX, &mut rng).unwrap().event.unwrap();
        let k = qdot_kmc::EventKind::CHANNELS.iter().position(|&c| c == ev.kind).unwrap();
        counts[k] += 1;
    }
    for (k, &c) in counts.iter().enumerate() {
        let p = rates[k] / total;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let f = c as f64 / n as f64;
        assert!((f - p).abs() <= 4.0 * se.max(1e-12), "channel {k}: {f} vs {p}");
    }
}

/// Populations of a lone electron: total decays at Γnr, spin imbalance at Γnr + 2Γsf.
fn single_electron(params: &RateParams, t: f64) -> (f64, f64) {
    let total = (-params.gamma_nr * t).exp();
    let imbalance = (-(params.gamma_nr + 2.0 * params.gamma_sf) * t).exp();
    (0.5 * (total + imbalance), 0.5 * (total - imbalance))
}

#[test]
fn single_carrier_ensemble_follows_linear_rate_equations() {
    let params = RateParams::new(1.0, 0.1, 0.05, 1.0).unwrap();
    let times = [1.0, 5.0, 10.0];
    let n = 100_000;
    let mut up = [0u64; 3];
    let mut down = [0u64; 3];
    let mut rng = trajectory_rng(23);
    for _ in 0..n {
        let mut s = QdState::new(2, 1, 0, 0, 0).unwrap();
        let mut t = 0.0;
        for (i, &t_obs) in times.iter().enumerate() {
            loop {
                let step = step_ssa(&s, &params, t, t_obs, &mut rng).unwrap();
                s = step.state;
                t = step.time;
                if step.event.is_none() {
                    break;
                }
            }
            up[i] += u64::from(s.count(Column::ElectronUp));
            down[i] += u64::from(s.count(Column::ElectronDown));
        }
    }
    for (i, &t) in times.iter().enumerate() {
        let (e_up, e_dn) = single_electron(&params, t);
        for (count, expect) in [(up[i], e_up), (down[i], e_dn)] {
            let mc = count as f64 / n as f64;
            let se = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!((mc - expect).abs() <= 3.0 * se, "t = {t}: {mc} vs {expect} (se {se})");
        }
    }
}

fn photon_stream(params: RateParams, scheme: Scheme, cycles: u64, seed: u64) -> Vec<PhotonRecord> {
    let mut photons = Vec::new();
    let mut traj = Trajectory::new(params, 10.0, scheme, 2, trajectory_rng(seed)).unwrap();
    traj.run_cycles(cycles, &mut photons).unwrap();
    photons
}

#[test]
fn photon_times_increase_within_the_record() {
    let cycles = 20_000;
    let photons = photon_stream(baseline(), Scheme::nonresonant(1.5), cycles, 24);
    assert!(photons.windows(2).all(|w| w[0].t_abs < w[1].t_abs));
    let span = 10.0 * cycles as f64;
    for p in &photons {
        assert!(p.t_abs >= 0.0 && p.t_abs < span);
        assert!(p.t_in_period >= 0.0 && p.t_in_period < 10.0);
        assert_eq!(p.cycle_index, (p.t_abs / 10.0).floor() as u64);
    }
}

#[test]
fn beam_splitter_is_balanced() {
    let photons = photon_stream(baseline(), Scheme::resonant(), 100_000, 25);
    let n = photons.len() as f64;
    let first = photons.iter().filter(|p| p.detector == Detector::I).count() as f64;
    assert!((first / n - 0.5).abs() <= 3.0 * (0.25 / n).sqrt(), "{first} of {n}");
}

#[test]
fn identical_seeds_give_identical_photon_streams() {
    let a = photon_stream(baseline(), Scheme::nonresonant(0.7), 5_000, 26);
    let b = photon_stream(baseline(), Scheme::nonresonant(0.7), 5_000, 26);
    let c = photon_stream(baseline(), Scheme::nonresonant(0.7), 5_000, 27);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn lossless_resonant_dot_never_double_excites() {
    // A slow emitter often carries its exciton into the next period.
    let params = RateParams::new(0.05, 0.0, 0.0, 1.0).unwrap();
    let mut traj = Trajectory::new(params, 10.0, Scheme::resonant(), 2, trajectory_rng(28)).unwrap();
    let mut carried = 0;
    for _ in 0..20_000 {
        let mut photons: Vec<PhotonRecord> = Vec::new();
        let before = *traj.state();
        traj.run_cycles(1, &mut photons).unwrap();
        let after = *traj.state();
        assert!(photons.len() <= 1);
        assert!(after.electrons() <= 1 && after.holes() <= 1);
        if !before.is_empty() {
            carried += 1;
            // The surviving pair is the only one that can emit.
            assert_eq!(before.bright_pairs(), 1);
            assert_eq!(photons.is_empty(), !after.is_empty());
        }
    }
    assert!(carried > 1_000, "{carried}");
}

#[test]
fn multi_level_dot_matches_exact_chain() {
    let params = baseline();
    let scheme = Scheme::nonresonant(1.5);
    let exact = ctmc_emission_probability(&params, &scheme, 2, 10.0).unwrap();
    let spec = GridSpec::new(scheme).with_cycles(200_000).with_seed(29);
    let r = run_point(&spec, &spec.point(0).unwrap()).unwrap();
    for class in ExcitonClass::ALL {
        let (mc, se, e) = (r.p_out(class), r.stderr(class), exact.get(class));
        assert!((mc - e).abs() <= 3.0 * se.max(1e-9), "{class}: {mc} ± {se} vs {e}");
    }
}

#[test]
fn lossless_resonant_chain_emits_once_per_pulse_up_to_carry_over() {
    let params = RateParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let exact = ctmc_emission_probability(&params, &Scheme::resonant(), 1, 10.0).unwrap();
    assert!((exact.get(ExcitonClass::X) - 1.0).abs() < 1e-4);
    let spec = GridSpec::new(Scheme::resonant()).with_base(params).with_cycles(100_000).with_seed(30);
    let r = run_point(&spec, &spec.point(0).unwrap()).unwrap();
    let (mc, se) = (r.p_out(ExcitonClass::X), r.stderr(ExcitonClass::X));
    assert!((mc - exact.get(ExcitonClass::X)).abs() <= 3.0 * se.max(1e-5), "{mc} ± {se}");
}

#[test]
fn sweep_point_agrees_with_direct_trajectory() {
    let spec = GridSpec::new(Scheme::resonant()).with_cycles(200_000).with_seed(31);
    let point = run_point(&spec, &spec.point(0).unwrap()).unwrap();
    let schedule = PulseSchedule::new(10.0, 200_000, Scheme::resonant()).unwrap();
    let direct = run_trajectory(baseline(), &schedule, 2, 32, ObservableConfig::default()).unwrap();
    let d = direct.emission_probability(ExcitonClass::X);
    let se_d = (d * (1.0 - d) / 200_000.0).sqrt();
    let p = point.p_out(ExcitonClass::X);
    let se = (point.stderr(ExcitonClass::X).powi(2) + se_d * se_d).sqrt();
    assert!((p - d).abs() <= 3.0 * se, "{p} vs {d} (se {se})");
}

/// Coincidences summed over the peak around lag `k·T`, with T = 10 bins.
fn peak_area(hist: &qdot_kmc::observables::G2Histogram, k: i64) -> f64 {
    (k * 10 - 5..k * 10 + 5).map(|l| hist.raw_at_lag(l) as f64).sum()
}

fn resonant_g2(gamma_nr: f64, seed: u64, max_lag: f64) -> qdot_kmc::observables::G2Histogram {
    let params = RateParams::new(1.0, gamma_nr, 0.01, 1.0).unwrap();
    let schedule = PulseSchedule::new(10.0, 1_000_000, Scheme::resonant()).unwrap();
    let config = ObservableConfig::default().with_g2(1.0, max_lag);
    run_trajectory(params, &schedule, 2, seed, config).unwrap().g2().unwrap()
}

#[test]
fn g2_raw_histogram_is_symmetric() {
    let hist = resonant_g2(0.1, 33, 100.0);
    for k in 1..=10 {
        let (a, b) = (peak_area(&hist, k), peak_area(&hist, -k));
        assert!((a - b).abs() <= 3.0 * (a + b).sqrt(), "k = {k}: {a} vs {b}");
    }
    assert_eq!(hist.raw_at_lag(0), 0);
    assert!(peak_area(&hist, 0) < 0.02 * peak_area(&hist, 1));
}

#[test]
fn resonant_g2_bunches_at_neighbouring_pulses() {
    let hist = resonant_g2(0.1, 34, 100.0);
    for sign in [1, -1] {
        let (one, two) = (peak_area(&hist, sign), peak_area(&hist, 2 * sign));
        assert!(one - two > 3.0 * (one + two).sqrt(), "±T {one} vs ±2T {two}");
    }
}

/// Peak area at `k·T` relative to the mean peak area over the last decade of lags.
fn excess(hist: &qdot_kmc::observables::G2Histogram, k: i64) -> (f64, f64) {
    let far: Vec<f64> = (10..=99).map(|j| peak_area(hist, j)).collect();
    let plateau = far.iter().sum::<f64>() / far.len() as f64;
    let a = peak_area(hist, k);
    (a / plateau - 1.0, a.sqrt() / plateau)
}

#[test]
fn low_loss_g2_bunching_outlives_high_loss_bunching() {
    let slow = resonant_g2(0.001, 35, 1000.0);
    let fast = resonant_g2(0.1, 36, 1000.0);
    for k in [3, 5] {
        let (e_slow, se_slow) = excess(&slow, k);
        let (e_fast, se_fast) = excess(&fast, k);
        assert!(e_slow > 3.0 * se_slow, "k = {k}: slow excess {e_slow} ± {se_slow}");
        assert!(
            e_slow - e_fast > 3.0 * (se_slow.powi(2) + se_fast.powi(2)).sqrt(),
            "k = {k}: {e_slow} vs {e_fast}"
        );
    }
}

#[test]
fn resonant_stream_has_multi_period_dark_gaps() {
    let schedule = PulseSchedule::new(10.0, 100_000, Scheme::resonant()).unwrap();
    let acc = run_trajectory(baseline(), &schedule, 2, 37, ObservableConfig::default()).unwrap();
    let long: u64 = acc.blink_hist().range(2..).map(|(_, n)| n).sum();
    assert!(long > 100, "{:?}", acc.blink_hist());
}

#[test]
fn saturated_above_band_exciton_rate_is_of_order_ten_per_hundred_cycles() {
    let photons = photon_stream(baseline(), Scheme::nonresonant(1.5), 100_000, 38);
    let x = photons.iter().filter(|p| p.exciton_class == ExcitonClass::X).count() as f64;
    let per_hundred = x / 1_000.0;
    // Within half a decade of ten, and far below the lossless-dot figure of 83.
    assert!((10f64.powf(0.5)..10f64.powf(1.5)).contains(&per_hundred), "{per_hundred}");
}

fn noisy_biexponential(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..200).map(|i| 0.05 * (i as f64 + 0.5)).collect();
    let shape: Vec<f64> = x.iter().map(|&t| 80.0 * (-1.2 * t).exp() + 5.0 * (-0.22 * t).exp()).collect();
    let scale = 1e6 / shape.iter().sum::<f64>();
    let mut rng = trajectory_rng(seed);
    let y = shape
        .iter()
        .map(|&m| Poisson::new(m * scale).unwrap().sample(&mut rng))
        .collect();
    (x, y)
}

#[test]
fn double_exponential_fit_recovers_synthetic_rates() {
    for seed in 40..45 {
        let (x, y) = noisy_biexponential(seed);
        let fit = fit_exponentials(&x, &y, FitOrder::Two).unwrap();
        let (fast, slow) = fit.rates();
        assert!((fast / 1.2 - 1.0).abs() < 0.05, "seed {seed}: fast {fast}");
        assert!((slow / 0.22 - 1.0).abs() < 0.10, "seed {seed}: slow {slow}");
    }
}

#[test]
fn refitting_a_fitted_curve_is_a_fixed_point() {
    let (x, y) = noisy_biexponential(46);
    for order in [FitOrder::One, FitOrder::Two] {
        let first = fit_exponentials(&x, &y, order).unwrap();
        let clean: Vec<f64> = x.iter().map(|&t| first.eval(t)).collect();
        let second = fit_exponentials(&x, &clean, order).unwrap();
        let params = |f: &ExpFit| match f {
            ExpFit::Single { model, .. } => vec![model.amplitude, model.rate],
            ExpFit::Double { model, .. } => {
                vec![model.a_fast, model.a_slow, model.gamma_fast, model.gamma_slow]
            }
        };
        for (a, b) in params(&first).iter().zip(params(&second)) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{order:?}: {a} vs {b}");
        }
    }
}
