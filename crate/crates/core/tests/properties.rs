use kljn::circuit::{channel_waveforms, generator_psd, Bit, BitState, PhysicsConstants, ResistorSet};
use kljn::config::SystemConfig;
use kljn::decision::{interpret_current, interpret_voltage, Interpretation};
use kljn::estimator::{averaged_fluctuation_rms, AveragingWindow};
use kljn::noise::{BandLimitedSynth, NoiseSpec};
use kljn::protocol::{simulate_period, simulate_session, PeriodSimulator, SessionReport};
use kljn::stats::{correlation, wilson_interval, Moments, Z95};
use kljn::Mode;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(gamma: f64) -> SystemConfig {
    SystemConfig {
        gamma,
        alpha: 100.0,
        ..SystemConfig::default()
    }
}

#[test]
fn about_half_the_periods_are_secure() {
    let records = simulate_session(&cfg(10.0), 20_000, 7).unwrap();
    let mixed = records.iter().filter(|r| r.actual() == BitState::Mixed).count() as u64;
    let (lo, hi) = wilson_interval(mixed, 20_000, Z95);
    assert!(lo < 0.5 && hi > 0.5, "mixed share {lo}..{hi}");
}

#[test]
fn voltage_and_current_readings_uncorrelated_in_mixed_periods() {
    let records = simulate_session(&cfg(20.0), 40_000, 8).unwrap();
    let (msv, msi): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.actual() == BitState::Mixed)
        .map(|r| (r.measurement.msv, r.measurement.msi))
        .unzip();
    let r = correlation(&msv, &msi);
    assert!(r.abs() < 4.0 / (msv.len() as f64).sqrt(), "corr {r} over {}", msv.len());
}

#[test]
fn no_net_power_flow_in_mixed_state() {
    let consts = PhysicsConstants::normalized();
    let res = ResistorSet::new(1.0, 10.0).unwrap();
    let state = res.loop_state(Bit::Zero, Bit::One);
    let n = 1 << 20;
    let synth = BandLimitedSynth::new(&NoiseSpec::new(1.0, 1.0, 4.0, n).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let psd_a = generator_psd(state.r_alice, &consts).unwrap();
    let psd_b = generator_psd(state.r_bob, &consts).unwrap();
    let (ua, ub) = synth.generate_pair(psd_a, psd_b, &mut rng);
    let (u, i) = channel_waveforms(&ua, &ub, &state).unwrap();
    let p: Vec<f64> = u.samples().iter().zip(i.samples()).map(|(u, i)| u * i).collect();
    let m = Moments::of(&p);
    // Neighbouring samples are correlated at 4x oversampling; 4 SE on the
    // effective count n / 4 is the looser, honest bound.
    let se = (m.variance / (n as f64 / 4.0)).sqrt();
    assert!(m.mean.abs() < 4.0 * se, "mean power {} vs se {se}", m.mean);
}

#[test]
fn synthesized_noise_is_gaussian_and_stationary() {
    let n = 1 << 20;
    let synth = BandLimitedSynth::new(&NoiseSpec::new(2.0, 1.0, 4.0, n).unwrap());
    let w = synth.generate(2.0, &mut ChaCha8Rng::seed_from_u64(1));
    let all = Moments::of(w.samples());
    assert!(all.skewness.abs() < 0.02, "skew {}", all.skewness);
    assert!(all.excess_kurtosis.abs() < 0.04, "kurtosis {}", all.excess_kurtosis);
    let q = n / 4;
    for k in 0..4 {
        let part = Moments::of(&w.samples()[k * q..(k + 1) * q]);
        assert!((part.variance / 2.0 - 1.0).abs() < 0.05, "quarter {k} variance {}", part.variance);
    }
}

fn msi_sample(gamma: f64, n: u64, seed: u64) -> Vec<f64> {
    PeriodSimulator::new(&cfg(gamma))
        .unwrap()
        .with_forced_state(Some(BitState::Both1))
        .simulate_many(n, seed)
        .iter()
        .map(|r| r.measurement.msi)
        .collect()
}

#[test]
fn averaged_readings_approach_normal_as_gamma_grows() {
    // The averaged mean square is a weighted sum of squared Gaussians, so its
    // skewness falls like 1/sqrt(gamma) rather than vanishing at a fixed gamma.
    let s50 = Moments::of(&msi_sample(50.0, 20_000, 3));
    let s200 = Moments::of(&msi_sample(200.0, 20_000, 4));
    assert!(s50.skewness > 0.0 && s200.skewness < s50.skewness);
    let ratio = s50.skewness / s200.skewness;
    assert!((1.4..2.8).contains(&ratio), "skew ratio {ratio}");
    assert!(s200.skewness < 0.25 && s200.excess_kurtosis.abs() < 0.2);
}

#[test]
fn fluctuation_rms_matches_empirical_at_small_gamma() {
    let x = msi_sample(20.0, 10_000, 5);
    let sd = Moments::of(&x).std_dev();
    let levels = cfg(20.0).levels().unwrap();
    let w = AveragingWindow::new(20.0, 1.0).unwrap();
    let p = averaged_fluctuation_rms(levels.current_psd(BitState::Both1), &w, 1.0);
    assert!((sd / p - 1.0).abs() < 0.1, "{sd} vs {p}");
}

#[test]
fn averaged_reading_is_unbiased() {
    let x = msi_sample(50.0, 5_000, 6);
    let m = Moments::of(&x);
    let level = cfg(50.0).levels().unwrap().current(BitState::Both1);
    assert!((m.mean - level).abs() < 4.0 * m.std_error(), "{} vs {level}", m.mean);
}

#[test]
fn report_rates_agree_with_records() {
    let records = PeriodSimulator::new(&cfg(10.0))
        .unwrap()
        .with_forced_state(Some(BitState::Both0))
        .simulate_many(3_000, 12);
    let rep = SessionReport::from_records(&records, Mode::Combined);
    let v = records.iter().filter(|r| r.v_interp == Interpretation::Secure0110).count() as u64;
    assert_eq!(rep.eps_hat_v_00.count, v);
    assert_eq!(rep.eps_hat_v_00.trials, 3_000);
    assert!(rep.eps_hat_v_11.rate.is_none());
    assert_eq!(rep.confusion_v[0].iter().sum::<u64>(), 3_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn period_is_a_pure_function_of_seed_and_index(seed in any::<u64>(), index in 0u64..1_000_000) {
        let c = cfg(10.0);
        let a = simulate_period(&c, index, seed).unwrap();
        let b = simulate_period(&c, index, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.index, index);
    }

    #[test]
    fn interpretations_follow_bands(seed in any::<u64>()) {
        let c = cfg(10.0);
        let bands = c.bands().unwrap();
        let r = simulate_period(&c, 0, seed).unwrap();
        prop_assert_eq!(r.v_interp, interpret_voltage(r.measurement.msv, &bands));
        prop_assert_eq!(r.i_interp, interpret_current(r.measurement.msi, &bands));
        prop_assert!(r.measurement.msv >= 0.0 && r.measurement.msi >= 0.0);
    }

    #[test]
    fn session_counts_close(seed in any::<u64>(), n in 1u64..400) {
        let records = simulate_session(&cfg(10.0), n, seed).unwrap();
        for mode in [Mode::Voltage, Mode::Current, Mode::Combined] {
            let rep = SessionReport::from_records(&records, mode);
            prop_assert_eq!(rep.total_combined(), n);
            let confusion: u64 = rep.confusion_i.iter().flatten().sum();
            prop_assert_eq!(confusion, n);
            prop_assert!(rep.kept <= n);
        }
    }
}
