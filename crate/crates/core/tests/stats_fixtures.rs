use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toeplitz_qrng::stats::{
    acf, batch_monitor, block_frequency_test, ccf, chi2_level, cusum_test, decimalize, kld, monobit_test,
    pass_rate, proportion_interval, run_suite, runs_test, CusumMode, Histogram, MonitorConfig, NativeTest,
};
use toeplitz_qrng::{Bits, Error};

// First 100 bits of the binary expansion of pi, the worked example of the
// standard battery's documentation.
const PI_100: &str = "1100100100001111110110101010001000100001011010001100\
                      001000110100110001001100011001100010100010111000";

fn pi_bits() -> Bits {
    let b: Bits = PI_100.parse().unwrap();
    assert_eq!(b.len(), 100);
    b
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 5e-7
}

#[test]
fn documented_p_values() {
    let b = pi_bits();
    assert!(close(monobit_test(&b).unwrap(), 0.109599));
    assert!(close(block_frequency_test(&b, 10).unwrap(), 0.706438));
    assert!(close(runs_test(&b).unwrap(), 0.500798));
    assert!(close(cusum_test(&b, CusumMode::Forward).unwrap(), 0.219194));
    assert!(close(cusum_test(&b, CusumMode::Backward).unwrap(), 0.114866));
}

#[test]
fn short_sequences_are_rejected() {
    let b = pi_bits().slice(0, 99);
    assert!(matches!(monobit_test(&b), Err(Error::Usage(_))));
    assert!(runs_test(&b).is_err());
    assert!(cusum_test(&b, CusumMode::Forward).is_err());
    assert!(block_frequency_test(&b, 10).is_err());
}

#[test]
fn runs_prerequisite_failure_gives_zero() {
    let b = Bits::from_fn(200, |i| i % 4 != 0);
    assert_eq!(runs_test(&b).unwrap(), 0.0);
}

/// erfc by its continued fraction / series, independent of the library.
fn erfc_oracle(x: f64) -> f64 {
    if x < 2.0 {
        // erf series
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        let mut f = 0.0;
        for n in (1..200).rev() {
            f = n as f64 / 2.0 / (x + f);
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
    }
}

proptest! {
    #[test]
    fn monobit_matches_closed_form(seed in any::<u64>(), len in 100usize..5000, bias in 0.3f64..0.7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Bits::from_fn(len, |_| rng.random_bool(bias));
        let s = 2.0 * b.count_ones() as f64 - len as f64;
        let want = erfc_oracle(s.abs() / (2.0 * len as f64).sqrt());
        prop_assert!((monobit_test(&b).unwrap() - want).abs() < 1e-9);
    }

    // Complementing every bit leaves these statistics unchanged.
    #[test]
    fn complement_invariance(seed in any::<u64>(), len in 100usize..3000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Bits::from_fn(len, |_| rng.random());
        let c = b.not();
        let same = |x: f64, y: f64| (x - y).abs() < 1e-12;
        prop_assert!(same(monobit_test(&b).unwrap(), monobit_test(&c).unwrap()));
        prop_assert!(same(runs_test(&b).unwrap(), runs_test(&c).unwrap()));
        prop_assert!(same(block_frequency_test(&b, 20).unwrap(), block_frequency_test(&c, 20).unwrap()));
        prop_assert!(same(
            cusum_test(&b, CusumMode::Forward).unwrap(),
            cusum_test(&c, CusumMode::Forward).unwrap()
        ));
    }

    #[test]
    fn p_values_in_unit_interval(seed in any::<u64>(), len in 100usize..2000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Bits::from_fn(len, |_| rng.random_bool(0.55));
        for t in NativeTest::standard_set() {
            if let Ok(p) = t.run(&b) {
                prop_assert!((0.0..=1.0).contains(&p), "{} gave {}", t, p);
            }
        }
    }
}

#[test]
fn uniform_p_values_pass_the_proportion_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let stream = Bits::from_fn(200 * 10_000, |_| rng.random());
    let reports = run_suite(&stream, 10_000, &NativeTest::standard_set(), 0.01).unwrap();
    for r in &reports {
        assert_eq!(r.p_values.len(), 200);
        assert!(r.within_interval(), "{}", r.to_kv());
    }
    let biased = Bits::from_fn(100 * 10_000, |_| rng.random_bool(0.51));
    let reports = run_suite(&biased, 10_000, &[NativeTest::Monobit], 0.01).unwrap();
    assert!(!reports[0].within_interval());
}

#[test]
fn interval_and_pass_rate() {
    let (lo, hi) = proportion_interval(0.01, 100);
    assert!((lo - 0.960150).abs() < 1e-6);
    assert_eq!(hi, 1.0);
    let r = pass_rate("x", vec![0.5; 99].into_iter().chain([0.001]).collect(), 0.01).unwrap();
    assert_eq!(r.passed(), 99);
    assert!(r.within_interval());
    assert!(pass_rate("x", vec![], 0.01).is_err());
}

#[test]
fn correlation_recovers_known_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<f64> = (0..50_000).map(|_| rng.random::<f64>()).collect();
    // Moving average of two: lag-one autocorrelation 0.5.
    let ma: Vec<f64> = x.windows(2).map(|w| w[0] + w[1]).collect();
    let a = acf(&ma, 5).unwrap();
    assert!((a.values[0] - 1.0).abs() < 1e-12);
    assert!((a.at(1).unwrap() - 0.5).abs() < 0.02);
    assert!(a.at(3).unwrap().abs() < 0.02);
    // y is x delayed by 7.
    let y: Vec<f64> = std::iter::repeat_n(0.5, 7).chain(x[..x.len() - 7].iter().copied()).collect();
    let c = ccf(&x, &y, 20).unwrap();
    assert_eq!(c.peak_lag(), 7);
    assert!(matches!(acf(&[3u32; 10], 2), Err(Error::Degenerate(_))));
    let packed = Bits::from_bytes(&[0x34, 0x12], 16).unwrap();
    assert_eq!(decimalize(&packed, 16).unwrap(), vec![0x1234]);
}

#[test]
fn divergence_of_resampled_histograms_is_near_chi2_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 100_000;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<u32> { (0..n).map(|_| rng.random_range(0..256)).collect() };
    let reference = Histogram::of_values(&draw(&mut rng), 8, 256).unwrap();
    let mut ds = Vec::new();
    for _ in 0..20 {
        ds.push(kld(&reference, &Histogram::of_values(&draw(&mut rng), 8, 256).unwrap(), 1.0).unwrap());
    }
    let level = chi2_level(256, n as u64);
    let mean = ds.iter().sum::<f64>() / ds.len() as f64;
    // Both histograms fluctuate, so the expected divergence is about twice the level.
    assert!(mean > level && mean < 3.0 * level, "{mean} vs {level}");
    let same = Histogram::from_counts(vec![5, 5, 0, 10]);
    assert_eq!(kld(&same, &same, 0.0).unwrap(), 0.0);
    assert_eq!(kld(&Histogram::from_counts(vec![1, 0]), &Histogram::from_counts(vec![1, 1]), 0.0).unwrap(), f64::INFINITY);
}

#[test]
fn monitor_timeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let batches: Vec<Bits> = (0..6).map(|_| Bits::from_fn(16 * 20_000, |_| rng.random())).collect();
    let config = MonitorConfig {
        sequence_bits: 20_000,
        ..MonitorConfig::default()
    };
    let t = batch_monitor(&batches, &config).unwrap();
    assert_eq!(t.points.len(), 6);
    assert_eq!(t.kld.bin_count, 256);
    assert_eq!(t.kld.comparisons().len(), 5);
    assert!(t.kld.spread() < 3.0 * t.kld.median());
    assert!(t.to_tsv().lines().count() >= 7);
    assert!(batch_monitor(&batches[..1], &config).is_err());
}
