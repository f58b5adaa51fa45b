use toeplitz_qrng::planner::{empirical_min_entropy, gaussian_model_min_entropy};
use toeplitz_qrng::source::{
    decode_samples, encode_samples, meta_path, read_raw_file, write_raw_file, ChannelModel, RawFileReader,
    SourceModel, StreamMeta,
};
use toeplitz_qrng::Error;

fn small_adc(sigma_q: f64, sigma_c: f64, rho: f64) -> ChannelModel {
    ChannelModel {
        label: "test".into(),
        sigma_quantum: sigma_q,
        sigma_classical: sigma_c,
        classical_correlation: rho,
        adc_bits: 8,
        adc_range: 256.0,
        sample_rate_hz: 1e6,
    }
}

/// Normal CDF by Simpson quadrature of the density, independent of erfc.
fn cdf(x: f64) -> f64 {
    if x < -12.0 {
        return 0.0;
    }
    if x > 12.0 {
        return 1.0;
    }
    let pdf = |t: f64| (-(t * t) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let a = -12.0;
    let panels = 4000;
    let h = (x - a) / panels as f64;
    let mut s = pdf(a) + pdf(x);
    for i in 1..panels {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn histogram_matches_quantized_gaussian() {
    let model = SourceModel {
        prng_seed: 11,
        channels: vec![small_adc(20.0, 6.0, 0.0)],
    };
    let sigma = model.channels[0].sigma_total();
    let n = 400_000;
    let samples = model.generate(0, n).unwrap().samples;
    let mut counts = vec![0u64; 256];
    for &s in &samples {
        counts[s as usize] += 1;
    }
    let mut chi2 = 0.0;
    let mut dof = 0;
    for (code, &c) in counts.iter().enumerate() {
        let lo = if code == 0 { f64::NEG_INFINITY } else { (code as f64 - 128.5) / sigma };
        let hi = if code == 255 { f64::INFINITY } else { (code as f64 - 127.5) / sigma };
        let p = cdf(hi) - cdf(lo);
        let expected = p * n as f64;
        if expected >= 5.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
            dof += 1;
        }
    }
    let dof = (dof - 1) as f64;
    assert!(chi2 < dof + 5.0 * (2.0 * dof).sqrt(), "chi2 {chi2} over {dof} dof");
}

#[test]
fn empirical_entropy_tracks_model() {
    let model = SourceModel {
        prng_seed: 5,
        channels: vec![small_adc(10.0, 3.0, 0.0)],
    };
    let samples = model.generate(0, 1 << 20).unwrap().samples;
    let empirical = empirical_min_entropy(&samples, 8).unwrap().h_min_per_sample;
    let modeled = gaussian_model_min_entropy(model.channels[0].sigma_total(), 8, 256.0)
        .unwrap()
        .h_min_per_sample;
    assert!((empirical - modeled).abs() < 0.02, "{empirical} vs {modeled}");
}

fn pearson(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().map(|&x| x as f64).sum::<f64>() / n;
    let mb = b.iter().map(|&x| x as f64).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn reference_channels_are_independent_and_reproducible() {
    let model = SourceModel::reference(3);
    let n = 200_000;
    let streams: Vec<Vec<u32>> = (0..3).map(|c| model.generate(c, n).unwrap().samples).collect();
    let bound = 4.0 / (n as f64).sqrt();
    for i in 0..3 {
        for j in i + 1..3 {
            let r = pearson(&streams[i], &streams[j]);
            assert!(r.abs() < bound, "channels {i},{j}: {r}");
        }
    }
    assert_eq!(SourceModel::reference(3).generate(1, 1000).unwrap().samples, streams[1][..1000]);
    assert_ne!(SourceModel::reference(4).generate(1, 1000).unwrap().samples, streams[1][..1000]);
    for (c, ch) in model.channels.iter().enumerate() {
        assert!((ch.snr_db() - 13.0).abs() < 1e-9);
        assert_eq!(model.snr_db(c).unwrap(), ch.snr_db());
    }
}

#[test]
fn correlated_classical_noise_shows_in_lag_one() {
    let model = SourceModel {
        prng_seed: 9,
        channels: vec![small_adc(5.0, 20.0, 0.9)],
    };
    let s = model.generate(0, 200_000).unwrap().samples;
    let r = pearson(&s[..s.len() - 1], &s[1..]);
    // 0.9 * 400 / 425 ≈ 0.85 before quantization
    assert!((r - 0.847).abs() < 0.02, "{r}");
    let white = SourceModel { prng_seed: 9, channels: vec![small_adc(5.0, 20.0, 0.0)] };
    let w = white.generate(0, 200_000).unwrap().samples;
    assert!(pearson(&w[..w.len() - 1], &w[1..]).abs() < 0.01);
}

#[test]
fn no_noise_is_a_config_error() {
    let model = SourceModel {
        prng_seed: 1,
        channels: vec![small_adc(0.0, 1.0, 0.0)],
    };
    assert!(matches!(model.generate(0, 10), Err(Error::Config(_))));
    assert!(matches!(model.generate(1, 10), Err(Error::Config(_))));
}

#[test]
fn raw_files_round_trip_and_report_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ch0.raw");
    let stream = SourceModel::reference(1).generate(0, 1000).unwrap();
    write_raw_file(&path, &stream).unwrap();
    assert!(meta_path(&path).exists());
    let back = read_raw_file(&path, 16).unwrap();
    assert_eq!(back.samples, stream.samples);
    assert_eq!(back.meta, stream.meta);

    let mut reader = RawFileReader::open(&path, 16).unwrap();
    let mut chunked = Vec::new();
    loop {
        let c = reader.read_chunk(77).unwrap();
        if c.is_empty() {
            break;
        }
        chunked.extend(c);
    }
    assert_eq!(chunked, stream.samples);

    // 12-bit samples stored in 2 bytes must not use the top nibble.
    let bytes = encode_samples(&[1, 2, 0x1000], 16);
    match decode_samples(&bytes, 12) {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, 4),
        other => panic!("{other:?}"),
    }
    let truncated = dir.path().join("odd.raw");
    std::fs::write(&truncated, [1u8, 2, 3, 4, 5]).unwrap();
    let err = read_raw_file(&truncated, 16).unwrap_err();
    assert!(matches!(err, Error::Format { offset: 4, .. }));
    assert_eq!(err.exit_code(), 3);
    let mut r = RawFileReader::open(&truncated, 16).unwrap();
    assert!(matches!(r.read_chunk(1).unwrap()[..], [0x0201]));
    assert!(matches!(r.read_chunk(8), Err(Error::Format { offset: 4, .. })));
}

#[test]
fn meta_parse_errors_carry_offsets() {
    let m = StreamMeta::parse("bits: 12\nchannel_label: x\n").unwrap();
    assert_eq!(m.bits, 12);
    match StreamMeta::parse("bits: 16\nbits: sixteen\n") {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, 9),
        other => panic!("{other:?}"),
    }
}
