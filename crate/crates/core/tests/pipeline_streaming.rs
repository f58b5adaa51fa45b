use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toeplitz_qrng::{matvec_full, Bits, Error, Extractor, ExtractorDims, Seed};

fn block_bits(samples: &[u32], k: usize) -> Bits {
    let mut b = Bits::new();
    for &s in samples {
        b.push_word(s as u64, k);
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // However the samples are chunked, the emitted blocks are the same and
    // equal the whole-matrix product of each n-bit block.
    #[test]
    fn chunking_does_not_change_output(
        seed in any::<u64>(),
        m_frac in 0.05f64..0.95,
        steps in 2usize..12,
        k in 1usize..=16,
        count in 0usize..200,
        cuts in prop::collection::vec(0usize..200, 0..8),
    ) {
        let n = steps * k;
        let m = ((n as f64 * m_frac) as usize).clamp(1, n - 1);
        let dims = ExtractorDims::new(m, n, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Seed::random(&dims, &mut rng);
        let samples: Vec<u32> = (0..count).map(|_| rng.random::<u32>() & ((1u32 << k) - 1)).collect();

        let mut whole = Extractor::new(dims, s.clone()).unwrap();
        let expected = whole.ingest_samples(&samples, k).unwrap();

        let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c.min(count)).collect();
        cuts.sort();
        let mut chunked = Extractor::new(dims, s.clone()).unwrap();
        let mut got = Vec::new();
        let mut prev = 0;
        for c in cuts.into_iter().chain([count]) {
            got.extend(chunked.ingest_samples(&samples[prev..c], k).unwrap());
            prev = c;
        }
        prop_assert_eq!(&got, &expected);
        prop_assert_eq!(expected.len(), count / steps);
        prop_assert_eq!(chunked.step_index(), count % steps);
        for (i, block) in expected.iter().enumerate() {
            let raw = block_bits(&samples[i * steps..(i + 1) * steps], k);
            prop_assert_eq!(block, &matvec_full(&s, &dims, &raw).unwrap());
        }
        prop_assert_eq!(chunked.bits_out(), (expected.len() * m) as u64);
    }

    #[test]
    fn step_words_and_samples_agree(seed in any::<u64>(), steps in 1usize..10) {
        let dims = ExtractorDims::new(20, steps * 8, 8).unwrap_or(ExtractorDims::new(7, 8, 8).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Seed::random(&dims, &mut rng);
        let samples: Vec<u32> = (0..dims.steps() * 3).map(|_| rng.random_range(0..256)).collect();
        let mut by_word = Extractor::new(dims, s.clone()).unwrap();
        let mut a = Vec::new();
        for &x in &samples {
            a.extend(by_word.ingest_step(&Bits::from_u64(x as u64, 8)).unwrap());
        }
        let mut by_sample = Extractor::new(dims, s).unwrap();
        prop_assert_eq!(a, by_sample.ingest_samples(&samples, 8).unwrap());
    }
}

#[test]
fn rejects_wrong_widths() {
    let dims = ExtractorDims::new(5, 16, 8).unwrap();
    let seed = Seed::new(Bits::zeros(20));
    let mut ex = Extractor::new(dims, seed).unwrap();
    assert!(matches!(ex.ingest_samples(&[1], 16), Err(Error::Config(_))));
    assert!(matches!(ex.ingest_samples(&[256], 8), Err(Error::Usage(_))));
    assert!(ex.ingest_step(&Bits::zeros(7)).is_err());
    assert!(Extractor::new(dims, Seed::new(Bits::zeros(19))).is_err());
}

#[test]
fn zero_input_gives_zero_blocks() {
    let dims = ExtractorDims::new(519, 768, 16).unwrap();
    let seed = Seed::random(&dims, &mut ChaCha8Rng::seed_from_u64(4));
    let mut ex = Extractor::new(dims, seed).unwrap();
    let blocks = ex.ingest_samples(&vec![0u32; 48 * 3], 16).unwrap();
    assert_eq!(blocks.len(), 3);
    assert!(blocks.iter().all(|b| b.is_zero() && b.len() == 519));
}
