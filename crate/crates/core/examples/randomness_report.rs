//! Correlation and native randomness tests on raw samples and on extracted output.

use toeplitz_qrng::orchestrator::derive_seed;
use toeplitz_qrng::source::SourceModel;
use toeplitz_qrng::stats::{acf, decimalize, run_suite, NativeTest};
use toeplitz_qrng::{Bits, Extractor, ExtractorDims};

fn main() -> toeplitz_qrng::Result<()> {
    // Slowly varying classical noise makes the raw samples visibly correlated.
    let model = SourceModel::reference(5).with_classical_correlation(0.9);
    let raw = model.generate(0, 48 * 40_000)?.samples;
    let dims = ExtractorDims::new(519, 768, 16)?;
    let mut ex = Extractor::new(dims, derive_seed(5, 0, &dims))?;
    let mut out = Bits::new();
    ex.ingest_samples_into(&raw, 16, &mut out)?;

    let raw_acf = acf(&raw, 20)?;
    let words = decimalize(&out.slice(0, out.len() / 16 * 16), 16)?;
    let out_acf = acf(&words, 20)?;
    println!("lag  raw ACF     output ACF");
    for lag in 1..=5 {
        println!("{lag:>3}  {:>+.5}  {:>+.5}", raw_acf.values[lag], out_acf.values[lag]);
    }
    println!(
        "mean |ACF| over lags 1..20: raw {:.2e}, output {:.2e}",
        raw_acf.mean_abs_off_zero(),
        out_acf.mean_abs_off_zero()
    );

    for r in run_suite(&out, 100_000, &NativeTest::standard_set(), 0.01)? {
        println!(
            "{:<20} {:>3}/{:<3} pass  interval [{:.4}, {:.4}] {}",
            r.test_name,
            r.passed(),
            r.p_values.len(),
            r.confidence_interval.0,
            r.confidence_interval.1,
            if r.within_interval() { "ok" } else { "OUT" }
        );
    }
    Ok(())
}
