//! Long-run stability: pass rate and histogram divergence per batch.

use toeplitz_qrng::orchestrator::derive_seed;
use toeplitz_qrng::source::SourceModel;
use toeplitz_qrng::stats::{batch_monitor, chi2_level, MonitorConfig};
use toeplitz_qrng::{Bits, Extractor, ExtractorDims};

fn main() -> toeplitz_qrng::Result<()> {
    let dims = ExtractorDims::new(581, 768, 16)?;
    let mut ex = Extractor::new(dims, derive_seed(1, 2, &dims))?;
    let raw = SourceModel::reference(1).generate(2, 48 * 40_000)?.samples;
    let mut out = Bits::new();
    ex.ingest_samples_into(&raw, 16, &mut out)?;

    let batches = 20;
    let per = out.len() / batches / 16 * 16;
    let parts: Vec<Bits> = (0..batches).map(|i| out.slice(i * per, per)).collect();
    let config = MonitorConfig {
        sequence_bits: 50_000,
        ..MonitorConfig::default()
    };
    let timeline = batch_monitor(&parts, &config)?;
    print!("{}", timeline.to_tsv());
    let level = chi2_level(timeline.kld.bin_count, (per / 16) as u64);
    println!(
        "median {:.3e}, spread {:.3e}, chi-square level {:.3e}",
        timeline.kld.median(),
        timeline.kld.spread(),
        level
    );
    Ok(())
}
