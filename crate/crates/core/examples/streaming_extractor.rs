//! Feeding 16-bit ADC samples to the per-channel pipeline in arbitrary chunks.

use toeplitz_qrng::orchestrator::derive_seed;
use toeplitz_qrng::source::SourceModel;
use toeplitz_qrng::{Extractor, ExtractorDims};

fn main() -> toeplitz_qrng::Result<()> {
    let dims = ExtractorDims::new(548, 768, 16)?;
    let seed = derive_seed(2021, 1, &dims);
    let samples = SourceModel::reference(9).generate(1, 48 * 100 + 20)?.samples;

    let mut ex = Extractor::new(dims, seed.clone())?;
    let mut blocks = Vec::new();
    for chunk in samples.chunks(1000) {
        blocks.extend(ex.ingest_samples(chunk, 16)?);
    }
    println!(
        "{} samples -> {} blocks of {} bits; {} steps pending",
        samples.len(),
        blocks.len(),
        dims.m(),
        ex.step_index()
    );

    let mut again = Extractor::new(dims, seed)?;
    assert_eq!(blocks, again.ingest_samples(&samples, 16)?);
    println!("first block: {}...", &blocks[0].to_string()[..64]);
    println!("bits in {}, bits out {}", ex.bits_in(), ex.bits_out());
    Ok(())
}
