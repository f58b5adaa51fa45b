//! Software throughput next to the modeled hardware rates.

use std::sync::Arc;

use toeplitz_qrng::orchestrator::{kernel_throughput, parallel_scaling};
use toeplitz_qrng::planner::throughput;
use toeplitz_qrng::source::SourceModel;
use toeplitz_qrng::ExtractorDims;

fn main() -> toeplitz_qrng::Result<()> {
    let model = SourceModel::reference(11);
    let inputs = [519, 548, 581]
        .iter()
        .enumerate()
        .map(|(i, &m)| Ok((ExtractorDims::new(m, 768, 16)?, Arc::new(model.generate(i, 48 * 40_000)?.samples))))
        .collect::<toeplitz_qrng::Result<Vec<_>>>()?;
    for (dims, samples) in &inputs {
        println!("{dims}: {:.1} Mbps raw on one thread", kernel_throughput(*dims, samples)? / 1e6);
    }
    let scaling = parallel_scaling(&inputs)?;
    println!(
        "runner: single {:.1} Mbps, {} channels {:.1} Mbps ({:.2}x)",
        scaling.single_raw_bps / 1e6,
        scaling.channels,
        scaling.parallel_raw_bps / 1e6,
        scaling.ratio()
    );
    let dims: Vec<_> = inputs.iter().map(|(d, _)| *d).collect();
    let modeled = throughput(&dims, 240e6)?;
    println!(
        "modeled at 240 MHz: {:.2} Gbps raw, {:.2} Gbps extracted",
        modeled.aggregate_raw_bps / 1e9,
        modeled.aggregate_output_bps / 1e9
    );
    Ok(())
}
