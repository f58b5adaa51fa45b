//! Choosing output length from min-entropy: declared values, the quantized
//! Gaussian model, and an empirical estimate from simulated samples.

use toeplitz_qrng::planner::{empirical_min_entropy, gaussian_model_min_entropy, plan_dims, throughput};
use toeplitz_qrng::source::SourceModel;
use toeplitz_qrng::{EntropyEstimate, SecurityParameter};

fn main() -> toeplitz_qrng::Result<()> {
    let eps = SecurityParameter::new(-50)?;
    let mut dims = Vec::new();
    for h in [12.9, 13.5, 14.2] {
        let plan = plan_dims(&EntropyEstimate::declared(h, 16)?, 768, 16, &eps)?;
        println!("h = {h:>4}: m = {}, ratio {:.4}", plan.dims.m(), plan.extraction_ratio);
        dims.push(plan.dims);
    }
    let rates = throughput(&dims, 240e6)?;
    println!("aggregate at 240 MHz: {:.2} Gbps", rates.aggregate_output_bps / 1e9);

    let model = SourceModel::reference(3);
    let ch = &model.channels[0];
    let modeled = gaussian_model_min_entropy(ch.sigma_total(), 16, ch.adc_range)?;
    // The largest observed count overshoots p_max, so the plug-in estimate
    // lands a little below the model.
    let samples = model.generate(0, 1 << 22)?.samples;
    let measured = empirical_min_entropy(&samples, 16)?;
    println!(
        "{}: modeled {:.3} bits, empirical {:.3} bits from {} samples",
        ch.label, modeled.h_min_per_sample, measured.h_min_per_sample, measured.sample_count
    );
    println!("{}", plan_dims(&measured, 768, 16, &eps)?);

    match plan_dims(&EntropyEstimate::declared(2.0, 16)?, 768, 16, &eps) {
        Err(e) => println!("h = 2: {e} (exit code {})", e.exit_code()),
        Ok(p) => println!("unexpected plan {p}"),
    }
    Ok(())
}
