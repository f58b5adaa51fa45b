use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::orchestrator::config::{derive_seed, ChannelConfig, InputSource, RunConfig, SeedSource};
use crate::orchestrator::run::{run_extraction, ChannelMetrics};
use crate::pipeline::Extractor;
use crate::planner::{throughput, ThroughputPlan};
use crate::toeplitz::ExtractorDims;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelThroughput {
    pub label: String,
    /// Raw input bits per wall-clock second.
    pub measured_raw_bps: f64,
    pub measured_output_bps: f64,
    /// Raw input bits per second of time spent inside the extractor.
    pub busy_raw_bps: f64,
    pub modeled_raw_bps: f64,
    pub modeled_output_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub wall_clock: Duration,
    pub channels: Vec<ChannelThroughput>,
    pub measured_raw_bps: f64,
    pub measured_output_bps: f64,
    pub modeled: ThroughputPlan,
    /// Software outran the modeled hardware clock; suspect the timer.
    pub exceeds_model: bool,
}

fn rate(bits: u64, d: Duration) -> f64 {
    let s = d.as_secs_f64();
    if s > 0.0 {
        bits as f64 / s
    } else {
        f64::INFINITY
    }
}

/// Measured rates of a run next to the rates modeled at `clock_hz`.
pub fn meter(metrics: &[ChannelMetrics], wall_clock: Duration, clock_hz: f64) -> Result<ThroughputReport> {
    let dims: Vec<ExtractorDims> = metrics.iter().map(|m| m.dims).collect();
    let modeled = throughput(&dims, clock_hz)?;
    let channels: Vec<ChannelThroughput> = metrics
        .iter()
        .zip(&modeled.channels)
        .map(|(m, model)| ChannelThroughput {
            label: m.label.clone(),
            measured_raw_bps: rate(m.bits_in, wall_clock),
            measured_output_bps: rate(m.bits_out, wall_clock),
            busy_raw_bps: rate(m.bits_in, m.busy),
            modeled_raw_bps: model.raw_bps,
            modeled_output_bps: model.output_bps,
        })
        .collect();
    let measured_raw_bps = rate(metrics.iter().map(|m| m.bits_in).sum(), wall_clock);
    let measured_output_bps = rate(metrics.iter().map(|m| m.bits_out).sum(), wall_clock);
    let exceeds_model = measured_raw_bps > modeled.aggregate_raw_bps;
    if exceeds_model {
        log::warn!(
            "measured {measured_raw_bps:.3e} bps exceeds the modeled {:.3e} bps; check the timer",
            modeled.aggregate_raw_bps
        );
    }
    Ok(ThroughputReport {
        wall_clock,
        channels,
        measured_raw_bps,
        measured_output_bps,
        modeled,
        exceeds_model,
    })
}

impl ThroughputReport {
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<10} {:>14} {:>14} {:>14} {:>14}\n",
            "channel", "raw Mbps", "out Mbps", "model raw Gbps", "model out Gbps"
        );
        for c in &self.channels {
            let _ = writeln!(
                s,
                "{:<10} {:>14.2} {:>14.2} {:>14.4} {:>14.4}",
                c.label,
                c.measured_raw_bps / 1e6,
                c.measured_output_bps / 1e6,
                c.modeled_raw_bps / 1e9,
                c.modeled_output_bps / 1e9
            );
        }
        let _ = writeln!(
            s,
            "{:<10} {:>14.2} {:>14.2} {:>14.4} {:>14.4}",
            "aggregate",
            self.measured_raw_bps / 1e6,
            self.measured_output_bps / 1e6,
            self.modeled.aggregate_raw_bps / 1e9,
            self.modeled.aggregate_output_bps / 1e9
        );
        let _ = writeln!(s, "wall clock {:.3} s", self.wall_clock.as_secs_f64());
        s
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "wall_clock_s: {:.6}", self.wall_clock.as_secs_f64());
        let _ = writeln!(s, "clock_hz: {}", self.modeled.clock_hz);
        for (i, c) in self.channels.iter().enumerate() {
            let _ = writeln!(s, "channel.{i}.label: {}", c.label);
            let _ = writeln!(s, "channel.{i}.measured_raw_bps: {:.1}", c.measured_raw_bps);
            let _ = writeln!(s, "channel.{i}.measured_output_bps: {:.1}", c.measured_output_bps);
            let _ = writeln!(s, "channel.{i}.busy_raw_bps: {:.1}", c.busy_raw_bps);
            let _ = writeln!(s, "channel.{i}.modeled_raw_bps: {:.1}", c.modeled_raw_bps);
            let _ = writeln!(s, "channel.{i}.modeled_output_bps: {:.1}", c.modeled_output_bps);
        }
        let _ = writeln!(s, "measured_raw_bps: {:.1}", self.measured_raw_bps);
        let _ = writeln!(s, "measured_output_bps: {:.1}", self.measured_output_bps);
        let _ = writeln!(s, "modeled_raw_bps: {:.1}", self.modeled.aggregate_raw_bps);
        let _ = writeln!(s, "modeled_output_bps: {:.1}", self.modeled.aggregate_output_bps);
        let _ = writeln!(s, "exceeds_model: {}", self.exceeds_model);
        s
    }
}

/// Raw input rate of one extractor fed `samples` on the calling thread.
pub fn kernel_throughput(dims: ExtractorDims, samples: &[u32]) -> Result<f64> {
    let seed = derive_seed(0, 0, &dims);
    let mut extractor = Extractor::new(dims, seed)?;
    let mut out = crate::bits::Bits::with_capacity(samples.len() / dims.steps() * dims.m());
    let start = Instant::now();
    extractor.ingest_samples_into(samples, dims.k(), &mut out)?;
    let elapsed = start.elapsed();
    std::hint::black_box(&out);
    Ok(rate(extractor.bits_in(), elapsed))
}

/// Single-channel versus all-channel parallel extraction through the runner.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub single_raw_bps: f64,
    pub parallel_raw_bps: f64,
    pub channels: usize,
}

impl ScalingReport {
    pub fn ratio(&self) -> f64 {
        self.parallel_raw_bps / self.single_raw_bps
    }
}

/// Runs channel 0 alone, then every channel in parallel, over the same
/// in-memory inputs, and reports aggregate raw-input rates.
pub fn parallel_scaling(inputs: &[(ExtractorDims, Arc<Vec<u32>>)]) -> Result<ScalingReport> {
    if inputs.is_empty() {
        return Err(Error::usage("no channels to benchmark"));
    }
    let channel = |i: usize| {
        let (dims, samples) = &inputs[i];
        ChannelConfig {
            label: format!("ch{i}"),
            dims: *dims,
            seed: SeedSource::Derived,
            input: InputSource::Memory {
                samples: samples.clone(),
                sample_bits: dims.k(),
            },
        }
    };
    let aggregate = |config: &RunConfig| -> Result<f64> {
        let run = run_extraction(config)?;
        Ok(rate(run.metrics.iter().map(|m| m.bits_in).sum(), run.elapsed))
    };
    let single = aggregate(&RunConfig::new(1, vec![channel(0)]))?;
    let parallel = aggregate(&RunConfig::new(1, (0..inputs.len()).map(channel).collect()))?;
    Ok(ScalingReport {
        single_raw_bps: single,
        parallel_raw_bps: parallel,
        channels: inputs.len(),
    })
}
