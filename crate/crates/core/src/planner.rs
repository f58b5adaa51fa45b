//! Entropy estimation and extractor dimensioning.
//!
//! The number of nearly uniform bits that can be hashed out of a block is
//! bounded by the Leftover Hash Lemma, `l < H_min - 2·log2(1/ε)`, where
//! `H_min` is the min-entropy of the whole block. With `n/k` samples per
//! block and `h` bits of min-entropy per sample this gives the output length
//! `m` of the Toeplitz matrix.

use std::collections::HashMap;
use std::fmt;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::toeplitz::ExtractorDims;

/// ADC sampling and post-processing clock of the reference hardware.
pub const DEFAULT_CLOCK_HZ: f64 = 240e6;

/// Absorbs floating-point noise when the entropy bound lands on an integer.
const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyMethod {
    /// Plug-in estimate from observed sample frequencies.
    Empirical,
    /// Quantized centered Gaussian. `edge_mode` is set when a clipped edge
    /// bin, not the central bin, carries the largest probability.
    GaussianModel { edge_mode: bool },
    /// Supplied by the operator.
    Declared,
}

impl fmt::Display for EntropyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyMethod::Empirical => f.write_str("empirical"),
            EntropyMethod::GaussianModel { .. } => f.write_str("gaussian-model"),
            EntropyMethod::Declared => f.write_str("declared"),
        }
    }
}

/// Min-entropy per raw sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub h_min_per_sample: f64,
    pub sample_bits: usize,
    pub method: EntropyMethod,
    pub sample_count: u64,
}

impl EntropyEstimate {
    /// An operator-declared per-sample min-entropy, `0 ≤ h ≤ b`.
    pub fn declared(h_min_per_sample: f64, sample_bits: usize) -> Result<Self> {
        if !(0.0..=sample_bits as f64).contains(&h_min_per_sample) {
            return Err(Error::usage(format!(
                "min-entropy {h_min_per_sample} outside [0, {sample_bits}]"
            )));
        }
        Ok(EntropyEstimate {
            h_min_per_sample,
            sample_bits,
            method: EntropyMethod::Declared,
            sample_count: 0,
        })
    }
}

/// Security parameter `ε = 2^log2_epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecurityParameter {
    log2_epsilon: i32,
}

impl SecurityParameter {
    pub fn new(log2_epsilon: i32) -> Result<Self> {
        if log2_epsilon >= 0 {
            return Err(Error::usage(format!(
                "log2(epsilon) must be negative, got {log2_epsilon}"
            )));
        }
        Ok(SecurityParameter { log2_epsilon })
    }

    pub fn log2_epsilon(&self) -> i32 {
        self.log2_epsilon
    }

    /// Entropy spent on security, `2·log2(1/ε)` bits.
    pub fn cost_bits(&self) -> f64 {
        2.0 * (-self.log2_epsilon) as f64
    }
}

/// Default sample-count floor below which the plug-in estimate is flagged.
pub fn default_sample_floor(sample_bits: usize) -> u64 {
    1u64 << (sample_bits + 6).min(63)
}

/// `-log2` of the most frequent sample value's observed frequency.
pub fn empirical_min_entropy(samples: &[u32], sample_bits: usize) -> Result<EntropyEstimate> {
    empirical_min_entropy_with_floor(samples, sample_bits, default_sample_floor(sample_bits))
}

pub fn empirical_min_entropy_with_floor(
    samples: &[u32],
    sample_bits: usize,
    floor: u64,
) -> Result<EntropyEstimate> {
    if samples.is_empty() {
        return Err(Error::usage("min-entropy of an empty sample set"));
    }
    if sample_bits == 0 || sample_bits > 32 {
        return Err(Error::usage(format!("unsupported sample width {sample_bits}")));
    }
    if sample_bits < 32 {
        if let Some(&bad) = samples.iter().find(|&&s| s >> sample_bits != 0) {
            return Err(Error::usage(format!(
                "sample value {bad} does not fit in {sample_bits} bits"
            )));
        }
    }
    if (samples.len() as u64) < floor {
        log::warn!(
            "min-entropy from {} samples is below the {floor}-sample floor; p_max is noisy",
            samples.len()
        );
    }
    let max_count = if sample_bits <= 24 {
        let mut counts = vec![0u64; 1 << sample_bits];
        for &s in samples {
            counts[s as usize] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    } else {
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for &s in samples {
            *counts.entry(s).or_default() += 1;
        }
        counts.into_values().max().unwrap_or(0)
    };
    let p_max = max_count as f64 / samples.len() as f64;
    Ok(EntropyEstimate {
        h_min_per_sample: (-p_max.log2()).max(0.0),
        sample_bits,
        method: EntropyMethod::Empirical,
        sample_count: samples.len() as u64,
    })
}

fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Probability that a centered Gaussian of width `sigma` (in codes)
/// quantizes to `code`, with mass beyond the ADC range clipped into the
/// edge codes. Matches [`crate::source::SourceModel::generate`].
pub fn quantized_gaussian_bin(sigma: f64, sample_bits: usize, full_range: f64, code: u64) -> f64 {
    let levels = 1u64 << sample_bits;
    let delta = full_range / levels as f64;
    let mid = (levels / 2) as f64;
    let lo = if code == 0 {
        f64::NEG_INFINITY
    } else {
        (code as f64 - mid - 0.5) * delta / sigma
    };
    let hi = if code == levels - 1 {
        f64::INFINITY
    } else {
        (code as f64 - mid + 0.5) * delta / sigma
    };
    // Difference of upper tails is better conditioned on the right side.
    if lo >= 0.0 {
        std_normal_cdf(-lo) - std_normal_cdf(-hi)
    } else {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    }
}

/// Min-entropy of a centered Gaussian quantized to `2^b` codes over
/// `full_range`, edge codes absorbing the clipped tails.
pub fn gaussian_model_min_entropy(sigma: f64, sample_bits: usize, full_range: f64) -> Result<EntropyEstimate> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::usage(format!("sigma must be positive, got {sigma}")));
    }
    if !(full_range > 0.0) {
        return Err(Error::usage(format!("ADC range must be positive, got {full_range}")));
    }
    if sample_bits == 0 || sample_bits > 32 {
        return Err(Error::usage(format!("unsupported sample width {sample_bits}")));
    }
    let levels = 1u64 << sample_bits;
    // The density peaks on the central code; only the clipped edges can beat it.
    let center = quantized_gaussian_bin(sigma, sample_bits, full_range, levels / 2);
    let low = quantized_gaussian_bin(sigma, sample_bits, full_range, 0);
    let high = quantized_gaussian_bin(sigma, sample_bits, full_range, levels - 1);
    let edge = low.max(high);
    let p_max = center.max(edge);
    let edge_mode = edge > center;
    if edge_mode {
        log::warn!("clipped edge code dominates the quantized Gaussian (sigma={sigma})");
    }
    Ok(EntropyEstimate {
        h_min_per_sample: (-p_max.log2()).clamp(0.0, sample_bits as f64),
        sample_bits,
        method: EntropyMethod::GaussianModel { edge_mode },
        sample_count: 0,
    })
}

/// Sigma (in codes) whose quantized Gaussian has min-entropy `target` bits.
/// Searches the rising branch below the point where edge codes take over.
pub fn sigma_for_min_entropy(target: f64, sample_bits: usize, full_range: f64) -> Result<f64> {
    let h = |s: f64| gaussian_model_min_entropy(s, sample_bits, full_range).map(|e| e.h_min_per_sample);
    let delta = full_range / (1u64 << sample_bits) as f64;
    let mut lo = delta * 1e-3;
    let mut hi = lo;
    // Walk up to the peak of h(sigma).
    let mut best = h(hi)?;
    loop {
        let next = hi * 1.1;
        let hn = h(next)?;
        if hn >= target {
            hi = next;
            break;
        }
        if hn < best {
            return Err(Error::Infeasible(format!(
                "a clipped Gaussian over {sample_bits}-bit codes peaks at {best:.3} bits, below {target}"
            )));
        }
        best = hn;
        lo = hi;
        hi = next;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Largest output length `m` allowed by the entropy of one block.
///
/// When `samples·h - 2·log2(1/ε)` is an exact integer that integer is
/// returned, as in the published 548-bit configuration.
pub fn extractable_bits(h: &EntropyEstimate, samples_per_block: usize, eps: &SecurityParameter) -> Result<usize> {
    if samples_per_block == 0 {
        return Err(Error::usage("a block needs at least one sample"));
    }
    bits_from_budget(samples_per_block as f64 * h.h_min_per_sample, eps)
}

fn bits_from_budget(block_entropy: f64, eps: &SecurityParameter) -> Result<usize> {
    let bound = block_entropy - eps.cost_bits();
    let m = (bound + BOUND_TOLERANCE).floor();
    if m < 1.0 {
        return Err(Error::Infeasible(format!(
            "block min-entropy {block_entropy:.3} bits does not exceed the {} bit security cost",
            eps.cost_bits()
        )));
    }
    Ok(m as usize)
}

/// Dimensioning of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub dims: ExtractorDims,
    pub extraction_ratio: f64,
    pub per_channel_output_bps: f64,
    pub clock_hz: f64,
    pub block_entropy_bits: f64,
    pub security_cost_bits: f64,
    /// The bound landed exactly on `m`; the strict inequality is met with equality.
    pub boundary_inclusive: bool,
    pub feasible: bool,
    pub reason: String,
}

impl PlanResult {
    /// Machine-readable `key: value` lines.
    pub fn to_kv(&self) -> String {
        format!(
            "m: {}\nn: {}\nk: {}\nextraction_ratio: {:.6}\nblock_entropy_bits: {:.4}\n\
             security_cost_bits: {}\nboundary_inclusive: {}\nclock_hz: {}\n\
             per_channel_output_bps: {:.1}\nfeasible: {}\nreason: {}\n",
            self.dims.m(),
            self.dims.n(),
            self.dims.k(),
            self.extraction_ratio,
            self.block_entropy_bits,
            self.security_cost_bits,
            self.boundary_inclusive,
            self.clock_hz,
            self.per_channel_output_bps,
            self.feasible,
            self.reason
        )
    }
}

impl fmt::Display for PlanResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "matrix         {} x {}", self.dims.m(), self.dims.n())?;
        writeln!(f, "step bits      {}", self.dims.k())?;
        writeln!(f, "ratio          {:.4}", self.extraction_ratio)?;
        writeln!(
            f,
            "entropy/block  {:.2} bits (security cost {} bits)",
            self.block_entropy_bits, self.security_cost_bits
        )?;
        writeln!(
            f,
            "output rate    {:.4} Gbps at {:.0} MHz",
            self.per_channel_output_bps / 1e9,
            self.clock_hz / 1e6
        )?;
        write!(
            f,
            "feasible       {}{}",
            self.feasible,
            if self.reason.is_empty() {
                String::new()
            } else {
                format!(" ({})", self.reason)
            }
        )
    }
}

/// Dimensions for an `n`-bit block consumed `k` bits per step, at the
/// default 240 MHz clock.
pub fn plan_dims(h: &EntropyEstimate, n: usize, k: usize, eps: &SecurityParameter) -> Result<PlanResult> {
    plan_dims_at(h, n, k, eps, DEFAULT_CLOCK_HZ)
}

pub fn plan_dims_at(
    h: &EntropyEstimate,
    n: usize,
    k: usize,
    eps: &SecurityParameter,
    clock_hz: f64,
) -> Result<PlanResult> {
    if k == 0 || n == 0 || n % k != 0 {
        return Err(Error::usage(format!("k={k} must divide n={n}")));
    }
    if h.sample_bits == 0 {
        return Err(Error::usage("sample width must be positive"));
    }
    let block_entropy = n as f64 * h.h_min_per_sample / h.sample_bits as f64;
    let m = bits_from_budget(block_entropy, eps)?;
    let dims = ExtractorDims::new(m, n, k)?;
    let bound = block_entropy - eps.cost_bits();
    let boundary_inclusive = (bound - m as f64).abs() <= BOUND_TOLERANCE;
    let (feasible, reason) = if k == h.sample_bits {
        (
            true,
            if boundary_inclusive {
                "entropy bound is an exact integer; taken inclusively".to_string()
            } else {
                String::new()
            },
        )
    } else {
        (
            false,
            format!(
                "step size k={k} differs from the {}-bit sample width; not real-time",
                h.sample_bits
            ),
        )
    };
    let rates = throughput(&[dims], clock_hz)?;
    Ok(PlanResult {
        dims,
        extraction_ratio: dims.ratio(),
        per_channel_output_bps: rates.aggregate_output_bps,
        clock_hz,
        block_entropy_bits: block_entropy,
        security_cost_bits: eps.cost_bits(),
        boundary_inclusive,
        feasible,
        reason,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRate {
    pub dims: ExtractorDims,
    pub raw_bps: f64,
    pub output_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputPlan {
    pub clock_hz: f64,
    pub channels: Vec<ChannelRate>,
    pub aggregate_raw_bps: f64,
    pub aggregate_output_bps: f64,
}

/// Modeled rates when each channel consumes one `k`-bit step per clock.
pub fn throughput(dims: &[ExtractorDims], clock_hz: f64) -> Result<ThroughputPlan> {
    if !(clock_hz > 0.0) {
        return Err(Error::usage(format!("clock must be positive, got {clock_hz}")));
    }
    let channels: Vec<ChannelRate> = dims
        .iter()
        .map(|d| {
            let raw = clock_hz * d.k() as f64;
            ChannelRate {
                dims: *d,
                raw_bps: raw,
                output_bps: raw * d.m() as f64 / d.n() as f64,
            }
        })
        .collect();
    Ok(ThroughputPlan {
        clock_hz,
        aggregate_raw_bps: channels.iter().map(|c| c.raw_bps).sum(),
        aggregate_output_bps: channels.iter().map(|c| c.output_bps).sum(),
        channels,
    })
}
