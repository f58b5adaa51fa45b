use crate::error::{Error, Result};

/// Counts of values falling into `2^j` equal-width bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Bins `value_bits`-bit values into `bins` buckets by their top bits.
    /// `bins` must be a power of two no larger than `2^value_bits`.
    pub fn of_values(values: &[u32], value_bits: usize, bins: usize) -> Result<Self> {
        if !bins.is_power_of_two() || bins.trailing_zeros() as usize > value_bits {
            return Err(Error::usage(format!(
                "{bins} bins do not evenly partition {value_bits}-bit values"
            )));
        }
        let shift = value_bits - bins.trailing_zeros() as usize;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let bin = (v as u64 >> shift) as usize;
            if bin >= bins {
                return Err(Error::usage(format!("value {v} exceeds {value_bits} bits")));
            }
            counts[bin] += 1;
        }
        Ok(Histogram {
            counts,
            total: values.len() as u64,
        })
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Histogram { counts, total }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }
}

/// One bin per 16-bit value when there are at least 2^20 values, otherwise 256.
pub fn default_bins(value_count: usize) -> usize {
    if value_count >= 1 << 20 {
        1 << 16
    } else {
        1 << 8
    }
}

/// Expected divergence, in bits, between an `n`-sample histogram and its
/// source distribution over `bins` bins: `(B-1) / (2N ln 2)`.
pub fn chi2_level(bins: usize, n: u64) -> f64 {
    (bins as f64 - 1.0) / (2.0 * n as f64 * std::f64::consts::LN_2)
}

/// `D(sample ‖ reference)` in bits.
///
/// `smoothing` pseudo-counts are added to every reference bin so that bins
/// empty in the reference but occupied in the sample stay finite. With no
/// smoothing such a bin makes the divergence infinite.
pub fn kld(reference: &Histogram, sample: &Histogram, smoothing: f64) -> Result<f64> {
    if reference.bins() != sample.bins() {
        return Err(Error::usage(format!(
            "histograms have {} and {} bins",
            reference.bins(),
            sample.bins()
        )));
    }
    if reference.total == 0 || sample.total == 0 {
        return Err(Error::usage("divergence of an empty histogram"));
    }
    if !(smoothing >= 0.0) {
        return Err(Error::usage(format!("smoothing {smoothing} is negative")));
    }
    let q_total = reference.total as f64 + smoothing * reference.bins() as f64;
    let p_total = sample.total as f64;
    let mut d = 0.0;
    for (&pc, &qc) in sample.counts.iter().zip(&reference.counts) {
        if pc == 0 {
            continue;
        }
        let p = pc as f64 / p_total;
        let q = (qc as f64 + smoothing) / q_total;
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        d += p * (p / q).log2();
    }
    Ok(d.max(0.0))
}

/// Divergence of a series of batch histograms from one reference.
#[derive(Debug, Clone, PartialEq)]
pub struct KldReport {
    pub reference_histogram: Histogram,
    pub batch_kld: Vec<f64>,
    pub reference_batch: usize,
    pub bin_count: usize,
}

impl KldReport {
    /// Divergences of every batch except the reference itself.
    pub fn comparisons(&self) -> Vec<f64> {
        self.batch_kld
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.reference_batch)
            .map(|(_, &d)| d)
            .collect()
    }

    /// Largest minus smallest divergence over [`comparisons`](Self::comparisons).
    pub fn spread(&self) -> f64 {
        let v = self.comparisons();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        if v.is_empty() {
            0.0
        } else {
            max - min
        }
    }

    pub fn median(&self) -> f64 {
        let mut v = self.comparisons();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            0.0
        } else if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}
