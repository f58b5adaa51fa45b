use std::fmt::Write as _;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::stats::correlation::decimalize;
use crate::stats::kld::{default_bins, kld, Histogram, KldReport};
use crate::stats::nist::{run_suite, NativeTest, TestReport};

/// Settings for long-run stability monitoring.
#[derive(Debug, Clone)]
pub struct MonitorConfig {
    pub tests: Vec<NativeTest>,
    pub sequence_bits: usize,
    pub alpha: f64,
    pub reference_batch: usize,
    pub word_bits: usize,
    /// Histogram bins; `None` picks [`default_bins`] from the batch size.
    pub bins: Option<usize>,
    pub smoothing: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            tests: NativeTest::standard_set(),
            sequence_bits: 100_000,
            alpha: 0.01,
            reference_batch: 0,
            word_bits: 16,
            bins: None,
            smoothing: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimelinePoint {
    pub batch: usize,
    /// Smallest pass proportion over all tests.
    pub min_pass_rate: f64,
    pub kld: f64,
    pub reports: Vec<TestReport>,
}

#[derive(Debug, Clone)]
pub struct Timeline {
    pub points: Vec<TimelinePoint>,
    pub kld: KldReport,
}

impl Timeline {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("batch\tmin_pass_rate\tkld_bits\n");
        for p in &self.points {
            let _ = writeln!(out, "{}\t{:.6}\t{:.9}", p.batch, p.min_pass_rate, p.kld);
        }
        out
    }
}

/// Per batch: the minimum pass proportion over the configured tests, and
/// the divergence of its decimalized histogram from the reference batch.
pub fn batch_monitor(batches: &[Bits], config: &MonitorConfig) -> Result<Timeline> {
    if batches.len() < 2 {
        return Err(Error::usage("batch monitoring needs at least two batches"));
    }
    if config.reference_batch >= batches.len() {
        return Err(Error::usage(format!(
            "reference batch {} out of {} batches",
            config.reference_batch,
            batches.len()
        )));
    }
    let values = batches
        .iter()
        .map(|b| {
            let usable = b.len() / config.word_bits * config.word_bits;
            decimalize(&b.slice(0, usable), config.word_bits)
        })
        .collect::<Result<Vec<_>>>()?;
    let bins = config.bins.unwrap_or_else(|| {
        default_bins(values.iter().map(Vec::len).min().unwrap_or(0))
    });
    let hists = values
        .iter()
        .map(|v| Histogram::of_values(v, config.word_bits, bins))
        .collect::<Result<Vec<_>>>()?;
    let reference = &hists[config.reference_batch];

    let mut points = Vec::with_capacity(batches.len());
    for (i, (batch, hist)) in batches.iter().zip(&hists).enumerate() {
        let reports = if config.tests.is_empty() {
            Vec::new()
        } else {
            run_suite(batch, config.sequence_bits, &config.tests, config.alpha)?
        };
        let min_pass_rate = reports
            .iter()
            .map(|r| r.pass_proportion)
            .fold(f64::INFINITY, f64::min);
        points.push(TimelinePoint {
            batch: i,
            min_pass_rate: if reports.is_empty() { f64::NAN } else { min_pass_rate },
            kld: kld(reference, hist, config.smoothing)?,
            reports,
        });
    }
    Ok(Timeline {
        kld: KldReport {
            reference_histogram: reference.clone(),
            batch_kld: points.iter().map(|p| p.kld).collect(),
            reference_batch: config.reference_batch,
            bin_count: bins,
        },
        points,
    })
}
