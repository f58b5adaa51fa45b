//! Command-line surface: `plan`, `simulate`, `extract`, `analyze`, `bench`.
//!
//! Exit codes: 0 success, 1 usage, 2 configuration, 3 data format,
//! 4 infeasible.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::orchestrator::{
    kernel_throughput, meter, parallel_scaling, run_extraction_to, ChannelConfig, InputSource, Manifest,
    RunConfig, SeedSource,
};
use crate::planner::{
    empirical_min_entropy, gaussian_model_min_entropy, plan_dims_at, EntropyEstimate, SecurityParameter,
    DEFAULT_CLOCK_HZ,
};
use crate::source::{read_raw_file, write_raw_file, SourceModel};
use crate::stats::{
    acf, batch_monitor, ccf, decimalize, export_sts, run_suite, MonitorConfig, NativeTest, StsFormat,
};
use crate::toeplitz::{matvec_blocked, matvec_full, ColumnTable, ExtractorDims};

#[derive(Debug, Parser)]
#[command(name = "toeplitz-qrng", version, about = "Multi-channel Toeplitz-hashing randomness extraction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choose matrix dimensions from a min-entropy estimate.
    Plan(PlanArgs),
    /// Write simulated raw sample files, one per channel.
    Simulate(SimulateArgs),
    /// Run multi-channel extraction.
    Extract(ExtractArgs),
    /// Correlation, randomness tests and divergence monitoring of a stream.
    Analyze(AnalyzeArgs),
    /// Kernel and end-to-end throughput.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Declared min-entropy per sample, in bits.
    #[arg(long, conflicts_with_all = ["raw", "sigma"])]
    pub hmin: Option<f64>,
    /// Estimate min-entropy empirically from a raw sample file.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    /// Estimate min-entropy from a quantized Gaussian of this width (ADC codes).
    #[arg(long, conflicts_with = "raw")]
    pub sigma: Option<f64>,
    /// ADC range in codes, for --sigma.
    #[arg(long, default_value_t = 65536.0)]
    pub adc_range: f64,
    /// Sample width in bits.
    #[arg(long, default_value_t = 16)]
    pub bits: usize,
    #[arg(long, default_value_t = 768)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value_t = -50, allow_negative_numbers = true)]
    pub eps_log2: i32,
    #[arg(long, default_value_t = DEFAULT_CLOCK_HZ)]
    pub clock_hz: f64,
    /// Also write the key-value report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Samples per channel.
    #[arg(long, default_value_t = 480_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Lag-one correlation of the classical noise term.
    #[arg(long, default_value_t = 0.0)]
    pub classical_correlation: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with_all = ["input", "m"])]
    pub config: Option<PathBuf>,
    /// Raw sample files, one per channel (without --config).
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Output rows per channel, matching --input order.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 768)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long)]
    pub max_blocks: Option<u64>,
    /// Run channels one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
    /// Output bitstream; the manifest goes to `<out>.manifest`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExportFormat {
    Binary,
    Ascii,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Raw sample file or extracted bitstream, read as little-endian 16-bit words.
    #[arg(long)]
    pub input: PathBuf,
    /// Prefix for written reports (defaults to the input path).
    #[arg(long)]
    pub out_prefix: Option<PathBuf>,
    /// Autocorrelation up to this lag.
    #[arg(long)]
    pub acf: Option<usize>,
    /// Cross-correlate with a second stream.
    #[arg(long)]
    pub ccf: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub max_lag: usize,
    /// Run the native randomness tests.
    #[arg(long)]
    pub tests: bool,
    #[arg(long, default_value_t = 100_000)]
    pub seq_bits: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Split the stream into this many batches and monitor pass rate and divergence.
    #[arg(long)]
    pub monitor: Option<usize>,
    /// Write the stream for the external test battery.
    #[arg(long)]
    pub export_sts: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExportFormat::Binary)]
    pub sts_format: ExportFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Samples per channel.
    #[arg(long, default_value_t = 48 * 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Plan(a) => plan(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Extract(a) => extract(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn plan(a: PlanArgs, out: &mut dyn Write) -> Result<()> {
    let estimate: EntropyEstimate = match (a.hmin, &a.raw, a.sigma) {
        (Some(h), None, None) => EntropyEstimate::declared(h, a.bits)?,
        (None, Some(path), None) => empirical_min_entropy(&read_raw_file(path, a.bits)?.samples, a.bits)?,
        (None, None, Some(sigma)) => gaussian_model_min_entropy(sigma, a.bits, a.adc_range)?,
        _ => return Err(Error::usage("give one of --hmin, --raw or --sigma")),
    };
    let eps = SecurityParameter::new(a.eps_log2)?;
    let result = plan_dims_at(&estimate, a.n, a.k, &eps, a.clock_hz)?;
    writeln!(
        out,
        "min-entropy    {:.4} bits/sample ({}, {} samples)",
        estimate.h_min_per_sample, estimate.method, estimate.sample_count
    )?;
    writeln!(out, "{result}")?;
    let kv = format!(
        "h_min_per_sample: {}\nmethod: {}\nlog2_epsilon: {}\n{}",
        estimate.h_min_per_sample,
        estimate.method,
        a.eps_log2,
        result.to_kv()
    );
    match &a.report {
        Some(path) => fs::write(path, kv)?,
        None => write!(out, "---\n{kv}")?,
    }
    Ok(())
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    let model = SourceModel::reference(a.seed).with_classical_correlation(a.classical_correlation);
    for (i, ch) in model.channels.iter().enumerate() {
        let stream = model.generate(i, a.samples)?;
        let path = a.out_dir.join(format!("ch{i}.raw"));
        write_raw_file(&path, &stream)?;
        let model_h = gaussian_model_min_entropy(ch.sigma_total(), ch.adc_bits, ch.adc_range)?;
        let empirical = empirical_min_entropy(&stream.samples, ch.adc_bits).ok();
        writeln!(
            out,
            "{}  {:<7} sigma_q={:.1} sigma_c={:.1} snr={:.2} dB  h_model={:.3}  h_empirical={}",
            path.display(),
            ch.label,
            ch.sigma_quantum,
            ch.sigma_classical,
            ch.snr_db(),
            model_h.h_min_per_sample,
            empirical.map_or("-".to_string(), |e| format!("{:.3}", e.h_min_per_sample)),
        )?;
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn extract(a: ExtractArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            if a.input.is_empty() {
                return Err(Error::usage("give --config or --input files"));
            }
            if a.m.len() != a.input.len() {
                return Err(Error::usage(format!(
                    "{} inputs but {} values of --m",
                    a.input.len(),
                    a.m.len()
                )));
            }
            let channels = a
                .input
                .iter()
                .zip(&a.m)
                .enumerate()
                .map(|(i, (path, &m))| {
                    Ok(ChannelConfig {
                        label: format!("ch{i}"),
                        dims: ExtractorDims::new(m, a.n, a.k)?,
                        seed: SeedSource::Derived,
                        input: InputSource::File {
                            path: path.clone(),
                            sample_bits: a.k,
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            RunConfig::new(a.master_seed, channels)
        }
    };
    if a.max_blocks.is_some() {
        config.max_blocks = a.max_blocks;
    }
    if a.sequential {
        config.parallel = false;
    }
    let file = BufWriter::new(fs::File::create(&a.out)?);
    let summary = run_extraction_to(&config, file)?;
    fs::write(manifest_path(&a.out), summary.manifest.to_text())?;
    let report = meter(&summary.metrics, summary.elapsed, DEFAULT_CLOCK_HZ)?;
    writeln!(
        out,
        "wrote {} bits to {}",
        summary.manifest.total_bits().unwrap_or(0),
        a.out.display()
    )?;
    write!(out, "{}", report.to_table())?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Reads a stream as bits, honoring `total_bits` from an adjacent manifest.
fn read_stream(path: &Path) -> Result<Bits> {
    let bytes = fs::read(path)?;
    let mut len = bytes.len() * 8;
    let mpath = manifest_path(path);
    if mpath.exists() {
        if let Some(total) = Manifest::parse(&fs::read_to_string(&mpath)?)?.total_bits() {
            len = total as usize;
        }
    }
    Bits::from_bytes(&bytes, len)
}

fn words16(bits: &Bits) -> Result<Vec<u32>> {
    let usable = bits.len() / 16 * 16;
    decimalize(&bits.slice(0, usable), 16)
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let prefix = a.out_prefix.clone().unwrap_or_else(|| a.input.clone());
    let bits = read_stream(&a.input)?;
    let words = words16(&bits)?;
    writeln!(out, "{}: {} bits, {} 16-bit words", a.input.display(), bits.len(), words.len())?;
    let mut did_something = false;

    if let Some(lag) = a.acf {
        let series = acf(&words, lag)?;
        let path = with_suffix(&prefix, ".acf.tsv");
        fs::write(&path, series.to_tsv())?;
        writeln!(
            out,
            "acf: rho(0)={:.6} max|rho(tau!=0)|={:.3e} mean={:.3e} -> {}",
            series.values[0],
            series.max_abs_off_zero(),
            series.mean_abs_off_zero(),
            path.display()
        )?;
        did_something = true;
    }
    if let Some(other) = &a.ccf {
        let other_words = words16(&read_stream(other)?)?;
        let n = words.len().min(other_words.len());
        let series = ccf(&words[..n], &other_words[..n], a.max_lag)?;
        let path = with_suffix(&prefix, ".ccf.tsv");
        fs::write(&path, series.to_tsv())?;
        writeln!(
            out,
            "ccf: max|rho|={:.3e} over {} points -> {}",
            series.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            n,
            path.display()
        )?;
        did_something = true;
    }
    if a.tests {
        let reports = run_suite(&bits, a.seq_bits, &NativeTest::standard_set(), a.alpha)?;
        let path = with_suffix(&prefix, ".tests.kv");
        let mut kv = String::new();
        writeln!(out, "{:<22} {:>6} {:>10} {:>20}", "test", "seqs", "pass", "interval")?;
        for r in &reports {
            writeln!(
                out,
                "{:<22} {:>6} {:>10.4} {:>9.4}..{:<9.4}{}",
                r.test_name,
                r.p_values.len(),
                r.pass_proportion,
                r.confidence_interval.0,
                r.confidence_interval.1,
                if r.within_interval() { "" } else { " OUT" }
            )?;
            kv.push_str(&r.to_kv());
            kv.push('\n');
        }
        fs::write(&path, kv)?;
        did_something = true;
    }
    if let Some(batches) = a.monitor {
        if batches < 2 {
            return Err(Error::usage("--monitor needs at least 2 batches"));
        }
        let per = bits.len() / batches / 16 * 16;
        let parts: Vec<Bits> = (0..batches).map(|i| bits.slice(i * per, per)).collect();
        let config = MonitorConfig {
            sequence_bits: a.seq_bits.min(per),
            alpha: a.alpha,
            ..MonitorConfig::default()
        };
        let timeline = batch_monitor(&parts, &config)?;
        let path = with_suffix(&prefix, ".monitor.tsv");
        fs::write(&path, timeline.to_tsv())?;
        writeln!(
            out,
            "monitor: {} batches, {} bins, kld median {:.3e} spread {:.3e} -> {}",
            batches,
            timeline.kld.bin_count,
            timeline.kld.median(),
            timeline.kld.spread(),
            path.display()
        )?;
        did_something = true;
    }
    if let Some(path) = &a.export_sts {
        let format = match a.sts_format {
            ExportFormat::Binary => StsFormat::Binary,
            ExportFormat::Ascii => StsFormat::Ascii,
        };
        let mut w = BufWriter::new(fs::File::create(path)?);
        export_sts(&bits, format, &mut w)?;
        w.flush()?;
        writeln!(out, "exported {} bits -> {}", bits.len(), path.display())?;
        did_something = true;
    }
    if !did_something {
        return Err(Error::usage(
            "nothing to do: pass --acf, --ccf, --tests, --monitor or --export-sts",
        ));
    }
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let model = SourceModel::reference(a.seed);
    let dims: Vec<ExtractorDims> = [519, 548, 581]
        .iter()
        .map(|&m| ExtractorDims::new(m, 768, 16))
        .collect::<Result<_>>()?;
    let inputs: Vec<(ExtractorDims, Arc<Vec<u32>>)> = dims
        .iter()
        .enumerate()
        .map(|(i, d)| Ok((*d, Arc::new(model.generate(i, a.samples)?.samples))))
        .collect::<Result<_>>()?;

    writeln!(out, "kernel throughput at {} (raw input, one thread)", dims[0])?;
    let seed = crate::orchestrator::derive_seed(a.seed, 0, &dims[0]);
    let raw: Vec<Bits> = inputs[0].1.chunks_exact(48).take(200).map(|c| {
        let mut b = Bits::new();
        c.iter().for_each(|&s| b.push_word(s as u64, 16));
        b
    }).collect();
    let timed = |f: &dyn Fn(&Bits) -> Result<Bits>| -> Result<f64> {
        let start = Instant::now();
        for r in &raw {
            std::hint::black_box(f(r)?);
        }
        Ok((raw.len() * 768) as f64 / start.elapsed().as_secs_f64())
    };
    let table = ColumnTable::new(&seed, &dims[0])?;
    let full = timed(&|r| matvec_full(&seed, &dims[0], r))?;
    let blocked = timed(&|r| matvec_blocked(&seed, &dims[0], r))?;
    let columns = timed(&|r| table.multiply(r))?;
    let streaming = kernel_throughput(dims[0], &inputs[0].1)?;
    writeln!(out, "  {:<28} {:>12.2} Mbps", "entry-by-entry reference", full / 1e6)?;
    writeln!(out, "  {:<28} {:>12.2} Mbps", "windowed sub-matrix steps", blocked / 1e6)?;
    writeln!(out, "  {:<28} {:>12.2} Mbps", "column table, whole block", columns / 1e6)?;
    writeln!(out, "  {:<28} {:>12.2} Mbps", "streaming extractor", streaming / 1e6)?;

    let scaling = parallel_scaling(&inputs)?;
    writeln!(out, "end-to-end runner")?;
    writeln!(out, "  single channel   {:>12.2} Mbps", scaling.single_raw_bps / 1e6)?;
    writeln!(
        out,
        "  {} channels       {:>12.2} Mbps  (x{:.2}, {} hardware threads)",
        scaling.channels,
        scaling.parallel_raw_bps / 1e6,
        scaling.ratio(),
        std::thread::available_parallelism().map_or(1, |n| n.get())
    )?;

    let config = RunConfig::new(
        a.seed,
        inputs
            .iter()
            .enumerate()
            .map(|(i, (d, s))| ChannelConfig {
                label: model.channels[i].label.clone(),
                dims: *d,
                seed: SeedSource::Derived,
                input: InputSource::Memory {
                    samples: s.clone(),
                    sample_bits: 16,
                },
            })
            .collect(),
    );
    let run = crate::orchestrator::run_extraction(&config)?;
    write!(out, "{}", meter(&run.metrics, run.elapsed, DEFAULT_CLOCK_HZ)?.to_table())?;
    Ok(())
}
