//! Multi-channel extraction runner.
//!
//! Every channel owns an [`Extractor`] and a sample reader and runs on its
//! own worker thread. Workers send completed blocks to a collector that
//! emits them round-robin: block 1 of channel 0, block 1 of channel 1, …,
//! block 2 of channel 0, and so on. Channels that run dry drop out of the
//! rotation. The interleaved stream depends only on the configuration, not
//! on thread scheduling.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::bits::{Bits, WORD_BITS};
use crate::error::{Error, Result};
use crate::orchestrator::config::{ChannelConfig, InputSource, RunConfig, SeedSource};
use crate::orchestrator::manifest::Manifest;
use crate::pipeline::Extractor;
use crate::source::{ChannelGenerator, RawFileReader, SourceModel};
use crate::toeplitz::{ExtractorDims, Seed};

/// Counters for one channel of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics {
    pub label: String,
    pub dims: ExtractorDims,
    pub samples_in: u64,
    pub bits_in: u64,
    pub blocks: u64,
    pub bits_out: u64,
    /// Steps of a trailing partial block that were dropped.
    pub discarded_steps: usize,
    /// Time spent inside the extractor.
    pub busy: Duration,
}

/// Interleaved output bits and their manifest.
#[derive(Debug, Clone)]
pub struct InterleavedOutput {
    pub bits: Bits,
    pub manifest: Manifest,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub metrics: Vec<ChannelMetrics>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct ExtractionRun {
    pub output: InterleavedOutput,
    pub metrics: Vec<ChannelMetrics>,
    pub elapsed: Duration,
}

impl ExtractionRun {
    /// Blocks of one channel, concatenated, recovered from the interleaved stream.
    pub fn channel_bits(&self, channel: usize) -> Bits {
        deinterleave(&self.output.bits, &self.metrics, channel)
    }
}

/// Splits a round-robin stream back into one channel's bits.
pub fn deinterleave(bits: &Bits, metrics: &[ChannelMetrics], channel: usize) -> Bits {
    let mut remaining: Vec<u64> = metrics.iter().map(|m| m.blocks).collect();
    let mut out = Bits::with_capacity((metrics[channel].bits_out) as usize);
    let mut pos = 0usize;
    while remaining.iter().any(|&r| r > 0) {
        for (c, m) in metrics.iter().enumerate() {
            if remaining[c] == 0 {
                continue;
            }
            let len = m.dims.m();
            if c == channel {
                out.extend_from_bits(&bits.slice(pos, len));
            }
            pos += len;
            remaining[c] -= 1;
        }
    }
    out
}

/// Runs the configuration and keeps the interleaved output in memory.
pub fn run_extraction(config: &RunConfig) -> Result<ExtractionRun> {
    let mut bits = Bits::new();
    let summary = run_with_sink(config, &mut |block: &Bits| {
        bits.extend_from_bits(block);
        Ok(())
    })?;
    Ok(ExtractionRun {
        output: InterleavedOutput {
            bits,
            manifest: summary.manifest,
        },
        metrics: summary.metrics,
        elapsed: summary.elapsed,
    })
}

/// Runs the configuration, streaming packed LSB-first bytes to `out`.
/// The final byte is zero-padded; the manifest records the exact bit count.
pub fn run_extraction_to<W: Write>(config: &RunConfig, out: W) -> Result<RunSummary> {
    let mut sink = ByteSink {
        pending: Bits::new(),
        out,
    };
    let summary = run_with_sink(config, &mut |block: &Bits| sink.push(block))?;
    sink.finish()?;
    Ok(summary)
}

struct ByteSink<W: Write> {
    pending: Bits,
    out: W,
}

impl<W: Write> ByteSink<W> {
    const FLUSH_BITS: usize = 1 << 16;

    fn push(&mut self, block: &Bits) -> Result<()> {
        self.pending.extend_from_bits(block);
        if self.pending.len() >= Self::FLUSH_BITS {
            let whole = self.pending.len() / WORD_BITS * WORD_BITS;
            let head = self.pending.slice(0, whole);
            self.out.write_all(&head.to_bytes())?;
            self.pending = self.pending.slice(whole, self.pending.len() - whole);
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.out.write_all(&self.pending.to_bytes())?;
        self.out.flush()?;
        Ok(())
    }
}

enum Message {
    Blocks(usize, Vec<Bits>),
    Done(usize, ChannelMetrics),
    Failed(Error),
}

enum SampleReader {
    File(RawFileReader),
    Simulated { generator: ChannelGenerator, remaining: u64 },
    Memory { samples: std::sync::Arc<Vec<u32>>, pos: usize },
}

impl SampleReader {
    fn open(input: &InputSource) -> Result<(Self, usize)> {
        Ok(match input {
            InputSource::File { path, sample_bits } => {
                (SampleReader::File(RawFileReader::open(path, *sample_bits)?), *sample_bits)
            }
            InputSource::Simulated { model, prng_seed, samples } => {
                // A one-channel model whose channel-0 stream is seeded from prng_seed.
                let single = SourceModel {
                    prng_seed: *prng_seed,
                    channels: vec![model.clone()],
                };
                (
                    SampleReader::Simulated {
                        generator: single.generator(0)?,
                        remaining: *samples,
                    },
                    model.adc_bits,
                )
            }
            InputSource::Memory { samples, sample_bits } => (
                SampleReader::Memory {
                    samples: samples.clone(),
                    pos: 0,
                },
                *sample_bits,
            ),
        })
    }

    fn fill(&mut self, buf: &mut Vec<u32>, max: usize) -> Result<()> {
        buf.clear();
        match self {
            SampleReader::File(r) => *buf = r.read_chunk(max)?,
            SampleReader::Simulated { generator, remaining } => {
                let n = (*remaining).min(max as u64) as usize;
                buf.resize(n, 0);
                generator.fill(buf);
                *remaining -= n as u64;
            }
            SampleReader::Memory { samples, pos } => {
                let end = (*pos + max).min(samples.len());
                buf.extend_from_slice(&samples[*pos..end]);
                *pos = end;
            }
        }
        Ok(())
    }
}

fn run_channel(
    index: usize,
    channel: &ChannelConfig,
    seed: Seed,
    config: &RunConfig,
    send: &mut dyn FnMut(Message) -> bool,
) -> Result<ChannelMetrics> {
    let mut extractor = Extractor::new(channel.dims, seed)?;
    let (mut reader, sample_bits) = SampleReader::open(&channel.input)?;
    let steps = channel.dims.steps() as u64;
    let limit = config.max_blocks.map(|b| b * steps);
    let mut buf = Vec::with_capacity(config.chunk_samples);
    let mut samples_in = 0u64;
    let mut busy = Duration::ZERO;
    loop {
        let want = match limit {
            Some(l) => (l - samples_in).min(config.chunk_samples as u64) as usize,
            None => config.chunk_samples,
        };
        if want == 0 {
            break;
        }
        reader.fill(&mut buf, want)?;
        if buf.is_empty() {
            break;
        }
        samples_in += buf.len() as u64;
        let start = Instant::now();
        let blocks = extractor.ingest_samples(&buf, sample_bits)?;
        busy += start.elapsed();
        if !blocks.is_empty() && !send(Message::Blocks(index, blocks)) {
            break;
        }
    }
    let discarded_steps = extractor.step_index();
    if discarded_steps != 0 {
        log::warn!(
            "channel {}: input ended {discarded_steps} steps into a block; partial block discarded",
            channel.label
        );
        extractor.reset();
    }
    Ok(ChannelMetrics {
        label: channel.label.clone(),
        dims: channel.dims,
        samples_in,
        bits_in: extractor.bits_in(),
        blocks: extractor.blocks_emitted(),
        bits_out: extractor.bits_out(),
        discarded_steps,
        busy,
    })
}

struct Collector<'a> {
    queues: Vec<VecDeque<Bits>>,
    finished: Vec<Option<ChannelMetrics>>,
    emitted: Vec<u64>,
    cursor: usize,
    sink: &'a mut dyn FnMut(&Bits) -> Result<()>,
}

impl Collector<'_> {
    fn accept(&mut self, msg: Message) -> Result<()> {
        match msg {
            Message::Blocks(c, blocks) => self.queues[c].extend(blocks),
            Message::Done(c, metrics) => self.finished[c] = Some(metrics),
            Message::Failed(e) => return Err(e),
        }
        Ok(())
    }

    fn exhausted(&self, c: usize) -> bool {
        self.finished[c].is_some() && self.queues[c].is_empty()
    }

    /// Emits blocks in rotation until the next due channel has nothing
    /// queued. Returns true once every channel is exhausted.
    fn drain(&mut self) -> Result<bool> {
        let n = self.queues.len();
        loop {
            if (0..n).all(|c| self.exhausted(c)) {
                return Ok(true);
            }
            let c = self.cursor;
            if let Some(block) = self.queues[c].pop_front() {
                (self.sink)(&block)?;
                self.emitted[c] += 1;
                self.cursor = (c + 1) % n;
            } else if self.finished[c].is_some() {
                self.cursor = (c + 1) % n;
            } else {
                return Ok(false);
            }
        }
    }
}

fn run_with_sink(config: &RunConfig, sink: &mut dyn FnMut(&Bits) -> Result<()>) -> Result<RunSummary> {
    let seeds = config.validate()?;
    let started = Instant::now();
    let n = config.channels.len();
    let mut collector = Collector {
        queues: vec![VecDeque::new(); n],
        finished: vec![None; n],
        emitted: vec![0; n],
        cursor: 0,
        sink,
    };

    if config.parallel && n > 1 {
        let (tx, rx) = mpsc::sync_channel::<Message>(4 * n);
        std::thread::scope(|scope| -> Result<()> {
            for (i, (channel, seed)) in config.channels.iter().zip(seeds.iter().cloned()).enumerate() {
                let tx = tx.clone();
                scope.spawn(move || {
                    let mut send = |m: Message| tx.send(m).is_ok();
                    let msg = match run_channel(i, channel, seed, config, &mut send) {
                        Ok(metrics) => Message::Done(i, metrics),
                        Err(e) => Message::Failed(e),
                    };
                    let _ = tx.send(msg);
                });
            }
            drop(tx);
            while !collector.drain()? {
                let msg = rx
                    .recv()
                    .map_err(|_| Error::config("extraction workers stopped unexpectedly"))?;
                collector.accept(msg)?;
            }
            Ok(())
        })?;
    } else {
        for (i, (channel, seed)) in config.channels.iter().zip(seeds.iter().cloned()).enumerate() {
            let mut pending = Vec::new();
            let metrics = run_channel(i, channel, seed, config, &mut |m| {
                pending.push(m);
                true
            })?;
            for m in pending {
                collector.accept(m)?;
            }
            collector.accept(Message::Done(i, metrics))?;
        }
        collector.drain()?;
    }

    let metrics: Vec<ChannelMetrics> = collector
        .finished
        .into_iter()
        .map(|m| m.expect("all channels finished"))
        .collect();
    debug_assert_eq!(
        collector.emitted,
        metrics.iter().map(|m| m.blocks).collect::<Vec<_>>()
    );
    let manifest = Manifest::for_run(config, &seeds, &metrics);
    Ok(RunSummary {
        manifest,
        metrics,
        elapsed: started.elapsed(),
    })
}

/// Describes a seed source for the manifest.
pub(crate) fn describe_seed(source: &SeedSource) -> String {
    match source {
        SeedSource::Derived => "derived".to_string(),
        SeedSource::File(p) => format!("file {}", p.display()),
        SeedSource::Given(_) => "given".to_string(),
    }
}
