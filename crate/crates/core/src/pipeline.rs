//! Streaming extractor.
//!
//! Each call to [`Extractor::ingest_step`] performs one pipeline step: select
//! the sub-matrix for the current step, multiply it by a `k`-bit step word
//! and XOR the result into the running accumulator. After `n/k` steps the
//! accumulator holds the full Toeplitz product for the block; it is emitted
//! and cleared.
//!
//! The seed is fixed for the lifetime of an extractor. Stepping through the
//! seed windows is equivalent to a seed register rotated by `k` bits per step
//! against a fixed read port.

use crate::bits::{Bits, WORD_BITS};
use crate::error::{Error, Result};
use crate::toeplitz::{ColumnTable, ExtractorDims, OutputBlock, Seed, StepWord};

/// Extraction state for one channel.
#[derive(Debug, Clone)]
pub struct Extractor {
    seed: Seed,
    table: ColumnTable,
    step_index: usize,
    acc: Vec<u64>,
    blocks_emitted: u64,
    bits_in: u64,
    bits_out: u64,
}

impl Extractor {
    pub fn new(dims: ExtractorDims, seed: Seed) -> Result<Self> {
        let table = ColumnTable::new(&seed, &dims)?;
        let acc = vec![0; table.stride()];
        Ok(Extractor {
            seed,
            table,
            step_index: 0,
            acc,
            blocks_emitted: 0,
            bits_in: 0,
            bits_out: 0,
        })
    }

    pub fn dims(&self) -> &ExtractorDims {
        self.table.dims()
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    /// Steps taken since the last emission, `0 ..= n/k - 1`.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn blocks_emitted(&self) -> u64 {
        self.blocks_emitted
    }

    pub fn bits_in(&self) -> u64 {
        self.bits_in
    }

    pub fn bits_out(&self) -> u64 {
        self.bits_out
    }

    /// The partial product accumulated so far in this block.
    pub fn accumulator(&self) -> OutputBlock {
        self.table.finish(&self.acc)
    }

    /// Consumes one `k`-bit step word; returns the block completed by it, if any.
    pub fn ingest_step(&mut self, step: &StepWord) -> Result<Option<OutputBlock>> {
        let k = self.dims().k();
        if step.len() != k {
            return Err(Error::usage(format!(
                "step word has {} bits, extractor takes k={k}",
                step.len()
            )));
        }
        self.table.accumulate_bits(self.step_index, step, &mut self.acc);
        Ok(self.advance())
    }

    /// Consumes `b`-bit samples, one step word per sample with the sample's
    /// least-significant bit as the first raw bit. Requires `b == k`.
    pub fn ingest_samples(&mut self, samples: &[u32], sample_bits: usize) -> Result<Vec<OutputBlock>> {
        let mut blocks = Vec::new();
        self.ingest_samples_with(samples, sample_bits, |block| blocks.push(block))?;
        Ok(blocks)
    }

    /// Like [`ingest_samples`](Self::ingest_samples), appending completed
    /// blocks to a packed bitstream. Returns the number of blocks appended.
    pub fn ingest_samples_into(&mut self, samples: &[u32], sample_bits: usize, out: &mut Bits) -> Result<usize> {
        let mut count = 0;
        self.ingest_samples_with(samples, sample_bits, |block| {
            out.extend_from_bits(&block);
            count += 1;
        })?;
        Ok(count)
    }

    fn ingest_samples_with(
        &mut self,
        samples: &[u32],
        sample_bits: usize,
        mut emit: impl FnMut(OutputBlock),
    ) -> Result<()> {
        let k = self.dims().k();
        if sample_bits != k {
            return Err(Error::config(format!(
                "sample width {sample_bits} bits differs from step size k={k}"
            )));
        }
        if k > 32 {
            return Err(Error::config(format!("sample width {k} exceeds 32 bits")));
        }
        if k < 32 {
            if let Some(pos) = samples.iter().position(|&s| s >> k != 0) {
                return Err(Error::usage(format!(
                    "sample {pos} value {} does not fit in {k} bits",
                    samples[pos]
                )));
            }
        }
        debug_assert!(k <= WORD_BITS);
        for &s in samples {
            self.table.accumulate_word(self.step_index, s as u64, &mut self.acc);
            if let Some(block) = self.advance() {
                emit(block);
            }
        }
        Ok(())
    }

    fn advance(&mut self) -> Option<OutputBlock> {
        self.bits_in += self.dims().k() as u64;
        self.step_index += 1;
        if self.step_index < self.dims().steps() {
            return None;
        }
        let block = self.table.finish(&self.acc);
        self.acc.fill(0);
        self.step_index = 0;
        self.blocks_emitted += 1;
        self.bits_out += self.dims().m() as u64;
        Some(block)
    }

    /// Discards any partial block. Counters are kept.
    pub fn reset(&mut self) {
        self.acc.fill(0);
        self.step_index = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::{matvec_full, submatrix_product, submatrix_window};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    fn small() -> Extractor {
        Extractor::new(ExtractorDims::new(2, 4, 2).unwrap(), Seed::new(bits("10110"))).unwrap()
    }

    #[test]
    fn construction() {
        let dims = ExtractorDims::new(519, 768, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ex = Extractor::new(dims, Seed::random(&dims, &mut rng)).unwrap();
        assert_eq!(ex.seed().len(), 1286);
        assert_eq!((ex.step_index(), ex.bits_in(), ex.bits_out()), (0, 0, 0));
        assert!(ex.accumulator().is_zero());

        let bad = Extractor::new(dims, Seed::new(Bits::zeros(1285)));
        assert!(matches!(bad, Err(Error::Config(_))));
    }

    #[test]
    fn two_step_block() {
        let mut ex = small();
        assert_eq!(ex.ingest_step(&bits("11")).unwrap(), None);
        assert_eq!(ex.accumulator(), bits("11"));
        assert_eq!(ex.step_index(), 1);
        assert_eq!(ex.ingest_step(&bits("01")).unwrap(), Some(bits("10")));
        assert_eq!(ex.step_index(), 0);
        assert!(ex.accumulator().is_zero());
        assert!(ex.ingest_step(&bits("1")).is_err());
    }

    #[test]
    fn zero_steps_emit_zero() {
        let mut ex = small();
        ex.ingest_step(&bits("00")).unwrap();
        assert!(ex.ingest_step(&bits("00")).unwrap().unwrap().is_zero());
    }

    #[test]
    fn sample_counts() {
        let dims = ExtractorDims::new(519, 768, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let seed = Seed::random(&dims, &mut rng);
        let samples: Vec<u32> = (0..96).map(|_| rng.random::<u16>() as u32).collect();

        let mut ex = Extractor::new(dims, seed.clone()).unwrap();
        assert!(ex.ingest_samples(&samples[..47], 16).unwrap().is_empty());
        assert_eq!(ex.step_index(), 47);
        assert_eq!(ex.ingest_samples(&samples[47..48], 16).unwrap().len(), 1);

        let mut ex = Extractor::new(dims, seed.clone()).unwrap();
        let blocks = ex.ingest_samples(&samples, 16).unwrap();
        assert_eq!(blocks.len(), 2);
        for (b, chunk) in blocks.iter().zip(samples.chunks(48)) {
            let mut raw = Bits::new();
            for &s in chunk {
                raw.push_word(s as u64, 16);
            }
            assert_eq!(b, &matvec_full(&seed, &dims, &raw).unwrap());
        }
        assert_eq!(ex.bits_out(), 2 * 519);
        assert_eq!(ex.bits_in(), 96 * 16);

        assert!(matches!(ex.ingest_samples(&samples, 8), Err(Error::Config(_))));
        assert!(matches!(ex.ingest_samples(&[1 << 16], 16), Err(Error::Usage(_))));
    }

    #[test]
    fn prefix_property() {
        let dims = ExtractorDims::new(37, 120, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seed = Seed::random(&dims, &mut rng);
        let mut ex = Extractor::new(dims, seed.clone()).unwrap();
        let mut expected = Bits::zeros(37);
        for i in 1..dims.steps() {
            let step = Bits::from_u64(rng.random(), 8);
            let w = submatrix_window(&seed, &dims, i).unwrap();
            expected.xor_assign(&submatrix_product(&w, &step, &dims).unwrap());
            assert_eq!(ex.ingest_step(&step).unwrap(), None);
            assert_eq!(ex.accumulator(), expected);
            assert_eq!(ex.step_index() as u64, (ex.bits_in() / 8) % dims.steps() as u64);
        }
    }

    #[test]
    fn reset_behaviour() {
        let mut ex = small();
        ex.ingest_step(&bits("11")).unwrap();
        ex.reset();
        assert_eq!(ex.step_index(), 0);
        assert!(ex.accumulator().is_zero());
        assert_eq!(ex.bits_in(), 2);
        ex.reset();
        assert_eq!(ex.step_index(), 0);
        ex.ingest_step(&bits("11")).unwrap();
        assert_eq!(ex.ingest_step(&bits("01")).unwrap(), Some(bits("10")));
    }
}
