//! GF(2) Toeplitz matrix arithmetic.
//!
//! An `m × n` Toeplitz matrix is fully described by a seed of `m+n-1` bits
//! `s_1 … s_{m+n-1}`: the top row reads `s_m … s_{m+n-1}`, the bottom row
//! `s_1 … s_n`, and entry `(r, c)` is `s_{m-r+c}`. All public indices in
//! this module are 1-based to match that layout.
//!
//! The product with an `n`-bit raw block can be split into `n/k` products of
//! `m × k` sub-matrices, each built from an `(m+k-1)`-bit window of the seed.
//! [`matvec_full`] is the entry-by-entry reference; [`matvec_blocked`] and
//! [`ColumnTable`] must agree with it bit for bit.

use rand::RngCore;

use crate::bits::{words_for, Bits, WORD_BITS};
use crate::error::{Error, Result};

/// `n` raw input bits `d_1 … d_n`.
pub type RawBlock = Bits;
/// `k` raw bits consumed by one pipeline step.
pub type StepWord = Bits;
/// `m` extracted bits `a_1 … a_m`.
pub type OutputBlock = Bits;
/// `m+k-1` seed bits defining one sub-matrix.
pub type Window = Bits;

/// Matrix and block geometry of one extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtractorDims {
    m: usize,
    n: usize,
    k: usize,
}

impl ExtractorDims {
    /// Validates `m, n, k ≥ 1`, `k | n` and `m < n`.
    pub fn new(m: usize, n: usize, k: usize) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::config(format!(
                "dimensions must be positive (m={m}, n={n}, k={k})"
            )));
        }
        if n % k != 0 {
            return Err(Error::config(format!("k={k} does not divide n={n}")));
        }
        if m >= n {
            return Err(Error::config(format!(
                "output length m={m} must be below input length n={n}"
            )));
        }
        Ok(ExtractorDims { m, n, k })
    }

    /// Output bits per block.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Input bits per block.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Input bits per step.
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Steps per block, `n/k`.
    #[inline]
    pub fn steps(&self) -> usize {
        self.n / self.k
    }

    #[inline]
    pub fn seed_len(&self) -> usize {
        self.m + self.n - 1
    }

    #[inline]
    pub fn window_len(&self) -> usize {
        self.m + self.k - 1
    }

    pub fn ratio(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

impl std::fmt::Display for ExtractorDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{} (k={})", self.m, self.n, self.k)
    }
}

/// The bit string defining a Toeplitz matrix. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed(Bits);

impl Seed {
    pub fn new(bits: Bits) -> Self {
        Seed(bits)
    }

    /// A seed of `dims.seed_len()` bits drawn from `rng`.
    pub fn random<R: RngCore + ?Sized>(dims: &ExtractorDims, rng: &mut R) -> Self {
        let len = dims.seed_len();
        let words = (0..words_for(len)).map(|_| rng.next_u64()).collect();
        Seed(Bits::from_words(words, len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &Bits {
        &self.0
    }

    /// Seed symbol `s_i`, 1-based.
    pub fn s(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len(), "seed index {i} out of range");
        self.0.get(i - 1)
    }

    pub fn check(&self, dims: &ExtractorDims) -> Result<()> {
        if self.len() != dims.seed_len() {
            return Err(Error::config(format!(
                "seed has {} bits, dims {dims} need m+n-1 = {}",
                self.len(),
                dims.seed_len()
            )));
        }
        Ok(())
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::usage(format!("{what} has {got} bits, expected {want}")));
    }
    Ok(())
}

/// Matrix entry `(r, c)` (1-based), which is `s_{m-r+c}`.
pub fn toeplitz_entry(seed: &Seed, dims: &ExtractorDims, r: usize, c: usize) -> Result<bool> {
    seed.check(dims).map_err(|e| Error::usage(e.to_string()))?;
    if r == 0 || r > dims.m || c == 0 || c > dims.n {
        return Err(Error::usage(format!(
            "entry ({r}, {c}) outside {}x{} matrix",
            dims.m, dims.n
        )));
    }
    Ok(seed.s(dims.m - r + c))
}

/// Entry-by-entry product; the reference every faster path is checked against.
pub fn matvec_full(seed: &Seed, dims: &ExtractorDims, raw: &RawBlock) -> Result<OutputBlock> {
    seed.check(dims)?;
    check_len("raw block", raw.len(), dims.n)?;
    let mut out = Bits::zeros(dims.m);
    for r in 1..=dims.m {
        let mut acc = false;
        for c in 1..=dims.n {
            acc ^= seed.s(dims.m - r + c) & raw.get(c - 1);
        }
        out.set(r - 1, acc);
    }
    Ok(out)
}

/// Seed bits `(i-1)k+1 ..= m+ik-1` defining the `i`-th sub-matrix.
pub fn submatrix_window(seed: &Seed, dims: &ExtractorDims, i: usize) -> Result<Window> {
    seed.check(dims)?;
    if i == 0 || i > dims.steps() {
        return Err(Error::usage(format!(
            "step index {i} outside 1..={}",
            dims.steps()
        )));
    }
    Ok(seed.0.slice((i - 1) * dims.k, dims.window_len()))
}

/// Product of one `m × k` sub-matrix with a `k`-bit step word.
///
/// Column `j` read bottom to top is window bits `j ..= j+m-1`; every set
/// step bit XORs its column into the result.
pub fn submatrix_product(window: &Window, step: &StepWord, dims: &ExtractorDims) -> Result<OutputBlock> {
    check_len("window", window.len(), dims.window_len())?;
    check_len("step word", step.len(), dims.k)?;
    // Accumulate with rows reversed so each column is a plain window slice.
    let mut acc = Bits::zeros(dims.m);
    for j in 0..dims.k {
        if step.get(j) {
            acc.xor_assign(&window.slice(j, dims.m));
        }
    }
    Ok(acc.reversed())
}

/// Sum over all `n/k` sub-matrix products.
pub fn matvec_blocked(seed: &Seed, dims: &ExtractorDims, raw: &RawBlock) -> Result<OutputBlock> {
    seed.check(dims)?;
    check_len("raw block", raw.len(), dims.n)?;
    let mut out = Bits::zeros(dims.m);
    for i in 1..=dims.steps() {
        let window = submatrix_window(seed, dims, i)?;
        let step = raw.slice((i - 1) * dims.k, dims.k);
        out.xor_assign(&submatrix_product(&window, &step, dims)?);
    }
    Ok(out)
}

/// All `n` matrix columns, precomputed as packed words.
///
/// Columns are held with rows in reverse order (bottom row first), which
/// makes column `c` the seed slice `s_c … s_{c+m-1}`. Accumulators built
/// from this table live in the same reversed order; [`ColumnTable::finish`]
/// turns one into an [`OutputBlock`].
///
/// For `k ≤ 64` the table also holds, for every run of four consecutive
/// columns, the 16 possible XOR combinations, so a step costs `⌈k/4⌉`
/// lookups instead of `k` masked column adds.
#[derive(Debug, Clone)]
pub struct ColumnTable {
    dims: ExtractorDims,
    stride: usize,
    columns: Vec<u64>,
    nibbles: Vec<u64>,
    groups: usize,
}

const NIBBLE: usize = 4;

impl ColumnTable {
    pub fn new(seed: &Seed, dims: &ExtractorDims) -> Result<Self> {
        seed.check(dims)?;
        let stride = words_for(dims.m);
        let mut columns = vec![0u64; stride * dims.n];
        let tail = dims.m % WORD_BITS;
        for (c, col) in columns.chunks_exact_mut(stride).enumerate() {
            seed.0.copy_range_into(c, dims.m, col);
            if tail != 0 {
                col[stride - 1] &= (1u64 << tail) - 1;
            }
        }
        let groups = dims.k.div_ceil(NIBBLE);
        let nibbles = if dims.k <= WORD_BITS {
            nibble_table(&columns, dims, stride, groups)
        } else {
            Vec::new()
        };
        Ok(ColumnTable {
            dims: *dims,
            stride,
            columns,
            nibbles,
            groups,
        })
    }

    pub fn dims(&self) -> &ExtractorDims {
        &self.dims
    }

    /// Words in one column and in an accumulator.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// XORs into `acc` the product of sub-matrix `step` (0-based) with the
    /// low `k` bits of `word`. Requires `k ≤ 64`.
    #[inline]
    pub fn accumulate_word(&self, step: usize, word: u64, acc: &mut [u64]) {
        debug_assert!(self.dims.k <= WORD_BITS);
        debug_assert_eq!(acc.len(), self.stride);
        let entry = 16 * self.stride;
        let base = step * self.groups * entry;
        let table = &self.nibbles[base..base + self.groups * entry];
        for (g, group) in table.chunks_exact(entry).enumerate() {
            let v = ((word >> (g * NIBBLE)) & 0xf) as usize;
            let row = &group[v * self.stride..(v + 1) * self.stride];
            for (a, &c) in acc.iter_mut().zip(row) {
                *a ^= c;
            }
        }
    }

    /// Like [`accumulate_word`](Self::accumulate_word) for any `k`.
    pub fn accumulate_bits(&self, step: usize, bits: &StepWord, acc: &mut [u64]) {
        debug_assert_eq!(bits.len(), self.dims.k);
        let first = step * self.dims.k;
        for j in 0..self.dims.k {
            if bits.get(j) {
                let col = &self.columns[(first + j) * self.stride..(first + j + 1) * self.stride];
                for (a, &c) in acc.iter_mut().zip(col) {
                    *a ^= c;
                }
            }
        }
    }

    /// Converts a reversed-row accumulator into the output block `a_1 … a_m`.
    pub fn finish(&self, acc: &[u64]) -> OutputBlock {
        Bits::from_words(acc.to_vec(), self.dims.m).reversed()
    }

    /// Whole-block product using the precomputed columns.
    pub fn multiply(&self, raw: &RawBlock) -> Result<OutputBlock> {
        check_len("raw block", raw.len(), self.dims.n)?;
        let mut acc = vec![0u64; self.stride];
        for (c, col) in self.columns.chunks_exact(self.stride).enumerate() {
            if raw.get(c) {
                for (a, &w) in acc.iter_mut().zip(col) {
                    *a ^= w;
                }
            }
        }
        Ok(self.finish(&acc))
    }
}

/// Per step and per group of four columns, the XOR of every subset of them.
/// A group that runs past the end of the step only uses the columns it has.
fn nibble_table(columns: &[u64], dims: &ExtractorDims, stride: usize, groups: usize) -> Vec<u64> {
    let entry = 16 * stride;
    let mut table = vec![0u64; dims.steps() * groups * entry];
    for step in 0..dims.steps() {
        for g in 0..groups {
            let out = &mut table[(step * groups + g) * entry..][..entry];
            for v in 1..16usize {
                let low = v.trailing_zeros() as usize;
                let j = g * NIBBLE + low;
                let (done, rest) = out.split_at_mut(v * stride);
                let dst = &mut rest[..stride];
                dst.copy_from_slice(&done[(v & (v - 1)) * stride..][..stride]);
                if j < dims.k {
                    let col = &columns[(step * dims.k + j) * stride..][..stride];
                    for (d, &c) in dst.iter_mut().zip(col) {
                        *d ^= c;
                    }
                }
            }
        }
    }
    table
}
