//! Packed bit vectors.
//!
//! Bits are stored LSB-first in `u64` words: bit `i` lives in word `i / 64`
//! at position `i % 64`. The same order is used when serializing to bytes,
//! so bit 0 of a vector is the least-significant bit of its first byte.
//! Indices on [`Bits`] are 0-based; the Toeplitz layer exposes the 1-based
//! indexing of the matrix formulas on top of this.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A growable, packed vector of bits.
///
/// Unused high bits of the last word are always zero, so word-level
/// equality and XOR never observe stale data.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Bits {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut bits = Bits {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        bits.clear_tail();
        bits
    }

    pub fn with_capacity(bits: usize) -> Self {
        Bits {
            words: Vec::with_capacity(words_for(bits)),
            len: 0,
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut bits = Bits::zeros(len);
        for i in 0..len {
            if f(i) {
                bits.set(i, true);
            }
        }
        bits
    }

    pub fn from_bools(values: &[bool]) -> Self {
        Bits::from_fn(values.len(), |i| values[i])
    }

    /// The low `len` bits of `value`, bit 0 first. `len` must be at most 64.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD_BITS, "from_u64 takes at most 64 bits");
        let mut bits = Bits {
            words: if len == 0 { Vec::new() } else { vec![value] },
            len,
        };
        bits.clear_tail();
        bits
    }

    /// Builds a vector from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        assert!(words.len() * WORD_BITS >= len, "not enough words for {len} bits");
        words.truncate(words_for(len));
        let mut bits = Bits { words, len };
        bits.clear_tail();
        bits
    }

    /// Unpacks the first `len` bits of an LSB-first byte string.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        let needed = len.div_ceil(8);
        if bytes.len() < needed {
            return Err(Error::format(
                bytes.len() as u64,
                format!("need {needed} bytes for {len} bits, got {}", bytes.len()),
            ));
        }
        let mut words = vec![0u64; words_for(len)];
        for (i, &b) in bytes[..needed].iter().enumerate() {
            words[i / 8] |= (b as u64) << ((i % 8) * 8);
        }
        Ok(Bits::from_words(words, len))
    }

    /// LSB-first byte serialization, zero-padded to a whole byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.words[i / 8] >> ((i % 8) * 8)) as u8);
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len % WORD_BITS == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    /// Appends the low `count` bits of `value` (count ≤ 64).
    pub fn push_word(&mut self, value: u64, count: usize) {
        assert!(count <= WORD_BITS);
        if count == 0 {
            return;
        }
        let value = if count == WORD_BITS {
            value
        } else {
            value & ((1u64 << count) - 1)
        };
        let shift = self.len % WORD_BITS;
        if shift == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << shift;
            if shift + count > WORD_BITS {
                self.words.push(value >> (WORD_BITS - shift));
            }
        }
        self.len += count;
    }

    /// Appends all bits of `other`.
    pub fn extend_from_bits(&mut self, other: &Bits) {
        if self.len % WORD_BITS == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        let mut remaining = other.len;
        for &w in &other.words {
            let take = remaining.min(WORD_BITS);
            self.push_word(w, take);
            remaining -= take;
        }
    }

    /// Copies `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(
            start + len <= self.len,
            "slice {start}..{} out of range for length {}",
            start + len,
            self.len
        );
        let mut out = vec![0u64; words_for(len)];
        self.copy_range_into(start, len, &mut out);
        Bits::from_words(out, len)
    }

    /// Writes bits `start..start+len` into `dst` word-aligned; `dst` must
    /// hold at least `words_for(len)` words. Bits past `len` in the last
    /// destination word are left as garbage and must be masked by the caller.
    pub(crate) fn copy_range_into(&self, start: usize, len: usize, dst: &mut [u64]) {
        let shift = start % WORD_BITS;
        let base = start / WORD_BITS;
        for (w, slot) in dst.iter_mut().take(words_for(len)).enumerate() {
            let lo = self.words[base + w] >> shift;
            let hi = if shift != 0 {
                self.words
                    .get(base + w + 1)
                    .map_or(0, |&x| x << (WORD_BITS - shift))
            } else {
                0
            };
            *slot = lo | hi;
        }
    }

    /// Bit order reversal: bit `i` of the result is bit `len-1-i` of `self`.
    pub fn reversed(&self) -> Bits {
        if self.len == 0 {
            return Bits::new();
        }
        let padded: Vec<u64> = self.words.iter().rev().map(|w| w.reverse_bits()).collect();
        let full = Bits {
            len: padded.len() * WORD_BITS,
            words: padded,
        };
        full.slice(full.len - self.len, self.len)
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "xor of bit vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn not(&self) -> Bits {
        let mut out = Bits {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        out.clear_tail();
        out
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut bits = Bits::new();
        for b in iter {
            bits.push(b);
        }
        bits
    }
}

impl FromStr for Bits {
    type Err = Error;

    /// Parses a string of `0`/`1` characters, first character is bit 0.
    /// Whitespace and `_` separators are ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::usage(format!("invalid bit character {other:?}"))),
            })
            .collect()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "Bits({self})")
        } else {
            write!(f, "Bits(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let b: Bits = "1011 0".parse().unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.get(0) && !b.get(1) && b.get(2) && b.get(3) && !b.get(4));
        assert_eq!(b.to_string(), "10110");
        assert!("10x".parse::<Bits>().is_err());
    }

    #[test]
    fn bytes_are_lsb_first() {
        let b = Bits::from_bytes(&[0x34, 0x12], 16).unwrap();
        assert!(!b.get(0) && !b.get(1) && b.get(2));
        assert_eq!(b.to_bytes(), vec![0x34, 0x12]);
        assert!(Bits::from_bytes(&[0x01], 9).is_err());
    }

    #[test]
    fn reversed_small() {
        let b: Bits = "110".parse().unwrap();
        assert_eq!(b.reversed().to_string(), "011");
        assert!(Bits::new().reversed().is_empty());
    }

    #[test]
    fn push_word_crosses_boundary() {
        let mut b = Bits::zeros(60);
        b.push_word(0xff, 8);
        assert_eq!(b.len(), 68);
        assert_eq!(b.count_ones(), 8);
        assert!(b.get(60) && b.get(67));
    }

    fn arb_bits(max: usize) -> impl Strategy<Value = Bits> {
        prop::collection::vec(any::<bool>(), 0..max).prop_map(|v| Bits::from_bools(&v))
    }

    proptest! {
        #[test]
        fn byte_round_trip(b in arb_bits(300)) {
            let back = Bits::from_bytes(&b.to_bytes(), b.len()).unwrap();
            prop_assert_eq!(back, b);
        }

        #[test]
        fn slice_matches_bitwise(b in arb_bits(300), a in 0.0f64..=1.0, f in 0.0f64..=1.0) {
            let start = (a * b.len() as f64) as usize;
            let len = (f * (b.len() - start) as f64) as usize;
            let s = b.slice(start, len);
            for i in 0..len {
                prop_assert_eq!(s.get(i), b.get(start + i));
            }
        }

        #[test]
        fn reverse_twice_is_identity(b in arb_bits(300)) {
            let r = b.reversed();
            for i in 0..b.len() {
                prop_assert_eq!(r.get(i), b.get(b.len() - 1 - i));
            }
            prop_assert_eq!(r.reversed(), b);
        }

        #[test]
        fn extend_matches_push(a in arb_bits(200), b in arb_bits(200)) {
            let mut joined = a.clone();
            joined.extend_from_bits(&b);
            let expected: Bits = a.iter().chain(b.iter()).collect();
            prop_assert_eq!(joined, expected);
        }
    }
}
