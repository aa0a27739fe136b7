//! Bit-packed polynomials over GF(2) and the balanced base multiplication.
//!
//! A [`BitPolynomial`] stores coefficients little-endian in 64-bit words:
//! bit `i` of the value is the coefficient of `x^i` (within a byte stream,
//! bit `i` lives in byte `i / 8`, bit `i % 8`). That mapping is normative
//! for every byte-level interface in this crate, including the ciphertext
//! container.
//!
//! Values are immutable after construction; every operation is a pure
//! function and safe to share across threads.

use crate::error::EseError;

/// Word-count threshold below which Karatsuba falls back to the schoolbook
/// word loop. Chosen empirically; see `mul_base`.
const KARATSUBA_THRESHOLD: usize = 8;

/// A bit-packed element of GF(2)[x].
///
/// `bit_len` is the declared capacity in bits; all bits at positions
/// `>= bit_len` are zero. The zero polynomial has `degree() == None`.
#[derive(Debug, Clone)]
pub struct BitPolynomial {
    words: Vec<u64>,
    bit_len: usize,
    degree: Option<usize>,
}

impl BitPolynomial {
    /// The zero polynomial with the given capacity.
    pub fn zero(bit_len: usize) -> Self {
        BitPolynomial {
            words: vec![0; bit_len.div_ceil(64)],
            bit_len,
            degree: None,
        }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        BitPolynomial {
            words: vec![1],
            bit_len: 1,
            degree: Some(0),
        }
    }

    /// Builds a polynomial from a little-endian byte stream.
    ///
    /// Bit `i` of the stream (byte `i / 8`, bit `i % 8`) becomes the
    /// coefficient of `x^i`. Trailing bits beyond `bit_len` in the last
    /// byte are ignored.
    pub fn from_bytes(data: &[u8], bit_len: usize) -> Result<Self, EseError> {
        if bit_len > data.len() * 8 {
            return Err(EseError::LengthMismatch {
                expected: bit_len,
                actual: data.len() * 8,
            });
        }
        let nwords = bit_len.div_ceil(64);
        let mut words = vec![0u64; nwords];
        let nbytes = bit_len.div_ceil(8);
        for (i, &b) in data[..nbytes].iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        mask_top(&mut words, bit_len);
        Ok(Self::from_words(words, bit_len))
    }

    /// Exports to bytes using the same mapping as [`Self::from_bytes`].
    /// The result has exactly `ceil(bit_len / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.bit_len.div_ceil(8);
        let mut out = vec![0u8; nbytes];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = (self.words[i / 8] >> (8 * (i % 8))) as u8;
        }
        out
    }

    /// Wraps a word vector. Bits at positions `>= bit_len` must already be
    /// zero; the degree is recomputed.
    pub fn from_words(words: Vec<u64>, bit_len: usize) -> Self {
        debug_assert_eq!(words.len(), bit_len.div_ceil(64));
        debug_assert!(top_bits_clear(&words, bit_len));
        let degree = highest_set_bit(&words);
        BitPolynomial {
            words,
            bit_len,
            degree,
        }
    }

    /// Builds `sum of x^e` for the given exponents.
    pub fn from_exponents(exponents: &[usize]) -> Self {
        let Some(&max) = exponents.iter().max() else {
            return BitPolynomial::zero(1);
        };
        let bit_len = max + 1;
        let mut words = vec![0u64; bit_len.div_ceil(64)];
        for &e in exponents {
            words[e / 64] ^= 1 << (e % 64);
        }
        Self::from_words(words, bit_len)
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    /// Index of the highest set bit, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.degree.is_none()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Coefficient of `x^i` (false for `i >= bit_len`).
    pub fn coeff(&self, i: usize) -> bool {
        if i >= self.bit_len {
            return false;
        }
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Sum in GF(2)[x]: bitwise XOR. Capacity is the larger of the two.
    pub fn add(&self, other: &BitPolynomial) -> BitPolynomial {
        let (longer, shorter) = if self.bit_len >= other.bit_len {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = longer.words.clone();
        for (w, &s) in words.iter_mut().zip(&shorter.words) {
            *w ^= s;
        }
        Self::from_words(words, longer.bit_len)
    }

    /// Multiplication by `x^s`. Capacity grows as needed.
    pub fn shift_left(&self, s: usize) -> BitPolynomial {
        if self.is_zero() {
            return BitPolynomial::zero(self.bit_len);
        }
        let bit_len = self.bit_len + s;
        let mut words = vec![0u64; bit_len.div_ceil(64)];
        xor_shifted(&mut words, &self.words, s);
        Self::from_words(words, bit_len)
    }

    /// Carryless product in GF(2)[x].
    ///
    /// This is the balanced base multiplication: both operands are padded
    /// to a common word length and multiplied by Karatsuba recursion over
    /// a word-level carryless kernel (hardware CLMUL when available). It
    /// is intended for block-scale operands; long-by-short products go
    /// through `simplemult`, which calls this per block.
    pub fn mul_base(&self, other: &BitPolynomial) -> BitPolynomial {
        if self.is_zero() || other.is_zero() {
            return BitPolynomial::zero(self.bit_len.max(other.bit_len).max(1));
        }
        let n = self.words.len().max(other.words.len());
        let mut a = self.words.clone();
        let mut b = other.words.clone();
        a.resize(n, 0);
        b.resize(n, 0);
        let mut out = vec![0u64; 2 * n];
        let mut scratch = vec![0u64; karatsuba_scratch_len(n)];
        karatsuba(&a, &b, &mut out, &mut scratch);
        let bit_len = self.degree.unwrap() + other.degree.unwrap() + 1;
        out.truncate(bit_len.div_ceil(64));
        Self::from_words(out, bit_len)
    }

    /// Squaring by bit interleaving; cheaper than `mul_base(self, self)`.
    pub fn square(&self) -> BitPolynomial {
        let Some(d) = self.degree else {
            return BitPolynomial::zero(self.bit_len.max(1));
        };
        let bit_len = 2 * d + 1;
        let mut out = vec![0u64; bit_len.div_ceil(64)];
        // Capacity can exceed the degree; words past it are zero.
        for (i, &w) in self.words.iter().enumerate().take(d / 64 + 1) {
            out[2 * i] = spread_u32(w as u32);
            if 2 * i + 1 < out.len() {
                out[2 * i + 1] = spread_u32((w >> 32) as u32);
            }
        }
        Self::from_words(out, bit_len)
    }

    /// Explicit truncation to `bit_len` bits. The only place capacity is
    /// ever reduced; arithmetic never truncates implicitly.
    pub fn truncated(&self, bit_len: usize) -> BitPolynomial {
        let mut words = self.words.clone();
        words.resize(bit_len.div_ceil(64), 0);
        mask_top(&mut words, bit_len);
        Self::from_words(words, bit_len)
    }
}

impl PartialEq for BitPolynomial {
    /// Value equality: capacities may differ.
    fn eq(&self, other: &Self) -> bool {
        if self.degree != other.degree {
            return false;
        }
        let n = self.words.len().min(other.words.len());
        self.words[..n] == other.words[..n]
    }
}

impl Eq for BitPolynomial {}

/// Clears bits at positions `>= bit_len` in the top word.
pub(crate) fn mask_top(words: &mut [u64], bit_len: usize) {
    if bit_len % 64 != 0 && !words.is_empty() {
        let last = bit_len / 64;
        words[last] &= (1u64 << (bit_len % 64)) - 1;
        for w in &mut words[last + 1..] {
            *w = 0;
        }
    }
}

fn top_bits_clear(words: &[u64], bit_len: usize) -> bool {
    highest_set_bit(words).map_or(true, |d| d < bit_len)
}

pub(crate) fn highest_set_bit(words: &[u64]) -> Option<usize> {
    for (i, &w) in words.iter().enumerate().rev() {
        if w != 0 {
            return Some(64 * i + 63 - w.leading_zeros() as usize);
        }
    }
    None
}

/// XORs `src` shifted left by `shift` bits into `dst`. `dst` must be long
/// enough to hold every set bit of the shifted value.
pub(crate) fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let word_off = shift / 64;
    let bit_off = shift % 64;
    if bit_off == 0 {
        for (i, &w) in src.iter().enumerate() {
            if w != 0 {
                dst[word_off + i] ^= w;
            }
        }
    } else {
        let mut carry = 0u64;
        for (i, &w) in src.iter().enumerate() {
            dst[word_off + i] ^= (w << bit_off) | carry;
            carry = w >> (64 - bit_off);
        }
        if carry != 0 {
            dst[word_off + src.len()] ^= carry;
        }
    }
}

/// Interleaves zeros between the bits of `v` (square of a 32-bit chunk).
fn spread_u32(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

// ---------------------------------------------------------------------------
// Word-level carryless multiply
// ---------------------------------------------------------------------------

#[cfg(target_arch = "x86_64")]
mod clmul_arch {
    use std::sync::OnceLock;

    static HAS_PCLMUL: OnceLock<bool> = OnceLock::new();

    pub fn has_hw() -> bool {
        *HAS_PCLMUL.get_or_init(|| std::arch::is_x86_feature_detected!("pclmulqdq"))
    }

    #[target_feature(enable = "pclmulqdq", enable = "sse2")]
    pub unsafe fn clmul64_hw(a: u64, b: u64) -> u128 {
        use std::arch::x86_64::*;
        let va = _mm_set_epi64x(0, a as i64);
        let vb = _mm_set_epi64x(0, b as i64);
        let p = _mm_clmulepi64_si128::<0>(va, vb);
        let lo = _mm_cvtsi128_si64(p) as u64;
        let hi = _mm_extract_epi64::<1>(p) as u64;
        ((hi as u128) << 64) | lo as u128
    }
}

/// Portable carryless multiply, one bit of `b` at a time.
fn clmul64_soft(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let wide = a as u128;
    let mut rest = b;
    while rest != 0 {
        let i = rest.trailing_zeros();
        acc ^= wide << i;
        rest &= rest - 1;
    }
    acc
}

/// 64x64 -> 128 carryless product.
#[inline]
pub(crate) fn clmul64(a: u64, b: u64) -> u128 {
    #[cfg(target_arch = "x86_64")]
    {
        if clmul_arch::has_hw() {
            // Safety: feature presence checked at runtime.
            return unsafe { clmul_arch::clmul64_hw(a, b) };
        }
    }
    clmul64_soft(a, b)
}

// ---------------------------------------------------------------------------
// Karatsuba over word slices
// ---------------------------------------------------------------------------

/// Schoolbook product of word slices; `out` must hold `a.len() + b.len()`
/// words and is XOR-accumulated into.
fn schoolbook(a: &[u64], b: &[u64], out: &mut [u64]) {
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let p = clmul64(ai, bj);
            out[i + j] ^= p as u64;
            out[i + j + 1] ^= (p >> 64) as u64;
        }
    }
}

/// Scratch words needed by `karatsuba` for equal operand length `n`.
fn karatsuba_scratch_len(n: usize) -> usize {
    // Each level consumes 6 * half words before recursing into the
    // remainder; the geometric sum is bounded by 8n plus slack for the
    // odd-length halves.
    if n <= KARATSUBA_THRESHOLD {
        0
    } else {
        8 * n + 64
    }
}

/// Karatsuba product of equal-length word slices. XOR-accumulates into
/// `out`, which must hold `2 * n` words.
fn karatsuba(a: &[u64], b: &[u64], out: &mut [u64], scratch: &mut [u64]) {
    let n = a.len();
    debug_assert_eq!(b.len(), n);
    if n <= KARATSUBA_THRESHOLD {
        schoolbook(a, b, out);
        return;
    }
    let h = n.div_ceil(2);
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);

    // z0 = a0*b0 into out[0..2h]; z2 = a1*b1 into out[2h..2n].
    let (sums, rest) = scratch.split_at_mut(2 * h);
    let (asum, bsum) = sums.split_at_mut(h);
    asum[..h].copy_from_slice(a0);
    for (d, &s) in asum.iter_mut().zip(a1) {
        *d ^= s;
    }
    bsum[..h].copy_from_slice(b0);
    for (d, &s) in bsum.iter_mut().zip(b1) {
        *d ^= s;
    }

    let (mid, rest) = rest.split_at_mut(2 * h);
    mid.fill(0);
    // mid = (a0 + a1)(b0 + b1)
    karatsuba(asum, bsum, mid, rest);

    // out += z0 + x^h*(mid - z0 - z2) + x^2h*z2; over GF(2) subtraction is
    // XOR, so accumulate z0 and z2 both in place and into the middle band.
    let (z, rest2) = rest.split_at_mut(2 * h);
    z.fill(0);
    karatsuba(a0, b0, z, rest2);
    for i in 0..2 * h {
        out[i] ^= z[i];
        out[h + i] ^= z[i];
    }
    z.fill(0);
    let lo = &mut z[..2 * (n - h)];
    karatsuba(a1, b1, lo, rest2);
    for (i, &w) in lo.iter().enumerate() {
        out[2 * h + i] ^= w;
        out[h + i] ^= w;
    }
    for (i, &w) in mid.iter().enumerate() {
        out[h + i] ^= w;
    }
}
