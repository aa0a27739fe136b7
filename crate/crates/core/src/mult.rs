//! Block-wise multiplication of a long polynomial by a short one.
//!
//! The long operand is cut into key-sized blocks; each block is multiplied
//! by the short operand with the balanced base multiplication and the
//! shifted partial products are XOR-accumulated. Adjacent partial products
//! overlap by `deg q` bits, so accumulation must XOR rather than
//! concatenate.

use crate::bitpoly::{highest_set_bit, xor_shifted, BitPolynomial};
use crate::error::EseError;

/// Product `p * q` computed piecewise in blocks of `1 + deg q` bits.
///
/// Bit-identical to `mul_base` on the whole operands. The last block is
/// implicitly zero-padded when the length of `p` is not a multiple of the
/// block size. A zero `q` is rejected: at the encryption layer it would
/// silently produce a zero pad.
pub fn simplemult(p: &BitPolynomial, q: &BitPolynomial) -> Result<BitPolynomial, EseError> {
    let block_bits = block_size(q)?;
    if p.is_zero() {
        return Ok(BitPolynomial::zero(1));
    }
    let n_blocks = p.bit_len().div_ceil(block_bits);
    let out_bits = p.bit_len() + q.bit_len();
    let mut out = vec![0u64; out_bits.div_ceil(64)];
    accumulate_range(p, q, block_bits, 0, n_blocks, &mut out, 0);
    Ok(trim(out, p, q))
}

/// Parallel variant of [`simplemult`]; output is bit-identical for any
/// worker count. Blocks are partitioned into contiguous ranges, each range
/// accumulated into a local buffer, and the buffers XOR-merged in range
/// order.
pub fn simplemult_parallel(
    p: &BitPolynomial,
    q: &BitPolynomial,
    workers: usize,
) -> Result<BitPolynomial, EseError> {
    let block_bits = block_size(q)?;
    if workers <= 1 {
        return simplemult(p, q);
    }
    if p.is_zero() {
        return Ok(BitPolynomial::zero(1));
    }
    let n_blocks = p.bit_len().div_ceil(block_bits);
    let per_range = n_blocks.div_ceil(workers);
    let out_bits = p.bit_len() + q.bit_len();
    let mut out = vec![0u64; out_bits.div_ceil(64)];

    let ranges: Vec<(usize, usize)> = (0..workers)
        .map(|w| (w * per_range, ((w + 1) * per_range).min(n_blocks)))
        .filter(|(s, e)| s < e)
        .collect();

    let locals: Vec<(usize, Vec<u64>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(start, end)| {
                scope.spawn(move || {
                    // Local span covers the range's blocks plus the final
                    // partial product's overhang.
                    let span_bits = (end - start) * block_bits + 2 * block_bits;
                    let mut local = vec![0u64; span_bits.div_ceil(64) + 1];
                    accumulate_range(p, q, block_bits, start, end, &mut local, start * block_bits);
                    (start * block_bits, local)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    for (base_bit, local) in locals {
        xor_capped(&mut out, &local, base_bit);
    }
    Ok(trim(out, p, q))
}

fn block_size(q: &BitPolynomial) -> Result<usize, EseError> {
    q.degree().map(|d| d + 1).ok_or(EseError::DegenerateKey)
}

/// XOR-accumulates the products of blocks `[start, end)` of `p` with `q`
/// into `out`, whose bit origin is `out_base_bit`.
fn accumulate_range(
    p: &BitPolynomial,
    q: &BitPolynomial,
    block_bits: usize,
    start: usize,
    end: usize,
    out: &mut [u64],
    out_base_bit: usize,
) {
    for i in start..end {
        let lo = i * block_bits;
        let hi = (lo + block_bits).min(p.bit_len());
        let block_words = extract_bits(p.words(), lo, hi - lo);
        if highest_set_bit(&block_words).is_none() {
            continue;
        }
        let block = BitPolynomial::from_words(block_words, hi - lo);
        let prod = block.mul_base(q);
        xor_shifted(out, prod.words(), lo - out_base_bit);
    }
}

/// Copies `len` bits of `words` starting at bit `start` into fresh words.
fn extract_bits(words: &[u64], start: usize, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len.div_ceil(64)];
    let word_off = start / 64;
    let bit_off = start % 64;
    for (j, o) in out.iter_mut().enumerate() {
        let lo = words.get(word_off + j).copied().unwrap_or(0);
        *o = if bit_off == 0 {
            lo
        } else {
            let hi = words.get(word_off + j + 1).copied().unwrap_or(0);
            (lo >> bit_off) | (hi << (64 - bit_off))
        };
    }
    crate::bitpoly::mask_top(&mut out, len);
    out
}

/// XORs `src` at bit offset `base` into `dst`, dropping bits that fall
/// beyond `dst` (the local span is padded; its tail is known zero).
fn xor_capped(dst: &mut [u64], src: &[u64], base: usize) {
    let word_off = base / 64;
    let bit_off = base % 64;
    let room = dst.len() - word_off;
    if bit_off == 0 {
        for (i, &w) in src.iter().take(room).enumerate() {
            dst[word_off + i] ^= w;
        }
    } else {
        let mut carry = 0u64;
        for (i, &w) in src.iter().enumerate() {
            if i < room {
                dst[word_off + i] ^= (w << bit_off) | carry;
            } else {
                debug_assert_eq!((w << bit_off) | carry, 0);
                break;
            }
            carry = w >> (64 - bit_off);
        }
        if carry != 0 && room > src.len() {
            dst[word_off + src.len()] ^= carry;
        }
    }
}

fn trim(out: Vec<u64>, p: &BitPolynomial, q: &BitPolynomial) -> BitPolynomial {
    let bit_len = p.bit_len() + q.bit_len();
    BitPolynomial::from_words(out, bit_len)
}
