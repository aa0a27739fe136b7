//! Deterministic random inputs for unit tests.

use crate::bitpoly::BitPolynomial;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn word(rng: &mut ChaCha8Rng) -> u64 {
    rng.next_u64()
}

/// Uniform value in `[0, bound)`.
pub fn below(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    (rng.next_u64() % bound as u64) as usize
}

pub fn random_bytes(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let mut buf = vec![0u8; len];
    rng.fill_bytes(&mut buf);
    buf
}

pub fn random_poly(rng: &mut ChaCha8Rng, bit_len: usize) -> BitPolynomial {
    let buf = random_bytes(rng, bit_len.div_ceil(8));
    BitPolynomial::from_bytes(&buf, bit_len).unwrap()
}

pub fn random_nonzero_poly(rng: &mut ChaCha8Rng, bit_len: usize) -> BitPolynomial {
    loop {
        let p = random_poly(rng, bit_len);
        if !p.is_zero() {
            return p;
        }
    }
}
