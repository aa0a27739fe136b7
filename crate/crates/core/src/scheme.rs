//! The entropically secure encryption scheme: key sizing, key expansion,
//! XOR encryption, chunk planning and rate arithmetic.
//!
//! A message of `n` bits with collision entropy at least `t` bits can be
//! encrypted with a key of `ell = n - t + 2 * eps_exp` bits at security
//! level `2^-eps_exp`. The short key is expanded to an n-bit pad by
//! multiplying it with a public random string in GF(2^n) and the pad is
//! XORed onto the message. When `ell` would reach `n`, the scheme degrades
//! to a one-time pad and the expansion is skipped.

use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bitpoly::BitPolynomial;
use crate::error::EseError;
use crate::modred::{reduce_parallel, SparseIrreducible};
use crate::mult::simplemult_parallel;

/// Parameter bundle tying one encryption to the key-length formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EseParams {
    /// Message length in bits.
    pub n: u64,
    /// Collision-entropy lower bound in bits.
    pub t: u64,
    /// Security exponent: epsilon = 2^-eps_exp.
    pub eps_exp: u32,
    /// Key length in bits.
    pub ell: u64,
    /// True when `ell` hit `n` and the chunk is one-time-padded.
    pub otp_fallback: bool,
}

impl EseParams {
    pub fn derive(n: u64, t: u64, eps_exp: u32) -> Result<Self, EseError> {
        let (ell, otp_fallback) = key_length(n, t, eps_exp)?;
        Ok(EseParams {
            n,
            t,
            eps_exp,
            ell,
            otp_fallback,
        })
    }
}

/// Key length in bits: `n - t + 2 * eps_exp`, floored at `2 * eps_exp` and
/// clamped at `n` (OTP fallback, flagged in the second component).
pub fn key_length(n: u64, t: u64, eps_exp: u32) -> Result<(u64, bool), EseError> {
    if eps_exp == 0 {
        return Err(EseError::InvalidParameter(
            "eps_exp must be at least 1".into(),
        ));
    }
    if n == 0 {
        return Err(EseError::InvalidParameter(
            "message length must be positive".into(),
        ));
    }
    if t > n {
        return Err(EseError::InvalidEntropy { t, n });
    }
    let floor = 2 * eps_exp as u64;
    let ell = (n - t + floor).max(floor);
    if ell >= n {
        Ok((n, true))
    } else {
        Ok((ell, false))
    }
}

/// Per-chunk sizes and key lengths for a large file.
#[derive(Debug, Clone)]
pub struct ChunkPlan {
    pub chunk_size_bits: u64,
    pub chunk_count: u64,
    pub per_chunk_params: Vec<EseParams>,
    /// Sum of per-chunk key lengths (exact bits, before byte rounding).
    pub total_key_bits: u64,
    /// Key material consumed when slices are rounded up to whole bytes.
    pub total_key_bytes: u64,
}

/// Splits `file_bits` into chunks of `chunk_bits` (last chunk may be
/// shorter) and sizes each chunk's key with
/// `t = n_chunk * entropy_ratio / data_ratio`.
pub fn plan_chunks(
    file_bits: u64,
    chunk_bits: u64,
    entropy_ratio: f64,
    data_ratio: f64,
    eps_exp: u32,
) -> Result<ChunkPlan, EseError> {
    if !(entropy_ratio > 0.0) || !(data_ratio <= 1.0) || !(data_ratio > 0.0) {
        return Err(EseError::InvalidParameter(format!(
            "ratios must satisfy 0 < entropy_ratio <= data_ratio <= 1, got {entropy_ratio}/{data_ratio}"
        )));
    }
    if entropy_ratio > data_ratio {
        return Err(EseError::InvalidEstimate {
            entropy_ratio,
            data_ratio,
        });
    }
    if chunk_bits < 2 * eps_exp as u64 {
        return Err(EseError::InvalidParameter(format!(
            "chunk size {chunk_bits} bits is below the 2*eps_exp floor"
        )));
    }
    let mut per_chunk_params = Vec::new();
    let mut remaining = file_bits;
    while remaining > 0 {
        let n = remaining.min(chunk_bits);
        let t = ((n as f64) * entropy_ratio / data_ratio).round() as u64;
        per_chunk_params.push(EseParams::derive(n, t.min(n), eps_exp)?);
        remaining -= n;
    }
    let total_key_bits = per_chunk_params.iter().map(|p| p.ell).sum();
    let total_key_bytes = per_chunk_params.iter().map(|p| p.ell.div_ceil(8)).sum();
    Ok(ChunkPlan {
        chunk_size_bits: chunk_bits,
        chunk_count: per_chunk_params.len() as u64,
        per_chunk_params,
        total_key_bits,
        total_key_bytes,
    })
}

/// How the public string X travels with the ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XMode {
    /// A 256-bit public seed is stored; X is regenerated on decrypt.
    SeedDerived,
    /// X is stored inline, doubling the ciphertext size.
    Embedded,
}

/// Expands a 256-bit public seed into an n-bit public string with a
/// deterministic cryptographic stream generator. Same seed, same X.
pub fn public_string_from_seed(seed: &[u8; 32], n: usize) -> BitPolynomial {
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let mut buf = vec![0u8; n.div_ceil(8)];
    rng.fill_bytes(&mut buf);
    BitPolynomial::from_bytes(&buf, n).expect("buffer sized for n bits")
}

/// Draws a fresh n-bit public string from system randomness for inline
/// storage.
pub fn public_string_embedded(n: usize) -> Result<BitPolynomial, EseError> {
    let mut buf = vec![0u8; n.div_ceil(8)];
    OsRng
        .try_fill_bytes(&mut buf)
        .map_err(|e| EseError::EntropySource(e.to_string()))?;
    Ok(BitPolynomial::from_bytes(&buf, n).expect("buffer sized for n bits"))
}

/// Fresh 256-bit seed from system randomness.
pub fn fresh_seed() -> Result<[u8; 32], EseError> {
    let mut seed = [0u8; 32];
    OsRng
        .try_fill_bytes(&mut seed)
        .map_err(|e| EseError::EntropySource(e.to_string()))?;
    Ok(seed)
}

/// Key expansion: multiply the public string by the key, then reduce by
/// the degree-n modulus. Returns the n-bit pad; linear in `k` over XOR.
pub fn expand_key(
    k: &BitPolynomial,
    x: &BitPolynomial,
    f: &SparseIrreducible,
) -> Result<BitPolynomial, EseError> {
    expand_key_with(k, x, f, 1)
}

/// [`expand_key`] with explicit worker count for both phases.
pub fn expand_key_with(
    k: &BitPolynomial,
    x: &BitPolynomial,
    f: &SparseIrreducible,
    workers: usize,
) -> Result<BitPolynomial, EseError> {
    let n = f.degree();
    if x.bit_len() != n {
        return Err(EseError::InvalidParameter(format!(
            "public string has {} bits but the modulus degree is {n}",
            x.bit_len()
        )));
    }
    if k.is_zero() {
        return Err(EseError::DegenerateKey);
    }
    if k.degree().unwrap() >= n {
        return Err(EseError::InvalidParameter(format!(
            "key degree {} is not below the modulus degree {n}",
            k.degree().unwrap()
        )));
    }
    let product = simplemult_parallel(x, k, workers)?;
    Ok(reduce_parallel(&product, f, workers))
}

/// One chunk encryption: `c = m XOR expand_key(k, X, f)`. Decryption is
/// the same operation.
pub fn encrypt_chunk(
    m: &BitPolynomial,
    k: &BitPolynomial,
    x: &BitPolynomial,
    f: &SparseIrreducible,
) -> Result<BitPolynomial, EseError> {
    if m.bit_len() != f.degree() {
        return Err(EseError::InvalidParameter(format!(
            "message has {} bits but the modulus degree is {}",
            m.bit_len(),
            f.degree()
        )));
    }
    let pad = expand_key(k, x, f)?;
    Ok(m.add(&pad).truncated(f.degree()))
}

/// Key bits spent per unit time at a given encryption rate, in MB/s
/// (1 MB = 10^6 bytes).
pub fn key_consumption_rate(enc_rate_mb_s: f64, key_bits: u64, msg_bits: u64) -> f64 {
    assert!(msg_bits > 0, "message length must be positive");
    enc_rate_mb_s * key_bits as f64 / msg_bits as f64
}
