//! The ciphertext container and whole-file encryption.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! magic "ESE1" | version u8 = 1 | eps_exp u8 | reserved u16 = 0
//! plaintext bit length u64 | chunk size bits u64 | chunk count u32
//! per chunk:
//!   n u64 | ell u64 | modulus weight u16 | weight * exponent u64
//!   x-mode u8 (0 = seed, 1 = embedded)
//!   32-byte seed  or  ceil(n/8) bytes of X
//!   ceil(n/8) ciphertext bytes
//! ```
//!
//! A modulus weight of 0 marks a one-time-pad chunk (the key is as long
//! as the chunk, no expansion happens and the stored seed is all-zero
//! filler). Bits map to bytes exactly as in `BitPolynomial::from_bytes`.
//!
//! There is no authentication layer: the scheme is malleable by
//! construction, and flipping a ciphertext bit flips exactly that
//! plaintext bit.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::bitpoly::BitPolynomial;
use crate::error::EseError;
use crate::modred::{reduce_parallel, ModulusCache, SparseIrreducible};
use crate::mult::simplemult_parallel;
use crate::scheme::{
    fresh_seed, plan_chunks, public_string_embedded, public_string_from_seed, ChunkPlan, XMode,
};

const MAGIC: &[u8; 4] = b"ESE1";
const VERSION: u8 = 1;

/// Transport of the public string for one chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicString {
    Seed([u8; 32]),
    Embedded(Vec<u8>),
}

#[derive(Debug, Clone)]
pub struct ChunkRecord {
    pub n: u64,
    pub ell: u64,
    /// `None` marks an OTP chunk (ell = n, no expansion).
    pub modulus: Option<SparseIrreducible>,
    pub public_string: PublicString,
    pub ciphertext: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct CiphertextContainer {
    pub eps_exp: u8,
    pub plaintext_bits: u64,
    pub chunk_size_bits: u64,
    pub chunks: Vec<ChunkRecord>,
}

impl CiphertextContainer {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.eps_exp);
        out.extend_from_slice(&[0u8; 2]);
        out.extend_from_slice(&self.plaintext_bits.to_le_bytes());
        out.extend_from_slice(&self.chunk_size_bits.to_le_bytes());
        out.extend_from_slice(&(self.chunks.len() as u32).to_le_bytes());
        for chunk in &self.chunks {
            out.extend_from_slice(&chunk.n.to_le_bytes());
            out.extend_from_slice(&chunk.ell.to_le_bytes());
            match &chunk.modulus {
                Some(f) => {
                    out.extend_from_slice(&(f.exponents().len() as u16).to_le_bytes());
                    for &e in f.exponents() {
                        out.extend_from_slice(&(e as u64).to_le_bytes());
                    }
                }
                None => out.extend_from_slice(&0u16.to_le_bytes()),
            }
            match &chunk.public_string {
                PublicString::Seed(seed) => {
                    out.push(0);
                    out.extend_from_slice(seed);
                }
                PublicString::Embedded(x) => {
                    out.push(1);
                    debug_assert_eq!(x.len() as u64, chunk.n.div_ceil(8));
                    out.extend_from_slice(x);
                }
            }
            debug_assert_eq!(chunk.ciphertext.len() as u64, chunk.n.div_ceil(8));
            out.extend_from_slice(&chunk.ciphertext);
        }
        out
    }

    /// Parses and validates a container: header fields, chunk sizes
    /// summing to the plaintext length, and irreducibility of every
    /// stored modulus (verified once per distinct exponent list).
    pub fn decode(data: &[u8]) -> Result<Self, EseError> {
        let mut r = Reader { data, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(EseError::MalformedContainer("bad magic".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(EseError::MalformedContainer(format!(
                "unsupported version {version}"
            )));
        }
        let eps_exp = r.u8()?;
        if r.u16()? != 0 {
            return Err(EseError::MalformedContainer("reserved bytes set".into()));
        }
        let plaintext_bits = r.u64()?;
        let chunk_size_bits = r.u64()?;
        let chunk_count = r.u32()?;
        let mut verified: HashSet<Vec<usize>> = HashSet::new();
        // The count is untrusted; cap the pre-allocation by what the
        // remaining bytes could possibly hold (a chunk is >= 21 bytes).
        let most = r.data.len().saturating_sub(r.pos) / 21 + 1;
        let mut chunks = Vec::with_capacity((chunk_count as usize).min(most));
        for _ in 0..chunk_count {
            let n = r.u64()?;
            let ell = r.u64()?;
            if n == 0 || ell > n {
                return Err(EseError::MalformedContainer(format!(
                    "chunk with n = {n}, ell = {ell}"
                )));
            }
            // Reject an oversized n before it can size an allocation or
            // a modulus verification.
            if n.div_ceil(8) > (r.data.len() - r.pos) as u64 {
                return Err(EseError::MalformedContainer(format!(
                    "chunk of {n} bits exceeds remaining input"
                )));
            }
            let weight = r.u16()?;
            let modulus = if weight == 0 {
                if ell != n {
                    return Err(EseError::MalformedContainer(
                        "OTP chunk with ell != n".into(),
                    ));
                }
                None
            } else {
                let mut exps = Vec::with_capacity(weight as usize);
                for _ in 0..weight {
                    exps.push(r.u64()? as usize);
                }
                if exps.first() != Some(&(n as usize)) {
                    return Err(EseError::MalformedContainer(
                        "modulus degree does not match chunk size".into(),
                    ));
                }
                let f = if verified.contains(&exps) {
                    SparseIrreducible::new_unchecked(exps.clone())
                } else {
                    let f = SparseIrreducible::new(exps.clone())
                        .map_err(|e| EseError::MalformedContainer(e.to_string()))?;
                    verified.insert(exps);
                    f
                };
                Some(f)
            };
            let x_mode = r.u8()?;
            let public_string = match x_mode {
                0 => {
                    let mut seed = [0u8; 32];
                    seed.copy_from_slice(r.take(32)?);
                    PublicString::Seed(seed)
                }
                1 => PublicString::Embedded(r.take(n.div_ceil(8) as usize)?.to_vec()),
                other => {
                    return Err(EseError::MalformedContainer(format!(
                        "unknown X mode {other}"
                    )))
                }
            };
            let ciphertext = r.take(n.div_ceil(8) as usize)?.to_vec();
            chunks.push(ChunkRecord {
                n,
                ell,
                modulus,
                public_string,
                ciphertext,
            });
        }
        if r.pos != data.len() {
            return Err(EseError::MalformedContainer("trailing bytes".into()));
        }
        let total: u64 = chunks.iter().map(|c| c.n).sum();
        if total != plaintext_bits {
            return Err(EseError::MalformedContainer(format!(
                "chunk sizes sum to {total} bits, header says {plaintext_bits}"
            )));
        }
        Ok(CiphertextContainer {
            eps_exp,
            plaintext_bits,
            chunk_size_bits,
            chunks,
        })
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], EseError> {
        if len > self.data.len() - self.pos {
            return Err(EseError::MalformedContainer("truncated".into()));
        }
        let out = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, EseError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, EseError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, EseError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, EseError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Configuration for whole-file encryption.
#[derive(Debug, Clone)]
pub struct EncryptConfig {
    /// Chunk size in bits; must be a multiple of 8.
    pub chunk_bits: u64,
    pub eps_exp: u32,
    pub x_mode: XMode,
    /// Estimated entropy per data bit of the payload.
    pub entropy_ratio: f64,
    /// Compression ratio of the payload format itself (1.0 for raw data).
    pub data_ratio: f64,
    pub workers: usize,
}

impl EncryptConfig {
    pub fn plan(&self, plaintext_len_bytes: u64) -> Result<ChunkPlan, EseError> {
        plan_chunks(
            plaintext_len_bytes * 8,
            self.chunk_bits,
            self.entropy_ratio,
            self.data_ratio,
            self.eps_exp,
        )
    }
}

/// Wall-clock time spent in the three encryption phases, summed over
/// chunks.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub mult: Duration,
    pub reduce: Duration,
    pub xor: Duration,
}

/// Encrypts a whole plaintext into a container. Key material is consumed
/// sequentially in byte-aligned slices, one per chunk, never reused;
/// every chunk gets a fresh public string.
pub fn encrypt_file(
    plaintext: &[u8],
    key_material: &[u8],
    config: &EncryptConfig,
    cache: &mut ModulusCache,
) -> Result<CiphertextContainer, EseError> {
    encrypt_file_timed(plaintext, key_material, config, cache).map(|(c, _)| c)
}

/// [`encrypt_file`] with per-phase wall-clock accounting for benchmarks.
pub fn encrypt_file_timed(
    plaintext: &[u8],
    key_material: &[u8],
    config: &EncryptConfig,
    cache: &mut ModulusCache,
) -> Result<(CiphertextContainer, PhaseTimings), EseError> {
    if config.eps_exp == 0 || config.eps_exp > 255 {
        return Err(EseError::InvalidParameter(
            "eps_exp must be in 1..=255".into(),
        ));
    }
    if config.chunk_bits % 8 != 0 {
        return Err(EseError::InvalidParameter(
            "chunk size must be a whole number of bytes".into(),
        ));
    }
    let plan = config.plan(plaintext.len() as u64)?;
    let available_bits = key_material.len() as u64 * 8;
    if plan.total_key_bytes * 8 > available_bits {
        return Err(EseError::InsufficientKeyMaterial {
            required: plan.total_key_bytes * 8,
            available: available_bits,
        });
    }

    let mut timings = PhaseTimings::default();
    let mut chunks = Vec::with_capacity(plan.per_chunk_params.len());
    let mut pt_off = 0usize; // bytes
    let mut key_off = 0usize; // bytes
    for params in &plan.per_chunk_params {
        let n = params.n as usize;
        let n_bytes = n.div_ceil(8);
        let m = BitPolynomial::from_bytes(&plaintext[pt_off..pt_off + n_bytes], n)?;
        let key_bytes = params.ell.div_ceil(8) as usize;
        let k = BitPolynomial::from_bytes(
            &key_material[key_off..key_off + key_bytes],
            params.ell as usize,
        )?;
        pt_off += n_bytes;
        key_off += key_bytes;

        let chunk = if params.otp_fallback {
            // Key is as long as the chunk: plain one-time pad.
            let start = Instant::now();
            let c = m.add(&k).truncated(n);
            timings.xor += start.elapsed();
            ChunkRecord {
                n: params.n,
                ell: params.ell,
                modulus: None,
                public_string: PublicString::Seed([0u8; 32]),
                ciphertext: c.to_bytes(),
            }
        } else {
            let f = cache.get_or_find(n)?;
            let (x, public_string) = match config.x_mode {
                XMode::SeedDerived => {
                    let seed = fresh_seed()?;
                    (public_string_from_seed(&seed, n), PublicString::Seed(seed))
                }
                XMode::Embedded => {
                    let x = public_string_embedded(n)?;
                    let bytes = x.to_bytes();
                    (x, PublicString::Embedded(bytes))
                }
            };
            if k.is_zero() {
                return Err(EseError::DegenerateKey);
            }
            let start = Instant::now();
            let product = simplemult_parallel(&x, &k, config.workers)?;
            timings.mult += start.elapsed();
            let start = Instant::now();
            let pad = reduce_parallel(&product, &f, config.workers);
            timings.reduce += start.elapsed();
            let start = Instant::now();
            let c = m.add(&pad).truncated(n);
            timings.xor += start.elapsed();
            ChunkRecord {
                n: params.n,
                ell: params.ell,
                modulus: Some(f),
                public_string,
                ciphertext: c.to_bytes(),
            }
        };
        chunks.push(chunk);
    }

    Ok((
        CiphertextContainer {
            eps_exp: config.eps_exp as u8,
            plaintext_bits: plaintext.len() as u64 * 8,
            chunk_size_bits: config.chunk_bits,
            chunks,
        },
        timings,
    ))
}

/// Inverts [`encrypt_file`] given the same key material. Byte-exact.
pub fn decrypt_file(
    container: &CiphertextContainer,
    key_material: &[u8],
) -> Result<Vec<u8>, EseError> {
    let mut out = Vec::with_capacity((container.plaintext_bits / 8) as usize);
    let mut key_off = 0usize;
    for chunk in &container.chunks {
        if chunk.n % 8 != 0 {
            return Err(EseError::MalformedContainer(
                "chunk is not a whole number of bytes".into(),
            ));
        }
        let n = chunk.n as usize;
        let key_bytes = chunk.ell.div_ceil(8) as usize;
        if key_off + key_bytes > key_material.len() {
            return Err(EseError::InsufficientKeyMaterial {
                required: (key_off + key_bytes) as u64 * 8,
                available: key_material.len() as u64 * 8,
            });
        }
        let k = BitPolynomial::from_bytes(
            &key_material[key_off..key_off + key_bytes],
            chunk.ell as usize,
        )?;
        key_off += key_bytes;
        let c = BitPolynomial::from_bytes(&chunk.ciphertext, n)?;
        let m = match &chunk.modulus {
            None => c.add(&k).truncated(n),
            Some(f) => {
                let x = match &chunk.public_string {
                    PublicString::Seed(seed) => public_string_from_seed(seed, n),
                    PublicString::Embedded(bytes) => BitPolynomial::from_bytes(bytes, n)?,
                };
                let pad = crate::scheme::expand_key(&k, &x, f)?;
                c.add(&pad).truncated(n)
            }
        };
        out.extend_from_slice(&m.to_bytes());
    }
    Ok(out)
}
