//! Entropically secure encryption over GF(2^n).
//!
//! Messages with a known lower bound `t` on their collision entropy can be
//! encrypted with keys of only `n - t + 2 * eps_exp` bits instead of the
//! full `n` bits a one-time pad would need, at statistical security
//! `2^-eps_exp`. The short key is expanded to an n-bit pad by carry-less
//! multiplication with a public random string, reduced modulo a sparse
//! irreducible polynomial, and XORed onto the message.
//!
//! Module map:
//! - [`bitpoly`]: bit-packed polynomials over GF(2) with hardware
//!   carry-less multiplication.
//! - [`mult`]: block-wise `simplemult` for long-by-short products.
//! - [`modred`]: sparse-modulus reduction, irreducibility testing and the
//!   on-disk modulus cache.
//! - [`scheme`]: key sizing, chunk planning and key expansion.
//! - [`container`]: the ciphertext wire format and whole-file
//!   encrypt/decrypt.
//! - [`entropy`]: compression-based collision-entropy estimation.
//! - [`bench`]: throughput measurement helpers behind the CLI bench
//!   subcommands.

pub mod bench;
pub mod bitpoly;
pub mod container;
pub mod entropy;
pub mod error;
pub mod modred;
pub mod mult;
pub mod scheme;

#[cfg(test)]
pub(crate) mod testutil;

pub use bitpoly::BitPolynomial;
pub use container::{
    decrypt_file, encrypt_file, CiphertextContainer, ChunkRecord, EncryptConfig, PublicString,
};
pub use error::EseError;
pub use modred::{find_irreducible, is_irreducible, reduce, ModulusCache, SparseIrreducible};
pub use mult::{simplemult, simplemult_parallel};
pub use scheme::{expand_key, key_length, plan_chunks, ChunkPlan, EseParams, XMode};
