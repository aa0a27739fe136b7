//! C ABI over the core library.
//!
//! The surface is deliberately small: an opaque context that bundles the
//! encryption configuration with a modulus cache, buffer-in/buffer-out
//! encrypt and decrypt, and a key-length helper. All functions return an
//! `EseStatus`; the most recent failure's message is retrievable from the
//! context. Buffers returned by the library must be released with
//! `ese_buffer_free`.
//!
//! The generated header lands in `include/ese.h` at build time.

use std::ffi::{c_char, CString};
use std::ptr;
use std::slice;

use ese_core::container::{decrypt_file, encrypt_file, CiphertextContainer, EncryptConfig};
use ese_core::modred::ModulusCache;
use ese_core::scheme::XMode;
use ese_core::EseError;

/// Status codes; nonzero values match the CLI's exit codes per error
/// class, with FFI-specific codes above 100.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EseStatus {
    Ok = 0,
    InvalidParameter = 2,
    InsufficientKeyMaterial = 3,
    Io = 4,
    Estimation = 5,
    DegenerateKey = 6,
    MalformedContainer = 7,
    InvalidEntropy = 8,
    NoModulus = 9,
    NullPointer = 100,
}

fn status_of(e: &EseError) -> EseStatus {
    match e.exit_code() {
        2 => EseStatus::InvalidParameter,
        3 => EseStatus::InsufficientKeyMaterial,
        4 => EseStatus::Io,
        5 => EseStatus::Estimation,
        6 => EseStatus::DegenerateKey,
        7 => EseStatus::MalformedContainer,
        8 => EseStatus::InvalidEntropy,
        _ => EseStatus::NoModulus,
    }
}

/// Opaque handle holding the encryption configuration, the modulus cache
/// and the last error message. Not thread-safe; use one per thread.
pub struct EseContext {
    config: EncryptConfig,
    cache: ModulusCache,
    last_error: Option<CString>,
}

impl EseContext {
    fn fail(&mut self, e: EseError) -> EseStatus {
        let status = status_of(&e);
        self.last_error = CString::new(e.to_string()).ok();
        status
    }
}

/// Creates a context. `chunk_bits` must be a positive multiple of 8;
/// `eps_exp` in 1..=255 sets the security level 2^-eps_exp;
/// `entropy_ratio` is the estimated entropy per data bit in (0, 1];
/// `embedded_x` nonzero stores the public string inline instead of a
/// seed. Returns null on invalid parameters.
#[no_mangle]
pub extern "C" fn ese_context_new(
    chunk_bits: u64,
    eps_exp: u32,
    entropy_ratio: f64,
    data_ratio: f64,
    workers: usize,
    embedded_x: i32,
) -> *mut EseContext {
    if chunk_bits == 0
        || chunk_bits % 8 != 0
        || eps_exp == 0
        || eps_exp > 255
        || !(entropy_ratio > 0.0)
        || !(data_ratio > 0.0 && data_ratio <= 1.0)
    {
        return ptr::null_mut();
    }
    let config = EncryptConfig {
        chunk_bits,
        eps_exp,
        x_mode: if embedded_x != 0 {
            XMode::Embedded
        } else {
            XMode::SeedDerived
        },
        entropy_ratio,
        data_ratio,
        workers: workers.max(1),
    };
    Box::into_raw(Box::new(EseContext {
        config,
        cache: ModulusCache::in_memory(),
        last_error: None,
    }))
}

/// Releases a context created by `ese_context_new`. Null is a no-op.
#[no_mangle]
pub extern "C" fn ese_context_free(ctx: *mut EseContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// Message describing the context's most recent failure, or null if the
/// last call succeeded. The pointer is owned by the context and valid
/// until the next call on it.
#[no_mangle]
pub extern "C" fn ese_last_error(ctx: *const EseContext) -> *const c_char {
    if ctx.is_null() {
        return ptr::null();
    }
    match &unsafe { &*ctx }.last_error {
        Some(msg) => msg.as_ptr(),
        None => ptr::null(),
    }
}

/// Key length in bits for an n-bit message with at least t bits of
/// collision entropy at security 2^-eps_exp. Writes the length to
/// `ell_out` and whether the scheme degrades to a one-time pad to
/// `otp_out` (may be null).
#[no_mangle]
pub extern "C" fn ese_key_length(
    n_bits: u64,
    t_bits: u64,
    eps_exp: u32,
    ell_out: *mut u64,
    otp_out: *mut i32,
) -> EseStatus {
    if ell_out.is_null() {
        return EseStatus::NullPointer;
    }
    match ese_core::key_length(n_bits, t_bits, eps_exp) {
        Ok((ell, otp)) => {
            unsafe { *ell_out = ell };
            if !otp_out.is_null() {
                unsafe { *otp_out = otp as i32 };
            }
            EseStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Key material (in bytes) needed to encrypt `plaintext_len` bytes under
/// the context's configuration. Writes to `bytes_out`.
#[no_mangle]
pub extern "C" fn ese_key_requirement(
    ctx: *mut EseContext,
    plaintext_len: usize,
    bytes_out: *mut u64,
) -> EseStatus {
    if ctx.is_null() || bytes_out.is_null() {
        return EseStatus::NullPointer;
    }
    let ctx = unsafe { &mut *ctx };
    match ctx.config.plan(plaintext_len as u64) {
        Ok(plan) => {
            unsafe { *bytes_out = plan.total_key_bytes };
            ctx.last_error = None;
            EseStatus::Ok
        }
        Err(e) => ctx.fail(e),
    }
}

unsafe fn input<'a>(ptr: *const u8, len: usize) -> Option<&'a [u8]> {
    if ptr.is_null() && len > 0 {
        None
    } else if len == 0 {
        Some(&[])
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn emit(buf: Vec<u8>, out: *mut *mut u8, out_len: *mut usize) {
    let boxed = buf.into_boxed_slice();
    unsafe {
        *out_len = boxed.len();
        *out = Box::into_raw(boxed) as *mut u8;
    }
}

/// Encrypts a buffer into a ciphertext container. On success `*out` holds
/// a library-owned buffer of `*out_len` bytes; free it with
/// `ese_buffer_free`.
#[no_mangle]
pub extern "C" fn ese_encrypt(
    ctx: *mut EseContext,
    plaintext: *const u8,
    plaintext_len: usize,
    key: *const u8,
    key_len: usize,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> EseStatus {
    if ctx.is_null() || out.is_null() || out_len.is_null() {
        return EseStatus::NullPointer;
    }
    let ctx = unsafe { &mut *ctx };
    let (Some(pt), Some(km)) = (unsafe { input(plaintext, plaintext_len) }, unsafe {
        input(key, key_len)
    }) else {
        return EseStatus::NullPointer;
    };
    let config = ctx.config.clone();
    match encrypt_file(pt, km, &config, &mut ctx.cache) {
        Ok(container) => {
            emit(container.encode(), out, out_len);
            ctx.last_error = None;
            EseStatus::Ok
        }
        Err(e) => ctx.fail(e),
    }
}

/// Decrypts a ciphertext container produced by `ese_encrypt` with the
/// same key material. Output buffer ownership as in `ese_encrypt`.
#[no_mangle]
pub extern "C" fn ese_decrypt(
    ctx: *mut EseContext,
    container: *const u8,
    container_len: usize,
    key: *const u8,
    key_len: usize,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> EseStatus {
    if ctx.is_null() || out.is_null() || out_len.is_null() {
        return EseStatus::NullPointer;
    }
    let ctx = unsafe { &mut *ctx };
    let (Some(ct), Some(km)) = (unsafe { input(container, container_len) }, unsafe {
        input(key, key_len)
    }) else {
        return EseStatus::NullPointer;
    };
    let parsed = match CiphertextContainer::decode(ct) {
        Ok(c) => c,
        Err(e) => return ctx.fail(e),
    };
    match decrypt_file(&parsed, km) {
        Ok(pt) => {
            emit(pt, out, out_len);
            ctx.last_error = None;
            EseStatus::Ok
        }
        Err(e) => ctx.fail(e),
    }
}

/// Frees a buffer returned by `ese_encrypt`/`ese_decrypt`. The length
/// must be the value the library reported. Null is a no-op.
#[no_mangle]
pub extern "C" fn ese_buffer_free(buf: *mut u8, len: usize) {
    if !buf.is_null() {
        drop(unsafe { Box::from_raw(ptr::slice_from_raw_parts_mut(buf, len)) });
    }
}
