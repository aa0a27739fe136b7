//! Benchmark harness behind the `bench-*` CLI subcommands.
//!
//! Records are medians over a fixed repetition count (at least 3);
//! repetitions run sequentially so they do not perturb each other. Sweep
//! points whose estimated working set exceeds the memory budget are
//! skipped with a notice instead of thrashing the machine. Rates use
//! 1 MB = 10^6 bytes.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitpoly::BitPolynomial;
use crate::container::{encrypt_file_timed, EncryptConfig, PhaseTimings};
use crate::error::EseError;
use crate::modred::{reduce_parallel, ModulusCache};
use crate::mult::simplemult_parallel;
use crate::scheme::{key_consumption_rate, XMode};

pub const DEFAULT_REPETITIONS: u32 = 5;
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30; // 2 GiB

/// One measured sweep point.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub operation: String,
    /// Long-operand (message) size in bits.
    pub message_bits: u64,
    /// Short-operand (key or modulus-degree) size in bits.
    pub key_bits: u64,
    pub workers: usize,
    pub repetitions: u32,
    pub median_seconds: f64,
}

impl BenchRecord {
    /// Long-operand throughput in MB/s (1 MB = 10^6 bytes).
    pub fn rate_mb_s(&self) -> f64 {
        self.message_bits as f64 / 8e6 / self.median_seconds
    }
}

/// Median of `reps >= 3` sequential timings of `f`.
pub fn time_median<F: FnMut()>(reps: u32, mut f: F) -> f64 {
    assert!(reps >= 3, "repetitions must be at least 3");
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2.0
    }
}

fn random_poly(rng: &mut ChaCha8Rng, bits: usize) -> BitPolynomial {
    use rand::RngCore;
    let mut buf = vec![0u8; bits.div_ceil(8)];
    rng.fill_bytes(&mut buf);
    // Keep the top bit set so operand degrees match the requested sizes.
    let top = (bits - 1) % 8;
    let len = buf.len();
    buf[len - 1] |= 1 << top;
    BitPolynomial::from_bytes(&buf, bits).unwrap()
}

/// Working-set estimate for one multiplication point, in bytes: both
/// operands, the product, and the base multiplication's scratch space.
fn mult_memory_bytes(message_bits: u64, key_bits: u64, whole_operand: bool) -> u64 {
    let operands = (message_bits + key_bits) / 8;
    let product = operands;
    let scratch = if whole_operand {
        // Balanced base mult pads to the larger operand and keeps ~8
        // words of scratch per operand word.
        message_bits.max(key_bits)
    } else {
        key_bits * 10
    };
    operands + product + scratch
}

/// Multiplication sweep: whole-operand base multiplication, block-wise
/// `simplemult`, and parallel `simplemult` for each worker count.
/// Returns the records and human-readable notices for skipped points.
pub fn bench_mult(
    message_bits: &[u64],
    key_bits: &[u64],
    workers: &[usize],
    reps: u32,
    memory_budget: u64,
) -> Result<(Vec<BenchRecord>, Vec<String>), EseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB_E_57);
    let mut records = Vec::new();
    let mut notices = Vec::new();
    for &m in message_bits {
        for &k in key_bits {
            if mult_memory_bytes(m, k, true) > memory_budget {
                notices.push(format!(
                    "skipping {m} x {k} bits: estimated working set exceeds the {memory_budget}-byte budget"
                ));
                continue;
            }
            let p = random_poly(&mut rng, m as usize);
            let q = random_poly(&mut rng, k as usize);
            let t = time_median(reps, || {
                std::hint::black_box(p.mul_base(&q));
            });
            records.push(BenchRecord {
                operation: "base-mult".into(),
                message_bits: m,
                key_bits: k,
                workers: 1,
                repetitions: reps,
                median_seconds: t,
            });
            let t = time_median(reps, || {
                std::hint::black_box(simplemult_parallel(&p, &q, 1).unwrap());
            });
            records.push(BenchRecord {
                operation: "simplemult".into(),
                message_bits: m,
                key_bits: k,
                workers: 1,
                repetitions: reps,
                median_seconds: t,
            });
            for &w in workers {
                if w <= 1 {
                    continue;
                }
                let t = time_median(reps, || {
                    std::hint::black_box(simplemult_parallel(&p, &q, w).unwrap());
                });
                records.push(BenchRecord {
                    operation: "simplemult-parallel".into(),
                    message_bits: m,
                    key_bits: k,
                    workers: w,
                    repetitions: reps,
                    median_seconds: t,
                });
            }
        }
    }
    Ok((records, notices))
}

/// Reduction sweep: random polynomials of `r_bits` reduced modulo sparse
/// irreducibles of the given degrees.
pub fn bench_reduce(
    r_bits: &[u64],
    degrees: &[u64],
    workers: &[usize],
    reps: u32,
    memory_budget: u64,
    cache: &mut ModulusCache,
) -> Result<(Vec<BenchRecord>, Vec<String>), EseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x12ED);
    let mut records = Vec::new();
    let mut notices = Vec::new();
    for &n in degrees {
        let f = cache.get_or_find(n as usize)?;
        for &rb in r_bits {
            if rb <= n {
                notices.push(format!(
                    "skipping reduce {rb} mod degree {n}: operand not longer than the modulus"
                ));
                continue;
            }
            if rb / 4 > memory_budget {
                notices.push(format!(
                    "skipping reduce {rb} mod degree {n}: estimated working set exceeds the {memory_budget}-byte budget"
                ));
                continue;
            }
            let r = random_poly(&mut rng, rb as usize);
            for &w in workers {
                let t = time_median(reps, || {
                    std::hint::black_box(reduce_parallel(&r, &f, w));
                });
                records.push(BenchRecord {
                    operation: if w <= 1 { "reduce" } else { "reduce-parallel" }.into(),
                    message_bits: rb,
                    key_bits: n,
                    workers: w.max(1),
                    repetitions: reps,
                    median_seconds: t,
                });
            }
        }
    }
    Ok((records, notices))
}

/// One end-to-end sweep point with the per-phase split of Tables 7-9.
#[derive(Debug, Clone)]
pub struct E2eRecord {
    pub file_bytes: u64,
    pub chunk_bits: u64,
    pub workers: usize,
    pub repetitions: u32,
    pub total_key_bits: u64,
    pub mult_seconds: f64,
    pub reduce_seconds: f64,
    pub xor_seconds: f64,
    pub total_seconds: f64,
}

impl E2eRecord {
    /// Encryption rate in MB/s over the whole file (1 MB = 10^6 bytes).
    pub fn enc_rate_mb_s(&self) -> f64 {
        self.file_bytes as f64 / 1e6 / self.total_seconds
    }

    /// Key consumption in MB/s at the measured encryption rate.
    pub fn key_cons_mb_s(&self) -> f64 {
        key_consumption_rate(
            self.enc_rate_mb_s(),
            self.total_key_bits,
            self.file_bytes * 8,
        )
    }
}

/// End-to-end sweep over chunk sizes on a synthetic random file. Timings
/// are medians per phase; the total is the median of whole-run times.
#[allow(clippy::too_many_arguments)]
pub fn bench_e2e(
    file_bytes: u64,
    chunk_bits: &[u64],
    entropy_ratio: f64,
    data_ratio: f64,
    eps_exp: u32,
    workers: usize,
    reps: u32,
    memory_budget: u64,
    cache: &mut ModulusCache,
) -> Result<(Vec<E2eRecord>, Vec<String>), EseError> {
    assert!(reps >= 3, "repetitions must be at least 3");
    let mut rng = ChaCha8Rng::seed_from_u64(0xE2E);
    let plaintext = {
        use rand::RngCore;
        let mut buf = vec![0u8; file_bytes as usize];
        rng.fill_bytes(&mut buf);
        buf
    };
    let mut records = Vec::new();
    let mut notices = Vec::new();
    for &cb in chunk_bits {
        if file_bytes * 4 > memory_budget {
            notices.push(format!(
                "skipping e2e at chunk {cb} bits: estimated working set exceeds the {memory_budget}-byte budget"
            ));
            continue;
        }
        let config = EncryptConfig {
            chunk_bits: cb,
            eps_exp,
            x_mode: XMode::SeedDerived,
            entropy_ratio,
            data_ratio,
            workers,
        };
        let plan = config.plan(file_bytes)?;
        let key = vec![0xA5u8; plan.total_key_bytes.max(1) as usize];
        // Warm the modulus cache outside the timed region: the search is
        // a one-time cost amortized across encryptions.
        for params in &plan.per_chunk_params {
            if !params.otp_fallback {
                cache.get_or_find(params.n as usize)?;
            }
        }
        let mut runs: Vec<(PhaseTimings, f64)> = Vec::with_capacity(reps as usize);
        for _ in 0..reps {
            let start = Instant::now();
            let (_, timings) = encrypt_file_timed(&plaintext, &key, &config, cache)?;
            runs.push((timings, start.elapsed().as_secs_f64()));
        }
        let med = |f: &dyn Fn(&(PhaseTimings, f64)) -> f64| -> f64 {
            let mut v: Vec<f64> = runs.iter().map(f).collect();
            v.sort_by(f64::total_cmp);
            let mid = v.len() / 2;
            if v.len() % 2 == 1 {
                v[mid]
            } else {
                (v[mid - 1] + v[mid]) / 2.0
            }
        };
        records.push(E2eRecord {
            file_bytes,
            chunk_bits: cb,
            workers,
            repetitions: reps,
            total_key_bits: plan.total_key_bits,
            mult_seconds: med(&|r| r.0.mult.as_secs_f64()),
            reduce_seconds: med(&|r| r.0.reduce.as_secs_f64()),
            xor_seconds: med(&|r| r.0.xor.as_secs_f64()),
            total_seconds: med(&|r| r.1),
        });
    }
    Ok((records, notices))
}

/// Delimited-text report for multiplication/reduction sweeps, units in
/// the header.
pub fn sweep_report(records: &[BenchRecord]) -> String {
    let mut out = String::from(
        "operation\tmessage_bits\tkey_bits\tworkers\trepetitions\tmedian_s\trate_MB_s\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.3}",
            r.operation,
            r.message_bits,
            r.key_bits,
            r.workers,
            r.repetitions,
            r.median_seconds,
            r.rate_mb_s()
        );
    }
    out
}

/// Delimited-text report mirroring the end-to-end table columns
/// (Mult., Red., XOR, Enc. Rate, Key Cons.).
pub fn e2e_report(records: &[E2eRecord]) -> String {
    let mut out = String::from(
        "file_bytes\tchunk_bits\tworkers\trepetitions\tkey_bits\tMult_s\tRed_s\tXOR_s\ttotal_s\tEnc_Rate_MB_s\tKey_Cons_MB_s\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.3}\t{:.3}",
            r.file_bytes,
            r.chunk_bits,
            r.workers,
            r.repetitions,
            r.total_key_bits,
            r.mult_seconds,
            r.reduce_seconds,
            r.xor_seconds,
            r.total_seconds,
            r.enc_rate_mb_s(),
            r.key_cons_mb_s()
        );
    }
    out
}
