//! Acceptance gate: one test per criterion, each ending in a single
//! PASS line (run with `--nocapture` to see them on success). Oracles
//! here are implemented independently of the library's fast paths.

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ese_core::bitpoly::BitPolynomial;
use ese_core::container::{decrypt_file, encrypt_file, CiphertextContainer, EncryptConfig};
use ese_core::entropy::{mean_and_sample_stddev, recommend_whole_file, EntropyReport, FileStat};
use ese_core::modred::{find_irreducible, is_irreducible, reduce, reduce_parallel, ModulusCache};
use ese_core::mult::{simplemult, simplemult_parallel};
use ese_core::scheme::{expand_key, key_consumption_rate, key_length, plan_chunks, XMode};
use ese_core::SparseIrreducible;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_poly(rng: &mut ChaCha8Rng, bits: usize) -> BitPolynomial {
    let mut buf = vec![0u8; bits.div_ceil(8)];
    rng.fill_bytes(&mut buf);
    BitPolynomial::from_bytes(&buf, bits).unwrap()
}

fn random_nonzero_poly(rng: &mut ChaCha8Rng, bits: usize) -> BitPolynomial {
    loop {
        let p = random_poly(rng, bits);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Quadratic shift-and-XOR multiplication oracle: for every set bit i of
/// `b`, XOR `a << i` into the accumulator. No Karatsuba, no blocking.
fn quadratic_mult_oracle(a: &BitPolynomial, b: &BitPolynomial) -> BitPolynomial {
    let out_bits = a.bit_len() + b.bit_len();
    let mut acc = BitPolynomial::zero(out_bits.max(1));
    for i in 0..b.bit_len() {
        if b.coeff(i) {
            acc = acc.add(&a.shift_left(i));
        }
    }
    acc
}

/// Long-division remainder oracle: repeatedly XOR the modulus aligned to
/// the leading bit until the degree drops below `deg f`.
fn long_division_oracle(r: &BitPolynomial, f: &BitPolynomial) -> BitPolynomial {
    let df = f.degree().expect("modulus must be nonzero");
    let mut rem = r.clone();
    while let Some(d) = rem.degree() {
        if d < df {
            break;
        }
        rem = rem.add(&f.shift_left(d - df));
    }
    rem.truncated(df.max(1))
}

#[test]
fn criterion_01_multiplication_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = rng(101);
    for i in 0..200 {
        let lp = 1 + rng.gen_range(0..1 << 20);
        let lq = 1 + rng.gen_range(0..1 << 12);
        let p = random_poly(&mut rng, lp);
        let q = random_nonzero_poly(&mut rng, lq);
        let fast = simplemult(&p, &q).unwrap();
        let whole = p.mul_base(&q);
        assert_eq!(fast, whole, "simplemult != mul_base on pair {i}");
        let oracle = quadratic_mult_oracle(&p, &q);
        assert_eq!(fast, oracle, "simplemult != quadratic oracle on pair {i}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "budget exceeded: {elapsed:.1}s");
    println!("PASS criterion 1: multiplication oracle equivalence, 200 pairs in {elapsed:.1}s");
}

#[test]
fn criterion_02_reduction_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = rng(102);
    let mut cache = ModulusCache::in_memory();
    for i in 0..200 {
        let n = rng.gen_range(2..=1 << 12);
        let f = cache.get_or_find(n).unwrap();
        let len = n + 1 + rng.gen_range(0..(1 << 18) - n);
        let r = random_poly(&mut rng, len);
        let fast = reduce(&r, &f);
        let oracle = long_division_oracle(&r, &f.to_poly());
        assert_eq!(fast, oracle, "reduce != long division on pair {i} (n = {n})");
        // r XOR reduce(r, f) must be divisible by f.
        let mut diff = r.clone();
        // add is capacity-preserving on the longer operand
        diff = diff.add(&fast);
        assert!(
            long_division_oracle(&diff, &f.to_poly()).is_zero(),
            "r - (r mod f) not divisible by f on pair {i}"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "budget exceeded: {elapsed:.1}s");
    println!("PASS criterion 2: reduction oracle equivalence, 200 pairs in {elapsed:.1}s");
}

#[test]
fn criterion_03_parallel_determinism() {
    let mut rng = rng(103);
    let mut cache = ModulusCache::in_memory();
    for i in 0..50 {
        let lp = 1 + rng.gen_range(0..1 << 16);
        let lq = 1 + rng.gen_range(0..1 << 10);
        let p = random_poly(&mut rng, lp);
        let q = random_nonzero_poly(&mut rng, lq);
        let reference = simplemult_parallel(&p, &q, 1).unwrap();
        for w in [2, 4, 8] {
            assert_eq!(
                simplemult_parallel(&p, &q, w).unwrap(),
                reference,
                "simplemult workers={w} instance {i}"
            );
        }

        let n = rng.gen_range(2..=1 << 10);
        let f = cache.get_or_find(n).unwrap();
        let len = n + 1 + rng.gen_range(0..1 << 15);
        let r = random_poly(&mut rng, len);
        let reference = reduce_parallel(&r, &f, 1);
        for w in [2, 4, 8] {
            assert_eq!(
                reduce_parallel(&r, &f, w),
                reference,
                "reduce workers={w} instance {i} (n = {n})"
            );
        }
    }
    println!("PASS criterion 3: parallel outputs bit-identical across workers {{1,2,4,8}}, 50 instances");
}

#[test]
fn criterion_04_key_length_regressions() {
    // Full-entropy message: only the 2*eps_exp term remains.
    let (ell, _) = key_length(40_000_000, 40_000_000, 128).unwrap();
    assert_eq!(ell, 256);

    // X-ray profile: 5 MB payload, 4.62 MB entropy estimate -> ~0.38 MB.
    let n = 5_000_000 * 8;
    let t = 4_620_000 * 8;
    let (ell, otp) = key_length(n, t, 128).unwrap();
    let ell_mb = ell as f64 / 8e6;
    assert!(
        (ell_mb - 0.38).abs() / 0.38 < 0.01,
        "X-ray key length {ell_mb} MB, expected ~0.38 MB"
    );
    assert!(!otp);
    let saving = 1.0 - ell as f64 / n as f64;
    assert!(saving >= 0.90, "key saving vs OTP only {saving:.3}");

    // Genome profile: 6.47 GB payload, 5.68 GB entropy -> ~800 MB.
    let n = 6_470_000_000u64 * 8;
    let t = 5_680_000_000u64 * 8;
    let (ell, _) = key_length(n, t, 128).unwrap();
    let ell_mb = ell as f64 / 8e6;
    assert!(
        (ell_mb - 800.0).abs() / 800.0 < 0.02,
        "genome key length {ell_mb} MB, expected ~800 MB"
    );

    println!("PASS criterion 4: key-length regressions (256 bits, 0.38 MB / 1%, 800 MB / 2%, >=90% saving)");
}

#[test]
fn criterion_05_chunk_plan_regression() {
    // 2 GB file at ratios 0.043/0.049: per-chunk key lengths match the
    // published table within 1% for each chunk size.
    let file_bits = 2_048_000_000u64 * 8;
    for (chunk_mb, expected_mb) in [(256u64, 31.34f64), (512, 62.70), (1024, 125.39), (2048, 250.78)]
    {
        let chunk_bits = chunk_mb * 8_000_000;
        let plan = plan_chunks(file_bits, chunk_bits, 0.043, 0.049, 128).unwrap();
        let per_chunk_mb = plan.per_chunk_params[0].ell as f64 / 8e6;
        assert!(
            (per_chunk_mb - expected_mb).abs() / expected_mb < 0.01,
            "chunk {chunk_mb} MB: key {per_chunk_mb} MB, expected ~{expected_mb} MB"
        );
    }
    println!("PASS criterion 5: per-chunk key lengths {{31.34, 62.70, 125.39, 250.78}} MB within 1%");
}

#[test]
fn criterion_06_roundtrip() {
    let start = Instant::now();
    let mut rng = rng(106);
    let chunk_bytes = 1024u64;
    let sizes = [
        0usize,
        1,
        1024,
        1 << 20,
        (3 * chunk_bytes + 7) as usize,
    ];
    for x_mode in [XMode::SeedDerived, XMode::Embedded] {
        let mut cache = ModulusCache::in_memory();
        for &size in &sizes {
            let mut plaintext = vec![0u8; size];
            rng.fill_bytes(&mut plaintext);
            let config = EncryptConfig {
                chunk_bits: chunk_bytes * 8,
                eps_exp: 128,
                x_mode,
                entropy_ratio: 0.5,
                data_ratio: 1.0,
                workers: 1,
            };
            let need = config.plan(size as u64).unwrap().total_key_bytes;
            let mut key = vec![0u8; need as usize];
            rng.fill_bytes(&mut key);
            let container = encrypt_file(&plaintext, &key, &config, &mut cache).unwrap();
            let decoded = CiphertextContainer::decode(&container.encode()).unwrap();
            let restored = decrypt_file(&decoded, &key).unwrap();
            assert_eq!(restored, plaintext, "roundtrip failed at {size} bytes, {x_mode:?}");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "budget exceeded: {elapsed:.1}s");
    println!("PASS criterion 6: encrypt/decrypt identity on all sizes and X-modes in {elapsed:.1}s");
}

/// Remainder of `a` mod `m` over GF(2), on u64 bit masks (degree <= 63).
fn rem_u64(mut a: u64, m: u64) -> u64 {
    let dm = 63 - m.leading_zeros();
    while a != 0 {
        let da = 63 - a.leading_zeros();
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

/// Exhaustive trial division: irreducible iff no polynomial of degree
/// 1..n divides it.
fn irreducible_by_trial_division(f: u64) -> bool {
    let n = 63 - f.leading_zeros();
    if n == 0 {
        return false;
    }
    for g in 2u64..1 << n {
        if g >= 2 && rem_u64(f, g) == 0 {
            return false;
        }
    }
    true
}

#[test]
fn criterion_07_small_field_end_to_end() {
    let f = find_irreducible(16).unwrap();
    let f_mask: u64 = f.exponents().iter().map(|&e| 1u64 << e).sum();
    assert!(
        irreducible_by_trial_division(f_mask),
        "degree-16 modulus failed exhaustive verification"
    );

    let mut rng = rng(107);
    let x = random_nonzero_poly(&mut rng, 16);
    let x_mask = x.words()[0] & 0xFFFF;

    // Brute-force oracle in u64 arithmetic: schoolbook product of x and
    // k followed by long division, for every 8-bit key.
    let mut pads = vec![0u64; 256];
    for k in 1u64..256 {
        let mut prod = 0u64;
        for i in 0..8 {
            if k >> i & 1 == 1 {
                prod ^= x_mask << i;
            }
        }
        let expected = rem_u64(prod, f_mask);
        let k_poly = BitPolynomial::from_bytes(&[k as u8], 8).unwrap();
        let pad = expand_key(&k_poly, &x, &f).unwrap();
        let got = pad.words().first().copied().unwrap_or(0);
        assert_eq!(got, expected, "pipeline != brute force at key {k:#04x}");
        pads[k as usize] = got;
    }
    // Zero key is rejected, not silently mapped to a zero pad.
    let zero = BitPolynomial::zero(8);
    assert!(expand_key(&zero, &x, &f).is_err());

    // XOR-linearity of the pad in the key.
    for k1 in 1u64..256 {
        for k2 in 1u64..256 {
            let k3 = k1 ^ k2;
            if k3 == 0 {
                continue;
            }
            assert_eq!(
                pads[k1 as usize] ^ pads[k2 as usize],
                pads[k3 as usize],
                "pad not linear at {k1:#04x}, {k2:#04x}"
            );
        }
    }
    println!("PASS criterion 7: n = 16 pipeline matches brute force over all 2^8 keys; pad XOR-linear");
}

#[test]
fn criterion_08_irreducibility() {
    let start = Instant::now();
    let mut cache = ModulusCache::in_memory();
    for n in 2..=1024usize {
        let f = cache.get_or_find(n).unwrap();
        assert_eq!(f.degree(), n);
        let w = f.exponents().len();
        assert!(w == 3 || w == 5, "degree {n}: weight {w}");
        assert!(
            is_irreducible(&f.to_poly()),
            "degree {n}: verification failed"
        );
        // The container-facing validator agrees.
        assert!(SparseIrreducible::new(f.exponents().to_vec()).is_ok());
    }
    // Exhaustive cross-check against trial division for all polynomials
    // of degree 1..=12.
    for n in 1u32..=12 {
        for low in 0u64..1 << n {
            let f_mask = (1u64 << n) | low;
            let f = BitPolynomial::from_words(vec![f_mask], n as usize + 1);
            assert_eq!(
                is_irreducible(&f),
                irreducible_by_trial_division(f_mask),
                "verdict mismatch at {f_mask:#b}"
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("PASS criterion 8: moduli for n in [2, 1024] verified; exhaustive agreement for n <= 12 ({elapsed:.1}s)");
}

#[test]
fn criterion_09a_no_timing_cliff() {
    let mut rng = rng(109);
    let p = random_poly(&mut rng, 1 << 26);
    let time_at = |key_bits: usize, rng: &mut ChaCha8Rng| -> f64 {
        let q = random_nonzero_poly(rng, key_bits);
        // Best of three to damp scheduler noise.
        (0..3)
            .map(|_| {
                let start = Instant::now();
                std::hint::black_box(simplemult(&p, &q).unwrap());
                start.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let t9 = time_at(1 << 9, &mut rng);
    let t10 = time_at(1 << 10, &mut rng);
    let ratio = t10 / t9;
    assert!(
        ratio <= 4.0,
        "timing cliff: key 2^10 took {ratio:.2}x key 2^9 ({t10:.3}s vs {t9:.3}s)"
    );
    println!("PASS criterion 9a: no cliff at key 2^10 (ratio {ratio:.2}x <= 4x)");
}

#[test]
fn criterion_09b_simplemult_beats_whole_operand() {
    let mut rng = rng(110);
    let p = random_poly(&mut rng, 1 << 26);
    let q = random_nonzero_poly(&mut rng, 1 << 12);

    let start = Instant::now();
    let fast = simplemult(&p, &q).unwrap();
    let t_simple = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let whole = p.mul_base(&q);
    let t_whole = start.elapsed().as_secs_f64();

    assert_eq!(fast, whole);
    let speedup = t_whole / t_simple;
    assert!(
        speedup >= 2.0,
        "simplemult only {speedup:.2}x faster than whole-operand mul ({t_simple:.3}s vs {t_whole:.3}s)"
    );
    println!("PASS criterion 9b: simplemult {speedup:.1}x faster than whole-operand mul at 2^26 x 2^12");
}

#[test]
fn criterion_09c_parallel_speedup() {
    // NOTE: this criterion needs >= 4 hardware threads. On a single-CPU
    // host the workers serialize and the measured speedup stays near 1x,
    // so the assertion below fails honestly rather than being weakened.
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut rng = rng(111);
    let p = random_poly(&mut rng, 1 << 28);
    let q = random_nonzero_poly(&mut rng, 1 << 14);

    let time_with = |workers: usize| -> f64 {
        (0..3)
            .map(|_| {
                let start = Instant::now();
                std::hint::black_box(simplemult_parallel(&p, &q, workers).unwrap());
                start.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let t1 = time_with(1);
    let t4 = time_with(4);
    let speedup = t1 / t4;
    assert!(
        speedup >= 2.0,
        "parallel speedup {speedup:.2}x < 2x with 4 workers at message 2^28 \
         ({t1:.3}s -> {t4:.3}s; host reports {cpus} hardware thread(s) — \
         4 workers cannot run concurrently on fewer than 4)"
    );
    println!("PASS criterion 9c: parallel speedup {speedup:.1}x with 4 workers");
}

#[test]
fn criterion_10_entropy_statistics() {
    let stat = |name: &str, bytes: u64, compressed: u64| FileStat {
        path: name.into(),
        bytes,
        compressed_bytes: compressed,
        ratio: compressed as f64 / bytes as f64,
    };
    let report = EntropyReport::from_table(
        "stub",
        vec![
            stat("a", 1000, 400),
            stat("b", 1000, 500),
            stat("c", 1000, 600),
        ],
    )
    .unwrap();
    assert_eq!(report.mean_ratio, 0.5);
    assert!((report.stddev_ratio - 0.1).abs() < 1e-15);
    assert!((report.heuristic_ratio - 0.4).abs() < 1e-15);

    // Genome profile: a synthetic table whose ratios have mean 0.049 and
    // sample stddev 0.006 exactly, giving the 0.043 heuristic.
    let report = EntropyReport::from_table(
        "stub",
        vec![
            stat("g1", 1_000_000, 43_000),
            stat("g2", 1_000_000, 49_000),
            stat("g3", 1_000_000, 55_000),
        ],
    )
    .unwrap();
    assert!((report.mean_ratio - 0.049).abs() < 1e-15);
    assert!((report.stddev_ratio - 0.006).abs() < 1e-12);
    assert!((report.heuristic_ratio - 0.043).abs() < 1e-12);

    // Independent two-pass recomputation agrees to full precision.
    let ratios: Vec<f64> = report.files.iter().map(|f| f.ratio).collect();
    let (mean, stddev) = mean_and_sample_stddev(&ratios);
    assert_eq!(mean, report.mean_ratio);
    assert_eq!(stddev, report.stddev_ratio);

    // The recommendation path consumes the heuristic as the entropy bound.
    let params = recommend_whole_file(8_000_000, (8_000_000f64 * 0.043) as u64, 128).unwrap();
    assert!(params.ell < 8_000_000);
    println!("PASS criterion 10: corpus statistics exact ({{0.4,0.5,0.6}} -> 0.4; 0.049 - 0.006 = 0.043)");
}

#[test]
fn criterion_11_rate_arithmetic() {
    // X-ray table row: 18.79 MB/s encryption with key/message = 0.38/5
    // gives ~1.42-1.43 MB/s of key consumption.
    let r = key_consumption_rate(18.79, 380_000 * 8, 5_000_000 * 8);
    assert!((r - 1.42).abs() / 1.42 < 0.02, "X-ray key consumption {r}");

    // Bulk table row: 9.77 MB/s with key/message = 62.70/512 gives ~1.18.
    let r = key_consumption_rate(9.77, 62_700_000 * 8, 512_000_000 * 8);
    assert!((r - 1.18).abs() / 1.18 < 0.02, "bulk key consumption {r}");

    println!("PASS criterion 11: key-consumption rates 1.42 and 1.18 MB/s within 2%");
}
