//! End-to-end CLI tests over temp files, one per subcommand, plus the
//! exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ese(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ese"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to launch the binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn encrypt_decrypt_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut plaintext = vec![0u8; 1 << 20];
    rng.fill_bytes(&mut plaintext);
    fs::write(dir.path().join("plain.bin"), &plaintext).unwrap();
    let mut key = vec![0u8; 1 << 20];
    rng.fill_bytes(&mut key);
    fs::write(dir.path().join("key.bin"), &key).unwrap();

    let out = ese(
        &[
            "encrypt",
            "plain.bin",
            "--key-file",
            "key.bin",
            "--output",
            "cipher.ese",
            "--chunk-size",
            "1KiB",
            "--entropy-ratio",
            "0.5",
            "--modulus-cache",
            "moduli.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "encrypt failed: {}", stderr(&out));
    assert!(stdout(&out).contains("key consumed"));
    assert!(stdout(&out).contains("MB/s"));

    let ciphertext = fs::read(dir.path().join("cipher.ese")).unwrap();
    assert_ne!(&ciphertext[..4], b"plai");
    assert_eq!(&ciphertext[..4], b"ESE1");

    let out = ese(
        &[
            "decrypt",
            "cipher.ese",
            "--key-file",
            "key.bin",
            "--output",
            "restored.bin",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "decrypt failed: {}", stderr(&out));
    assert_eq!(fs::read(dir.path().join("restored.bin")).unwrap(), plaintext);

    // The cache file persisted the modulus for reuse.
    let cache = fs::read_to_string(dir.path().join("moduli.txt")).unwrap();
    assert!(cache.contains(':'));
}

#[test]
fn short_key_reports_both_bit_counts_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("plain.bin"), [0u8; 4096]).unwrap();
    fs::write(dir.path().join("key.bin"), [1u8; 16]).unwrap();
    let out = ese(
        &[
            "encrypt",
            "plain.bin",
            "--key-file",
            "key.bin",
            "--output",
            "cipher.ese",
            "--chunk-size",
            "1KiB",
            "--entropy-ratio",
            "0.5",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("128 bits"), "missing available bits: {msg}");
    assert!(msg.contains("need"), "missing required bits: {msg}");
}

#[test]
fn malformed_container_exits_7() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bogus.ese"), b"not a container at all").unwrap();
    fs::write(dir.path().join("key.bin"), [0u8; 8]).unwrap();
    let out = ese(
        &[
            "decrypt",
            "bogus.ese",
            "--key-file",
            "key.bin",
            "--output",
            "out.bin",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn missing_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("key.bin"), [0u8; 8]).unwrap();
    let out = ese(
        &[
            "encrypt",
            "no-such-file.bin",
            "--key-file",
            "key.bin",
            "--output",
            "out.ese",
            "--entropy-ratio",
            "0.5",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn estimate_reports_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..3 {
        let mut data = vec![0u8; 8192];
        rng.fill_bytes(&mut data[..4096]); // half random, half zeros
        fs::write(dir.path().join(format!("f{i}.bin")), &data).unwrap();
    }
    let out = ese(
        &["estimate", "f0.bin", "f1.bin", "f2.bin", "--payload-size", "1MiB"],
        dir.path(),
    );
    assert!(out.status.success(), "estimate failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("file\t"));
    assert!(text.contains("mean="));
    assert!(text.contains("recommended key"));
    assert!(stderr(&out).contains("collision entropy"));

    // Directory form measures the same corpus: identical summary line.
    let out2 = ese(&["estimate", "."], dir.path());
    assert!(out2.status.success());
    let summary = |s: &str| s.lines().find(|l| l.starts_with("# ")).unwrap().to_owned();
    assert_eq!(summary(&stdout(&out2)), summary(&text));
}

#[test]
fn find_poly_prints_a_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let out = ese(&["find-poly", "128"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("x^128 + "), "{text}");
    assert!(text.trim_end().ends_with("+ 1"), "{text}");
}

#[test]
fn bench_subcommands_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = ese(
        &[
            "bench-mult",
            "--message-bits",
            "65536",
            "--key-bits",
            "1024",
            "--workers",
            "1,2",
            "--reps",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("operation\tmessage_bits"));
    assert!(text.contains("base-mult"));
    assert!(text.contains("simplemult-parallel"));

    let out = ese(
        &[
            "bench-reduce",
            "--operand-bits",
            "65536",
            "--degrees",
            "1024",
            "--reps",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("reduce"));

    let out = ese(
        &[
            "bench-e2e",
            "--file-size",
            "16KiB",
            "--chunk-size",
            "1KiB",
            "--reps",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Mult_s\tRed_s\tXOR_s"));
    assert!(text.contains("Enc_Rate_MB_s"));

    // Memory budget skips with a notice instead of running.
    let out = ese(
        &[
            "bench-mult",
            "--message-bits",
            "1048576",
            "--key-bits",
            "4096",
            "--memory-budget",
            "1KiB",
            "--reps",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stderr(&out).contains("notice"));
}

#[test]
fn key_file_length_budget_mode() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut plaintext = vec![0u8; 64 * 1024];
    rng.fill_bytes(&mut plaintext);
    fs::write(dir.path().join("plain.bin"), &plaintext).unwrap();
    let mut key = vec![0u8; 40 * 1024];
    rng.fill_bytes(&mut key);
    fs::write(dir.path().join("key.bin"), &key).unwrap();

    let out = ese(
        &[
            "encrypt",
            "plain.bin",
            "--key-file",
            "key.bin",
            "--output",
            "cipher.ese",
            "--chunk-size",
            "1KiB",
            "--key-file-length",
            "32KiB",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    // The derived plan must fit the stated budget.
    let text = stdout(&out);
    let consumed: u64 = text
        .lines()
        .find(|l| l.starts_with("key consumed"))
        .and_then(|l| l.split_whitespace().nth(2))
        .and_then(|w| w.parse().ok())
        .expect("key consumption line");
    assert!(consumed <= 32 * 1024 * 8, "{consumed} bits over budget");

    let out = ese(
        &[
            "decrypt",
            "cipher.ese",
            "--key-file",
            "key.bin",
            "--output",
            "restored.bin",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(dir.path().join("restored.bin")).unwrap(), plaintext);
}
