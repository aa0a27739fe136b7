//! Command-line front end: chunked file encryption/decryption, entropy
//! estimation, modulus search and the benchmark harness.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ese_core::bench;
use ese_core::container::{decrypt_file, encrypt_file_timed, CiphertextContainer, EncryptConfig};
use ese_core::entropy::{
    estimate_entropy_corpus, recommend_whole_file, CompressorAdapter, EntropyReport,
};
use ese_core::modred::ModulusCache;
use ese_core::scheme::key_consumption_rate;
use ese_core::{EseError, XMode};

#[derive(Parser)]
#[command(
    name = "ese",
    about = "Entropically secure encryption: short-key bulk encryption for high-entropy data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a file with a short key sized from an entropy estimate
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext container
    Decrypt(DecryptArgs),
    /// Estimate corpus entropy via lossless compression
    Estimate(EstimateArgs),
    /// Find a sparse irreducible polynomial of a given degree
    FindPoly(FindPolyArgs),
    /// Benchmark the multiplication kernels over an operand-size sweep
    BenchMult(BenchMultArgs),
    /// Benchmark modular reduction over an operand-size sweep
    BenchReduce(BenchReduceArgs),
    /// Benchmark end-to-end encryption with per-phase timings
    BenchE2e(BenchE2eArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum XModeArg {
    /// Store a 256-bit seed; the public string is regenerated on decrypt
    Seed,
    /// Store the public string inline (doubles the ciphertext size)
    Embedded,
}

impl From<XModeArg> for XMode {
    fn from(value: XModeArg) -> Self {
        match value {
            XModeArg::Seed => XMode::SeedDerived,
            XModeArg::Embedded => XMode::Embedded,
        }
    }
}

#[derive(Args)]
struct EncryptArgs {
    /// Plaintext file
    input: PathBuf,
    /// Key material source (file or named pipe, e.g. a QKD feed)
    #[arg(long = "key-file")]
    key_file: PathBuf,
    /// Ciphertext container output path
    #[arg(long, short)]
    output: PathBuf,
    /// Chunk size (e.g. 1MiB, 256MiB, 8192); must be whole bytes
    #[arg(long, default_value = "1MiB", value_parser = parse_size)]
    chunk_size: u64,
    /// Security exponent: epsilon = 2^-eps_exp
    #[arg(long, default_value_t = 128)]
    eps_exp: u32,
    #[arg(long, value_enum, default_value = "seed")]
    x_mode: XModeArg,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Estimated entropy per data bit (from `ese estimate`)
    #[arg(long, conflicts_with = "key_file_length")]
    entropy_ratio: Option<f64>,
    /// Compression ratio of the payload's own format (1.0 for raw data)
    #[arg(long, default_value_t = 1.0)]
    data_ratio: f64,
    /// Total key budget (e.g. 4MiB) from which the entropy ratio is derived
    #[arg(long, value_parser = parse_size)]
    key_file_length: Option<u64>,
    /// Modulus cache file (degree:exponents per line); created if missing
    #[arg(long)]
    modulus_cache: Option<PathBuf>,
}

#[derive(Args)]
struct DecryptArgs {
    /// Ciphertext container
    input: PathBuf,
    #[arg(long = "key-file")]
    key_file: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Corpus files (or directories, scanned non-recursively)
    corpus: Vec<PathBuf>,
    /// builtin | store | path to an adapter TOML
    /// (default from ESE_ADAPTER, else builtin)
    #[arg(long)]
    adapter: Option<String>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Also recommend key parameters for a payload of this size
    #[arg(long, value_parser = parse_size)]
    payload_size: Option<u64>,
    #[arg(long, default_value_t = 128)]
    eps_exp: u32,
}

#[derive(Args)]
struct FindPolyArgs {
    /// Degree n of the modulus for GF(2^n)
    degree: usize,
    /// Modulus cache file to consult and update
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct BenchMultArgs {
    /// Message sizes in bits (comma-separated, e.g. 2^20 as 1048576)
    #[arg(long, value_delimiter = ',', default_value = "1048576,4194304")]
    message_bits: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "16384")]
    key_bits: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    workers: Vec<usize>,
    #[arg(long, default_value_t = bench::DEFAULT_REPETITIONS)]
    reps: u32,
    /// Skip sweep points whose working set would exceed this budget
    #[arg(long, default_value = "2GiB", value_parser = parse_size)]
    memory_budget: u64,
}

#[derive(Args)]
struct BenchReduceArgs {
    /// Operand sizes in bits
    #[arg(long, value_delimiter = ',', default_value = "2097152")]
    operand_bits: Vec<u64>,
    /// Modulus degrees
    #[arg(long, value_delimiter = ',', default_value = "4096")]
    degrees: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    workers: Vec<usize>,
    #[arg(long, default_value_t = bench::DEFAULT_REPETITIONS)]
    reps: u32,
    #[arg(long, default_value = "2GiB", value_parser = parse_size)]
    memory_budget: u64,
    #[arg(long)]
    modulus_cache: Option<PathBuf>,
}

#[derive(Args)]
struct BenchE2eArgs {
    /// Synthetic file size
    #[arg(long, default_value = "4MiB", value_parser = parse_size)]
    file_size: u64,
    /// Chunk-size sweep
    #[arg(long, value_delimiter = ',', default_value = "1MiB", value_parser = parse_size)]
    chunk_size: Vec<u64>,
    #[arg(long, default_value_t = 0.5)]
    entropy_ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    data_ratio: f64,
    #[arg(long, default_value_t = 128)]
    eps_exp: u32,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = bench::DEFAULT_REPETITIONS)]
    reps: u32,
    #[arg(long, default_value = "2GiB", value_parser = parse_size)]
    memory_budget: u64,
    #[arg(long)]
    modulus_cache: Option<PathBuf>,
}

/// Parses sizes like "1048576", "8KiB", "256MiB", "2GiB", "5MB".
/// Decimal units use 1 MB = 10^6 bytes; binary units are powers of two.
fn parse_size(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (digits, unit) = s.split_at(split);
    let value: u64 = digits.parse().map_err(|_| format!("bad size `{s}`"))?;
    let scale: u64 = match unit.trim() {
        "" | "B" => 1,
        "KiB" => 1 << 10,
        "MiB" => 1 << 20,
        "GiB" => 1 << 30,
        "KB" => 1_000,
        "MB" => 1_000_000,
        "GB" => 1_000_000_000,
        other => return Err(format!("unknown size unit `{other}`")),
    };
    value
        .checked_mul(scale)
        .ok_or_else(|| format!("size `{s}` overflows"))
}

fn open_cache(path: &Option<PathBuf>) -> Result<ModulusCache, EseError> {
    match path {
        Some(p) => ModulusCache::open(p),
        None => Ok(ModulusCache::in_memory()),
    }
}

/// Reads exactly `needed` bytes of key material; a short read reports the
/// shortfall in bits. Works on regular files and named pipes alike.
fn read_key_material(path: &PathBuf, needed: u64) -> Result<Vec<u8>, EseError> {
    let mut file = fs::File::open(path).map_err(|e| EseError::io(path, e))?;
    let mut buf = vec![0u8; needed as usize];
    let mut filled = 0usize;
    while filled < buf.len() {
        match file.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(EseError::InsufficientKeyMaterial {
                    required: needed * 8,
                    available: filled as u64 * 8,
                })
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(EseError::io(path, e)),
        }
    }
    Ok(buf)
}

fn cmd_encrypt(args: EncryptArgs) -> Result<(), EseError> {
    let plaintext = fs::read(&args.input).map_err(|e| EseError::io(&args.input, e))?;
    let file_bits = plaintext.len() as u64 * 8;

    let entropy_ratio = match (args.entropy_ratio, args.key_file_length) {
        (Some(r), _) => r,
        (None, Some(budget_bytes)) => {
            entropy_ratio_for_budget(file_bits, args.chunk_size * 8, args.eps_exp, budget_bytes)?
        }
        (None, None) => {
            return Err(EseError::InvalidParameter(
                "pass either --entropy-ratio or --key-file-length".into(),
            ))
        }
    };

    let config = EncryptConfig {
        chunk_bits: args.chunk_size * 8,
        eps_exp: args.eps_exp,
        x_mode: args.x_mode.into(),
        entropy_ratio,
        data_ratio: args.data_ratio,
        workers: args.threads.max(1),
    };
    let plan = config.plan(plaintext.len() as u64)?;
    if plan.per_chunk_params.iter().any(|p| p.otp_fallback) {
        eprintln!(
            "warning: key length reaches the message length on some chunks; \
             falling back to a one-time pad there (no key saving)"
        );
    }
    if let Some(first) = plan.per_chunk_params.first() {
        println!(
            "plan: {} chunk(s) of up to {} bits, per-chunk key {} bits ({:.2} MB), eps = 2^-{}",
            plan.chunk_count,
            config.chunk_bits,
            first.ell,
            first.ell as f64 / 8e6,
            args.eps_exp
        );
    }

    let key_material = read_key_material(&args.key_file, plan.total_key_bytes)?;
    let mut cache = open_cache(&args.modulus_cache)?;
    let start = std::time::Instant::now();
    let (container, _) = encrypt_file_timed(&plaintext, &key_material, &config, &mut cache)?;
    let seconds = start.elapsed().as_secs_f64();
    fs::write(&args.output, container.encode()).map_err(|e| EseError::io(&args.output, e))?;

    let enc_rate = plaintext.len() as f64 / 1e6 / seconds;
    println!(
        "key consumed: {} bits ({} bytes of key material)",
        plan.total_key_bits, plan.total_key_bytes
    );
    println!(
        "encryption rate: {enc_rate:.2} MB/s (1 MB = 10^6 bytes); key consumption: {:.3} MB/s",
        key_consumption_rate(enc_rate, plan.total_key_bits, file_bits.max(1))
    );
    Ok(())
}

/// Derives the entropy ratio that makes the chunk plan consume at most the
/// given key budget: each non-degenerate chunk costs n*(1 - r) + 2*eps_exp
/// bits of key.
fn entropy_ratio_for_budget(
    file_bits: u64,
    chunk_bits: u64,
    eps_exp: u32,
    budget_bytes: u64,
) -> Result<f64, EseError> {
    if file_bits == 0 {
        return Ok(1.0);
    }
    let chunks = file_bits.div_ceil(chunk_bits);
    let overhead = 2 * eps_exp as u64 * chunks + 8 * chunks; // byte rounding slack
    let budget_bits = budget_bytes * 8;
    if budget_bits <= overhead {
        return Err(EseError::InsufficientKeyMaterial {
            required: overhead + 1,
            available: budget_bits,
        });
    }
    let ratio = 1.0 - (budget_bits - overhead) as f64 / file_bits as f64;
    if ratio <= 0.0 {
        // Budget covers a full OTP; claim full entropy so the key hits
        // the 2*eps_exp floor per chunk.
        Ok(1.0)
    } else {
        Ok(ratio)
    }
}

fn cmd_decrypt(args: DecryptArgs) -> Result<(), EseError> {
    let bytes = fs::read(&args.input).map_err(|e| EseError::io(&args.input, e))?;
    let container = CiphertextContainer::decode(&bytes)?;
    let key_bytes: u64 = container.chunks.iter().map(|c| c.ell.div_ceil(8)).sum();
    let key_material = read_key_material(&args.key_file, key_bytes)?;
    let plaintext = decrypt_file(&container, &key_material)?;
    fs::write(&args.output, plaintext).map_err(|e| EseError::io(&args.output, e))?;
    println!(
        "decrypted {} bits from {} chunk(s)",
        container.plaintext_bits,
        container.chunks.len()
    );
    Ok(())
}

fn resolve_adapter(spec: &Option<String>) -> Result<CompressorAdapter, EseError> {
    let spec = spec
        .clone()
        .or_else(|| std::env::var("ESE_ADAPTER").ok())
        .unwrap_or_else(|| "builtin".into());
    match spec.as_str() {
        "builtin" => Ok(CompressorAdapter::builtin()),
        "store" => Ok(CompressorAdapter::store()),
        path => CompressorAdapter::from_config_file(path),
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), EseError> {
    let mut files = Vec::new();
    for entry in &args.corpus {
        if entry.is_dir() {
            let dir = fs::read_dir(entry).map_err(|e| EseError::io(entry, e))?;
            for item in dir {
                let item = item.map_err(|e| EseError::io(entry, e))?;
                if item.path().is_file() {
                    files.push(item.path());
                }
            }
        } else {
            files.push(entry.clone());
        }
    }
    let adapter = resolve_adapter(&args.adapter)?;
    let report: EntropyReport = estimate_entropy_corpus(&files, &adapter, args.threads.max(1))?;
    print!("{}", report.to_tsv());
    eprintln!(
        "note: compression bounds Shannon entropy, but the key-length formula \
         wants collision entropy, which is smaller; the estimate can be \
         optimistic. Ideal-compression bound: 2*eps_exp key bits."
    );
    if let Some(payload) = args.payload_size {
        let entropy_bits = ((payload * 8) as f64 * report.heuristic_ratio).round() as u64;
        let params = recommend_whole_file(payload * 8, entropy_bits.min(payload * 8), args.eps_exp)?;
        println!(
            "recommended key for a {payload}-byte payload: {} bits ({:.3} MB){}",
            params.ell,
            params.ell as f64 / 8e6,
            if params.otp_fallback {
                " — one-time pad, no saving"
            } else {
                ""
            }
        );
    }
    Ok(())
}

fn cmd_find_poly(args: FindPolyArgs) -> Result<(), EseError> {
    let mut cache = open_cache(&args.cache)?;
    let f = cache.get_or_find(args.degree)?;
    let terms: Vec<String> = f
        .exponents()
        .iter()
        .map(|&e| match e {
            0 => "1".into(),
            1 => "x".into(),
            e => format!("x^{e}"),
        })
        .collect();
    println!("{}", terms.join(" + "));
    Ok(())
}

fn print_notices(notices: &[String]) {
    for n in notices {
        eprintln!("notice: {n}");
    }
}

fn cmd_bench_mult(args: BenchMultArgs) -> Result<(), EseError> {
    let (records, notices) = bench::bench_mult(
        &args.message_bits,
        &args.key_bits,
        &args.workers,
        args.reps.max(3),
        args.memory_budget,
    )?;
    print_notices(&notices);
    print!("{}", bench::sweep_report(&records));
    Ok(())
}

fn cmd_bench_reduce(args: BenchReduceArgs) -> Result<(), EseError> {
    let mut cache = open_cache(&args.modulus_cache)?;
    let (records, notices) = bench::bench_reduce(
        &args.operand_bits,
        &args.degrees,
        &args.workers,
        args.reps.max(3),
        args.memory_budget,
        &mut cache,
    )?;
    print_notices(&notices);
    print!("{}", bench::sweep_report(&records));
    Ok(())
}

fn cmd_bench_e2e(args: BenchE2eArgs) -> Result<(), EseError> {
    let mut cache = open_cache(&args.modulus_cache)?;
    let (records, notices) = bench::bench_e2e(
        args.file_size,
        &args.chunk_size.iter().map(|c| c * 8).collect::<Vec<_>>(),
        args.entropy_ratio,
        args.data_ratio,
        args.eps_exp,
        args.threads.max(1),
        args.reps.max(3),
        args.memory_budget,
        &mut cache,
    )?;
    print_notices(&notices);
    print!("{}", bench::e2e_report(&records));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encrypt(args) => cmd_encrypt(args),
        Command::Decrypt(args) => cmd_decrypt(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::FindPoly(args) => cmd_find_poly(args),
        Command::BenchMult(args) => cmd_bench_mult(args),
        Command::BenchReduce(args) => cmd_bench_reduce(args),
        Command::BenchE2e(args) => cmd_bench_e2e(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
