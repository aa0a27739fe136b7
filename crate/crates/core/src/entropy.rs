//! Compression-based entropy estimation.
//!
//! A lossless compressor cannot push a file below its Shannon entropy, so
//! the compressed size is a usable (if pessimistic) proxy for the
//! plaintext entropy needed to size keys. Over a corpus we take the mean
//! compression ratio minus one sample standard deviation as the working
//! estimate; the subtraction buys margin against files that are more
//! compressible than the corpus average.
//!
//! Note the direction of the approximation: the key-length formula wants
//! collision entropy, which is *smaller* than Shannon entropy, and no
//! practical estimator for it is known. The heuristic here can therefore
//! be too optimistic in principle; reports carry both the ideal-compression
//! bound (256-bit key) and the heuristic bound so the caller sees the
//! spread.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use flate2::write::{ZlibDecoder, ZlibEncoder};
use flate2::Compression;
use rand::Rng;
use serde::Deserialize;

use crate::error::EseError;
use crate::scheme::{key_length, EseParams};

/// How an adapter actually compresses bytes.
#[derive(Debug, Clone)]
enum Codec {
    /// Built-in general-purpose compressor (zlib). No external tools
    /// needed, so the test suite is self-contained.
    Builtin,
    /// Identity with an 8-byte length header; useful as a worst-case
    /// baseline (ratio slightly above 1).
    Store,
    /// External tool invoked through shell command templates with
    /// `{input}` and `{output}` placeholders.
    External { compress: String, decompress: String },
}

/// A named lossless compressor.
#[derive(Debug, Clone)]
pub struct CompressorAdapter {
    name: String,
    codec: Codec,
}

/// On-disk adapter description (TOML):
///
/// ```toml
/// name = "bzip2"
/// lossless = true
/// compress = "bzip2 -c {input} > {output}"
/// decompress = "bzip2 -dc {input} > {output}"
/// ```
#[derive(Debug, Deserialize)]
struct AdapterConfig {
    name: String,
    lossless: bool,
    compress: String,
    decompress: String,
}

impl CompressorAdapter {
    pub fn builtin() -> Self {
        CompressorAdapter {
            name: "builtin-zlib".into(),
            codec: Codec::Builtin,
        }
    }

    pub fn store() -> Self {
        CompressorAdapter {
            name: "store".into(),
            codec: Codec::Store,
        }
    }

    pub fn external(name: &str, compress: &str, decompress: &str) -> Self {
        CompressorAdapter {
            name: name.into(),
            codec: Codec::External {
                compress: compress.into(),
                decompress: decompress.into(),
            },
        }
    }

    /// Loads an external adapter from a TOML config file. Lossy adapters
    /// are rejected: a lossy ratio says nothing about entropy.
    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self, EseError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| EseError::io(path, e))?;
        let cfg: AdapterConfig = toml::from_str(&text).map_err(|e| {
            EseError::InvalidParameter(format!("adapter config {}: {e}", path.display()))
        })?;
        if !cfg.lossless {
            return Err(EseError::InvalidParameter(format!(
                "adapter `{}` is not lossless; only lossless compression bounds entropy",
                cfg.name
            )));
        }
        Ok(CompressorAdapter::external(
            &cfg.name,
            &cfg.compress,
            &cfg.decompress,
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn compress(&self, data: &[u8], origin: &Path) -> Result<Vec<u8>, EseError> {
        match &self.codec {
            Codec::Builtin => {
                let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
                enc.write_all(data)
                    .and_then(|_| enc.finish())
                    .map_err(|e| self.failure(origin, e.to_string()))
            }
            Codec::Store => {
                let mut out = Vec::with_capacity(data.len() + 8);
                out.extend_from_slice(&(data.len() as u64).to_le_bytes());
                out.extend_from_slice(data);
                Ok(out)
            }
            Codec::External { compress, .. } => self.run_external(compress, data, origin),
        }
    }

    pub fn decompress(&self, data: &[u8], origin: &Path) -> Result<Vec<u8>, EseError> {
        match &self.codec {
            Codec::Builtin => {
                let mut dec = ZlibDecoder::new(Vec::new());
                dec.write_all(data)
                    .and_then(|_| dec.finish())
                    .map_err(|e| self.failure(origin, e.to_string()))
            }
            Codec::Store => {
                if data.len() < 8 {
                    return Err(self.failure(origin, "truncated store header".into()));
                }
                let len = u64::from_le_bytes(data[..8].try_into().unwrap()) as usize;
                if data.len() - 8 != len {
                    return Err(self.failure(origin, "store length mismatch".into()));
                }
                Ok(data[8..].to_vec())
            }
            Codec::External { decompress, .. } => self.run_external(decompress, data, origin),
        }
    }

    fn run_external(&self, template: &str, data: &[u8], origin: &Path) -> Result<Vec<u8>, EseError> {
        let dir = tempdir_in_env().map_err(|e| self.failure(origin, e.to_string()))?;
        let input = dir.join("in");
        let output = dir.join("out");
        let result = (|| {
            fs::write(&input, data)?;
            let cmd = template
                .replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy());
            let status = Command::new("sh").arg("-c").arg(&cmd).status()?;
            if !status.success() {
                return Err(std::io::Error::other(format!(
                    "`{cmd}` exited with {status}"
                )));
            }
            fs::read(&output)
        })();
        let _ = fs::remove_dir_all(&dir);
        result.map_err(|e| self.failure(origin, e.to_string()))
    }

    fn failure(&self, file: &Path, reason: String) -> EseError {
        EseError::Compressor {
            name: self.name.clone(),
            file: file.to_path_buf(),
            reason,
        }
    }
}

fn tempdir_in_env() -> std::io::Result<PathBuf> {
    let mut rng = rand::thread_rng();
    let dir = std::env::temp_dir().join(format!("ese-adapter-{:016x}", rng.gen::<u64>()));
    fs::create_dir(&dir)?;
    Ok(dir)
}

/// Compression ratio of a byte stream: compressed size / original size,
/// container overhead included (conservative — overestimates entropy).
pub fn compress_ratio(data: &[u8], adapter: &CompressorAdapter) -> Result<f64, EseError> {
    if data.is_empty() {
        return Err(EseError::InvalidParameter(
            "cannot estimate entropy of an empty file".into(),
        ));
    }
    let compressed = adapter.compress(data, Path::new("<memory>"))?;
    Ok(compressed.len() as f64 / data.len() as f64)
}

/// One corpus file's contribution to the report.
#[derive(Debug, Clone)]
pub struct FileStat {
    pub path: PathBuf,
    pub bytes: u64,
    pub compressed_bytes: u64,
    pub ratio: f64,
}

/// Corpus compression statistics and the derived entropy-ratio estimate.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub compressor: String,
    pub files: Vec<FileStat>,
    pub mean_ratio: f64,
    pub stddev_ratio: f64,
    /// `mean - stddev`; the working per-bit entropy estimate.
    pub heuristic_ratio: f64,
}

impl EntropyReport {
    /// Builds a report from an already-measured per-file table. Statistics
    /// are always recomputed from the table, never trusted from outside.
    pub fn from_table(compressor: &str, mut files: Vec<FileStat>) -> Result<Self, EseError> {
        if files.is_empty() {
            return Err(EseError::InvalidParameter(
                "corpus must contain at least one file".into(),
            ));
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let ratios: Vec<f64> = files.iter().map(|f| f.ratio).collect();
        let (mean, stddev) = mean_and_sample_stddev(&ratios);
        let heuristic = mean - stddev;
        if heuristic <= 0.0 {
            return Err(EseError::HeuristicNotPositive(heuristic));
        }
        Ok(EntropyReport {
            compressor: compressor.into(),
            files,
            mean_ratio: mean,
            stddev_ratio: stddev,
            heuristic_ratio: heuristic,
        })
    }

    /// Delimited-text rendering: one row per file, then a summary line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str("file\tbytes\tcompressed_bytes\tratio\n");
        for f in &self.files {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                f.path.display(),
                f.bytes,
                f.compressed_bytes,
                f.ratio
            );
        }
        let _ = writeln!(
            out,
            "# compressor={} mean={:.6} stddev={:.6} heuristic={:.6}",
            self.compressor, self.mean_ratio, self.stddev_ratio, self.heuristic_ratio
        );
        out
    }
}

/// Mean and sample (n-1) standard deviation; stddev is 0 for one sample.
pub fn mean_and_sample_stddev(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Compresses every corpus file with `adapter` (up to `workers` files in
/// flight) and assembles the report. One randomly chosen file is
/// round-tripped through the decompressor as a losslessness audit. Any
/// per-file failure aborts with the offending filename.
pub fn estimate_entropy_corpus(
    files: &[PathBuf],
    adapter: &CompressorAdapter,
    workers: usize,
) -> Result<EntropyReport, EseError> {
    if files.is_empty() {
        return Err(EseError::InvalidParameter(
            "corpus must contain at least one file".into(),
        ));
    }
    let workers = workers.max(1);
    let audit_index = rand::thread_rng().gen_range(0..files.len());

    let mut stats: Vec<Option<FileStat>> = Vec::new();
    stats.resize_with(files.len(), || None);
    let mut first_error: Option<EseError> = None;
    for (batch_start, batch) in files.chunks(workers).enumerate().map(|(i, b)| (i * workers, b)) {
        let results: Vec<Result<FileStat, EseError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .enumerate()
                .map(|(j, path)| {
                    let audit = batch_start + j == audit_index;
                    scope.spawn(move || measure_file(path, adapter, audit))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (j, result) in results.into_iter().enumerate() {
            match result {
                Ok(stat) => stats[batch_start + j] = Some(stat),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        if first_error.is_some() {
            break;
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    EntropyReport::from_table(
        adapter.name(),
        stats.into_iter().map(|s| s.unwrap()).collect(),
    )
}

fn measure_file(path: &Path, adapter: &CompressorAdapter, audit: bool) -> Result<FileStat, EseError> {
    let data = fs::read(path).map_err(|e| EseError::io(path, e))?;
    if data.is_empty() {
        return Err(EseError::InvalidParameter(format!(
            "corpus file {} is empty",
            path.display()
        )));
    }
    let compressed = adapter.compress(&data, path)?;
    if audit {
        let restored = adapter.decompress(&compressed, path)?;
        if restored != data {
            return Err(EseError::Compressor {
                name: adapter.name().into(),
                file: path.to_path_buf(),
                reason: "losslessness audit failed: decompression does not restore the input"
                    .into(),
            });
        }
    }
    Ok(FileStat {
        bytes: data.len() as u64,
        compressed_bytes: compressed.len() as u64,
        ratio: compressed.len() as f64 / data.len() as f64,
        path: path.to_path_buf(),
    })
}

/// Key parameters for a payload whose entropy ratio comes from a corpus
/// report. `data_ratio` is the compression ratio of the payload's own
/// storage format (1.0 for raw data): `t = payload_bits * heuristic /
/// data_ratio`, matching the chunk planner's convention.
pub fn recommend_key_params(
    report: &EntropyReport,
    payload_bits: u64,
    data_ratio: f64,
    eps_exp: u32,
) -> Result<EseParams, EseError> {
    if !(data_ratio > 0.0 && data_ratio <= 1.0) {
        return Err(EseError::InvalidParameter(format!(
            "data ratio must be in (0, 1], got {data_ratio}"
        )));
    }
    if report.heuristic_ratio > data_ratio {
        return Err(EseError::InvalidEstimate {
            entropy_ratio: report.heuristic_ratio,
            data_ratio,
        });
    }
    let t = ((payload_bits as f64) * report.heuristic_ratio / data_ratio).round() as u64;
    EseParams::derive(payload_bits, t.min(payload_bits), eps_exp)
}

/// Whole-file mode: the payload is `n` bits in its standard format and the
/// best compressor got it down to `entropy_bits`; the key length is
/// essentially the gap plus the 2^-eps security term.
pub fn recommend_whole_file(
    payload_bits: u64,
    entropy_bits: u64,
    eps_exp: u32,
) -> Result<EseParams, EseError> {
    if entropy_bits > payload_bits {
        return Err(EseError::EstimateExceedsPayload {
            t: entropy_bits,
            n: payload_bits,
        });
    }
    let (ell, otp) = key_length(payload_bits, entropy_bits, eps_exp)?;
    Ok(EseParams {
        n: payload_bits,
        t: entropy_bits,
        eps_exp,
        ell,
        otp_fallback: otp,
    })
}
