//! Flexible-degree irreducible moduli and sparse modular reduction.
//!
//! Moduli are trinomials or pentanomials over GF(2), found by search and
//! verified with the Rabin squaring-and-GCD criterion. Reduction replaces
//! every bit at position `>= n` by XORs at positions shifted down by
//! `n - e` for each non-leading exponent `e` of the modulus, iterating
//! until the degree drops below `n`.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use crate::bitpoly::{highest_set_bit, BitPolynomial};
use crate::error::EseError;

/// An irreducible modulus of degree `n`, stored as its exponent list.
///
/// The list is strictly descending, starts with `n` and ends with `0`,
/// and has odd length (an even-weight binary polynomial is divisible by
/// `x + 1`). Instances produced by [`find_irreducible`] have 3 or 5 terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIrreducible {
    degree: usize,
    exponents: Vec<usize>,
}

impl SparseIrreducible {
    /// Wraps an exponent list after validating shape and irreducibility.
    pub fn new(exponents: Vec<usize>) -> Result<Self, EseError> {
        if exponents.len() < 3
            || exponents.len() % 2 == 0
            || *exponents.last().unwrap() != 0
            || !exponents.windows(2).all(|w| w[0] > w[1])
        {
            return Err(EseError::InvalidParameter(format!(
                "malformed modulus exponent list {exponents:?}"
            )));
        }
        let degree = exponents[0];
        let poly = BitPolynomial::from_exponents(&exponents);
        if !is_irreducible(&poly) {
            return Err(EseError::InvalidParameter(format!(
                "modulus of degree {degree} is reducible"
            )));
        }
        Ok(SparseIrreducible { degree, exponents })
    }

    /// Wraps an exponent list whose irreducibility was already verified
    /// (e.g. a duplicate of a modulus checked earlier in the same
    /// container). Shape must still hold; debug builds assert it.
    pub fn new_unchecked(exponents: Vec<usize>) -> Self {
        debug_assert!(exponents.len() >= 3 && exponents.len() % 2 == 1);
        debug_assert!(exponents.windows(2).all(|w| w[0] > w[1]));
        debug_assert_eq!(*exponents.last().unwrap(), 0);
        SparseIrreducible {
            degree: exponents[0],
            exponents,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Exponents in strictly descending order, including `degree` and 0.
    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn to_poly(&self) -> BitPolynomial {
        BitPolynomial::from_exponents(&self.exponents)
    }

    /// Fold distances `n - e` for each non-leading exponent `e`.
    fn shifts(&self) -> Vec<usize> {
        self.exponents[1..]
            .iter()
            .map(|&e| self.degree - e)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

/// Remainder of `r` modulo `f`; the result has degree `< f.degree()` and
/// capacity exactly `f.degree()` bits.
pub fn reduce(r: &BitPolynomial, f: &SparseIrreducible) -> BitPolynomial {
    let n = f.degree;
    let mut words = r.words().to_vec();
    words.resize(words.len().max(n.div_ceil(64)), 0);
    fold_reduce(&mut words, n, &f.shifts());
    words.truncate(n.div_ceil(64));
    BitPolynomial::from_words(words, n)
}

/// Parallel variant of [`reduce`]; bit-identical for any worker count.
///
/// The high-order region is partitioned into disjoint word spans. Each
/// worker folds its span once into a local accumulator; accumulators are
/// XOR-merged in span order and a bounded sequential pass clears whatever
/// overflow the single fold left above `n`.
pub fn reduce_parallel(r: &BitPolynomial, f: &SparseIrreducible, workers: usize) -> BitPolynomial {
    let n = f.degree;
    let n_word = n / 64;
    let len = r.words().len();
    // Not enough high-order words to be worth fanning out.
    if workers <= 1 || len <= n_word + 2 * workers {
        return reduce(r, f);
    }
    let shifts = f.shifts();
    let s_min = *shifts.iter().min().unwrap();
    let mut words = r.words().to_vec();

    let high_words = len - n_word;
    let per_span = high_words.div_ceil(workers);
    let spans: Vec<(usize, usize)> = (0..workers)
        .map(|w| {
            (
                n_word + w * per_span,
                (n_word + (w + 1) * per_span).min(len),
            )
        })
        .filter(|(s, e)| s < e)
        .collect();

    let locals: Vec<(isize, Vec<u64>)> = std::thread::scope(|scope| {
        let words_ref = &words;
        let shifts_ref = &shifts;
        let handles: Vec<_> = spans
            .iter()
            .map(|&(lo, hi)| {
                scope.spawn(move || {
                    // Targets for word w lie in [w*64 - n, w*64 + 64 - s_min).
                    let base_bit = lo as isize * 64 - n as isize;
                    let span_bits = (hi - lo) * 64 + (n - s_min) + 128;
                    let mut local = vec![0u64; span_bits.div_ceil(64)];
                    for w in lo..hi {
                        let word_base = w * 64;
                        let keep = if word_base >= n {
                            !0u64
                        } else {
                            !0u64 << (n - word_base)
                        };
                        let chunk = words_ref[w] & keep;
                        if chunk == 0 {
                            continue;
                        }
                        for &s in shifts_ref {
                            // (w - lo)*64 + (n - s) >= 0 since s <= n.
                            let off = word_base as isize - s as isize - base_bit;
                            xor_u64_at(&mut local, chunk, off as usize);
                        }
                    }
                    (base_bit, local)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    // Clear the folded high region, then merge the accumulators.
    for w in n_word..len {
        let word_base = w * 64;
        words[w] &= if word_base >= n {
            0
        } else {
            !(!0u64 << (n - word_base))
        };
    }
    for (base_bit, local) in locals {
        xor_words_signed(&mut words, &local, base_bit);
    }
    // Residual overflow from near-boundary folds; bounded by one span.
    fold_reduce(&mut words, n, &shifts);
    words.truncate(n.div_ceil(64));
    BitPolynomial::from_words(words, n)
}

/// In-place folding reduction over raw words. `shifts` are the fold
/// distances `n - e`; the loop processes high bits top-down in word-aligned
/// spans and repeats until no bit at position `>= n` remains.
fn fold_reduce(words: &mut [u64], n: usize, shifts: &[usize]) {
    let n_word = n / 64;
    loop {
        let Some(d) = highest_set_bit(words) else {
            return;
        };
        if d < n {
            return;
        }
        for w in (n_word..=d / 64).rev() {
            let word_base = w * 64;
            let keep = if word_base >= n {
                !0u64
            } else {
                !0u64 << (n - word_base)
            };
            let chunk = words[w] & keep;
            if chunk == 0 {
                continue;
            }
            words[w] ^= chunk;
            for &s in shifts {
                xor_u64_signed(words, chunk, word_base as isize - s as isize);
            }
        }
    }
}

/// XORs a single word at a non-negative bit offset.
fn xor_u64_at(words: &mut [u64], chunk: u64, off: usize) {
    let w = off / 64;
    let b = off % 64;
    words[w] ^= chunk << b;
    if b != 0 {
        let hi = chunk >> (64 - b);
        if hi != 0 {
            words[w + 1] ^= hi;
        }
    }
}

/// XORs a single word at a possibly negative bit offset; bits that would
/// land below zero must be zero in `chunk`.
fn xor_u64_signed(words: &mut [u64], chunk: u64, off: isize) {
    if off >= 0 {
        xor_u64_at(words, chunk, off as usize);
    } else {
        let sh = (-off) as usize;
        debug_assert!(sh < 64 && chunk.trailing_zeros() as usize >= sh);
        words[0] ^= chunk >> sh;
    }
}

/// XORs a word slice at a possibly negative bit offset; bits below zero
/// and beyond `dst` must be zero in `src`.
fn xor_words_signed(dst: &mut [u64], src: &[u64], base: isize) {
    for (i, &w) in src.iter().enumerate() {
        if w != 0 {
            xor_u64_signed_checked(dst, w, base + i as isize * 64);
        }
    }
}

fn xor_u64_signed_checked(dst: &mut [u64], chunk: u64, off: isize) {
    if off >= 0 {
        let w = (off / 64) as usize;
        let b = (off % 64) as usize;
        debug_assert!(w < dst.len() || chunk << b == 0);
        if w < dst.len() {
            dst[w] ^= chunk << b;
        }
        if b != 0 {
            let hi = chunk >> (64 - b);
            if hi != 0 {
                dst[w + 1] ^= hi;
            }
        }
    } else {
        xor_u64_signed(dst, chunk, off);
    }
}

// ---------------------------------------------------------------------------
// Irreducibility
// ---------------------------------------------------------------------------

/// Rabin irreducibility criterion over GF(2): `f` of degree `n` is
/// irreducible iff `x^(2^n) = x (mod f)` and for every prime `d | n`,
/// `gcd(x^(2^(n/d)) - x, f) = 1`.
pub fn is_irreducible(f: &BitPolynomial) -> bool {
    let Some(n) = f.degree() else {
        return false;
    };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    if !f.coeff(0) {
        return false; // divisible by x
    }
    let exponents: Vec<usize> = (0..=n).rev().filter(|&i| f.coeff(i)).collect();
    let shifts: Vec<usize> = exponents[1..].iter().map(|&e| n - e).collect();
    rabin_test(n, &shifts, f.words())
}

fn rabin_test(n: usize, shifts: &[usize], f_words: &[u64]) -> bool {
    let n_words = n.div_ceil(64);
    let checkpoints: Vec<usize> = prime_divisors(n).into_iter().map(|d| n / d).collect();

    // h = x
    let mut h = vec![0u64; n_words];
    h[0] = 2;
    let mut sq = vec![0u64; 2 * n_words];
    for i in 1..=n {
        square_into(&h, &mut sq);
        fold_reduce(&mut sq, n, shifts);
        h.copy_from_slice(&sq[..n_words]);
        if checkpoints.contains(&i) {
            let mut g = h.clone();
            g[0] ^= 2; // h - x
            if highest_set_bit(&g).is_some() {
                let gcd = poly_gcd(g, f_words.to_vec());
                if highest_set_bit(&gcd) != Some(0) {
                    return false;
                }
            } else {
                // x^(2^(n/d)) = x means f has a factor of degree n/d.
                return false;
            }
        }
    }
    // x^(2^n) must equal x.
    h[0] ^= 2;
    highest_set_bit(&h).is_none()
}

/// Squares `src` by interleaving zero bits; `dst` must hold 2x the words
/// and is overwritten.
fn square_into(src: &[u64], dst: &mut [u64]) {
    debug_assert!(dst.len() >= 2 * src.len());
    for (i, &w) in src.iter().enumerate() {
        dst[2 * i] = spread(w as u32);
        dst[2 * i + 1] = spread((w >> 32) as u32);
    }
    for d in &mut dst[2 * src.len()..] {
        *d = 0;
    }
}

fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

/// GCD of two dense word polynomials by the Euclidean algorithm with
/// aligned XOR subtraction. Returns the (non-monic-normalisation-free)
/// gcd words; GF(2) polynomials need no scaling.
fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    loop {
        let Some(db) = highest_set_bit(&b) else {
            return a;
        };
        // a := a mod b
        while let Some(da) = highest_set_bit(&a) {
            if da < db {
                break;
            }
            xor_shifted_words(&mut a, &b, da - db, db);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// XORs `src` (significant up to bit `src_deg`) shifted left by `shift`
/// into `dst`; the caller guarantees the result fits.
fn xor_shifted_words(dst: &mut [u64], src: &[u64], shift: usize, src_deg: usize) {
    let word_off = shift / 64;
    let bit_off = shift % 64;
    let src_words = src_deg / 64 + 1;
    let mut carry = 0u64;
    for (i, &w) in src[..src_words].iter().enumerate() {
        if bit_off == 0 {
            dst[word_off + i] ^= w;
        } else {
            dst[word_off + i] ^= (w << bit_off) | carry;
            carry = w >> (64 - bit_off);
        }
    }
    if carry != 0 {
        dst[word_off + src_words] ^= carry;
    }
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

/// Degree cap for the small-factor sieve that pre-filters candidates
/// before the full Rabin test.
const SIEVE_MAX_DEG: usize = 13;

fn small_irreducibles() -> &'static Vec<u64> {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut irr: Vec<u64> = Vec::new();
        for d in 2..=SIEVE_MAX_DEG {
            // Odd constant term, top bit set; step 2 keeps bit 0. Even
            // weight means divisibility by x + 1.
            let lo = 1u64 << d;
            for m in (lo + 1..2 * lo).step_by(2) {
                if m.count_ones() % 2 == 0 {
                    continue;
                }
                if irr
                    .iter()
                    .take_while(|&&g| deg64(g) * 2 <= d)
                    .all(|&g| rem_u64(m, g) != 0)
                {
                    irr.push(m);
                }
            }
        }
        irr
    })
}

fn deg64(m: u64) -> usize {
    63 - m.leading_zeros() as usize
}

/// Remainder of `a` modulo `g` over GF(2), both single-word.
fn rem_u64(mut a: u64, g: u64) -> u64 {
    let dg = deg64(g);
    while a >> dg != 0 {
        a ^= g << (deg64(a) - dg);
    }
    a
}

/// Product of two residues modulo `g`, all single-word.
fn mulmod_u64(a: u64, b: u64, g: u64) -> u64 {
    let mut p = crate::bitpoly::clmul64(a, b);
    let dg = deg64(g) as u32;
    while p >> dg != 0 {
        let dp = 127 - p.leading_zeros();
        p ^= (g as u128) << (dp - dg);
    }
    p as u64
}

fn powmod_x_u64(mut e: usize, g: u64) -> u64 {
    // x^e mod g by square-and-multiply.
    let mut base = rem_u64(2, g);
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_u64(acc, base, g);
        }
        base = mulmod_u64(base, base, g);
        e >>= 1;
    }
    acc
}

/// Multiplies a residue by x modulo `g`.
fn mulx_u64(a: u64, g: u64) -> u64 {
    let shifted = a << 1;
    if shifted >> deg64(g) != 0 {
        shifted ^ g
    } else {
        shifted
    }
}

/// Incremental sieve state: residues of `x^n` and of a sliding `x^j`
/// modulo every small irreducible.
struct Sieve {
    polys: &'static [u64],
    xn: Vec<u64>,
}

impl Sieve {
    fn new(n: usize) -> Self {
        let polys: &[u64] = small_irreducibles();
        // Factors larger than n cannot divide a degree-n polynomial; for
        // tiny n the Rabin test alone is cheap anyway.
        let cutoff = polys.partition_point(|&g| deg64(g) <= n / 2);
        let polys = &polys[..cutoff];
        let xn = polys.iter().map(|&g| powmod_x_u64(n, g)).collect();
        Sieve { polys, xn }
    }
}

/// Finds the sparsest small-exponent irreducible of degree exactly `n`:
/// the trinomial `x^n + x^a + 1` with smallest `a` if one exists, else the
/// pentanomial `x^n + x^a + x^b + x^c + 1` with lexicographically smallest
/// `(a, b, c)`. Results are cached per degree; repeated calls return the
/// identical exponent list.
pub fn find_irreducible(n: usize) -> Result<SparseIrreducible, EseError> {
    if n < 2 {
        return Err(EseError::InvalidParameter(format!(
            "modulus degree must be at least 2, got {n}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, SparseIrreducible>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let found = search_irreducible(n)?;
    cache.lock().unwrap().insert(n, found.clone());
    Ok(found)
}

fn search_irreducible(n: usize) -> Result<SparseIrreducible, EseError> {
    let sieve = Sieve::new(n);
    let ng = sieve.polys.len();

    let candidate_passes = |mid_residues: &[&[u64]], exps: &[usize]| -> bool {
        for gi in 0..ng {
            let mut r = sieve.xn[gi] ^ 1;
            for m in mid_residues {
                r ^= m[gi];
            }
            if r == 0 {
                return false;
            }
        }
        let mut full = vec![n];
        full.extend_from_slice(exps);
        full.push(0);
        let poly = BitPolynomial::from_exponents(&full);
        is_irreducible(&poly)
    };

    // Trinomials, smallest a first.
    let mut xa: Vec<u64> = sieve.polys.iter().map(|&g| rem_u64(2, g)).collect(); // x^1
    for a in 1..n {
        if candidate_passes(&[&xa], &[a]) {
            return SparseIrreducible::new(vec![n, a, 0]);
        }
        for (gi, &g) in sieve.polys.iter().enumerate() {
            xa[gi] = mulx_u64(xa[gi], g);
        }
    }

    // Pentanomials, lexicographically smallest (a, b, c).
    let x1: Vec<u64> = sieve.polys.iter().map(|&g| rem_u64(2, g)).collect();
    let mut xa = x1.clone();
    for a in 1..n.saturating_sub(2) {
        let mut xb = xa.clone();
        for (gi, &g) in sieve.polys.iter().enumerate() {
            xb[gi] = mulx_u64(xb[gi], g);
        }
        for b in a + 1..n - 1 {
            let mut xc = xb.clone();
            for (gi, &g) in sieve.polys.iter().enumerate() {
                xc[gi] = mulx_u64(xc[gi], g);
            }
            for c in b + 1..n {
                if candidate_passes(&[&xa, &xb, &xc], &[c, b, a]) {
                    return SparseIrreducible::new(vec![n, c, b, a, 0]);
                }
                for (gi, &g) in sieve.polys.iter().enumerate() {
                    xc[gi] = mulx_u64(xc[gi], g);
                }
            }
            for (gi, &g) in sieve.polys.iter().enumerate() {
                xb[gi] = mulx_u64(xb[gi], g);
            }
        }
        for (gi, &g) in sieve.polys.iter().enumerate() {
            xa[gi] = mulx_u64(xa[gi], g);
        }
    }
    Err(EseError::NoSparseIrreducible { degree: n })
}

// ---------------------------------------------------------------------------
// On-disk modulus cache
// ---------------------------------------------------------------------------

/// File-backed cache of found moduli. One record per line: the decimal
/// degree, a colon, then the comma-separated exponent list descending,
/// e.g. `8:8,4,3,1,0`. Writes replace the file atomically.
pub struct ModulusCache {
    path: Option<PathBuf>,
    entries: HashMap<usize, SparseIrreducible>,
}

impl ModulusCache {
    /// In-memory cache without persistence.
    pub fn in_memory() -> Self {
        ModulusCache {
            path: None,
            entries: HashMap::new(),
        }
    }

    /// Opens (or prepares to create) a cache file.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, EseError> {
        let path = path.into();
        let mut entries = HashMap::new();
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    let (deg, exps) = line.split_once(':').ok_or_else(|| {
                        EseError::InvalidParameter(format!("bad cache line: {line}"))
                    })?;
                    let degree: usize = deg.trim().parse().map_err(|_| {
                        EseError::InvalidParameter(format!("bad cache degree: {line}"))
                    })?;
                    let exponents: Vec<usize> = exps
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| {
                            EseError::InvalidParameter(format!("bad cache exponents: {line}"))
                        })?;
                    let modulus = SparseIrreducible::new(exponents)?;
                    if modulus.degree() != degree {
                        return Err(EseError::InvalidParameter(format!(
                            "cache degree mismatch: {line}"
                        )));
                    }
                    entries.insert(degree, modulus);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(EseError::io(&path, e)),
        }
        Ok(ModulusCache {
            path: Some(path),
            entries,
        })
    }

    /// Returns the cached modulus for degree `n`, searching (and
    /// persisting) on a miss.
    pub fn get_or_find(&mut self, n: usize) -> Result<SparseIrreducible, EseError> {
        if let Some(hit) = self.entries.get(&n) {
            return Ok(hit.clone());
        }
        let found = find_irreducible(n)?;
        self.entries.insert(n, found.clone());
        self.persist()?;
        Ok(found)
    }

    pub fn insert(&mut self, modulus: SparseIrreducible) -> Result<(), EseError> {
        self.entries.insert(modulus.degree(), modulus);
        self.persist()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.entries.contains_key(&n)
    }

    /// Single-writer atomic rewrite: temp file in the same directory, then
    /// rename over the target.
    fn persist(&self) -> Result<(), EseError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut degrees: Vec<&usize> = self.entries.keys().collect();
        degrees.sort();
        let tmp = path.with_extension("tmp");
        let mut file = std::fs::File::create(&tmp).map_err(|e| EseError::io(&tmp, e))?;
        for d in degrees {
            let exps: Vec<String> = self.entries[d]
                .exponents()
                .iter()
                .map(|e| e.to_string())
                .collect();
            writeln!(file, "{}:{}", d, exps.join(",")).map_err(|e| EseError::io(&tmp, e))?;
        }
        file.sync_all().map_err(|e| EseError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| EseError::io(path, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    /// Long-division remainder oracle, independent of the folding path.
    pub fn long_division_rem(r: &BitPolynomial, f: &BitPolynomial) -> BitPolynomial {
        let df = f.degree().unwrap();
        let mut words = r.words().to_vec();
        while let Some(d) = highest_set_bit(&words) {
            if d < df {
                break;
            }
            xor_shifted_words(&mut words, f.words(), d - df, df);
        }
        words.resize(df.div_ceil(64).max(1), 0);
        BitPolynomial::from_words(words, df.max(1))
    }

    #[test]
    fn degree2_and_3() {
        let f2 = find_irreducible(2).unwrap();
        assert_eq!(f2.exponents(), &[2, 1, 0]);
        let f3 = find_irreducible(3).unwrap();
        assert_eq!(f3.exponents(), &[3, 1, 0]);
    }

    #[test]
    fn degree8_is_pentanomial() {
        // No irreducible trinomial of degree 8 exists (8 = 0 mod 8).
        let f8 = find_irreducible(8).unwrap();
        assert_eq!(f8.exponents().len(), 5);
        assert!(is_irreducible(&f8.to_poly()));
    }

    #[test]
    fn find_is_idempotent() {
        let a = find_irreducible(57).unwrap();
        let b = find_irreducible(57).unwrap();
        assert_eq!(a.exponents(), b.exponents());
    }

    #[test]
    fn irreducibility_examples() {
        // x^2 + 1 = (x+1)^2
        assert!(!is_irreducible(&BitPolynomial::from_exponents(&[2, 0])));
        assert!(is_irreducible(&BitPolynomial::from_exponents(&[2, 1, 0])));
        assert!(is_irreducible(&BitPolynomial::from_exponents(&[1])));
        assert!(is_irreducible(&BitPolynomial::from_exponents(&[1, 0])));
    }

    #[test]
    fn reduce_examples() {
        let f = SparseIrreducible::new(vec![2, 1, 0]).unwrap();
        // deg r < n: unchanged
        let r = BitPolynomial::from_exponents(&[1]);
        assert_eq!(reduce(&r, &f), r);
        // r = f: zero
        assert!(reduce(&f.to_poly(), &f).is_zero());
        // x^2 mod (x^2+x+1) = x+1
        let x2 = BitPolynomial::from_exponents(&[2]);
        assert_eq!(reduce(&x2, &f), BitPolynomial::from_exponents(&[1, 0]));
    }

    #[test]
    fn reduce_matches_long_division() {
        let mut rng = testutil::rng(5);
        for _ in 0..30 {
            let n = 2 + testutil::below(&mut rng, 2000);
            let f = find_irreducible(n).unwrap();
            let len = n + 1 + testutil::below(&mut rng, 8000);
            let r = testutil::random_poly(&mut rng, len);
            let got = reduce(&r, &f);
            let want = long_division_rem(&r, &f.to_poly());
            assert_eq!(got, want, "n = {n}");
            assert!(got.degree().map_or(true, |d| d < n));
        }
    }

    #[test]
    fn reduce_is_linear() {
        let mut rng = testutil::rng(6);
        let f = find_irreducible(101).unwrap();
        for _ in 0..20 {
            let a = testutil::random_poly(&mut rng, 4096);
            let b = testutil::random_poly(&mut rng, 4096);
            assert_eq!(
                reduce(&a.add(&b), &f),
                reduce(&a, &f).add(&reduce(&b, &f))
            );
        }
    }

    #[test]
    fn parallel_reduce_matches() {
        let mut rng = testutil::rng(7);
        let f = find_irreducible(997).unwrap();
        let r = testutil::random_poly(&mut rng, 1 << 16);
        let want = reduce(&r, &f);
        for workers in [1, 2, 4, 8] {
            assert_eq!(reduce_parallel(&r, &f, workers), want);
        }
        // deg r < n passes through for any worker count
        let small = testutil::random_poly(&mut rng, 900);
        assert_eq!(reduce_parallel(&small, &f, 4), reduce(&small, &f));
    }

    #[test]
    fn cache_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("moduli.txt");
        {
            let mut cache = ModulusCache::open(&path).unwrap();
            cache.get_or_find(33).unwrap();
            cache.get_or_find(8).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().count() == 2);
        let mut reopened = ModulusCache::open(&path).unwrap();
        assert!(reopened.contains(33));
        assert_eq!(
            reopened.get_or_find(33).unwrap().exponents(),
            find_irreducible(33).unwrap().exponents()
        );
    }

    #[test]
    fn sparse_irreducible_rejects_bad_lists() {
        assert!(SparseIrreducible::new(vec![4, 1]).is_err()); // even weight
        assert!(SparseIrreducible::new(vec![4, 1, 1, 0]).is_err()); // not descending/odd
        assert!(SparseIrreducible::new(vec![2, 0]).is_err()); // reducible shape
    }
}
