//! Sieved arithmetic functions `r(n)` and `d(n)`, their primed summatory
//! functions, and shift-correlation sums.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, LabError, Result};
use crate::fit::{least_squares, FitReport};

/// Default ceiling on sieve size (two `u32` arrays of this length).
pub const DEFAULT_LIMIT_CAP: u64 = 50_000_000;

const BLOCK: usize = 64;
const CACHE_MAGIC: &[u8; 8] = b"LATLAB01";

/// Argument of a primed summatory function.
///
/// The half-term convention changes the value by `f(x)/2` at integers, so
/// integrality is carried explicitly instead of being inferred from a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Abscissa {
    Integer(u64),
    NonIntegral(f64),
}

impl Abscissa {
    /// Wraps a real known not to be an integer. Exactly integral values are
    /// rejected; use [`Abscissa::Integer`] for those.
    pub fn non_integral(x: f64) -> Result<Self> {
        if !x.is_finite() || x.fract() == 0.0 {
            return Err(LabError::Domain(format!(
                "{x} is integral or not finite; pass it as Abscissa::Integer"
            )));
        }
        Ok(Self::NonIntegral(x))
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Integer(n) => n as f64,
            Self::NonIntegral(x) => x,
        }
    }
}

/// `r(n)` and `d(n)` for `1 ≤ n ≤ limit`, with blocked prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveTable {
    limit: usize,
    r: Vec<u32>,
    d: Vec<u32>,
    // prefix sums at multiples of BLOCK: r_blocks[b] = Σ_{n < b·BLOCK} r(n)
    r_blocks: Vec<u64>,
    d_blocks: Vec<u64>,
}

impl SieveTable {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_cap(limit, DEFAULT_LIMIT_CAP)
    }

    pub fn build_with_cap(limit: u64, cap: u64) -> Result<Self> {
        if limit == 0 {
            return Err(out_of_range("N", 0.0, "N >= 1"));
        }
        if limit > cap || limit > u32::MAX as u64 - 1 {
            return Err(LabError::LimitExceedsCap {
                requested: limit,
                cap,
            });
        }
        let n = limit as usize;
        let d = divisor_counts(n);
        let r = representation_counts(n);
        Ok(Self::from_arrays(r, d))
    }

    /// `r` and `d` are indexed from 0; index 0 holds `r(1)`.
    fn from_arrays(r_vals: Vec<u32>, d_vals: Vec<u32>) -> Self {
        let limit = r_vals.len();
        let mut r = Vec::with_capacity(limit + 1);
        r.push(0);
        r.extend_from_slice(&r_vals);
        let mut d = Vec::with_capacity(limit + 1);
        d.push(0);
        d.extend_from_slice(&d_vals);
        let r_blocks = block_prefix(&r);
        let d_blocks = block_prefix(&d);
        Self {
            limit,
            r,
            d,
            r_blocks,
            d_blocks,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    /// `r(n)`, or 0 for `n = 0`. Panics past the limit.
    #[inline]
    pub fn r(&self, n: usize) -> u32 {
        self.r[n]
    }

    #[inline]
    pub fn d(&self, n: usize) -> u32 {
        self.d[n]
    }

    /// `r(1..=limit)`.
    pub fn r_values(&self) -> &[u32] {
        &self.r[1..]
    }

    pub fn d_values(&self) -> &[u32] {
        &self.d[1..]
    }

    /// Σ_{n≤k} r(n) for integer `k ≤ limit`.
    pub fn r_prefix(&self, k: usize) -> u64 {
        prefix(&self.r, &self.r_blocks, k)
    }

    pub fn d_prefix(&self, k: usize) -> u64 {
        prefix(&self.d, &self.d_blocks, k)
    }

    fn check(&self, x: Abscissa) -> Result<()> {
        let v = x.value();
        if !(v >= 0.0 && v <= self.limit as f64) {
            return Err(out_of_range("x", v, format!("[0, {}]", self.limit)));
        }
        Ok(())
    }

    /// Primed sum Σ′_{n≤x} r(n).
    pub fn summatory_r(&self, x: Abscissa) -> Result<f64> {
        self.check(x)?;
        Ok(primed(x, |k| self.r_prefix(k), |k| self.r[k]))
    }

    /// Primed sum Σ′_{n≤x} d(n).
    pub fn summatory_d(&self, x: Abscissa) -> Result<f64> {
        self.check(x)?;
        Ok(primed(x, |k| self.d_prefix(k), |k| self.d[k]))
    }

    /// Writes the cache file: magic, `N` as u64, then `r` and `d` as u32, all
    /// little-endian.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            w.write_all(CACHE_MAGIC)?;
            w.write_all(&(self.limit as u64).to_le_bytes())?;
            for v in self.r_values().iter().chain(self.d_values()) {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()?;
        }
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut rd = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        rd.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(LabError::Cache("bad magic".into()));
        }
        let mut n8 = [0u8; 8];
        rd.read_exact(&mut n8)?;
        let n = u64::from_le_bytes(n8);
        if n == 0 || n > DEFAULT_LIMIT_CAP {
            return Err(LabError::Cache(format!("implausible limit {n}")));
        }
        let n = n as usize;
        let mut bytes = vec![0u8; 8 * n];
        rd.read_exact(&mut bytes)?;
        let mut extra = [0u8; 1];
        if rd.read(&mut extra)? != 0 {
            return Err(LabError::Cache("trailing bytes".into()));
        }
        let words: Vec<u32> = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let (r, d) = words.split_at(n);
        Ok(Self::from_arrays(r.to_vec(), d.to_vec()))
    }

    /// Loads `sieve-N.bin` from `dir`, building and writing it on a miss.
    pub fn load_or_build(limit: u64, dir: &Path) -> Result<Self> {
        let path = cache_path(dir, limit);
        if path.exists() {
            if let Ok(t) = Self::read_cache(&path) {
                if t.limit() == limit {
                    return Ok(t);
                }
            }
        }
        let t = Self::build(limit)?;
        t.write_cache(&path)?;
        Ok(t)
    }
}

pub fn cache_path(dir: &Path, limit: u64) -> PathBuf {
    dir.join(format!("sieve-{limit}.bin"))
}

/// `LATLAB_CACHE_DIR`, else the platform cache directory.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os("LATLAB_CACHE_DIR") {
        return PathBuf::from(dir);
    }
    dirs::cache_dir()
        .unwrap_or_else(std::env::temp_dir)
        .join("latlab")
}

fn block_prefix(vals: &[u32]) -> Vec<u64> {
    let mut out = Vec::with_capacity(vals.len() / BLOCK + 2);
    let mut acc = 0u64;
    for (i, &v) in vals.iter().enumerate() {
        if i % BLOCK == 0 {
            out.push(acc);
        }
        acc += v as u64;
    }
    out
}

fn prefix(vals: &[u32], blocks: &[u64], k: usize) -> u64 {
    let b = k / BLOCK;
    let mut acc = blocks[b];
    for &v in &vals[b * BLOCK..=k] {
        acc += v as u64;
    }
    acc
}

fn primed(x: Abscissa, pre: impl Fn(usize) -> u64, val: impl Fn(usize) -> u32) -> f64 {
    match x {
        Abscissa::Integer(0) => 0.0,
        Abscissa::Integer(k) => {
            let k = k as usize;
            pre(k - 1) as f64 + 0.5 * val(k) as f64
        }
        Abscissa::NonIntegral(v) => pre(v.floor() as usize) as f64,
    }
}

/// `d(n)` for `n = 1..=limit` by incrementing multiples.
fn divisor_counts(limit: usize) -> Vec<u32> {
    let mut d = vec![0u32; limit];
    for k in 1..=limit {
        let mut m = k;
        while m <= limit {
            d[m - 1] += 1;
            m += k;
        }
    }
    d
}

/// `r(n) = 4 Π_{p≡1(4)} (e_p + 1)` when every `p ≡ 3 (4)` appears to an even
/// power, else 0. Multiplicative evaluation over a smallest-prime-factor table.
fn representation_counts(limit: usize) -> Vec<u32> {
    let spf = smallest_prime_factors(limit);
    // f(n) = r(n)/4; exps[n] = exponent of spf(n) in n; rest[n] = n / spf(n)^e
    let mut f = vec![0u32; limit + 1];
    let mut exps = vec![0u8; limit + 1];
    let mut rest = vec![0u32; limit + 1];
    if limit >= 1 {
        f[1] = 1;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let m = n / p;
        if m > 1 && spf[m] as usize == p {
            exps[n] = exps[m] + 1;
            rest[n] = rest[m];
        } else {
            exps[n] = 1;
            rest[n] = m as u32;
        }
        let e = exps[n] as u32;
        let local = match p % 4 {
            1 => e + 1,
            3 => u32::from(e % 2 == 0),
            _ => 1,
        };
        f[n] = f[rest[n] as usize] * local;
    }
    f[1..].iter().map(|v| 4 * v).collect()
}

fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > limit {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

/// Outcome of a shift-correlation computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub x: f64,
    pub h: u64,
    pub exact_sum: f64,
    pub main_term: f64,
    /// `exact_sum − main_term`.
    pub residual: f64,
    /// Set when `h > √x`, outside the range where the main term is asserted.
    pub outside_uniform_range: bool,
}

impl CorrelationResult {
    fn new(x: f64, h: u64, exact: u128, main_term: f64) -> Self {
        let exact_sum = exact as f64;
        Self {
            x,
            h,
            exact_sum,
            main_term,
            residual: exact_sum - main_term,
            outside_uniform_range: (h as f64) > x.sqrt(),
        }
    }
}

fn correlation_bounds(x: f64, h: u64, table: &SieveTable) -> Result<usize> {
    if h == 0 {
        return Err(out_of_range("h", 0.0, "h >= 1"));
    }
    if !(x >= 1.0) || x + h as f64 > table.limit as f64 {
        return Err(out_of_range(
            "x + h",
            x + h as f64,
            format!("x >= 1 and x + h <= {}", table.limit),
        ));
    }
    Ok(x.floor() as usize)
}

/// Σ_{d|h} (−1)^d d.
pub fn signed_divisor_sum(h: u64) -> i64 {
    divisors(h)
        .into_iter()
        .map(|d| if d % 2 == 0 { d as i64 } else { -(d as i64) })
        .sum()
}

/// Σ_{d|h} (log d)^j / d.
pub fn log_divisor_sum(h: u64, j: u32) -> f64 {
    divisors(h)
        .into_iter()
        .map(|d| (d as f64).ln().powi(j as i32) / d as f64)
        .sum()
}

pub fn divisors(h: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= h {
        if h % d == 0 {
            small.push(d);
            if d * d != h {
                large.push(h / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Σ_{n≤x} r(n) r(n+h) against `(−1)^h (8x/h) Σ_{d|h} (−1)^d d`.
pub fn correlation_r(x: f64, h: u64, table: &SieveTable) -> Result<CorrelationResult> {
    let top = correlation_bounds(x, h, table)?;
    let h_us = h as usize;
    let exact: u128 = (1..=top)
        .map(|n| table.r(n) as u128 * table.r(n + h_us) as u128)
        .sum();
    let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
    let main = sign * 8.0 * x / h as f64 * signed_divisor_sum(h) as f64;
    Ok(CorrelationResult::new(x, h, exact, main))
}

/// Coefficients `c_ij` of the divisor-correlation main term
/// `x Σ_i (log x)^i Σ_j c_ij Σ_{d|h} (log d)^j / d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotohashiCoefficients {
    /// `c[i][j]`.
    pub c: [[f64; 3]; 3],
    /// `true` for coefficients that are fixed constants rather than fit outputs.
    pub fixed: [[bool; 3]; 3],
}

impl MotohashiCoefficients {
    pub const C20: f64 = 6.0 / (PI * PI);

    /// Only the three fixed coefficients; the fitted ones are zero.
    pub fn fixed_only() -> Self {
        let mut c = [[0.0; 3]; 3];
        c[2][0] = Self::C20;
        let mut fixed = [[false; 3]; 3];
        fixed[2] = [true; 3];
        Self { c, fixed }
    }

    pub fn main_term(&self, x: f64, h: u64) -> f64 {
        let l = x.ln();
        let s: Vec<f64> = (0..3).map(|j| log_divisor_sum(h, j)).collect();
        let mut acc = 0.0;
        for i in 0..3 {
            let inner: f64 = (0..3).map(|j| self.c[i][j] * s[j]).sum();
            acc += l.powi(i as i32) * inner;
        }
        x * acc
    }

    /// Least-squares calibration of the six free coefficients from exact
    /// correlation sums over every `(x, h)` pair of the grid.
    pub fn calibrate(table: &SieveTable, xs: &[f64], hs: &[u64]) -> Result<(Self, FitReport)> {
        let mut pts = Vec::new();
        let mut ys = Vec::new();
        for &x in xs {
            for &h in hs {
                let top = correlation_bounds(x, h, table)?;
                let exact = correlation_exact_d(top, h, table) as f64;
                let l = x.ln();
                let s0 = log_divisor_sum(h, 0);
                ys.push(exact / x - Self::C20 * l * l * s0);
                pts.push((x, h));
            }
        }
        // basis: L·S0, L·S1, L·S2, S0, S1, S2 (c10 c11 c12 c00 c01 c02)
        let idx: Vec<f64> = (0..pts.len()).map(|i| i as f64).collect();
        let basis = |g: f64| {
            let (x, h) = pts[g as usize];
            let l = x.ln();
            let s: Vec<f64> = (0..3).map(|j| log_divisor_sum(h, j)).collect();
            vec![l * s[0], l * s[1], l * s[2], s[0], s[1], s[2]]
        };
        let mut fit = least_squares(
            "x·Σ_i log^i x Σ_j c_ij Σ_{d|h} log^j d / d, c20 = 6/π², c21 = c22 = 0",
            &idx,
            &ys,
            &[None; 6],
            basis,
        )?;
        fit.grid = xs.to_vec();
        let mut out = Self::fixed_only();
        out.c[1] = [fit.coefficients[0], fit.coefficients[1], fit.coefficients[2]];
        out.c[0] = [fit.coefficients[3], fit.coefficients[4], fit.coefficients[5]];
        Ok((out, fit))
    }
}

fn correlation_exact_d(top: usize, h: u64, table: &SieveTable) -> u128 {
    let h_us = h as usize;
    (1..=top)
        .map(|n| table.d(n) as u128 * table.d(n + h_us) as u128)
        .sum()
}

/// Σ_{n≤x} d(n) d(n+h) against the `c_ij` main term.
pub fn correlation_d(
    x: f64,
    h: u64,
    table: &SieveTable,
    coeffs: &MotohashiCoefficients,
) -> Result<CorrelationResult> {
    let top = correlation_bounds(x, h, table)?;
    let exact = correlation_exact_d(top, h, table);
    Ok(CorrelationResult::new(x, h, exact, coeffs.main_term(x, h)))
}

/// Unconstrained fit of `Σ_{n≤x} d(n)d(n+h) / x` to `c2 log²x + c1 log x + c0`
/// over `xs`; `coefficients[0]` estimates `c20 · Σ_{d|h} 1/d`.
pub fn fit_correlation_leading(table: &SieveTable, xs: &[f64], h: u64) -> Result<FitReport> {
    let mut ys = Vec::with_capacity(xs.len());
    for &x in xs {
        let top = correlation_bounds(x, h, table)?;
        ys.push(correlation_exact_d(top, h, table) as f64 / x);
    }
    least_squares(
        format!("Σ d(n)d(n+{h}) / x = c2 log²x + c1 log x + c0"),
        xs,
        &ys,
        &[None; 3],
        crate::fit::log_power_basis(2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_count(n: i64) -> u32 {
        let b = (n as f64).sqrt() as i64 + 1;
        let mut c = 0;
        for a in -b..=b {
            for bb in -b..=b {
                if a * a + bb * bb == n {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn small_tables() {
        let t = SieveTable::build(6).unwrap();
        assert_eq!(t.r_values(), &[4, 4, 0, 4, 8, 0]);
        assert_eq!(t.d_values(), &[1, 2, 2, 3, 2, 4]);
        let t1 = SieveTable::build(1).unwrap();
        assert_eq!(t1.r_values(), &[4]);
        assert_eq!(t1.d_values(), &[1]);
        for p in [2, 3, 5] {
            assert_eq!(t.d(p), 2);
        }
    }

    #[test]
    fn r_matches_lattice_enumeration() {
        let t = SieveTable::build(2000).unwrap();
        for n in 1..=2000 {
            assert_eq!(t.r(n), lattice_count(n as i64), "n={n}");
            assert_eq!(t.r(n) % 4, 0);
        }
    }

    #[test]
    fn cap_and_zero_limits() {
        assert!(matches!(
            SieveTable::build_with_cap(1000, 999),
            Err(LabError::LimitExceedsCap { .. })
        ));
        assert!(SieveTable::build(0).is_err());
    }

    #[test]
    fn summatory_examples() {
        let t = SieveTable::build(10).unwrap();
        assert_eq!(t.summatory_r(Abscissa::NonIntegral(0.5)).unwrap(), 0.0);
        assert_eq!(t.summatory_r(Abscissa::Integer(1)).unwrap(), 2.0);
        assert_eq!(t.summatory_r(Abscissa::NonIntegral(2.5)).unwrap(), 8.0);
        assert_eq!(t.summatory_d(Abscissa::NonIntegral(0.5)).unwrap(), 0.0);
        assert_eq!(t.summatory_d(Abscissa::Integer(3)).unwrap(), 4.0);
        assert_eq!(t.summatory_d(Abscissa::NonIntegral(6.9)).unwrap(), 14.0);
        assert!(t.summatory_d(Abscissa::NonIntegral(10.5)).is_err());
        assert!(t.summatory_d(Abscissa::Integer(11)).is_err());
        assert!(Abscissa::non_integral(3.0).is_err());
    }

    #[test]
    fn integer_value_is_midpoint_of_limits() {
        let t = SieveTable::build(300).unwrap();
        for k in 1..299u64 {
            let mid = t.summatory_r(Abscissa::Integer(k)).unwrap();
            let left = t.summatory_r(Abscissa::NonIntegral(k as f64 - 0.5)).unwrap();
            let right = t.summatory_r(Abscissa::NonIntegral(k as f64 + 0.5)).unwrap();
            assert_eq!(mid, 0.5 * (left + right));
        }
    }

    #[test]
    fn prefix_sums_cross_block_boundaries() {
        let t = SieveTable::build(500).unwrap();
        let mut acc = 0u64;
        for k in 1..=500 {
            acc += t.d(k) as u64;
            assert_eq!(t.d_prefix(k), acc);
        }
    }

    #[test]
    fn divisor_helpers() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(signed_divisor_sum(1), -1);
        assert_eq!(signed_divisor_sum(2), 1);
        assert_eq!(log_divisor_sum(1, 1), 0.0);
        assert_eq!(log_divisor_sum(1, 2), 0.0);
        assert!((log_divisor_sum(2, 0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn correlation_main_terms() {
        let t = SieveTable::build(2000).unwrap();
        let c1 = correlation_r(1000.0, 1, &t).unwrap();
        assert_eq!(c1.main_term, 8000.0);
        let c2 = correlation_r(1000.0, 2, &t).unwrap();
        assert_eq!(c2.main_term, 4000.0);
        assert_eq!(c2.residual, c2.exact_sum - c2.main_term);
        let brute: u64 = (1..=1000).map(|n| (t.r(n) * t.r(n + 2)) as u64).sum();
        assert_eq!(c2.exact_sum, brute as f64);
        let far = correlation_r(100.0, 20, &t).unwrap();
        assert!(far.outside_uniform_range);
        assert!(correlation_r(1999.0, 5, &t).is_err());
    }

    #[test]
    fn fixed_motohashi_main_term_at_h1() {
        let c = MotohashiCoefficients::fixed_only();
        let x: f64 = 1e4;
        let want = x * c.c[2][0] * x.ln().powi(2);
        assert!((c.main_term(x, 1) - want).abs() < 1e-9 * want);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = SieveTable::build(1234).unwrap();
        let path = dir.path().join("s.bin");
        t.write_cache(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], b"LATLAB01");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 1234);
        assert_eq!(bytes.len(), 16 + 8 * 1234);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 4);
        assert_eq!(SieveTable::read_cache(&path).unwrap(), t);
        let again = SieveTable::load_or_build(1234, dir.path()).unwrap();
        assert_eq!(again, t);
        std::fs::write(&path, b"NOTMAGIC").unwrap();
        assert!(SieveTable::read_cache(&path).is_err());
    }
}
