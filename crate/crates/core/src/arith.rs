//! Smallest-prime-factor sieve and the Vaughan decomposition of `Lambda`.

use rayon::prelude::*;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Default cap on sieve entries (4 bytes each).
pub const DEFAULT_SIEVE_BUDGET: u64 = 1 << 27;
/// Environment variable naming the sieve cache directory.
pub const CACHE_DIR_ENV: &str = "REVPRIME_CACHE_DIR";

const CACHE_MAGIC: &[u8; 8] = b"RVPSPF\0\0";
const CACHE_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeTable {
    /// Sieve `[0, limit]` single-threaded.
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with(limit, DEFAULT_SIEVE_BUDGET, false)
    }

    /// Sieve with an explicit entry budget; `parallel` splits the range into
    /// segments that are marked independently. The table is identical either
    /// way.
    pub fn build_with(limit: u64, budget: u64, parallel: bool) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Precondition(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit + 1 > budget || limit > u32::MAX as u64 {
            return Err(Error::SieveBudget { limit, budget });
        }
        let n = limit as usize + 1;
        let root = (limit as f64).sqrt() as usize + 1;
        let small = simple_spf(root.min(limit as usize));
        let base_primes: Vec<u32> = (2..small.len())
            .filter(|&p| small[p] == p as u32)
            .map(|p| p as u32)
            .collect();
        let mut spf = vec![0u32; n];
        let mark = |offset: usize, seg: &mut [u32]| {
            let end = offset + seg.len();
            for &p in &base_primes {
                let p = p as usize;
                if p * p >= end {
                    break;
                }
                let mut m = (p * p).max(offset.div_ceil(p) * p);
                while m < end {
                    if seg[m - offset] == 0 {
                        seg[m - offset] = p as u32;
                    }
                    m += p;
                }
            }
            for (k, v) in seg.iter_mut().enumerate() {
                if *v == 0 && offset + k >= 2 {
                    *v = (offset + k) as u32;
                }
            }
        };
        const SEGMENT: usize = 1 << 16;
        if parallel {
            spf.par_chunks_mut(SEGMENT)
                .enumerate()
                .for_each(|(c, seg)| mark(c * SEGMENT, seg));
        } else {
            spf.chunks_mut(SEGMENT)
                .enumerate()
                .for_each(|(c, seg)| mark(c * SEGMENT, seg));
        }
        let primes = (2..n)
            .filter(|&k| spf[k] == k as u32)
            .map(|k| k as u32)
            .collect();
        Ok(PrimeTable { limit, spf, primes })
    }

    /// Load the table from `dir`, rebuilding (and rewriting) the cache file if
    /// it is missing or its header does not match.
    pub fn load_or_build(limit: u64, dir: &Path) -> Result<Self> {
        let path = cache_path(dir, limit);
        if let Some(t) = read_cache(&path, limit) {
            return Ok(t);
        }
        let table = Self::build(limit)?;
        table.write_cache(dir)?;
        Ok(table)
    }

    /// Use the cache directory from `REVPRIME_CACHE_DIR` when it is set.
    pub fn from_env(limit: u64) -> Result<Self> {
        match cache_dir_from_env() {
            Some(dir) => Self::load_or_build(limit, &dir),
            None => Self::build(limit),
        }
    }

    pub fn write_cache(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = cache_path(dir, self.limit);
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        let mut buf = Vec::with_capacity(HEADER_LEN + 4 * self.spf.len());
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.limit.to_le_bytes());
        for v in &self.spf {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        tmp.write_all(&buf)?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check(&self, n: u64) -> Result<()> {
        if n > self.limit {
            Err(Error::BeyondSieveLimit {
                n,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }

    /// Smallest prime factor; `0` for `n < 2`.
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf(n) == n
    }

    /// Prime factorization as `(p, exponent)` pairs in increasing order.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn mobius(&self, n: u64) -> i32 {
        let f = self.factorize(n);
        if f.iter().any(|&(_, e)| e > 1) {
            0
        } else if f.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn mangoldt(&self, n: u64) -> f64 {
        match self.factorize(n).as_slice() {
            [(p, _)] => (*p as f64).ln(),
            _ => 0.0,
        }
    }

    pub fn tau(&self, n: u64) -> u64 {
        self.factorize(n)
            .iter()
            .map(|&(_, e)| e as u64 + 1)
            .product()
    }

    pub fn totient(&self, n: u64) -> u64 {
        self.factorize(n)
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    /// Divisors of `n` in increasing order.
    pub fn divisors(&self, n: u64) -> Vec<u64> {
        let mut divs = vec![1u64];
        for (p, e) in self.factorize(n) {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// `pi(n)`, the number of primes `<= n`.
    pub fn prime_pi(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        Ok(self.primes.partition_point(|&p| p as u64 <= n) as u64)
    }

    /// Chebyshev `psi(x) = sum_{n <= x} Lambda(n)`.
    pub fn chebyshev_psi(&self, x: u64) -> Result<f64> {
        self.check(x)?;
        let mut acc = 0.0;
        for &p in self.primes.iter().take_while(|&&p| p as u64 <= x) {
            let lp = (p as f64).ln();
            let mut pk = p as u64;
            while pk <= x {
                acc += lp;
                pk = match pk.checked_mul(p as u64) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        Ok(acc)
    }

    /// `c_2(n) = sum_{d | n, d > z} Lambda(d)`.
    pub fn c2(&self, n: u64, z: f64) -> f64 {
        self.divisors(n)
            .into_iter()
            .filter(|&d| d as f64 > z)
            .map(|d| self.mangoldt(d))
            .sum()
    }

    /// `c_3(n) = sum_{dm = n, d <= z, m <= z} mu(d) Lambda(m)`.
    pub fn c3(&self, n: u64, z: f64) -> f64 {
        self.divisors(n)
            .into_iter()
            .filter(|&d| d as f64 <= z && (n / d) as f64 <= z)
            .map(|d| self.mobius(d) as f64 * self.mangoldt(n / d))
            .sum()
    }

    /// The four Vaughan components of `Lambda(n)` at threshold `z`.
    pub fn vaughan_terms(&self, n: u64, z: f64) -> Result<VaughanTerms> {
        if n == 0 || !(z > 0.0) {
            return Err(Error::Precondition(format!(
                "need n >= 1 and z > 0, got n = {n}, z = {z}"
            )));
        }
        self.check(n)?;
        let divs = self.divisors(n);
        let mut t = VaughanTerms {
            z,
            ..Default::default()
        };
        for &d in &divs {
            let m = n / d;
            let (df, mf) = (d as f64, m as f64);
            if df <= z {
                t.a1 += self.mobius(d) as f64 * mf.ln();
            }
            if df > z && mf > z {
                t.a2 += self.mobius(d) as f64 * self.c2(m, z);
            }
            if df <= z * z {
                t.a3 -= self.c3(d, z);
            }
        }
        if n as f64 <= z {
            t.a4 = self.mangoldt(n);
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VaughanTerms {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub z: f64,
}

impl VaughanTerms {
    pub fn total(&self) -> f64 {
        self.a1 + self.a2 + self.a3 + self.a4
    }
}

fn simple_spf(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut m = i;
            while m <= limit {
                if spf[m] == 0 {
                    spf[m] = i as u32;
                }
                m += i;
            }
        }
    }
    spf
}

pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn cache_path(dir: &Path, limit: u64) -> PathBuf {
    dir.join(format!("spf-{limit}.bin"))
}

fn read_cache(path: &Path, limit: u64) -> Option<PrimeTable> {
    let mut bytes = Vec::new();
    fs::File::open(path).ok()?.read_to_end(&mut bytes).ok()?;
    if bytes.len() != HEADER_LEN + 4 * (limit as usize + 1) || &bytes[..8] != CACHE_MAGIC {
        return None;
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().ok()?);
    let stored = u64::from_le_bytes(bytes[12..20].try_into().ok()?);
    if version != CACHE_VERSION || stored != limit {
        return None;
    }
    let spf: Vec<u32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let primes = (2..spf.len())
        .filter(|&k| spf[k] == k as u32)
        .map(|k| k as u32)
        .collect();
    Some(PrimeTable { limit, spf, primes })
}
