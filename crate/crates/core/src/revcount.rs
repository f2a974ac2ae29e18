//! Counting primes by the residue of their digital reverse.
//!
//! `pi_L(a, q)` counts primes `g^(L-1) <= p < g^L` with `rev(p) = a mod q`;
//! its expected size is `(rho_g(a, q)/q) g^L / (L log g)`.

use num_integer::Integer;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::PrimeTable;
use crate::digits::{dist, BaseContext, Freq};
use crate::error::{Error, Result};
use crate::expsum::{gamma_coefficient, ExpSumContext};
use crate::report::BoundReport;
use crate::seeds::reverse_seed_rational;

fn totient(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// `rho_g(a, q)` as an exact rational.
pub fn rho(g: u64, a: i64, q: u64) -> Rational64 {
    assert!(g >= 2 && q >= 1, "need g >= 2 and q >= 1");
    let a = a.rem_euclid(q as i64) as u64;
    let g2 = g * g - 1;
    let aq = a.gcd(&q);
    if aq.gcd(&g2) != 1 || aq.is_multiple_of(g) {
        return Rational64::from_integer(0);
    }
    let qg = q.gcd(&g);
    let first = if a.is_multiple_of(qg) {
        Rational64::new(g as i64 - qg as i64, g as i64)
    } else {
        Rational64::from_integer(1)
    };
    let qg2 = q.gcd(&g2);
    first * Rational64::new(qg2 as i64, totient(qg2) as i64)
}

/// `(q, g^L (g^2 - 1))`.
pub fn sharp_modulus(g: u64, l: u32, q: u64) -> u64 {
    let m = q as u128;
    let mut p = 1u128 % m;
    for _ in 0..l {
        p = p * g as u128 % m;
    }
    let prod = p * ((g as u128 * g as u128 - 1) % m) % m;
    q.gcd(&(prod as u64))
}

/// Number of distinct primes dividing `g q`: the cap on primes counted in a
/// class with `rho = 0`.
pub fn exceptional_cap(g: u64, q: u64) -> u64 {
    let mut n = g as u128 * q as u128;
    let mut count = 0;
    let mut p = 2u128;
    while p * p <= n {
        if n.is_multiple_of(p) {
            count += 1;
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    count + (n > 1) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRecord {
    pub g: u64,
    #[serde(rename = "L")]
    pub l: u32,
    pub a: i64,
    pub q: u64,
    pub observed: u64,
    pub main_term: f64,
    /// `observed / main_term - 1`; absent when `rho = 0`.
    pub relative_dev: Option<f64>,
    pub sharp_observed: u64,
    pub modulus_sharp: u64,
}

pub const CSV_HEADER: &str = "g,L,a,q,observed,main_term,relative_dev,sharp_observed,modulus_sharp";

impl CensusRecord {
    pub fn csv_row(&self) -> String {
        let dev = self.relative_dev.map(|d| d.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.g,
            self.l,
            self.a,
            self.q,
            self.observed,
            self.main_term,
            dev,
            self.sharp_observed,
            self.modulus_sharp
        )
    }

    /// For `rho = 0`, whether the count stays within the exceptional cap.
    pub fn within_exceptional_cap(&self) -> bool {
        self.relative_dev.is_some() || self.observed <= exceptional_cap(self.g, self.q)
    }
}

fn window(ctx: &BaseContext, l: u32, pt: &PrimeTable) -> Result<(u64, u64)> {
    if l == 0 {
        return Err(Error::Precondition("L must be positive".into()));
    }
    let hi = ctx
        .pow(l as usize)
        .filter(|&v| v <= u64::MAX as u128)
        .ok_or_else(|| Error::Precondition(format!("g^L overflows for L = {l}")))?
        as u64;
    if hi - 1 > pt.limit() {
        return Err(Error::BeyondSieveLimit {
            n: hi - 1,
            limit: pt.limit(),
        });
    }
    Ok((ctx.pow_exact(l as usize - 1) as u64, hi))
}

const CHUNK: usize = 1 << 14;

/// Census of every `(a, q)` in `queries` at once: primes in the window are
/// reversed a single time and binned against all moduli.
pub fn census_grid(
    g: u64,
    l: u32,
    queries: &[(i64, u64)],
    pt: &PrimeTable,
) -> Result<Vec<CensusRecord>> {
    let ctx = BaseContext::new(g)?;
    let (lo, hi) = window(&ctx, l, pt)?;
    if queries.iter().any(|&(_, q)| q == 0) {
        return Err(Error::Precondition("moduli must be positive".into()));
    }
    let primes = pt.primes();
    let start = primes.partition_point(|&p| (p as u64) < lo);
    let end = primes.partition_point(|&p| (p as u64) < hi);
    let sharp: Vec<u64> = queries
        .iter()
        .map(|&(_, q)| sharp_modulus(g, l, q))
        .collect();
    let targets: Vec<(u64, u64)> = queries
        .iter()
        .zip(&sharp)
        .map(|(&(a, q), &s)| (a.rem_euclid(q as i64) as u64, a.rem_euclid(s as i64) as u64))
        .collect();
    let partials: Vec<Vec<(u64, u64)>> = primes[start..end]
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut counts = vec![(0u64, 0u64); queries.len()];
            for &p in chunk {
                let r = ctx.reverse_relative_u64(p as u64, l as usize);
                for (k, (&(_, q), &s)) in queries.iter().zip(&sharp).enumerate() {
                    counts[k].0 += (r % q == targets[k].0) as u64;
                    counts[k].1 += (r % s == targets[k].1) as u64;
                }
            }
            counts
        })
        .collect();
    let mut totals = vec![(0u64, 0u64); queries.len()];
    for part in partials {
        for (t, c) in totals.iter_mut().zip(part) {
            t.0 += c.0;
            t.1 += c.1;
        }
    }
    let scale = (g as f64).powi(l as i32) / (l as f64 * (g as f64).ln());
    Ok(queries
        .iter()
        .zip(totals)
        .zip(&sharp)
        .map(|((&(a, q), (observed, sharp_observed)), &modulus_sharp)| {
            let r = rho(g, a, q);
            let density = *r.numer() as f64 / *r.denom() as f64;
            let main_term = density / q as f64 * scale;
            let relative_dev = (main_term > 0.0).then(|| observed as f64 / main_term - 1.0);
            CensusRecord {
                g,
                l,
                a,
                q,
                observed,
                main_term,
                relative_dev,
                sharp_observed,
                modulus_sharp,
            }
        })
        .collect())
}

pub fn census(g: u64, l: u32, a: i64, q: u64, pt: &PrimeTable) -> Result<CensusRecord> {
    Ok(census_grid(g, l, &[(a, q)], pt)?.remove(0))
}

/// `#{p <= x : rev_L(p) = a mod (q, g^L (g^2 - 1))}`, with `x = g^L - 1` by
/// default.
pub fn census_sharp(
    g: u64,
    l: u32,
    a: i64,
    q: u64,
    x: Option<u64>,
    pt: &PrimeTable,
) -> Result<u64> {
    let v = psi_theta_pi(g, l, x.unwrap_or(u64::MAX), a, q, pt, Kind::Pi, true)?;
    Ok(v as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Psi,
    Theta,
    Pi,
}

/// The six counting sums: `sum_{n <= x, rev_L(n) = a mod q'} w(n)` with
/// `w = Lambda`, `log p` on primes, or `1` on primes, and `q' = q` or the
/// sharp modulus. `x` is clipped to `g^L - 1`.
#[allow(clippy::too_many_arguments)]
pub fn psi_theta_pi(
    g: u64,
    l: u32,
    x: u64,
    a: i64,
    q: u64,
    pt: &PrimeTable,
    kind: Kind,
    sharp: bool,
) -> Result<f64> {
    let ctx = BaseContext::new(g)?;
    let (_, hi) = window(&ctx, l, pt)?;
    if q == 0 {
        return Err(Error::Precondition("modulus must be positive".into()));
    }
    let x = x.min(hi - 1);
    let modulus = if sharp { sharp_modulus(g, l, q) } else { q };
    let target = a.rem_euclid(modulus as i64) as u64;
    let hit = |n: u64| ctx.reverse_relative_u64(n, l as usize) % modulus == target;
    let mut acc = 0.0;
    match kind {
        Kind::Psi => {
            for n in 2..=x {
                let w = pt.mangoldt(n);
                if w != 0.0 && hit(n) {
                    acc += w;
                }
            }
        }
        Kind::Theta | Kind::Pi => {
            for &p in pt.primes().iter().take_while(|&&p| p as u64 <= x) {
                if hit(p as u64) {
                    acc += if kind == Kind::Pi {
                        1.0
                    } else {
                        (p as f64).ln()
                    };
                }
            }
        }
    }
    Ok(acc)
}

/// Both sides of `pi(x, a, q) ~ ((q, g^L (g^2 - 1))/q) pi_sharp(x, a, q)`
/// with `L = [log x / log g] + 1`; the left side uses the absolute reverse.
pub fn pure_relation(g: u64, x: u64, a: i64, q: u64, pt: &PrimeTable) -> Result<(f64, f64)> {
    let ctx = BaseContext::new(g)?;
    if x > pt.limit() || x < 2 {
        return Err(Error::BeyondSieveLimit {
            n: x,
            limit: pt.limit(),
        });
    }
    let l = ctx.len(x as u128) as u32;
    let target = a.rem_euclid(q as i64) as u64;
    let lhs = pt
        .primes()
        .iter()
        .take_while(|&&p| p as u64 <= x)
        .filter(|&&p| (ctx.reverse(p as u128) % q as u128) as u64 == target)
        .count() as f64;
    let sharp = psi_theta_pi(g, l, x, a, q, pt, Kind::Pi, true)?;
    Ok((lhs, sharp_modulus(g, l, q) as f64 / q as f64 * sharp))
}

/// `i0 = [log(g / ((g+1) ||alpha||)) / log g]` and `||g^i0 alpha||`.
pub fn i0_landing(g: u64, alpha: f64) -> Result<(i64, f64)> {
    let d = dist(alpha);
    if d == 0.0 {
        return Err(Error::IntegerAlpha(alpha));
    }
    let gf = g as f64;
    let i0 = ((gf / ((gf + 1.0) * d)).ln() / gf.ln()).floor() as i64;
    let landed = Freq::from_f64(alpha).times((g as u128).pow(i0 as u32));
    Ok((i0, dist(landed.value())))
}

/// `||g^i (g^2 - 1) h / q||` in exact integer arithmetic.
fn scaled_dist(g: u64, i: u32, h: i64, q: u64) -> f64 {
    let m = q as u128;
    let mut v = (h as i128).rem_euclid(m as i128) as u128 * ((g as u128 * g as u128 - 1) % m) % m;
    for _ in 0..i {
        v = v * g as u128 % m;
    }
    let r = v.min(m - v);
    r as f64 / q as f64
}

/// Block structure of `||g^i (g^2 - 1) alpha||` for `alpha = h/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocks {
    pub sigma_hat: f64,
    pub j: u64,
    pub k: u64,
    /// `sum_{L-lambda <= i < L} ||g^i (g^2 - 1) alpha||^2`.
    pub blocked_sum: f64,
}

pub fn blocks(g: u64, l: u32, lambda: u32, h: i64, q: u64) -> Result<Blocks> {
    if lambda > l {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} exceeds L = {l}"
        )));
    }
    let sigma_hat = (0..=l)
        .map(|i| scaled_dist(g, i, h, q))
        .fold(f64::INFINITY, f64::min);
    if sigma_hat == 0.0 {
        return Err(Error::DegenerateAlpha(h as f64 / q as f64));
    }
    let gf = g as f64;
    let j = 1 + ((gf / ((gf + 1.0) * sigma_hat)).ln() / gf.ln()).floor() as u64;
    let k = lambda as u64 / j;
    let blocked_sum = (l - lambda..l)
        .map(|i| scaled_dist(g, i, h, q).powi(2))
        .sum();
    Ok(Blocks {
        sigma_hat,
        j,
        k,
        blocked_sum,
    })
}

/// Checks, for `alpha = h/q`: the blocked sum is at least `K/(g+1)^2`, and
/// `sigma_lambda` of the reverse seed is at least `(C/g^2)` times the blocked
/// sum, `C = 2 log 2 / ((g-1) g^4 (log g)^2)`.
pub fn sigma_lower_blocks(g: u64, l: u32, lambda: u32, h: i64, q: u64) -> Result<[BoundReport; 2]> {
    let b = blocks(g, l, lambda, h, q)?;
    let gf = g as f64;
    let params = crate::params! {"g" => g, "L" => l, "lambda" => lambda, "alpha" => format!("{h}/{q}"), "J" => b.j, "K" => b.k};
    let first = BoundReport::new(
        "sigma-lower-blocks",
        b.k as f64 / (gf + 1.0).powi(2),
        b.blocked_sum,
        params.clone(),
    );
    let es = ExpSumContext::new(reverse_seed_rational(g, l, h, q))?;
    let lower = gamma_coefficient(g) / (gf * gf) * b.blocked_sum;
    let second = BoundReport::new("sigma-lower-chain", lower, es.sigma(lambda, 0), params);
    Ok([first, second])
}

/// `sigma_{2 lambda} - sigma_lambda >= K(lambda) C / (g^2 (g+1)^2)` for the
/// reverse seed with `alpha = h/q`, `2 lambda <= L`.
pub fn sigma_growth(g: u64, l: u32, lambda: u32, h: i64, q: u64) -> Result<BoundReport> {
    if 2 * lambda > l {
        return Err(Error::Precondition(format!(
            "need 2 lambda <= L, got lambda = {lambda}, L = {l}"
        )));
    }
    let b = blocks(g, l, lambda, h, q)?;
    let es = ExpSumContext::new(reverse_seed_rational(g, l, h, q))?;
    let gf = g as f64;
    let gain = es.sigma(2 * lambda, 0) - es.sigma(lambda, 0);
    let need = b.k as f64 * gamma_coefficient(g) / (gf * gf * (gf + 1.0).powi(2));
    Ok(BoundReport::new(
        "sigma-growth",
        need,
        gain,
        crate::params! {"g" => g, "L" => l, "lambda" => lambda, "alpha" => format!("{h}/{q}"), "K" => b.k},
    ))
}
