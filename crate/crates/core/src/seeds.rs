//! Seeds of weakly digital functions.
//!
//! A seed assigns a real number to every (position, digit) pair. The generated
//! function is `f_lambda(n) = sum_{i < lambda} alpha_i(eps_i(n))`; shifting a
//! seed by `j` re-indexes positions, `alpha^[j]_i = alpha_{i+j}`.

use std::fmt;
use std::sync::Arc;

use crate::digits::{frac, BaseContext};
use crate::error::{Error, Result};

type SeedFn = dyn Fn(u64, u32) -> f64 + Send + Sync;

/// The seed families the tools know how to build, with closed-form metadata
/// kept around so tests can derive expected values symbolically.
#[derive(Clone)]
pub enum SeedFamily {
    /// `alpha_i(d) = 0`.
    Zero,
    /// `alpha_i(d) = a d`, position independent (a digital function).
    Sod { a: f64 },
    /// `alpha_i(d) = a d g^(L-i-1)`; with `a = 1` this generates `rev_L`.
    Reverse { a: f64, l: u32 },
    /// The reverse seed with `a = h/q`, reduced mod 1 exactly at every
    /// position (needed once `g^(L-i-1)` outgrows the f64 mantissa).
    ReverseRational { h: i64, q: u64, l: u32 },
    /// `alpha_i(d)` uniform in `[0, 1)`, derived by hashing `(key, i, d)`.
    Random { key: u64 },
    /// Arbitrary callable `(i, d) -> alpha_i(d)`.
    Custom(Arc<SeedFn>),
}

impl fmt::Debug for SeedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedFamily::Zero => write!(f, "Zero"),
            SeedFamily::Sod { a } => write!(f, "Sod {{ a: {a} }}"),
            SeedFamily::Reverse { a, l } => write!(f, "Reverse {{ a: {a}, l: {l} }}"),
            SeedFamily::ReverseRational { h, q, l } => {
                write!(f, "ReverseRational {{ a: {h}/{q}, l: {l} }}")
            }
            SeedFamily::Random { key } => write!(f, "Random {{ key: {key} }}"),
            SeedFamily::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Seed {
    family: SeedFamily,
    base: u64,
    shift: u64,
    label: String,
}

pub fn zero_seed(g: u64) -> Seed {
    Seed::new(SeedFamily::Zero, g, "zero".into())
}

pub fn sod_seed(g: u64, a: f64) -> Seed {
    Seed::new(SeedFamily::Sod { a }, g, format!("sod:{a}"))
}

pub fn reverse_seed(g: u64, l: u32, a: f64) -> Seed {
    Seed::new(SeedFamily::Reverse { a, l }, g, format!("reverse:{a},{l}"))
}

/// `reverse_seed` with the exact rational `a = h/q`.
pub fn reverse_seed_rational(g: u64, l: u32, h: i64, q: u64) -> Seed {
    assert!(q > 0, "zero denominator");
    Seed::new(
        SeedFamily::ReverseRational { h, q, l },
        g,
        format!("reverse:{h}/{q},{l}"),
    )
}

pub fn random_seed(g: u64, key: u64) -> Seed {
    Seed::new(SeedFamily::Random { key }, g, format!("random:{key}"))
}

pub fn custom_seed<F>(g: u64, label: &str, f: F) -> Seed
where
    F: Fn(u64, u32) -> f64 + Send + Sync + 'static,
{
    Seed::new(SeedFamily::Custom(Arc::new(f)), g, label.to_string())
}

/// splitmix64 finalizer
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    fn new(family: SeedFamily, base: u64, label: String) -> Self {
        Seed {
            family,
            base,
            shift: 0,
            label,
        }
    }

    /// Parse a CLI seed spec: `zero`, `sod:a`, `reverse:a,L`, `reverse:h/q,L`
    /// or `random:key`.
    pub fn parse(spec: &str, g: u64) -> Result<Seed> {
        let bad = || Error::UnknownSeedFamily(spec.to_string());
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        match (name, args) {
            ("zero", None) => Ok(zero_seed(g)),
            ("sod", Some(a)) => Ok(sod_seed(g, num(a)?)),
            ("reverse", Some(rest)) => {
                let (a, l) = rest.split_once(',').ok_or_else(bad)?;
                let l = l.trim().parse::<u32>().map_err(|_| bad())?;
                match a.split_once('/') {
                    Some((h, q)) => {
                        let h = h.trim().parse::<i64>().map_err(|_| bad())?;
                        let q = q.trim().parse::<u64>().map_err(|_| bad())?;
                        if q == 0 {
                            return Err(bad());
                        }
                        Ok(reverse_seed_rational(g, l, h, q))
                    }
                    None => Ok(reverse_seed(g, l, num(a)?)),
                }
            }
            ("random", Some(k)) => Ok(random_seed(g, k.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> &SeedFamily {
        &self.family
    }

    /// Total shift applied so far.
    pub fn offset(&self) -> u64 {
        self.shift
    }

    /// `alpha^[j]`.
    pub fn shift(&self, j: u64) -> Seed {
        let mut s = self.clone();
        s.shift += j;
        s
    }

    /// `alpha_i(d)` (of the shifted seed).
    #[inline]
    pub fn eval(&self, i: u64, d: u32) -> f64 {
        let pos = i + self.shift;
        match &self.family {
            SeedFamily::Zero => 0.0,
            SeedFamily::Sod { a } => a * d as f64,
            SeedFamily::Reverse { a, l } => {
                let e = *l as i64 - pos as i64 - 1;
                a * d as f64 * pow_i(self.base, e)
            }
            SeedFamily::ReverseRational { h, q, l } => {
                let e = *l as i64 - pos as i64 - 1;
                *h as f64 / *q as f64 * d as f64 * pow_i(self.base, e)
            }
            SeedFamily::Random { key } => {
                let h = mix64(
                    key.wrapping_mul(0xD1B5_4A32_D192_ED03)
                        ^ mix64(pos.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7) ^ d as u64),
                );
                (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
            }
            SeedFamily::Custom(f) => f(pos, d),
        }
    }

    /// `alpha_i(d)` reduced mod 1, the only part that matters inside `e(.)`.
    #[inline]
    pub fn eval_frac(&self, i: u64, d: u32) -> f64 {
        if let SeedFamily::ReverseRational { h, q, l } = &self.family {
            let e = *l as i64 - (i + self.shift) as i64 - 1;
            if let Some(v) = reverse_rational_frac(*h, *q, self.base, e, d) {
                return v;
            }
        }
        frac(self.eval(i, d))
    }

    /// All digit values at position `i`: `[alpha_i(0), ..., alpha_i(g-1)]`.
    pub fn position(&self, i: u64) -> Vec<f64> {
        (0..self.base as u32).map(|d| self.eval(i, d)).collect()
    }
}

/// `(h/q) d g^e mod 1` in exact integer arithmetic, `None` if the
/// denominator `q g^-e` overflows.
fn reverse_rational_frac(h: i64, q: u64, g: u64, e: i64, d: u32) -> Option<f64> {
    let hd = h as i128 * d as i128;
    let (num, den) = if e >= 0 {
        let m = q as u128;
        let mut p = 1u128 % m;
        let mut b = g as u128 % m;
        let mut k = e as u64;
        while k > 0 {
            if k & 1 == 1 {
                p = p * b % m;
            }
            b = b * b % m;
            k >>= 1;
        }
        (hd.rem_euclid(m as i128) as u128 * p % m, m)
    } else {
        let den = (g as u128)
            .checked_pow((-e) as u32)?
            .checked_mul(q as u128)?;
        (hd.rem_euclid(i128::try_from(den).ok()?) as u128, den)
    };
    Some(frac(num as f64 / den as f64))
}

#[inline]
fn pow_i(g: u64, e: i64) -> f64 {
    if (0..64).contains(&e) {
        if let Some(p) = g.checked_pow(e as u32) {
            return p as f64;
        }
    }
    (g as f64).powi(e as i32)
}

/// `f_lambda^[j](n) = sum_{i < lambda} alpha_{i+j}(eps_i(n))`.
pub fn f_eval(seed: &Seed, ctx: &BaseContext, lambda: u32, j: u64, n: u128) -> f64 {
    let g = ctx.g() as u128;
    let mut m = n;
    let mut acc = 0.0;
    for i in 0..lambda as u64 {
        acc += seed.eval(i + j, (m % g) as u32);
        m /= g;
    }
    acc
}

/// `f_lambda^[j](n) mod 1`, summing reduced terms so large seed values do not
/// swamp the fractional part.
pub fn f_eval_frac(seed: &Seed, ctx: &BaseContext, lambda: u32, j: u64, n: u128) -> f64 {
    let g = ctx.g() as u128;
    let mut m = n;
    let mut acc = 0.0;
    for i in 0..lambda as u64 {
        acc += seed.eval_frac(i + j, (m % g) as u32);
        m /= g;
    }
    frac(acc)
}

/// Per-position tables `alpha_{j+i}(d)` mod 1 for `i < lambda`, laid out
/// row-major; lets hot loops avoid re-evaluating the seed.
#[derive(Debug, Clone)]
pub struct SeedTable {
    g: usize,
    values: Vec<f64>,
}

impl SeedTable {
    pub fn new(seed: &Seed, lambda: u32, j: u64) -> Self {
        let g = seed.base() as usize;
        let mut values = Vec::with_capacity(g * lambda as usize);
        for i in 0..lambda as u64 {
            for d in 0..g as u32 {
                values.push(seed.eval_frac(i + j, d));
            }
        }
        SeedTable { g, values }
    }

    #[inline]
    pub fn get(&self, i: usize, d: u32) -> f64 {
        self.values[i * self.g + d as usize]
    }

    pub fn lambda(&self) -> usize {
        self.values.len() / self.g
    }

    /// `f_lambda(n) mod 1` from the table.
    #[inline]
    pub fn f_frac(&self, n: u64) -> f64 {
        let g = self.g as u64;
        let mut m = n;
        let mut acc = 0.0;
        for i in 0..self.lambda() {
            acc += self.get(i, (m % g) as u32);
            m /= g;
            if m == 0 {
                // remaining digits are zero, but alpha_i(0) need not vanish
                for k in i + 1..self.lambda() {
                    acc += self.get(k, 0);
                }
                break;
            }
        }
        acc
    }
}
