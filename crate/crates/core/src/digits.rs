//! Base-`g` digit machinery and the small numeric helpers shared by every
//! other module.
//!
//! Digit extraction is exact integer arithmetic on `u128`; nothing here goes
//! through `log` or floating point, so `len` is never misclassified at powers
//! of the base.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// A base `g >= 2` together with its exact powers `g^0, g^1, ..., g^K`,
/// where `K` is the largest exponent with `g^K <= u128::MAX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseContext {
    g: u64,
    pow_cache: Vec<u128>,
}

impl BaseContext {
    pub fn new(g: u64) -> Result<Self> {
        if g < 2 {
            return Err(Error::InvalidBase(g));
        }
        let mut pow_cache = vec![1u128];
        while let Some(next) = pow_cache.last().unwrap().checked_mul(g as u128) {
            pow_cache.push(next);
        }
        Ok(BaseContext { g, pow_cache })
    }

    #[inline]
    pub fn g(&self) -> u64 {
        self.g
    }

    /// Largest cached exponent.
    pub fn max_exponent(&self) -> usize {
        self.pow_cache.len() - 1
    }

    /// `g^k`, or `None` when it does not fit in 128 bits.
    #[inline]
    pub fn pow(&self, k: usize) -> Option<u128> {
        self.pow_cache.get(k).copied()
    }

    /// `g^k` for exponents known to be in range.
    ///
    /// Panics when `g^k` overflows `u128`.
    #[inline]
    pub fn pow_exact(&self, k: usize) -> u128 {
        match self.pow(k) {
            Some(p) => p,
            None => panic!("{}^{} exceeds 128 bits", self.g, k),
        }
    }

    /// `g^k` as a float; exact for every cached power below 2^53 and
    /// correctly rounded beyond.
    pub fn pow_f64(&self, k: i64) -> f64 {
        if k >= 0 && (k as usize) < self.pow_cache.len() {
            self.pow_cache[k as usize] as f64
        } else {
            (self.g as f64).powi(k as i32)
        }
    }

    /// Number of base-`g` digits: `len(0) = 0`, otherwise the least `l`
    /// with `n < g^l`.
    pub fn len(&self, n: u128) -> usize {
        self.pow_cache
            .iter()
            .position(|&p| n < p)
            .unwrap_or(self.pow_cache.len())
    }

    pub fn digits_of(&self, n: u128) -> DigitVector {
        let g = self.g as u128;
        let mut digits = Vec::with_capacity(self.len(n));
        let mut m = n;
        while m > 0 {
            digits.push((m % g) as u32);
            m /= g;
        }
        DigitVector { digits }
    }

    /// The `i`-th digit of `n` (zero beyond the length of `n`).
    #[inline]
    pub fn digit(&self, n: u128, i: usize) -> u32 {
        match self.pow(i) {
            Some(p) => ((n / p) % self.g as u128) as u32,
            None => 0,
        }
    }

    /// Absolute digital reverse: read the digits of `n` backwards.
    pub fn reverse(&self, n: u128) -> u128 {
        let g = self.g as u128;
        let mut m = n;
        let mut out = 0u128;
        while m > 0 {
            out = out * g + m % g;
            m /= g;
        }
        out
    }

    /// Reverse within a window of `l` digit positions:
    /// `sum_{i<l} eps_i(n) g^(l-i-1)`. Digits at positions `>= l` are ignored.
    ///
    /// Panics when the result does not fit in 128 bits.
    pub fn reverse_relative(&self, n: u128, l: usize) -> u128 {
        let g = self.g as u128;
        let mut m = n;
        let mut out = 0u128;
        for _ in 0..l {
            out = out
                .checked_mul(g)
                .and_then(|v| v.checked_add(m % g))
                .expect("relative reverse exceeds 128 bits");
            m /= g;
        }
        out
    }

    /// `reverse_relative` on `u64` inputs whose window fits in 64 bits;
    /// the hot path for census loops.
    #[inline]
    pub fn reverse_relative_u64(&self, n: u64, l: usize) -> u64 {
        let g = self.g;
        let mut m = n;
        let mut out = 0u64;
        for _ in 0..l {
            out = out * g + m % g;
            m /= g;
        }
        out
    }
}

/// Base-`g` digits, least significant first. Empty exactly for `n = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DigitVector {
    digits: Vec<u32>,
}

impl DigitVector {
    pub fn from_digits(digits: Vec<u32>, ctx: &BaseContext) -> Result<Self> {
        if digits.iter().any(|&d| d as u64 >= ctx.g()) {
            return Err(Error::InvalidDigit { base: ctx.g() });
        }
        if digits.last() == Some(&0) {
            return Err(Error::LeadingZeroDigit);
        }
        Ok(DigitVector { digits })
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `sum eps_i g^i`.
    pub fn value(&self, ctx: &BaseContext) -> u128 {
        let g = ctx.g() as u128;
        self.digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * g + d as u128)
    }
}

/// `e(x) = exp(2 pi i x)`. The argument is reduced mod 1 first.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * frac(x)).sin_cos();
    Complex64::new(c, s)
}

/// Signed fractional part in `[-1/2, 1/2]`, ties to even.
#[inline]
pub fn frac(x: f64) -> f64 {
    x - x.round_ties_even()
}

/// `||x||`, the distance from `x` to the nearest integer.
#[inline]
pub fn dist(x: f64) -> f64 {
    frac(x).abs()
}

/// `[x]`, the greatest integer not exceeding `x`.
#[inline]
pub fn floor_part(x: f64) -> f64 {
    x.floor()
}

/// `[log x / log g]` computed with an integer correction so that exact powers
/// of `g` land on the right side.
pub fn floor_log(x: f64, g: u64) -> i64 {
    if x < 1.0 {
        return if x <= 0.0 {
            i64::MIN
        } else {
            (x.ln() / (g as f64).ln()).floor() as i64
        };
    }
    let mut k = (x.ln() / (g as f64).ln()).floor() as i64;
    let gf = g as f64;
    while gf.powi(k as i32 + 1) <= x {
        k += 1;
    }
    while k > 0 && gf.powi(k as i32) > x {
        k -= 1;
    }
    k
}

/// Largest denominator bit width a [`Freq`] may carry; keeps `num * n`
/// inside `u128` for multipliers up to `2^27`.
const FREQ_BITS: u32 = 100;

/// An exact frequency `num / den (mod 1)`.
///
/// Floats are decomposed into their dyadic value, so multiplying by `g^i` or
/// by a summation index stays exact no matter how large the multiplier is;
/// iterating `beta -> g beta mod 1` in floating point would lose a digit of
/// precision per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Freq {
    num: u128,
    den: u128,
}

impl Freq {
    pub const ZERO: Freq = Freq { num: 0, den: 1 };

    /// Exact rational `num / den` reduced mod 1. `den` must be positive.
    pub fn rational(num: i128, den: u128) -> Freq {
        assert!(den > 0, "zero denominator");
        let d = den as i128;
        let r = num.rem_euclid(d) as u128;
        Freq { num: r, den }
    }

    /// The dyadic value of `beta` mod 1, rounded to `FREQ_BITS` fractional
    /// bits when `beta` carries more.
    pub fn from_f64(beta: f64) -> Freq {
        Self::from_f64_bits(beta, FREQ_BITS)
    }

    fn from_f64_bits(beta: f64, bits: u32) -> Freq {
        assert!(beta.is_finite(), "non-finite frequency");
        let b = frac(beta);
        let b = if b < 0.0 { b + 1.0 } else { b };
        if b == 0.0 || b >= 1.0 {
            return Freq::ZERO;
        }
        // b = mant * 2^exp with mant < 2^53 and exp < 0
        let (mant, exp) = decompose(b);
        let shift = (-exp) as u32;
        if shift <= bits {
            Freq {
                num: mant as u128,
                den: 1u128 << shift,
            }
        } else {
            let scaled = (b * (2f64).powi(bits as i32)).round() as u128;
            Freq::rational(scaled as i128, 1u128 << bits)
        }
    }

    /// `(h + beta) / modulus`, exactly up to the rounding of `beta` to the bits
    /// left over once `modulus` is accounted for.
    pub fn offset(h: i128, beta: f64, modulus: u128) -> Freq {
        let mbits = 128 - modulus.leading_zeros();
        let bits = FREQ_BITS.saturating_sub(mbits).max(1);
        let b = Self::from_f64_bits(beta, bits);
        // b = bn / 2^k with 2^k | 2^bits; rescale to 2^bits
        let k = 127 - b.den.leading_zeros();
        let bn = b.num << (bits - k);
        let den = modulus << bits;
        let whole = ((h.rem_euclid(modulus as i128)) as u128) << bits;
        // beta's integer part also shifts h
        let int_part = beta.floor();
        let shift_h = if int_part.abs() < 1e30 {
            int_part as i128
        } else {
            0
        };
        let whole = (whole + ((shift_h.rem_euclid(modulus as i128) as u128) << bits)) % den;
        Freq {
            num: (whole + bn) % den,
            den,
        }
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    /// Value in `[0, 1)`.
    #[inline]
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `n * self (mod 1)`.
    #[inline]
    pub fn times(&self, n: u128) -> Freq {
        Freq {
            num: mulmod(self.num, n % self.den, self.den),
            den: self.den,
        }
    }

    /// `n * self (mod 1)` as a float in `[0, 1)`.
    #[inline]
    pub fn times_value(&self, n: u64) -> f64 {
        self.times(n as u128).value()
    }
}

#[inline]
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac_bits = bits & ((1u64 << 52) - 1);
    let (mut mant, mut e) = if exp == 0 {
        (frac_bits, -1074)
    } else {
        (frac_bits | (1u64 << 52), exp - 1075)
    };
    while mant != 0 && mant & 1 == 0 {
        mant >>= 1;
        e += 1;
    }
    (mant, e)
}

/// `a * b mod m` without overflow.
#[inline]
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m.is_power_of_two() {
        return a.wrapping_mul(b) & (m - 1);
    }
    match a.checked_mul(b) {
        Some(p) => p % m,
        None => {
            let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
            while b > 0 {
                if b & 1 == 1 {
                    acc = addmod(acc, a, m);
                }
                a = addmod(a, a, m);
                b >>= 1;
            }
            acc
        }
    }
}

#[inline]
fn addmod(a: u128, b: u128, m: u128) -> u128 {
    let (s, over) = a.overflowing_add(b);
    if over || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}
