//! Exponential sums of weakly digital functions.
//!
//! `F_lambda^[j](beta) = g^-lambda sum_{n < g^lambda} e(f_lambda^[j](n) - beta n)`
//! factors over digit positions into the single-digit sums
//! `phi_i^[j](beta) = |sum_{d < g} e(alpha_{i+j}(d) - beta d)|`. This module
//! evaluates both sides, the explicit constants `gamma`, `sigma`, `Theta`,
//! `eta` and `omega`, the auxiliary `Psi`, and the L1 / hybrid moments.

use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::{LN_2, TAU};

use crate::digits::{dist, e, floor_log, frac, BaseContext, Freq};
use crate::error::{Error, Result};
use crate::seeds::{Seed, SeedTable};

/// Default cap on the number of terms `F_direct` may sum (`2^24`).
pub const DEFAULT_DIRECT_BUDGET: u128 = 1 << 24;

/// Closed-form lower bound for `Theta_g`:
/// `(1 - 1/g) (1 - sqrt(1 - 2/(g^2 (g-1))))`, always `> 1/g^3`.
pub fn theta_lower_bound(g: u64) -> f64 {
    let gf = g as f64;
    let eps = 2.0 / (gf * gf * (gf - 1.0));
    (1.0 - 1.0 / gf) * one_minus_sqrt_one_minus(eps)
}

/// `1 - sqrt(1 - x)` without cancellation for small `x`.
#[inline]
fn one_minus_sqrt_one_minus(x: f64) -> f64 {
    x / (1.0 + (1.0 - x).sqrt())
}

/// `1/2 - eta~_g`, where `eta~_g` is `eta_g` with `Theta_g` replaced by its
/// closed-form lower bound. Computed as a gap so it stays meaningful when
/// `eta~_g` is within `1e-11` of `1/2`.
pub fn eta_gap(g: u64) -> f64 {
    let lg = (g as f64).ln();
    let first = (1.5f64).ln() / (4.0 * lg - 2.0 * LN_2);
    let second = -(-theta_lower_bound(g)).ln_1p() / (4.0 * lg);
    first.min(second)
}

/// `eta~_g = max(1/2 - log(3/2)/(4 log g - 2 log 2), 1/2 + log(1 - Theta)/(4 log g))`.
pub fn eta_tilde(g: u64) -> f64 {
    0.5 - eta_gap(g)
}

/// `omega_g = (log 2 / log g)(1/2 - eta~_g)`.
pub fn omega(g: u64) -> f64 {
    LN_2 / (g as f64).ln() * eta_gap(g)
}

/// Leading coefficient of `gamma_i`: `2 log 2 / ((g-1) g^4 (log g)^2)`.
pub fn gamma_coefficient(g: u64) -> f64 {
    let gf = g as f64;
    2.0 * LN_2 / ((gf - 1.0) * gf.powi(4) * gf.ln().powi(2))
}

/// Upper end of the range of `gamma_i`: `log 2 / (4 g^3 (log g)^2)`.
pub fn gamma_ceiling(g: u64) -> f64 {
    let gf = g as f64;
    LN_2 / (4.0 * gf.powi(3) * gf.ln().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Constants {
    pub eta_tilde: f64,
    /// `1/2 - eta_tilde`, kept separately for precision.
    pub eta_gap: f64,
    pub omega: f64,
    pub theta_lower: f64,
}

impl Constants {
    pub fn for_base(g: u64) -> Self {
        Constants {
            eta_tilde: eta_tilde(g),
            eta_gap: eta_gap(g),
            omega: omega(g),
            theta_lower: theta_lower_bound(g),
        }
    }
}

/// Both sides of the L1 moment inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Moment {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct ExpSumContext {
    ctx: BaseContext,
    seed: Seed,
    constants: Constants,
    direct_budget: u128,
}

impl ExpSumContext {
    pub fn new(seed: Seed) -> Result<Self> {
        let ctx = BaseContext::new(seed.base())?;
        let constants = Constants::for_base(ctx.g());
        Ok(ExpSumContext {
            ctx,
            seed,
            constants,
            direct_budget: DEFAULT_DIRECT_BUDGET,
        })
    }

    pub fn with_direct_budget(mut self, budget: u128) -> Self {
        self.direct_budget = budget;
        self
    }

    pub fn base(&self) -> &BaseContext {
        &self.ctx
    }

    pub fn g(&self) -> u64 {
        self.ctx.g()
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    /// Position-`(i + j)` digit sum `(1/g) sum_d e(alpha(d) - theta d)` as a
    /// complex number.
    #[inline]
    fn digit_sum(&self, pos: u64, theta: f64) -> Complex64 {
        let terms: Vec<Complex64> = (0..self.g() as u32)
            .map(|d| e(self.seed.eval_frac(pos, d)))
            .collect();
        digit_sum_with(&terms, theta)
    }

    /// `phi_i^[j](beta)`.
    pub fn phi(&self, i: u64, j: u64, beta: f64) -> f64 {
        self.digit_sum(i + j, frac(beta)).norm()
    }

    /// `F_lambda^[j](beta)` by summing all `g^lambda` terms.
    pub fn f_direct(&self, lambda: u32, j: u64, beta: f64) -> Result<Complex64> {
        self.f_direct_freq(lambda, j, Freq::from_f64(beta))
    }

    pub fn f_direct_freq(&self, lambda: u32, j: u64, beta: Freq) -> Result<Complex64> {
        let cost = self.ctx.pow(lambda as usize).unwrap_or(u128::MAX);
        if cost > self.direct_budget {
            return Err(Error::CostBudget {
                cost,
                budget: self.direct_budget,
            });
        }
        let table = SeedTable::new(&self.seed, lambda, j);
        let n_terms = cost as u64;
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..n_terms {
            let phase = table.f_frac(n) - beta.times_value(n);
            acc += e(phase);
        }
        Ok(acc / cost as f64)
    }

    /// `|F_lambda^[j](beta)|` through the product formula, `O(lambda g)`.
    pub fn f_abs_product(&self, lambda: u32, j: u64, beta: f64) -> f64 {
        self.f_abs_product_freq(lambda, j, Freq::from_f64(beta))
    }

    pub fn f_abs_product_freq(&self, lambda: u32, j: u64, beta: Freq) -> f64 {
        let g = self.g() as f64;
        let mut angle = beta;
        let mut acc = 1.0;
        for i in 0..lambda as u64 {
            acc *= self.digit_sum(i + j, angle.value()).norm() / g;
            if acc == 0.0 {
                break;
            }
            angle = angle.times(self.g() as u128);
        }
        acc
    }

    /// `F_lambda^[j](beta)` as a complex product over digit positions.
    pub fn f_product(&self, lambda: u32, j: u64, beta: Freq) -> Complex64 {
        let g = self.g() as f64;
        let mut angle = beta;
        let mut acc = Complex64::new(1.0, 0.0);
        for i in 0..lambda as u64 {
            acc *= self.digit_sum(i + j, angle.value()) / g;
            angle = angle.times(self.g() as u128);
        }
        acc
    }

    /// `d/dbeta F_lambda^[j](beta)` from the product rule.
    pub fn f_derivative(&self, lambda: u32, j: u64, beta: f64) -> Complex64 {
        let g = self.g();
        let gf = g as f64;
        let mut angle = Freq::from_f64(beta);
        let mut factors = Vec::with_capacity(lambda as usize);
        let mut derivs = Vec::with_capacity(lambda as usize);
        for i in 0..lambda as u64 {
            let theta = angle.value();
            let scale = self.ctx.pow_f64(i as i64);
            let step = e(-theta);
            let mut w = Complex64::new(1.0, 0.0);
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for d in 0..g as u32 {
                let t = e(self.seed.eval_frac(i + j, d)) * w;
                p += t;
                dp += t * Complex64::new(0.0, -TAU * scale * d as f64);
                w *= step;
            }
            factors.push(p / gf);
            derivs.push(dp / gf);
            angle = angle.times(g as u128);
        }
        let n = factors.len();
        let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] * factors[i];
        }
        let mut prefix = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += prefix * derivs[i] * suffix[i + 1];
            prefix *= factors[i];
        }
        acc
    }

    /// `|F_lambda^[j]((h + beta)/g^lambda)|` for every `0 <= h < g^lambda`.
    ///
    /// Position `i` only sees `h mod g^(lambda-i)`, so the table is built from
    /// the top digit down with `O(g^lambda)` single-digit evaluations in total.
    pub fn abs_f_offset_grid(&self, lambda: u32, j: u64, beta: f64) -> Result<Vec<f64>> {
        let size = self.ctx.pow(lambda as usize).unwrap_or(u128::MAX);
        if size > self.direct_budget {
            return Err(Error::CostBudget {
                cost: size,
                budget: self.direct_budget,
            });
        }
        let g = self.g() as usize;
        let gf = g as f64;
        let mut w = vec![1.0f64];
        for t in 1..=lambda as usize {
            // position i = lambda - t, modulus g^t
            let i = (lambda as usize - t) as u64;
            let modulus = self.ctx.pow_exact(t);
            let terms: Vec<Complex64> = (0..g as u32)
                .map(|d| e(self.seed.eval_frac(i + j, d)))
                .collect();
            let mut next = Vec::with_capacity(w.len() * g);
            let (fb, mf) = (frac(beta), modulus as f64);
            for r in 0..modulus {
                let v = digit_sum_with(&terms, (r as f64 + fb) / mf).norm() / gf;
                next.push(w[(r % (w.len() as u128)) as usize] * v);
            }
            w = next;
        }
        Ok(w)
    }

    /// `gamma_i^[j]`.
    pub fn gamma_i(&self, i: u64, j: u64) -> f64 {
        let g = self.g();
        let gf = g as f64;
        let vals: Vec<f64> = (0..g as u32)
            .map(|d| gf * self.seed.eval_frac(i + j, d) - self.seed.eval_frac(i + j + 1, d))
            .collect();
        let mut acc = 0.0;
        for m in 0..g as usize {
            for n in m + 1..g as usize {
                acc += dist(vals[m] - vals[n]).powi(2);
            }
        }
        gamma_coefficient(g) * acc
    }

    /// `sigma_lambda^[j] = sum_{i < lambda} gamma_i^[j]`.
    pub fn sigma(&self, lambda: u32, j: u64) -> f64 {
        (0..lambda as u64).map(|i| self.gamma_i(i, j)).sum()
    }

    /// Autocorrelations `|sum_{0 <= n, n+h < g} e(alpha_i(n+h) - alpha_i(n))|^2`
    /// for `h = 0..g-1`.
    pub fn autocorrelation(&self, i: u64) -> Vec<f64> {
        let g = self.g() as u32;
        let vals: Vec<Complex64> = (0..g).map(|d| e(self.seed.eval_frac(i, d))).collect();
        (0..g as usize)
            .map(|h| {
                (0..g as usize - h)
                    .map(|n| vals[n + h] * vals[n].conj())
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect()
    }

    /// `Theta_i(alpha)`.
    pub fn theta_i(&self, i: u64) -> f64 {
        let gf = self.g() as f64;
        let corr: f64 = self.autocorrelation(i).iter().skip(1).sum();
        let x = 2.0 / (gf * gf * (gf - 1.0)) * corr;
        (1.0 - 1.0 / gf) * one_minus_sqrt_one_minus(x)
    }

    /// `Psi_i(t, R, S)`; `R` and `S` must divide `g`.
    pub fn psi(&self, i: u64, t: f64, r_div: u64, s_div: u64) -> Result<f64> {
        let g = self.g();
        for (what, v) in [("R", r_div), ("S", s_div)] {
            if v == 0 || !g.is_multiple_of(v) {
                return Err(Error::NotADivisor { what, value: v, g });
            }
        }
        let rs = (r_div * s_div) as f64;
        let gf = g as f64;
        let mut acc = 0.0;
        for r in 0..r_div {
            let base = (t + r as f64) / rs;
            let outer = self.phi(i + 1, 0, gf * base);
            let inner: f64 = (0..s_div)
                .map(|s| self.phi(i, 0, base + s as f64 / s_div as f64))
                .sum();
            acc += outer * inner;
        }
        Ok(acc / (gf * gf))
    }

    fn check_l1_args(&self, lambda: u32, k: u64, delta: u32) -> Result<u128> {
        let g = self.g();
        if k == 0 {
            return Err(Error::Precondition("k must be positive".into()));
        }
        if delta > lambda {
            return Err(Error::Precondition(format!(
                "delta = {delta} exceeds lambda = {lambda}"
            )));
        }
        if k.is_multiple_of(g) {
            return Err(Error::BaseDividesK { g, k });
        }
        let big = self
            .ctx
            .pow(lambda as usize)
            .ok_or_else(|| Error::Precondition("g^lambda exceeds 128 bits".into()))?;
        let modulus = (k as u128) * self.ctx.pow_exact(delta as usize);
        if big % modulus != 0 {
            return Err(Error::ModulusNotDividing { k, delta, lambda });
        }
        Ok(modulus)
    }

    /// Right-hand side of the L1 moment bound:
    /// `g (g^lambda / (k g^delta))^eta~ |F_delta^[j+lambda-delta]((a+beta)/g^delta)|`.
    pub fn l1_moment_rhs(
        &self,
        lambda: u32,
        j: u64,
        k: u64,
        delta: u32,
        a: i64,
        beta: f64,
    ) -> Result<f64> {
        let modulus = self.check_l1_args(lambda, k, delta)?;
        let ratio = self.ctx.pow_exact(lambda as usize) as f64 / modulus as f64;
        let gd = self.ctx.pow_exact(delta as usize);
        let top = self.f_abs_product_freq(
            delta,
            j + (lambda - delta) as u64,
            Freq::offset(a as i128, beta, gd),
        );
        Ok(self.g() as f64 * ratio.powf(self.constants.eta_tilde) * top)
    }

    /// `sum_{h < g^lambda, h = a mod k g^delta} |F_lambda^[j]((h + beta)/g^lambda)|`
    /// together with its bound.
    pub fn l1_moment(
        &self,
        lambda: u32,
        j: u64,
        k: u64,
        delta: u32,
        a: i64,
        beta: f64,
    ) -> Result<L1Moment> {
        let modulus = self.check_l1_args(lambda, k, delta)?;
        let big = self.ctx.pow_exact(lambda as usize);
        let start = (a as i128).rem_euclid(modulus as i128) as u128;
        let mut lhs = 0.0;
        let mut h = start;
        while h < big {
            lhs += self.f_abs_product_freq(lambda, j, Freq::offset(h as i128, beta, big));
            h += modulus;
        }
        let rhs = self.l1_moment_rhs(lambda, j, k, delta, a, beta)?;
        Ok(L1Moment { lhs, rhs })
    }

    /// `sum_{M <= m <= 2M} sum_{0 <= k < m, (k, m) = 1} |F_lambda^[j](k/m)|`.
    pub fn hybrid_sum(&self, lambda: u32, j: u64, big_m: f64) -> f64 {
        let lo = big_m.ceil().max(1.0) as u64;
        let hi = (2.0 * big_m).floor() as u64;
        let mut acc = 0.0;
        for m in lo..=hi {
            for k in 0..m {
                if k.gcd(&m) == 1 {
                    acc += self.f_abs_product_freq(lambda, j, Freq::rational(k as i128, m as u128));
                }
            }
        }
        acc
    }

    /// The two-branch shape the hybrid sum is measured against, with
    /// `mu = [log M / log g]`.
    pub fn hybrid_shape(&self, lambda: u32, j: u64, big_m: f64) -> f64 {
        let g = self.g();
        let gf = g as f64;
        let mu = floor_log(big_m, g).max(0) as u32;
        let gap = self.constants.eta_gap;
        if 2 * mu <= lambda {
            let sigma = self.sigma(lambda - 2 * mu, j + 2 * mu as u64);
            big_m * gf.powf(-gap * 2.0 * mu as f64 - sigma)
        } else {
            big_m * big_m * gf.powf(-(0.5 + gap) * lambda as f64)
        }
    }
}

#[inline]
fn digit_sum_with(terms: &[Complex64], theta: f64) -> Complex64 {
    let step = e(-theta);
    let mut w = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        acc += t * w;
        w *= step;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::{random_seed, reverse_seed, sod_seed, zero_seed};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn es(seed: Seed) -> ExpSumContext {
        ExpSumContext::new(seed).unwrap()
    }

    #[test]
    fn phi_trivial_values() {
        for g in [2u64, 3, 10] {
            let z = es(zero_seed(g));
            assert!((z.phi(3, 1, 0.0) - g as f64).abs() < 1e-12);
        }
        assert!(es(zero_seed(2)).phi(0, 0, 0.5) < 1e-15);
    }

    #[test]
    fn phi_zero_seed_geometric_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in [2u64, 3, 7, 10] {
            let z = es(zero_seed(g));
            for _ in 0..100 {
                let b: f64 = rng.gen_range(-3.0..3.0);
                let s = (std::f64::consts::PI * b).sin();
                if s.abs() < 1e-6 {
                    continue;
                }
                let closed = ((std::f64::consts::PI * g as f64 * b).sin() / s).abs();
                assert!((z.phi(0, 0, b) - closed).abs() < 1e-9, "g={g} b={b}");
            }
        }
    }

    #[test]
    fn f_trivial_values() {
        let r = es(random_seed(3, 2));
        assert_eq!(r.f_direct(0, 4, 0.3).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(r.f_abs_product(0, 4, 0.3), 1.0);
        let z = es(zero_seed(3));
        for h in 1..27i128 {
            let v = z.f_direct_freq(3, 0, Freq::rational(h, 27)).unwrap();
            assert!(v.norm() < 1e-14, "h={h}");
        }
        assert!((es(zero_seed(5)).f_abs_product(6, 2, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn direct_respects_budget() {
        let z = es(zero_seed(10)).with_direct_budget(1000);
        assert!(z.f_direct(3, 0, 0.1).is_ok());
        assert!(matches!(
            z.f_direct(4, 0, 0.1),
            Err(Error::CostBudget { .. })
        ));
    }

    #[test]
    fn product_formula_and_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for g in [2u64, 3, 10] {
            for seed in [
                zero_seed(g),
                sod_seed(g, 0.3),
                reverse_seed(g, 7, 0.1),
                random_seed(g, 9),
            ] {
                let s = es(seed);
                let lmax = if g == 10 { 4 } else { 8 };
                for _ in 0..20 {
                    let lambda = rng.gen_range(1..=lmax);
                    let j = rng.gen_range(0..3);
                    let beta: f64 = rng.gen();
                    let d = s.f_direct(lambda, j, beta).unwrap().norm();
                    let p = s.f_abs_product(lambda, j, beta);
                    assert!((d - p).abs() < 1e-10, "{} {d} {p}", s.seed().label());
                    let complex = s.f_product(lambda, j, Freq::from_f64(beta));
                    assert!((complex.norm() - p).abs() < 1e-12);
                    // recursion through the top digit
                    let rec = s.f_abs_product_freq(
                        lambda - 1,
                        j + 1,
                        Freq::from_f64(beta).times(g as u128),
                    ) * s.phi(j, 0, beta)
                        / g as f64;
                    assert!((rec - p).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn large_lambda_stays_finite() {
        let s = es(random_seed(3, 5));
        let v = s.f_abs_product(100_000, 0, 0.123_456_789);
        assert!(v.is_finite() && (0.0..=1.0).contains(&v));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let s = es(random_seed(3, 1));
        for &b in &[0.1, 0.37, 0.81] {
            let h = 1e-6;
            let fp = s.f_product(5, 1, Freq::from_f64(b + h));
            let fm = s.f_product(5, 1, Freq::from_f64(b - h));
            let fd = (fp - fm) / (2.0 * h);
            let an = s.f_derivative(5, 1, b);
            assert!((fd - an).norm() < 1e-4 * (1.0 + an.norm()), "{fd} {an}");
        }
    }

    #[test]
    fn offset_grid_matches_pointwise() {
        let s = es(random_seed(3, 4));
        let grid = s.abs_f_offset_grid(4, 2, 0.3).unwrap();
        assert_eq!(grid.len(), 81);
        for (h, v) in grid.iter().enumerate() {
            let p = s.f_abs_product_freq(4, 2, Freq::offset(h as i128, 0.3, 81));
            assert!((v - p).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(es(zero_seed(5)).gamma_i(2, 1), 0.0);
        for g in [2u64, 3, 10] {
            let s = es(sod_seed(g, 1.0 / (g as f64 - 1.0)));
            assert!(s.gamma_i(0, 0) < 1e-20);
        }
        // reverse seed, g = 2, L = 10, a = 1/3, i = 3: only (m, n) = (0, 1)
        let s = es(reverse_seed(2, 10, 1.0 / 3.0));
        let diff = (2.0 * 2f64.powi(10 - 4) - 2f64.powi(10 - 5)) / 3.0;
        let expected = 2.0 * LN_2 / (16.0 * LN_2 * LN_2) * dist(diff).powi(2);
        assert!((s.gamma_i(3, 0) - expected).abs() < 1e-15);
    }

    #[test]
    fn gamma_and_sigma_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [2u64, 3, 5, 10] {
            for key in 0..20 {
                let s = es(random_seed(g, key));
                for i in 0..10 {
                    let v = s.gamma_i(i, rng.gen_range(0..5));
                    assert!((0.0..gamma_ceiling(g)).contains(&v));
                    assert!(v < 0.05);
                }
                let mut prev = 0.0;
                for lambda in 0..12u32 {
                    let sg = s.sigma(lambda, 1);
                    assert!(sg >= prev && sg <= lambda as f64 / 20.0);
                    prev = sg;
                }
            }
        }
    }

    #[test]
    fn sigma_shift_identity() {
        let s = es(random_seed(3, 7));
        for lambda in 1..10u32 {
            for j in 0..4 {
                let lhs = s.sigma(lambda, j) - s.sigma(lambda - 1, j + 1);
                assert!((lhs - s.gamma_i(0, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn theta_lower_bound_values() {
        let t2 = theta_lower_bound(2);
        assert!((t2 - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((t2 - 0.146_446_6).abs() < 1e-7);
        assert!(t2 > 1.0 / 8.0);
        for g in 2..=1000u64 {
            // g^3 Theta > 1 evaluated without cancellation
            assert!(theta_lower_bound(g) * (g as f64).powi(3) > 1.0, "g={g}");
        }
        let z = es(zero_seed(2));
        assert!((z.theta_i(0) - t2).abs() < 1e-15);
    }

    #[test]
    fn theta_dominates_lower_bound_for_random_seeds() {
        for g in [2u64, 3, 5] {
            for key in 0..1000 {
                let s = es(random_seed(g, key));
                assert!(s.theta_i(key % 7) >= theta_lower_bound(g) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn eta_values() {
        let first = 0.5 - (1.5f64).ln() / (2.0 * LN_2);
        assert!(first > 0.207_518_7 && first < 0.207_518_8);
        let expected = 0.5 + (1.0 - theta_lower_bound(2)).ln() / (4.0 * LN_2);
        assert!((eta_tilde(2) - expected).abs() < 1e-15);
        assert!((eta_tilde(2) - 0.442_873).abs() < 1e-4);
        for g in 2..=1000u64 {
            let upper_gap = 1.0 / (4.0 * (g as f64).powi(3) * (g as f64).ln());
            assert!(eta_gap(g) > upper_gap, "g={g}");
            assert!(eta_tilde(g) > 0.207_518_7);
        }
        let c = Constants::for_base(10);
        assert!((c.omega - LN_2 / 10f64.ln() * (0.5 - c.eta_tilde)).abs() < 1e-15);
    }

    #[test]
    fn psi_single_term_and_divisor_check() {
        let s = es(random_seed(6, 3));
        let v = s.psi(1, 0.37, 1, 1).unwrap();
        let direct = s.phi(2, 0, 6.0 * 0.37) * s.phi(1, 0, 0.37) / 36.0;
        assert!((v - direct).abs() < 1e-14 && v <= 1.0);
        assert!(matches!(
            s.psi(0, 0.1, 4, 1),
            Err(Error::NotADivisor { .. })
        ));
    }

    #[test]
    fn l1_moment_trivial_cases() {
        let s = es(random_seed(6, 2));
        let m = s.l1_moment(3, 1, 1, 3, 5, 0.25).unwrap();
        let single = s.f_abs_product_freq(3, 1, Freq::offset(5, 0.25, 216));
        assert!((m.lhs - single).abs() < 1e-15);
        assert!((m.rhs - 6.0 * single).abs() < 1e-12);
        let z = es(zero_seed(6));
        let m = z.l1_moment(4, 0, 1, 0, 0, 0.0).unwrap();
        assert!((m.lhs - 1.0).abs() < 1e-12 && m.lhs <= m.rhs);
    }

    #[test]
    fn l1_moment_rejects_bad_arguments() {
        let s = es(zero_seed(6));
        assert!(matches!(
            s.l1_moment(3, 0, 6, 1, 0, 0.0),
            Err(Error::BaseDividesK { .. })
        ));
        assert!(matches!(
            s.l1_moment(3, 0, 5, 1, 0, 0.0),
            Err(Error::ModulusNotDividing { .. })
        ));
        assert!(matches!(
            s.l1_moment(2, 0, 1, 3, 0, 0.0),
            Err(Error::Precondition(_))
        ));
        assert!(s.l1_moment(3, 0, 4, 1, 0, 0.0).is_ok());
    }

    #[test]
    fn hybrid_zero_seed_geometric_oracle() {
        // closed form: |F_lambda(k/m)| = g^-lambda |(e(-k g^lambda/m) - 1)/(e(-k/m) - 1)|
        for g in [2u64, 3] {
            let z = es(zero_seed(g));
            for lambda in [3u32, 6] {
                for big_m in [1.0, 2.0, 3.5, 8.0] {
                    let lo = (big_m as f64).ceil() as u64;
                    let hi = (2.0 * big_m as f64).floor() as u64;
                    let gl = (g as f64).powi(lambda as i32);
                    let mut oracle = 0.0;
                    for m in lo..=hi {
                        for k in 0..m {
                            if k.gcd(&m) != 1 {
                                continue;
                            }
                            oracle += if k == 0 {
                                1.0
                            } else {
                                let num_phase = ((k as u128 * g.pow(lambda) as u128) % m as u128)
                                    as f64
                                    / m as f64;
                                let num = e(-num_phase) - 1.0;
                                let den = e(-(k as f64) / m as f64) - 1.0;
                                (num / den).norm() / gl
                            };
                        }
                    }
                    let v = z.hybrid_sum(lambda, 0, big_m);
                    assert!(
                        (v - oracle).abs() < 1e-10,
                        "g={g} lambda={lambda} M={big_m}: {v} vs {oracle}"
                    );
                }
            }
        }
        let s = es(random_seed(3, 1));
        assert!(
            (s.hybrid_sum(5, 2, 1.0) - (s.f_abs_product(5, 2, 0.0) + s.f_abs_product(5, 2, 0.5)))
                .abs()
                < 1e-12
        );
    }
}
