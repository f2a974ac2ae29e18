//! Verifier sweeps: each suite walks a declared parameter grid and emits one
//! [`BoundReport`] per check.
//!
//! Every grid cell draws from its own ChaCha8 stream seeded by
//! `(rng_seed, suite, cell index)`, and cells are evaluated independently, so
//! the output does not depend on the number of worker threads.

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use crate::arith::PrimeTable;
use crate::config::{CalibrationEntry, CalibrationTable, RunConfig, RNG_ALGORITHM};
use crate::digits::{dist, e, Freq};
use crate::error::{Error, Result};
use crate::expsum::{gamma_ceiling, ExpSumContext};
use crate::params;
use crate::primesum::{
    prime_exp_sum, sin_sum_check, truncation_set_size, type_i_sum, type_ii_sum, vdc_lhs_rhs,
    Coefficients, TypeIIParams, TypeIParams,
};
use crate::report::BoundReport;
use crate::revcount::{i0_landing, sigma_growth, sigma_lower_blocks};
use crate::seeds::{mix64, random_seed, reverse_seed_rational, sod_seed, zero_seed, Seed};

/// Suites with exact (explicit-constant) checks.
pub const EXACT_SUITES: &[&str] = &[
    "product-formula",
    "linf",
    "pair-bound",
    "consecutive",
    "l2-orthogonality",
    "l4-identity",
    "sum-cleanup",
    "l1-moment",
    "psi",
    "gallagher",
    "sigma-monotone",
    "vdc",
    "sin-sum",
    "truncation",
    "vaughan",
    "vaughan-route",
    "reverse-blocks",
];

/// Suites measured against a calibrated constant.
pub const CALIBRATED_SUITES: &[&str] = &[
    "type-i",
    "type-ii",
    "prime-sum",
    "hybrid",
    "truncation-size",
];

pub fn all_suites() -> impl Iterator<Item = &'static str> {
    EXACT_SUITES.iter().chain(CALIBRATED_SUITES).copied()
}

/// Grid overrides coming from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteOptions {
    pub bases: Option<Vec<u64>>,
    pub lambda_max: Option<u32>,
    pub samples: Option<usize>,
    pub limit: Option<u64>,
    pub seed: Option<String>,
}

/// The per-cell generator.
pub fn cell_rng(rng_seed: u64, suite: &str, cell: u64) -> ChaCha8Rng {
    let tag = suite.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(mix64(rng_seed ^ mix64(tag ^ mix64(cell))))
}

/// Evaluate `cells` in parallel, concatenating reports in cell order.
fn run_cells<T, F>(rng_seed: u64, suite: &str, cells: Vec<T>, f: F) -> Result<Vec<BoundReport>>
where
    T: Send + Sync,
    F: Fn(&T, &mut ChaCha8Rng) -> Result<Vec<BoundReport>> + Sync + Send,
{
    let out: Vec<Result<Vec<BoundReport>>> = cells
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = cell_rng(rng_seed, suite, k as u64);
            f(c, &mut rng)
        })
        .collect();
    let mut reports = Vec::new();
    for r in out {
        reports.extend(r?);
    }
    Ok(reports)
}

fn es(seed: Seed) -> ExpSumContext {
    ExpSumContext::new(seed).expect("bases come from validated grids")
}

/// One seed from each family, parameters drawn from `rng`; `family` cycles
/// through zero, sod, reverse and random.
fn draw_seed(g: u64, family: usize, rng: &mut ChaCha8Rng) -> Seed {
    match family % 4 {
        0 => zero_seed(g),
        1 => sod_seed(g, rng.gen::<f64>()),
        2 => {
            let q = rng.gen_range(2..=60u64);
            reverse_seed_rational(g, rng.gen_range(1..=16), rng.gen_range(1..q as i64), q)
        }
        _ => random_seed(g, rng.gen()),
    }
}

fn parse_seed(spec: &Option<String>, g: u64, family: usize, rng: &mut ChaCha8Rng) -> Result<Seed> {
    match spec {
        Some(s) => Seed::parse(s, g),
        None => Ok(draw_seed(g, family, rng)),
    }
}

fn seed_param(s: &Seed) -> Value {
    Value::String(s.label().to_string())
}

fn default_lambda_max(g: u64) -> u32 {
    match g {
        2 | 3 => 10,
        _ => 6,
    }
}

/// Run a suite. Calibrated suites compare against `cfg.calibration`.
pub fn run_suite(name: &str, cfg: &RunConfig, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    if cfg.rng != RNG_ALGORITHM {
        return Err(Error::Precondition(format!(
            "unsupported rng `{}`",
            cfg.rng
        )));
    }
    let seed = cfg.rng_seed;
    match name {
        "product-formula" => product_formula(seed, opts, false),
        "linf" => product_formula(seed, opts, true),
        "pair-bound" => pair_bound(seed, opts),
        "consecutive" => consecutive(seed, opts),
        "l2-orthogonality" => l2_orthogonality(seed, opts),
        "l4-identity" => l4_identity(seed, opts),
        "sum-cleanup" => sum_cleanup(seed, opts),
        "l1-moment" => l1_moment(seed, opts),
        "psi" => psi(seed, opts),
        "gallagher" => gallagher(seed, opts),
        "sigma-monotone" => sigma_monotone(seed, opts),
        "vdc" => vdc(seed, opts),
        "sin-sum" => sin_sum(seed, opts),
        "truncation" => truncation(seed, opts),
        "vaughan" => vaughan(opts),
        "vaughan-route" => vaughan_route(seed, opts),
        "reverse-blocks" => reverse_blocks(seed, opts),
        _ if CALIBRATED_SUITES.contains(&name) => {
            let ratios = calibrated_ratios(name, seed, opts)?;
            let c_cal = *cfg.calibration.get(name).ok_or_else(|| {
                Error::Precondition(format!("no calibration constant for `{name}`"))
            })?;
            Ok(ratios
                .into_iter()
                .map(|(mut params, ratio)| {
                    params.insert("c_cal".into(), c_cal.into());
                    BoundReport::predicate(name, ratio, c_cal, ratio <= c_cal + 1e-9, params)
                })
                .collect())
        }
        _ => Err(Error::UnknownSuite(name.to_string())),
    }
}

/// `|F_direct| = |F|` from the product formula, the top-digit recursion, and
/// (with `linf`) the explicit bound `|F| <= g^(1/20 - sigma)`.
fn product_formula(seed: u64, opts: &SuiteOptions, linf: bool) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3, 10]);
    let per_base = opts.samples.unwrap_or(1000);
    let cells: Vec<(u64, usize)> = bases
        .iter()
        .flat_map(|&g| (0..per_base).map(move |k| (g, k)))
        .collect();
    run_cells(seed, "product-formula", cells, |&(g, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let lmax = opts.lambda_max.unwrap_or(default_lambda_max(g));
        let lambda = rng.gen_range(0..=lmax);
        let j = rng.gen_range(0..4u64);
        let beta: f64 = rng.gen_range(-2.0..2.0);
        let p = params! {"g" => g, "lambda" => lambda, "j" => j, "beta" => beta, "seed" => seed_param(s.seed())};
        let product = s.f_abs_product(lambda, j, beta);
        if linf {
            let rhs = (g as f64).powf(0.05 - s.sigma(lambda, j));
            return Ok(vec![BoundReport::new("linf", product, rhs, p)]);
        }
        let direct = s.f_direct(lambda, j, beta)?.norm();
        let mut out = vec![BoundReport::equality(
            "product-formula",
            direct,
            product,
            1e-10,
            p.clone(),
        )];
        if lambda >= 1 {
            let rec =
                s.f_abs_product_freq(lambda - 1, j + 1, Freq::from_f64(beta).times(g as u128))
                    * s.phi(j, 0, beta)
                    / g as f64;
            out.push(BoundReport::equality("recursion", rec, product, 1e-12, p));
        }
        Ok(out)
    })
}

fn pair_bound(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3, 5, 10]);
    let n = opts.samples.unwrap_or(200);
    let cells: Vec<(u64, usize)> = bases
        .iter()
        .flat_map(|&g| (0..n).map(move |k| (g, k)))
        .collect();
    run_cells(seed, "pair-bound", cells, |&(g, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let (i, j) = (rng.gen_range(0..12u64), rng.gen_range(0..4u64));
        let beta: f64 = rng.gen();
        let phi = s.phi(i, j, beta);
        let mut worst = f64::INFINITY;
        let mut arg = (0, 0);
        for m in 0..g as u32 {
            for n in m + 1..g as u32 {
                let d = s.seed().eval_frac(i + j, m)
                    - s.seed().eval_frac(i + j, n)
                    - beta * (m as f64 - n as f64);
                let rhs = g as f64 * (-(8.0 / g as f64) * dist(d).powi(2)).exp();
                if rhs < worst {
                    worst = rhs;
                    arg = (m, n);
                }
            }
        }
        let p = params! {"g" => g, "i" => i, "j" => j, "beta" => beta, "m" => arg.0, "n" => arg.1, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new("pair-bound", phi, worst, p)])
    })
}

fn consecutive(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3, 5, 10]);
    let n = opts.samples.unwrap_or(200);
    let cells: Vec<(u64, usize)> = bases
        .iter()
        .flat_map(|&g| (0..n).map(move |k| (g, k)))
        .collect();
    run_cells(seed, "consecutive", cells, |&(g, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let (i, j) = (rng.gen_range(0..12u64), rng.gen_range(0..4u64));
        let beta: f64 = rng.gen();
        let b = Freq::from_f64(beta);
        let gi = (g as u128).pow(i as u32);
        let lhs = (s.phi(i, j, b.times(gi).value())
            * s.phi(i + 1, j, b.times(gi * g as u128).value()))
        .sqrt();
        let rhs = (g as f64).powf(1.0 - s.gamma_i(i, j));
        let p =
            params! {"g" => g, "i" => i, "j" => j, "beta" => beta, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new("consecutive", lhs, rhs, p)])
    })
}

fn l2_orthogonality(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 6, 10, 12]);
    let n = opts.samples.unwrap_or(20);
    let mut cells = Vec::new();
    for &g in &bases {
        for r in (1..=g).filter(|r| g % r == 0) {
            for k in 0..n {
                cells.push((g, r, k));
            }
        }
    }
    run_cells(seed, "l2-orthogonality", cells, |&(g, r, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let i = rng.gen_range(0..10u64);
        let beta: f64 = rng.gen();
        let a = loop {
            let a = rng.gen_range(-50..50i64);
            if a.unsigned_abs().gcd(&r) == 1 {
                break a;
            }
        };
        let lhs: f64 = (0..r)
            .map(|t| s.phi(i, 0, beta + (a * t as i64) as f64 / r as f64).powi(2))
            .sum();
        let p = params! {"g" => g, "R" => r, "a" => a, "i" => i, "beta" => beta, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new(
            "l2-orthogonality",
            lhs,
            (g * g) as f64,
            p,
        )])
    })
}

fn l4_identity(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3, 5, 10]);
    let n = opts.samples.unwrap_or(50);
    let cells: Vec<(u64, usize)> = bases
        .iter()
        .flat_map(|&g| (0..n).map(move |k| (g, k)))
        .collect();
    run_cells(seed, "l4-identity", cells, |&(g, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let i = rng.gen_range(0..10u64);
        let u = rng.gen_range(2 * g - 1..=4 * g);
        let beta: f64 = rng.gen();
        let lhs: f64 = (0..u)
            .map(|t| s.phi(i, 0, beta + t as f64 / u as f64).powi(4))
            .sum();
        // |h| < g: h and -h contribute equally
        let corr = s.autocorrelation(i);
        let rhs = u as f64 * (corr[0] + 2.0 * corr[1..].iter().sum::<f64>());
        let p =
            params! {"g" => g, "U" => u, "i" => i, "beta" => beta, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::equality(
            "l4-identity",
            lhs,
            rhs,
            1e-8,
            p,
        )])
    })
}

fn sum_cleanup(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3]);
    let lmax = opts.lambda_max.unwrap_or(6);
    let n = opts.samples.unwrap_or(4);
    let mut cells = Vec::new();
    for &g in &bases {
        for l in 0..=lmax {
            for k in 0..n {
                cells.push((g, l, k));
            }
        }
    }
    run_cells(seed, "sum-cleanup", cells, |&(g, l, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let j = rng.gen_range(0..3u64);
        let beta: f64 = rng.gen();
        let b = Freq::from_f64(beta);
        let top = g.pow(l);
        let table = crate::seeds::SeedTable::new(s.seed(), l, j);
        let gl: Vec<f64> = (0..=l)
            .map(|lam| (g as f64).powi(lam as i32) * s.f_abs_product(lam, j, beta))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut worst: Option<BoundReport> = None;
        let mut violations = 0u64;
        for x in 1..=top {
            acc += e(table.f_frac(x - 1) - b.times_value(x - 1));
            let mut lam_max = 0usize;
            while g.pow(lam_max as u32 + 1) <= x {
                lam_max += 1;
            }
            let rhs = (g - 1) as f64 * gl[..=lam_max].iter().sum::<f64>();
            let rep = BoundReport::new(
                "sum-cleanup",
                acc.norm(),
                rhs,
                params! {"g" => g, "L" => l, "j" => j, "x" => x, "beta" => beta, "seed" => seed_param(s.seed())},
            );
            violations += !rep.pass as u64;
            if worst.as_ref().is_none_or(|w| rep.ratio > w.ratio) {
                worst = Some(rep);
            }
        }
        let mut rep = worst.expect("x ranges over at least one value");
        rep.params.insert("violations".into(), violations.into());
        rep.pass = violations == 0;
        Ok(vec![rep])
    })
}

/// The L1 moment over all residues `a mod k g^delta`, using one offset grid of
/// `|F_lambda((h + beta)/g^lambda)|` per `(lambda, beta)`; one report per
/// `(lambda, k, delta, beta)` carrying the worst residue.
fn l1_moment(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 6]);
    let lmax = opts.lambda_max.unwrap_or(8);
    let betas = opts.samples.unwrap_or(20);
    let mut cells = Vec::new();
    for &g in &bases {
        for lambda in 0..=lmax {
            for family in [2usize, 3] {
                for b in 0..betas {
                    cells.push((g, lambda, family, b));
                }
            }
        }
    }
    run_cells(seed, "l1-moment", cells, |&(g, lambda, family, _), rng| {
        let s = es(parse_seed(&opts.seed, g, family, rng)?);
        let j = rng.gen_range(0..3u64);
        let beta: f64 = rng.gen();
        let eta = s.constants().eta_tilde;
        let grid = s.abs_f_offset_grid(lambda, j, beta)?;
        let big = grid.len() as u64;
        let mut out = Vec::new();
        let total: f64 = grid.iter().sum();
        out.push(BoundReport::new(
            "l1-moment-pure",
            total,
            (g as f64).powf(eta * lambda as f64 + 1.0),
            params! {"g" => g, "lambda" => lambda, "j" => j, "beta" => beta, "seed" => seed_param(s.seed())},
        ));
        let tops: Vec<Vec<f64>> = (0..=lambda)
            .map(|d| s.abs_f_offset_grid(d, j + (lambda - d) as u64, beta))
            .collect::<Result<_>>()?;
        for k in (1..=5u64).filter(|k| k % g != 0 && big.is_multiple_of(*k)) {
            // residue sums at the finest admissible level, folded down one digit at a time
            let mut delta = 0;
            while big.is_multiple_of(k * g.pow(delta + 1)) && delta < lambda {
                delta += 1;
            }
            let mut sums = vec![0.0f64; (k * g.pow(delta)) as usize];
            let width = sums.len();
            for (h, v) in grid.iter().enumerate() {
                sums[h % width] += v;
            }
            let mut levels = vec![(delta, sums)];
            while delta > 0 {
                delta -= 1;
                let prev = &levels.last().expect("nonempty").1;
                let width = (k * g.pow(delta)) as usize;
                let mut next = vec![0.0f64; width];
                for (a, v) in prev.iter().enumerate() {
                    next[a % width] += v;
                }
                levels.push((delta, next));
            }
            levels.reverse();
            for (delta, sums) in levels {
                let gd = g.pow(delta) as usize;
                let modulus = sums.len() as u64;
                let scale = g as f64 * (big as f64 / modulus as f64).powf(eta);
                let mut violations = 0u64;
                let mut worst = (f64::NEG_INFINITY, 0u64, 0.0, 0.0);
                for (a, &lhs) in sums.iter().enumerate() {
                    let rhs = scale * tops[delta as usize][a % gd];
                    let pass =
                        lhs <= rhs * (1.0 + crate::report::REL_SLACK) + crate::report::ABS_SLACK;
                    violations += !pass as u64;
                    let r = if rhs > 0.0 {
                        lhs / rhs
                    } else if lhs > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    if r > worst.0 {
                        worst = (r, a as u64, lhs, rhs);
                    }
                }
                let p = params! {
                    "g" => g, "lambda" => lambda, "j" => j, "k" => k, "delta" => delta, "beta" => beta,
                    "a" => worst.1, "residues" => modulus, "violations" => violations, "seed" => seed_param(s.seed())
                };
                let mut rep = BoundReport::new("l1-moment", worst.2, worst.3, p);
                rep.pass = violations == 0;
                out.push(rep);
            }
        }
        Ok(out)
    })
}

fn divisors(g: u64) -> Vec<u64> {
    (1..=g).filter(|d| g.is_multiple_of(*d)).collect()
}

/// `Psi` against its three bounds over every divisor pair `(R, S)` of `g`.
fn psi(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 6, 10, 12]);
    let n = opts.samples.unwrap_or(100);
    let mut cells = Vec::new();
    for &g in &bases {
        for r in divisors(g) {
            for s in divisors(g) {
                if r.gcd(&(g / s)) == 1 {
                    cells.push((g, r, s));
                }
            }
        }
    }
    run_cells(seed, "psi", cells, |&(g, r, s_div), rng| {
        let mut out = Vec::new();
        for k in 0..n {
            let s = es(parse_seed(&opts.seed, g, 1 + k % 3, rng)?);
            let i = rng.gen_range(0..10u64);
            let t: f64 = rng.gen_range(0.0..(r * s_div) as f64);
            let v = s.psi(i, t, r, s_div)?;
            let rs = (r * s_div) as f64;
            let p = params! {"g" => g, "R" => r, "S" => s_div, "i" => i, "t" => t, "seed" => seed_param(s.seed())};
            let general = (s_div as f64 / g as f64) * (g as f64 / rs).ceil() * rs;
            out.push(BoundReport::new("psi-general", v * v, general, p.clone()));
            if r >= 2 && s_div != g {
                out.push(BoundReport::new(
                    "psi-two-thirds",
                    v * v,
                    2.0 / 3.0 * rs,
                    p.clone(),
                ));
            }
            if r >= 2 && s_div == g {
                out.push(BoundReport::new(
                    "psi-theta",
                    v * v,
                    rs * (1.0 - s.theta_i(i)),
                    p.clone(),
                ));
            }
            if r >= 2 {
                out.push(BoundReport::new(
                    "psi-eta",
                    v,
                    rs.powf(s.constants().eta_tilde),
                    p,
                ));
            }
        }
        Ok(out)
    })
}

/// Sum of `|F|` over Farey points against `(1/delta) int |F| + (1/2) int |F'|`
/// with Riemann sums of step `1e-5`. `slack` bounds the quadrature error:
/// `step (int |F'| / delta + max |F''| / 2)` with `max |F''| <= (2 pi)^2 g^(2 lambda) / 3`.
fn gallagher(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3]);
    let lmax = opts.lambda_max.unwrap_or(8);
    let mut cells = Vec::new();
    for &g in &bases {
        for lambda in [2u32, 5, lmax] {
            for big_m in [1u64, 4, 16] {
                cells.push((g, lambda, big_m));
            }
        }
    }
    run_cells(seed, "gallagher", cells, |&(g, lambda, big_m), rng| {
        let s = es(parse_seed(&opts.seed, g, 3, rng)?);
        let j = rng.gen_range(0..3u64);
        let step = 1e-5;
        let n = (1.0 / step) as usize;
        let (mut int_f, mut int_df) = (0.0, 0.0);
        for k in 0..n {
            let b = (k as f64 + 0.5) * step;
            int_f += s.f_product(lambda, j, Freq::from_f64(b)).norm();
            int_df += s.f_derivative(lambda, j, b).norm();
        }
        int_f *= step;
        int_df *= step;
        let delta = 1.0 / (4.0 * (big_m * big_m) as f64);
        let mut lhs = 0.0;
        for m in big_m..=2 * big_m {
            for k in (0..m).filter(|k| k.gcd(&m) == 1) {
                lhs += s.f_abs_product_freq(lambda, j, Freq::rational(k as i128, m as u128));
            }
        }
        let rhs = int_f / delta + 0.5 * int_df;
        let max_dd = (2.0 * PI).powi(2) * (g as f64).powi(2 * lambda as i32) / 3.0;
        let slack = step * (int_df / delta + 0.5 * max_dd);
        let p = params! {"g" => g, "lambda" => lambda, "j" => j, "M" => big_m, "slack" => slack, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new("gallagher", lhs, rhs + slack, p)])
    })
}

/// The three monotonicity statements for `sigma` and `kappa <= xi/20`.
fn sigma_monotone(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let bases = opts.bases.clone().unwrap_or_else(|| vec![2, 3, 10]);
    let lmax = opts.lambda_max.unwrap_or(24);
    let n = opts.samples.unwrap_or(12);
    let cells: Vec<(u64, usize)> = bases
        .iter()
        .flat_map(|&g| (0..n).map(move |k| (g, k)))
        .collect();
    run_cells(seed, "sigma-monotone", cells, |&(g, k), rng| {
        let s = es(parse_seed(&opts.seed, g, k, rng)?);
        let gf = g as f64;
        let ceiling = gamma_ceiling(g);
        let gap = s.constants().eta_gap;
        let j = rng.gen_range(0..4u64);
        let label = seed_param(s.seed());
        let mut out = Vec::new();
        let pred = |name: &str, lhs: f64, rhs: f64, p: Map<String, Value>| {
            BoundReport::new(name, lhs, rhs, p)
        };
        for lambda in 1..=lmax {
            let full = s.sigma(lambda, j);
            let shifted = s.sigma(lambda - 1, j + 1);
            let p = params! {"g" => g, "lambda" => lambda, "j" => j, "seed" => label.clone()};
            out.push(pred(
                "sigma-shift-lower",
                full - ceiling,
                shifted,
                p.clone(),
            ));
            out.push(pred("sigma-shift-upper", shifted, full, p));
        }
        for a in [LN_2 / gf.ln(), 2.0 * LN_2 / gf.ln()] {
            for lambda in [lmax / 2, lmax] {
                let f = |mu: u32| a * gap * mu as f64 + s.sigma(lambda - mu, j + mu as u64);
                for mu in 0..lambda {
                    let p = params! {"g" => g, "lambda" => lambda, "j" => j, "mu" => mu, "A" => a, "seed" => label.clone()};
                    out.push(pred("sigma-with-eta", f(mu), f(mu + 1), p));
                }
            }
        }
        for a in [ceiling, 2.0 * ceiling] {
            let f = |lambda: u32| a * lambda as f64 - s.sigma(lambda, j);
            for lambda in 0..lmax {
                let p = params! {"g" => g, "lambda" => lambda, "j" => j, "A" => a, "seed" => label.clone()};
                out.push(pred("sigma-with-lambda", f(lambda), f(lambda + 1), p));
            }
        }
        for xi in [0u32, 1, 3, lmax] {
            let kappa = s.sigma(xi, 0) / 10.0;
            let p = params! {"g" => g, "xi" => xi, "seed" => label.clone()};
            out.push(pred("kappa-xi", kappa, xi as f64 / 20.0, p));
        }
        Ok(out)
    })
}

fn vdc(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let n = opts.samples.unwrap_or(1000);
    run_cells(seed, "vdc", (0..n).collect(), |_, rng| {
        let len = rng.gen_range(1..=200usize);
        let r = rng.gen_range(1..=20usize);
        let z: Vec<Complex64> = (0..len)
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let (lhs, rhs) = vdc_lhs_rhs(&z, r);
        let scale: f64 = z.iter().map(|v| v.norm()).sum::<f64>().powi(2);
        let p = params! {"N" => len, "R" => r};
        Ok(vec![BoundReport::predicate(
            "vdc",
            lhs,
            rhs,
            lhs <= rhs + 1e-9 * scale.max(1.0),
            p,
        )])
    })
}

fn sin_sum(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let n = opts.samples.unwrap_or(1000);
    run_cells(seed, "sin-sum", (0..n).collect(), |_, rng| {
        let m = rng.gen_range(1..=500u64);
        let a = if rng.gen_bool(0.1) {
            0
        } else {
            rng.gen_range(-1000..=1000i64)
        };
        let b = if rng.gen_bool(0.1) {
            rng.gen_range(-3..=3) as f64
        } else {
            rng.gen_range(-5.0..5.0)
        };
        let big_m = 10f64.powf(rng.gen_range(-1.0..4.0));
        Ok(vec![sin_sum_check(a, m, b, big_m)])
    })
}

/// Truncation set containment over the small exhaustive grid.
fn truncation_cells(opts: &SuiteOptions) -> Vec<(u64, u64, u64, u64)> {
    let g = 2u64;
    let m_max = opts.limit.map(|v| v.min(16)).unwrap_or(16);
    let mut cells = Vec::new();
    for big_m in 1..=m_max {
        for big_n in 1..=128u64 {
            for big_r in (1..=8u64).filter(|r| r * r <= big_n) {
                let mr2 = big_m * big_r * big_r;
                let mut lambda = 1;
                while g.pow(lambda) <= mr2 {
                    lambda += 1;
                }
                cells.push((big_m, big_n, big_r, lambda as u64));
            }
        }
    }
    cells
}

fn truncation(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let cells = truncation_cells(opts);
    run_cells(
        seed,
        "truncation",
        cells,
        |&(big_m, big_n, big_r, lambda), rng| {
            let l = lambda as u32 + rng.gen_range(0..4u32);
            let s = es(parse_seed(&opts.seed, 2, 3, rng)?);
            let mut set = 0;
            let mut sup = 0;
            let mut contained = true;
            for r in 0..=big_r {
                let c = truncation_set_size(&s, big_m, big_n, big_r, r, l, lambda as u32)?;
                set += c.set;
                sup += c.superset;
                contained &= c.contained;
            }
            let p = params! {"M" => big_m, "N" => big_n, "R" => big_r, "L" => l, "lambda" => lambda, "seed" => seed_param(s.seed())};
            Ok(vec![BoundReport::predicate(
                "truncation",
                set as f64,
                sup as f64,
                contained,
                p,
            )])
        },
    )
}

fn vaughan(opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let limit = opts.limit.unwrap_or(10_000);
    let pt = PrimeTable::build(limit.max(2))?;
    let chunks: Vec<(u64, u64)> = (1..=limit)
        .step_by(1000)
        .map(|lo| (lo, (lo + 999).min(limit)))
        .collect();
    run_cells(0, "vaughan", chunks, |&(lo, hi), _| {
        let mut out = Vec::new();
        for n in lo..=hi {
            let lam = pt.mangoldt(n);
            let ln = (n as f64).ln();
            let mut worst = 0.0f64;
            let mut coeff_ok = true;
            for z in [2.0, 5.0, (n as f64).powf(0.25), 50.0] {
                let t = pt.vaughan_terms(n, z)?;
                worst = worst.max((t.total() - lam).abs());
                coeff_ok &= pt.c2(n, z).abs() <= ln + 1e-12 && pt.c3(n, z).abs() <= ln + 1e-12;
            }
            let p = params! {"n" => n};
            out.push(BoundReport::predicate(
                "vaughan",
                worst,
                1e-9,
                worst <= 1e-9,
                p.clone(),
            ));
            if !coeff_ok {
                out.push(BoundReport::predicate(
                    "vaughan-coefficients",
                    1.0,
                    0.0,
                    false,
                    p,
                ));
            }
        }
        Ok(out)
    })
}

/// The prime exponential sum directly and through Vaughan's identity.
fn vaughan_route(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let limit = opts.limit.unwrap_or(10_000);
    let pt = PrimeTable::build(limit.max(2))?;
    let mut cells = Vec::new();
    for g in opts.bases.clone().unwrap_or_else(|| vec![2, 10]) {
        for family in 0..4 {
            for x in [2u64, 97, limit / 10, limit] {
                cells.push((g, family, x));
            }
        }
    }
    run_cells(seed, "vaughan-route", cells, |&(g, family, x), rng| {
        let s = es(parse_seed(&opts.seed, g, family, rng)?);
        let mut l = 1;
        while (g as u128).pow(l) < x as u128 {
            l += 1;
        }
        let r = prime_exp_sum(&s, l, x, &pt, true)?;
        let total: Complex64 = r.vaughan.expect("requested").iter().sum();
        let p = params! {"g" => g, "L" => l, "x" => x, "seed" => seed_param(s.seed())};
        let diff = (total - r.s).norm();
        let tol = 1e-6 * r.s.norm().max(1.0);
        Ok(vec![BoundReport::predicate(
            "vaughan-route",
            diff,
            tol,
            diff <= tol,
            p,
        )])
    })
}

/// Landing of `g^i alpha` away from the integers and the block lower bound
/// for `sigma` of reverse seeds.
fn reverse_blocks(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let n = opts.samples.unwrap_or(10_000);
    let mut out = run_cells(seed, "reverse-landing", (0..n).collect(), |_, rng| {
        let g = rng.gen_range(2..=12u64);
        let alpha: f64 = rng.gen_range(1e-9..1.0);
        let (i0, v) = i0_landing(g, alpha)?;
        let floor = 1.0 / (g as f64 + 1.0);
        let p = params! {"g" => g, "alpha" => alpha, "i0" => i0};
        Ok(vec![BoundReport::predicate(
            "landing",
            v,
            floor,
            v >= floor - 1e-12,
            p,
        )])
    })?;
    let mut cells = Vec::new();
    for g in [2u64, 3, 10] {
        for q in [7u64, 11, 13, 17, 19, 23] {
            if q.gcd(&(g * (g * g - 1))) == 1 {
                cells.push((g, q));
            }
        }
    }
    out.extend(run_cells(seed, "reverse-blocks", cells, |&(g, q), rng| {
        let h = rng.gen_range(1..q as i64);
        let mut reps = Vec::new();
        for lambda in [0u32, 5, 10, 20] {
            reps.extend(sigma_lower_blocks(g, 20, lambda, h, q)?);
        }
        for lambda in [10u32, 20, 40] {
            reps.push(sigma_growth(g, 80, lambda, h, q)?);
        }
        Ok(reps)
    })?);
    Ok(out)
}

/// `(params, ratio)` for every cell of a calibrated suite's declared grid.
pub fn calibrated_ratios(
    name: &str,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<Vec<(Map<String, Value>, f64)>> {
    let reports = match name {
        "type-i" => calibrate_type_i(seed, opts)?,
        "type-ii" => calibrate_type_ii(seed, opts)?,
        "prime-sum" => calibrate_prime_sum(seed, opts)?,
        "hybrid" => calibrate_hybrid(seed, opts)?,
        "truncation-size" => calibrate_truncation(seed, opts)?,
        _ => return Err(Error::UnknownSuite(name.to_string())),
    };
    if reports.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(reports
        .into_iter()
        .map(|r| {
            let mut p = r.params;
            p.insert("lhs".into(), r.lhs.into());
            p.insert("shape".into(), r.rhs.into());
            (p, r.ratio)
        })
        .collect())
}

/// Reverse seeds `a = h/q` with `q` not dividing `g^L (g^2 - 1) h`.
fn reverse_grid(g: u64, l: u32, moduli: &[u64]) -> Vec<Seed> {
    let mut out = Vec::new();
    let big = (g as u128).pow(l) * (g as u128 * g as u128 - 1);
    for &q in moduli {
        for h in [1i64, 2] {
            if !(big * h as u128).is_multiple_of(q as u128) {
                out.push(reverse_seed_rational(g, l, h, q));
            }
        }
    }
    out
}

fn calibrate_type_i(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let mut cells = Vec::new();
    for (g, l) in [(2u64, 14u32), (10, 4)] {
        let x = g.pow(l);
        let ms = if g == 2 {
            vec![16u64, 128]
        } else {
            vec![10, 100]
        };
        for s in reverse_grid(g, l, &[3, 7, 11])
            .into_iter()
            .chain([random_seed(g, 1), sod_seed(g, 0.3)])
        {
            for &m in &ms {
                cells.push((s.clone(), l, x, m));
            }
        }
    }
    if let Some(bases) = &opts.bases {
        cells.retain(|c| bases.contains(&c.0.base()));
    }
    run_cells(seed, "type-i", cells, |(s, l, x, m), _| {
        let s = es(s.clone());
        let p = TypeIParams::new(&s, *l, *x, *m)?;
        let lhs = type_i_sum(&s, &p);
        let params = params! {"g" => s.g(), "L" => l, "x" => x, "M" => m, "kappa" => p.kappa_i, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new(
            "type-i",
            lhs,
            p.shape(s.g()),
            params,
        )])
    })
}

fn calibrate_type_ii(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let pt = PrimeTable::build(100_000)?;
    let mut cells = Vec::new();
    for (g, l, mn) in [
        (
            2u64,
            16u32,
            vec![(16u64, 1024u64), (64, 256), (128, 128), (32, 32)],
        ),
        (10, 5, vec![(20, 1000), (100, 300), (50, 50)]),
    ] {
        for s in reverse_grid(g, l, &[3, 7])
            .into_iter()
            .chain([random_seed(g, 2)])
        {
            for &(m, n) in &mn {
                for coeffs in [Coefficients::MobiusC2, Coefficients::Unimodular { key: 3 }] {
                    cells.push((s.clone(), l, g.pow(l), m, n, coeffs));
                }
            }
        }
    }
    if let Some(bases) = &opts.bases {
        cells.retain(|c| bases.contains(&c.0.base()));
    }
    run_cells(seed, "type-ii", cells, |(s, l, x, m, n, coeffs), _| {
        let s = es(s.clone());
        let p = TypeIIParams::new(&s, *l, *x, *m, *n, 0.25, *coeffs)?;
        let v = type_ii_sum(&s, &p, &pt)?.norm();
        let params = params! {
            "g" => s.g(), "L" => l, "x" => x, "M" => m, "N" => n, "coeffs" => format!("{coeffs:?}"),
            "kappa" => p.kappa_ii, "seed" => seed_param(s.seed())
        };
        Ok(vec![BoundReport::new("type-ii", v, p.shape(s.g()), params)])
    })
}

fn calibrate_prime_sum(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let pt = PrimeTable::build(100_000)?;
    let mut cells = Vec::new();
    for (g, ls, moduli) in [
        (2u64, vec![12u32, 14, 16], vec![5u64, 7, 11]),
        (10, vec![4, 5], vec![7, 11, 13]),
    ] {
        for l in ls {
            for s in reverse_grid(g, l, &moduli) {
                cells.push((s, l));
            }
        }
    }
    if let Some(bases) = &opts.bases {
        cells.retain(|c| bases.contains(&c.0.base()));
    }
    run_cells(seed, "prime-sum", cells, |(s, l), _| {
        let s = es(s.clone());
        let x = s.g().pow(*l);
        let r = prime_exp_sum(&s, *l, x, &pt, false)?;
        let params = params! {"g" => s.g(), "L" => l, "x" => x, "kappa" => r.kappa, "xi" => r.xi, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new(
            "prime-sum",
            r.s.norm(),
            r.bound_shape,
            params,
        )])
    })
}

fn calibrate_hybrid(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    let mut cells = Vec::new();
    for g in opts.bases.clone().unwrap_or_else(|| vec![2, 3]) {
        for lambda in [4u32, 8, 12] {
            for big_m in [1u64, 2, 4, 8, 16, 32] {
                for family in [1usize, 2, 3] {
                    cells.push((g, lambda, big_m, family));
                }
            }
        }
    }
    run_cells(seed, "hybrid", cells, |&(g, lambda, big_m, family), rng| {
        let s = es(draw_seed(g, family, rng));
        let j = rng.gen_range(0..3u64);
        let lhs = s.hybrid_sum(lambda, j, big_m as f64);
        let shape = s.hybrid_shape(lambda, j, big_m as f64);
        let params = params! {"g" => g, "lambda" => lambda, "j" => j, "M" => big_m, "seed" => seed_param(s.seed())};
        Ok(vec![BoundReport::new("hybrid", lhs, shape, params)])
    })
}

fn calibrate_truncation(seed: u64, opts: &SuiteOptions) -> Result<Vec<BoundReport>> {
    if opts.bases.as_ref().is_some_and(|b| !b.contains(&2)) {
        return Ok(Vec::new());
    }
    let cells: Vec<_> = truncation_cells(opts)
        .into_iter()
        .filter(|c| c.2 >= 2)
        .collect();
    run_cells(
        seed,
        "truncation-size",
        cells,
        |&(big_m, big_n, big_r, lambda), rng| {
            let s = es(draw_seed(2, 3, rng));
            let l = lambda as u32 + 3;
            let r = rng.gen_range(1..=big_r);
            let c = truncation_set_size(&s, big_m, big_n, big_r, r, l, lambda as u32)?;
            let shape = (big_m * big_n) as f64 / big_r as f64;
            let params = params! {"M" => big_m, "N" => big_n, "R" => big_r, "r" => r, "lambda" => lambda, "seed" => seed_param(s.seed())};
            Ok(vec![BoundReport::new(
                "truncation-size",
                c.set as f64,
                shape,
                params,
            )])
        },
    )
}

/// Max observed ratio per calibrated suite.
pub fn calibrate(names: &[&str], cfg: &RunConfig, opts: &SuiteOptions) -> Result<CalibrationTable> {
    if names.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut entries = BTreeMap::new();
    for &name in names {
        if !CALIBRATED_SUITES.contains(&name) {
            return Err(Error::UnknownSuite(name.to_string()));
        }
        let ratios = calibrated_ratios(name, cfg.rng_seed, opts)?;
        let c_cal = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        entries.insert(
            name.to_string(),
            CalibrationEntry {
                c_cal,
                cells: ratios.len(),
            },
        );
    }
    Ok(CalibrationTable {
        rng: cfg.rng.clone(),
        rng_seed: cfg.rng_seed,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteOptions {
        SuiteOptions {
            samples: Some(5),
            ..Default::default()
        }
    }

    #[test]
    fn cell_streams_are_stable_and_distinct() {
        let a: u64 = cell_rng(1, "psi", 0).gen();
        let b: u64 = cell_rng(1, "psi", 0).gen();
        let c: u64 = cell_rng(1, "psi", 1).gen();
        let d: u64 = cell_rng(1, "vdc", 0).gen();
        assert_eq!(a, b);
        assert!(a != c && a != d);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let cfg = RunConfig::default();
        assert!(matches!(
            run_suite("nope", &cfg, &small()),
            Err(Error::UnknownSuite(_))
        ));
        assert!(matches!(
            calibrate(&[], &cfg, &small()),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn small_exact_sweeps_pass() {
        let cfg = RunConfig::default();
        for name in [
            "product-formula",
            "linf",
            "pair-bound",
            "consecutive",
            "l2-orthogonality",
            "l4-identity",
            "vdc",
            "sin-sum",
        ] {
            let reps = run_suite(name, &cfg, &small()).unwrap();
            assert!(!reps.is_empty());
            let bad: Vec<_> = reps.iter().filter(|r| !r.pass).collect();
            assert!(bad.is_empty(), "{name}: {bad:?}");
        }
    }

    #[test]
    fn sweeps_are_reproducible() {
        let cfg = RunConfig::default();
        let a = run_suite(
            "psi",
            &cfg,
            &SuiteOptions {
                samples: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        let b = run_suite(
            "psi",
            &cfg,
            &SuiteOptions {
                samples: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_override_is_used() {
        let cfg = RunConfig::default();
        let opts = SuiteOptions {
            samples: Some(3),
            bases: Some(vec![2]),
            seed: Some("zero".into()),
            ..Default::default()
        };
        let reps = run_suite("linf", &cfg, &opts).unwrap();
        assert!(reps.iter().all(|r| r.params["seed"] == "zero"));
    }
}
