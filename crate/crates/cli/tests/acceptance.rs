//! Acceptance gate: one `PASS`/`FAIL` line per criterion; exits non-zero if
//! any criterion fails.

use num_rational::Rational64;
use std::process::Command;
use std::time::{Duration, Instant};

use revprime::arith::PrimeTable;
use revprime::config::{CalibrationTable, RunConfig, DEFAULT_CALIBRATION};
use revprime::report::BoundReport;
use revprime::revcount::{census_grid, rho};
use revprime::verify::{calibrate, run_suite, SuiteOptions, CALIBRATED_SUITES};

const PRODUCT_FORMULA_CASES: usize = 3000;
const PRODUCT_FORMULA_TOL: f64 = 1e-10;
const PRODUCT_FORMULA_SECONDS: u64 = 30;
const VAUGHAN_LIMIT: u64 = 10_000;
const RANDOM_CASES: usize = 1000;
const CENSUS_TOL_G10: f64 = 0.15;
const CENSUS_TOL_G2: f64 = 0.20;
const CENSUS_SECONDS: u64 = 60;
const CALIBRATION_SLACK: f64 = 1e-9;

type Verdict = (bool, String);

fn sweep(names: &[&str], opts: &SuiteOptions) -> Vec<BoundReport> {
    let cfg = RunConfig::default();
    names
        .iter()
        .flat_map(|n| run_suite(n, &cfg, opts).unwrap())
        .collect()
}

fn summary(reports: &[BoundReport]) -> (usize, usize, String) {
    let bad: Vec<&BoundReport> = reports.iter().filter(|r| !r.pass).collect();
    let first = bad
        .first()
        .map(|r| serde_json::to_string(r).unwrap())
        .unwrap_or_default();
    (reports.len(), bad.len(), first)
}

fn count_suite(reports: &[BoundReport], suite: &str) -> usize {
    reports.iter().filter(|r| r.suite == suite).count()
}

fn criterion_01_product_formula() -> Verdict {
    let start = Instant::now();
    let opts = SuiteOptions {
        samples: Some(PRODUCT_FORMULA_CASES / 3),
        ..Default::default()
    };
    let reports = sweep(&["product-formula"], &opts);
    let elapsed = start.elapsed();
    let cases = count_suite(&reports, "product-formula");
    let worst = reports
        .iter()
        .filter(|r| r.suite == "product-formula")
        .map(|r| r.lhs)
        .fold(0.0f64, f64::max);
    let (_, bad, first) = summary(&reports);
    let pass = cases == PRODUCT_FORMULA_CASES
        && bad == 0
        && worst <= PRODUCT_FORMULA_TOL
        && elapsed < Duration::from_secs(PRODUCT_FORMULA_SECONDS);
    (
        pass,
        format!(
            "{cases} cases, max |diff| {worst:.2e}, {bad} violations, {:.1}s {first}",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_02_linf() -> Verdict {
    let opts = SuiteOptions {
        samples: Some(PRODUCT_FORMULA_CASES / 3),
        ..Default::default()
    };
    let reports = sweep(&["linf"], &opts);
    let (n, bad, first) = summary(&reports);
    let pass = n == PRODUCT_FORMULA_CASES && bad == 0;
    (pass, format!("{n} cases, {bad} violations {first}"))
}

fn criterion_03_l1_moment() -> Verdict {
    let reports = sweep(&["l1-moment"], &SuiteOptions::default());
    let (n, bad, first) = summary(&reports);
    let pure = count_suite(&reports, "l1-moment-pure");
    let pass = bad == 0 && pure > 0;
    (
        pass,
        format!("{n} reports ({pure} pure-form cells), {bad} violations {first}"),
    )
}

fn criterion_04_psi() -> Verdict {
    let reports = sweep(&["psi"], &SuiteOptions::default());
    let (n, bad, first) = summary(&reports);
    let forms = ["psi-two-thirds", "psi-theta", "psi-eta"].map(|s| count_suite(&reports, s));
    let pass = bad == 0 && forms.iter().all(|&c| c > 0);
    (
        pass,
        format!("{n} reports, per form {forms:?}, {bad} violations {first}"),
    )
}

fn criterion_05_vaughan() -> Verdict {
    let opts = SuiteOptions {
        limit: Some(VAUGHAN_LIMIT),
        ..Default::default()
    };
    let reports = sweep(&["vaughan"], &opts);
    let (n, bad, first) = summary(&reports);
    let pass = n as u64 >= VAUGHAN_LIMIT && bad == 0;
    (
        pass,
        format!("n <= {VAUGHAN_LIMIT}, {n} reports, {bad} violations {first}"),
    )
}

fn criterion_06_vdc_and_sin_sum() -> Verdict {
    let opts = SuiteOptions {
        samples: Some(RANDOM_CASES),
        ..Default::default()
    };
    let reports = sweep(&["vdc", "sin-sum"], &opts);
    let (n, bad, first) = summary(&reports);
    let pass = count_suite(&reports, "vdc") == RANDOM_CASES
        && count_suite(&reports, "sin-sum") == RANDOM_CASES
        && bad == 0;
    (pass, format!("{n} cases, {bad} violations {first}"))
}

fn criterion_07_truncation() -> Verdict {
    let reports = sweep(&["truncation"], &SuiteOptions::default());
    let (n, bad, first) = summary(&reports);
    let pass = n > 0 && bad == 0;
    (
        pass,
        format!("{n} (M, N, R) cells, {bad} violations {first}"),
    )
}

fn max_dev(g: u64, l: u32, moduli: &[u64], pt: &PrimeTable) -> (f64, u64, i64, usize) {
    let queries: Vec<(i64, u64)> = moduli
        .iter()
        .flat_map(|&q| (0..q as i64).map(move |a| (a, q)))
        .collect();
    let records = census_grid(g, l, &queries, pt).unwrap();
    let mut worst = (0.0f64, 0u64, 0i64, 0usize);
    for r in &records {
        match r.relative_dev {
            Some(d) if d.abs() > worst.0 => worst = (d.abs(), r.q, r.a, worst.3),
            None if !r.within_exceptional_cap() => worst.3 += 1,
            _ => {}
        }
    }
    worst
}

fn criterion_08_census() -> Verdict {
    let start = Instant::now();
    let pt10 = PrimeTable::build(100_000).unwrap();
    let pt2 = PrimeTable::build(1 << 16).unwrap();
    let g10 = max_dev(10, 5, &[1, 3, 7, 9], &pt10);
    let g2 = max_dev(2, 16, &[1, 3, 5, 7], &pt2);
    let elapsed = start.elapsed();
    let pt2b = PrimeTable::build(1 << 18).unwrap();
    let g2_next = max_dev(2, 18, &[1, 3, 5, 7], &pt2b);
    let ok10 = g10.0 <= CENSUS_TOL_G10 && g10.3 == 0;
    let ok2 = g2.0 <= CENSUS_TOL_G2 && g2.3 == 0;
    let shrinks = g2_next.0 < g2.0;
    let fast = elapsed < Duration::from_secs(CENSUS_SECONDS);
    let pass = ok10 && ok2 && shrinks && fast;
    (
        pass,
        format!(
            "g=10 L=5 max dev {:.3} at a={} q={}; g=2 L=16 max dev {:.3} at a={} q={}; \
             g=2 L=18 max dev {:.3} at a={} q={}; shrinks {shrinks}; {:.1}s",
            g10.0,
            g10.2,
            g10.1,
            g2.0,
            g2.2,
            g2.1,
            g2_next.0,
            g2_next.2,
            g2_next.1,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_09_rho_normalization() -> Verdict {
    let mut failures = Vec::new();
    for g in [2u64, 3, 10] {
        for q in 1..=200u64 {
            let total: Rational64 = (0..q as i64).map(|a| rho(g, a, q)).sum::<Rational64>()
                / Rational64::from_integer(q as i64);
            if total != Rational64::from_integer(1) {
                failures.push((g, q, total));
            }
        }
    }
    let detail = match failures.first() {
        Some((g, q, t)) => format!(
            "{} of 600 (g, q) fail; first g={g} q={q} sum={t}",
            failures.len()
        ),
        None => "600 (g, q) pairs".to_string(),
    };
    (failures.is_empty(), detail)
}

fn criterion_10_sigma_monotone() -> Verdict {
    let reports = sweep(&["sigma-monotone"], &SuiteOptions::default());
    let (n, bad, first) = summary(&reports);
    let pass = n > 0 && bad == 0;
    (pass, format!("{n} assertions, {bad} violations {first}"))
}

fn criterion_11_calibration() -> Verdict {
    let cfg = RunConfig::default();
    let opts = SuiteOptions::default();
    let table = calibrate(CALIBRATED_SUITES, &cfg, &opts).unwrap();
    let reproducible = table.to_json() == DEFAULT_CALIBRATION;
    let shipped = CalibrationTable::shipped();
    let mut worst = Vec::new();
    let mut regressions = 0;
    for name in CALIBRATED_SUITES {
        let c_cal = shipped.entries[*name].c_cal;
        let reports = run_suite(name, &cfg, &opts).unwrap();
        let max = reports
            .iter()
            .map(|r| r.lhs)
            .fold(f64::NEG_INFINITY, f64::max);
        regressions += reports
            .iter()
            .filter(|r| !r.pass || r.lhs > c_cal + CALIBRATION_SLACK)
            .count();
        worst.push(format!("{name} {max:.3e}/{c_cal:.3e}"));
    }
    let pass = reproducible && regressions == 0;
    (
        pass,
        format!(
            "table reproduced bit-for-bit: {reproducible}; {regressions} regressions; {}",
            worst.join(", ")
        ),
    )
}

fn run_bin(args: &[&str], threads: usize) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_revprime"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .env_remove("REVPRIME_CACHE_DIR")
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_12_determinism() -> Verdict {
    let commands: [&[&str]; 5] = [
        &["verify", "product-formula", "--samples", "100"],
        &["verify", "psi", "--samples", "10"],
        &["verify", "hybrid"],
        &[
            "census",
            "--g",
            "2",
            "--L",
            "14",
            "--q",
            "3,5,7",
            "--tolerance",
            "1",
        ],
        &["calibrate", "type-ii", "truncation-size"],
    ];
    let mut mismatched = Vec::new();
    for args in commands {
        let (c1, o1) = run_bin(args, 1);
        let (c8, o8) = run_bin(args, 8);
        if c1 != 0 || c1 != c8 || o1 != o8 || o1.is_empty() {
            mismatched.push(args.join(" "));
        }
    }
    let pass = mismatched.is_empty();
    (
        pass,
        format!("{} commands, mismatched: {mismatched:?}", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("product formula", criterion_01_product_formula),
        ("L-infinity bound", criterion_02_linf),
        ("L1 moment", criterion_03_l1_moment),
        ("Psi bounds", criterion_04_psi),
        ("Vaughan identity", criterion_05_vaughan),
        ("van der Corput and sin-sum", criterion_06_vdc_and_sin_sum),
        ("truncation set containment", criterion_07_truncation),
        ("census", criterion_08_census),
        ("rho normalization", criterion_09_rho_normalization),
        ("sigma monotonicity", criterion_10_sigma_monotone),
        ("calibrated ratios", criterion_11_calibration),
        ("determinism across thread counts", criterion_12_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += !pass as usize;
        println!(
            "criterion {:>2} {name}: {} ({detail})",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
