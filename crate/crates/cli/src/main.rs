//! `revprime`: census, verifier sweeps and calibration.

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use revprime::arith::PrimeTable;
use revprime::config::RunConfig;
use revprime::revcount::{census_grid, census_sharp, CensusRecord, CSV_HEADER};
use revprime::verify::{self, SuiteOptions, CALIBRATED_SUITES};
use revprime::Error;

#[derive(Parser, Debug)]
#[command(
    name = "revprime",
    version,
    about = "Reversed primes in arithmetic progressions"
)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count L-digit primes by the residue of their reversal.
    Census(CensusArgs),
    /// Run a verifier suite and emit JSON-lines reports.
    Verify(VerifyArgs),
    /// Recompute calibration constants for the calibrated suites.
    Calibrate(CalibrateArgs),
    /// List the known suites.
    Suites,
}

#[derive(Args, Debug, serde::Serialize)]
struct CensusArgs {
    #[arg(long)]
    g: u64,
    /// Digit lengths, comma separated.
    #[arg(long = "L", value_delimiter = ',', required = true)]
    #[serde(rename = "L")]
    l: Vec<u32>,
    /// Moduli, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    q: Vec<u64>,
    /// Residues, comma separated (default: every residue mod q).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    a: Option<Vec<i64>>,
    /// Truncate the sharp count at x.
    #[arg(long)]
    x: Option<u64>,
    #[arg(long)]
    sieve_limit: Option<u64>,
    /// Allowed |relative_dev| (overrides the config).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output file; `.json` selects JSON, anything else CSV. Default: stdout.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
struct VerifyArgs {
    suite: String,
    /// Bases, comma separated.
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<u64>>,
    #[arg(long)]
    lambda_max: Option<u32>,
    #[arg(long)]
    limit: Option<u64>,
    /// Random cases per grid cell.
    #[arg(long)]
    samples: Option<usize>,
    /// Fix the seed, e.g. `zero`, `sod:0.3`, `reverse:1/7,12`, `random:5`.
    #[arg(long)]
    seed_family: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
struct CalibrateArgs {
    /// Suites to calibrate (default: all calibrated suites).
    suites: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<u64>>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Precondition(e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Census(args) => census(&cfg, &args),
        Command::Verify(args) => run_verify(&cfg, &args),
        Command::Calibrate(args) => calibrate(&cfg, &args),
        Command::Suites => {
            for s in verify::all_suites() {
                println!("{s}");
            }
            Ok(0)
        }
    }
}

fn header(command: &str, cfg: &RunConfig, args: &impl serde::Serialize) -> serde_json::Value {
    let hash = Sha256::digest(cfg.canonical_json().as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hex,
        "rng": cfg.rng,
        "rng_seed": cfg.rng_seed,
        "args": args,
    })
}

/// Write `body` to `out` through a temporary file in the same directory, or
/// to stdout.
fn emit(out: Option<&Path>, body: &str) -> Result<(), Error> {
    match out {
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
        Some(path) if path.exists() && !path.is_file() => {
            // devices and pipes cannot be replaced by a rename
            std::fs::write(path, body)?;
            Ok(())
        }
        Some(path) => {
            let dir = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}

fn census(cfg: &RunConfig, args: &CensusArgs) -> Result<u8, Error> {
    let top = args.l.iter().max().copied().unwrap_or(1);
    let needed = (args.g as u128)
        .checked_pow(top)
        .filter(|&v| v <= u64::MAX as u128)
        .ok_or_else(|| Error::Precondition(format!("g^L overflows for L = {top}")))?
        as u64
        - 1;
    let limit = args
        .sieve_limit
        .or(cfg.sieve_limit)
        .unwrap_or(needed)
        .max(2);
    let pt = PrimeTable::from_env(limit)?;
    let mut records: Vec<CensusRecord> = Vec::new();
    for &l in &args.l {
        let mut queries = Vec::new();
        for &q in &args.q {
            match &args.a {
                Some(list) => queries.extend(list.iter().map(|&a| (a, q))),
                None => queries.extend((0..q as i64).map(|a| (a, q))),
            }
        }
        let mut rows = census_grid(args.g, l, &queries, &pt)?;
        if let Some(x) = args.x {
            for r in rows.iter_mut() {
                r.sharp_observed = census_sharp(r.g, r.l, r.a, r.q, Some(x), &pt)?;
            }
        }
        records.extend(rows);
    }
    let tol = args.tolerance.unwrap_or(cfg.census.tolerance);
    let ok = records.iter().all(|r| {
        r.relative_dev
            .map_or(r.within_exceptional_cap(), |d| d.abs() <= tol)
    });
    let head = header("census", cfg, args);
    let json = args
        .out
        .as_deref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let body = if json {
        let mut s =
            serde_json::to_string_pretty(&serde_json::json!({"header": head, "records": records}))?;
        s.push('\n');
        s
    } else {
        let mut s = format!("# {head}\n{CSV_HEADER}\n");
        for r in &records {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    };
    emit(args.out.as_deref(), &body)?;
    Ok(if ok { 0 } else { 2 })
}

fn run_verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<u8, Error> {
    let opts = SuiteOptions {
        bases: args.g.clone(),
        lambda_max: args.lambda_max,
        samples: args.samples,
        limit: args.limit,
        seed: args.seed_family.clone(),
    };
    let reports = verify::run_suite(&args.suite, cfg, &opts)?;
    if reports.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut body =
        serde_json::to_string(&serde_json::json!({ "header": header("verify", cfg, args) }))?;
    body.push('\n');
    let mut failures = 0usize;
    for r in &reports {
        failures += !r.pass as usize;
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    emit(args.out.as_deref(), &body)?;
    eprintln!(
        "{}: {} reports, {} failed",
        args.suite,
        reports.len(),
        failures
    );
    Ok(if failures == 0 { 0 } else { 2 })
}

fn calibrate(cfg: &RunConfig, args: &CalibrateArgs) -> Result<u8, Error> {
    let names: Vec<&str> = if args.suites.is_empty() {
        CALIBRATED_SUITES.to_vec()
    } else {
        args.suites.iter().map(String::as_str).collect()
    };
    let opts = SuiteOptions {
        bases: args.g.clone(),
        ..Default::default()
    };
    let table = verify::calibrate(&names, cfg, &opts)?;
    emit(args.out.as_deref(), &table.to_json())?;
    Ok(0)
}
