use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use freehilbert::algebra::{CoeffLaw, Profile};
use freehilbert::experiments::{check_lock, run_experiment, ExperimentConfig, ExperimentName, LockOutcome};
use freehilbert::io::AnyElement;
use freehilbert::lp::{moment_norm, norm_spectral, NormMethod, NormReport};
use freehilbert::multipliers::SymbolLaw;
use freehilbert::paths::{build_partition, PartitionKind};
use freehilbert::verify::{fuzz, kappa_oracle, Arith, FuzzProfile, IdentityId, PINNED_KAPPA};
use freehilbert::Element;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

/// Exact and numerical experiments with free Hilbert transforms.
#[derive(Parser, Debug)]
#[command(name = "freehilbert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fuzz an algebraic identity over seeded random inputs.
    Verify(VerifyArgs),
    /// Compute an L^p norm of an element read from JSON.
    Norm(NormArgs),
    /// Run a norm-ratio experiment and write CSV plus a JSON summary.
    Experiment(ExperimentArgs),
    /// Build a partition of a word ball into geodesic paths.
    Partition(PartitionArgs),
}

fn snake<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unrecognized value {s}"))
}

fn parse_with<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_with::<IdentityId>)]
    identity: IdentityId,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact", value_parser = parse_with::<Arith>)]
    arith: Arith,
    #[arg(long, default_value_t = 5)]
    max_len: usize,
    #[arg(long, default_value_t = 6)]
    max_terms: usize,
    #[arg(long, default_value_t = 3)]
    gens: u32,
    /// Block length for cotlar_Ld.
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value = "disc", value_parser = snake::<SymbolLaw>)]
    symbol_law: SymbolLaw,
    #[arg(long, default_value = "rational_grid", value_parser = parse_with::<CoeffLaw>)]
    coeff_law: CoeffLaw,
    /// Push one symbol entry outside the unit disc.
    #[arg(long)]
    corrupt_symbol: bool,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Method {
    Moments,
    Spectral,
}

#[derive(clap::Args, Debug)]
struct NormArgs {
    /// Exponent; `inf` gives the truncated operator-norm estimate.
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value_t = Method::Moments)]
    method: Method,
    #[arg(long, default_value_t = 6)]
    radius: usize,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(clap::Args, Debug)]
struct ExperimentArgs {
    #[arg(value_parser = parse_with::<ExperimentName>)]
    name: ExperimentName,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 4.0, 8.0])]
    p: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 6)]
    radius: usize,
    #[arg(long, default_value_t = 3)]
    max_len: usize,
    #[arg(long, default_value_t = 4)]
    max_terms: usize,
    #[arg(long, default_value_t = 2)]
    gens: u32,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value = "float", value_parser = parse_with::<Arith>)]
    arith: Arith,
    #[arg(long, default_value = "greedy", value_parser = snake::<PartitionKind>)]
    partition: PartitionKind,
    #[arg(long, default_value = "unimodular", value_parser = snake::<SymbolLaw>)]
    symbol_law: SymbolLaw,
    #[arg(long, default_value = "gaussian", value_parser = parse_with::<CoeffLaw>)]
    coeff_law: CoeffLaw,
    /// Summary lock: created on first use, compared within 5% afterwards.
    #[arg(long)]
    lock: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct PartitionArgs {
    #[arg(long, value_parser = snake::<PartitionKind>)]
    kind: PartitionKind,
    #[arg(long)]
    radius: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    gens: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Pass,
    Fail,
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if let Some(path) = out {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, text.clone() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{text}");
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let prof = FuzzProfile {
        max_len: a.max_len,
        max_terms: a.max_terms,
        num_gens: a.gens,
        coeff_law: a.coeff_law,
        symbol_law: a.symbol_law,
        d: a.d,
        corrupt_symbol: a.corrupt_symbol,
        ..FuzzProfile::default()
    };
    if a.trials == 0 || a.gens == 0 || a.d == 0 {
        bail!("trials, gens and d must be positive");
    }
    let mut pass = true;
    let mut report = json!({});
    if a.identity == IdentityId::GromovCarre {
        let sweep = kappa_oracle(2, 4)?;
        pass &= sweep.kappa == PINNED_KAPPA;
        report["kappa_sweep"] = serde_json::to_value(&sweep)?;
    }
    let fz = fuzz(a.identity, a.arith, &prof, a.trials, a.seed)?;
    pass &= fz.all_pass();
    let mut body = serde_json::to_value(&fz)?;
    if let (Some(obj), Some(extra)) = (body.as_object_mut(), report.as_object()) {
        obj.extend(extra.clone());
        obj.insert("seed".into(), json!(a.seed));
        obj.insert("pass".into(), json!(pass));
    }
    emit(&body, a.out.as_deref())?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn moments_report<C: freehilbert::Coeff>(x: &Element<C>, p: f64) -> Result<NormReport> {
    if p.fract() != 0.0 || p < 2.0 || !(p as u64).is_multiple_of(2) {
        bail!("the moments method needs an even integer p, got {p}");
    }
    Ok(NormReport { p, method: NormMethod::ExactMoment, value: moment_norm(x, p as usize)?, radius: None, error_indicator: None })
}

fn norm(a: NormArgs) -> Result<Outcome> {
    if !(a.p >= 1.0) {
        bail!("p must be at least 1");
    }
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let x = AnyElement::from_json(&serde_json::from_str(&text)?)?;
    let report = match (a.method, &x) {
        (Method::Moments, AnyElement::Rational(x)) => moments_report(x, a.p)?,
        (Method::Moments, AnyElement::Float(x)) => moments_report(x, a.p)?,
        (Method::Moments, AnyElement::Matrix(x)) => moments_report(x, a.p)?,
        (Method::Spectral, AnyElement::Rational(x)) => norm_spectral(x, a.p, a.radius)?,
        (Method::Spectral, AnyElement::Float(x)) => norm_spectral(x, a.p, a.radius)?,
        (Method::Spectral, AnyElement::Matrix(x)) => norm_spectral(x, a.p, a.radius)?,
    };
    let mut v = serde_json::to_value(&report)?;
    v["ring"] = json!(x.ring());
    emit(&v, None)?;
    Ok(Outcome::Pass)
}

fn experiment(a: ExperimentArgs) -> Result<Outcome> {
    let cfg = ExperimentConfig {
        name: a.name,
        ps: a.p,
        trials: a.trials,
        seed: a.seed,
        profile: Profile { max_len: a.max_len, max_terms: a.max_terms, coeff_law: a.coeff_law, num_gens: a.gens },
        radius: a.radius,
        arith: a.arith,
        partition: a.partition,
        d: a.d,
        symbol_law: a.symbol_law,
    };
    let res = run_experiment(&cfg)?;
    let (csv, summary) = res.write(&a.out)?;
    let mut pass = res.all_pass();
    let lock = match &a.lock {
        Some(path) => {
            let outcome = check_lock(&res.summary, path)?;
            pass &= !matches!(outcome, LockOutcome::Mismatch { .. });
            Some(outcome)
        }
        None => None,
    };
    let failed: Vec<_> = res.assertions.iter().filter(|x| !x.pass).collect();
    let mut v = json!({
        "experiment": cfg.name,
        "csv": csv,
        "summary": summary,
        "rows": res.rows.len(),
        "pass": pass,
        "assertions": res.assertions,
    });
    if let Some(l) = lock {
        v["lock"] = serde_json::to_value(l)?;
    }
    if !failed.is_empty() {
        v["witness"] = serde_json::to_value(&failed)?;
    }
    emit(&v, None)?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn partition(a: PartitionArgs) -> Result<Outcome> {
    if a.radius == 0 || a.gens == 0 {
        bail!("radius and gens must be positive");
    }
    let part = build_partition(a.kind, a.gens, a.radius, a.seed)?;
    let v = serde_json::to_value(&part)?;
    match &a.out {
        Some(path) => {
            fs::write(path, serde_json::to_string_pretty(&v)? + "\n").with_context(|| format!("writing {}", path.display()))?;
            println!("{}", json!({"out": path, "paths": part.num_paths(), "kind": part.kind, "radius": part.radius}));
        }
        None => emit(&v, None)?,
    }
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Norm(a) => norm(a),
        Command::Experiment(a) => experiment(a),
        Command::Partition(a) => partition(a),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
