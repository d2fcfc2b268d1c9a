//! Seeded norm-ratio experiments with CSV rows and a JSON summary.
//!
//! Trial `i` draws everything from `split_seed(seed, i)`; trials run in
//! parallel and rows are emitted in trial order, so output is byte-stable.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{random_element_with, random_scalar, random_word, rng_from_seed, split_seed, CoeffLaw, Element, Profile};
use crate::constants::{bound_beta, bound_c, gamma};
use crate::error::{Error, Result};
use crate::lp::{iota_norm, moment_norm, norm_auto, op_lower_at, square_function_norm, Combine, SquareMode};
use crate::multipliers::{
    hilbert_block, hilbert_free, left_prefix, project_trace, random_gen_symbol, right_suffix, BlockVariant, Symbol,
    SymbolKind, SymbolLaw,
};
use crate::paths::{build_partition, dyadic_block, smooth_block, GeodesicPath, PartitionKind};
use crate::scalar::{CMatrix, Coeff, Real};
use crate::verify::Arith;
use crate::words::{alphabet, enumerate_ball, invert, reduce_concat, suffix_leq, Word};
use crate::{Rational, C64};

pub const SUMMARY_SCHEMA: &str = "freehilbert.experiment.v1";
pub const LOCK_TOLERANCE: f64 = 0.05;
const P2_TOL: f64 = 1e-10;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    HilbertRatio,
    Khintchine,
    Rosenthal,
    Improvedfree,
    LengthReduction,
    LpBlocks,
    Haagerup,
    Commutator,
    CbProbe,
}

impl ExperimentName {
    pub fn all() -> Vec<ExperimentName> {
        use ExperimentName::*;
        vec![HilbertRatio, Khintchine, Rosenthal, Improvedfree, LengthReduction, LpBlocks, Haagerup, Commutator, CbProbe]
    }

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }

    /// Documented CSV header.
    pub fn header(self) -> &'static [&'static str] {
        use ExperimentName::*;
        match self {
            HilbertRatio => &["trial", "p", "terms", "maxlen", "ratio"],
            Khintchine => &["trial", "p", "terms", "maxlen", "column", "row", "norm", "ratio"],
            Rosenthal => &["trial", "p", "terms", "maxlen", "l2", "lp_sum", "norm", "ratio"],
            Improvedfree => &["trial", "p", "terms", "maxlen", "left", "right", "norm", "ratio_left", "ratio_right"],
            LengthReduction => &["trial", "p", "d", "terms", "maxlen", "column", "rows_max", "norm", "ratio"],
            LpBlocks => &["trial", "p", "paths", "radius", "dyadic", "smooth", "rhs", "dyadic_ratio", "smooth_ratio"],
            Haagerup => &["trial", "d", "radius", "terms", "op_lower", "l2", "ratio"],
            Commutator => &["radius", "h", "g", "side", "rank"],
            CbProbe => &["trial", "dim", "gens", "p", "pattern", "ratio"],
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::all()
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown experiment {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub ps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub profile: Profile,
    /// Truncation radius for spectral norms, partitions and probes.
    pub radius: usize,
    pub arith: Arith,
    pub partition: PartitionKind,
    /// Fixed word length; cycles through `1..=3` when absent.
    pub d: Option<usize>,
    pub symbol_law: SymbolLaw,
}

impl ExperimentConfig {
    pub fn new(name: ExperimentName) -> Self {
        ExperimentConfig {
            name,
            ps: vec![2.0, 4.0, 8.0],
            trials: 20,
            seed: 0,
            profile: Profile { max_len: 3, max_terms: 4, coeff_law: CoeffLaw::Gaussian, num_gens: 2 },
            radius: 6,
            arith: Arith::Float,
            partition: PartitionKind::Greedy,
            d: None,
            symbol_law: SymbolLaw::Unimodular,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.radius == 0 || self.profile.max_terms == 0 || self.profile.num_gens == 0 {
            return Err(Error::InvalidInput("trials, radius, max_terms and num_gens must be positive".into()));
        }
        if let Some(p) = self.ps.iter().find(|p| !(**p > 1.0) || !p.is_finite()) {
            return Err(Error::InvalidInput(format!("exponents must satisfy 1 < p < ∞, got {p}")));
        }
        if self.d == Some(0) {
            return Err(Error::InvalidInput("d must be positive".into()));
        }
        use ExperimentName::*;
        let square = matches!(self.name, Khintchine | Rosenthal | Improvedfree | LengthReduction | LpBlocks);
        if square && self.ps.iter().any(|&p| p < 2.0) {
            return Err(Error::InvalidInput(format!("{} needs p >= 2", self.name)));
        }
        if self.arith == Arith::Exact && !matches!(self.name, HilbertRatio | Khintchine) {
            return Err(Error::InvalidInput(format!("{} runs in the float ring only", self.name)));
        }
        if self.arith == Arith::Exact && self.ps.iter().any(|&p| !is_even(p)) {
            return Err(Error::InvalidInput("exact arithmetic needs even exponents".into()));
        }
        Ok(())
    }

    fn d_for(&self, trial: usize) -> usize {
        self.d.unwrap_or(1 + trial % 3)
    }

    fn norm_radius(&self, maxlen: usize) -> usize {
        self.radius.max(2 * maxlen).max(1)
    }
}

fn is_even(p: f64) -> bool {
    p.fract() == 0.0 && (p as u64).is_multiple_of(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub name: ExperimentName,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
    pub assertions: Vec<Assertion>,
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// Writes `<name>.csv` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.name));
        let js = dir.join(format!("{}.json", self.name));
        fs::write(&csv, self.to_csv())?;
        fs::write(&js, serde_json::to_string_pretty(&self.summary)? + "\n")?;
        Ok((csv, js))
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// One sample of a ratio statistic, grouped by `key` in the summary.
#[derive(Clone, Debug)]
struct Sample {
    key: String,
    p: Option<f64>,
    value: f64,
}

struct Collected {
    rows: Vec<Vec<String>>,
    samples: Vec<Sample>,
}

fn run_trials<F>(cfg: &ExperimentConfig, f: F) -> Result<Collected>
where
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<(Vec<Vec<String>>, Vec<Sample>)> + Sync,
{
    let out: Vec<Result<(Vec<Vec<String>>, Vec<Sample>)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(split_seed(cfg.seed, i as u64));
            f(i, &mut rng)
        })
        .collect();
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for r in out {
        let (rs, ss) = r?;
        rows.extend(rs);
        samples.extend(ss);
    }
    Ok(Collected { rows, samples })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[derive(Clone, Debug, Serialize)]
struct Group {
    key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    count: usize,
    min: f64,
    max: f64,
    median: f64,
}

fn groups(samples: &[Sample]) -> Vec<Group> {
    let mut by: BTreeMap<String, (Option<f64>, Vec<f64>)> = BTreeMap::new();
    for s in samples {
        by.entry(s.key.clone()).or_insert((s.p, Vec::new())).1.push(s.value);
    }
    by.into_iter()
        .map(|(key, (p, mut v))| {
            v.sort_by(f64::total_cmp);
            Group { key, p, count: v.len(), min: v[0], max: v[v.len() - 1], median: median(&v) }
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln p`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(p, y)| *p > 0.0 && *y > 0.0).map(|(p, y)| (p.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn bound_check(name: &str, samples: &[Sample], key_prefix: &str, lower: impl Fn(f64) -> Result<f64>, upper: impl Fn(f64) -> Result<f64>) -> Result<Assertion> {
    let mut worst = String::new();
    let mut pass = true;
    for s in samples.iter().filter(|s| s.key.starts_with(key_prefix)) {
        let Some(p) = s.p else { continue };
        let (lo, hi) = (lower(p)?, upper(p)?);
        if s.value < lo * (1.0 - BOUND_SLACK) || s.value > hi * (1.0 + BOUND_SLACK) {
            pass = false;
            worst = format!("p={p}: ratio {} outside [{lo}, {hi}]", s.value);
        }
    }
    Ok(Assertion { name: name.into(), pass, detail: if pass { "all ratios inside the bounds".into() } else { worst } })
}

fn p2_check(samples: &[Sample], key_prefix: &str) -> Option<Assertion> {
    let at2: Vec<f64> = samples.iter().filter(|s| s.p == Some(2.0) && s.key.starts_with(key_prefix)).map(|s| s.value).collect();
    if at2.is_empty() {
        return None;
    }
    let dev = at2.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    Some(Assertion {
        name: format!("{key_prefix}p2_isometry"),
        pass: dev <= P2_TOL,
        detail: format!("max |ratio - 1| at p = 2 is {dev:e}"),
    })
}

fn finish(cfg: &ExperimentConfig, col: Collected, assertions: Vec<Assertion>, extra: Value) -> ExperimentResult {
    let gs = groups(&col.samples);
    let summary = json!({
        "schema": SUMMARY_SCHEMA,
        "experiment": cfg.name,
        "config": cfg,
        "rows": col.rows.len(),
        "zero_trials": col.rows.is_empty(),
        "groups": gs,
        "assertions": assertions,
        "extra": extra,
    });
    ExperimentResult {
        name: cfg.name,
        header: cfg.name.header().iter().map(|s| s.to_string()).collect(),
        rows: col.rows,
        summary,
        assertions,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    use ExperimentName::*;
    match cfg.name {
        HilbertRatio => hilbert_ratio(cfg),
        Khintchine => khintchine(cfg),
        Rosenthal => rosenthal(cfg),
        Improvedfree => improvedfree(cfg),
        LengthReduction => length_reduction(cfg),
        LpBlocks => lp_blocks(cfg),
        Haagerup => haagerup(cfg),
        Commutator => commutator(cfg),
        CbProbe => cb_probe(cfg),
    }
}

fn pkey(p: f64) -> String {
    format!("p={p}")
}

fn sample(prefix: &str, p: f64, value: f64) -> Sample {
    Sample { key: format!("{prefix}{}", pkey(p)), p: Some(p), value }
}

fn norm_of<C: Coeff>(x: &Element<C>, p: f64, radius: usize) -> Result<f64> {
    if is_even(p) {
        moment_norm(x, p as usize)
    } else {
        Ok(norm_auto(x, p, radius)?.value)
    }
}

fn ratio_trial<R: Real>(cfg: &ExperimentConfig, trial: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Result<(Vec<Vec<String>>, Vec<Sample>)> {
    let x = random_element_with::<R, _>(rng, &cfg.profile);
    let sym: Symbol<R> = random_gen_symbol(rng, cfg.profile.num_gens, cfg.symbol_law);
    let hx = hilbert_free(&x, &sym);
    let r = cfg.norm_radius(x.max_len());
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &p in &cfg.ps {
        let nx = norm_of(&x, p, r)?;
        let ratio = if nx == 0.0 { 1.0 } else { norm_of(&hx, p, r)? / nx };
        rows.push(vec![trial.to_string(), num(p), x.support_len().to_string(), x.max_len().to_string(), num(ratio)]);
        samples.push(sample("", p, ratio));
    }
    Ok((rows, samples))
}

fn hilbert_ratio(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let col = match cfg.arith {
        Arith::Exact => run_trials(cfg, |i, rng| ratio_trial::<Rational>(cfg, i, rng))?,
        Arith::Float => run_trials(cfg, |i, rng| ratio_trial::<f64>(cfg, i, rng))?,
    };
    let mut assertions = Vec::new();
    if cfg.symbol_law != SymbolLaw::Disc {
        assertions.push(bound_check("ratio_within_c_p", &col.samples, "", |p| Ok(1.0 / bound_c(p)?), bound_c)?);
        assertions.extend(p2_check(&col.samples, ""));
    } else {
        assertions.push(bound_check("ratio_below_c_p", &col.samples, "", |_| Ok(0.0), bound_c)?);
    }
    let gs = groups(&col.samples);
    let maxima: Vec<(f64, f64)> = gs.iter().filter_map(|g| g.p.map(|p| (p, g.max))).collect();
    let extra = json!({
        "loglog_slope_max_ratio": loglog_slope(&maxima),
        "gamma": gamma(),
        "bound_c": cfg.ps.iter().map(|&p| json!({"p": p, "c": bound_c(p).ok()})).collect::<Vec<_>>(),
    });
    Ok(finish(cfg, col, assertions, extra))
}

/// `τ(x)λ_e` and `L_{g_k} x` for every letter.
fn first_letter_family<C: Coeff>(x: &Element<C>, num_gens: u32) -> Vec<Element<C>> {
    let n = num_gens.max(x.max_generator());
    std::iter::once(project_trace(x)).chain(alphabet(n).into_iter().map(|k| left_prefix(&Word::gen(k), x))).collect()
}

fn last_letter_family<C: Coeff>(x: &Element<C>, num_gens: u32) -> Vec<Element<C>> {
    let n = num_gens.max(x.max_generator());
    std::iter::once(project_trace(x)).chain(alphabet(n).into_iter().map(|k| right_suffix(&Word::gen(k), x))).collect()
}

fn khintchine_trial<R: Real>(cfg: &ExperimentConfig, trial: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Result<(Vec<Vec<String>>, Vec<Sample>)> {
    let x = random_element_with::<R, _>(rng, &cfg.profile);
    let fam = first_letter_family(&x, cfg.profile.num_gens);
    let r = cfg.norm_radius(x.max_len());
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &p in &cfg.ps {
        let column = square_function_norm(&fam, p, SquareMode::Column, Some(r))?;
        let row = square_function_norm(&fam, p, SquareMode::Row, Some(r))?;
        let nx = norm_of(&x, p, r)?;
        let ratio = column.max(row) / nx;
        rows.push(vec![
            trial.to_string(),
            num(p),
            x.support_len().to_string(),
            x.max_len().to_string(),
            num(column),
            num(row),
            num(nx),
            num(ratio),
        ]);
        samples.push(sample("", p, ratio));
    }
    Ok((rows, samples))
}

fn khintchine(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let col = match cfg.arith {
        Arith::Exact => run_trials(cfg, |i, rng| khintchine_trial::<Rational>(cfg, i, rng))?,
        Arith::Float => run_trials(cfg, |i, rng| khintchine_trial::<f64>(cfg, i, rng))?,
    };
    let k = |p: f64| Ok(2f64.sqrt() * bound_c(p)?);
    let mut assertions = vec![bound_check("cr_ratio_within_sqrt2_c_p", &col.samples, "", |p| Ok(1.0 / k(p)?), k)?];
    assertions.extend(p2_check(&col.samples, ""));
    Ok(finish(cfg, col, assertions, json!({})))
}

/// Reduced word of length `len ≥ 1` starting with `first` and ending with
/// `last`, by rejection.
fn word_between<G: Rng>(rng: &mut G, num_gens: u32, len: usize, first: i32, last: i32) -> Option<Word> {
    if len == 1 {
        return (first == last).then(|| Word::gen(first));
    }
    for _ in 0..10_000 {
        let mid = random_word(rng, num_gens, len - 2);
        let w = reduce_concat(&reduce_concat(&Word::gen(first), &mid), &Word::gen(last));
        if w.len() == len && w.first() == Some(first) && w.last() == Some(last) {
            return Some(w);
        }
    }
    None
}

fn rosenthal(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let n = cfg.profile.num_gens;
    let col = run_trials(cfg, |trial, rng| {
        let letters = alphabet(n);
        let mut image = letters.clone();
        for i in (1..image.len()).rev() {
            image.swap(i, rng.random_range(0..=i));
        }
        let mut parts: Vec<Element<C64>> = Vec::new();
        for (k, phi) in letters.iter().zip(&image) {
            let mut a = Element::scalar_zero();
            for _ in 0..rng.random_range(1..=cfg.profile.max_terms) {
                let len = rng.random_range(1..=cfg.profile.max_len.max(2));
                if let Some(w) = word_between(rng, n, len, *k, *phi) {
                    a.add_term(w, random_scalar::<f64, _>(rng, cfg.profile.coeff_law));
                }
            }
            parts.push(a);
        }
        let x = parts.iter().try_fold(Element::scalar_zero(), |acc, a| acc.add(a))?;
        let r = cfg.norm_radius(x.max_len());
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for &p in &cfg.ps {
            let nx = norm_of(&x, p, r)?;
            let l2 = x.norm2();
            let lp_sum = parts.iter().map(|a| norm_of(a, p, r).map(|v| v.powf(p))).sum::<Result<f64>>()?.powf(1.0 / p);
            let ratio = if nx == 0.0 { 1.0 } else { l2.max(lp_sum) / nx };
            rows.push(vec![
                trial.to_string(),
                num(p),
                x.support_len().to_string(),
                x.max_len().to_string(),
                num(l2),
                num(lp_sum),
                num(nx),
                num(ratio),
            ]);
            samples.push(sample("", p, ratio));
        }
        Ok((rows, samples))
    })?;
    let lower = |p: f64| Ok(if p == 2.0 { 1.0 } else { bound_beta(p)?.powi(-2) });
    let upper = |p: f64| Ok(2.0 * bound_c(p)?.powi(2) + 2.0);
    let mut assertions = vec![bound_check("rosenthal_within_bounds", &col.samples, "", lower, upper)?];
    assertions.extend(p2_check(&col.samples, ""));
    Ok(finish(cfg, col, assertions, json!({"combine": "max"})))
}

fn improvedfree(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let col = run_trials(cfg, |trial, rng| {
        let x = random_element_with::<f64, _>(rng, &cfg.profile);
        let r = cfg.norm_radius(x.max_len());
        let left_fam = first_letter_family(&x, cfg.profile.num_gens);
        let right_fam = last_letter_family(&x, cfg.profile.num_gens);
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for &p in &cfg.ps {
            let l2 = x.norm2();
            let left = square_function_norm(&left_fam, p, SquareMode::Column, Some(r))?.max(l2);
            let right = square_function_norm(&right_fam, p, SquareMode::Row, Some(r))?.max(l2);
            let nx = norm_of(&x, p, r)?;
            rows.push(vec![
                trial.to_string(),
                num(p),
                x.support_len().to_string(),
                x.max_len().to_string(),
                num(left),
                num(right),
                num(nx),
                num(left / nx),
                num(right / nx),
            ]);
            samples.push(sample("left ", p, left / nx));
            samples.push(sample("right ", p, right / nx));
        }
        Ok((rows, samples))
    })?;
    let lower = |p: f64| Ok(if p == 2.0 { 1.0 } else { 1.0 / bound_beta(p)? });
    let upper = |p: f64| Ok(2f64.sqrt() * bound_c(p)?);
    let mut assertions = vec![
        bound_check("left_within_bounds", &col.samples, "left", lower, upper)?,
        bound_check("right_within_bounds", &col.samples, "right", lower, upper)?,
    ];
    assertions.extend(p2_check(&col.samples, "left "));
    assertions.extend(p2_check(&col.samples, "right "));
    Ok(finish(cfg, col, assertions, json!({})))
}

fn random_long_element<G: Rng>(rng: &mut G, profile: &Profile, min_len: usize, max_len: usize) -> Element<C64> {
    let mut x = Element::scalar_zero();
    for _ in 0..rng.random_range(1..=profile.max_terms) {
        let len = rng.random_range(min_len..=max_len.max(min_len));
        x.add_term(random_word(rng, profile.num_gens, len), random_scalar::<f64, _>(rng, profile.coeff_law));
    }
    x
}

fn length_reduction(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let col = run_trials(cfg, |trial, rng| {
        let d = cfg.d_for(trial);
        let x = random_long_element(rng, &cfg.profile, d, cfg.profile.max_len);
        let r = cfg.norm_radius(x.max_len());
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for &p in &cfg.ps {
            let rep = iota_norm(&x, d, p, Combine::Max, Some(r))?;
            let nx = norm_of(&x, p, r)?;
            let ratio = rep.combined / nx;
            rows.push(vec![
                trial.to_string(),
                num(p),
                d.to_string(),
                x.support_len().to_string(),
                x.max_len().to_string(),
                num(rep.column),
                num(rep.rows.iter().copied().fold(0.0, f64::max)),
                num(nx),
                num(ratio),
            ]);
            samples.push(Sample { key: format!("d={d} {}", pkey(p)), p: Some(p), value: ratio });
        }
        Ok((rows, samples))
    })?;
    let mut assertions = Vec::new();
    let ds: Vec<usize> = match cfg.d {
        Some(d) => vec![d],
        None => (1..=3).filter(|d| *d <= cfg.trials).collect(),
    };
    for d in ds {
        let lower = move |p: f64| Ok(if p == 2.0 { 1.0 } else { bound_beta(p)?.powi(-(d as i32)) });
        let upper = move |p: f64| Ok((2f64.sqrt() * bound_c(p)?).powi(d as i32));
        assertions.push(bound_check(&format!("d={d}_within_bounds"), &col.samples, &format!("d={d} "), lower, upper)?);
    }
    let at2: Vec<Sample> = col.samples.iter().filter(|s| s.p == Some(2.0)).map(|s| Sample { key: String::new(), ..s.clone() }).collect();
    assertions.extend(p2_check(&at2, ""));
    Ok(finish(cfg, col, assertions, json!({"combine": "max"})))
}

/// Re-roots a path so that it starts at a word of length 1 by translating
/// with the inverse of the root's prefix; norms of path-supported
/// elements are unchanged by left translation.
fn rerooted(path: &GeodesicPath) -> Result<(GeodesicPath, Word)> {
    let root = path.root();
    let shift = invert(&root.prefix(root.len() - 1));
    let words = path.words.iter().map(|w| reduce_concat(&shift, w)).collect();
    Ok((GeodesicPath::new(words)?, shift))
}

fn lp_blocks(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let part = build_partition(cfg.partition, cfg.profile.num_gens, cfg.radius, cfg.seed)?;
    let col = run_trials(cfg, |trial, rng| {
        let count = rng.random_range(1..=cfg.profile.max_terms.min(part.num_paths()));
        let mut chosen: Vec<usize> = (0..part.num_paths()).collect();
        for i in 0..count {
            let j = rng.random_range(i..chosen.len());
            chosen.swap(i, j);
        }
        chosen.truncate(count);
        chosen.sort_unstable();
        let mut xs = Vec::new();
        let mut dyadic = Vec::new();
        let mut smooth = Vec::new();
        for &n in &chosen {
            let path = &part.paths[n];
            let mut x = Element::<C64>::scalar_zero();
            for w in &path.words {
                x.add_term(w.clone(), random_scalar::<f64, _>(rng, cfg.profile.coeff_law));
            }
            let levels = usize::BITS - path.len().leading_zeros();
            for k in 0..levels {
                dyadic.push(dyadic_block(path, k, &x));
            }
            let (moved, shift) = rerooted(path)?;
            let y = Element::lambda(shift).mul(&x)?;
            for k in 1..=levels + 1 {
                smooth.push(smooth_block(&moved, k, &y)?);
            }
            xs.push(x);
        }
        let r = cfg.radius.max(1);
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for &p in &cfg.ps {
            let rhs = square_function_norm(&xs, p, SquareMode::Column, Some(2 * r))?;
            let dn = square_function_norm(&dyadic, p, SquareMode::Column, Some(2 * r))?;
            let sn = square_function_norm(&smooth, p, SquareMode::Column, Some(2 * r))?;
            rows.push(vec![
                trial.to_string(),
                num(p),
                count.to_string(),
                r.to_string(),
                num(dn),
                num(sn),
                num(rhs),
                num(dn / rhs),
                num(sn / rhs),
            ]);
            samples.push(sample("dyadic ", p, dn / rhs));
            samples.push(sample("smooth ", p, sn / rhs));
        }
        Ok((rows, samples))
    })?;
    let assertions: Vec<Assertion> = p2_check(&col.samples, "dyadic ").into_iter().collect();
    Ok(finish(cfg, col, assertions, json!({"paths": part.num_paths(), "partition": cfg.partition})))
}

fn haagerup(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let col = run_trials(cfg, |trial, rng| {
        let d = cfg.d_for(trial);
        let x = random_long_element(rng, &cfg.profile, d, d);
        let l2 = x.norm2();
        let mut radii = vec![d, d + 2, cfg.radius.max(d)];
        radii.sort_unstable();
        radii.dedup();
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for r in radii {
            let op = op_lower_at(&x, r, split_seed(cfg.seed ^ 0x4841_4147, trial as u64))?;
            let ratio = op / l2;
            rows.push(vec![trial.to_string(), d.to_string(), r.to_string(), x.support_len().to_string(), num(op), num(l2), num(ratio)]);
            samples.push(Sample { key: format!("d={d}"), p: None, value: ratio });
        }
        Ok((rows, samples))
    })?;
    let mut worst = String::new();
    let mut pass = true;
    for s in &col.samples {
        let d: f64 = s.key.trim_start_matches("d=").parse().unwrap_or(0.0);
        if s.value > (d + 1.0) * (1.0 + BOUND_SLACK) {
            pass = false;
            worst = format!("{}: ratio {} above {}", s.key, s.value, d + 1.0);
        }
    }
    let detail = if pass { "op_lower <= (d+1)|x|_2 everywhere".to_string() } else { worst };
    Ok(finish(cfg, col, vec![Assertion { name: "haagerup_bound".into(), pass, detail }], json!({})))
}

/// Nonzero entries of the truncated commutator `[R_h, λ_g]` on the ball of
/// radius `R`. Columns are basis words, rows their images.
pub fn commutator_entries(h: &Word, g: &Word, num_gens: u32, radius: usize) -> Result<Vec<(Word, Word, i32)>> {
    let ball = enumerate_ball(num_gens, radius)?;
    let mut out = Vec::new();
    for w in ball {
        let gw = reduce_concat(g, &w);
        if gw.len() > radius {
            continue;
        }
        let v = suffix_leq(h, &gw) as i32 - suffix_leq(h, &w) as i32;
        if v != 0 {
            out.push((gw, w, v));
        }
    }
    Ok(out)
}

/// Rank of the truncated `[R_h, λ_g]`. `λ_g` permutes basis vectors, so
/// each column holds at most one nonzero and distinct columns hit distinct
/// rows: the rank is the number of nonzero entries.
pub fn commutator_rank(h: &Word, g: &Word, num_gens: u32, radius: usize) -> Result<usize> {
    Ok(commutator_entries(h, g, num_gens, radius)?.len())
}

fn commutator(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let h = Word::gen(1);
    let g = Word::new(vec![2, 1])?;
    let n = cfg.profile.num_gens.max(2);
    let mut rows = Vec::new();
    let mut ranks = Vec::new();
    for r in 1..=cfg.radius + 1 {
        let rank = commutator_rank(&h, &g, n, r)?;
        let side = enumerate_ball(n, r)?.len();
        rows.push(vec![r.to_string(), "1".into(), "2 1".into(), side.to_string(), rank.to_string()]);
        ranks.push((r, rank));
    }
    let tail: Vec<&(usize, usize)> = ranks.iter().filter(|(r, _)| *r >= 4).collect();
    let pass = tail.windows(2).all(|w| w[0].1 == w[1].1);
    let detail = format!("ranks {:?}", ranks);
    let samples = ranks.iter().map(|(r, k)| Sample { key: format!("R={r:02}"), p: None, value: *k as f64 }).collect();
    let col = Collected { rows, samples };
    Ok(finish(cfg, col, vec![Assertion { name: "rank_stabilizes_from_R4".into(), pass, detail }], json!({"h": [1], "g": [2, 1]})))
}

fn matrix_unit(dim: usize, i: usize, j: usize) -> CMatrix<f64> {
    CMatrix::unit(dim, i, j)
}

fn cb_probe(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let dims: Vec<usize> = (1..=cfg.profile.max_terms.clamp(1, 4)).collect();
    let col = run_trials(cfg, |trial, rng| {
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for &dim in &dims {
            let n = dim as i32;
            let triangular = trial == 0;
            let mut entries = Vec::new();
            let mut x = Element::<CMatrix<f64>>::zero(dim);
            for i in 1..=n {
                for j in 1..=n {
                    let w = Word::new(vec![i, j])?;
                    x.add_term(w.clone(), matrix_unit(dim, (i - 1) as usize, (j - 1) as usize));
                    let s = if triangular { if i <= j { 1.0 } else { -1.0 } } else if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    entries.push((w, Complex::new(s, 0.0)));
                }
            }
            let sym = Symbol::with_entries(SymbolKind::Lenblock, 2, Complex::one(), entries)?;
            let hx = hilbert_block(&x, &sym, BlockVariant::Ld, 2);
            for &p in &cfg.ps {
                let r = cfg.norm_radius(2);
                let ratio = norm_of(&hx, p, r)? / norm_of(&x, p, r)?;
                let pattern = if triangular { "triangular" } else { "random" };
                rows.push(vec![trial.to_string(), dim.to_string(), n.to_string(), num(p), pattern.into(), num(ratio)]);
                samples.push(Sample { key: format!("dim={dim} {}", pkey(p)), p: Some(p), value: ratio });
            }
        }
        Ok((rows, samples))
    })?;
    let gs = groups(&col.samples);
    let growth: Vec<Value> = cfg
        .ps
        .iter()
        .map(|&p| {
            let maxima: Vec<f64> = gs.iter().filter(|g| g.p == Some(p)).map(|g| g.max).collect();
            json!({"p": p, "max_by_dim": maxima, "monotone": maxima.windows(2).all(|w| w[1] >= w[0] - 1e-12)})
        })
        .collect();
    let assertions: Vec<Assertion> = p2_check(&col.samples, "dim=").into_iter().collect();
    Ok(finish(cfg, col, assertions, json!({"growth": growth, "dims": dims})))
}

/// Outcome of comparing a summary with a stored lock file.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LockOutcome {
    Created,
    Matched,
    Mismatch { details: Vec<String> },
}

/// Stores the summary's group statistics on first use; afterwards asserts
/// agreement within [`LOCK_TOLERANCE`] (relative).
pub fn check_lock(summary: &Value, path: &Path) -> Result<LockOutcome> {
    let stats = |v: &Value| -> BTreeMap<String, [f64; 3]> {
        v.get("groups")
            .and_then(Value::as_array)
            .map(|gs| {
                gs.iter()
                    .filter_map(|g| {
                        let f = |k: &str| g.get(k).and_then(Value::as_f64);
                        Some((g.get("key")?.as_str()?.to_string(), [f("min")?, f("median")?, f("max")?]))
                    })
                    .collect()
            })
            .unwrap_or_default()
    };
    if !path.exists() {
        let lock = json!({"schema": SUMMARY_SCHEMA, "experiment": summary.get("experiment"), "groups": summary.get("groups")});
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, serde_json::to_string_pretty(&lock)? + "\n")?;
        return Ok(LockOutcome::Created);
    }
    let stored: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    if stored.get("experiment") != summary.get("experiment") {
        return Err(Error::InvalidInput("lock file belongs to a different experiment".into()));
    }
    let (old, new) = (stats(&stored), stats(summary));
    let mut details = Vec::new();
    for (key, o) in &old {
        match new.get(key) {
            None => details.push(format!("{key}: missing")),
            Some(n) => {
                for (label, (a, b)) in ["min", "median", "max"].iter().zip(o.iter().zip(n)) {
                    let scale = a.abs().max(1e-300);
                    if (a - b).abs() > LOCK_TOLERANCE * scale {
                        details.push(format!("{key} {label}: locked {a}, now {b}"));
                    }
                }
            }
        }
    }
    Ok(if details.is_empty() { LockOutcome::Matched } else { LockOutcome::Mismatch { details } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: ExperimentName) -> ExperimentConfig {
        ExperimentConfig { trials: 6, seed: 3, radius: 4, ..ExperimentConfig::new(name) }
    }

    #[test]
    fn every_experiment_runs_and_passes() {
        for name in ExperimentName::all() {
            let mut cfg = small(name);
            if name == ExperimentName::CbProbe {
                cfg.ps = vec![2.0, 4.0];
                cfg.profile.max_terms = 3;
            }
            let r = run_experiment(&cfg).unwrap();
            assert!(r.all_pass(), "{name}: {:?}", r.assertions);
            assert_eq!(r.header, name.header());
            assert!(r.rows.iter().all(|row| row.len() == r.header.len()), "{name}");
        }
    }

    #[test]
    fn hilbert_ratio_csv_is_stable() {
        let cfg = small(ExperimentName::HilbertRatio);
        let a = run_experiment(&cfg).unwrap().to_csv();
        assert!(a.starts_with("trial,p,terms,maxlen,ratio\n"));
        assert_eq!(a, run_experiment(&cfg).unwrap().to_csv());
    }

    #[test]
    fn exact_khintchine_is_parseval_at_two() {
        let cfg = ExperimentConfig { arith: Arith::Exact, ps: vec![2.0, 4.0], ..small(ExperimentName::Khintchine) };
        assert!(run_experiment(&cfg).unwrap().all_pass());
        let bad = ExperimentConfig { arith: Arith::Exact, ps: vec![3.0], ..small(ExperimentName::Khintchine) };
        assert!(run_experiment(&bad).is_err());
    }

    #[test]
    fn commutator_rank_matches_dense_rank() {
        let (h, g) = (Word::gen(1), Word::new(vec![2, 1]).unwrap());
        for r in 1..=4 {
            let ball = enumerate_ball(2, r).unwrap();
            let idx: BTreeMap<&Word, usize> = ball.iter().enumerate().map(|(i, w)| (w, i)).collect();
            let mut m = nalgebra::DMatrix::<f64>::zeros(ball.len(), ball.len());
            for (row, colw, v) in commutator_entries(&h, &g, 2, r).unwrap() {
                m[(idx[&row], idx[&colw])] = v as f64;
            }
            assert_eq!(m.rank(1e-9), commutator_rank(&h, &g, 2, r).unwrap(), "R={r}");
        }
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&p: &f64| (p, 3.0 * p.powf(1.27))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.27).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn lock_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let lock = dir.path().join("lock.json");
        let cfg = small(ExperimentName::HilbertRatio);
        let s = run_experiment(&cfg).unwrap().summary;
        assert_eq!(check_lock(&s, &lock).unwrap(), LockOutcome::Created);
        assert_eq!(check_lock(&s, &lock).unwrap(), LockOutcome::Matched);
        let other = run_experiment(&ExperimentConfig { seed: 99, trials: 2, ..cfg }).unwrap().summary;
        assert!(matches!(check_lock(&other, &lock).unwrap(), LockOutcome::Mismatch { .. } | LockOutcome::Matched));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small(ExperimentName::Rosenthal);
        cfg.ps = vec![1.5];
        assert!(run_experiment(&cfg).is_err());
        cfg.ps = vec![0.5];
        cfg.name = ExperimentName::HilbertRatio;
        assert!(run_experiment(&cfg).is_err());
        let empty = ExperimentConfig { trials: 0, ..small(ExperimentName::Haagerup) };
        assert!(run_experiment(&empty).is_err());
    }
}
