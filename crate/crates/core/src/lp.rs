//! Noncommutative L^p norms: exact even moments by convolution, and general
//! exponents through the spectral measure of `|x|²` at `δ_e` on a truncated
//! regular representation.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{rng_from_seed, Element};
use crate::error::{Error, Result};
use crate::scalar::{Coeff, Real};
use crate::words::{enumerate_ball, reduce_concat, Word};

type C64 = Complex<f64>;

/// Default cap on the support size of intermediate products.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;
/// Relative breakdown threshold of the Lanczos recurrence.
pub const EIGEN_TOL: f64 = 1e-11;
/// Default bound on Lanczos steps.
pub const DEFAULT_LANCZOS_STEPS: usize = 400;

/// `τ((x*x)^m)`, exact in exact rings.
pub fn moment_even<C: Coeff>(x: &Element<C>, m: usize) -> Result<C::Real> {
    moment_even_capped(x, m, DEFAULT_SUPPORT_CAP)
}

pub fn moment_even_capped<C: Coeff>(x: &Element<C>, m: usize, cap: usize) -> Result<C::Real> {
    if m == 0 {
        return Err(Error::InvalidInput("moment order must be positive".into()));
    }
    // τ((x*x)^m) = ‖y‖₂² with y = (x*x)^{m/2} or x (x*x)^{(m-1)/2}.
    let xx = x.adjoint().mul(x)?;
    let mut y = if m.is_multiple_of(2) { xx.clone() } else { x.clone() };
    let mut need = if m.is_multiple_of(2) { m / 2 - 1 } else { (m - 1) / 2 };
    while need > 0 {
        y = y.mul(&xx)?;
        if y.support_len() > cap {
            return Err(Error::ResourceCap { what: "moment support", size: y.support_len(), cap });
        }
        need -= 1;
    }
    Ok(y.norm2_sqr())
}

/// `‖x‖_p` for even `p` from [`moment_even`].
pub fn moment_norm<C: Coeff>(x: &Element<C>, p: usize) -> Result<f64> {
    if p == 0 || !p.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("moment norms need an even exponent, got {p}")));
    }
    Ok(moment_even(x, p / 2)?.as_f64().max(0.0).powf(1.0 / p as f64))
}

/// `τ(y^q)` for an integer `q ≥ 1`, as a real number (real part).
pub fn trace_power<C: Coeff>(y: &Element<C>, q: usize) -> Result<f64> {
    let mut acc = y.clone();
    for _ in 1..q {
        acc = acc.mul(y)?;
        if acc.support_len() > DEFAULT_SUPPORT_CAP {
            return Err(Error::ResourceCap { what: "power support", size: acc.support_len(), cap: DEFAULT_SUPPORT_CAP });
        }
    }
    Ok(acc.scalar_trace().re.as_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactMoment,
    Spectral,
    OpLower,
}

/// A computed norm together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// Exponent; `null` in JSON stands for `p = ∞`.
    #[serde(with = "exponent")]
    pub p: f64,
    pub method: NormMethod,
    pub value: f64,
    pub radius: Option<usize>,
    /// `|value(R) - value(R-1)|` when the smaller radius still covers the
    /// support.
    pub error_indicator: Option<f64>,
}

mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_finite() {
            s.serialize_f64(*p)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Left multiplication by `x` compressed to the span of a word ball, stored
/// as sparse `dim x dim` blocks.
#[derive(Clone, Debug)]
pub struct TruncatedRep {
    pub radius: usize,
    pub num_gens: u32,
    pub dim: usize,
    pub words: Vec<Word>,
    index: HashMap<Word, usize>,
    /// `(row, col, block)`, block row-major.
    entries: Vec<(usize, usize, Vec<C64>)>,
}

impl TruncatedRep {
    pub fn new<C: Coeff>(x: &Element<C>, radius: usize) -> Result<Self> {
        let num_gens = x.max_generator().max(1);
        Self::with_gens(x, radius, num_gens)
    }

    pub fn with_gens<C: Coeff>(x: &Element<C>, radius: usize, num_gens: u32) -> Result<Self> {
        let words = enumerate_ball(num_gens, radius)?;
        let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let terms: Vec<(Word, Vec<C64>)> = x.terms().map(|(g, c)| (g.clone(), c.to_block())).collect();
        let mut acc: BTreeMap<(usize, usize), Vec<C64>> = BTreeMap::new();
        for (col, v) in words.iter().enumerate() {
            for (g, block) in &terms {
                let w = reduce_concat(g, v);
                if let Some(&row) = index.get(&w) {
                    let slot = acc.entry((row, col)).or_insert_with(|| vec![C64::new(0.0, 0.0); block.len()]);
                    for (a, b) in slot.iter_mut().zip(block) {
                        *a += b;
                    }
                }
            }
        }
        let entries = acc.into_iter().map(|((r, c), b)| (r, c, b)).collect();
        Ok(TruncatedRep { radius, num_gens, dim: x.dim(), words, index, entries })
    }

    /// Side length of the (block-expanded) matrix.
    pub fn side(&self) -> usize {
        self.words.len() * self.dim
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (r, c, b) in &self.entries {
            for i in 0..d {
                let mut s = C64::new(0.0, 0.0);
                for j in 0..d {
                    s += b[i * d + j] * v[c * d + j];
                }
                out[r * d + i] += s;
            }
        }
        out
    }

    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (r, c, b) in &self.entries {
            for j in 0..d {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..d {
                    s += b[i * d + j].conj() * v[r * d + i];
                }
                out[c * d + j] += s;
            }
        }
        out
    }

    /// `v ↦ T* T v`.
    pub fn apply_gram(&self, v: &[C64]) -> Vec<C64> {
        self.apply_adjoint(&self.apply(v))
    }

    /// Dense copy of `T`, for small oracles.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.side();
        let d = self.dim;
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for (r, c, b) in &self.entries {
            for i in 0..d {
                for j in 0..d {
                    m[(r * d + i, c * d + j)] += b[i * d + j];
                }
            }
        }
        m
    }

    fn delta_e(&self, i: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.side()];
        v[self.index[&Word::e()] * self.dim + i] = C64::new(1.0, 0.0);
        v
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lanczos with full reorthogonalization on a Hermitian operator. Returns
/// the Ritz values and the squared first components of the Ritz vectors,
/// i.e. the Gauss quadrature of the spectral measure at `start`.
pub fn lanczos_quadrature(apply: impl Fn(&[C64]) -> Vec<C64>, start: &[C64], max_steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n0 = norm(start);
    if n0 == 0.0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut basis: Vec<Vec<C64>> = vec![start.iter().map(|z| z / n0).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = max_steps.min(start.len()).max(1);
    let mut scale = 0.0f64;
    loop {
        let q = basis.last().expect("nonempty");
        let mut w = apply(q);
        let a = dot(q, &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nb = norm(&w);
        scale = scale.max(a.abs()).max(nb);
        if basis.len() >= steps || nb <= EIGEN_TOL * scale.max(1e-300) {
            break;
        }
        beta.push(nb);
        basis.push(w.into_iter().map(|z| z / nb).collect());
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::try_new(t, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("tridiagonal eigensolver did not converge".into()))?;
    let weights = (0..k).map(|j| eig.eigenvectors[(0, j)].powi(2) * n0 * n0).collect();
    Ok((eig.eigenvalues.iter().copied().collect(), weights))
}

/// Spectral measure of `|x|²` at `δ_e` (averaged over `δ_e ⊗ e_i` for matrix
/// coefficients), as (eigenvalue, weight) pairs.
pub fn delta_e_measure(rep: &TruncatedRep, max_steps: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let d = rep.dim as f64;
    for i in 0..rep.dim {
        let (vals, ws) = lanczos_quadrature(|v| rep.apply_gram(v), &rep.delta_e(i), max_steps)?;
        out.extend(vals.into_iter().zip(ws).map(|(l, w)| (l.max(0.0), w / d)));
    }
    Ok(out)
}

fn spectral_value(measure: &[(f64, f64)], p: f64) -> f64 {
    measure.iter().map(|(l, w)| w * l.powf(p / 2.0)).sum::<f64>().max(0.0).powf(1.0 / p)
}

/// Largest singular value of the truncation, by Lanczos from a seeded
/// random start. A lower bound for `‖x‖_∞`.
pub fn op_lower_at<C: Coeff>(x: &Element<C>, radius: usize, seed: u64) -> Result<f64> {
    let rep = TruncatedRep::new(x, radius)?;
    op_lower_rep(&rep, seed, DEFAULT_LANCZOS_STEPS)
}

pub fn op_lower_rep(rep: &TruncatedRep, seed: u64, max_steps: usize) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let start: Vec<C64> = (0..rep.side())
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let (vals, _) = lanczos_quadrature(|v| rep.apply_gram(v), &start, max_steps)?;
    Ok(vals.into_iter().fold(0.0f64, f64::max).sqrt())
}

/// Options for spectral norm estimation.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralOpts {
    pub max_steps: usize,
    pub seed: u64,
    /// Also evaluate at `R - 1` for the error indicator.
    pub error_indicator: bool,
}

impl Default for SpectralOpts {
    fn default() -> Self {
        SpectralOpts { max_steps: DEFAULT_LANCZOS_STEPS, seed: 0, error_indicator: true }
    }
}

/// `‖x‖_p` from the truncated regular representation at radius `R`.
pub fn norm_spectral<C: Coeff>(x: &Element<C>, p: f64, radius: usize) -> Result<NormReport> {
    norm_spectral_with(x, p, radius, &SpectralOpts::default())
}

pub fn norm_spectral_with<C: Coeff>(x: &Element<C>, p: f64, radius: usize, opts: &SpectralOpts) -> Result<NormReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("exponent must be at least 1, got {p}")));
    }
    if radius < x.max_len() {
        return Err(Error::InvalidInput(format!("radius {radius} below support length {}", x.max_len())));
    }
    let eval = |r: usize| -> Result<f64> {
        let rep = TruncatedRep::new(x, r)?;
        if p.is_infinite() {
            op_lower_rep(&rep, opts.seed, opts.max_steps)
        } else {
            Ok(spectral_value(&delta_e_measure(&rep, opts.max_steps)?, p))
        }
    };
    let value = eval(radius)?;
    let error_indicator = if opts.error_indicator && radius > x.max_len() {
        Some((value - eval(radius - 1)?).abs())
    } else {
        None
    };
    let method = if p.is_infinite() { NormMethod::OpLower } else { NormMethod::Spectral };
    Ok(NormReport { p, method, value, radius: Some(radius), error_indicator })
}

/// Even `p` through moments, other exponents spectrally at the given radius.
pub fn norm_auto<C: Coeff>(x: &Element<C>, p: f64, radius: usize) -> Result<NormReport> {
    if p.fract() == 0.0 && p >= 2.0 && (p as usize).is_multiple_of(2) {
        let value = moment_norm(x, p as usize)?;
        return Ok(NormReport { p, method: NormMethod::ExactMoment, value, radius: None, error_indicator: None });
    }
    norm_spectral(x, p, radius)
}

/// `‖y‖_q` for a positive element `y`: exact trace powers for integer `q`,
/// spectral otherwise.
pub fn positive_norm<C: Coeff>(y: &Element<C>, q: f64, radius: Option<usize>) -> Result<f64> {
    if y.is_zero() {
        return Ok(0.0);
    }
    if q.fract() == 0.0 && q >= 1.0 {
        return Ok(trace_power(y, q as usize)?.max(0.0).powf(1.0 / q));
    }
    let r = radius.unwrap_or(0).max(2 * y.max_len());
    // |y|^q has spectral weights λ^{q/2} on y*y = y².
    Ok(norm_spectral(y, q, r)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareMode {
    Column,
    Row,
    CrMax,
}

/// `‖(x_k)‖_{L^p(ℓ₂^c)} = ‖Σ x_k* x_k‖_{p/2}^{1/2}`, its row version, or the
/// maximum of both (the `p ≥ 2` cr-norm).
pub fn square_function_norm<C: Coeff>(xs: &[Element<C>], p: f64, mode: SquareMode, radius: Option<usize>) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::InvalidInput(format!("square functions need p >= 2, got {p}")));
    }
    let Some(first) = xs.first() else { return Ok(0.0) };
    let dim = first.dim();
    let column = |adj: bool| -> Result<f64> {
        let mut y = Element::zero(dim);
        for x in xs {
            let t = if adj { x.mul(&x.adjoint())? } else { x.adjoint().mul(x)? };
            y = y.add(&t)?;
        }
        Ok(positive_norm(&y, p / 2.0, radius)?.sqrt())
    };
    match mode {
        SquareMode::Column => column(false),
        SquareMode::Row => column(true),
        SquareMode::CrMax => Ok(column(false)?.max(column(true)?)),
    }
}

/// How the components of the length reduction are combined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Max,
    Lp,
}

/// Component norms of the length-reduction map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IotaReport {
    pub d: usize,
    pub p: f64,
    /// Column square function of the tails indexed by the first `d` letters.
    pub column: f64,
    /// `rows[j]`, `j < d`: Schatten-`p` norm of the matrix `[c_{uv}]` with
    /// `|u| = j`.
    pub rows: Vec<f64>,
    pub combined: f64,
}

pub fn iota_norm<C: Coeff>(x: &Element<C>, d: usize, p: f64, combine: Combine, radius: Option<usize>) -> Result<IotaReport> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    if let Some(w) = x.support().find(|w| w.len() < d) {
        return Err(Error::InvalidInput(format!("support word {w:?} shorter than d = {d}")));
    }
    let mut tails: BTreeMap<Word, Element<C>> = BTreeMap::new();
    for (w, c) in x.terms() {
        tails.entry(w.prefix(d)).or_insert_with(|| Element::zero(x.dim())).add_term(w.tail(d), c.clone());
    }
    let tails: Vec<Element<C>> = tails.into_values().collect();
    let column = if tails.is_empty() { 0.0 } else { square_function_norm(&tails, p, SquareMode::Column, radius)? };
    let rows = (0..d).map(|j| schatten_of_split(x, j, p)).collect::<Result<Vec<_>>>()?;
    let comps = std::iter::once(column).chain(rows.iter().copied());
    let combined = match combine {
        Combine::Max => comps.fold(0.0, f64::max),
        Combine::Lp => comps.map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p),
    };
    Ok(IotaReport { d, p, column, rows, combined })
}

/// Schatten-`p` norm (with the normalized trace on matrix coefficients) of
/// `Σ_w c_w ⊗ e_{u(w), v(w)}` where `w = u v`, `|u| = j`.
fn schatten_of_split<C: Coeff>(x: &Element<C>, j: usize, p: f64) -> Result<f64> {
    let mut rows: BTreeMap<Word, usize> = BTreeMap::new();
    let mut cols: BTreeMap<Word, usize> = BTreeMap::new();
    for w in x.support() {
        let n = rows.len();
        rows.entry(w.prefix(j)).or_insert(n);
        let n = cols.len();
        cols.entry(w.tail(j)).or_insert(n);
    }
    if rows.is_empty() {
        return Ok(0.0);
    }
    let d = x.dim();
    let mut m = DMatrix::from_element(rows.len() * d, cols.len() * d, C64::new(0.0, 0.0));
    for (w, c) in x.terms() {
        let (r, k) = (rows[&w.prefix(j)], cols[&w.tail(j)]);
        let b = c.to_block();
        for a in 0..d {
            for e in 0..d {
                m[(r * d + a, k * d + e)] = b[a * d + e];
            }
        }
    }
    let sv = m.singular_values();
    Ok((sv.iter().map(|s| s.powf(p)).sum::<f64>() / d as f64).powf(1.0 / p))
}
