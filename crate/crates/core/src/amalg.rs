//! Reduced free products of finite-dimensional tracial *-algebras over the
//! scalars, in the basis of centered trace-orthonormal tensor words.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{random_scalar, Profile};
use crate::error::{Error, Result};
use crate::multipliers::{ParaFlag, Symbol};
use crate::scalar::{cx_negligible, cx_norm_sqr, Cx, Real};

/// Default cap on the number of stored words during a product.
pub const DEFAULT_AMALG_CAP: usize = 1_000_000;

/// A factor algebra with its faithful normalized trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorDesc {
    /// `ℂ^n` with point-mass weights, written `"n/d"` or decimals.
    Points(Vec<String>),
    /// `M_n` with the normalized trace.
    Matrix(usize),
}

impl FactorDesc {
    pub fn points(weights: &[&str]) -> Self {
        FactorDesc::Points(weights.iter().map(|s| s.to_string()).collect())
    }
}

/// The default three-factor setting used for fuzzing: two commutative
/// factors with uniform and skewed weights, and `M_2`.
pub fn default_factors() -> Vec<FactorDesc> {
    vec![FactorDesc::points(&["1/2", "1/2"]), FactorDesc::points(&["1/5", "4/5"]), FactorDesc::Matrix(2)]
}

/// Multiplication table of one factor over the basis `b_0 = 1, b_1, ...`.
#[derive(Clone, Debug)]
pub struct FactorTable<R: Real> {
    pub desc: FactorDesc,
    /// Concrete `n x n` matrices of the basis elements (row-major).
    pub basis: Vec<Vec<Cx<R>>>,
    /// `mult[i][j][k]` is the coefficient of `b_k` in `b_i b_j`.
    pub mult: Vec<Vec<Vec<Cx<R>>>>,
    /// `star[i][k]` is the coefficient of `b_k` in `b_i*`.
    pub star: Vec<Vec<Cx<R>>>,
}

impl<R: Real> FactorTable<R> {
    /// Number of basis elements including the unit.
    pub fn size(&self) -> usize {
        self.basis.len()
    }
}

/// A concrete matrix model of a factor: side, trace weights on the
/// diagonal, and a spanning set.
struct Concrete<R: Real> {
    n: usize,
    weights: Vec<R>,
    span: Vec<Vec<Cx<R>>>,
}

impl<R: Real> Concrete<R> {
    fn mul(&self, a: &[Cx<R>], b: &[Cx<R>]) -> Vec<Cx<R>> {
        let n = self.n;
        let mut out = vec![Complex::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if cx_negligible(&a[i * n + k]) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = out[i * n + j].clone() + a[i * n + k].clone() * b[k * n + j].clone();
                }
            }
        }
        out
    }

    fn star(&self, a: &[Cx<R>]) -> Vec<Cx<R>> {
        let n = self.n;
        (0..n * n).map(|ij| a[(ij % n) * n + ij / n].conj()).collect()
    }

    fn trace(&self, a: &[Cx<R>]) -> Cx<R> {
        (0..self.n).fold(Complex::zero(), |acc, i| acc + a[i * self.n + i].clone() * Complex::new(self.weights[i].clone(), R::zero()))
    }

    /// `τ(a* b)`.
    fn inner(&self, a: &[Cx<R>], b: &[Cx<R>]) -> Cx<R> {
        self.trace(&self.mul(&self.star(a), b))
    }

    fn identity(&self) -> Vec<Cx<R>> {
        let n = self.n;
        (0..n * n).map(|ij| if ij / n == ij % n { Complex::one() } else { Complex::zero() }).collect()
    }
}

fn unit_matrix<R: Real>(n: usize, i: usize, j: usize) -> Vec<Cx<R>> {
    let mut m = vec![Complex::zero(); n * n];
    m[i * n + j] = Complex::one();
    m
}

fn concrete<R: Real>(desc: &FactorDesc) -> Result<Concrete<R>> {
    match desc {
        FactorDesc::Points(ws) => {
            if ws.is_empty() {
                return Err(Error::InvalidInput("factor of dimension 0".into()));
            }
            let weights = ws
                .iter()
                .map(|s| R::parse_str(s).ok_or_else(|| Error::InvalidInput(format!("bad weight {s}"))))
                .collect::<Result<Vec<R>>>()?;
            check_weights(&weights)?;
            let n = weights.len();
            let span = (0..n).map(|i| unit_matrix(n, i, i)).collect();
            Ok(Concrete { n, weights, span })
        }
        FactorDesc::Matrix(n) => {
            let n = *n;
            if n == 0 {
                return Err(Error::InvalidInput("factor of dimension 0".into()));
            }
            let weights = vec![R::from_ratio(1, n as i64); n];
            let span = if n == 2 {
                // Pauli basis: trace-orthonormal with rational entries.
                let c = |re: i64, im: i64| Complex::new(R::from_ratio(re, 1), R::from_ratio(im, 1));
                vec![
                    vec![c(1, 0), c(0, 0), c(0, 0), c(-1, 0)],
                    vec![c(0, 0), c(1, 0), c(1, 0), c(0, 0)],
                    vec![c(0, 0), c(0, -1), c(0, 1), c(0, 0)],
                ]
            } else {
                (0..n * n).map(|ij| unit_matrix(n, ij / n, ij % n)).collect()
            };
            Ok(Concrete { n, weights, span })
        }
    }
}

fn check_weights<R: Real>(weights: &[R]) -> Result<()> {
    if weights.iter().any(|w| *w <= R::zero()) {
        return Err(Error::InvalidInput("trace is not faithful: weights must be positive".into()));
    }
    let total = weights.iter().fold(R::zero(), |a, w| a + w.clone());
    let off = (total - R::one()).abs();
    if if R::EXACT { !off.is_zero() } else { off.as_f64() > 1e-12 } {
        return Err(Error::InvalidInput("trace weights must sum to 1".into()));
    }
    Ok(())
}

fn is_small<R: Real>(z: &Cx<R>) -> bool {
    if R::EXACT {
        z.is_zero()
    } else {
        cx_norm_sqr(z).as_f64().sqrt() < 1e-12
    }
}

fn build_factor<R: Real>(desc: &FactorDesc) -> Result<FactorTable<R>> {
    let alg = concrete::<R>(desc)?;
    let mut basis = vec![alg.identity()];
    for v in &alg.span {
        let mut w = v.clone();
        for b in &basis {
            let c = alg.inner(b, &w);
            w = w.iter().zip(b).map(|(x, y)| x.clone() - c.clone() * y.clone()).collect();
        }
        let nsq = alg.inner(&w, &w).re;
        if is_small(&Complex::new(nsq.clone(), R::zero())) {
            continue;
        }
        let nrm = nsq
            .sqrt_exact()
            .ok_or_else(|| Error::NotRepresentable(format!("basis normalization needs sqrt({nsq:?}); use the float ring")))?;
        basis.push(w.into_iter().map(|x| Complex::new(x.re / nrm.clone(), x.im / nrm.clone())).collect());
    }
    let size = basis.len();
    let expand = |m: &[Cx<R>]| -> Result<Vec<Cx<R>>> {
        let coeffs: Vec<Cx<R>> = basis.iter().map(|b| alg.inner(b, m)).collect();
        // Closure check: the expansion must reproduce the matrix.
        let mut back: Vec<Cx<R>> = vec![Complex::zero(); m.len()];
        for (c, b) in coeffs.iter().zip(&basis) {
            for (x, y) in back.iter_mut().zip(b) {
                *x = x.clone() + c.clone() * y.clone();
            }
        }
        if back.iter().zip(m).any(|(a, b)| !is_small(&(a.clone() - b.clone()))) {
            return Err(Error::InvalidInput("factor basis does not span a *-algebra".into()));
        }
        Ok(coeffs)
    };
    let mut mult = Vec::with_capacity(size);
    for bi in &basis {
        let row = basis.iter().map(|bj| expand(&alg.mul(bi, bj))).collect::<Result<Vec<_>>>()?;
        mult.push(row);
    }
    let star = basis.iter().map(|b| expand(&alg.star(b))).collect::<Result<Vec<_>>>()?;
    let table = FactorTable { desc: desc.clone(), basis, mult, star };
    check_associative(&table)?;
    Ok(table)
}

fn table_mul<R: Real>(t: &FactorTable<R>, a: &[Cx<R>], b: &[Cx<R>]) -> Vec<Cx<R>> {
    let mut out = vec![Complex::zero(); t.size()];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            for (k, c) in t.mult[i][j].iter().enumerate() {
                out[k] = out[k].clone() + ai.clone() * bj.clone() * c.clone();
            }
        }
    }
    out
}

fn check_associative<R: Real>(t: &FactorTable<R>) -> Result<()> {
    let n = t.size();
    let e = |i: usize| -> Vec<Cx<R>> { (0..n).map(|k| if k == i { Complex::one() } else { Complex::zero() }).collect() };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let left = table_mul(t, &t.mult[i][j], &e(k));
                let right = table_mul(t, &e(i), &t.mult[j][k]);
                if left.iter().zip(&right).any(|(a, b)| !is_small(&(a.clone() - b.clone()))) {
                    return Err(Error::InvalidInput(format!("structure constants not associative at ({i},{j},{k})")));
                }
            }
        }
    }
    Ok(())
}

/// One slot of a tensor word: (factor, basis index), both 1-based.
pub type Slot = (u32, u32);
/// A reduced tensor word; adjacent slots lie in different factors.
pub type TensorWord = Vec<Slot>;

/// A finite free product with tabulated structure constants.
#[derive(Clone, Debug)]
pub struct AlgebraSpec<R: Real> {
    pub factors: Vec<FactorTable<R>>,
    pub cap: usize,
}

/// An element of the free product: the empty word carries the scalar part.
#[derive(Clone, Debug, PartialEq)]
pub struct AmalgElement<R: Real> {
    terms: BTreeMap<TensorWord, Cx<R>>,
}

impl<R: Real> Default for AmalgElement<R> {
    fn default() -> Self {
        AmalgElement { terms: BTreeMap::new() }
    }
}

impl<R: Real> AmalgElement<R> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: Cx<R>) -> Self {
        Self::monomial(Vec::new(), c)
    }

    pub fn one() -> Self {
        Self::scalar(Complex::one())
    }

    pub fn monomial(word: TensorWord, c: Cx<R>) -> Self {
        let mut x = Self::zero();
        x.add_term(word, c);
        x
    }

    pub fn add_term(&mut self, w: TensorWord, c: Cx<R>) {
        if cx_negligible(&c) {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if cx_negligible(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorWord, &Cx<R>)> {
        self.terms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Cx<R>) -> Self {
        self.map_scalar(|_| s.clone())
    }

    pub fn map_scalar(&self, mut f: impl FnMut(&TensorWord) -> Cx<R>) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.clone() * f(w));
        }
        out
    }

    pub fn filter(&self, mut keep: impl FnMut(&TensorWord) -> bool) -> Self {
        AmalgElement { terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect() }
    }

    /// Scalar part `τ(x)`.
    pub fn trace(&self) -> Cx<R> {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Complex::zero)
    }

    /// `E(x) = τ(x) 1`.
    pub fn expectation(&self) -> Self {
        self.filter(|w| w.is_empty())
    }

    /// `τ(x* x)`; tensor words are orthonormal.
    pub fn norm2_sqr(&self) -> R {
        self.terms.values().fold(R::zero(), |a, c| a + cx_norm_sqr(c))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| cx_norm_sqr(c).as_f64().sqrt()).fold(0.0, f64::max)
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }
}

/// Factor index sequence of a tensor word.
pub fn index_word(w: &TensorWord) -> Vec<u32> {
    w.iter().map(|s| s.0).collect()
}

impl<R: Real> AlgebraSpec<R> {
    pub fn build(factors: &[FactorDesc]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("at least one factor is required".into()));
        }
        let factors = factors.iter().map(build_factor).collect::<Result<Vec<_>>>()?;
        Ok(AlgebraSpec { factors, cap: DEFAULT_AMALG_CAP })
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    fn factor(&self, k: u32) -> Result<&FactorTable<R>> {
        k.checked_sub(1)
            .and_then(|i| self.factors.get(i as usize))
            .ok_or_else(|| Error::InvalidInput(format!("factor index {k} out of range")))
    }

    /// Checks slot ranges and the adjacency constraint.
    pub fn validate(&self, x: &AmalgElement<R>) -> Result<()> {
        for w in x.terms.keys() {
            for (pos, &(f, b)) in w.iter().enumerate() {
                let t = self.factor(f)?;
                if b == 0 || b as usize >= t.size() {
                    return Err(Error::InvalidInput(format!("basis index {b} invalid for factor {f}")));
                }
                if pos > 0 && w[pos - 1].0 == f {
                    return Err(Error::InvalidInput(format!("adjacent slots in the same factor in {w:?}")));
                }
            }
        }
        Ok(())
    }

    fn mul_words(&self, a: &[Slot], b: &[Slot], c: Cx<R>, out: &mut AmalgElement<R>) -> Result<()> {
        match (a.last(), b.first()) {
            (Some(&(fa, ia)), Some(&(fb, ib))) if fa == fb => {
                let prod = &self.factor(fa)?.mult[ia as usize][ib as usize];
                let (a0, b0) = (&a[..a.len() - 1], &b[1..]);
                for (k, ck) in prod.iter().enumerate().skip(1) {
                    if ck.is_zero() {
                        continue;
                    }
                    let mut w = Vec::with_capacity(a.len() + b.len() - 1);
                    w.extend_from_slice(a0);
                    w.push((fa, k as u32));
                    w.extend_from_slice(b0);
                    out.add_term(w, c.clone() * ck.clone());
                }
                if !prod[0].is_zero() {
                    self.mul_words(a0, b0, c * prod[0].clone(), out)?;
                }
            }
            _ => {
                let mut w = Vec::with_capacity(a.len() + b.len());
                w.extend_from_slice(a);
                w.extend_from_slice(b);
                out.add_term(w, c);
            }
        }
        if out.support_len() > self.cap {
            return Err(Error::ResourceCap { what: "free product support", size: out.support_len(), cap: self.cap });
        }
        Ok(())
    }

    pub fn mul(&self, x: &AmalgElement<R>, y: &AmalgElement<R>) -> Result<AmalgElement<R>> {
        let mut out = AmalgElement::zero();
        for (a, c) in &x.terms {
            for (b, d) in &y.terms {
                self.mul_words(a, b, c.clone() * d.clone(), &mut out)?;
            }
        }
        Ok(out)
    }

    /// Reverses each word and stars every slot, re-expanded over the
    /// centered basis.
    pub fn adjoint(&self, x: &AmalgElement<R>) -> AmalgElement<R> {
        let mut out = AmalgElement::zero();
        for (w, c) in &x.terms {
            let mut partial: Vec<(TensorWord, Cx<R>)> = vec![(Vec::new(), c.conj())];
            for &(f, b) in w.iter().rev() {
                let star = &self.factors[f as usize - 1].star[b as usize];
                let mut next = Vec::new();
                for (pw, pc) in &partial {
                    for (k, sk) in star.iter().enumerate().skip(1) {
                        if sk.is_zero() {
                            continue;
                        }
                        let mut nw = pw.clone();
                        nw.push((f, k as u32));
                        next.push((nw, pc.clone() * sk.clone()));
                    }
                }
                partial = next;
            }
            for (pw, pc) in partial {
                out.add_term(pw, pc);
            }
        }
        out
    }

    pub fn trace(&self, x: &AmalgElement<R>) -> Cx<R> {
        x.trace()
    }

    pub fn project(&self, kind: AmalgProjection, x: &AmalgElement<R>) -> Result<AmalgElement<R>> {
        match kind {
            AmalgProjection::E => Ok(x.expectation()),
            AmalgProjection::L(k) => {
                self.factor(k)?;
                Ok(x.filter(|w| w.first().map(|s| s.0) == Some(k)))
            }
            AmalgProjection::R(k) => {
                self.factor(k)?;
                Ok(x.filter(|w| w.last().map(|s| s.0) == Some(k)))
            }
        }
    }

    /// `ε_0 E(x) + Σ_k ε_k L_k(x)`.
    pub fn hilbert(&self, x: &AmalgElement<R>, sym: &Symbol<R>) -> AmalgElement<R> {
        x.map_scalar(|w| sym.at(w.first().map_or(0, |s| s.0 as i32)))
    }

    /// `E(x) ε_0* + Σ_k R_k(x) ε_k*`.
    pub fn hilbert_op(&self, x: &AmalgElement<R>, sym: &Symbol<R>) -> AmalgElement<R> {
        x.map_scalar(|w| sym.at(w.last().map_or(0, |s| s.0 as i32)).conj())
    }

    /// `τ((x*x)^m)`, exact in exact rings.
    pub fn moment_even(&self, x: &AmalgElement<R>, m: usize) -> Result<R> {
        if m == 0 {
            return Err(Error::InvalidInput("moment order must be positive".into()));
        }
        let xx = self.mul(&self.adjoint(x), x)?;
        let mut y = if m.is_multiple_of(2) { xx.clone() } else { x.clone() };
        let need = if m.is_multiple_of(2) { m / 2 - 1 } else { (m - 1) / 2 };
        for _ in 0..need {
            y = self.mul(&y, &xx)?;
        }
        Ok(y.norm2_sqr())
    }

    /// `x‡y = Σ_k L_k((L_k x) y)`, `x†y = xy - x‡y - E(xy)`.
    pub fn paraproduct(&self, x: &AmalgElement<R>, y: &AmalgElement<R>, flag: ParaFlag) -> Result<AmalgElement<R>> {
        let mut sharp = AmalgElement::zero();
        for k in 1..=self.num_factors() as u32 {
            let lx = x.filter(|w| w.first().map(|s| s.0) == Some(k));
            if lx.is_zero() {
                continue;
            }
            let p = self.mul(&lx, y)?;
            sharp = sharp.add(&p.filter(|w| w.first().map(|s| s.0) == Some(k)));
        }
        match flag {
            ParaFlag::Sharp => Ok(sharp),
            ParaFlag::Dagger => {
                let xy = self.mul(x, y)?;
                Ok(xy.sub(&sharp).sub(&xy.expectation()))
            }
        }
    }

    /// Uniform random tensor word of the given length.
    pub fn random_word<G: Rng>(&self, rng: &mut G, len: usize) -> TensorWord {
        let n = self.num_factors() as u32;
        let mut w: TensorWord = Vec::with_capacity(len);
        while w.len() < len {
            let f = rng.random_range(1..=n);
            if w.last().map(|s| s.0) == Some(f) {
                if n == 1 {
                    break;
                }
                continue;
            }
            let size = self.factors[f as usize - 1].size() as u32;
            if size < 2 {
                break;
            }
            w.push((f, rng.random_range(1..size)));
        }
        w
    }

    /// Random element with `profile.max_len` as tensor length bound.
    pub fn random_element<G: Rng>(&self, rng: &mut G, profile: &Profile) -> AmalgElement<R> {
        let terms = rng.random_range(1..=profile.max_terms.max(1));
        let mut x = AmalgElement::zero();
        for _ in 0..terms {
            let len = rng.random_range(0..=profile.max_len);
            let w = self.random_word(rng, len);
            x.add_term(w, random_scalar(rng, profile.coeff_law));
        }
        x
    }
}

/// `E`, `L_k` (first factor `k`) or `R_k` (last factor `k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmalgProjection {
    E,
    L(u32),
    R(u32),
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(re: i64) -> Cx<Q> {
        Complex::new(Q::from_integer(re.into()), Q::zero())
    }

    fn two_coins() -> AlgebraSpec<Q> {
        AlgebraSpec::build(&[FactorDesc::points(&["1/2", "1/2"]), FactorDesc::points(&["1/2", "1/2"])]).unwrap()
    }

    fn mono(w: &[(u32, u32)]) -> AmalgElement<Q> {
        AmalgElement::monomial(w.to_vec(), q(1))
    }

    #[test]
    fn build_examples() {
        let s = AlgebraSpec::<Q>::build(&[FactorDesc::points(&["1/2", "1/2"])]).unwrap();
        let t = &s.factors[0];
        assert_eq!(t.size(), 2);
        assert_eq!(t.basis[1], vec![q(1), q(0), q(0), q(-1)]);
        assert_eq!(t.mult[1][1], vec![q(1), q(0)]);
        let m = AlgebraSpec::<Q>::build(&[FactorDesc::Matrix(2)]).unwrap();
        assert_eq!(m.factors[0].size(), 4);
        assert_eq!(two_coins().num_factors(), 2);
    }

    #[test]
    fn skewed_weights_give_rational_basis() {
        let s = AlgebraSpec::<Q>::build(&[FactorDesc::points(&["1/5", "4/5"])]).unwrap();
        let half = Q::new(1.into(), 2.into());
        let t = &s.factors[0];
        assert_eq!(t.basis[1], vec![q(2), q(0), q(0), Complex::new(-half.clone(), Q::zero())]);
        // u² = 1 + (3/2) u
        assert_eq!(t.mult[1][1], vec![q(1), Complex::new(Q::new(3.into(), 2.into()), Q::zero())]);
    }

    #[test]
    fn build_errors() {
        assert!(AlgebraSpec::<Q>::build(&[FactorDesc::points(&[])]).is_err());
        assert!(AlgebraSpec::<Q>::build(&[FactorDesc::points(&["0", "1"])]).is_err());
        assert!(AlgebraSpec::<Q>::build(&[FactorDesc::points(&["1/2", "1/3"])]).is_err());
        assert!(AlgebraSpec::<Q>::build(&[FactorDesc::Matrix(0)]).is_err());
        assert!(matches!(AlgebraSpec::<Q>::build(&[FactorDesc::Matrix(3)]), Err(Error::NotRepresentable(_))));
        assert!(AlgebraSpec::<f64>::build(&[FactorDesc::Matrix(3)]).is_ok());
    }

    #[test]
    fn mul_examples() {
        let s = two_coins();
        let uv = mono(&[(1, 1), (2, 1)]);
        let vu = mono(&[(2, 1), (1, 1)]);
        assert_eq!(s.mul(&uv, &vu).unwrap(), AmalgElement::one());
        assert_eq!(s.mul(&AmalgElement::one(), &uv).unwrap(), uv);
        assert_eq!(s.mul(&mono(&[(1, 1)]), &mono(&[(2, 1)])).unwrap(), uv);
    }

    #[test]
    fn adjoint_and_trace_examples() {
        let s = two_coins();
        let uv = mono(&[(1, 1), (2, 1)]);
        assert_eq!(s.trace(&uv), q(0));
        assert_eq!(s.trace(&AmalgElement::one()), q(1));
        assert_eq!(s.adjoint(&uv), mono(&[(2, 1), (1, 1)]));
        let m = AlgebraSpec::<Q>::build(&default_factors()).unwrap();
        let mut rng = crate::algebra::rng_from_seed(4);
        for _ in 0..20 {
            let x = m.random_element(&mut rng, &Profile { max_len: 3, max_terms: 4, ..Profile::default() });
            let y = m.random_element(&mut rng, &Profile { max_len: 3, max_terms: 4, ..Profile::default() });
            assert_eq!(m.adjoint(&m.adjoint(&x)), x);
            assert_eq!(m.trace(&m.mul(&x, &y).unwrap()), m.trace(&m.mul(&y, &x).unwrap()));
            assert_eq!(m.adjoint(&m.mul(&x, &y).unwrap()), m.mul(&m.adjoint(&y), &m.adjoint(&x)).unwrap());
        }
    }

    #[test]
    fn projection_examples() {
        let s = two_coins();
        let x = mono(&[(1, 1), (2, 1)]).add(&mono(&[(2, 1), (1, 1)]));
        assert_eq!(s.project(AmalgProjection::L(1), &x).unwrap(), mono(&[(1, 1), (2, 1)]));
        assert!(s.project(AmalgProjection::E, &mono(&[(1, 1), (2, 1)])).unwrap().is_zero());
        let y = AmalgElement::scalar(q(3)).add(&mono(&[(1, 1)]));
        assert_eq!(s.project(AmalgProjection::E, &y).unwrap(), AmalgElement::scalar(q(3)));
        assert!(s.project(AmalgProjection::L(3), &y).is_err());
    }

    #[test]
    fn hilbert_examples() {
        let s = two_coins();
        let x = mono(&[(1, 1), (2, 1)]).add(&mono(&[(2, 1), (1, 1)]));
        let sym = Symbol::gen(q(1), [(1, q(-1)), (2, q(1))]);
        assert_eq!(s.hilbert(&x, &sym), mono(&[(2, 1), (1, 1)]).sub(&mono(&[(1, 1), (2, 1)])));
        assert_eq!(s.hilbert(&x, &Symbol::gen(q(1), [])), x);
    }

    #[test]
    fn moment_examples() {
        let s = two_coins();
        let x = mono(&[(1, 1)]).add(&mono(&[(2, 1)]));
        let got: Vec<Q> = (1..=5).map(|m| s.moment_even(&x, m).unwrap()).collect();
        let want: Vec<Q> = [2, 6, 20, 70, 252].iter().map(|&v| Q::from_integer(v.into())).collect();
        assert_eq!(got, want);
        assert_eq!(s.moment_even(&AmalgElement::one(), 3).unwrap(), Q::one());
    }

    #[test]
    fn validation_rejects_bad_words() {
        let s = two_coins();
        assert!(s.validate(&mono(&[(1, 1), (1, 1)])).is_err());
        assert!(s.validate(&mono(&[(3, 1)])).is_err());
        assert!(s.validate(&mono(&[(1, 2)])).is_err());
        assert!(s.validate(&mono(&[(1, 1), (2, 1)])).is_ok());
    }
}
