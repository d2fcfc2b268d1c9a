//! Finitely supported elements `x = Σ c_g λ_g` of the group algebra of F∞.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Coeff, Cx, Real};
use crate::words::{alphabet, invert, reduce_concat, Word};

/// A finitely supported element of the group algebra with coefficients in
/// `C`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<C: Coeff> {
    dim: usize,
    terms: BTreeMap<Word, C>,
}

impl<C: Coeff> Element<C> {
    pub fn zero(dim: usize) -> Self {
        Element { dim, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c λ_g`.
    pub fn monomial(word: Word, c: C) -> Self {
        let dim = c.dim();
        let mut x = Self::zero(dim);
        x.add_term(word, c);
        x
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Word, C)>) -> Result<Self> {
        let mut x = Self::zero(dim);
        for (w, c) in terms {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(dim, c.dim()));
            }
            x.add_term(w, c);
        }
        Ok(x)
    }

    /// Adds `c λ_w`, pruning the coefficient if it cancels.
    pub fn add_term(&mut self, w: Word, c: C) {
        debug_assert_eq!(c.dim(), self.dim);
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                if !c.negligible() {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.negligible() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Option<&C> {
        self.terms.get(w)
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn max_generator(&self) -> u32 {
        self.terms.keys().map(Word::max_generator).max().unwrap_or(0)
    }

    /// Keeps only the terms whose word satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Word) -> bool) -> Self {
        Element {
            dim: self.dim,
            terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    /// Rescales each coefficient by a word-dependent scalar.
    pub fn map_scalar(&self, mut f: impl FnMut(&Word) -> Cx<C::Real>) -> Self {
        let mut out = Self::zero(self.dim);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.scale(&f(w)));
        }
        out
    }

    /// Relabels words by a map that must stay injective on the support.
    pub fn map_words(&self, mut f: impl FnMut(&Word) -> Word) -> Self {
        let mut out = Self::zero(self.dim);
        for (w, c) in &self.terms {
            out.add_term(f(w), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Cx<C::Real>) -> Self {
        self.map_scalar(|_| s.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Convolution product, realizing `λ_g λ_h = λ_{gh}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let mut out = Self::zero(self.dim);
        for (g, c) in &self.terms {
            for (h, d) in &other.terms {
                out.add_term(reduce_concat(g, h), c.clone() * d.clone());
            }
        }
        Ok(out)
    }

    /// `(Σ c_g λ_g)* = Σ c_g* λ_{g^{-1}}`.
    pub fn adjoint(&self) -> Self {
        Element {
            dim: self.dim,
            terms: self.terms.iter().map(|(w, c)| (invert(w), c.adjoint())).collect(),
        }
    }

    /// Coefficient at `e` (the canonical trace, ring-valued).
    pub fn trace(&self) -> C {
        self.terms.get(&Word::e()).cloned().unwrap_or_else(|| C::zero_of(self.dim))
    }

    /// Scalar trace: normalized matrix trace of [`Element::trace`].
    pub fn scalar_trace(&self) -> Cx<C::Real> {
        self.trace().normalized_trace()
    }

    /// `τ(x*x) = Σ_g tr_normalized(c_g* c_g)`.
    pub fn norm2_sqr(&self) -> C::Real {
        self.terms.values().fold(C::Real::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sqr().as_f64().sqrt()
    }

    /// `τ(x) λ_e`.
    pub fn expectation(&self) -> Self {
        self.filter(Word::is_e)
    }

    /// `x - τ(x) λ_e`.
    pub fn centered(&self) -> Self {
        self.filter(|w| !w.is_e())
    }

    /// Largest coefficient modulus, used for reporting residuals.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|c| c.to_block())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Converts coefficient-wise into another ring of the same dimension.
    pub fn convert<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Element<D> {
        let mut out = Element::zero(self.dim);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c));
        }
        out
    }
}

fn check_dims<C: Coeff>(a: &Element<C>, b: &Element<C>) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(a.dim, b.dim));
    }
    Ok(())
}

impl<R: Real> Element<Complex<R>> {
    pub fn scalar_zero() -> Self {
        Self::zero(1)
    }

    pub fn lambda(word: Word) -> Self {
        Self::monomial(word, Complex::one())
    }

    pub fn unit() -> Self {
        Self::lambda(Word::e())
    }

    /// Double-precision copy.
    pub fn to_c64(&self) -> Element<Complex<f64>> {
        self.convert(crate::scalar::cx_to_c64)
    }
}

/// `Σ s_i x_i` with pruning.
pub fn linear_combine<C: Coeff>(terms: &[(Cx<C::Real>, &Element<C>)]) -> Result<Element<C>> {
    let dim = terms.first().map(|(_, x)| x.dim()).unwrap_or(1);
    let mut out = Element::zero(dim);
    for (s, x) in terms {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch(dim, x.dim()));
        }
        for (w, c) in x.terms() {
            out.add_term(w.clone(), c.scale(s));
        }
    }
    Ok(out)
}

/// Coefficient laws for random elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffLaw {
    /// `±1`.
    Sign,
    /// Rational points on the unit circle.
    UnitCircle,
    /// Standard complex gaussian (rounded to a dyadic grid in exact rings).
    Gaussian,
    /// `(a + ib)/q` with small integers.
    RationalGrid,
}

impl std::str::FromStr for CoeffLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(CoeffLaw::Sign),
            "unit_circle" | "circle" => Ok(CoeffLaw::UnitCircle),
            "gaussian" => Ok(CoeffLaw::Gaussian),
            "rational_grid" | "grid" => Ok(CoeffLaw::RationalGrid),
            other => Err(Error::InvalidInput(format!("unknown coefficient law {other}"))),
        }
    }
}

/// Parameters for [`random_element`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub max_len: usize,
    pub max_terms: usize,
    pub coeff_law: CoeffLaw,
    pub num_gens: u32,
}

impl Default for Profile {
    fn default() -> Self {
        Profile { max_len: 3, max_terms: 4, coeff_law: CoeffLaw::RationalGrid, num_gens: 2 }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic per-trial seed derived from a master seed (splitmix64 of
/// `master + index * golden`).
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform reduced word of the given length (non-backtracking walk).
pub fn random_word<G: Rng>(rng: &mut G, num_gens: u32, len: usize) -> Word {
    let letters = alphabet(num_gens);
    let mut w = Word::e();
    while w.len() < len {
        let l = letters[rng.random_range(0..letters.len())];
        if let Some(next) = w.extend(l) {
            w = next;
        }
    }
    w
}

/// Pythagorean point `((1-t²)/(1+t²), 2t/(1+t²))` with `t = a/b`.
fn circle_point<R: Real, G: Rng>(rng: &mut G) -> Cx<R> {
    let a: i64 = rng.random_range(-6..=6);
    let b: i64 = rng.random_range(1..=6);
    let (a2, b2) = (a * a, b * b);
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    Complex::new(R::from_ratio(sign * (b2 - a2), b2 + a2), R::from_ratio(2 * a * b, b2 + a2))
}

pub fn random_scalar<R: Real, G: Rng>(rng: &mut G, law: CoeffLaw) -> Cx<R> {
    match law {
        CoeffLaw::Sign => {
            let s = if rng.random_bool(0.5) { 1 } else { -1 };
            Complex::new(R::from_ratio(s, 1), R::zero())
        }
        CoeffLaw::UnitCircle => circle_point(rng),
        CoeffLaw::Gaussian => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(R::from_f64_approx(re / 2f64.sqrt()), R::from_f64_approx(im / 2f64.sqrt()))
        }
        CoeffLaw::RationalGrid => loop {
            let q: i64 = rng.random_range(1..=4);
            let a: i64 = rng.random_range(-4..=4);
            let b: i64 = rng.random_range(-4..=4);
            if a != 0 || b != 0 {
                break Complex::new(R::from_ratio(a, q), R::from_ratio(b, q));
            }
        },
    }
}

/// Random rational point of the closed unit disc; unimodular with
/// probability about one third.
pub fn random_disc_point<R: Real, G: Rng>(rng: &mut G) -> Cx<R> {
    if rng.random_bool(1.0 / 3.0) {
        return circle_point(rng);
    }
    loop {
        let q: i64 = rng.random_range(1..=5);
        let a: i64 = rng.random_range(-q..=q);
        let b: i64 = rng.random_range(-q..=q);
        if a * a + b * b <= q * q {
            return Complex::new(R::from_ratio(a, q), R::from_ratio(b, q));
        }
    }
}

/// Seeded random scalar element supported in the ball of radius
/// `profile.max_len`.
pub fn random_element<R: Real>(profile: &Profile, seed: u64) -> Element<Complex<R>> {
    let mut rng = rng_from_seed(seed);
    random_element_with(&mut rng, profile)
}

pub fn random_element_with<R: Real, G: Rng>(rng: &mut G, profile: &Profile) -> Element<Complex<R>> {
    let terms = rng.random_range(1..=profile.max_terms.max(1));
    let mut x = Element::scalar_zero();
    for _ in 0..terms {
        let len = rng.random_range(0..=profile.max_len);
        let w = random_word(rng, profile.num_gens.max(1), len);
        let c = random_scalar::<R, _>(rng, profile.coeff_law);
        x.add_term(w, c);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = Complex<BigRational>;

    fn w(v: &[i32]) -> Word {
        Word::new(v.to_vec()).unwrap()
    }

    fn q(re: i64, im: i64) -> Q {
        Complex::new(BigRational::from_ratio(re, 1), BigRational::from_ratio(im, 1))
    }

    fn lam(v: &[i32]) -> Element<Q> {
        Element::lambda(w(v))
    }

    #[test]
    fn linear_combine_examples() {
        let g1 = lam(&[1]);
        let two = linear_combine(&[(q(1, 0), &g1), (q(1, 0), &g1)]).unwrap();
        assert_eq!(two, Element::monomial(w(&[1]), q(2, 0)));
        let x = random_element::<BigRational>(&Profile::default(), 3);
        assert!(linear_combine(&[(q(1, 0), &x), (q(-1, 0), &x)]).unwrap().is_zero());
        let r = linear_combine(&[(q(0, 1), &Element::unit()), (q(0, 0), &lam(&[2]))]).unwrap();
        assert_eq!(r, Element::monomial(Word::e(), q(0, 1)));
        assert_eq!(r.support_len(), 1);
    }

    #[test]
    fn multiply_examples() {
        let s = lam(&[1]).add(&lam(&[-1])).unwrap();
        let sq = s.mul(&s).unwrap();
        let expected = Element::from_terms(1, [(w(&[1, 1]), q(1, 0)), (Word::e(), q(2, 0)), (w(&[-1, -1]), q(1, 0))]).unwrap();
        assert_eq!(sq, expected);
        let x = random_element::<BigRational>(&Profile::default(), 11);
        assert_eq!(Element::unit().mul(&x).unwrap(), x);
        assert_eq!(lam(&[1]).mul(&lam(&[-1])).unwrap(), Element::unit());
    }

    #[test]
    fn adjoint_examples() {
        let x = Element::monomial(w(&[1]), q(0, 1));
        assert_eq!(x.adjoint(), Element::monomial(w(&[-1]), q(0, -1)));
        assert_eq!(Element::<Q>::unit().adjoint(), Element::unit());
        let y = random_element::<BigRational>(&Profile::default(), 5);
        assert_eq!(y.adjoint().adjoint(), y);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(lam(&[1, 2]).trace(), q(0, 0));
        assert_eq!(Element::<Q>::unit().trace(), q(1, 0));
        let x = random_element::<BigRational>(&Profile { max_terms: 6, ..Profile::default() }, 9);
        let parseval = x.adjoint().mul(&x).unwrap().trace();
        assert_eq!(parseval, Complex::new(x.norm2_sqr(), BigRational::zero()));
    }

    #[test]
    fn random_element_examples() {
        let p = Profile::default();
        assert_eq!(random_element::<BigRational>(&p, 42), random_element::<BigRational>(&p, 42));
        let scalar = random_element::<BigRational>(&Profile { max_terms: 1, max_len: 0, ..p.clone() }, 7);
        assert!(scalar.support().all(Word::is_e));
        for seed in 0..1000 {
            let x = random_element::<f64>(&p, seed);
            assert!(x.max_len() <= p.max_len);
            assert!(x.max_generator() <= p.num_gens);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        use crate::scalar::CMatrix;
        let a = Element::monomial(Word::e(), CMatrix::<f64>::one_of(2));
        let b = Element::monomial(Word::e(), CMatrix::<f64>::one_of(3));
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn matrix_norm_is_normalized() {
        use crate::scalar::CMatrix;
        for d in 1..4 {
            let x = Element::monomial(w(&[1]), CMatrix::<f64>::one_of(d));
            assert!((x.norm2() - 1.0).abs() < 1e-15);
        }
    }
}
