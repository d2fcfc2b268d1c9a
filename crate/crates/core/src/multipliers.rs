//! Fourier multipliers on the free group: prefix, suffix, letter and length
//! projections, free Hilbert transforms, paraproducts, the Carré du Champ,
//! the number operator and the doubling embedding.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{random_disc_point, random_scalar, CoeffLaw, Element};
use crate::error::{Error, Result};
use crate::scalar::{cx_norm_sqr, Coeff, Cx, Real};
use crate::words::{alphabet, enumerate_ball, gromov_product, invert, prefix_leq, prefix_lt, reduce_concat, suffix_leq, Word};

/// Which index set a [`Symbol`] lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    /// `ε_0` plus `ε_k`, `k ∈ ℤ*`, keyed by the one-letter word `[k]`.
    Gen,
    /// `ε_e` plus `ε_h` for words `|h| = d`.
    Lenblock,
    /// `ε_e` plus `ε_g` for letters `g`, acting on the `d`-th letter.
    Letter,
}

/// A bounded coefficient pattern defining a Hilbert-transform multiplier.
/// Entries that are not stored read as `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol<R: Real> {
    pub kind: SymbolKind,
    pub d: usize,
    pub e: Cx<R>,
    pub entries: BTreeMap<Word, Cx<R>>,
}

impl<R: Real> Symbol<R> {
    pub fn identity(kind: SymbolKind, d: usize) -> Self {
        Symbol { kind, d, e: Complex::one(), entries: BTreeMap::new() }
    }

    /// Generator symbol from `ε_0` and `(k, ε_k)` pairs.
    pub fn gen(e: Cx<R>, entries: impl IntoIterator<Item = (i32, Cx<R>)>) -> Self {
        Symbol {
            kind: SymbolKind::Gen,
            d: 1,
            e,
            entries: entries.into_iter().map(|(k, c)| (Word::gen(k), c)).collect(),
        }
    }

    pub fn with_entries(kind: SymbolKind, d: usize, e: Cx<R>, entries: impl IntoIterator<Item = (Word, Cx<R>)>) -> Result<Self> {
        let sym = Symbol { kind, d, e, entries: entries.into_iter().collect() };
        sym.validate_shape()?;
        Ok(sym)
    }

    fn validate_shape(&self) -> Result<()> {
        let want = match self.kind {
            SymbolKind::Gen | SymbolKind::Letter => 1,
            SymbolKind::Lenblock => self.d,
        };
        if self.d == 0 {
            return Err(Error::InvalidInput("symbol depth d must be positive".into()));
        }
        if let Some(w) = self.entries.keys().find(|w| w.len() != want) {
            return Err(Error::InvalidInput(format!("symbol entry {w:?} must have length {want}")));
        }
        Ok(())
    }

    /// `ε_h`, defaulting to 1.
    pub fn value(&self, h: &Word) -> Cx<R> {
        if h.is_e() {
            return self.e.clone();
        }
        self.entries.get(h).cloned().unwrap_or_else(Complex::one)
    }

    /// `ε_k` for a signed generator index.
    pub fn at(&self, k: i32) -> Cx<R> {
        if k == 0 {
            self.e.clone()
        } else {
            self.value(&Word::gen(k))
        }
    }

    /// Entry-wise complex conjugate `ε*`.
    pub fn conj(&self) -> Self {
        Symbol {
            kind: self.kind,
            d: self.d,
            e: self.e.conj(),
            entries: self.entries.iter().map(|(w, c)| (w.clone(), c.conj())).collect(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        std::iter::once(&self.e).chain(self.entries.values()).all(|c| {
            let n = cx_norm_sqr(c);
            if R::EXACT {
                n <= R::one()
            } else {
                n.as_f64() <= 1.0 + 1e-12
            }
        })
    }

    pub fn is_unimodular(&self) -> bool {
        let one = R::one();
        std::iter::once(&self.e).chain(self.entries.values()).all(|c| {
            let n = cx_norm_sqr(c);
            if R::EXACT {
                n == one
            } else {
                (n - one.clone()).abs().as_f64() < 1e-12
            }
        })
    }

    pub fn convert<S: Real>(&self, f: impl Fn(&Cx<R>) -> Cx<S>) -> Symbol<S> {
        Symbol {
            kind: self.kind,
            d: self.d,
            e: f(&self.e),
            entries: self.entries.iter().map(|(w, c)| (w.clone(), f(c))).collect(),
        }
    }
}

/// How the entries of a random symbol are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolLaw {
    Sign,
    Unimodular,
    /// Rational points of the closed unit disc, a third of them unimodular.
    Disc,
}

impl std::str::FromStr for SymbolLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(SymbolLaw::Sign),
            "unimodular" => Ok(SymbolLaw::Unimodular),
            "disc" => Ok(SymbolLaw::Disc),
            other => Err(Error::InvalidInput(format!("unknown symbol law {other}"))),
        }
    }
}

pub fn random_symbol_value<R: Real, G: Rng>(rng: &mut G, law: SymbolLaw) -> Cx<R> {
    match law {
        SymbolLaw::Sign => random_scalar(rng, CoeffLaw::Sign),
        SymbolLaw::Unimodular => random_scalar(rng, CoeffLaw::UnitCircle),
        SymbolLaw::Disc => random_disc_point(rng),
    }
}

/// Random generator symbol with entries for `±1..=±num_gens`.
pub fn random_gen_symbol<R: Real, G: Rng>(rng: &mut G, num_gens: u32, law: SymbolLaw) -> Symbol<R> {
    let e = random_symbol_value(rng, law);
    let entries: Vec<_> = alphabet(num_gens).into_iter().map(|k| (k, random_symbol_value(rng, law))).collect();
    Symbol::gen(e, entries)
}

/// Random symbol of the given kind, with an entry for every index word.
pub fn random_symbol<R: Real, G: Rng>(rng: &mut G, kind: SymbolKind, d: usize, num_gens: u32, law: SymbolLaw) -> Result<Symbol<R>> {
    let index_len = if kind == SymbolKind::Lenblock { d } else { 1 };
    let words: Vec<Word> = enumerate_ball(num_gens, index_len)?.into_iter().filter(|w| w.len() == index_len).collect();
    let e = random_symbol_value(rng, law);
    let entries: Vec<_> = words.into_iter().map(|w| (w, random_symbol_value(rng, law))).collect();
    Symbol::with_entries(kind, d.max(1), e, entries)
}

/// Support projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Words `w ≥ h`.
    LeftPrefix(Word),
    /// Words ending with `h`.
    RightSuffix(Word),
    /// Words whose `d`-th letter is the letter `g`.
    DthLetter(i32, usize),
    /// Words of length at most `d`.
    LengthLe(usize),
    /// Powers `g_k^m`, `m ∈ ℤ`.
    SubalgPower(u32),
}

impl Projection {
    pub fn keeps(&self, w: &Word) -> bool {
        match self {
            Projection::LeftPrefix(h) => prefix_leq(h, w),
            Projection::RightSuffix(h) => suffix_leq(h, w),
            Projection::DthLetter(g, d) => w.letter(*d) == Some(*g),
            Projection::LengthLe(d) => w.len() <= *d,
            Projection::SubalgPower(k) => w.letters().iter().all(|l| l.unsigned_abs() == *k),
        }
    }
}

pub fn project<C: Coeff>(kind: &Projection, x: &Element<C>) -> Element<C> {
    x.filter(|w| kind.keeps(w))
}

pub fn left_prefix<C: Coeff>(h: &Word, x: &Element<C>) -> Element<C> {
    x.filter(|w| prefix_leq(h, w))
}

pub fn right_suffix<C: Coeff>(h: &Word, x: &Element<C>) -> Element<C> {
    x.filter(|w| suffix_leq(h, w))
}

/// `L_e x = τ(x) λ_e`, the trace convention used for the square functions.
pub fn project_trace<C: Coeff>(x: &Element<C>) -> Element<C> {
    x.expectation()
}

/// `ε_0 τ(x) + Σ_k ε_k L_{g_k} x`: each word is scaled by the entry of its
/// first letter.
pub fn hilbert_free<C: Coeff>(x: &Element<C>, sym: &Symbol<C::Real>) -> Element<C> {
    x.map_scalar(|w| sym.at(w.first().unwrap_or(0)))
}

/// `ε_0* τ(x) + Σ_k ε_k* R_{g_k^{-1}} x`, characterised by
/// `H_ε(x*) = (H_ε^op x)*`.
pub fn hilbert_free_op<C: Coeff>(x: &Element<C>, sym: &Symbol<C::Real>) -> Element<C> {
    x.map_scalar(|w| sym.at(-w.last().unwrap_or(0)).conj())
}

/// Block transforms acting on words of length at least `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockVariant {
    /// `ε_e P_{d-1} + Σ_{|h|=d} ε_h L_h`.
    Ld,
    /// `ε_e P_{d-1} + Σ_{|h|=d} ε_{h^{-1}} R_h`.
    Rd,
    /// `ε_e P_{d-1} + Σ_g ε_g L^{(d)}_g`.
    LetterD,
}

pub fn block_multiplier<R: Real>(w: &Word, sym: &Symbol<R>, variant: BlockVariant, d: usize) -> Cx<R> {
    if w.len() < d {
        return sym.e.clone();
    }
    match variant {
        BlockVariant::Ld => sym.value(&w.prefix(d)),
        BlockVariant::Rd => sym.value(&invert(&w.suffix(d))),
        BlockVariant::LetterD => sym.value(&Word::gen(w.letter(d).expect("length checked"))),
    }
}

pub fn hilbert_block<C: Coeff>(x: &Element<C>, sym: &Symbol<C::Real>, variant: BlockVariant, d: usize) -> Element<C> {
    x.map_scalar(|w| block_multiplier(w, sym, variant, d))
}

/// Opposite transform, `H(x*) = (H^op x)*`. For `Ld` this is `Rd` with the
/// conjugate symbol and vice versa.
pub fn hilbert_block_op<C: Coeff>(x: &Element<C>, sym: &Symbol<C::Real>, variant: BlockVariant, d: usize) -> Element<C> {
    x.map_scalar(|w| block_multiplier(&invert(w), sym, variant, d).conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaFlag {
    Sharp,
    Dagger,
}

/// `x‡y = Σ_{g^{-1} ≰ h} c_g d_h λ_{gh}`, `x†y = Σ_{g^{-1} < h} c_g d_h λ_{gh}`.
pub fn paraproduct<C: Coeff>(x: &Element<C>, y: &Element<C>, flag: ParaFlag) -> Result<Element<C>> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let mut out = Element::zero(x.dim());
    for (g, c) in x.terms() {
        let gi = invert(g);
        for (h, d) in y.terms() {
            let keep = match flag {
                ParaFlag::Sharp => !prefix_leq(&gi, h),
                ParaFlag::Dagger => prefix_lt(&gi, h),
            };
            if keep {
                out.add_term(reduce_concat(g, h), c.clone() * d.clone());
            }
        }
    }
    Ok(out)
}

/// `Γ(x, y) = Σ c_g* d_{g'} ⟨g^{-1}, g'⟩ λ_{g^{-1} g'}`.
pub fn carre_du_champ<C: Coeff>(x: &Element<C>, y: &Element<C>) -> Result<Element<C>> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let mut out = Element::zero(x.dim());
    for (g, c) in x.terms() {
        let gi = invert(g);
        for (g2, d) in y.terms() {
            let k = gromov_product(&gi, g2);
            if k > 0 {
                let s = Complex::new(C::Real::from_ratio(k as i64, 1), C::Real::zero());
                out.add_term(reduce_concat(&gi, g2), (c.adjoint() * d.clone()).scale(&s));
            }
        }
    }
    Ok(out)
}

/// `Σ_{h ≠ e} (L_h x)* (L_h y)` summed over every nontrivial prefix of the
/// supports; the brute-force side of the Carré du Champ identity.
pub fn prefix_square_sum<C: Coeff>(x: &Element<C>, y: &Element<C>) -> Result<Element<C>> {
    let mut prefixes = BTreeSet::new();
    for w in x.support().chain(y.support()) {
        for n in 1..=w.len() {
            prefixes.insert(w.prefix(n));
        }
    }
    let mut out = Element::zero(x.dim());
    for h in &prefixes {
        let lx = left_prefix(h, x);
        let ly = left_prefix(h, y);
        if lx.is_zero() || ly.is_zero() {
            continue;
        }
        out = out.add(&lx.adjoint().mul(&ly)?)?;
    }
    Ok(out)
}

/// `A^r x = Σ c_g |g|^r λ_g`.
pub fn number_operator<C: Coeff>(x: &Element<C>, r: f64) -> Result<Element<C>> {
    if r < 0.0 && x.coeff(&Word::e()).is_some() {
        return Err(Error::InvalidInput("negative power of the number operator on an element with a trace part".into()));
    }
    let mut out = Element::zero(x.dim());
    for (w, c) in x.terms() {
        if w.is_e() {
            if r == 0.0 {
                out.add_term(w.clone(), c.clone());
            }
            continue;
        }
        let s = C::Real::length_power(w.len(), r)
            .ok_or_else(|| Error::NotRepresentable(format!("{}^{r}", w.len())))?;
        out.add_term(w.clone(), c.scale(&Complex::new(s, C::Real::zero())));
    }
    Ok(out)
}

/// Image of a word under `g_i ↦ g_i h_i`, with `g_i` relabelled `2i-1` and
/// `h_i` relabelled `2i`.
pub fn double_word(w: &Word) -> Word {
    let letters = w.letters().iter().flat_map(|&l| {
        let i = l.abs();
        if l > 0 {
            [2 * i - 1, 2 * i]
        } else {
            [-2 * i, -(2 * i - 1)]
        }
    });
    Word::new(letters.collect()).expect("doubling preserves reducedness")
}

pub fn embed_double<C: Coeff>(x: &Element<C>) -> Element<C> {
    x.map_words(double_word)
}

/// Symbol on the doubled alphabet intertwining with the original one:
/// `ε'_{±(2k-1)} = ε_k`, `ε'_{±2k} = ε_{-k}`.
pub fn double_symbol<R: Real>(sym: &Symbol<R>, num_gens: u32) -> Symbol<R> {
    let mut entries = Vec::new();
    for k in 1..=num_gens as i32 {
        let (p, m) = (sym.at(k), sym.at(-k));
        entries.push((2 * k - 1, p.clone()));
        entries.push((-(2 * k - 1), p));
        entries.push((2 * k, m.clone()));
        entries.push((-2 * k, m));
    }
    Symbol::gen(sym.e.clone(), entries)
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
    fn sum(xs: &[Element<Q>]) -> Element<Q> {
        xs.iter().fold(Element::scalar_zero(), |a, b| a.add(b).unwrap())
    }

    #[test]
    fn projection_examples() {
        let lp = Projection::LeftPrefix(w(&[1]));
        assert_eq!(project(&lp, &lam(&[1, 2])), lam(&[1, 2]));
        assert!(project(&lp, &lam(&[2])).is_zero());
        let dl = Projection::DthLetter(2, 2);
        assert_eq!(project(&dl, &lam(&[1, 2, 1])), lam(&[1, 2, 1]));
        assert!(project(&dl, &lam(&[1])).is_zero());
        let x = sum(&[lam(&[]), lam(&[1, 2])]);
        assert_eq!(project(&Projection::LengthLe(1), &x), lam(&[]));
        assert_eq!(project(&Projection::SubalgPower(1), &sum(&[lam(&[1, 1]), lam(&[-1]), lam(&[1, 2])])), sum(&[lam(&[1, 1]), lam(&[-1])]));
        assert_eq!(left_prefix(&Word::e(), &x), x);
        assert_eq!(right_suffix(&w(&[2]), &sum(&[lam(&[1, 2]), lam(&[2, 1])])), lam(&[1, 2]));
    }

    #[test]
    fn hilbert_free_examples() {
        let x = sum(&[lam(&[]), lam(&[1]), lam(&[-1])]);
        let sym = Symbol::gen(q(1, 0), [(1, q(0, 1)), (-1, q(0, -1))]);
        let expected = Element::from_terms(1, [(Word::e(), q(1, 0)), (w(&[1]), q(0, 1)), (w(&[-1]), q(0, -1))]).unwrap();
        assert_eq!(hilbert_free(&x, &sym), expected);
        assert_eq!(hilbert_free(&x, &Symbol::identity(SymbolKind::Gen, 1)), x);
        assert_eq!(hilbert_free(&hilbert_free(&x, &sym), &sym.conj()), x);
    }

    #[test]
    fn hilbert_op_matches_adjoint_relation() {
        let x = sum(&[lam(&[1, 2]), lam(&[-2, 1]), lam(&[]), lam(&[2])]);
        let sym = Symbol::gen(q(0, 1), [(1, q(-1, 0)), (-1, q(0, 1)), (2, q(1, 0)), (-2, q(0, -1))]);
        assert_eq!(hilbert_free(&x.adjoint(), &sym), hilbert_free_op(&x, &sym).adjoint());
        let lsym = Symbol::with_entries(SymbolKind::Lenblock, 2, q(0, 1), [(w(&[1, 2]), q(-1, 0)), (w(&[-2, 1]), q(0, 1))]).unwrap();
        for v in [BlockVariant::Ld, BlockVariant::Rd, BlockVariant::LetterD] {
            let s = if v == BlockVariant::LetterD { sym.clone() } else { lsym.clone() };
            assert_eq!(hilbert_block(&x.adjoint(), &s, v, 2), hilbert_block_op(&x, &s, v, 2).adjoint());
        }
    }

    #[test]
    fn hilbert_block_examples() {
        let sym = Symbol::with_entries(SymbolKind::Lenblock, 2, q(1, 0), [(w(&[1, 2]), q(-1, 0))]).unwrap();
        let x = sum(&[lam(&[]), lam(&[1, 2, 1])]);
        let expected = sum(&[lam(&[]), lam(&[1, 2, 1]).scale(&q(-1, 0))]);
        assert_eq!(hilbert_block(&x, &sym, BlockVariant::Ld, 2), expected);
        assert_eq!(hilbert_block(&x, &Symbol::identity(SymbolKind::Lenblock, 2), BlockVariant::Ld, 2), x);
        let gsym = Symbol::gen(q(0, 1), [(1, q(-1, 0)), (-2, q(0, 1))]);
        let y = sum(&[lam(&[]), lam(&[1, 2]), lam(&[-2]), lam(&[2, 1])]);
        assert_eq!(hilbert_block(&y, &gsym, BlockVariant::LetterD, 1), hilbert_free(&y, &gsym));
    }

    #[test]
    fn paraproduct_examples() {
        assert_eq!(paraproduct(&lam(&[1]), &lam(&[2]), ParaFlag::Sharp).unwrap(), lam(&[1, 2]));
        assert!(paraproduct(&lam(&[1]), &lam(&[2]), ParaFlag::Dagger).unwrap().is_zero());
        assert!(paraproduct(&lam(&[-1]), &lam(&[1, 2]), ParaFlag::Sharp).unwrap().is_zero());
        assert_eq!(paraproduct(&lam(&[-1]), &lam(&[1, 2]), ParaFlag::Dagger).unwrap(), lam(&[2]));
        assert!(paraproduct(&lam(&[-1]), &lam(&[1]), ParaFlag::Sharp).unwrap().is_zero());
        assert!(paraproduct(&lam(&[-1]), &lam(&[1]), ParaFlag::Dagger).unwrap().is_zero());
    }

    #[test]
    fn carre_du_champ_examples() {
        assert_eq!(carre_du_champ(&lam(&[1]), &lam(&[1, 2])).unwrap(), lam(&[2]));
        assert!(carre_du_champ(&lam(&[]), &lam(&[1, 2])).unwrap().is_zero());
        let g = w(&[1, -2, 3]);
        assert_eq!(carre_du_champ(&Element::lambda(g.clone()), &Element::lambda(g)).unwrap(), lam(&[]).scale(&q(3, 0)));
    }

    #[test]
    fn number_operator_examples() {
        assert_eq!(number_operator(&lam(&[1, 2]), 1.0).unwrap(), lam(&[1, 2]).scale(&q(2, 0)));
        let x = sum(&[lam(&[1]), lam(&[1, 2, 1])]);
        assert_eq!(number_operator(&x, 0.0).unwrap(), x);
        let f = x.to_c64();
        let y = number_operator(&f, -0.5).unwrap();
        assert!((y.coeff(&w(&[1, 2, 1])).unwrap().re - 3f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(y.coeff(&w(&[1])).unwrap().re, 1.0);
        assert!(number_operator(&lam(&[]), -0.5).is_err());
        assert!(matches!(number_operator(&lam(&[1, 2]), -0.5), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn embed_double_examples() {
        assert_eq!(embed_double(&lam(&[1])), lam(&[1, 2]));
        assert_eq!(embed_double(&lam(&[])), lam(&[]));
        assert_eq!(embed_double(&lam(&[1, 2])), lam(&[1, 2, 3, 4]));
        assert_eq!(embed_double(&lam(&[-1])), lam(&[-2, -1]));
    }
}
