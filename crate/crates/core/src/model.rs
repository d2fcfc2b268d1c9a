//! A common interface over the two free-product models: the group algebra
//! of F∞ (with letter-indexed Hilbert transforms) and finite free products
//! of tracial algebras. Identities that hold in any reduced free product
//! are written once against [`FreeProductModel`].

use std::fmt::Debug;

use num_complex::Complex;
use rand::Rng;
use serde_json::Value;

use crate::algebra::{random_element_with, random_scalar, random_word, Element, Profile};
use crate::amalg::{index_word, AlgebraSpec, AmalgElement};
use crate::error::Result;
use crate::io::{amalg_to_json, element_to_json};
use crate::multipliers::{hilbert_free, hilbert_free_op, paraproduct, random_gen_symbol, ParaFlag, Symbol, SymbolLaw};
use crate::scalar::{Cx, Real};
use crate::words::{alphabet, prefix_lt, Word};

pub trait FreeProductModel: Sync {
    type R: Real;
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn name(&self) -> &'static str;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, s: &Cx<Self::R>) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn adjoint(&self, a: &Self::Elem) -> Self::Elem;
    /// `E(a)` as an element.
    fn expectation(&self, a: &Self::Elem) -> Self::Elem;
    fn trace(&self, a: &Self::Elem) -> Cx<Self::R>;
    fn hilbert(&self, a: &Self::Elem, sym: &Symbol<Self::R>) -> Self::Elem;
    fn hilbert_op(&self, a: &Self::Elem, sym: &Symbol<Self::R>) -> Self::Elem;
    fn paraproduct(&self, a: &Self::Elem, b: &Self::Elem, flag: ParaFlag) -> Result<Self::Elem>;
    /// Symbol keys other than `0` that the model can see.
    fn keys(&self) -> Vec<i32>;
    /// Part of `a` on which `H^op_ε` acts by `ε_key*` (`key = 0`: `E`).
    fn project_right(&self, key: i32, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn max_abs(&self, a: &Self::Elem) -> f64;
    /// `g ≺^L h` for elementary tensors: the index word of `g` is a proper
    /// initial segment of that of `h`.
    fn left_strict(&self, g: &Self::Elem, h: &Self::Elem) -> bool;
    fn random_elem<G: Rng>(&self, rng: &mut G, profile: &Profile) -> Self::Elem;
    /// A single elementary tensor with a random coefficient.
    fn random_elementary<G: Rng>(&self, rng: &mut G, profile: &Profile) -> Self::Elem;
    fn random_symbol<G: Rng>(&self, rng: &mut G, law: SymbolLaw) -> Symbol<Self::R>;
    fn to_json(&self, a: &Self::Elem) -> Value;

    fn centered(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(a, &self.expectation(a))
    }
}

/// The group algebra of F∞ restricted to `num_gens` generators for sampling.
#[derive(Clone, Debug)]
pub struct FreeModel<R: Real> {
    pub num_gens: u32,
    _r: std::marker::PhantomData<R>,
}

impl<R: Real> FreeModel<R> {
    pub fn new(num_gens: u32) -> Self {
        FreeModel { num_gens, _r: std::marker::PhantomData }
    }
}

fn single_word<R: Real>(x: &Element<Cx<R>>) -> Word {
    x.support().next().cloned().unwrap_or_default()
}

impl<R: Real> FreeProductModel for FreeModel<R> {
    type R = R;
    type Elem = Element<Cx<R>>;

    fn name(&self) -> &'static str {
        "free"
    }
    fn zero(&self) -> Self::Elem {
        Element::scalar_zero()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b).expect("scalar elements")
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.sub(b).expect("scalar elements")
    }
    fn scale(&self, a: &Self::Elem, s: &Cx<R>) -> Self::Elem {
        a.scale(s)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        a.mul(b)
    }
    fn adjoint(&self, a: &Self::Elem) -> Self::Elem {
        a.adjoint()
    }
    fn expectation(&self, a: &Self::Elem) -> Self::Elem {
        a.expectation()
    }
    fn trace(&self, a: &Self::Elem) -> Cx<R> {
        a.trace()
    }
    fn hilbert(&self, a: &Self::Elem, sym: &Symbol<R>) -> Self::Elem {
        hilbert_free(a, sym)
    }
    fn hilbert_op(&self, a: &Self::Elem, sym: &Symbol<R>) -> Self::Elem {
        hilbert_free_op(a, sym)
    }
    fn paraproduct(&self, a: &Self::Elem, b: &Self::Elem, flag: ParaFlag) -> Result<Self::Elem> {
        paraproduct(a, b, flag)
    }
    fn keys(&self) -> Vec<i32> {
        alphabet(self.num_gens)
    }
    fn project_right(&self, key: i32, a: &Self::Elem) -> Self::Elem {
        a.filter(|w| -w.last().unwrap_or(0) == key)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }
    fn max_abs(&self, a: &Self::Elem) -> f64 {
        a.max_abs()
    }
    fn left_strict(&self, g: &Self::Elem, h: &Self::Elem) -> bool {
        prefix_lt(&single_word(g), &single_word(h))
    }
    fn random_elem<G: Rng>(&self, rng: &mut G, profile: &Profile) -> Self::Elem {
        random_element_with(rng, &Profile { num_gens: self.num_gens, ..profile.clone() })
    }
    fn random_elementary<G: Rng>(&self, rng: &mut G, profile: &Profile) -> Self::Elem {
        let len = rng.random_range(0..=profile.max_len);
        let w = random_word(rng, self.num_gens, len);
        Element::monomial(w, random_scalar(rng, profile.coeff_law))
    }
    fn random_symbol<G: Rng>(&self, rng: &mut G, law: SymbolLaw) -> Symbol<R> {
        random_gen_symbol(rng, self.num_gens, law)
    }
    fn to_json(&self, a: &Self::Elem) -> Value {
        element_to_json(a)
    }
}

/// A finite free product with its structure constants.
#[derive(Clone, Debug)]
pub struct AmalgModel<R: Real> {
    pub spec: AlgebraSpec<R>,
}

impl<R: Real> AmalgModel<R> {
    pub fn new(spec: AlgebraSpec<R>) -> Self {
        AmalgModel { spec }
    }
}

fn single_index<R: Real>(x: &AmalgElement<R>) -> Vec<u32> {
    x.terms().next().map(|(w, _)| index_word(w)).unwrap_or_default()
}

impl<R: Real> FreeProductModel for AmalgModel<R> {
    type R = R;
    type Elem = AmalgElement<R>;

    fn name(&self) -> &'static str {
        "amalg"
    }
    fn zero(&self) -> Self::Elem {
        AmalgElement::zero()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.sub(b)
    }
    fn scale(&self, a: &Self::Elem, s: &Cx<R>) -> Self::Elem {
        a.scale(s)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.spec.mul(a, b)
    }
    fn adjoint(&self, a: &Self::Elem) -> Self::Elem {
        self.spec.adjoint(a)
    }
    fn expectation(&self, a: &Self::Elem) -> Self::Elem {
        a.expectation()
    }
    fn trace(&self, a: &Self::Elem) -> Cx<R> {
        a.trace()
    }
    fn hilbert(&self, a: &Self::Elem, sym: &Symbol<R>) -> Self::Elem {
        self.spec.hilbert(a, sym)
    }
    fn hilbert_op(&self, a: &Self::Elem, sym: &Symbol<R>) -> Self::Elem {
        self.spec.hilbert_op(a, sym)
    }
    fn paraproduct(&self, a: &Self::Elem, b: &Self::Elem, flag: ParaFlag) -> Result<Self::Elem> {
        self.spec.paraproduct(a, b, flag)
    }
    fn keys(&self) -> Vec<i32> {
        (1..=self.spec.num_factors() as i32).collect()
    }
    fn project_right(&self, key: i32, a: &Self::Elem) -> Self::Elem {
        a.filter(|w| w.last().map_or(0, |s| s.0 as i32) == key)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }
    fn max_abs(&self, a: &Self::Elem) -> f64 {
        a.max_abs()
    }
    fn left_strict(&self, g: &Self::Elem, h: &Self::Elem) -> bool {
        let (i, j) = (single_index(g), single_index(h));
        i.len() < j.len() && j.starts_with(&i)
    }
    fn random_elem<G: Rng>(&self, rng: &mut G, profile: &Profile) -> Self::Elem {
        self.spec.random_element(rng, profile)
    }
    fn random_elementary<G: Rng>(&self, rng: &mut G, profile: &Profile) -> Self::Elem {
        let len = rng.random_range(0..=profile.max_len);
        let w = self.spec.random_word(rng, len);
        AmalgElement::monomial(w, random_scalar(rng, profile.coeff_law))
    }
    fn random_symbol<G: Rng>(&self, rng: &mut G, law: SymbolLaw) -> Symbol<R> {
        let e = crate::multipliers::random_symbol_value(rng, law);
        let entries: Vec<_> = self.keys().into_iter().map(|k| (k, crate::multipliers::random_symbol_value(rng, law))).collect();
        Symbol::gen(e, entries)
    }
    fn to_json(&self, a: &Self::Elem) -> Value {
        amalg_to_json(a)
    }
}

/// `Complex::new(r, 0)`.
pub fn real_scalar<R: Real>(r: R) -> Cx<R> {
    Complex::new(r, R::zero())
}
