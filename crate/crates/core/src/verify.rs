//! Named identity residuals and the seeded fuzz runner.
//!
//! Every identity is evaluated as a list of `(lhs, rhs)` pairs in canonical
//! form. In an exact ring a trial passes when every difference is the zero
//! element; in the float ring the largest coefficient of a difference must
//! stay below [`FLOAT_TOL`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{rng_from_seed, split_seed, CoeffLaw, Element, Profile};
use crate::amalg::{default_factors, AlgebraSpec, FactorDesc};
use crate::error::{Error, Result};
use crate::io::symbol_to_json;
use crate::model::{AmalgModel, FreeModel, FreeProductModel};
use crate::multipliers::{
    carre_du_champ, embed_double, double_symbol, hilbert_block, hilbert_block_op, hilbert_free, left_prefix,
    number_operator, prefix_square_sum, project, random_symbol, right_suffix, BlockVariant, ParaFlag, Projection,
    Symbol, SymbolKind, SymbolLaw,
};
use crate::paths::{build_partition, concrete_partition, path_project, PartitionKind, PathPartition, PathProjection};
use crate::scalar::{Cx, Real};
use crate::words::{alphabet, enumerate_ball, Word};

pub const FLOAT_TOL: f64 = 1e-10;

/// Constant relating `Σ_{h≠e} (L_h x)*(L_h y)` to `Γ(x, y)`, fixed by
/// [`kappa_oracle`].
pub const PINNED_KAPPA: i64 = 1;

const MAX_REDRAWS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "ghid1_i")]
    Ghid1I,
    #[serde(rename = "ghid1_ii")]
    Ghid1Ii,
    #[serde(rename = "ghid1_iii")]
    Ghid1Iii,
    #[serde(rename = "ghid_iv")]
    GhidIv,
    #[serde(rename = "ghid_v")]
    GhidV,
    #[serde(rename = "ghid_vi")]
    GhidVi,
    #[serde(rename = "cotlar_amalg")]
    CotlarAmalg,
    #[serde(rename = "cotlar_free")]
    CotlarFree,
    #[serde(rename = "diag_bounds")]
    DiagBounds,
    #[serde(rename = "paraid_sharp")]
    ParaidSharp,
    #[serde(rename = "paraid_dagger")]
    ParaidDagger,
    #[serde(rename = "idsharp")]
    Idsharp,
    #[serde(rename = "cotlar_Ld")]
    CotlarLd,
    #[serde(rename = "gromov_carre")]
    GromovCarre,
    #[serde(rename = "idTn")]
    IdTn,
    #[serde(rename = "sumTn")]
    SumTn,
    #[serde(rename = "lemma_new_Ek")]
    LemmaNewEk,
    #[serde(rename = "main2_intertwine")]
    Main2Intertwine,
    #[serde(rename = "resolution_of_identity")]
    ResolutionOfIdentity,
    #[serde(rename = "paraproduct_decomposition")]
    ParaproductDecomposition,
}

impl IdentityId {
    pub fn all() -> Vec<IdentityId> {
        use IdentityId::*;
        vec![
            Ghid1I,
            Ghid1Ii,
            Ghid1Iii,
            GhidIv,
            GhidV,
            GhidVi,
            CotlarAmalg,
            CotlarFree,
            DiagBounds,
            ParaidSharp,
            ParaidDagger,
            Idsharp,
            CotlarLd,
            GromovCarre,
            IdTn,
            SumTn,
            LemmaNewEk,
            Main2Intertwine,
            ResolutionOfIdentity,
            ParaproductDecomposition,
        ]
    }

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }

    /// Holds in every reduced free product, so it is checked on both models.
    pub fn is_generic(self) -> bool {
        use IdentityId::*;
        matches!(
            self,
            Ghid1I | Ghid1Ii | Ghid1Iii | GhidIv | GhidV | GhidVi | DiagBounds | ParaidSharp | ParaidDagger | Idsharp
                | ParaproductDecomposition
        )
    }

    fn needs_symbol(self) -> bool {
        use IdentityId::*;
        !matches!(self, ParaproductDecomposition | GromovCarre | IdTn | SumTn | LemmaNewEk | ResolutionOfIdentity | Idsharp)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.split_whitespace().next().unwrap_or("");
        IdentityId::all()
            .into_iter()
            .find(|id| id.name() == key || (key == "haag1p" && *id == IdentityId::CotlarLd) || (key == "cotlar" && *id == IdentityId::CotlarAmalg))
            .ok_or_else(|| Error::InvalidInput(format!("unknown identity {s}")))
    }
}

/// Inputs of one identity check.
#[derive(Clone, Debug)]
pub struct Inputs<E, R: Real> {
    pub x: E,
    pub y: E,
    pub eps: Symbol<R>,
    pub eps2: Symbol<R>,
    /// Block length for the length-block transforms.
    pub d: usize,
    /// Partition for path identities (`seed` drives the greedy one).
    pub partition: PartitionKind,
    pub seed: u64,
}

impl<E, R: Real> Inputs<E, R> {
    pub fn new(x: E, y: E, eps: Symbol<R>, eps2: Symbol<R>) -> Self {
        Inputs { x, y, eps, eps2, d: 1, partition: PartitionKind::Greedy, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub max_residual: f64,
    pub pass: bool,
    /// Some symbol entry has modulus above 1.
    pub violation: bool,
}

/// Evaluation of `(lhs, rhs)` pairs.
pub type Sides<E> = Vec<(E, E)>;

pub(crate) fn compare<M: FreeProductModel>(m: &M, sides: &Sides<M::Elem>) -> (f64, bool) {
    let mut worst = 0.0f64;
    let mut exact_ok = true;
    for (l, r) in sides {
        let d = m.sub(l, r);
        worst = worst.max(m.max_abs(&d));
        exact_ok &= m.is_zero(&d);
    }
    let pass = if M::R::EXACT { exact_ok } else { worst <= FLOAT_TOL };
    (worst, pass)
}

fn cx_abs_sqr<R: Real>(c: &Cx<R>) -> R {
    c.re.clone() * c.re.clone() + c.im.clone() * c.im.clone()
}

fn star<M: FreeProductModel>(m: &M, a: &M::Elem) -> M::Elem {
    m.adjoint(a)
}

fn mul<M: FreeProductModel>(m: &M, a: &M::Elem, b: &M::Elem) -> Result<M::Elem> {
    m.mul(a, b)
}

/// Identities valid in every reduced free product.
pub fn generic_sides<M: FreeProductModel>(m: &M, id: IdentityId, inp: &Inputs<M::Elem, M::R>) -> Result<Sides<M::Elem>> {
    use IdentityId::*;
    let (x, y, e, f) = (&inp.x, &inp.y, &inp.eps, &inp.eps2);
    Ok(match id {
        Ghid1I => vec![(m.hilbert(&star(m, x), e), star(m, &m.hilbert_op(x, e)))],
        Ghid1Ii => vec![(m.hilbert(&m.centered(x), e), m.centered(&m.hilbert(x, e)))],
        Ghid1Iii => vec![(m.hilbert(&m.hilbert_op(x, f), e), m.hilbert_op(&m.hilbert(x, e), f))],
        GhidIv => {
            let gs = star(m, x);
            vec![(m.centered(&m.hilbert(&mul(m, &gs, y)?, e)), m.centered(&mul(m, &m.hilbert(&gs, e), y)?))]
        }
        GhidV => {
            let gs = star(m, x);
            vec![(m.centered(&m.hilbert_op(&mul(m, &gs, y)?, e)), m.centered(&mul(m, &gs, &m.hilbert_op(y, e))?))]
        }
        GhidVi => {
            let gs = star(m, x);
            let hg = m.hilbert(&gs, e);
            let lhs = m.centered(&mul(m, &hg, &m.hilbert_op(y, f))?);
            let a = m.hilbert(&mul(m, &gs, &m.hilbert_op(y, f))?, e);
            let b = m.hilbert_op(&mul(m, &hg, y)?, f);
            let c = m.hilbert_op(&m.hilbert(&mul(m, &gs, y)?, e), f);
            vec![(lhs, m.centered(&m.sub(&m.add(&a, &b), &c)))]
        }
        CotlarAmalg | CotlarFree => cotlar_sides(m, x, y, e, f)?,
        ParaidSharp => {
            let l = m.hilbert(&m.paraproduct(x, y, ParaFlag::Sharp)?, e);
            vec![(l, m.paraproduct(&m.hilbert(x, e), y, ParaFlag::Sharp)?)]
        }
        ParaidDagger => {
            let l = m.paraproduct(x, &m.hilbert_op(y, e), ParaFlag::Dagger)?;
            vec![(l, m.hilbert_op(&m.paraproduct(x, y, ParaFlag::Dagger)?, e))]
        }
        Idsharp => vec![(m.paraproduct(x, y, ParaFlag::Dagger)?, idsharp_average(m, x, y)?)],
        ParaproductDecomposition => {
            let xy = mul(m, x, y)?;
            let s = m.add(&m.paraproduct(x, y, ParaFlag::Sharp)?, &m.paraproduct(x, y, ParaFlag::Dagger)?);
            vec![(m.add(&s, &m.expectation(&xy)), xy)]
        }
        other => return Err(Error::InvalidInput(format!("{other} is not defined on the {} model", m.name()))),
    })
}

fn cotlar_sides<M: FreeProductModel>(
    m: &M,
    x: &M::Elem,
    y: &M::Elem,
    e: &Symbol<M::R>,
    f: &Symbol<M::R>,
) -> Result<Sides<M::Elem>> {
    let hx = m.hilbert(x, e);
    let hy = m.hilbert(y, f);
    let ys = star(m, y);
    let dx = m.sub(&hx, &m.scale(x, &e.e));
    let dy = m.sub(&hy, &m.scale(y, &f.e));
    let lhs = m.sub(&mul(m, &hx, &star(m, &hy))?, &m.expectation(&mul(m, &dx, &star(m, &dy))?));
    let a = m.hilbert(&mul(m, x, &m.hilbert_op(&ys, f))?, e);
    let b = m.hilbert_op(&mul(m, &hx, &ys)?, f);
    let c = m.hilbert_op(&m.hilbert(&mul(m, x, &ys)?, e), f);
    Ok(vec![(lhs, m.sub(&m.add(&a, &b), &c))])
}

/// `E_ε H^op_ε(x † H^op_ε(y))` over Rademacher `ε` (including `ε_0`), in
/// closed form `Σ_a P_a(x † P_a y)` with `P_a` the part on which `H^op`
/// acts by `ε_a`.
pub fn idsharp_average<M: FreeProductModel>(m: &M, x: &M::Elem, y: &M::Elem) -> Result<M::Elem> {
    let mut out = m.zero();
    for a in std::iter::once(0).chain(m.keys()) {
        let pa = m.project_right(a, y);
        out = m.add(&out, &m.project_right(a, &m.paraproduct(x, &pa, ParaFlag::Dagger)?));
    }
    Ok(out)
}

/// `|E(q)|² ≤ E(xx*)²` for the four diagonal terms; the residual is the
/// largest excess.
pub fn diag_excess<M: FreeProductModel>(m: &M, x: &M::Elem, e: &Symbol<M::R>) -> Result<(f64, bool)> {
    let xs = star(m, x);
    let hx = m.hilbert(x, e);
    let t = m.trace(&mul(m, x, &xs)?);
    let qs = [
        m.trace(&mul(m, &hx, &star(m, &hx))?),
        m.trace(&m.hilbert(&mul(m, x, &m.hilbert_op(&xs, e))?, e)),
        m.trace(&m.hilbert_op(&mul(m, &hx, &xs)?, e)),
        m.trace(&m.hilbert_op(&m.hilbert(&mul(m, x, &xs)?, e), e)),
    ];
    let t2 = cx_abs_sqr(&t);
    let mut worst = 0.0f64;
    let mut ok = true;
    for q in &qs {
        let q2 = cx_abs_sqr(q);
        if q2 > t2 {
            worst = worst.max((q2.clone() - t2.clone()).as_f64());
            ok &= !M::R::EXACT && (q2 - t2.clone()).as_f64() <= FLOAT_TOL;
        }
    }
    Ok((worst, ok))
}

/// Models that can evaluate the identities beyond the generic ones.
pub trait IdentityModel: FreeProductModel {
    fn supports(&self, id: IdentityId) -> bool;
    fn specific_sides(&self, id: IdentityId, inp: &Inputs<Self::Elem, Self::R>) -> Result<Sides<Self::Elem>>;
}

impl<R: Real> IdentityModel for AmalgModel<R> {
    fn supports(&self, id: IdentityId) -> bool {
        id.is_generic() || id == IdentityId::CotlarAmalg
    }

    fn specific_sides(&self, id: IdentityId, _inp: &Inputs<Self::Elem, R>) -> Result<Sides<Self::Elem>> {
        Err(Error::InvalidInput(format!("{id} is not defined on the amalgamated model")))
    }
}

type FreeElem<R> = Element<Cx<R>>;

fn ld_sides<R: Real>(x: &FreeElem<R>, y: &FreeElem<R>, e: &Symbol<R>, f: &Symbol<R>, d: usize) -> Result<Sides<FreeElem<R>>> {
    let h = |a: &FreeElem<R>| hilbert_block(a, e, BlockVariant::Ld, d);
    let hop = |a: &FreeElem<R>| hilbert_block_op(a, f, BlockVariant::Ld, d);
    let cut = |a: FreeElem<R>| a.filter(|w| w.len() + 2 > 2 * d);
    let ys = y.adjoint();
    let hx = h(x);
    let hy = hilbert_block(y, f, BlockVariant::Ld, d);
    let lhs = hx.mul(&hy.adjoint())?;
    let a = h(&x.mul(&hop(&ys))?);
    let b = hop(&hx.mul(&ys)?);
    let c = hop(&h(&x.mul(&ys)?));
    Ok(vec![(cut(lhs), cut(a.add(&b)?.sub(&c)?))])
}

fn partition_for<R: Real>(x: &FreeElem<R>, num_gens: u32, kind: PartitionKind, seed: u64) -> Result<PathPartition> {
    build_partition(kind, num_gens.max(x.max_generator()).max(1), x.max_len().max(1), seed)
}

fn touched_paths<R: Real>(part: &PathPartition, x: &FreeElem<R>) -> Vec<usize> {
    let mut ns: Vec<usize> = x.support().filter_map(|w| part.path_of(w)).collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn abs_sqr<R: Real>(a: &FreeElem<R>) -> Result<FreeElem<R>> {
    a.adjoint().mul(a)
}

fn real<R: Real>(r: R) -> Cx<R> {
    Complex::new(r, R::zero())
}

impl<R: Real> IdentityModel for FreeModel<R> {
    fn supports(&self, id: IdentityId) -> bool {
        id != IdentityId::CotlarAmalg
    }

    fn specific_sides(&self, id: IdentityId, inp: &Inputs<FreeElem<R>, R>) -> Result<Sides<FreeElem<R>>> {
        use IdentityId::*;
        let (x, y) = (&inp.x, &inp.y);
        match id {
            CotlarLd => ld_sides(x, y, &inp.eps, &inp.eps2, inp.d),
            GromovCarre => {
                let k = real(R::from_ratio(PINNED_KAPPA, 1));
                let gamma = carre_du_champ(x, y)?;
                let brute = prefix_square_sum(x, y)?;
                let two = real(R::from_ratio(2, 1));
                let a = |z: &FreeElem<R>| number_operator(z, 1.0);
                let generator = a(&x.adjoint())?.mul(y)?.add(&x.adjoint().mul(&a(y)?)?)?.sub(&a(&x.adjoint().mul(y)?)?)?;
                Ok(vec![(brute, gamma.scale(&k)), (gamma.scale(&two), generator)])
            }
            IdTn => {
                let part = partition_for(x, self.num_gens, inp.partition, inp.seed)?;
                let xs = x.adjoint();
                let mut sides = Vec::new();
                for n in touched_paths(&part, x) {
                    let t = path_project(&part, n, PathProjection::T, x)?;
                    let s = path_project(&part, n, PathProjection::S, x)?;
                    let mass = t.terms().fold(R::zero(), |acc, (_, c)| acc + cx_abs_sqr(c));
                    let lhs = abs_sqr(&t)?.sub(&Element::monomial(Word::e(), real(mass)))?;
                    let p = crate::multipliers::paraproduct(&xs, &t, ParaFlag::Dagger)?;
                    let rhs = p.add(&p.adjoint())?.sub(&s.adjoint().mul(&t)?)?.sub(&t.adjoint().mul(&s)?)?;
                    sides.push((lhs, rhs));
                }
                Ok(sides)
            }
            SumTn => {
                let part = partition_for(x, self.num_gens, inp.partition, inp.seed)?;
                let mut lhs = Element::scalar_zero();
                for n in touched_paths(&part, x) {
                    let t = path_project(&part, n, PathProjection::T, x)?;
                    let s = path_project(&part, n, PathProjection::S, x)?;
                    lhs = lhs.add(&abs_sqr(&t.add(&s)?)?.sub(&abs_sqr(&s)?)?)?;
                }
                let p = crate::multipliers::paraproduct(&x.adjoint(), x, ParaFlag::Dagger)?;
                let rhs = p.add(&p.adjoint())?.add(&Element::monomial(Word::e(), real(x.norm2_sqr())))?;
                Ok(vec![(lhs, rhs)])
            }
            LemmaNewEk => {
                let part = concrete_partition(self.num_gens.max(x.max_generator()).max(1), x.max_len().max(1))?;
                let mut sides = Vec::new();
                for k in alphabet(part.num_gens) {
                    let g = Word::gen(k);
                    let lhs = project(&Projection::SubalgPower(k.unsigned_abs()), &abs_sqr(&right_suffix(&g, x))?);
                    let mut rhs = Element::scalar_zero();
                    for n in touched_paths(&part, x) {
                        if part.paths[n].root().last() == Some(k) {
                            rhs = rhs.add(&abs_sqr(&path_project(&part, n, PathProjection::T, x)?)?)?;
                        }
                    }
                    sides.push((lhs, rhs));
                }
                Ok(sides)
            }
            Main2Intertwine => {
                let n = self.num_gens.max(x.max_generator());
                let lhs = hilbert_free(&embed_double(x), &double_symbol(&inp.eps, n));
                Ok(vec![(lhs, embed_double(&hilbert_free(x, &inp.eps)))])
            }
            ResolutionOfIdentity => {
                let mut rhs = Element::monomial(Word::e(), x.scalar_trace());
                for k in alphabet(self.num_gens.max(x.max_generator())) {
                    rhs = rhs.add(&left_prefix(&Word::gen(k), x))?;
                }
                Ok(vec![(x.clone(), rhs)])
            }
            other => generic_sides(self, other, inp),
        }
    }
}

/// Evaluates one identity on explicit inputs.
pub fn check_identity<M: IdentityModel>(m: &M, id: IdentityId, inp: &Inputs<M::Elem, M::R>) -> Result<Residual> {
    if !m.supports(id) {
        return Err(Error::InvalidInput(format!("{id} is not defined on the {} model", m.name())));
    }
    let violation = id.needs_symbol() && !(inp.eps.is_bounded() && inp.eps2.is_bounded());
    let (max_residual, pass) = if id == IdentityId::DiagBounds {
        diag_excess(m, &inp.x, &inp.eps)?
    } else {
        let sides = if id.is_generic() || id == IdentityId::CotlarAmalg {
            generic_sides(m, id, inp)?
        } else {
            m.specific_sides(id, inp)?
        };
        compare(m, &sides)
    };
    Ok(Residual { max_residual, pass: pass && !violation, violation })
}

/// Largest and second-largest residual of `Σ_{h≠e}|L_h|² = κΓ` over all
/// pairs of words in a ball, for `κ = 1, 2`.
pub fn kappa_oracle(num_gens: u32, radius: usize) -> Result<KappaSweep> {
    let ball = enumerate_ball(num_gens, radius)?;
    let mut mismatches = [0usize; 2];
    for g in &ball {
        let x = Element::<Cx<crate::Rational>>::lambda(g.clone());
        for h in &ball {
            let y = Element::lambda(h.clone());
            let brute = prefix_square_sum(&x, &y)?;
            let gamma = carre_du_champ(&x, &y)?;
            for (i, k) in [1i64, 2].into_iter().enumerate() {
                let kg = gamma.scale(&real(crate::Rational::from_integer(k.into())));
                if !brute.sub(&kg)?.is_zero() {
                    mismatches[i] += 1;
                }
            }
        }
    }
    let kappa = if mismatches[0] <= mismatches[1] { 1 } else { 2 };
    Ok(KappaSweep { pairs: ball.len() * ball.len(), mismatches_k1: mismatches[0], mismatches_k2: mismatches[1], kappa })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaSweep {
    pub pairs: usize,
    pub mismatches_k1: usize,
    pub mismatches_k2: usize,
    pub kappa: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    Exact,
    Float,
}

impl FromStr for Arith {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "rational" => Ok(Arith::Exact),
            "float" => Ok(Arith::Float),
            other => Err(Error::InvalidInput(format!("unknown arithmetic {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzProfile {
    pub max_len: usize,
    pub max_terms: usize,
    pub num_gens: u32,
    pub coeff_law: CoeffLaw,
    pub symbol_law: SymbolLaw,
    pub factors: Vec<FactorDesc>,
    /// Block length for `cotlar_Ld`.
    pub d: usize,
    /// Replace one symbol entry by 2 to exercise the hypothesis guard.
    pub corrupt_symbol: bool,
}

impl Default for FuzzProfile {
    fn default() -> Self {
        FuzzProfile {
            max_len: 5,
            max_terms: 6,
            num_gens: 3,
            coeff_law: CoeffLaw::RationalGrid,
            symbol_law: SymbolLaw::Disc,
            factors: default_factors(),
            d: 1,
            corrupt_symbol: false,
        }
    }
}

impl FuzzProfile {
    fn element_profile(&self) -> Profile {
        Profile { max_len: self.max_len, max_terms: self.max_terms, coeff_law: self.coeff_law, num_gens: self.num_gens }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub id: IdentityId,
    pub arith: Arith,
    pub trials: usize,
    pub passes: usize,
    pub max_residual: f64,
    pub redraws: usize,
    pub violations: usize,
    pub models: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl FuzzReport {
    pub fn all_pass(&self) -> bool {
        self.passes == self.trials
    }
}

struct TrialOutcome {
    residual: f64,
    pass: bool,
    violation: bool,
    redraws: usize,
    witness: Value,
}

fn corrupt<R: Real>(sym: &mut Symbol<R>) {
    let two = Complex::new(R::from_ratio(2, 1), R::zero());
    match sym.entries.keys().next().cloned() {
        Some(k) => {
            sym.entries.insert(k, two);
        }
        None => sym.e = two,
    }
}

fn draw_symbol<M: IdentityModel, G: Rng>(m: &M, rng: &mut G, id: IdentityId, prof: &FuzzProfile, num_gens: u32) -> Result<Symbol<M::R>> {
    if id == IdentityId::CotlarLd {
        random_symbol(rng, SymbolKind::Lenblock, prof.d.max(1), num_gens, prof.symbol_law)
    } else {
        Ok(m.random_symbol(rng, prof.symbol_law))
    }
}

fn draw_inputs<M: IdentityModel>(m: &M, rng: &mut ChaCha8Rng, id: IdentityId, prof: &FuzzProfile, seed: u64) -> Result<(Inputs<M::Elem, M::R>, usize)> {
    let ep = prof.element_profile();
    let mut redraws = 0;
    loop {
        let elementary = matches!(id, IdentityId::GhidIv | IdentityId::GhidV);
        let (x, y) = if elementary {
            (m.random_elementary(rng, &ep), m.random_elementary(rng, &ep))
        } else {
            (m.random_elem(rng, &ep), m.random_elem(rng, &ep))
        };
        let mut eps = draw_symbol(m, rng, id, prof, prof.num_gens)?;
        let eps2 = draw_symbol(m, rng, id, prof, prof.num_gens)?;
        if prof.corrupt_symbol {
            corrupt(&mut eps);
        }
        let guard_ok = match id {
            IdentityId::GhidIv => !m.left_strict(&x, &y),
            IdentityId::GhidV => !m.left_strict(&y, &x),
            IdentityId::SumTn => m.is_zero(&m.expectation(&x)),
            _ => true,
        };
        if guard_ok {
            let partition = if rng.random_bool(0.5) { PartitionKind::Greedy } else { PartitionKind::Powers };
            let inp = Inputs { x, y, eps, eps2, d: prof.d.max(1), partition, seed };
            return Ok((inp, redraws));
        }
        redraws += 1;
        if redraws > MAX_REDRAWS {
            return Err(Error::ResourceCap { what: "hypothesis redraws", size: redraws, cap: MAX_REDRAWS });
        }
    }
}

fn witness_json<M: IdentityModel>(m: &M, inp: &Inputs<M::Elem, M::R>) -> Value {
    json!({
        "model": m.name(),
        "x": m.to_json(&inp.x),
        "y": m.to_json(&inp.y),
        "eps": symbol_to_json(&inp.eps),
        "eps2": symbol_to_json(&inp.eps2),
        "d": inp.d,
        "partition": inp.partition,
        "seed": inp.seed,
    })
}

fn run_trial<M: IdentityModel>(m: &M, id: IdentityId, prof: &FuzzProfile, seed: u64) -> Result<TrialOutcome> {
    let mut rng = rng_from_seed(seed);
    let (inp, redraws) = draw_inputs(m, &mut rng, id, prof, seed)?;
    let r = check_identity(m, id, &inp)?;
    Ok(TrialOutcome { residual: r.max_residual, pass: r.pass, violation: r.violation, redraws, witness: witness_json(m, &inp) })
}

fn models_for(id: IdentityId) -> Vec<&'static str> {
    if id == IdentityId::CotlarAmalg {
        vec!["amalg"]
    } else if id.is_generic() {
        vec!["free", "amalg"]
    } else {
        vec!["free"]
    }
}

fn fuzz_in<R: Real>(id: IdentityId, prof: &FuzzProfile, trials: usize, seed: u64) -> Result<Vec<TrialOutcome>> {
    let models = models_for(id);
    let free = FreeModel::<R>::new(prof.num_gens);
    let amalg = if models.contains(&"amalg") { Some(AmalgModel::new(AlgebraSpec::<R>::build(&prof.factors)?)) } else { None };
    let per_trial: Vec<Result<Vec<TrialOutcome>>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = split_seed(seed, i);
            let mut out = Vec::new();
            for (j, name) in models.iter().enumerate() {
                let sj = split_seed(s, j as u64);
                out.push(match *name {
                    "free" => run_trial(&free, id, prof, sj)?,
                    _ => run_trial(amalg.as_ref().expect("built above"), id, prof, sj)?,
                });
            }
            Ok(out)
        })
        .collect();
    let mut merged = Vec::with_capacity(trials);
    for t in per_trial {
        let outs = t?;
        let mut it = outs.into_iter();
        let mut acc = it.next().expect("at least one model");
        for o in it {
            acc.residual = acc.residual.max(o.residual);
            acc.violation |= o.violation;
            acc.redraws += o.redraws;
            if acc.pass && !o.pass {
                acc.witness = o.witness;
            }
            acc.pass &= o.pass;
        }
        merged.push(acc);
    }
    Ok(merged)
}

/// Runs `trials` seeded trials; trial `i` uses `split_seed(seed, i)` so the
/// report does not depend on scheduling.
pub fn fuzz(id: IdentityId, arith: Arith, prof: &FuzzProfile, trials: usize, seed: u64) -> Result<FuzzReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let outcomes = match arith {
        Arith::Exact => fuzz_in::<crate::Rational>(id, prof, trials, seed)?,
        Arith::Float => fuzz_in::<f64>(id, prof, trials, seed)?,
    };
    let passes = outcomes.iter().filter(|o| o.pass).count();
    let max_residual = outcomes.iter().map(|o| o.residual).fold(0.0, f64::max);
    let witness = outcomes.iter().find(|o| !o.pass).map(|o| o.witness.clone());
    Ok(FuzzReport {
        id,
        arith,
        trials,
        passes,
        max_residual,
        redraws: outcomes.iter().map(|o| o.redraws).sum(),
        violations: outcomes.iter().filter(|o| o.violation).count(),
        models: models_for(id).into_iter().map(str::to_string).collect(),
        witness,
    })
}

/// `1` as an element of the free model, for callers building inputs by hand.
pub fn free_one<R: Real>() -> FreeElem<R> {
    Element::monomial(Word::e(), Complex::new(R::one(), R::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::hilbert_free_op;
    use crate::Rational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Cx<Rational> {
        Complex::new(Rational::new(n.into(), d.into()), Rational::zero())
    }

    fn lam(letters: &[i32]) -> FreeElem<Rational> {
        Element::lambda(Word::new(letters.to_vec()).unwrap())
    }

    fn signs(pattern: &[(i32, i64)]) -> Symbol<Rational> {
        Symbol::gen(q(1, 1), pattern.iter().map(|&(k, s)| (k, q(s, 1))))
    }

    #[test]
    fn names_round_trip() {
        for id in IdentityId::all() {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert_eq!("cotlar_Ld".parse::<IdentityId>().unwrap(), IdentityId::CotlarLd);
        assert_eq!("haag1p".parse::<IdentityId>().unwrap(), IdentityId::CotlarLd);
        assert!("nope".parse::<IdentityId>().is_err());
    }

    #[test]
    fn cotlar_on_hand_example() {
        let m = FreeModel::<Rational>::new(2);
        let e = signs(&[(1, -1), (-1, 1), (2, 1), (-2, -1)]);
        let inp = Inputs::new(lam(&[1]), lam(&[1, 2]), e.clone(), e);
        assert!(check_identity(&m, IdentityId::CotlarFree, &inp).unwrap().pass);
    }

    #[test]
    fn zero_inputs_pass_everything() {
        let m = FreeModel::<Rational>::new(2);
        let id_sym = Symbol::identity(SymbolKind::Gen, 1);
        for id in IdentityId::all().into_iter().filter(|id| m.supports(*id)) {
            let mut inp = Inputs::new(Element::scalar_zero(), Element::scalar_zero(), id_sym.clone(), id_sym.clone());
            if id == IdentityId::CotlarLd {
                inp.eps = Symbol::identity(SymbolKind::Lenblock, 1);
                inp.eps2 = inp.eps.clone();
            }
            let r = check_identity(&m, id, &inp).unwrap();
            assert!(r.pass, "{id}");
        }
    }

    #[test]
    fn ghid_iv_example_and_guard() {
        let m = FreeModel::<Rational>::new(2);
        let e = Symbol::gen(q(1, 3), [(1, q(1, 2)), (-1, q(-1, 1)), (2, q(0, 1)), (-2, q(2, 3))]);
        let ok = Inputs::new(lam(&[2]), lam(&[1]), e.clone(), e.clone());
        assert!(!m.left_strict(&ok.x, &ok.y));
        assert!(check_identity(&m, IdentityId::GhidIv, &ok).unwrap().pass);
        let bad = Inputs::new(lam(&[1]), lam(&[1, 2]), e.clone(), e);
        assert!(m.left_strict(&bad.x, &bad.y));
        assert!(!check_identity(&m, IdentityId::GhidIv, &bad).unwrap().pass);
    }

    /// The guard of the right-sided statement is obtained from the left one
    /// by taking adjoints: `h ⊀^L g`. A pair allowed by the right-suffix
    /// reading (`a` is not a suffix of `ab`) breaks the identity.
    #[test]
    fn ghid_v_needs_the_adjoint_guard() {
        let m = FreeModel::<Rational>::new(2);
        let e = Symbol::gen(q(1, 1), [(1, q(1, 2)), (-1, q(-1, 3)), (2, q(1, 1)), (-2, q(1, 5))]);
        let inp = Inputs::new(lam(&[1, 2]), lam(&[1]), e.clone(), e);
        assert!(m.left_strict(&inp.y, &inp.x));
        assert!(!check_identity(&m, IdentityId::GhidV, &inp).unwrap().pass);
    }

    #[test]
    fn idsharp_matches_rademacher_enumeration() {
        let m = FreeModel::<Rational>::new(1);
        let prof = Profile { max_len: 3, max_terms: 5, coeff_law: CoeffLaw::RationalGrid, num_gens: 1 };
        let mut rng = rng_from_seed(11);
        for _ in 0..10 {
            let x = m.random_elem(&mut rng, &prof);
            let y = m.random_elem(&mut rng, &prof);
            let mut avg = FreeElem::<Rational>::scalar_zero();
            for mask in 0..8u32 {
                let s = |b: u32| q(if mask >> b & 1 == 1 { -1 } else { 1 }, 1);
                let sym = Symbol::gen(s(0), [(1, s(1)), (-1, s(2))]);
                let inner = crate::multipliers::paraproduct(&x, &hilbert_free_op(&y, &sym), ParaFlag::Dagger).unwrap();
                avg = avg.add(&hilbert_free_op(&inner, &sym)).unwrap();
            }
            avg = avg.scale(&q(1, 8));
            assert_eq!(avg, idsharp_average(&m, &x, &y).unwrap());
            assert_eq!(avg, crate::multipliers::paraproduct(&x, &y, ParaFlag::Dagger).unwrap());
        }
    }

    #[test]
    fn kappa_sweep_selects_one() {
        let sweep = kappa_oracle(2, 3).unwrap();
        assert_eq!(sweep.kappa, PINNED_KAPPA);
        assert_eq!(sweep.mismatches_k1, 0);
        assert!(sweep.mismatches_k2 > 0);
    }

    #[test]
    fn corrupted_symbol_is_flagged() {
        let prof = FuzzProfile { corrupt_symbol: true, max_len: 3, max_terms: 3, ..FuzzProfile::default() };
        let r = fuzz(IdentityId::CotlarFree, Arith::Exact, &prof, 20, 1).unwrap();
        assert_eq!(r.violations, 20);
        assert_eq!(r.passes, 0);
        assert!(r.witness.is_some());
    }

    #[test]
    fn fuzz_is_deterministic_and_passes() {
        let prof = FuzzProfile { max_len: 3, max_terms: 4, ..FuzzProfile::default() };
        for id in IdentityId::all() {
            let a = fuzz(id, Arith::Exact, &prof, 12, 5).unwrap();
            assert!(a.all_pass(), "{id}: {a:?}");
            assert_eq!(a, fuzz(id, Arith::Exact, &prof, 12, 5).unwrap());
        }
        let f = fuzz(IdentityId::CotlarFree, Arith::Float, &prof, 12, 5).unwrap();
        assert!(f.all_pass(), "{f:?}");
    }

    #[test]
    fn block_cotlar_for_small_d() {
        for d in 1..=3 {
            let prof = FuzzProfile { d, max_len: 4, max_terms: 4, num_gens: 2, ..FuzzProfile::default() };
            let r = fuzz(IdentityId::CotlarLd, Arith::Exact, &prof, 30, 9).unwrap();
            assert!(r.all_pass(), "d={d}: {r:?}");
        }
    }
}
