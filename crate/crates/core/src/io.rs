//! JSON documents for elements, symbols and free-product elements.
//!
//! Element: `{"ring": "rational"|"float"|"matrix", "dim": d, "terms":
//! [{"word": [...], "c": ...}]}`. A rational coefficient is a pair of
//! `"n/d"` strings (real, imaginary); a float coefficient is `[re, im]`; a
//! matrix coefficient is the row-major list of its `[re, im]` entries.

use num_complex::Complex;
use serde_json::{json, Value};

use crate::algebra::Element;
use crate::amalg::{AmalgElement, TensorWord};
use crate::error::{Error, Result};
use crate::multipliers::{Symbol, SymbolKind};
use crate::scalar::{CMatrix, Coeff, Cx, Real};
use crate::words::Word;
use crate::{C64, Cq};

fn real_to_json<R: Real>(r: &R) -> Value {
    if R::EXACT {
        Value::String(r.to_string_repr())
    } else {
        json!(r.as_f64())
    }
}

fn real_from_json<R: Real>(v: &Value) -> Result<R> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(Error::InvalidInput(format!("expected a number, got {other}"))),
    };
    R::parse_str(&text).ok_or_else(|| Error::InvalidInput(format!("cannot parse {text} as a {} number", R::TAG)))
}

pub fn scalar_to_json<R: Real>(c: &Cx<R>) -> Value {
    json!([real_to_json(&c.re), real_to_json(&c.im)])
}

pub fn scalar_from_json<R: Real>(v: &Value) -> Result<Cx<R>> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex::new(real_from_json(&a[0])?, real_from_json(&a[1])?)),
        Value::Array(_) => Err(Error::InvalidInput("a complex scalar is a [re, im] pair".into())),
        other => Ok(Complex::new(real_from_json(other)?, R::zero())),
    }
}

/// Coefficient rings with a JSON form.
pub trait CoeffJson: Coeff {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, dim: usize) -> Result<Self>;
}

impl<R: Real> CoeffJson for Complex<R> {
    fn to_json(&self) -> Value {
        scalar_to_json(self)
    }

    fn from_json(v: &Value, _dim: usize) -> Result<Self> {
        scalar_from_json(v)
    }
}

impl<R: Real> CoeffJson for CMatrix<R> {
    fn to_json(&self) -> Value {
        Value::Array(self.entries().iter().map(scalar_to_json).collect())
    }

    fn from_json(v: &Value, dim: usize) -> Result<Self> {
        let a = v.as_array().ok_or_else(|| Error::InvalidInput("matrix coefficient must be an array".into()))?;
        if a.len() != dim * dim {
            return Err(Error::DimensionMismatch(dim * dim, a.len()));
        }
        Ok(CMatrix::from_rows(dim, a.iter().map(scalar_from_json).collect::<Result<Vec<_>>>()?))
    }
}

pub fn element_to_json<C: CoeffJson>(x: &Element<C>) -> Value {
    let terms: Vec<Value> = x.terms().map(|(w, c)| json!({"word": w.letters(), "c": c.to_json()})).collect();
    json!({"ring": C::ring_tag(), "dim": x.dim(), "terms": terms})
}

fn ring_of(v: &Value) -> Result<&str> {
    v.get("ring").and_then(Value::as_str).ok_or_else(|| Error::InvalidInput("missing ring tag".into()))
}

pub fn element_from_json<C: CoeffJson>(v: &Value) -> Result<Element<C>> {
    let ring = ring_of(v)?;
    if ring != C::ring_tag() {
        return Err(Error::RingMismatch(ring.to_string(), C::ring_tag().to_string()));
    }
    let dim = v.get("dim").and_then(Value::as_u64).unwrap_or(1) as usize;
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be positive".into()));
    }
    let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| Error::InvalidInput("missing terms".into()))?;
    let mut out = Element::zero(dim);
    for t in terms {
        let word: Word = serde_json::from_value(t.get("word").cloned().unwrap_or(Value::Null))?;
        let c = C::from_json(t.get("c").ok_or_else(|| Error::InvalidInput("term without c".into()))?, dim)?;
        if c.dim() != dim {
            return Err(Error::DimensionMismatch(dim, c.dim()));
        }
        out.add_term(word, c);
    }
    Ok(out)
}

/// An element in whichever ring its document names.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyElement {
    Rational(Element<Cq>),
    Float(Element<C64>),
    Matrix(Element<CMatrix<f64>>),
}

impl AnyElement {
    pub fn from_json(v: &Value) -> Result<Self> {
        match ring_of(v)? {
            "rational" => Ok(AnyElement::Rational(element_from_json(v)?)),
            "float" => Ok(AnyElement::Float(element_from_json(v)?)),
            "matrix" => Ok(AnyElement::Matrix(element_from_json(v)?)),
            other => Err(Error::InvalidInput(format!("unknown ring {other}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyElement::Rational(x) => element_to_json(x),
            AnyElement::Float(x) => element_to_json(x),
            AnyElement::Matrix(x) => element_to_json(x),
        }
    }

    pub fn ring(&self) -> &'static str {
        match self {
            AnyElement::Rational(_) => "rational",
            AnyElement::Float(_) => "float",
            AnyElement::Matrix(_) => "matrix",
        }
    }
}

pub fn symbol_to_json<R: Real>(s: &Symbol<R>) -> Value {
    let entries: Vec<Value> = s.entries.iter().map(|(w, c)| json!({"word": w.letters(), "c": scalar_to_json(c)})).collect();
    json!({"kind": s.kind, "d": s.d, "e": scalar_to_json(&s.e), "entries": entries})
}

pub fn symbol_from_json<R: Real>(v: &Value) -> Result<Symbol<R>> {
    let kind: SymbolKind = serde_json::from_value(v.get("kind").cloned().unwrap_or(Value::Null))?;
    let d = v.get("d").and_then(Value::as_u64).unwrap_or(1) as usize;
    let e = match v.get("e") {
        Some(e) => scalar_from_json(e)?,
        None => Complex::new(R::one(), R::zero()),
    };
    let mut entries = Vec::new();
    for t in v.get("entries").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
        let word: Word = serde_json::from_value(t.get("word").cloned().unwrap_or(Value::Null))?;
        let c = scalar_from_json(t.get("c").ok_or_else(|| Error::InvalidInput("symbol entry without c".into()))?)?;
        entries.push((word, c));
    }
    Symbol::with_entries(kind, d, e, entries)
}

pub fn amalg_to_json<R: Real>(x: &AmalgElement<R>) -> Value {
    let terms: Vec<Value> = x.terms().map(|(w, c)| json!({"word": w, "c": scalar_to_json(c)})).collect();
    json!({"ring": if R::EXACT { "rational" } else { "float" }, "terms": terms})
}

pub fn amalg_from_json<R: Real>(v: &Value) -> Result<AmalgElement<R>> {
    let mut out = AmalgElement::zero();
    for t in v.get("terms").and_then(Value::as_array).ok_or_else(|| Error::InvalidInput("missing terms".into()))? {
        let word: TensorWord = serde_json::from_value(t.get("word").cloned().unwrap_or(Value::Null))?;
        let c = scalar_from_json(t.get("c").ok_or_else(|| Error::InvalidInput("term without c".into()))?)?;
        out.add_term(word, c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, Profile};
    use num_rational::BigRational;

    #[test]
    fn rational_round_trip() {
        let x = random_element::<BigRational>(&Profile { max_terms: 6, ..Profile::default() }, 3);
        let v = element_to_json(&x);
        assert_eq!(element_from_json::<Cq>(&v).unwrap(), x);
        assert!(v["terms"][0]["c"][0].is_string());
    }

    #[test]
    fn float_and_matrix_round_trip() {
        let x = random_element::<f64>(&Profile::default(), 5);
        assert_eq!(element_from_json::<C64>(&element_to_json(&x)).unwrap(), x);
        let m = Element::monomial(Word::gen(2), CMatrix::<f64>::unit(2, 0, 1));
        let back = AnyElement::from_json(&element_to_json(&m)).unwrap();
        assert_eq!(back, AnyElement::Matrix(m));
    }

    #[test]
    fn ring_mismatch_is_reported() {
        let x = random_element::<f64>(&Profile::default(), 5);
        let err = element_from_json::<Cq>(&element_to_json(&x)).unwrap_err();
        assert!(matches!(err, Error::RingMismatch(_, _)));
    }

    #[test]
    fn hand_written_documents_parse() {
        let v: Value = serde_json::from_str(r#"{"ring":"rational","terms":[{"word":[1,2],"c":["1/2","0"]},{"word":[],"c":3}]}"#).unwrap();
        let x = element_from_json::<Cq>(&v).unwrap();
        assert_eq!(x.support_len(), 2);
        let s: Value = serde_json::from_str(r#"{"kind":"gen","d":1,"e":[1,0],"entries":[{"word":[1],"c":["-1","0"]}]}"#).unwrap();
        let sym = symbol_from_json::<BigRational>(&s).unwrap();
        assert_eq!(sym.at(1).re, BigRational::from_integer((-1).into()));
        assert_eq!(symbol_from_json::<BigRational>(&symbol_to_json(&sym)).unwrap(), sym);
        let bad: Value = serde_json::from_str(r#"{"ring":"rational","terms":[{"word":[1,-1],"c":1}]}"#).unwrap();
        assert!(element_from_json::<Cq>(&bad).is_err());
    }
}
