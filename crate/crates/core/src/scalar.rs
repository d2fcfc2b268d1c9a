//! Scalar and coefficient rings.
//!
//! Everything numeric is generic over a real field [`Real`] (implemented for
//! `f32`, `f64` and exact [`BigRational`]); complex scalars are
//! `Complex<R>`. Group-algebra coefficients implement [`Coeff`], which covers
//! both complex scalars and small square complex matrices ([`CMatrix`]).

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Absolute pruning threshold for floating coefficients.
pub const FLOAT_PRUNE: f64 = 1e-14;

/// A real field usable as the base of every computation.
pub trait Real:
    Clone + Debug + PartialEq + PartialOrd + Send + Sync + Num + Signed + ToPrimitive + FromPrimitive + 'static
{
    /// Arithmetic is exact (equality is meaningful).
    const EXACT: bool;
    /// Ring tag used in JSON documents.
    const TAG: &'static str;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Nearest representable value; for exact rings the value is rounded to
    /// a dyadic grid of step 2^-20.
    fn from_f64_approx(v: f64) -> Self;

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Zero test used for pruning: exact equality or below [`FLOAT_PRUNE`].
    fn negligible(&self) -> bool;

    /// Square root when it exists in the field (always for floats, only for
    /// perfect squares of rationals).
    fn sqrt_exact(&self) -> Option<Self>;

    /// `len^r`, when representable.
    fn length_power(len: usize, r: f64) -> Option<Self>;

    /// Parse from a decimal or `num/den` string.
    fn parse_str(s: &str) -> Option<Self>;

    fn to_string_repr(&self) -> String;
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Real for $t {
            const EXACT: bool = false;
            const TAG: &'static str = "float";

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn from_f64_approx(v: f64) -> Self {
                v as $t
            }

            fn negligible(&self) -> bool {
                (self.abs() as f64) <= FLOAT_PRUNE
            }

            fn sqrt_exact(&self) -> Option<Self> {
                (*self >= 0.0).then(|| self.sqrt())
            }

            fn length_power(len: usize, r: f64) -> Option<Self> {
                Some((len as f64).powf(r) as $t)
            }

            fn parse_str(s: &str) -> Option<Self> {
                if let Some((n, d)) = s.split_once('/') {
                    let n: f64 = n.trim().parse().ok()?;
                    let d: f64 = d.trim().parse().ok()?;
                    Some((n / d) as $t)
                } else {
                    s.trim().parse().ok()
                }
            }

            fn to_string_repr(&self) -> String {
                format!("{:e}", self)
            }
        }
    };
}

impl_real_float!(f32);
impl_real_float!(f64);

fn bigint_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Real for BigRational {
    const EXACT: bool = true;
    const TAG: &'static str = "rational";

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64_approx(v: f64) -> Self {
        let scale = (1u64 << 20) as f64;
        BigRational::new(BigInt::from((v * scale).round() as i64), BigInt::from(1u64 << 20))
    }

    fn negligible(&self) -> bool {
        self.is_zero()
    }

    fn sqrt_exact(&self) -> Option<Self> {
        let n = bigint_sqrt_exact(self.numer())?;
        let d = bigint_sqrt_exact(self.denom())?;
        Some(BigRational::new(n, d))
    }

    fn length_power(len: usize, r: f64) -> Option<Self> {
        if r.fract() == 0.0 && r.abs() < 64.0 {
            let base = BigRational::from_integer(BigInt::from(len));
            if r < 0.0 && len == 0 {
                return None;
            }
            let e = r as i32;
            Some(num_traits::pow::Pow::pow(&base, e))
        } else if (2.0 * r).fract() == 0.0 {
            // half-integer power: needs an exact square root of len
            let root = bigint_sqrt_exact(&BigInt::from(len))?;
            let base = BigRational::from_integer(root);
            let e = (2.0 * r) as i32;
            if e < 0 && len == 0 {
                return None;
            }
            Some(num_traits::pow::Pow::pow(&base, e))
        } else {
            None
        }
    }

    fn parse_str(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        } else {
            let n: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(n))
        }
    }

    fn to_string_repr(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Complex scalar over a real field.
pub type Cx<R> = Complex<R>;

pub fn cx<R: Real>(re: R, im: R) -> Cx<R> {
    Complex::new(re, im)
}

pub fn cx_ratio<R: Real>(re: (i64, i64), im: (i64, i64)) -> Cx<R> {
    Complex::new(R::from_ratio(re.0, re.1), R::from_ratio(im.0, im.1))
}

pub fn cx_negligible<R: Real>(z: &Cx<R>) -> bool {
    z.re.negligible() && z.im.negligible()
}

pub fn cx_norm_sqr<R: Real>(z: &Cx<R>) -> R {
    z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()
}

pub fn cx_to_c64<R: Real>(z: &Cx<R>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// A coefficient ring for group-algebra elements.
///
/// All coefficients of one element share a dimension (`1` for scalars).
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Real: Real;

    /// JSON ring tag: `rational`, `float` or `matrix`.
    fn ring_tag() -> &'static str;
    fn dim(&self) -> usize;
    fn zero_of(dim: usize) -> Self;
    fn one_of(dim: usize) -> Self;
    fn from_scalar(s: Cx<Self::Real>, dim: usize) -> Self;
    fn negligible(&self) -> bool;
    fn scale(&self, s: &Cx<Self::Real>) -> Self;
    /// Conjugate transpose.
    fn adjoint(&self) -> Self;
    /// Normalized trace (`tr / dim`).
    fn normalized_trace(&self) -> Cx<Self::Real>;
    /// Row-major `dim x dim` block as double-precision complex numbers.
    fn to_block(&self) -> Vec<Complex<f64>>;

    /// `tr_normalized(c* c)`, the squared 2-norm contribution of one term.
    fn norm_sqr(&self) -> Self::Real {
        (self.adjoint() * self.clone()).normalized_trace().re
    }
}

impl<R: Real> Coeff for Complex<R> {
    type Real = R;

    fn ring_tag() -> &'static str {
        R::TAG
    }

    fn dim(&self) -> usize {
        1
    }

    fn zero_of(_: usize) -> Self {
        Complex::zero()
    }

    fn one_of(_: usize) -> Self {
        Complex::one()
    }

    fn from_scalar(s: Cx<R>, _: usize) -> Self {
        s
    }

    fn negligible(&self) -> bool {
        cx_negligible(self)
    }

    fn scale(&self, s: &Cx<R>) -> Self {
        self.clone() * s.clone()
    }

    fn adjoint(&self) -> Self {
        self.conj()
    }

    fn normalized_trace(&self) -> Cx<R> {
        self.clone()
    }

    fn to_block(&self) -> Vec<Complex<f64>> {
        vec![cx_to_c64(self)]
    }

    fn norm_sqr(&self) -> R {
        cx_norm_sqr(self)
    }
}

/// Small dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<R: Real> {
    dim: usize,
    data: Vec<Cx<R>>,
}

impl<R: Real> CMatrix<R> {
    pub fn from_rows(dim: usize, data: Vec<Cx<R>>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data must be dim*dim");
        CMatrix { dim, data }
    }

    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero_of(dim);
        m.data[i * dim + j] = Complex::one();
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Cx<R> {
        &self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Cx<R>] {
        &self.data
    }
}

impl<R: Real> Add for CMatrix<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let data = self.data.into_iter().zip(o.data).map(|(a, b)| a + b).collect();
        CMatrix { dim: self.dim, data }
    }
}

impl<R: Real> Sub for CMatrix<R> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let data = self.data.into_iter().zip(o.data).map(|(a, b)| a - b).collect();
        CMatrix { dim: self.dim, data }
    }
}

impl<R: Real> Neg for CMatrix<R> {
    type Output = Self;
    fn neg(self) -> Self {
        CMatrix { dim: self.dim, data: self.data.into_iter().map(|a| -a).collect() }
    }
}

impl<R: Real> Mul for CMatrix<R> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let n = self.dim;
        let mut data = vec![Complex::<R>::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if cx_negligible(a) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j].clone() + a.clone() * o.data[k * n + j].clone();
                }
            }
        }
        CMatrix { dim: n, data }
    }
}

impl<R: Real> Coeff for CMatrix<R> {
    type Real = R;

    fn ring_tag() -> &'static str {
        "matrix"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn zero_of(dim: usize) -> Self {
        CMatrix { dim, data: vec![Complex::zero(); dim * dim] }
    }

    fn one_of(dim: usize) -> Self {
        Self::from_scalar(Complex::one(), dim)
    }

    fn from_scalar(s: Cx<R>, dim: usize) -> Self {
        let mut m = Self::zero_of(dim);
        for i in 0..dim {
            m.data[i * dim + i] = s.clone();
        }
        m
    }

    fn negligible(&self) -> bool {
        self.data.iter().all(cx_negligible)
    }

    fn scale(&self, s: &Cx<R>) -> Self {
        CMatrix { dim: self.dim, data: self.data.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i].conj());
            }
        }
        CMatrix { dim: n, data }
    }

    fn normalized_trace(&self) -> Cx<R> {
        let n = self.dim;
        let mut t = Complex::<R>::zero();
        for i in 0..n {
            t = t + self.data[i * n + i].clone();
        }
        let d = R::from_ratio(n as i64, 1);
        Complex::new(t.re / d.clone(), t.im / d)
    }

    fn to_block(&self) -> Vec<Complex<f64>> {
        self.data.iter().map(cx_to_c64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    #[test]
    fn rational_sqrt_only_for_squares() {
        assert_eq!(Q::from_ratio(9, 4).sqrt_exact(), Some(Q::from_ratio(3, 2)));
        assert_eq!(Q::from_ratio(2, 1).sqrt_exact(), None);
        assert_eq!(Q::from_ratio(-1, 1).sqrt_exact(), None);
    }

    #[test]
    fn length_power_exact_cases() {
        assert_eq!(Q::length_power(3, 2.0), Some(Q::from_ratio(9, 1)));
        assert_eq!(Q::length_power(4, -0.5), Some(Q::from_ratio(1, 2)));
        assert_eq!(Q::length_power(3, -0.5), None);
        assert!((f64::length_power(3, -0.5).unwrap() - 3f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(Q::parse_str("-3/6"), Some(Q::from_ratio(-1, 2)));
        assert_eq!(Q::parse_str("7"), Some(Q::from_ratio(7, 1)));
        assert_eq!(Q::parse_str("1/0"), None);
        assert_eq!(f64::parse_str("1/4"), Some(0.25));
    }

    #[test]
    fn matrix_normalized_trace_and_adjoint() {
        let i = Complex::new(0.0, 1.0);
        let m = CMatrix::from_rows(2, vec![Complex::new(1.0, 0.0), i, Complex::zero(), Complex::new(3.0, 0.0)]);
        assert_eq!(m.normalized_trace(), Complex::new(2.0, 0.0));
        assert_eq!(*m.adjoint().get(1, 0), -i);
        let id = CMatrix::<f64>::one_of(2);
        assert_eq!(id.norm_sqr(), 1.0);
    }
}
