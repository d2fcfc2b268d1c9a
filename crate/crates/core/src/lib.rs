//! Exact and floating-point toolkit for Hilbert-transform type Fourier
//! multipliers on free group von Neumann algebras.

pub mod algebra;
pub mod amalg;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod io;
pub mod lp;
pub mod model;
pub mod multipliers;
pub mod paths;
pub mod scalar;
pub mod verify;
pub mod words;

pub use algebra::{linear_combine, random_element, CoeffLaw, Element, Profile};
pub use error::{Error, Result};
pub use scalar::{CMatrix, Coeff, Real};
pub use words::Word;

pub type Rational = num_rational::BigRational;
/// Gaussian rationals, the exact coefficient ring.
pub type Cq = num_complex::Complex<Rational>;
pub type C64 = num_complex::Complex<f64>;

pub type ExactElement = Element<Cq>;
pub type FloatElement = Element<C64>;
pub type MatrixElement = Element<CMatrix<f64>>;
