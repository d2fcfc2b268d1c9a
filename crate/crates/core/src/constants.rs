//! Upper bounds on the constants of the Hilbert-transform, square-function
//! and Rosenthal-type estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth exponent `ln(1 + √2) / ln 2` of the dyadic recursion.
pub fn gamma() -> f64 {
    (1.0 + 2f64.sqrt()).ln() / 2f64.ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    C,
    Alpha,
    Beta,
}

impl std::str::FromStr for BoundKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" => Ok(BoundKind::C),
            "alpha" => Ok(BoundKind::Alpha),
            "beta" => Ok(BoundKind::Beta),
            other => Err(Error::InvalidInput(format!("unknown bound {other}"))),
        }
    }
}

pub fn theoretical_bound(which: BoundKind, p: f64) -> Result<f64> {
    match which {
        BoundKind::C => bound_c(p),
        BoundKind::Alpha => bound_alpha(p),
        BoundKind::Beta => bound_beta(p),
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("exponent must satisfy 1 < p < ∞, got {p}")));
    }
    Ok(())
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `c_{2^k}` from `c_2 = 1`, `c_{2p} = c_p + √(2c_p² + 4)`.
pub fn dyadic_c(k: u32) -> f64 {
    let mut c = 1.0f64;
    for _ in 1..k {
        c += (2.0 * c * c + 4.0).sqrt();
    }
    c
}

/// `c_p`: the dyadic recursion, interpolation `c_p ≤ c_q^θ` with
/// `θ = (1 - 2/p)/(1 - 2/q)` for the next dyadic `q ≥ p`, and duality for
/// `p < 2`.
pub fn bound_c(p: f64) -> Result<f64> {
    check_p(p)?;
    if p < 2.0 {
        return bound_c(conjugate(p));
    }
    if p == 2.0 {
        return Ok(1.0);
    }
    let k = p.log2().ceil() as u32;
    let q = 2f64.powi(k as i32);
    let cq = dyadic_c(k);
    if q == p {
        return Ok(cq);
    }
    let theta = (1.0 - 2.0 / p) / (1.0 - 2.0 / q);
    Ok(cq.powf(theta))
}

/// `α_p ≤ 3c_4²` on `[2, 4]`, `2√2(c_{p/2}² + c_{p/2})` for `p ≥ 4`
/// (the smaller one at `p = 4`), duality below 2.
pub fn bound_alpha(p: f64) -> Result<f64> {
    check_p(p)?;
    if p < 2.0 {
        return bound_alpha(conjugate(p));
    }
    let low = 3.0 * bound_c(4.0)?.powi(2);
    if p < 4.0 {
        return Ok(low);
    }
    let h = if p == 4.0 { 1.0 } else { bound_c(p / 2.0)? };
    let high = 2.0 * 2f64.sqrt() * (h * h + h);
    Ok(if p == 4.0 { low.min(high) } else { high })
}

/// `β_p ≤ √2 c_p (1 + α_p)`.
pub fn bound_beta(p: f64) -> Result<f64> {
    check_p(p)?;
    if p < 2.0 {
        return bound_beta(conjugate(p));
    }
    Ok(2f64.sqrt() * bound_c(p)? * (1.0 + bound_alpha(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_values() {
        assert_eq!(bound_c(2.0).unwrap(), 1.0);
        assert!((bound_c(4.0).unwrap() - (1.0 + 6f64.sqrt())).abs() < 1e-12);
        let c4 = 1.0 + 6f64.sqrt();
        let c8 = c4 + (2.0 * c4 * c4 + 4.0).sqrt();
        assert!((bound_c(8.0).unwrap() - c8).abs() < 1e-12);
        assert!((c8 - 8.72187).abs() < 1e-5);
    }

    #[test]
    fn duality_and_monotonicity() {
        for p in [1.1, 1.5, 1.9, 3.0] {
            assert_eq!(bound_c(p).unwrap(), bound_c(conjugate(p)).unwrap());
        }
        let mut prev = 1.0;
        let mut p = 2.0;
        while p <= 1024.0 {
            let c = bound_c(p).unwrap();
            assert!(c >= prev - 1e-12, "p={p}");
            prev = c;
            p *= 1.1;
        }
        assert!(bound_c(1.0).is_err());
        assert!(bound_alpha(0.5).is_err());
    }

    #[test]
    fn growth_exponent() {
        assert!((gamma() - 1.2716).abs() < 1e-4);
        let ratios: Vec<f64> = (1..=10).map(|k| dyadic_c(k) / 2f64.powi(k as i32).powf(gamma())).collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(lo > 0.1 && hi < 10.0, "{ratios:?}");
        let slope = (dyadic_c(10).ln() - dyadic_c(9).ln()) / 2f64.ln();
        assert!((slope - gamma()).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn alpha_beta_values() {
        let c4 = 1.0 + 6f64.sqrt();
        assert!((bound_alpha(3.0).unwrap() - 3.0 * c4 * c4).abs() < 1e-9);
        assert!((bound_alpha(4.0).unwrap() - 2.0 * 2f64.sqrt() * 2.0).abs() < 1e-12);
        let a8 = 2.0 * 2f64.sqrt() * (c4 * c4 + c4);
        assert!((bound_alpha(8.0).unwrap() - a8).abs() < 1e-9);
        assert!((bound_beta(8.0).unwrap() - 2f64.sqrt() * bound_c(8.0).unwrap() * (1.0 + a8)).abs() < 1e-9);
    }
}
