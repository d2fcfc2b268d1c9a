//! Partitions of a word ball into disjoint geodesic paths, the projections
//! `T_n` and `S_n`, and dyadic and smooth Littlewood-Paley blocks.

use std::collections::HashMap;

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{rng_from_seed, Element};
use crate::error::{Error, Result};
use crate::scalar::{Coeff, Real};
use crate::words::{alphabet, enumerate_ball, prefix_leq, prefix_lt, Word};

/// A chain `h_1 < h_2 < ...` in the prefix order with lengths increasing by
/// one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeodesicPath {
    pub words: Vec<Word>,
}

impl GeodesicPath {
    pub fn new(words: Vec<Word>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidInput("empty geodesic path".into()));
        }
        for pair in words.windows(2) {
            if pair[1].len() != pair[0].len() + 1 || !prefix_leq(&pair[0], &pair[1]) {
                return Err(Error::InvalidInput(format!("{:?} does not extend {:?} by one letter", pair[1], pair[0])));
            }
        }
        Ok(GeodesicPath { words })
    }

    pub fn root(&self) -> &Word {
        &self.words[0]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// 1-based position of `w` on the path.
    pub fn position(&self, w: &Word) -> Option<usize> {
        let k = w.len().checked_sub(self.root().len())?;
        (self.words.get(k) == Some(w)).then_some(k + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    /// Length-by-length sweep with seeded random geodesic extensions.
    Greedy,
    /// Paths `{h_0 g^k : k ≥ 1}` with `h_0` not ending in `g^{±1}`.
    Powers,
}

impl std::str::FromStr for PartitionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(PartitionKind::Greedy),
            "powers" | "concrete" => Ok(PartitionKind::Powers),
            other => Err(Error::InvalidInput(format!("unknown partition kind {other}"))),
        }
    }
}

/// Which words `S_n` keeps below the root `h_1(n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SConvention {
    /// All proper prefixes of the root, `e` included.
    #[default]
    IncludeE,
    /// Proper prefixes other than `e`.
    ExcludeE,
}

/// Disjoint geodesic paths covering `ball_R \ {e}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPartition {
    pub kind: PartitionKind,
    pub num_gens: u32,
    pub radius: usize,
    pub seed: Option<u64>,
    pub paths: Vec<GeodesicPath>,
    #[serde(skip)]
    assignment: HashMap<Word, usize>,
}

impl PathPartition {
    fn from_paths(kind: PartitionKind, num_gens: u32, radius: usize, seed: Option<u64>, paths: Vec<GeodesicPath>) -> Self {
        let mut assignment = HashMap::new();
        for (i, p) in paths.iter().enumerate() {
            for w in &p.words {
                assignment.insert(w.clone(), i);
            }
        }
        PathPartition { kind, num_gens, radius, seed, paths, assignment }
    }

    /// Rebuilds the word lookup after deserialization and checks
    /// disjointness.
    pub fn reindex(mut self) -> Result<Self> {
        self.assignment.clear();
        for (i, p) in self.paths.iter().enumerate() {
            for w in &p.words {
                if self.assignment.insert(w.clone(), i).is_some() {
                    return Err(Error::InvalidInput(format!("word {w:?} lies on two paths")));
                }
            }
        }
        Ok(self)
    }

    pub fn path_of(&self, w: &Word) -> Option<usize> {
        self.assignment.get(w).copied()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }
}

/// Sweeps lengths `1..=R`; every uncovered word starts a path extended by
/// uniform non-backtracking letters until it leaves the ball.
pub fn greedy_partition(num_gens: u32, radius: usize, seed: u64) -> Result<PathPartition> {
    if radius == 0 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    let ball = enumerate_ball(num_gens, radius)?;
    let letters = alphabet(num_gens);
    let mut rng = rng_from_seed(seed);
    let mut covered: HashMap<Word, usize> = HashMap::new();
    let mut paths = Vec::new();
    for w in ball.iter().skip(1) {
        if covered.contains_key(w) {
            continue;
        }
        let mut words = vec![w.clone()];
        while words.len() + w.len() <= radius {
            let cur = words.last().expect("nonempty");
            let next = loop {
                if let Some(n) = cur.extend(letters[rng.random_range(0..letters.len())]) {
                    break n;
                }
            };
            words.push(next);
        }
        for x in &words {
            covered.insert(x.clone(), paths.len());
        }
        paths.push(GeodesicPath { words });
    }
    Ok(PathPartition::from_paths(PartitionKind::Greedy, num_gens, radius, Some(seed), paths))
}

/// Paths `P_{h_0, g} = {h_0 g^k}` truncated to the ball, ordered by root.
pub fn concrete_partition(num_gens: u32, radius: usize) -> Result<PathPartition> {
    if radius == 0 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    let ball = enumerate_ball(num_gens, radius)?;
    let mut paths = Vec::new();
    for w in ball.iter().skip(1) {
        let l = w.last().expect("nonempty");
        let is_root = w.len() == 1 || w.letter(w.len() - 1) != Some(l);
        if !is_root {
            continue;
        }
        let mut words = vec![w.clone()];
        while words.last().expect("nonempty").len() < radius {
            let next = words.last().expect("nonempty").extend(l).expect("repeating a letter stays reduced");
            words.push(next);
        }
        paths.push(GeodesicPath { words });
    }
    Ok(PathPartition::from_paths(PartitionKind::Powers, num_gens, radius, None, paths))
}

pub fn build_partition(kind: PartitionKind, num_gens: u32, radius: usize, seed: u64) -> Result<PathPartition> {
    match kind {
        PartitionKind::Greedy => greedy_partition(num_gens, radius, seed),
        PartitionKind::Powers => concrete_partition(num_gens, radius),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathProjection {
    /// Onto the span of the path.
    T,
    /// Onto the span of the words strictly below the root.
    S,
}

pub fn path_project<C: Coeff>(part: &PathPartition, n: usize, which: PathProjection, x: &Element<C>) -> Result<Element<C>> {
    path_project_with(part, n, which, x, SConvention::default())
}

pub fn path_project_with<C: Coeff>(
    part: &PathPartition,
    n: usize,
    which: PathProjection,
    x: &Element<C>,
    conv: SConvention,
) -> Result<Element<C>> {
    let path = part.paths.get(n).ok_or_else(|| Error::InvalidInput(format!("path index {n} out of range")))?;
    if x.max_len() > part.radius || x.max_generator() > part.num_gens {
        return Err(Error::InvalidInput("element not supported in the partition's ball".into()));
    }
    Ok(match which {
        PathProjection::T => x.filter(|w| part.path_of(w) == Some(n)),
        PathProjection::S => {
            let root = path.root();
            x.filter(|w| prefix_lt(w, root) && (conv == SConvention::IncludeE || !w.is_e()))
        }
    })
}

/// Keeps path positions `2^n ≤ k < 2^{n+1}`.
pub fn dyadic_block<C: Coeff>(path: &GeodesicPath, n: u32, x: &Element<C>) -> Element<C> {
    let (lo, hi) = (1usize << n, 1usize << (n + 1));
    x.filter(|w| path.position(w).is_some_and(|k| lo <= k && k < hi))
}

/// Coefficient `a_k` of `L_{h_k} A^{-1/2}` in the smooth block `n ≥ 1`.
pub fn smooth_coefficient(n: u32, k: usize) -> f64 {
    let (a, b, c, d) = (1usize << (n - 1), 1usize << n, 1usize << (n + 1), 1usize << (n + 2));
    if a < k && k <= b {
        2f64.powf(1.0 - n as f64 / 2.0)
    } else if b < k && k <= c {
        (k as f64).sqrt() - (k as f64 - 1.0).sqrt()
    } else if c < k && k <= d {
        -(2f64.powf(-(n as f64 + 1.0) / 2.0))
    } else {
        0.0
    }
}

/// Induced symbol `φ_n(l) = l^{-1/2} Σ_{k ≤ l} a_k` on path position `l`.
pub fn smooth_symbol(n: u32, l: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let s: f64 = (1..=l.min(1usize << (n + 2))).map(|k| smooth_coefficient(n, k)).sum();
    s / (l as f64).sqrt()
}

/// `Σ_k a_k L_{h_k}(A^{-1/2} x)` with cone projections `L_{h_k}`. Floating
/// point only.
pub fn smooth_block<C: Coeff>(path: &GeodesicPath, n: u32, x: &Element<C>) -> Result<Element<C>> {
    if n == 0 {
        return Err(Error::InvalidInput("smooth blocks start at n = 1".into()));
    }
    if C::Real::EXACT {
        return Err(Error::NotRepresentable("smooth blocks need square roots; use the float ring".into()));
    }
    if path.root().len() != 1 {
        return Err(Error::InvalidInput("path must be rooted at length 1; re-root first".into()));
    }
    if x.coeff(&Word::e()).is_some() {
        return Err(Error::InvalidInput("A^{-1/2} needs an element without trace part".into()));
    }
    let reach = path.len().min(1 << (n + 2));
    Ok(x.map_scalar(|w| {
        let mut s = 0.0;
        for (i, h) in path.words.iter().take(reach).enumerate() {
            if !prefix_leq(h, w) {
                break;
            }
            s += smooth_coefficient(n, i + 1);
        }
        Complex::new(C::Real::from_f64_approx(s / (w.len() as f64).sqrt()), C::Real::zero())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = Complex<BigRational>;

    fn w(v: &[i32]) -> Word {
        Word::new(v.to_vec()).unwrap()
    }
    fn lam(v: &[i32]) -> Element<Q> {
        Element::lambda(w(v))
    }

    #[test]
    fn greedy_examples() {
        let a = greedy_partition(2, 4, 9).unwrap();
        assert_eq!(a, greedy_partition(2, 4, 9).unwrap());
        let ball = enumerate_ball(2, 4).unwrap();
        let total: usize = a.paths.iter().map(GeodesicPath::len).sum();
        assert_eq!(total, ball.len() - 1);
        for x in ball.iter().skip(1) {
            assert!(a.path_of(x).is_some());
        }
        for p in &a.paths {
            GeodesicPath::new(p.words.clone()).unwrap();
        }
    }

    #[test]
    fn concrete_examples() {
        let c = concrete_partition(2, 3).unwrap();
        let n = c.path_of(&w(&[1])).unwrap();
        assert_eq!(c.paths[n].words, vec![w(&[1]), w(&[1, 1]), w(&[1, 1, 1])]);
        assert_eq!(c.path_of(&w(&[1, 1])), Some(n));
        assert_ne!(c.path_of(&w(&[2])), Some(n));
        assert_eq!(c.paths[c.path_of(&w(&[2])).unwrap()].root(), &w(&[2]));
        let mut roots: Vec<_> = c.paths.iter().map(|p| p.root().clone()).collect();
        roots.dedup();
        assert_eq!(roots.len(), c.num_paths());
        let total: usize = c.paths.iter().map(GeodesicPath::len).sum();
        assert_eq!(total, enumerate_ball(2, 3).unwrap().len() - 1);
    }

    #[test]
    fn path_project_examples() {
        let c = concrete_partition(2, 3).unwrap();
        let n = c.path_of(&w(&[1])).unwrap();
        let x = lam(&[1, 1]).add(&lam(&[2])).unwrap();
        assert_eq!(path_project(&c, n, PathProjection::T, &x).unwrap(), lam(&[1, 1]));
        let y = lam(&[]).add(&lam(&[1])).unwrap();
        assert_eq!(path_project(&c, n, PathProjection::S, &y).unwrap(), lam(&[]));
        assert!(path_project_with(&c, n, PathProjection::S, &y, SConvention::ExcludeE).unwrap().is_zero());
        assert!(path_project(&c, n, PathProjection::T, &lam(&[1, 2, 1, 2])).is_err());
    }

    #[test]
    fn dyadic_examples() {
        let path = GeodesicPath::new((1..=8).map(|k| w(&vec![1; k])).collect()).unwrap();
        let x = (1..=8).fold(Element::<Q>::scalar_zero(), |acc, k| acc.add(&lam(&vec![1; k])).unwrap());
        assert_eq!(dyadic_block(&path, 0, &x), lam(&[1]));
        assert_eq!(dyadic_block(&path, 1, &x), lam(&[1, 1]).add(&lam(&[1, 1, 1])).unwrap());
        let blocks = (0..4).fold(Element::<Q>::scalar_zero(), |acc, n| acc.add(&dyadic_block(&path, n, &x)).unwrap());
        assert_eq!(blocks, x);
    }

    #[test]
    fn smooth_symbol_profile() {
        for n in 1..6u32 {
            for l in (1usize << n)..=(1usize << (n + 1)) {
                assert!((smooth_symbol(n, l) - 1.0).abs() < 1e-12, "n={n} l={l}");
            }
            assert!(smooth_symbol(n, 1 << (n + 2)).abs() < 1e-12);
            for l in 1..=(1usize << (n - 1)) {
                assert_eq!(smooth_symbol(n, l), 0.0);
            }
            for l in 1..=(1usize << (n + 3)) {
                let phi = smooth_symbol(n, l);
                let lower = if (1usize << n) <= l && l < (1usize << (n + 1)) { 1.0 } else { 0.0 };
                let upper = if (1usize << (n - 1)) < l && l < (1usize << (n + 2)) { 1.0 } else { 0.0 };
                assert!(phi >= lower - 1e-12 && phi <= upper + 1e-12, "n={n} l={l} phi={phi}");
            }
        }
    }

    #[test]
    fn smooth_block_matches_symbol_on_path() {
        let path = GeodesicPath::new((1..=16).map(|k| w(&vec![2; k])).collect()).unwrap();
        let x = (1..=16).fold(Element::<Complex<f64>>::scalar_zero(), |acc, k| {
            acc.add(&Element::lambda(w(&vec![2; k]))).unwrap()
        });
        let y = smooth_block(&path, 2, &x).unwrap();
        for k in 1..=16 {
            let got = y.coeff(&w(&vec![2; k])).map_or(0.0, |c| c.re);
            assert!((got - smooth_symbol(2, k)).abs() < 1e-12);
        }
        assert!(smooth_block(&path, 2, &lam(&[2])).is_err());
        let bad = GeodesicPath::new(vec![w(&[1, 2]), w(&[1, 2, 2])]).unwrap();
        assert!(smooth_block(&bad, 1, &x).is_err());
    }
}
