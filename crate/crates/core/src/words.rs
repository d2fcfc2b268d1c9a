//! Reduced words in the free group on countably many generators.
//!
//! A letter `i > 0` stands for the generator `g_i` and `-i` for its inverse.
//! The empty word is the unit `e`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of words produced by [`enumerate_ball`].
pub const DEFAULT_BALL_CAP: usize = 200_000;

/// A reduced word. Ordered length-lexicographically with the letter order
/// `1 < -1 < 2 < -2 < ...`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct Word(Vec<i32>);

impl Word {
    pub fn e() -> Self {
        Word(Vec::new())
    }

    pub fn gen(letter: i32) -> Self {
        assert!(letter != 0, "letter 0 is not a generator");
        Word(vec![letter])
    }

    /// Validates that `letters` is nonzero and reduced.
    pub fn new(letters: Vec<i32>) -> Result<Self> {
        if let Some(pos) = letters.iter().position(|&l| l == 0) {
            return Err(Error::MalformedWord(format!("zero letter at position {pos}")));
        }
        if let Some(pos) = letters.windows(2).position(|w| w[0] == -w[1]) {
            return Err(Error::MalformedWord(format!(
                "adjacent cancellation at position {pos} in {letters:?}"
            )));
        }
        Ok(Word(letters))
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = i32>) -> Result<Self> {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            if l == 0 {
                return Err(Error::MalformedWord("zero letter".into()));
            }
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word(out))
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_e(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<i32> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<i32> {
        self.0.last().copied()
    }

    /// The `l`-th letter, 1-based.
    pub fn letter(&self, l: usize) -> Option<i32> {
        l.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn suffix(&self, n: usize) -> Word {
        let n = n.min(self.len());
        Word(self.0[self.len() - n..].to_vec())
    }

    /// Drops the first `n` letters (`∂^n w`).
    pub fn tail(&self, n: usize) -> Word {
        Word(self.0[n.min(self.len())..].to_vec())
    }

    pub fn max_generator(&self) -> u32 {
        self.0.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    /// Appends a letter if it does not cancel; `None` otherwise.
    pub fn extend(&self, letter: i32) -> Option<Word> {
        if self.last() == Some(-letter) {
            return None;
        }
        let mut v = self.0.clone();
        v.push(letter);
        Some(Word(v))
    }

    /// Sequence of generator indices of the maximal syllables `g_i^m`.
    pub fn syllable_indices(&self) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for l in &self.0 {
            let k = l.unsigned_abs();
            if out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    pub fn to_vec(&self) -> Vec<i32> {
        self.0.clone()
    }
}

impl TryFrom<Vec<i32>> for Word {
    type Error = Error;
    fn try_from(v: Vec<i32>) -> Result<Self> {
        Word::new(v)
    }
}

impl From<Word> for Vec<i32> {
    fn from(w: Word) -> Self {
        w.0
    }
}

fn letter_rank(l: i32) -> u64 {
    2 * l.unsigned_abs() as u64 - u64::from(l > 0)
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            self.0
                .iter()
                .map(|&l| letter_rank(l))
                .cmp(other.0.iter().map(|&l| letter_rank(l)))
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_e() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if *l > 0 {
                write!(f, "g{l}")?;
            } else {
                write!(f, "g{}⁻¹", -l)?;
            }
        }
        Ok(())
    }
}

/// Reduced form of `uv`.
pub fn reduce_concat(u: &Word, v: &Word) -> Word {
    let a = u.letters();
    let b = v.letters();
    let mut k = 0;
    while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
        k += 1;
    }
    let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
    out.extend_from_slice(&a[..a.len() - k]);
    out.extend_from_slice(&b[k..]);
    Word(out)
}

pub fn invert(u: &Word) -> Word {
    Word(u.letters().iter().rev().map(|l| -l).collect())
}

/// `g ≤ h`: `g` is an initial segment of `h`.
pub fn prefix_leq(g: &Word, h: &Word) -> bool {
    h.letters().starts_with(g.letters())
}

/// `g < h`: proper initial segment.
pub fn prefix_lt(g: &Word, h: &Word) -> bool {
    g.len() < h.len() && prefix_leq(g, h)
}

/// `h` is a final segment of `w`.
pub fn suffix_leq(h: &Word, w: &Word) -> bool {
    w.letters().ends_with(h.letters())
}

pub fn common_prefix_len(g: &Word, h: &Word) -> usize {
    g.letters().iter().zip(h.letters()).take_while(|(a, b)| a == b).count()
}

/// Twice the Gromov product, `|g| + |g2| - |g g2|`; always even.
pub fn gromov_product_doubled(g: &Word, g2: &Word) -> usize {
    g.len() + g2.len() - reduce_concat(g, g2).len()
}

/// Gromov product `(|g| + |g2| - |g g2|) / 2`. The numerator is always even
/// in a free group, so the value is an integer.
pub fn gromov_product(g: &Word, g2: &Word) -> usize {
    let twice = gromov_product_doubled(g, g2);
    debug_assert!(twice.is_multiple_of(2));
    twice / 2
}

/// Number of reduced words of length at most `radius` over `num_gens`
/// generators.
pub fn ball_size(num_gens: u32, radius: usize) -> u128 {
    let n = num_gens as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * n;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * n - 1);
    }
    total
}

/// All reduced words of length at most `radius`, in canonical order.
pub fn enumerate_ball(num_gens: u32, radius: usize) -> Result<Vec<Word>> {
    enumerate_ball_capped(num_gens, radius, DEFAULT_BALL_CAP)
}

pub fn enumerate_ball_capped(num_gens: u32, radius: usize, cap: usize) -> Result<Vec<Word>> {
    if num_gens == 0 {
        return Err(Error::InvalidInput("num_gens must be positive".into()));
    }
    let size = ball_size(num_gens, radius);
    if size > cap as u128 {
        return Err(Error::ResourceCap { what: "ball", size: size.min(usize::MAX as u128) as usize, cap });
    }
    let letters = alphabet(num_gens);
    let mut out = Vec::with_capacity(size as usize);
    out.push(Word::e());
    let mut start = 0;
    for _ in 0..radius {
        let end = out.len();
        for i in start..end {
            for &l in &letters {
                if let Some(w) = out[i].extend(l) {
                    out.push(w);
                }
            }
        }
        start = end;
    }
    Ok(out)
}

/// Letters `1, -1, 2, -2, ..., n, -n` in canonical order.
pub fn alphabet(num_gens: u32) -> Vec<i32> {
    (1..=num_gens as i32).flat_map(|k| [k, -k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i32]) -> Word {
        Word::new(v.to_vec()).unwrap()
    }

    #[test]
    fn concat_examples() {
        assert_eq!(reduce_concat(&w(&[1, 2]), &w(&[-2, 1])), w(&[1, 1]));
        assert_eq!(reduce_concat(&w(&[1]), &w(&[-1])), Word::e());
        assert_eq!(reduce_concat(&w(&[1, 2]), &w(&[3])), w(&[1, 2, 3]));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&w(&[1, 2])), w(&[-2, -1]));
        assert_eq!(invert(&Word::e()), Word::e());
        assert_eq!(invert(&w(&[1, -2, 1])), w(&[-1, 2, -1]));
    }

    #[test]
    fn prefix_examples() {
        assert!(prefix_leq(&Word::e(), &w(&[1, 2])));
        assert!(prefix_leq(&w(&[1]), &w(&[1, 2])));
        assert!(!prefix_leq(&w(&[2]), &w(&[1, 2])));
    }

    #[test]
    fn gromov_examples() {
        assert_eq!(gromov_product(&w(&[-1]), &w(&[1, 2])), 1);
        assert_eq!(gromov_product(&Word::e(), &w(&[1, 2])), 0);
        assert_eq!(gromov_product(&w(&[1]), &w(&[2])), 0);
    }

    #[test]
    fn ball_counts() {
        assert_eq!(enumerate_ball(2, 0).unwrap(), vec![Word::e()]);
        assert_eq!(enumerate_ball(2, 1).unwrap().len(), 5);
        assert_eq!(enumerate_ball(2, 2).unwrap().len(), 17);
        assert_eq!(ball_size(3, 4), 1 + 6 + 30 + 150 + 750);
    }

    #[test]
    fn ball_cap_is_enforced() {
        let err = enumerate_ball_capped(3, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
    }

    #[test]
    fn malformed_words_rejected() {
        assert!(Word::new(vec![1, -1]).is_err());
        assert!(Word::new(vec![0]).is_err());
        let parsed: std::result::Result<Word, _> = serde_json::from_str("[2,-2]");
        assert!(parsed.is_err());
        let ok: Word = serde_json::from_str("[1,-2,3]").unwrap();
        assert_eq!(serde_json::to_string(&ok).unwrap(), "[1,-2,3]");
    }

    #[test]
    fn canonical_letter_order() {
        let ball = enumerate_ball(2, 1).unwrap();
        assert_eq!(ball, vec![Word::e(), w(&[1]), w(&[-1]), w(&[2]), w(&[-2])]);
        let mut sorted = enumerate_ball(2, 3).unwrap();
        let orig = sorted.clone();
        sorted.sort();
        assert_eq!(sorted, orig);
    }
}
