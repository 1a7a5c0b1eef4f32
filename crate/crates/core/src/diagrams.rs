//! Index sets Dgm(n, m): sequences of m particle pairs (i < j, 1-based) with
//! no pair repeated consecutively.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("diagrams need n >= 2 and m >= 1, got n={n}, m={m}")]
    Domain { n: usize, m: usize },
    #[error("invalid pair ({0}, {1}) for n = {2}")]
    Pair(usize, usize, usize),
    #[error("pair ({0}, {1}) repeated at positions {2} and {3}")]
    Repeat(usize, usize, usize, usize),
}

pub type Pair = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagramIndex {
    n: usize,
    pairs: Vec<Pair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramClass {
    pub degenerate: bool,
}

impl DiagramIndex {
    pub fn new(n: usize, pairs: Vec<Pair>) -> Result<Self, DiagramError> {
        if n < 2 || pairs.is_empty() {
            return Err(DiagramError::Domain { n, m: pairs.len() });
        }
        for &(i, j) in &pairs {
            if !(1 <= i && i < j && j <= n) {
                return Err(DiagramError::Pair(i, j, n));
            }
        }
        for k in 1..pairs.len() {
            if pairs[k] == pairs[k - 1] {
                let (i, j) = pairs[k];
                return Err(DiagramError::Repeat(i, j, k, k + 1));
            }
        }
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    /// Apply a relabeling `perm` (1-based images, `perm[a-1]` is the new
    /// label of particle `a`), re-sorting each pair.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, DiagramError> {
        let pairs = self
            .pairs
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i - 1], perm[j - 1]);
                (a.min(b), a.max(b))
            })
            .collect();
        Self::new(self.n, pairs)
    }
}

impl fmt::Display for DiagramIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// All pairs `i < j` in lexicographic order.
pub fn all_pairs(n: usize) -> Vec<Pair> {
    let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            v.push((i, j));
        }
    }
    v
}

pub fn classify(d: &DiagramIndex) -> DiagramClass {
    let mut seen = vec![false; d.n];
    for &(i, j) in &d.pairs {
        seen[i - 1] = true;
        seen[j - 1] = true;
    }
    DiagramClass {
        degenerate: !seen.iter().all(|&s| s),
    }
}

/// `|Dgm(n,m)| = p(p−1)^{m−1}` with `p = n(n−1)/2`.
pub fn count(n: usize, m: usize) -> Result<BigUint, DiagramError> {
    if n < 2 || m < 1 {
        return Err(DiagramError::Domain { n, m });
    }
    let p = BigUint::from(n) * BigUint::from(n - 1) / 2u32;
    let rest = p.clone() - 1u32;
    Ok(p * num_traits::pow(rest, m - 1))
}

/// Lazy lexicographic enumeration of Dgm(n, m).
#[derive(Debug, Clone)]
pub struct DiagramIter {
    n: usize,
    pairs: Vec<Pair>,
    idx: Vec<usize>,
    done: bool,
}

impl DiagramIter {
    fn first_valid(prev: Option<usize>) -> usize {
        if prev == Some(0) {
            1
        } else {
            0
        }
    }

    /// Advance position `k` and reset the suffix; false when exhausted.
    fn advance(&mut self) -> bool {
        let p = self.pairs.len();
        let mut k = self.idx.len();
        while k > 0 {
            k -= 1;
            let prev = if k > 0 { Some(self.idx[k - 1]) } else { None };
            let mut next = self.idx[k] + 1;
            if Some(next) == prev {
                next += 1;
            }
            if next < p {
                self.idx[k] = next;
                for q in k + 1..self.idx.len() {
                    self.idx[q] = Self::first_valid(Some(self.idx[q - 1]));
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for DiagramIter {
    type Item = DiagramIndex;

    fn next(&mut self) -> Option<DiagramIndex> {
        if self.done {
            return None;
        }
        let out = DiagramIndex {
            n: self.n,
            pairs: self.idx.iter().map(|&k| self.pairs[k]).collect(),
        };
        if !self.advance() {
            self.done = true;
        }
        Some(out)
    }
}

pub fn enumerate(n: usize, m: usize) -> Result<DiagramIter, DiagramError> {
    if n < 2 || m < 1 {
        return Err(DiagramError::Domain { n, m });
    }
    let pairs = all_pairs(n);
    let mut idx = Vec::with_capacity(m);
    for q in 0..m {
        idx.push(DiagramIter::first_valid(if q > 0 { Some(idx[q - 1]) } else { None }));
    }
    // with a single pair only m = 1 is possible
    let done = idx.iter().any(|&k| k >= pairs.len());
    Ok(DiagramIter { n, pairs, idx, done })
}
