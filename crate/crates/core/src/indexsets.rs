//! Multi-indices, lower sets and their borders.
//!
//! Every set is kept in graded lexicographic order: ascending total degree,
//! ties broken so that the lexicographically larger exponent vector (first
//! coordinate most significant) comes first. For `n = 2` this lists
//! `1, x, y, x², xy, y², ...`, which fixes the row and column layout of every
//! matrix built downstream.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIZE_CAP: usize = 10_000;

/// An exponent vector `α ∈ Z_+^n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut e = vec![0; n];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `α + e_axis`.
    pub fn step_up(&self, axis: usize) -> Self {
        let mut e = self.0.clone();
        e[axis] += 1;
        MultiIndex(e)
    }

    /// `α − e_axis`, if that is still a multi-index.
    pub fn step_down(&self, axis: usize) -> Option<Self> {
        if self.0[axis] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[axis] -= 1;
        Some(MultiIndex(e))
    }

    /// Reorders the coordinates: entry `k` of the result is entry `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        MultiIndex(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// A finite downward-closed set of multi-indices in canonical order.
#[derive(Clone, Debug)]
pub struct LowerSet {
    dim: usize,
    members: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
    predecessors: Vec<Option<(usize, usize)>>,
    total_degree: Option<u32>,
}

impl PartialEq for LowerSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.members == other.members
            && self.total_degree == other.total_degree
    }
}

impl LowerSet {
    fn from_sorted(dim: usize, members: Vec<MultiIndex>, total_degree: Option<u32>) -> Self {
        let position = members
            .iter()
            .enumerate()
            .map(|(k, a)| (a.clone(), k))
            .collect::<HashMap<_, _>>();
        // the predecessor of a member may be missing while validation is still pending
        let predecessors = members
            .iter()
            .map(|a| {
                (0..dim).find_map(|i| {
                    a.step_down(i)
                        .and_then(|p| position.get(&p).map(|&k| (k, i)))
                })
            })
            .collect();
        LowerSet {
            dim,
            members,
            position,
            predecessors,
            total_degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.position.contains_key(alpha)
    }

    /// `Some(m)` when this set was built as `{α : |α| ≤ m}`.
    pub fn total_degree(&self) -> Option<u32> {
        self.total_degree
    }

    pub fn max_degree(&self) -> u64 {
        self.members.last().map_or(0, MultiIndex::degree)
    }

    /// For every nonzero member, a pair `(position of α − e_i, i)`; `None` for the origin.
    /// Lets monomial vectors be filled by one multiplication per entry.
    pub fn predecessors(&self) -> &[Option<(usize, usize)>] {
        &self.predecessors
    }

    pub fn to_spec(&self) -> IndexSetSpec {
        match self.total_degree {
            Some(m) => IndexSetSpec::TotalDegree { n: self.dim, m },
            None => IndexSetSpec::Explicit {
                n: self.dim,
                indices: self.members.clone(),
            },
        }
    }

    /// Applies a coordinate permutation to every member (see [`MultiIndex::permuted`]).
    pub fn permuted(&self, perm: &[usize]) -> LowerSet {
        let mut members: Vec<_> = self.members.iter().map(|a| a.permuted(perm)).collect();
        members.sort();
        LowerSet::from_sorted(self.dim, members, self.total_degree)
    }
}

/// Builds `{α ∈ Z_+^n : |α| ≤ m}` in canonical order.
pub fn total_degree_set(n: usize, m: u32) -> Result<LowerSet> {
    total_degree_set_capped(n, m, DEFAULT_SIZE_CAP)
}

pub fn total_degree_set_capped(n: usize, m: u32, cap: usize) -> Result<LowerSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("degree m must be at least 1".into()));
    }
    let size = binomial(n as u64 + u64::from(m), n as u64);
    if size > cap as u128 {
        return Err(Error::SizeLimit {
            size: usize::try_from(size).unwrap_or(usize::MAX),
            cap,
        });
    }
    let mut members = Vec::with_capacity(size as usize);
    for d in 0..=m {
        compositions(n, d, &mut Vec::with_capacity(n), &mut members);
    }
    // compositions() emits each degree in descending lex order already
    debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
    Ok(LowerSet::from_sorted(n, members, Some(m)))
}

fn compositions(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        prefix.push(d);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=d).rev() {
        prefix.push(first);
        compositions(n, d - first, prefix, out);
        prefix.pop();
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    // saturates instead of overflowing; callers only compare against a cap
    (0..k).fold(1u128, |acc, j| {
        acc.checked_mul(u128::from(n - j))
            .map_or(u128::MAX, |p| p / u128::from(j + 1))
    })
}

/// Checks that `candidates` form a lower set in `Z_+^n` and returns it in canonical order.
pub fn validate_lower_set(candidates: Vec<MultiIndex>, n: usize) -> Result<LowerSet> {
    validate_lower_set_capped(candidates, n, DEFAULT_SIZE_CAP)
}

pub fn validate_lower_set_capped(
    candidates: Vec<MultiIndex>,
    n: usize,
    cap: usize,
) -> Result<LowerSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
    }
    if candidates.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    if candidates.len() > cap {
        return Err(Error::SizeLimit {
            size: candidates.len(),
            cap,
        });
    }
    if let Some(bad) = candidates.iter().find(|a| a.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    let mut members = candidates;
    members.sort();
    if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateIndex(w[0].clone()));
    }
    let set = LowerSet::from_sorted(n, members, None);
    for a in &set.members {
        // report the canonically first missing predecessor
        let missing = (0..n)
            .filter_map(|i| a.step_down(i))
            .filter(|p| !set.contains(p))
            .min();
        if let Some(missing) = missing {
            return Err(Error::ClosureViolation {
                index: a.clone(),
                missing,
            });
        }
    }
    Ok(set)
}

/// The border `{β + e_i ∉ I : β ∈ I}` with one recorded generator per member.
#[derive(Clone, Debug, PartialEq)]
pub struct BorderSet {
    members: Vec<MultiIndex>,
    generators: Vec<(usize, usize)>,
    position: HashMap<MultiIndex, usize>,
}

impl BorderSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    /// `(position of β in I, axis i)` with `members()[k] = β + e_i`.
    pub fn generators(&self) -> &[(usize, usize)] {
        &self.generators
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.position.contains_key(alpha)
    }
}

pub fn border(basis: &LowerSet) -> BorderSet {
    let mut found: HashMap<MultiIndex, (usize, usize)> = HashMap::new();
    for (k, b) in basis.members.iter().enumerate() {
        for i in 0..basis.dim {
            let a = b.step_up(i);
            if !basis.contains(&a) {
                found.entry(a).or_insert((k, i));
            }
        }
    }
    let mut members: Vec<_> = found.keys().cloned().collect();
    members.sort();
    let generators = members.iter().map(|a| found[a]).collect();
    let position = members
        .iter()
        .enumerate()
        .map(|(k, a)| (a.clone(), k))
        .collect();
    BorderSet {
        members,
        generators,
        position,
    }
}

/// Grows a random lower set from `{0}` by `steps` times adding a uniformly chosen
/// border element all of whose predecessors are already present.
pub fn random_lower_set<R: Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> LowerSet {
    let mut members = vec![MultiIndex::zero(n)];
    for _ in 0..steps {
        let current = LowerSet::from_sorted(n, members.clone(), None);
        let j = border(&current);
        let addable: Vec<&MultiIndex> = j
            .members
            .iter()
            .filter(|a| (0..n).all(|i| a.step_down(i).is_none_or(|p| current.contains(&p))))
            .collect();
        let pick = rng.random_range(0..addable.len());
        members.push(addable[pick].clone());
        members.sort();
    }
    LowerSet::from_sorted(n, members, None)
}

/// JSON description of an index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexSetSpec {
    TotalDegree { n: usize, m: u32 },
    Explicit { n: usize, indices: Vec<MultiIndex> },
}

impl IndexSetSpec {
    pub fn build(&self, cap: usize) -> Result<LowerSet> {
        match self {
            IndexSetSpec::TotalDegree { n, m } => total_degree_set_capped(*n, *m, cap),
            IndexSetSpec::Explicit { n, indices } => {
                validate_lower_set_capped(indices.clone(), *n, cap)
            }
        }
    }
}
