//! Bounded decision spaces and their uniform samplers.

use std::fmt::Debug;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size of a decision space: a finite volume or a finite count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Volume(f64),
    Cardinality(u128),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Box { dims: usize },
    Permutation { n: usize },
    WaypointAnnulus,
}

/// A decision space with finite measure and a uniform sampler.
pub trait Space: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync + Serialize;

    /// One uniform draw. Must land inside the space.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    fn contains(&self, point: &Self::Point) -> bool;

    fn measure(&self) -> Measure;

    fn kind(&self) -> SpaceKind;

    /// Exact enumeration, when the space is finite.
    fn as_finite(&self) -> Option<&dyn Enumerate<Self::Point>> {
        None
    }
}

/// Index-addressable enumeration of a finite space.
pub trait Enumerate<P>: Sync {
    fn cardinality(&self) -> u64;

    /// Calls `visit(index, point)` for every index in `start..end`, in order.
    fn visit_range(&self, start: u64, end: u64, visit: &mut dyn FnMut(u64, &P));
}

/// A real-valued space that local descent can move around in.
pub trait ContinuousSpace: Space<Point = Vec<f64>> {
    /// Per-coordinate length scale (box width for boxes).
    fn widths(&self) -> Vec<f64>;

    /// Pulls `x` back toward the space. Returns whether the result is inside.
    fn project(&self, x: &mut [f64]) -> bool;
}

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::domain(format!(
                "box needs matching nonempty bounds, got {} lower and {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::domain(format!(
                    "box dimension {i} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dims`.
    pub fn cube(dims: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dims], vec![hi; dims])
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

impl Space for BoxSpace {
    type Point = Vec<f64>;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }

    fn contains(&self, x: &Vec<f64>) -> bool {
        x.len() == self.dims()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    fn measure(&self) -> Measure {
        Measure::Volume(self.widths().iter().product())
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Box { dims: self.dims() }
    }
}

impl ContinuousSpace for BoxSpace {
    fn widths(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .collect()
    }

    fn project(&self, x: &mut [f64]) -> bool {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
        true
    }
}

/// All orderings of `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSpace {
    n: usize,
}

/// Largest `n` whose factorial fits in a `u64`.
const MAX_ENUMERABLE_N: usize = 20;

impl PermutationSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("permutation space needs n >= 2, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n!`, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        (1..=self.n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).unwrap_or(u128::MAX)
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The `index`-th permutation of `0..n` in lexicographic order.
pub fn nth_permutation(n: usize, mut index: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let f = factorial(k);
        let pick = (index / f) as usize;
        index %= f;
        out.push(pool.remove(pick));
    }
    out
}

/// Advances `perm` to its lexicographic successor; false when it was the last.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

impl Space for PermutationSpace {
    type Point = Vec<usize>;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(rng);
        order
    }

    fn contains(&self, p: &Vec<usize>) -> bool {
        if p.len() != self.n {
            return false;
        }
        let mut seen = vec![false; self.n];
        p.iter().all(|&i| i < self.n && !std::mem::replace(&mut seen[i], true))
    }

    fn measure(&self) -> Measure {
        Measure::Cardinality(self.cardinality())
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Permutation { n: self.n }
    }

    fn as_finite(&self) -> Option<&dyn Enumerate<Vec<usize>>> {
        (self.n <= MAX_ENUMERABLE_N).then_some(self as &dyn Enumerate<Vec<usize>>)
    }
}

impl Enumerate<Vec<usize>> for PermutationSpace {
    fn cardinality(&self) -> u64 {
        factorial(self.n)
    }

    fn visit_range(&self, start: u64, end: u64, visit: &mut dyn FnMut(u64, &Vec<usize>)) {
        let end = end.min(factorial(self.n));
        if start >= end {
            return;
        }
        let mut perm = nth_permutation(self.n, start);
        for index in start..end {
            visit(index, &perm);
            next_permutation(&mut perm);
        }
    }
}
