//! Degree sequences, their summary statistics, and the vertex-splitting
//! reduction.
//!
//! Vertex indices are zero-based throughout the crate.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::json;

/// A multiset of vertex degrees `d_0, …, d_{n-1}` with even sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DegreeSequence(Vec<u32>);

impl DegreeSequence {
    /// Validates non-emptiness and parity. An all-zero sequence is accepted
    /// here; operations that need at least one edge reject it.
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Empty);
        }
        let sum: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
        if sum % 2 == 1 {
            return Err(Error::OddSum { sum });
        }
        Ok(Self(degrees))
    }

    /// The `d`-regular sequence on `n` vertices.
    pub fn regular(n: usize, d: u32) -> Result<Self> {
        Self::new(vec![d; n])
    }

    /// One hub of degree `hub` padded with degree-1 vertices so that the
    /// sequence has exactly `edges` edges.
    pub fn hub_with_leaves(hub: u32, edges: u64) -> Result<Self> {
        let total = 2 * edges;
        if u64::from(hub) > total {
            return Err(Error::Domain(format!(
                "hub degree {hub} exceeds total degree {total}"
            )));
        }
        let mut degrees = Vec::with_capacity((total - u64::from(hub)) as usize + 1);
        degrees.push(hub);
        degrees.extend(std::iter::repeat_n(1, (total - u64::from(hub)) as usize));
        Self::new(degrees)
    }

    /// Parses the degree-file format: one non-negative integer per line,
    /// `#` comment lines and blank lines skipped, surrounding whitespace
    /// tolerated.
    pub fn parse_file_format(text: &str) -> Result<Self> {
        let mut degrees = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let d = line.parse::<u32>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("{line:?}: {e}"),
            })?;
            degrees.push(d);
        }
        Self::new(degrees)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse_file_format(&text)
    }

    /// Parses a literal list such as `"3,3,3,3"` (commas and/or whitespace).
    pub fn parse_literal(text: &str) -> Result<Self> {
        let mut degrees = Vec::new();
        for token in text.split(|c: char| c == ',' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            let d = token.parse::<u32>().map_err(|e| Error::Parse {
                line: 1,
                message: format!("{token:?}: {e}"),
            })?;
            degrees.push(d);
        }
        Self::new(degrees)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self, v: usize) -> Result<u32> {
        self.0.get(v).copied().ok_or(Error::VertexOutOfRange {
            index: v,
            n: self.0.len(),
        })
    }

    /// Total degree `2N`.
    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&d| u64::from(d)).sum()
    }

    /// Number of edges `N`.
    pub fn edges(&self) -> u64 {
        self.total_degree() / 2
    }

    pub fn sum_squares(&self) -> u64 {
        self.0.iter().map(|&d| u64::from(d) * u64::from(d)).sum()
    }

    /// Drops vertices of degree zero. Nothing else in the crate does this
    /// implicitly.
    pub fn normalized(&self) -> Result<Self> {
        Self::new(self.0.iter().copied().filter(|&d| d > 0).collect())
    }

    pub fn stats(&self) -> Result<DegreeStats> {
        stats(self)
    }

    pub(crate) fn nonzero_edges(&self) -> Result<u64> {
        match self.edges() {
            0 => Err(Error::Degenerate),
            n => Ok(n),
        }
    }
}

impl fmt::Display for DegreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Where a degree sequence comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeSource {
    Regular { n: usize, d: u32 },
    File(PathBuf),
    Literal(String),
}

pub fn generate(source: &DegreeSource) -> Result<DegreeSequence> {
    match source {
        DegreeSource::Regular { n, d } => DegreeSequence::regular(*n, *d),
        DegreeSource::File(path) => DegreeSequence::from_file(path),
        DegreeSource::Literal(text) => DegreeSequence::parse_literal(text),
    }
}

/// Summary statistics of a degree sequence.
///
/// Integral quantities are exact; `lambda_big` (Λ) and `density_ratio`
/// (Σd²/N) are exact rationals with float accessors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    pub n: u64,
    /// Number of edges `N = Σd/2`.
    pub edges: u64,
    pub sum_d2: u64,
    /// Σ d(d−1).
    pub sum_dd1: u64,
    /// Σ d²(d−1)².
    #[serde(serialize_with = "json::u128_as_string")]
    pub sum_d2d1sq: u128,
    pub max_d: u32,
    /// Λ = Σ C(d,2) / 2N = Σ d(d−1) / 4N.
    #[serde(serialize_with = "json::ratio_u128")]
    pub lambda_big: Ratio<u128>,
    /// Σd² / N.
    #[serde(serialize_with = "json::ratio_u128")]
    pub density_ratio: Ratio<u128>,
}

impl DegreeStats {
    pub fn lambda_f64(&self) -> f64 {
        json::ratio_u128_to_f64(&self.lambda_big)
    }

    pub fn density_ratio_f64(&self) -> f64 {
        json::ratio_u128_to_f64(&self.density_ratio)
    }
}

pub fn stats(ds: &DegreeSequence) -> Result<DegreeStats> {
    let edges = ds.nonzero_edges()?;
    let mut sum_d2 = 0u64;
    let mut sum_dd1 = 0u64;
    let mut sum_d2d1sq = 0u128;
    let mut max_d = 0u32;
    for &d in ds.degrees() {
        let d64 = u64::from(d);
        let dd1 = d64 * d64.saturating_sub(1);
        sum_d2 += d64 * d64;
        sum_dd1 += dd1;
        sum_d2d1sq += u128::from(dd1) * u128::from(dd1);
        max_d = max_d.max(d);
    }
    Ok(DegreeStats {
        n: ds.len() as u64,
        edges,
        sum_d2,
        sum_dd1,
        sum_d2d1sq,
        max_d,
        lambda_big: Ratio::new(u128::from(sum_dd1), 4 * u128::from(edges)),
        density_ratio: Ratio::new(u128::from(sum_d2), u128::from(edges)),
    })
}

/// λ_ij = sqrt(d_i(d_i−1) d_j(d_j−1)) / 2N; `i == j` gives d_i(d_i−1)/2N.
pub fn lambda_pair(ds: &DegreeSequence, i: usize, j: usize) -> Result<f64> {
    let two_n = 2 * ds.nonzero_edges()?;
    let a = falling2(ds.degree(i)?);
    let b = falling2(ds.degree(j)?);
    Ok(lambda_from_falling(a, b, two_n))
}

/// d(d−1).
pub(crate) fn falling2(d: u32) -> u64 {
    let d = u64::from(d);
    d * d.saturating_sub(1)
}

/// sqrt(a·b)/two_n, exact when `a·b` is a perfect square.
pub(crate) fn lambda_from_falling(a: u64, b: u64, two_n: u64) -> f64 {
    let radicand = u128::from(a) * u128::from(b);
    let root = radicand.isqrt();
    let sqrt = if root * root == radicand {
        root as f64
    } else {
        (a as f64).sqrt() * (b as f64).sqrt()
    };
    sqrt / two_n as f64
}

/// Replaces `d_j` by `d_j − 1` and appends a new vertex of degree 1.
pub fn split_vertex(ds: &DegreeSequence, j: usize) -> Result<DegreeSequence> {
    let d = ds.degree(j)?;
    if d <= 1 {
        return Err(Error::NotSplittable {
            index: j,
            degree: d,
        });
    }
    let mut degrees = ds.0.clone();
    degrees[j] -= 1;
    degrees.push(1);
    Ok(DegreeSequence(degrees))
}

/// Splits vertices until Σd² ≤ A·N for the first time.
///
/// Always splits a vertex of currently maximum degree, lowest index first.
/// Requires `a > 2`; below that an all-ones sequence (Σd² = 2N) could fail
/// the stopping rule.
pub fn split_until(ds: &DegreeSequence, a: f64) -> Result<DegreeSequence> {
    if !(a.is_finite() && a > 2.0) {
        return Err(Error::Domain(format!(
            "split threshold A = {a} must exceed 2"
        )));
    }
    let threshold = a * ds.edges() as f64;
    let mut sum_d2 = ds.sum_squares();
    if sum_d2 as f64 <= threshold {
        return Ok(ds.clone());
    }

    let mut degrees = ds.0.clone();
    let mut heap: BinaryHeap<(u32, Reverse<usize>)> = degrees
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d > 1)
        .map(|(i, &d)| (d, Reverse(i)))
        .collect();

    while sum_d2 as f64 > threshold {
        // Σd² > A·N > 2N guarantees some degree exceeds 1.
        let (d, Reverse(i)) = heap
            .pop()
            .expect("sum of squares above 2N implies a splittable vertex");
        degrees[i] = d - 1;
        degrees.push(1);
        sum_d2 = sum_d2 - 2 * u64::from(d) + 2;
        if d - 1 > 1 {
            heap.push((d - 1, Reverse(i)));
        }
    }
    Ok(DegreeSequence(degrees))
}
