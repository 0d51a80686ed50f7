//! Exact computation on small instances: exhaustive enumeration of
//! configurations, closed-form factorial moments, inclusion–exclusion
//! reconstruction of distributions, and simple-graph counting.
//!
//! Everything here is arbitrary-precision; no floating point is involved.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::confmodel::{choose2, half_edge_owners, Configuration};
use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::json;

/// Default largest edge count accepted for exhaustive enumeration
/// (15!! = 2,027,025 matchings).
pub const DEFAULT_CAP: u64 = 8;

/// Half-edges are tracked in a 64-bit mask.
const HARD_EDGE_LIMIT: u64 = 32;

fn check_cap(ds: &DegreeSequence, cap: u64) -> Result<u64> {
    let edges = ds.edges();
    if edges > cap.min(HARD_EDGE_LIMIT) {
        return Err(Error::CapExceeded {
            edges,
            cap: cap.min(HARD_EDGE_LIMIT),
        });
    }
    Ok(edges)
}

fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn integer(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// (2N−1)!!
pub fn double_factorial_odd(edges: u64) -> BigUint {
    (1..=edges).fold(BigUint::one(), |acc, i| acc * (2 * i - 1))
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Depth-first walk over all perfect matchings. The lowest unmatched
/// half-edge is matched with each larger unmatched one in increasing order.
trait Walker {
    fn join(&mut self, x: u32, y: u32);
    fn unjoin(&mut self, x: u32, y: u32);
    fn leaf(&mut self);
}

fn walk<W: Walker>(free: u64, walker: &mut W) {
    if free == 0 {
        walker.leaf();
        return;
    }
    let x = free.trailing_zeros();
    let rest = free & !(1u64 << x);
    let mut candidates = rest;
    while candidates != 0 {
        let y = candidates.trailing_zeros();
        candidates &= candidates - 1;
        walker.join(x, y);
        walk(rest & !(1u64 << y), walker);
        walker.unjoin(x, y);
    }
}

fn full_mask(half_edges: usize) -> u64 {
    if half_edges == 64 {
        u64::MAX
    } else {
        (1u64 << half_edges) - 1
    }
}

/// Runs one walker per top-level branch (half-edge 0 joined with each other
/// half-edge) and returns the walkers in branch order.
fn walk_branches<W, F>(half_edges: usize, make: F) -> Vec<W>
where
    W: Walker + Send,
    F: Fn() -> W + Sync,
{
    if half_edges == 0 {
        let mut w = make();
        w.leaf();
        return vec![w];
    }
    let run = |y: u32| {
        let mut w = make();
        w.join(0, y);
        walk(full_mask(half_edges) & !1 & !(1u64 << y), &mut w);
        w.unjoin(0, y);
        w
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (1..half_edges as u32).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (1..half_edges as u32).map(run).collect()
    }
}

struct Visiting<'a, F: FnMut(&Configuration)> {
    cfg: Configuration,
    visit: &'a mut F,
    count: u64,
}

impl<F: FnMut(&Configuration)> Walker for Visiting<'_, F> {
    fn join(&mut self, x: u32, y: u32) {
        let p = self.cfg.partner_mut();
        p[x as usize] = y;
        p[y as usize] = x;
    }
    fn unjoin(&mut self, _: u32, _: u32) {}
    fn leaf(&mut self) {
        self.count += 1;
        (self.visit)(&self.cfg);
    }
}

/// Visits every configuration of `ds` exactly once, in canonical order, and
/// returns the number visited, `(2N−1)!!`.
pub fn enumerate_configurations<F>(ds: &DegreeSequence, cap: u64, mut visit: F) -> Result<BigUint>
where
    F: FnMut(&Configuration),
{
    check_cap(ds, cap)?;
    let owners = half_edge_owners(ds);
    let h = owners.len();
    let mut walker = Visiting {
        cfg: Configuration::from_parts(vec![0; h], owners),
        visit: &mut visit,
        count: 0,
    };
    walk(full_mask(h), &mut walker);
    Ok(BigUint::from(walker.count))
}

/// Maintains loop counts, edge multiplicities and the Y / Ỹ statistics
/// incrementally along the walk.
#[derive(Clone)]
struct Tally<L> {
    n: usize,
    owner: Vec<u32>,
    loops: Vec<u32>,
    mult: Vec<u32>,
    y: u64,
    ytilde: u64,
    on_leaf: L,
}

impl<L> Tally<L> {
    fn new(ds: &DegreeSequence, on_leaf: L) -> Self {
        let n = ds.len();
        Self {
            n,
            owner: half_edge_owners(ds),
            loops: vec![0; n],
            mult: vec![0; n * n],
            y: 0,
            ytilde: 0,
            on_leaf,
        }
    }

    fn cell(&self, v: u32, w: u32) -> usize {
        let (a, b) = if v < w { (v, w) } else { (w, v) };
        a as usize * self.n + b as usize
    }
}

trait LeafFn {
    fn leaf(&mut self, loops: &[u32], mult: &[u32], n: usize, y: u64, ytilde: u64);
}

impl<L: LeafFn> Walker for Tally<L> {
    fn join(&mut self, x: u32, y: u32) {
        let (v, w) = (self.owner[x as usize], self.owner[y as usize]);
        if v == w {
            let c = &mut self.loops[v as usize];
            if *c == 0 {
                self.y += 1;
            }
            *c += 1;
            self.ytilde += 1;
        } else {
            let i = self.cell(v, w);
            let c = &mut self.mult[i];
            if *c == 1 {
                self.y += 1;
            }
            self.ytilde += u64::from(*c);
            *c += 1;
        }
    }

    fn unjoin(&mut self, x: u32, y: u32) {
        let (v, w) = (self.owner[x as usize], self.owner[y as usize]);
        if v == w {
            let c = &mut self.loops[v as usize];
            *c -= 1;
            if *c == 0 {
                self.y -= 1;
            }
            self.ytilde -= 1;
        } else {
            let i = self.cell(v, w);
            let c = &mut self.mult[i];
            *c -= 1;
            if *c == 1 {
                self.y -= 1;
            }
            self.ytilde -= u64::from(*c);
        }
    }

    fn leaf(&mut self) {
        self.on_leaf
            .leaf(&self.loops, &self.mult, self.n, self.y, self.ytilde);
    }
}

#[derive(Default, Clone)]
struct Histograms {
    total: u64,
    y: BTreeMap<u64, u64>,
    ytilde: BTreeMap<u64, u64>,
}

impl LeafFn for Histograms {
    fn leaf(&mut self, _: &[u32], _: &[u32], _: usize, y: u64, ytilde: u64) {
        self.total += 1;
        *self.y.entry(y).or_default() += 1;
        *self.ytilde.entry(ytilde).or_default() += 1;
    }
}

/// Exact law of the simplicity statistics under the configuration model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    #[serde(serialize_with = "json::biguint_as_string")]
    pub total_configurations: BigUint,
    #[serde(serialize_with = "json::biguint_as_string")]
    pub simple_configurations: BigUint,
    #[serde(serialize_with = "json::big_ratio")]
    pub p_simple: BigRational,
    #[serde(serialize_with = "json::big_ratio_map")]
    pub y_distribution: BTreeMap<u64, BigRational>,
    #[serde(serialize_with = "json::big_ratio_map")]
    pub ytilde_distribution: BTreeMap<u64, BigRational>,
    #[serde(serialize_with = "json::big_ratio")]
    pub e_ytilde: BigRational,
}

impl ExactReport {
    pub fn p_simple_f64(&self) -> f64 {
        json::big_ratio_to_f64(&self.p_simple)
    }

    /// Checks the report's internal consistency.
    pub fn check(&self) -> Result<()> {
        let total = BigInt::from(self.total_configurations.clone());
        let expect = BigRational::new(BigInt::from(self.simple_configurations.clone()), total);
        if self.p_simple != expect {
            return Err(Error::Invariant("p_simple ≠ simple / total".into()));
        }
        for (name, dist) in [
            ("Y", &self.y_distribution),
            ("Ỹ", &self.ytilde_distribution),
        ] {
            let sum: BigRational = dist.values().sum();
            if !sum.is_one() {
                return Err(Error::Invariant(format!(
                    "{name} distribution sums to {sum}"
                )));
            }
            let zero = dist.get(&0).cloned().unwrap_or_else(BigRational::zero);
            if zero != self.p_simple {
                return Err(Error::Invariant(format!("P({name} = 0) ≠ p_simple")));
            }
        }
        Ok(())
    }
}

/// Enumerates all configurations and returns the exact probability of
/// simplicity together with the laws of Y and Ỹ.
pub fn exact_p_simple(ds: &DegreeSequence, cap: u64) -> Result<ExactReport> {
    check_cap(ds, cap)?;
    let h = ds.total_degree() as usize;
    let parts = walk_branches(h, || Tally::new(ds, Histograms::default()));
    let mut merged = Histograms::default();
    for part in parts {
        merged.total += part.on_leaf.total;
        for (k, c) in part.on_leaf.y {
            *merged.y.entry(k).or_default() += c;
        }
        for (k, c) in part.on_leaf.ytilde {
            *merged.ytilde.entry(k).or_default() += c;
        }
    }

    let total = BigUint::from(merged.total);
    if total != double_factorial_odd(ds.edges()) {
        return Err(Error::Invariant(format!(
            "visited {total} configurations, expected (2N−1)!!"
        )));
    }
    let to_dist = |counts: &BTreeMap<u64, u64>| -> BTreeMap<u64, BigRational> {
        counts
            .iter()
            .map(|(&k, &c)| (k, rational(c, merged.total)))
            .collect()
    };
    let simple = merged.y.get(&0).copied().unwrap_or(0);
    let e_ytilde = merged
        .ytilde
        .iter()
        .map(|(&k, &c)| rational(BigInt::from(k) * c, merged.total))
        .sum();
    let report = ExactReport {
        total_configurations: total,
        simple_configurations: BigUint::from(simple),
        p_simple: rational(simple, merged.total),
        y_distribution: to_dist(&merged.y),
        ytilde_distribution: to_dist(&merged.ytilde),
        e_ytilde,
    };
    report.check()?;
    Ok(report)
}

/// ∏_{i<k} (2N − 2i − 1), or a domain error when 2N < 2k.
fn odd_falling(edges: u64, k: u32) -> Result<BigInt> {
    if u64::from(k) > edges {
        return Err(Error::Domain(format!(
            "order {k} factorial moment needs 2N ≥ {}, have 2N = {}",
            2 * u64::from(k),
            2 * edges
        )));
    }
    Ok((0..u64::from(k)).fold(BigInt::one(), |acc, i| acc * (2 * edges - 2 * i - 1)))
}

fn falling(x: u64, k: u64) -> BigInt {
    if k > x {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (x - i))
}

/// E X_vw^(k) = d_v^(k) d_w^(k) / ((2N−1)(2N−3)⋯(2N−2k+1)).
pub fn factorial_moment_edge(
    ds: &DegreeSequence,
    v: usize,
    w: usize,
    k: u32,
) -> Result<BigRational> {
    if v == w {
        return Err(Error::Domain("edge moment needs distinct endpoints".into()));
    }
    if k == 0 {
        return Err(Error::Domain("factorial moment order must be ≥ 1".into()));
    }
    let (dv, dw) = (u64::from(ds.degree(v)?), u64::from(ds.degree(w)?));
    let den = odd_falling(ds.edges(), k)?;
    Ok(BigRational::new(
        falling(dv, k.into()) * falling(dw, k.into()),
        den,
    ))
}

/// E X_u^(k) = d_u^(2k) / (2^k (2N−1)(2N−3)⋯(2N−2k+1)).
///
/// An ordered k-tuple of loops at `u` is an ordered choice of k disjoint
/// unordered pairs of half-edges at `u` (d_u^(2k) / 2^k ways), each set of k
/// pairs being present with probability 1/((2N−1)⋯(2N−2k+1)).
pub fn factorial_moment_loop(ds: &DegreeSequence, u: usize, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::Domain("factorial moment order must be ≥ 1".into()));
    }
    let du = u64::from(ds.degree(u)?);
    let den = odd_falling(ds.edges(), k)? << k as usize;
    Ok(BigRational::new(falling(du, 2 * u64::from(k)), den))
}

/// Inclusion–exclusion: P(W = j) = Σ_{k≥j} (−1)^{k−j} C(k,j) E(W^(k)) / k!,
/// with `moments[k] = E W^(k)` and all higher moments zero.
pub fn distribution_from_factorial_moments(
    moments: &[BigRational],
    j: usize,
) -> Result<BigRational> {
    if let Some(k) = moments.iter().position(|m| m.is_negative()) {
        return Err(Error::Domain(format!(
            "factorial moment of order {k} is negative"
        )));
    }
    let mut total = BigRational::zero();
    let mut binom = BigInt::one(); // C(k, j)
    let mut kfact = factorial(j as u64); // k!
    for (k, m) in moments.iter().enumerate().skip(j) {
        if k > j {
            binom = binom * k / (k - j);
            kfact *= k;
        }
        let term = m * BigRational::new(binom.clone(), BigInt::from(kfact.clone()));
        if (k - j).is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// P(X_u = 0) = ∏_{i=1}^{d_u} (1 − (d_u − i)/(2N − 2i + 1)).
///
/// The partners of the half-edges at `u` are chosen one by one. If d_u > N a
/// loop is forced, and the product reaches a zero factor before any
/// denominator stops being positive.
pub fn p_no_loop_exact(ds: &DegreeSequence, u: usize) -> Result<BigRational> {
    let du = i64::from(ds.degree(u)?);
    let two_n = 2 * ds.edges() as i64;
    let mut p = BigRational::one();
    for i in 1..=du {
        let den = two_n - 2 * i + 1;
        if den <= 0 {
            return Err(Error::Domain(format!(
                "loop product undefined: non-positive denominator at step {i}"
            )));
        }
        let num = den - (du - i);
        p *= rational(num, den);
        if p.is_zero() {
            break;
        }
    }
    Ok(p)
}

struct JointIndicator {
    loops: Vec<usize>,
    doubles: Vec<(usize, usize)>,
    hits: u64,
    total: u64,
}

impl LeafFn for JointIndicator {
    fn leaf(&mut self, loops: &[u32], mult: &[u32], n: usize, _: u64, _: u64) {
        self.total += 1;
        let looped = self.loops.iter().all(|&u| loops[u] >= 1);
        let doubled = self
            .doubles
            .iter()
            .all(|&(v, w)| mult[v.min(w) * n + v.max(w)] >= 2);
        if looped && doubled {
            self.hits += 1;
        }
    }
}

/// E[∏ I_u ∏ J_e] by enumeration, with I_u = 1{X_u ≥ 1} and
/// J_vw = 1{X_vw ≥ 2}.
pub fn joint_indicator_expectation(
    ds: &DegreeSequence,
    loops: &[usize],
    doubles: &[(usize, usize)],
    cap: u64,
) -> Result<BigRational> {
    check_cap(ds, cap)?;
    let n = ds.len();
    for &u in loops {
        ds.degree(u)?;
    }
    let mut seen_loops = loops.to_vec();
    seen_loops.sort_unstable();
    seen_loops.dedup();
    if seen_loops.len() != loops.len() {
        return Err(Error::Domain("loop vertices must be distinct".into()));
    }
    let mut seen_edges = Vec::with_capacity(doubles.len());
    for &(v, w) in doubles {
        if v.max(w) >= n {
            return Err(Error::VertexOutOfRange { index: v.max(w), n });
        }
        if v == w {
            return Err(Error::Domain(format!("edge ({v}, {w}) is a loop")));
        }
        seen_edges.push((v.min(w), v.max(w)));
    }
    seen_edges.sort_unstable();
    seen_edges.dedup();
    if seen_edges.len() != doubles.len() {
        return Err(Error::Domain("edges must be distinct".into()));
    }

    let h = ds.total_degree() as usize;
    let parts = walk_branches(h, || {
        Tally::new(
            ds,
            JointIndicator {
                loops: loops.to_vec(),
                doubles: doubles.to_vec(),
                hits: 0,
                total: 0,
            },
        )
    });
    let (hits, total) = parts.iter().fold((0u64, 0u64), |(h, t), p| {
        (h + p.on_leaf.hits, t + p.on_leaf.total)
    });
    Ok(rational(hits, total))
}

/// E Ỹ = Σ_u d_u(d_u−1) / (2(2N−1)) + ¼ Σ_{v≠w} d_v(d_v−1) d_w(d_w−1) / ((2N−1)(2N−3)).
pub fn exact_e_ytilde(ds: &DegreeSequence) -> Result<BigRational> {
    let edges = ds.nonzero_edges()?;
    let two_n = BigInt::from(2 * edges);
    let a: Vec<BigInt> = ds
        .degrees()
        .iter()
        .map(|&d| BigInt::from(crate::degseq::falling2(d)))
        .collect();
    let sum_a: BigInt = a.iter().sum();
    let sum_a2: BigInt = a.iter().map(|x| x * x).sum();
    let loops = BigRational::new(sum_a.clone(), BigInt::from(2) * (&two_n - 1));
    // Σ_{v≠w} a_v a_w; nonzero only if two vertices have degree ≥ 2, so N ≥ 2.
    let cross = &sum_a * &sum_a - sum_a2;
    let pairs = if cross.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(cross, BigInt::from(4) * (&two_n - 1) * (&two_n - 3))
    };
    Ok(loops + pairs)
}

/// Distinct degrees with their multiplicities, in increasing degree order.
pub(crate) fn degree_classes(ds: &DegreeSequence) -> Vec<(u32, u64)> {
    let mut classes: BTreeMap<u32, u64> = BTreeMap::new();
    for &d in ds.degrees() {
        *classes.entry(d).or_default() += 1;
    }
    classes.into_iter().collect()
}

/// Upper bound P(Ỹ ≠ Y) ≤ Σ_u E X_u^(2) + Σ_{v<w} E X_vw^(3).
///
/// Moments whose order exceeds N vanish and contribute zero.
pub fn bound_y_ytilde_gap(ds: &DegreeSequence) -> Result<BigRational> {
    let edges = ds.edges();
    let classes = degree_classes(ds);
    let loop_moment = |d: u32| -> BigRational {
        if edges < 2 {
            return BigRational::zero();
        }
        let den = odd_falling(edges, 2).expect("N ≥ 2") << 2usize;
        BigRational::new(falling(d.into(), 4), den)
    };
    let edge_moment = |a: u32, b: u32| -> BigRational {
        if edges < 3 {
            return BigRational::zero();
        }
        let den = odd_falling(edges, 3).expect("N ≥ 3");
        BigRational::new(falling(a.into(), 3) * falling(b.into(), 3), den)
    };
    let mut bound = BigRational::zero();
    for (i, &(a, ma)) in classes.iter().enumerate() {
        bound += loop_moment(a) * integer(ma);
        bound += edge_moment(a, a) * integer(choose2(ma));
        for &(b, mb) in &classes[i + 1..] {
            bound += edge_moment(a, b) * integer(ma * mb);
        }
    }
    Ok(bound)
}

/// Number of labelled simple graphs with degree sequence `ds`:
/// (2N)! / (2^N N! ∏ d_i!) · P(simple).
pub fn count_simple_graphs(ds: &DegreeSequence, cap: u64) -> Result<BigUint> {
    let report = exact_p_simple(ds, cap)?;
    count_from_report(ds, &report)
}

pub fn count_from_report(ds: &DegreeSequence, report: &ExactReport) -> Result<BigUint> {
    let edges = ds.edges();
    let denominator = ds
        .degrees()
        .iter()
        .fold(factorial(edges) << edges as usize, |acc, &d| {
            acc * factorial(d.into())
        });
    let configurations_per_graph = BigRational::new(
        BigInt::from(factorial(2 * edges)),
        BigInt::from(denominator),
    );
    let count = configurations_per_graph * &report.p_simple;
    if !count.is_integer() {
        return Err(Error::Invariant(format!(
            "simple-graph count {count} is not an integer"
        )));
    }
    count
        .to_integer()
        .to_biguint()
        .ok_or_else(|| Error::Invariant("negative simple-graph count".into()))
}
