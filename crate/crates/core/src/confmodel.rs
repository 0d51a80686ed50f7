//! Configurations (perfect matchings of half-edges), their projection to
//! multigraphs, and the simplicity statistics Y and Ỹ.
//!
//! Half-edges are labelled `0..2N` in contiguous blocks by vertex, in input
//! order: vertex 0 owns `0..d_0`, vertex 1 owns `d_0..d_0+d_1`, and so on.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};

/// Owning vertex of every half-edge, in canonical label order.
pub fn half_edge_owners(ds: &DegreeSequence) -> Vec<u32> {
    let mut owners = Vec::with_capacity(ds.total_degree() as usize);
    for (v, &d) in ds.degrees().iter().enumerate() {
        owners.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    owners
}

/// A perfect matching on the `2N` half-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    /// `partner[x]` is the half-edge joined to `x`; a fixed-point-free
    /// involution.
    partner: Vec<u32>,
    vertex_of: Vec<u32>,
}

impl Configuration {
    /// Builds a configuration from explicit pairs, checking that they form
    /// a perfect matching of the half-edges of `ds`.
    pub fn from_pairs(ds: &DegreeSequence, pairs: &[(u32, u32)]) -> Result<Self> {
        let vertex_of = half_edge_owners(ds);
        let h = vertex_of.len();
        if pairs.len() * 2 != h {
            return Err(Error::Inconsistent(format!(
                "{} pairs cannot match {h} half-edges",
                pairs.len()
            )));
        }
        let mut partner = vec![u32::MAX; h];
        for &(a, b) in pairs {
            let (ai, bi) = (a as usize, b as usize);
            if ai >= h || bi >= h || a == b || partner[ai] != u32::MAX || partner[bi] != u32::MAX {
                return Err(Error::Inconsistent(format!("invalid pair ({a}, {b})")));
            }
            partner[ai] = b;
            partner[bi] = a;
        }
        Ok(Self { partner, vertex_of })
    }

    pub(crate) fn from_parts(partner: Vec<u32>, vertex_of: Vec<u32>) -> Self {
        Self { partner, vertex_of }
    }

    pub(crate) fn partner_mut(&mut self) -> &mut [u32] {
        &mut self.partner
    }

    pub fn half_edges(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self, x: u32) -> u32 {
        self.partner[x as usize]
    }

    pub fn vertex_of(&self, x: u32) -> u32 {
        self.vertex_of[x as usize]
    }

    /// Pairs `(x, y)` with `x < y`, ordered by `x`.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(x, &y)| (x as u32) < y)
            .map(|(x, &y)| (x as u32, y))
    }

    /// Checks the involution invariant.
    pub fn is_valid(&self) -> bool {
        self.partner.iter().enumerate().all(|(x, &y)| {
            (y as usize) < self.partner.len()
                && y as usize != x
                && self.partner[y as usize] as usize == x
        })
    }
}

/// Uniform random configuration: Fisher–Yates shuffle of the `2N` labels,
/// then consecutive entries are paired.
pub fn sample_configuration<R: Rng + ?Sized>(
    ds: &DegreeSequence,
    rng: &mut R,
) -> Result<Configuration> {
    ds.nonzero_edges()?;
    let vertex_of = half_edge_owners(ds);
    let h = vertex_of.len();
    let mut labels: Vec<u32> = (0..h as u32).collect();
    shuffle_prefix(&mut labels, h, rng);
    let mut partner = vec![0u32; h];
    for pair in labels.chunks_exact(2) {
        partner[pair[0] as usize] = pair[1];
        partner[pair[1] as usize] = pair[0];
    }
    Ok(Configuration { partner, vertex_of })
}

/// Forward Fisher–Yates over positions `0..upto`. Positions `2t` and `2t+1`
/// are final once `upto ≥ 2t + 2`, which lets callers pair incrementally.
#[inline]
fn shuffle_step<R: Rng + ?Sized>(labels: &mut [u32], i: usize, rng: &mut R) {
    let j = i + below(rng, (labels.len() - i) as u32) as usize;
    labels.swap(i, j);
}

/// Uniform draw from `0..n` by multiply-shift with rejection of the biased
/// low zone. Exact, and usually a single word of keystream.
#[inline]
fn below<R: Rng + ?Sized>(rng: &mut R, n: u32) -> u32 {
    let mut m = u64::from(rng.next_u32()) * u64::from(n);
    if (m as u32) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u32) < threshold {
            m = u64::from(rng.next_u32()) * u64::from(n);
        }
    }
    (m >> 32) as u32
}

fn shuffle_prefix<R: Rng + ?Sized>(labels: &mut [u32], upto: usize, rng: &mut R) {
    let last = upto.min(labels.len().saturating_sub(1));
    for i in 0..last {
        shuffle_step(labels, i, rng);
    }
}

/// Loop counts and edge multiplicities of a projected configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Multigraph {
    pub n: usize,
    /// `X_u`: number of loops at each vertex.
    pub loop_counts: Vec<u32>,
    /// `X_vw ≥ 1` keyed by `(v, w)` with `v < w`. Never contains zeros or
    /// loops.
    #[serde(serialize_with = "serialize_multiplicities")]
    pub multiplicities: BTreeMap<(u32, u32), u32>,
}

fn serialize_multiplicities<S: serde::Serializer>(
    m: &BTreeMap<(u32, u32), u32>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|(&(v, w), &c)| [v, w, c]))
}

impl Multigraph {
    /// Degree of every vertex recomputed from loops and multiplicities.
    pub fn degrees(&self) -> Vec<u64> {
        let mut deg: Vec<u64> = self.loop_counts.iter().map(|&x| 2 * u64::from(x)).collect();
        for (&(v, w), &c) in &self.multiplicities {
            deg[v as usize] += u64::from(c);
            deg[w as usize] += u64::from(c);
        }
        deg
    }

    pub fn multiplicity(&self, v: u32, w: u32) -> u32 {
        let key = if v < w { (v, w) } else { (w, v) };
        self.multiplicities.get(&key).copied().unwrap_or(0)
    }

    /// Text dump: `L v count` per looped vertex, then `E v w count` per edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, &c) in self.loop_counts.iter().enumerate() {
            if c > 0 {
                let _ = writeln!(out, "L {v} {c}");
            }
        }
        for (&(v, w), &c) in &self.multiplicities {
            let _ = writeln!(out, "E {v} {w} {c}");
        }
        out
    }

    pub fn parse_dump(n: usize, text: &str) -> Result<Self> {
        let mut mg = Multigraph {
            n,
            loop_counts: vec![0; n],
            multiplicities: BTreeMap::new(),
        };
        for (idx, line) in text.lines().enumerate() {
            let bad = |message: &str| Error::Parse {
                line: idx + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let nums: Vec<u32> = fields
                .iter()
                .skip(1)
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("expected unsigned integers"))?;
            match (fields.first().copied(), nums.as_slice()) {
                (None, _) => continue,
                (Some("L"), &[v, c]) if (v as usize) < n && c > 0 => {
                    mg.loop_counts[v as usize] = c;
                }
                (Some("E"), &[v, w, c]) if v < w && (w as usize) < n && c > 0 => {
                    mg.multiplicities.insert((v, w), c);
                }
                _ => return Err(bad("expected `L v count` or `E v w count`")),
            }
        }
        Ok(mg)
    }
}

/// Projects a configuration onto its multigraph.
pub fn project(ds: &DegreeSequence, cfg: &Configuration) -> Result<Multigraph> {
    let h = ds.total_degree() as usize;
    if cfg.half_edges() != h {
        return Err(Error::Inconsistent(format!(
            "configuration has {} half-edges, degree sequence has {h}",
            cfg.half_edges()
        )));
    }
    if cfg.vertex_of != half_edge_owners(ds) {
        return Err(Error::Inconsistent(
            "configuration was built for a different degree sequence".into(),
        ));
    }
    let mut loop_counts = vec![0u32; ds.len()];
    let mut multiplicities = BTreeMap::new();
    for (x, y) in cfg.pairs() {
        let (v, w) = (cfg.vertex_of(x), cfg.vertex_of(y));
        if v == w {
            loop_counts[v as usize] += 1;
        } else {
            *multiplicities.entry((v.min(w), v.max(w))).or_insert(0) += 1;
        }
    }
    Ok(Multigraph {
        n: ds.len(),
        loop_counts,
        multiplicities,
    })
}

pub fn is_simple(mg: &Multigraph) -> bool {
    mg.loop_counts.iter().all(|&x| x == 0) && mg.multiplicities.values().all(|&x| x <= 1)
}

/// Y: vertices carrying a loop plus vertex pairs carrying ≥ 2 parallel edges.
pub fn y_statistic(mg: &Multigraph) -> u64 {
    let looped = mg.loop_counts.iter().filter(|&&x| x >= 1).count();
    let doubled = mg.multiplicities.values().filter(|&&x| x >= 2).count();
    (looped + doubled) as u64
}

/// Ỹ = Σ X_u + Σ C(X_e, 2).
pub fn ytilde_statistic(mg: &Multigraph) -> u64 {
    let (loops, pairs) = decomposition(mg);
    loops + pairs
}

/// (total loops, total pairs of parallel non-loop edges).
pub fn decomposition(mg: &Multigraph) -> (u64, u64) {
    let loops = mg.loop_counts.iter().map(|&x| u64::from(x)).sum();
    let pairs = mg
        .multiplicities
        .values()
        .map(|&x| choose2(u64::from(x)))
        .sum();
    (loops, pairs)
}

#[inline]
pub(crate) fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// All simplicity statistics of one sample, computed without building a
/// [`Multigraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleStatistics {
    pub y: u64,
    pub ytilde: u64,
    pub loops: u64,
    pub parallel_pairs: u64,
}

impl SampleStatistics {
    pub fn of(mg: &Multigraph) -> Self {
        let (loops, parallel_pairs) = decomposition(mg);
        Self {
            y: y_statistic(mg),
            ytilde: loops + parallel_pairs,
            loops,
            parallel_pairs,
        }
    }

    pub fn is_simple(&self) -> bool {
        self.ytilde == 0
    }
}

/// Reusable buffers for repeated sampling from one degree sequence.
///
/// Draws the same pairing as [`sample_configuration`] for the same random
/// stream, but avoids per-sample allocation and can stop at the first loop
/// or repeated edge when only simplicity matters.
#[derive(Debug, Clone)]
pub struct Sampler {
    identity: Vec<u32>,
    labels: Vec<u32>,
    vertex_of: Vec<u32>,
    degree_of: Vec<u32>,
    /// First half-edge of the owning vertex, per half-edge.
    start_of: Vec<u32>,
    /// Per half-edge: `(round << 32) | other endpoint`, valid only when the
    /// round matches the current one.
    mate: Vec<u64>,
    round: u64,
    keys: Vec<u64>,
    loops: Vec<u32>,
    looped: Vec<u32>,
}

impl Sampler {
    pub fn new(ds: &DegreeSequence) -> Result<Self> {
        ds.nonzero_edges()?;
        let vertex_of = half_edge_owners(ds);
        let h = vertex_of.len();
        Ok(Self {
            identity: (0..h as u32).collect(),
            labels: Vec::with_capacity(h),
            degree_of: vertex_of
                .iter()
                .map(|&v| ds.degrees()[v as usize])
                .collect(),
            start_of: {
                let mut acc = 0u32;
                let starts: Vec<u32> = ds
                    .degrees()
                    .iter()
                    .map(|&d| {
                        let s = acc;
                        acc += d;
                        s
                    })
                    .collect();
                vertex_of.iter().map(|&v| starts[v as usize]).collect()
            },
            mate: vec![0; h],
            round: 0,
            vertex_of,
            keys: Vec::with_capacity(h / 2),
            loops: vec![0; ds.len()],
            looped: Vec::new(),
        })
    }

    fn reset(&mut self) {
        self.labels.clear();
        self.labels.extend_from_slice(&self.identity);
    }

    /// Draws a configuration and reports whether it is simple, stopping at
    /// the first defect.
    pub fn sample_is_simple<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        self.reset();
        self.round += 1;
        if self.round > u64::from(u32::MAX) {
            self.mate.fill(0);
            self.round = 1;
        }
        let tag = self.round << 32;
        let h = self.labels.len();
        let mut i = 0;
        while i < h {
            if i + 1 < h {
                shuffle_step(&mut self.labels, i, rng);
            }
            if i + 2 < h {
                shuffle_step(&mut self.labels, i + 1, rng);
            }
            let (x, y) = (self.labels[i] as usize, self.labels[i + 1] as usize);
            let (v, w) = (self.vertex_of[x], self.vertex_of[y]);
            if v == w {
                return false;
            }
            // A repeated edge needs both endpoints of degree ≥ 2. Scan the
            // already matched half-edges of the lower-degree endpoint.
            let (dx, dy) = (self.degree_of[x], self.degree_of[y]);
            if dx > 1 && dy > 1 {
                let (near, far) = if dx <= dy { (x, w) } else { (y, v) };
                let start = self.start_of[near] as usize;
                let span = &self.mate[start..start + self.degree_of[near] as usize];
                if span.contains(&(tag | u64::from(far))) {
                    return false;
                }
                self.mate[x] = tag | u64::from(w);
                self.mate[y] = tag | u64::from(v);
            }
            i += 2;
        }
        true
    }

    /// Draws a full configuration and computes all statistics.
    pub fn sample_statistics<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SampleStatistics {
        self.reset();
        let h = self.labels.len();
        shuffle_prefix(&mut self.labels, h, rng);

        self.keys.clear();
        for &v in &self.looped {
            self.loops[v as usize] = 0;
        }
        self.looped.clear();
        let mut stats = SampleStatistics::default();
        for pair in self.labels.chunks_exact(2) {
            let (x, y) = (pair[0] as usize, pair[1] as usize);
            let (v, w) = (self.vertex_of[x], self.vertex_of[y]);
            if v == w {
                stats.loops += 1;
                if self.loops[v as usize] == 0 {
                    self.looped.push(v);
                    stats.y += 1;
                }
                self.loops[v as usize] += 1;
            } else if self.degree_of[x] > 1 && self.degree_of[y] > 1 {
                self.keys.push(edge_key(v, w));
            }
        }
        self.keys.sort_unstable();
        for run in self.keys.chunk_by(|a, b| a == b) {
            let m = run.len() as u64;
            if m >= 2 {
                stats.y += 1;
                stats.parallel_pairs += choose2(m);
            }
        }
        stats.ytilde = stats.loops + stats.parallel_pairs;
        stats
    }
}

#[inline]
fn edge_key(v: u32, w: u32) -> u64 {
    let (a, b) = if v < w { (v, w) } else { (w, v) };
    (u64::from(a) << 32) | u64::from(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ds(v: &[u32]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bounded_draw_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..100).all(|_| below(&mut rng, 1) == 0));
        let n = 7u32;
        let draws = 70_000;
        let mut counts = [0u32; 7];
        for _ in 0..draws {
            counts[below(&mut rng, n) as usize] += 1;
        }
        let expected = f64::from(draws) / f64::from(n);
        let chi2: f64 = counts
            .iter()
            .map(|&c| (f64::from(c) - expected).powi(2) / expected)
            .sum();
        // 6 degrees of freedom, 99.9% quantile ≈ 22.46
        assert!(chi2 < 22.46, "{counts:?}");
        // A range just above a power of two exercises the rejection branch.
        let big = (1u32 << 31) + 1;
        assert!((0..1000).all(|_| below(&mut rng, big) < big));
    }

    fn mg(n: usize, loops: &[(u32, u32)], edges: &[(u32, u32, u32)]) -> Multigraph {
        let mut loop_counts = vec![0; n];
        for &(v, c) in loops {
            loop_counts[v as usize] = c;
        }
        Multigraph {
            n,
            loop_counts,
            multiplicities: edges.iter().map(|&(v, w, c)| ((v, w), c)).collect(),
        }
    }

    #[test]
    fn forced_pairings() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = sample_configuration(&ds(&[1, 1]), &mut rng).unwrap();
        assert_eq!(cfg.pairs().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = project(&ds(&[1, 1]), &cfg).unwrap();
        assert_eq!(g.multiplicity(0, 1), 1);
        assert!(is_simple(&g));

        let cfg = sample_configuration(&ds(&[2]), &mut rng).unwrap();
        assert_eq!(cfg.pairs().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = project(&ds(&[2]), &cfg).unwrap();
        assert_eq!(g.loop_counts, vec![1]);
        assert!(!is_simple(&g));

        assert_eq!(
            sample_configuration(&ds(&[0]), &mut rng),
            Err(Error::Degenerate)
        );
    }

    #[test]
    fn project_double_edge_and_loop() {
        // (2,2,2): half-edges 0,1 | 2,3 | 4,5. Vertex 1 and 2 doubly joined,
        // loop at vertex 0.
        let s = ds(&[2, 2, 2]);
        let cfg = Configuration::from_pairs(&s, &[(0, 1), (2, 4), (3, 5)]).unwrap();
        let g = project(&s, &cfg).unwrap();
        assert_eq!(g.loop_counts, vec![1, 0, 0]);
        assert_eq!(g.multiplicity(2, 1), 2);
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert_eq!(y_statistic(&g), 2);
        assert_eq!(ytilde_statistic(&g), 2);
        assert_eq!(decomposition(&g), (1, 1));
    }

    #[test]
    fn project_rejects_mismatch() {
        let cfg = Configuration::from_pairs(&ds(&[1, 1]), &[(0, 1)]).unwrap();
        assert!(matches!(
            project(&ds(&[2, 2]), &cfg),
            Err(Error::Inconsistent(_))
        ));
        assert!(matches!(
            project(&ds(&[2]), &cfg),
            Err(Error::Inconsistent(_))
        ));
        assert!(Configuration::from_pairs(&ds(&[2, 2]), &[(0, 1), (1, 2)]).is_err());
    }

    #[test]
    fn statistics_examples() {
        let triangle = mg(3, &[], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        assert!(is_simple(&triangle));
        assert_eq!(y_statistic(&triangle), 0);
        assert_eq!(ytilde_statistic(&triangle), 0);
        assert_eq!(decomposition(&triangle), (0, 0));

        let three_loops = mg(3, &[(0, 1), (1, 1), (2, 1)], &[]);
        assert!(!is_simple(&three_loops));
        assert_eq!(y_statistic(&three_loops), 3);
        assert_eq!(decomposition(&three_loops), (3, 0));

        let double = mg(2, &[], &[(0, 1, 2)]);
        assert!(!is_simple(&double));

        let triple = mg(2, &[], &[(0, 1, 3)]);
        assert_eq!(y_statistic(&triple), 1);
        assert_eq!(ytilde_statistic(&triple), 3);
    }

    #[test]
    fn dump_roundtrip() {
        let g = mg(4, &[(0, 2)], &[(1, 2, 1), (1, 3, 3)]);
        let text = g.dump();
        assert_eq!(text, "L 0 2\nE 1 2 1\nE 1 3 3\n");
        assert_eq!(Multigraph::parse_dump(4, &text).unwrap(), g);
        assert!(Multigraph::parse_dump(4, "E 2 1 1\n").is_err());
        assert!(Multigraph::parse_dump(4, "X 1\n").is_err());
    }

    #[test]
    fn fixed_seed_reproducible() {
        let s = ds(&[3, 3, 2, 2, 4]);
        let a: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..20)
                .map(|_| sample_configuration(&s, &mut rng).unwrap())
                .collect()
        };
        let b: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..20)
                .map(|_| sample_configuration(&s, &mut rng).unwrap())
                .collect()
        };
        assert_eq!(a, b);
    }

    fn arb_sequence() -> impl Strategy<Value = DegreeSequence> {
        prop::collection::vec(0u32..7, 1..10).prop_map(|mut v| {
            if v.iter().sum::<u32>() % 2 == 1 {
                v[0] += 1;
            }
            if v.iter().all(|&d| d == 0) {
                v[0] = 2;
            }
            DegreeSequence::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn projection_invariants(s in arb_sequence(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = sample_configuration(&s, &mut rng).unwrap();
            prop_assert!(cfg.is_valid());
            prop_assert_eq!(cfg.pairs().count() as u64, s.edges());
            let g = project(&s, &cfg).unwrap();
            let want: Vec<u64> = s.degrees().iter().map(|&d| d as u64).collect();
            prop_assert_eq!(g.degrees(), want);
            prop_assert!(g.multiplicities.values().all(|&c| c >= 1));

            let y = y_statistic(&g);
            let yt = ytilde_statistic(&g);
            prop_assert!(yt >= y);
            let no_heavy = g.loop_counts.iter().all(|&x| x < 2)
                && g.multiplicities.values().all(|&x| x < 3);
            prop_assert_eq!(yt == y, no_heavy);
            prop_assert_eq!(is_simple(&g), y == 0);
            prop_assert_eq!(is_simple(&g), yt == 0);
        }

        #[test]
        fn sampler_matches_reference_path(s in arb_sequence(), seed in any::<u64>()) {
            let mut sampler = Sampler::new(&s).unwrap();
            let reference = {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                project(&s, &sample_configuration(&s, &mut rng).unwrap()).unwrap()
            };
            let full = sampler.sample_statistics(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(full, SampleStatistics::of(&reference));
            let quick = sampler.sample_is_simple(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(quick, is_simple(&reference));
        }
    }
}
