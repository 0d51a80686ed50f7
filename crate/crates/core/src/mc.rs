//! Seedable Monte Carlo estimation of P(simple) and of the laws of the
//! simplicity statistics, plus a Poisson goodness-of-fit distance.
//!
//! Samples are split into fixed chunks of [`CHUNK_SIZE`]. Chunk `i` draws
//! from its own ChaCha stream `i` under the master seed, and chunk results
//! are merged in chunk order, so output does not depend on the worker
//! count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Discrete, DiscreteCDF, Normal, Poisson};

use crate::confmodel::{SampleStatistics, Sampler};
use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};

pub const CHUNK_SIZE: u64 = 4096;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Random stream for one chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool. Never affects results.
    pub workers: usize,
    pub confidence: f64,
    /// Record wall-clock time. Off by default so output is reproducible.
    pub timing: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            workers: 0,
            confidence: DEFAULT_CONFIDENCE,
            timing: false,
        }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Domain("sample count must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Domain(format!(
                "confidence {} must lie strictly between 0 and 1",
                self.confidence
            )));
        }
        Ok(())
    }
}

fn run_chunks<T, F>(cfg: &McConfig, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = cfg.samples.div_ceil(CHUNK_SIZE);
    let one = |i: u64| {
        let count = CHUNK_SIZE.min(cfg.samples - i * CHUNK_SIZE);
        work(&mut chunk_rng(cfg.seed, i), count)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let par = || (0..chunks).into_par_iter().map(one).collect();
        match cfg.workers {
            1 => (0..chunks).map(one).collect(),
            0 => par(),
            w => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                Ok(pool) => pool.install(par),
                Err(_) => (0..chunks).map(one).collect(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(one).collect()
    }
}

struct Stopwatch(Option<std::time::Instant>);

impl Stopwatch {
    fn start(enabled: bool) -> Self {
        Self(enabled.then(std::time::Instant::now))
    }

    fn elapsed(&self) -> Option<f64> {
        self.0.map(|t| t.elapsed().as_secs_f64())
    }
}

/// Monte Carlo estimate of P(simple) with a Wilson score interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplicityEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub samples: u64,
    pub successes: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_secs: Option<f64>,
}

impl SimplicityEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Two-sided Wilson score interval for `successes` out of `samples`.
pub fn wilson_interval(successes: u64, samples: u64, confidence: f64) -> (f64, f64) {
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2n = z * z / n;
    let center = (p + 0.5 * z2n) / (1.0 + z2n);
    let half = z / (1.0 + z2n) * (p * (1.0 - p) / n + z2n / (4.0 * n)).sqrt();
    let low = (center - half).clamp(0.0, 1.0).min(p);
    let high = (center + half).clamp(0.0, 1.0).max(p);
    (low, high)
}

pub fn estimate_p_simple(
    ds: &DegreeSequence,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<SimplicityEstimate> {
    estimate(ds, &McConfig::new(samples, seed).workers(workers))
}

pub fn estimate(ds: &DegreeSequence, cfg: &McConfig) -> Result<SimplicityEstimate> {
    cfg.validate()?;
    let template = Sampler::new(ds)?;
    let clock = Stopwatch::start(cfg.timing);
    let successes: u64 = run_chunks(cfg, |rng, count| {
        let mut sampler = template.clone();
        (0..count).filter(|_| sampler.sample_is_simple(rng)).count() as u64
    })
    .into_iter()
    .sum();
    let (ci_low, ci_high) = wilson_interval(successes, cfg.samples, cfg.confidence);
    Ok(SimplicityEstimate {
        p_hat: successes as f64 / cfg.samples as f64,
        ci_low,
        ci_high,
        confidence: cfg.confidence,
        samples: cfg.samples,
        successes,
        seed: cfg.seed,
        elapsed_secs: clock.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// Y: looped vertices plus multiply-joined vertex pairs.
    Y,
    /// Ỹ: loops plus pairs of parallel edges.
    Ytilde,
    Loops,
    ParallelPairs,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::Y,
        Statistic::Ytilde,
        Statistic::Loops,
        Statistic::ParallelPairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Y => "y",
            Statistic::Ytilde => "ytilde",
            Statistic::Loops => "loops",
            Statistic::ParallelPairs => "parallel-pairs",
        }
    }

    pub fn of(self, s: &SampleStatistics) -> u64 {
        match self {
            Statistic::Y => s.y,
            Statistic::Ytilde => s.ytilde,
            Statistic::Loops => s.loops,
            Statistic::ParallelPairs => s.parallel_pairs,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("unknown statistic {s:?}"),
            })
    }
}

/// Empirical law of a non-negative integer statistic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Histogram {
    pub counts: BTreeMap<u64, u64>,
    pub samples: u64,
}

impl Histogram {
    pub fn record(&mut self, value: u64) {
        *self.counts.entry(value).or_default() += 1;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.samples += other.samples;
    }

    pub fn frequency(&self, value: u64) -> f64 {
        self.counts.get(&value).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum();
        total / self.samples as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .map(|(&k, &c)| c as f64 * (k as f64 - m).powi(2))
            .sum();
        ss / (self.samples as f64 - 1.0).max(1.0)
    }

    pub fn max_value(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// `value,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (k, c) in &self.counts {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

pub fn empirical_distribution(
    ds: &DegreeSequence,
    statistic: Statistic,
    samples: u64,
    seed: u64,
) -> Result<Histogram> {
    let mut hs = empirical_distributions(ds, &[statistic], &McConfig::new(samples, seed))?;
    Ok(hs.remove(0))
}

/// Histograms of several statistics measured on the same samples.
pub fn empirical_distributions(
    ds: &DegreeSequence,
    statistics: &[Statistic],
    cfg: &McConfig,
) -> Result<Vec<Histogram>> {
    cfg.validate()?;
    let template = Sampler::new(ds)?;
    let parts = run_chunks(cfg, |rng, count| {
        let mut sampler = template.clone();
        let mut hs = vec![Histogram::default(); statistics.len()];
        for _ in 0..count {
            let s = sampler.sample_statistics(rng);
            for (h, st) in hs.iter_mut().zip(statistics) {
                h.record(st.of(&s));
            }
        }
        hs
    });
    let mut merged = vec![Histogram::default(); statistics.len()];
    for part in &parts {
        for (m, h) in merged.iter_mut().zip(part) {
            m.merge(h);
        }
    }
    Ok(merged)
}

/// Σ_j |P(j) − Q(j)| over two probability vectors (missing entries are 0).
///
/// This full-sum convention is twice the usual total variation distance.
/// Poisson(mean) probabilities of `0..=upto`; mean 0 is the point mass at 0.
pub fn poisson_pmf(mean: f64, upto: u64) -> Result<Vec<f64>> {
    if mean == 0.0 {
        return Ok((0..=upto).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect());
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?;
    Ok((0..=upto).map(|j| poisson.pmf(j)).collect())
}

pub fn tv_distance_pmfs(p: &[f64], q: &[f64]) -> f64 {
    (0..p.len().max(q.len()))
        .map(|j| (p.get(j).copied().unwrap_or(0.0) - q.get(j).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Σ_j |empirical(j) − Po(mean)(j)| (twice the usual total variation
/// distance). The Poisson mass beyond the histogram's support is included.
pub fn tv_distance(h: &Histogram, mean: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!(
            "Poisson mean {mean} must be positive"
        )));
    }
    let top = h
        .max_value()
        .ok_or_else(|| Error::Domain("empty histogram".into()))?;
    let poisson = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?;
    let body: f64 = (0..=top)
        .map(|j| (h.frequency(j) - poisson.pmf(j)).abs())
        .sum();
    Ok(body + poisson.sf(top))
}
