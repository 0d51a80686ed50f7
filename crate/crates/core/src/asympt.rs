//! Closed-form asymptotic predictions and bounds for the probability that
//! the configuration-model multigraph is simple.
//!
//! All values are the formula values with the vanishing error terms
//! dropped. They carry no finite-N error bars.

use serde::Serialize;

use crate::degseq::{falling2, lambda_from_falling, stats, DegreeSequence, DegreeStats};
use crate::error::{Error, Result};
use crate::exact::degree_classes;

/// Below this λ the log-of-one-plus differences use their Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// λ − ln(1 + λ) ≥ 0.
pub fn lambda_minus_log1p(l: f64) -> f64 {
    if l < SERIES_CUTOFF {
        let l2 = l * l;
        l2 * (0.5 - l * (1.0 / 3.0 - l * (0.25 - l * 0.2)))
    } else {
        l - l.ln_1p()
    }
}

/// ln(1 + λ) − λ + λ²/2 ≥ 0.
pub fn log1p_second_order_remainder(l: f64) -> f64 {
    if l < SERIES_CUTOFF {
        let l3 = l * l * l;
        l3 * (1.0 / 3.0 - l * (0.25 - l * (0.2 - l / 6.0)))
    } else {
        l.ln_1p() - l + 0.5 * l * l
    }
}

/// Σ_{i<j} of the two pairwise terms, grouped by distinct degree:
/// a class pair (a, b) contributes m_a·m_b (a ≠ b) or C(m_a, 2) (a = b)
/// identical terms.
fn pair_sums(ds: &DegreeSequence, edges: u64) -> (f64, f64) {
    let two_n = 2 * edges;
    let classes: Vec<(u64, f64)> = degree_classes(ds)
        .into_iter()
        .filter(|&(d, _)| d >= 2)
        .map(|(d, m)| (falling2(d), m as f64))
        .collect();
    let (mut sum_f, mut sum_g) = (0.0, 0.0);
    for (i, &(a, ma)) in classes.iter().enumerate() {
        let same = ma * (ma - 1.0) / 2.0;
        if same > 0.0 {
            let l = lambda_from_falling(a, a, two_n);
            sum_f += same * lambda_minus_log1p(l);
            sum_g += same * log1p_second_order_remainder(l);
        }
        for &(b, mb) in &classes[i + 1..] {
            let l = lambda_from_falling(a, b, two_n);
            sum_f += ma * mb * lambda_minus_log1p(l);
            sum_g += ma * mb * log1p_second_order_remainder(l);
        }
    }
    (sum_f, sum_g)
}

/// ½ Σ λ_ii = Σ d(d−1) / 4N.
fn half_diagonal(st: &DegreeStats) -> f64 {
    st.sum_dd1 as f64 / (4.0 * st.edges as f64)
}

/// exp(−½ Σ_i λ_ii − Σ_{i<j} (λ_ij − ln(1 + λ_ij))).
pub fn p_simple_t2a(ds: &DegreeSequence) -> Result<f64> {
    let st = stats(ds)?;
    let (sum_f, _) = pair_sums(ds, st.edges);
    Ok((-half_diagonal(&st) - sum_f).exp())
}

fn t2b_from(st: &DegreeStats, correction: f64) -> f64 {
    let n = st.edges as f64;
    let r = st.sum_d2 as f64 / (2.0 * n);
    let quartic = st.sum_d2d1sq as f64 / (16.0 * n * n);
    (-0.25 * r * r + 0.25 + quartic + correction).exp()
}

/// exp(−¼(Σd²/2N)² + ¼ + Σd²(d−1)²/16N² + Σ_{i<j} (ln(1+λ_ij) − λ_ij + λ_ij²/2)).
pub fn p_simple_t2b(ds: &DegreeSequence) -> Result<f64> {
    let st = stats(ds)?;
    let (_, sum_g) = pair_sums(ds, st.edges);
    Ok(t2b_from(&st, sum_g))
}

/// Σ_{i<j} (ln(1+λ_ij) − λ_ij + λ_ij²/2).
pub fn correction_term(ds: &DegreeSequence) -> Result<f64> {
    let edges = ds.nonzero_edges()?;
    Ok(pair_sums(ds, edges).1)
}

/// The two algebraically equal forms of the Poisson prediction:
/// exp(−Λ − Λ²) and exp(−¼(Σd²/2N)² + ¼).
pub fn poisson_forms(ds: &DegreeSequence) -> Result<(f64, f64)> {
    let st = stats(ds)?;
    let lambda = st.lambda_f64();
    let r = st.sum_d2 as f64 / (2.0 * st.edges as f64);
    Ok((
        (-lambda - lambda * lambda).exp(),
        (-0.25 * r * r + 0.25).exp(),
    ))
}

pub fn p_simple_poisson(ds: &DegreeSequence) -> Result<f64> {
    let (by_lambda, by_density) = poisson_forms(ds)?;
    let scale = by_lambda.abs().max(f64::MIN_POSITIVE);
    if (by_lambda - by_density).abs() / scale > 1e-9 {
        return Err(Error::Invariant(format!(
            "Poisson forms disagree: {by_lambda} vs {by_density}"
        )));
    }
    Ok(by_lambda)
}

/// (upper, lower) = (exp(½ − Σd²/4N), exp(−(Σd²/4N)²)).
pub fn bounds(ds: &DegreeSequence) -> Result<(f64, f64)> {
    let st = stats(ds)?;
    // ½ − Σd²/4N = −Σd(d−1)/4N, evaluated exactly as t2a evaluates it.
    let upper = (-half_diagonal(&st)).exp();
    let q = st.sum_d2 as f64 / (4.0 * st.edges as f64);
    Ok((upper, (-q * q).exp()))
}

/// Presentation thresholds for the dichotomy verdict; not mathematical
/// constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DichotomyThresholds {
    pub bounded: f64,
    pub vanishing: f64,
}

impl Default for DichotomyThresholds {
    fn default() -> Self {
        Self {
            bounded: 20.0,
            vanishing: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedAway,
    Vanishing,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dichotomy {
    /// Σd² / N.
    pub ratio: f64,
    pub verdict: Verdict,
    pub thresholds: DichotomyThresholds,
}

pub fn dichotomy_diagnostic(ds: &DegreeSequence) -> Result<Dichotomy> {
    dichotomy_with(ds, DichotomyThresholds::default())
}

pub fn dichotomy_with(ds: &DegreeSequence, thresholds: DichotomyThresholds) -> Result<Dichotomy> {
    let ratio = ds.sum_squares() as f64 / ds.nonzero_edges()? as f64;
    let verdict = if ratio <= thresholds.bounded {
        Verdict::BoundedAway
    } else if ratio >= thresholds.vanishing {
        Verdict::Vanishing
    } else {
        Verdict::Indeterminate
    };
    Ok(Dichotomy {
        ratio,
        verdict,
        thresholds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub kind: &'static str,
    pub t2a_value: f64,
    pub t2b_value: f64,
    pub poisson_value: f64,
    pub upper_bound_j1: f64,
    pub lower_bound_j2: f64,
    pub lambda_big: f64,
    pub density_ratio: f64,
    pub correction_term: f64,
    pub dichotomy: Dichotomy,
    pub stats: DegreeStats,
}

pub fn report(ds: &DegreeSequence) -> Result<AsymptoticReport> {
    let st = stats(ds)?;
    let (sum_f, sum_g) = pair_sums(ds, st.edges);
    let (upper, lower) = bounds(ds)?;
    Ok(AsymptoticReport {
        kind: "asymptotic formula value (vanishing error terms dropped)",
        t2a_value: (-half_diagonal(&st) - sum_f).exp(),
        t2b_value: t2b_from(&st, sum_g),
        poisson_value: p_simple_poisson(ds)?,
        upper_bound_j1: upper,
        lower_bound_j2: lower,
        lambda_big: st.lambda_f64(),
        density_ratio: st.density_ratio_f64(),
        correction_term: sum_g,
        dichotomy: dichotomy_diagnostic(ds)?,
        stats: st,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degseq::lambda_pair;
    use proptest::prelude::*;

    fn ds(v: &[u32]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    /// O(n²) evaluation straight from the definition.
    fn t2a_naive(s: &DegreeSequence) -> f64 {
        let n = s.len();
        let mut e = 0.0;
        for i in 0..n {
            e -= 0.5 * lambda_pair(s, i, i).unwrap();
            for j in i + 1..n {
                let l = lambda_pair(s, i, j).unwrap();
                e -= l - (1.0 + l).ln();
            }
        }
        e.exp()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn t2a_examples() {
        let k4 = p_simple_t2a(&ds(&[3, 3, 3, 3])).unwrap();
        let want = (-1.0 - 6.0 * (0.5 - 1.5f64.ln())).exp();
        assert!(close(k4, want, 1e-14));
        assert!((k4 - 0.2086).abs() < 1e-4);
        assert_eq!(p_simple_t2a(&ds(&[1; 10])).unwrap(), 1.0);
        let tri = p_simple_t2a(&ds(&[2, 2, 2])).unwrap();
        let third: f64 = 1.0 / 3.0;
        assert!(close(
            tri,
            (-0.5 - 3.0 * (third - (4.0f64 / 3.0).ln())).exp(),
            1e-14
        ));
        assert!((tri - 0.5290).abs() < 1e-4);
        assert_eq!(p_simple_t2a(&ds(&[0, 0])), Err(Error::Degenerate));
    }

    #[test]
    fn t2b_examples() {
        let s = ds(&[3, 3, 3, 3]);
        assert!(close(
            p_simple_t2b(&s).unwrap(),
            p_simple_t2a(&s).unwrap(),
            1e-12
        ));
        assert!(close(p_simple_t2b(&ds(&[1; 6])).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn poisson_examples() {
        for n in [4, 10, 100] {
            let p = p_simple_poisson(&DegreeSequence::regular(n, 3).unwrap()).unwrap();
            assert!(close(p, (-2.0f64).exp(), 1e-14));
        }
        assert_eq!(p_simple_poisson(&ds(&[1, 1])).unwrap(), 1.0);
        assert!(close(
            p_simple_poisson(&ds(&[2, 2, 2])).unwrap(),
            (-0.75f64).exp(),
            1e-14
        ));
    }

    #[test]
    fn bounds_examples() {
        let (hi, lo) = bounds(&ds(&[3, 3, 3, 3])).unwrap();
        assert!(close(hi, (-1.0f64).exp(), 1e-15));
        assert!(close(lo, (-2.25f64).exp(), 1e-15));
        let (hi, lo) = bounds(&ds(&[1, 1, 1, 1])).unwrap();
        assert_eq!(hi, 1.0);
        assert!(close(lo, (-0.25f64).exp(), 1e-15));
        let (hi, lo) = bounds(&ds(&[2, 2, 2])).unwrap();
        let t = p_simple_t2a(&ds(&[2, 2, 2])).unwrap();
        assert!(close(hi, (-0.5f64).exp(), 1e-15) && close(lo, (-1.0f64).exp(), 1e-15));
        assert!(lo <= t && t <= hi);
    }

    #[test]
    fn dichotomy_examples() {
        assert_eq!(dichotomy_diagnostic(&ds(&[3, 3, 3, 3])).unwrap().ratio, 6.0);
        assert_eq!(dichotomy_diagnostic(&ds(&[1; 8])).unwrap().ratio, 2.0);
        for k in [2u32, 10, 50, 500] {
            let mut v = vec![k];
            v.extend(std::iter::repeat_n(1, k as usize));
            let d = dichotomy_diagnostic(&ds(&v)).unwrap();
            assert_eq!(d.ratio, f64::from(k) + 1.0);
        }
        let star = |k: u32| {
            let mut v = vec![k];
            v.extend(std::iter::repeat_n(1, k as usize));
            dichotomy_diagnostic(&ds(&v)).unwrap().verdict
        };
        assert_eq!(star(4), Verdict::BoundedAway);
        assert_eq!(star(100), Verdict::Indeterminate);
        assert_eq!(star(400), Verdict::Vanishing);
    }

    #[test]
    fn series_branches_are_continuous() {
        for &l in &[SERIES_CUTOFF * (1.0 - 1e-12), SERIES_CUTOFF] {
            let f = lambda_minus_log1p(l);
            let g = log1p_second_order_remainder(l);
            assert!(close(f + g, 0.5 * l * l, 1e-12));
        }
        let below = lambda_minus_log1p(SERIES_CUTOFF * (1.0 - 1e-12));
        let above = lambda_minus_log1p(SERIES_CUTOFF);
        assert!(close(below, above, 1e-9));
    }

    #[test]
    fn regular_t2a_decreases_toward_limit() {
        let limit = (-2.0f64).exp();
        let vals: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| p_simple_t2a(&DegreeSequence::regular(n, 3).unwrap()).unwrap())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2] && vals[2] > limit);
        assert!(vals[2] - limit < 1e-3);
    }

    #[test]
    fn report_fields() {
        let r = report(&ds(&[3, 3, 3, 3])).unwrap();
        assert_eq!(r.lambda_big, 1.0);
        assert_eq!(r.density_ratio, 6.0);
        assert!(r.correction_term >= 0.0);
        assert!(r.lower_bound_j2 <= r.t2b_value && r.t2a_value <= r.upper_bound_j1);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["stats"]["lambda_big"]["num"], "1");
    }

    fn arb_sequence() -> impl Strategy<Value = DegreeSequence> {
        prop::collection::vec(0u32..=30, 1..50).prop_map(|mut v| {
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
        fn grouping_matches_naive(s in arb_sequence()) {
            let grouped = p_simple_t2a(&s).unwrap();
            let naive = t2a_naive(&s);
            prop_assert!(close(grouped, naive, 1e-12) || (grouped - naive).abs() < 1e-300,
                "{} vs {}", grouped, naive);
        }

        #[test]
        fn correction_non_negative(s in arb_sequence()) {
            prop_assert!(correction_term(&s).unwrap() >= 0.0);
        }

        #[test]
        fn remainders_non_negative(l in 0.0f64..1e3) {
            prop_assert!(lambda_minus_log1p(l) >= 0.0);
            prop_assert!(log1p_second_order_remainder(l) >= 0.0);
        }
    }
}
