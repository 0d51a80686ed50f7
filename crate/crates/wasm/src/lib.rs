//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function takes plain strings and numbers and returns a JSON
//! document. The JSON builders are ordinary Rust functions so they can be
//! tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use cmsimple::mc::{self, McConfig, Statistic};
use cmsimple::{asympt, exact, DegreeSequence};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Keeps a single click from freezing the tab.
pub const MAX_SAMPLES: u32 = 2_000_000;
/// Exact enumeration in the browser stops at 135135 matchings.
pub const BROWSER_CAP: u64 = 7;

type Out = Result<String, String>;

fn parse(degrees: &str) -> Result<DegreeSequence, String> {
    DegreeSequence::parse_literal(degrees).map_err(|e| e.to_string())
}

fn check_samples(samples: u32) -> Result<u64, String> {
    match samples {
        0 => Err("samples must be at least 1".into()),
        s if s > MAX_SAMPLES => Err(format!("at most {MAX_SAMPLES} samples in the browser")),
        s => Ok(u64::from(s)),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, String> {
    serde_json::to_value(v).map_err(|e| e.to_string())
}

/// Asymptotic formulas for a degree list, plus exact values when the
/// instance is small enough to enumerate.
pub fn asymptotic_json(degrees: &str) -> Out {
    let ds = parse(degrees)?;
    let report = asympt::report(&ds).map_err(|e| e.to_string())?;
    let mut doc = json!({ "degrees": ds.to_string(), "asymptotic": to_value(&report)? });
    if ds.edges() <= BROWSER_CAP {
        let r = exact::exact_p_simple(&ds, BROWSER_CAP).map_err(|e| e.to_string())?;
        doc["exact"] = json!({
            "p_simple": r.p_simple.to_string(),
            "p_simple_value": r.p_simple_f64(),
            "total_configurations": r.total_configurations.to_string(),
        });
    }
    Ok(doc.to_string())
}

/// Empirical law of one statistic with its Poisson limit for comparison.
pub fn histogram_json(degrees: &str, statistic: &str, samples: u32, seed: u32) -> Out {
    let ds = parse(degrees)?;
    let stat: Statistic = statistic
        .parse()
        .map_err(|e: cmsimple::Error| e.to_string())?;
    let cfg = McConfig::new(check_samples(samples)?, u64::from(seed));
    let h = mc::empirical_distributions(&ds, &[stat], &cfg)
        .map_err(|e| e.to_string())?
        .remove(0);
    let lambda = ds.stats().map_err(|e| e.to_string())?.lambda_f64();
    let mean = match stat {
        Statistic::Y | Statistic::Ytilde => lambda + lambda * lambda,
        Statistic::Loops => lambda,
        Statistic::ParallelPairs => lambda * lambda,
    };
    let top = h.max_value().unwrap_or(0);
    let frequencies: Vec<f64> = (0..=top).map(|j| h.frequency(j)).collect();
    // Show the Poisson curve a little past the sampled support.
    let shown = top.max((mean + 4.0 * mean.sqrt()).ceil() as u64);
    let poisson = mc::poisson_pmf(mean, shown).map_err(|e| e.to_string())?;
    let tv = if mean > 0.0 {
        mc::tv_distance(&h, mean).map_err(|e| e.to_string())?
    } else {
        mc::tv_distance_pmfs(&frequencies, &[1.0])
    };
    Ok(json!({
        "statistic": stat.name(),
        "samples": h.samples,
        "frequencies": frequencies,
        "poisson_mean": mean,
        "poisson": poisson,
        "tv_distance": tv,
        "sample_mean": h.mean(),
    })
    .to_string())
}

/// Estimates along a hub-plus-leaves family with a fixed edge count.
pub fn dichotomy_json(edges: u32, hubs: &str, samples: u32, seed: u32) -> Out {
    let hubs: Vec<u32> = hubs
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u32>()
                .map_err(|e| format!("hub degree {t:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    if hubs.is_empty() {
        return Err("give at least one hub degree".into());
    }
    let cfg = McConfig::new(check_samples(samples)?, u64::from(seed));
    let rows = hubs
        .iter()
        .map(|&k| {
            let ds =
                DegreeSequence::hub_with_leaves(k, u64::from(edges)).map_err(|e| e.to_string())?;
            let est = mc::estimate(&ds, &cfg).map_err(|e| e.to_string())?;
            let diag = asympt::dichotomy_diagnostic(&ds).map_err(|e| e.to_string())?;
            Ok(json!({
                "k": k,
                "ratio": diag.ratio,
                "verdict": to_value(&diag.verdict)?,
                "p_hat": est.p_hat,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "poisson": asympt::p_simple_poisson(&ds).map_err(|e| e.to_string())?,
            }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({ "edges": edges, "samples": samples, "rows": rows }).to_string())
}

#[wasm_bindgen]
pub fn asymptotic_report(degrees: &str) -> Result<String, JsValue> {
    asymptotic_json(degrees).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn statistic_histogram(
    degrees: &str,
    statistic: &str,
    samples: u32,
    seed: u32,
) -> Result<String, JsValue> {
    histogram_json(degrees, statistic, samples, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn dichotomy_curve(edges: u32, hubs: &str, samples: u32, seed: u32) -> Result<String, JsValue> {
    dichotomy_json(edges, hubs, samples, seed).map_err(|e| JsValue::from_str(&e))
}
