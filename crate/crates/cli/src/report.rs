//! Report envelope and CSV rows, with readers for round-tripping.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use qsymlab_core::disting::Sweep;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CompileRunResults;

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

/// Everything needed to rerun an experiment, plus its results. Only
/// `timestamps` varies between reruns with the same parameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport<T> {
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub timestamps: Timestamps,
    pub results: T,
}

impl<T> ExperimentReport<T> {
    pub fn new<P: Serialize>(
        kind: &str,
        parameters: &P,
        seed: u64,
        started_unix_ms: u128,
        results: T,
    ) -> Result<Self> {
        Ok(Self {
            kind: kind.to_string(),
            version: REPORT_VERSION.to_string(),
            seed,
            parameters: serde_json::to_value(parameters)?,
            timestamps: Timestamps {
                started_unix_ms,
                finished_unix_ms: now_unix_ms(),
            },
            results,
        })
    }
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn read_report<T: DeserializeOwned>(path: &Path) -> Result<ExperimentReport<T>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// One row of the advantage-vs-r curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub r: usize,
    pub method: String,
    pub adv: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl CurveRow {
    pub fn from_sweep(sweep: &Sweep) -> Vec<CurveRow> {
        sweep
            .reports
            .iter()
            .map(|rep| CurveRow {
                n: rep.n,
                r: rep.r,
                method: rep.method.as_str().to_string(),
                adv: rep.advantage,
                ci_low: rep.ci95.low,
                ci_high: rep.ci95.high,
                samples: rep.samples,
                seed: rep.seed,
            })
            .collect()
    }
}

/// One compiled trial, or a single summary row in exact mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileRunRow {
    pub trial: Option<u64>,
    pub seed: Option<u64>,
    pub output_bit: Option<u8>,
    pub success: Option<bool>,
    pub classical_queries: Option<u64>,
    pub c_injective: Option<bool>,
    pub p_output_one: Option<f64>,
    pub exact_success: Option<f64>,
}

impl CompileRunRow {
    pub fn from_results(results: &CompileRunResults) -> Vec<CompileRunRow> {
        let mut rows = Vec::new();
        if let Some(est) = &results.estimate {
            rows.extend(est.runs.iter().enumerate().map(|(t, run)| CompileRunRow {
                trial: Some(t as u64),
                seed: Some(run.seed),
                output_bit: Some(run.output_bit),
                success: Some(run.output_bit == results.expected_bit),
                classical_queries: Some(run.classical_queries_used),
                c_injective: Some(run.c_was_injective),
                p_output_one: Some(run.p_output_one),
                exact_success: None,
            }));
        }
        if let Some(exact) = &results.exact {
            rows.push(CompileRunRow {
                trial: None,
                seed: None,
                output_bit: None,
                success: None,
                classical_queries: None,
                c_injective: None,
                p_output_one: None,
                exact_success: Some(exact.probability),
            });
        }
        rows
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.deserialize().collect::<Result<Vec<R>, _>>()?)
}
