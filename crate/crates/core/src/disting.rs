//! Distinguishing advantage of a query algorithm between a uniformly random
//! permutation and a draw from `D_r`.
//!
//! Expectations are over the oracle draw only: each drawn oracle is simulated
//! exactly, so Monte Carlo noise comes from the draw alone.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::with_jobs;
use crate::distributions::{
    derive_seed, enumerate_permutations, enumerate_small_range_support, rng_from_seed,
    sample_permutation, sample_small_range, SmallRangeParams, WeightedSupport,
};
use crate::domain::IndexFunction;
use crate::error::{Error, Result};
use crate::oracles::standard_oracle;
use crate::statevector::run;
use crate::stats::{mean_and_se, Interval, Z95};
use crate::zoo::Distinguisher;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// Acceptance statistics under one oracle distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    /// `E Pr[out = 0]`.
    pub p0: f64,
    /// `E Pr[out = 1]`.
    pub p1: f64,
    /// Standard error of `p1` (0 for exact).
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub n: usize,
    pub r: usize,
    pub algorithm: String,
    pub method: Method,
    pub perm: SideStats,
    pub small_range: SideStats,
    /// `E_perm Pr[out = 1] - E_{D_r} Pr[out = 1]`.
    pub signed_diff: f64,
    /// `max_b |E_perm Pr[out = b] - E_{D_r} Pr[out = b]|`.
    pub advantage: f64,
    pub ci95: Interval,
    /// Standard error of `signed_diff` (0 for exact).
    pub std_error: f64,
    /// Draws per side for Monte Carlo; support sizes are recorded for exact.
    pub samples: Option<u64>,
    pub perm_support: Option<usize>,
    pub small_range_support: Option<usize>,
    pub seed: Option<u64>,
}

fn accept_prob(b: &Distinguisher, g: &IndexFunction) -> Result<f64> {
    Ok(run(&b.algorithm, &mut standard_oracle(g))?.p1)
}

fn exact_side(b: &Distinguisher, support: &WeightedSupport) -> Result<SideStats> {
    let p1 = support.expectation(|g| accept_prob(b, g))?;
    let p0 = support.expectation(|g| Ok(1.0 - accept_prob(b, g)?))?;
    Ok(SideStats {
        p0,
        p1,
        std_error: 0.0,
    })
}

fn report(
    b: &Distinguisher,
    r: usize,
    method: Method,
    perm: SideStats,
    small_range: SideStats,
) -> AdvantageReport {
    let signed_diff = perm.p1 - small_range.p1;
    let diff0 = perm.p0 - small_range.p0;
    let advantage = signed_diff.abs().max(diff0.abs()).min(1.0);
    let std_error = (perm.std_error.powi(2) + small_range.std_error.powi(2)).sqrt();
    let (lo, hi) = (signed_diff - Z95 * std_error, signed_diff + Z95 * std_error);
    let ci95 = if lo <= 0.0 && hi >= 0.0 {
        Interval {
            low: 0.0,
            high: lo.abs().max(hi.abs()).min(1.0),
        }
    } else {
        Interval {
            low: lo.abs().min(hi.abs()),
            high: lo.abs().max(hi.abs()).min(1.0),
        }
    };
    AdvantageReport {
        n: b.n,
        r,
        algorithm: b.id.clone(),
        method,
        perm,
        small_range,
        signed_diff,
        advantage,
        ci95,
        std_error,
        samples: None,
        perm_support: None,
        small_range_support: None,
        seed: None,
    }
}

/// Exact advantage by enumerating `S_n` and the full support of `D_r`.
pub fn advantage_exact(b: &Distinguisher, r: usize, budget: u64) -> Result<AdvantageReport> {
    let params = SmallRangeParams::new(b.n, r)?;
    let perms = enumerate_permutations(b.n, budget)?;
    let small = enumerate_small_range_support(params, budget)?;
    let mut rep = report(
        b,
        r,
        Method::Exact,
        exact_side(b, &perms)?,
        exact_side(b, &small)?,
    );
    rep.perm_support = Some(perms.len());
    rep.small_range_support = Some(small.len());
    Ok(rep)
}

/// Monte Carlo advantage from `samples` independent draws per side. Draw `s`
/// of the permutation side uses seed `derive_seed(seed, 2s)`, of the `D_r`
/// side `derive_seed(seed, 2s + 1)`.
pub fn advantage_monte_carlo(
    b: &Distinguisher,
    r: usize,
    samples: u64,
    seed: u64,
    jobs: Option<usize>,
) -> Result<AdvantageReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let params = SmallRangeParams::new(b.n, r)?;
    let draws = with_jobs(jobs, || {
        (0..samples)
            .into_par_iter()
            .map(|s| {
                let pi = sample_permutation(b.n, &mut rng_from_seed(derive_seed(seed, 2 * s)))?;
                let c =
                    sample_small_range(params, &mut rng_from_seed(derive_seed(seed, 2 * s + 1)));
                Ok((accept_prob(b, &pi)?, accept_prob(b, &c)?))
            })
            .collect::<Result<Vec<(f64, f64)>>>()
    })??;
    let side = |pick: fn(&(f64, f64)) -> f64| {
        let p1: Vec<f64> = draws.iter().map(pick).collect();
        let p0: Vec<f64> = p1.iter().map(|p| 1.0 - p).collect();
        let (m1, se) = mean_and_se(&p1);
        let (m0, _) = mean_and_se(&p0);
        SideStats {
            p0: m0,
            p1: m1,
            std_error: se,
        }
    };
    let mut rep = report(b, r, Method::MonteCarlo, side(|d| d.0), side(|d| d.1));
    rep.samples = Some(samples);
    rep.seed = Some(seed);
    Ok(rep)
}

/// Reports for a list of `r` values plus any warnings raised along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub reports: Vec<AdvantageReport>,
    pub warnings: Vec<String>,
}

/// One report per distinct `r` (first occurrence order), all sharing `seed`.
pub fn sweep_r(
    b: &Distinguisher,
    r_values: &[usize],
    samples: u64,
    seed: u64,
    method: Method,
    budget: u64,
    jobs: Option<usize>,
) -> Result<Sweep> {
    if let Some(&bad) = r_values.iter().find(|&&r| r == 0 || r > b.n) {
        return Err(Error::InvalidParameter(format!(
            "r = {bad} outside [1, n] = [1, {}]",
            b.n
        )));
    }
    let mut warnings = Vec::new();
    let mut distinct: Vec<usize> = Vec::new();
    for &r in r_values {
        if distinct.contains(&r) {
            warnings.push(format!("duplicate r = {r} ignored"));
        } else {
            distinct.push(r);
        }
    }
    let reports = distinct
        .into_iter()
        .map(|r| match method {
            Method::Exact => advantage_exact(b, r, budget),
            Method::MonteCarlo => advantage_monte_carlo(b, r, samples, seed, jobs),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { reports, warnings })
}
