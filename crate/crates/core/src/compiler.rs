//! Turning a quantum query algorithm into a classical randomized one.
//!
//! One compiled run draws `C ~ D_r`, reads `x` classically on `Im(C)` only,
//! rebuilds the oracle of `x∘C` from those values, and simulates the
//! majority-of-three amplified algorithm against it exactly. The only contact
//! with `x` is through a [`ClassicalOracle`], so the classical query count is
//! `|Im(C)| <= r` by construction.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    derive_seed, enumerate_small_range_support, rng_from_seed, sample_small_range, SmallRangeParams,
};
use crate::domain::{DecisionFunction, IndexFunction, InputString};
use crate::error::{Error, Result};
use crate::oracles::{oracle_from_partial, ClassicalOracle, PartialTable, QuantumOracle};
use crate::statevector::{
    OutputDistribution, QueryAlgorithm, QueryProcedure, RegisterLayout, VALIDITY_TOL,
};
use crate::stats::{small_rational, wilson_interval, Interval, Z95};

/// Probability that at least two of three independent bits are 1 when each is
/// 1 with probability `p`.
/// Values within the validity tolerance of `[0, 1]` are clamped.
pub fn majority3_prob(p: f64) -> Result<f64> {
    if !(-VALIDITY_TOL..=1.0 + VALIDITY_TOL).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let p = p.clamp(0.0, 1.0);
    Ok(majority3_of(p, p, p))
}

/// [`majority3_prob`] over exact rationals.
pub fn majority3_prob_exact(p: &BigRational) -> Result<BigRational> {
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let three = BigRational::from_integer(BigInt::from(3));
    let p2 = p * p;
    Ok(&p2 * p + three * p2 * (BigRational::one() - p))
}

/// Majority of three independent bits with success probabilities `a`, `b`, `c`.
pub fn majority3_of(a: f64, b: f64, c: f64) -> f64 {
    a * b * c + a * b * (1.0 - c) + a * (1.0 - b) * c + (1.0 - a) * b * c
}

/// Three independent runs of `base`, output the majority bit.
///
/// Each run starts from a fresh state and queries the same oracle, so the
/// state dimension is that of `base` while the query count is `3q`.
#[derive(Debug, Clone, Copy)]
pub struct Majority3<'a, A: QueryProcedure + ?Sized> {
    base: &'a A,
}

pub fn amplify_majority3<A: QueryProcedure + ?Sized>(alg: &A) -> Majority3<'_, A> {
    Majority3 { base: alg }
}

impl<A: QueryProcedure + ?Sized> Majority3<'_, A> {
    pub fn base(&self) -> &A {
        self.base
    }
}

impl<A: QueryProcedure + ?Sized> QueryProcedure for Majority3<'_, A> {
    fn layout(&self) -> &RegisterLayout {
        self.base.layout()
    }

    fn query_count(&self) -> usize {
        3 * self.base.query_count()
    }

    fn run(&self, oracle: &mut dyn QuantumOracle) -> Result<OutputDistribution> {
        let a = self.base.run(oracle)?.p1;
        let b = self.base.run(oracle)?.p1;
        let c = self.base.run(oracle)?.p1;
        let p1 = majority3_of(a, b, c);
        Ok(OutputDistribution { p0: 1.0 - p1, p1 })
    }
}

/// `⌈216 q³ / Λ³⌉`, the range that makes `6q <= Λ r^{1/3}`.
pub fn r_from_q(q: usize, lambda_const: f64) -> Result<usize> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    if lambda_const <= 0.0 || !lambda_const.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Λ must be a positive real, got {lambda_const}"
        )));
    }
    let q = q as f64;
    let raw = 216.0 * q * q * q / lambda_const.powi(3);
    // Snap values within rounding noise of an integer before taking the ceiling.
    let nearest = raw.round();
    let r = if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    let r = r.max(1.0);
    if r > usize::MAX as f64 {
        return Err(Error::InvalidParameter("r overflows".into()));
    }
    let slack = lambda_const * r.cbrt() - 6.0 * q;
    assert!(
        slack >= -1e-9 * 6.0 * q,
        "6q <= Λ r^(1/3) violated: slack {slack}"
    );
    Ok(r as usize)
}

/// Re-declares `alg` on its layout plus one dimension-`n` register for the
/// composition gadget. Steps and output rule are unchanged; running the result
/// against a [`ComposedOracle`](crate::oracles::ComposedOracle) on that register
/// answers each call with `O_{x∘g}`, so the algorithm now queries `g`.
/// Returns the new algorithm and the ancilla's register index.
pub fn with_gadget_ancilla(alg: &QueryAlgorithm, n: usize) -> Result<(QueryAlgorithm, usize)> {
    let layout = alg.layout().with_register(n)?;
    let ancilla = alg.layout().num_registers();
    let lifted = QueryAlgorithm::new(layout, alg.steps().to_vec(), alg.output().clone())?;
    Ok((lifted, ancilla))
}

/// Outcome of one compiled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledRunResult {
    pub output_bit: u8,
    pub classical_queries_used: u64,
    pub sampled_c: IndexFunction,
    pub c_was_injective: bool,
    pub seed: u64,
    /// Exact probability that the emulated algorithm outputs 1 given `C`.
    pub p_output_one: f64,
    /// Oracle calls made against the rebuilt `O_{x∘C}` during emulation.
    pub emulated_queries: u64,
}

/// Step 2: learn `x` on `Im(c)` through counted classical queries.
pub fn query_image(x: &mut ClassicalOracle, c: &IndexFunction) -> Result<PartialTable> {
    if c.n() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "C has n = {} but x has n = {}",
            c.n(),
            x.n()
        )));
    }
    let mut table = PartialTable {
        m: x.m(),
        ..Default::default()
    };
    for i in c.image() {
        table.known.insert(i, x.query(i)?);
    }
    Ok(table)
}

/// Steps 3-4: rebuild `O_{x∘C}` from the partial table and simulate `alg`
/// against it. Returns the exact output distribution and the number of calls
/// made to the rebuilt oracle.
pub fn emulate<A: QueryProcedure + ?Sized>(
    alg: &A,
    x_on_image: &PartialTable,
    c: &IndexFunction,
) -> Result<(OutputDistribution, u64)> {
    let mut oracle = oracle_from_partial(x_on_image, c)?;
    let dist = alg.run(&mut oracle)?;
    Ok((dist, oracle.calls()))
}

fn check_r(n: usize, r: usize) -> Result<SmallRangeParams> {
    SmallRangeParams::new(n, r)
        .map_err(|_| Error::InvalidParameter(format!("r = {r} must lie in [1, n] = [1, {n}]")))
}

/// One run of the compiled classical algorithm against classical access to `x`.
/// `alg` is the base algorithm; it is amplified to majority-of-three here.
pub fn compile_and_run_with<A: QueryProcedure + ?Sized>(
    alg: &A,
    x: &mut ClassicalOracle,
    r: usize,
    seed: u64,
) -> Result<CompiledRunResult> {
    let params = check_r(x.n(), r)?;
    let mut rng = rng_from_seed(seed);
    let c = sample_small_range(params, &mut rng);
    let before = x.queries();
    let partial = query_image(x, &c)?;
    let used = x.queries() - before;
    let image_size = partial.known.len() as u64;
    assert!(
        used == image_size && used <= r as u64,
        "classical queries {used} exceed |Im(C)| = {image_size} or r = {r}"
    );
    let amplified = amplify_majority3(alg);
    let (dist, emulated_queries) = emulate(&amplified, &partial, &c)?;
    Ok(CompiledRunResult {
        output_bit: dist.sample(&mut rng),
        classical_queries_used: used,
        c_was_injective: c.is_injective(),
        sampled_c: c,
        seed,
        p_output_one: dist.p1,
        emulated_queries,
    })
}

/// [`compile_and_run_with`] on a fresh classical oracle for `x`.
pub fn compile_and_run_once<A: QueryProcedure + ?Sized>(
    alg: &A,
    x: &InputString,
    r: usize,
    seed: u64,
) -> Result<CompiledRunResult> {
    compile_and_run_with(alg, &mut ClassicalOracle::new(x.clone()), r, seed)
}

/// Monte Carlo estimate of the compiled algorithm's success probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub r: usize,
    pub expected_bit: u8,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci95: Interval,
    pub root_seed: u64,
    pub max_classical_queries: u64,
    pub mean_classical_queries: f64,
    pub injective_fraction: f64,
    pub runs: Vec<CompiledRunResult>,
}

/// Runs `trials` independent compiled runs (trial `t` uses seed
/// `derive_seed(root_seed, t)`), counting outputs equal to `expected_bit`.
/// `jobs` caps worker threads; results do not depend on it.
pub fn estimate_success<A: QueryProcedure + ?Sized>(
    alg: &A,
    x: &InputString,
    expected_bit: u8,
    r: usize,
    trials: u64,
    root_seed: u64,
    jobs: Option<usize>,
) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    check_r(x.n(), r)?;
    let work = || {
        (0..trials)
            .into_par_iter()
            .map(|t| compile_and_run_once(alg, x, r, derive_seed(root_seed, t)))
            .collect::<Result<Vec<_>>>()
    };
    let runs = with_jobs(jobs, work)??;
    let successes = runs
        .iter()
        .filter(|run| run.output_bit == expected_bit)
        .count() as u64;
    let max_classical_queries = runs
        .iter()
        .map(|r| r.classical_queries_used)
        .max()
        .unwrap_or(0);
    let total_queries: u64 = runs.iter().map(|r| r.classical_queries_used).sum();
    let injective = runs.iter().filter(|r| r.c_was_injective).count();
    Ok(SuccessEstimate {
        r,
        expected_bit,
        trials,
        successes,
        estimate: successes as f64 / trials as f64,
        ci95: wilson_interval(successes, trials, Z95),
        root_seed,
        max_classical_queries,
        mean_classical_queries: total_queries as f64 / trials as f64,
        injective_fraction: injective as f64 / trials as f64,
        runs,
    })
}

/// [`estimate_success`] with the target bit read from `f` at `x` (and nowhere else).
pub fn estimate_success_for<A: QueryProcedure + ?Sized>(
    f: &dyn DecisionFunction,
    alg: &A,
    x: &InputString,
    r: usize,
    trials: u64,
    root_seed: u64,
    jobs: Option<usize>,
) -> Result<SuccessEstimate> {
    let expected = f.evaluate(x)?;
    estimate_success(alg, x, expected, r, trials, root_seed, jobs)
}

pub(crate) fn with_jobs<T: Send>(
    jobs: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T> {
    match jobs {
        None => Ok(work()),
        Some(0) => Err(Error::InvalidParameter("jobs must be >= 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Success probability of the compiled algorithm averaged exactly over `D_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSuccess {
    pub r: usize,
    pub expected_bit: u8,
    pub probability: f64,
    /// `probability` as `num/den` when it is within 1e-12 of a fraction with
    /// denominator at most 10^6.
    pub probability_rational: Option<(i64, u64)>,
    pub support_size: usize,
    pub injective_mass: f64,
    pub success_given_injective: Option<f64>,
    pub success_given_non_injective: Option<f64>,
}

/// `E_{C ~ D_r} Pr[maj3(alg) on O_{x∘C} outputs expected_bit]`, enumerating the
/// full support of `D_r`.
pub fn exact_success<A: QueryProcedure + ?Sized>(
    alg: &A,
    x: &InputString,
    expected_bit: u8,
    r: usize,
    budget: u64,
) -> Result<ExactSuccess> {
    let params = check_r(x.n(), r)?;
    let support = enumerate_small_range_support(params, budget)?;
    let amplified = amplify_majority3(alg);
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let (mut total, mut inj, mut inj_mass, mut non_inj) = (0.0, 0.0, 0.0, 0.0);
    for (c, weight) in support.entries() {
        let mut oracle = ClassicalOracle::new(x.clone());
        let partial = query_image(&mut oracle, c)?;
        let key: Vec<usize> = c.values().iter().map(|i| partial.known[i]).collect();
        let p = match cache.get(&key) {
            Some(&p) => p,
            None => {
                let (dist, _) = emulate(&amplified, &partial, c)?;
                let p = dist.prob(expected_bit);
                cache.insert(key, p);
                p
            }
        };
        let w = weight.to_f64().unwrap_or(0.0);
        total += w * p;
        if c.is_injective() {
            inj += w * p;
            inj_mass += w;
        } else {
            non_inj += w * p;
        }
    }
    let non_inj_mass = 1.0 - inj_mass;
    Ok(ExactSuccess {
        r,
        expected_bit,
        probability: total,
        probability_rational: small_rational(total, 1_000_000, 1e-12),
        support_size: support.len(),
        injective_mass: inj_mass,
        success_given_injective: (inj_mass > 0.0).then(|| inj / inj_mass),
        success_given_non_injective: (non_inj_mass > 1e-15).then(|| non_inj / non_inj_mass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::compose_input;
    use crate::oracles::standard_oracle;
    use crate::statevector::run;
    use crate::zoo;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority3_prob_exact(&ratio(2, 3)).unwrap(), ratio(20, 27));
        assert_eq!(majority3_prob(0.0).unwrap(), 0.0);
        assert_eq!(majority3_prob(1.0).unwrap(), 1.0);
        assert!((majority3_prob(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((majority3_prob(0.9).unwrap() - 0.972).abs() < 1e-12);
        assert!(majority3_prob(1.5).is_err());
        assert!(majority3_prob_exact(&ratio(-1, 3)).is_err());
    }

    #[test]
    fn r_from_q_examples() {
        assert_eq!(r_from_q(1, 6.0).unwrap(), 1);
        assert_eq!(r_from_q(2, 6.0).unwrap(), 8);
        assert_eq!(r_from_q(1, 1.0).unwrap(), 216);
        assert!(r_from_q(1, 0.0).is_err());
        assert!(r_from_q(1, -2.0).is_err());
        assert!(r_from_q(0, 6.0).is_err());
        let mut last = 0;
        for q in 1..40 {
            let r = r_from_q(q, 2.5).unwrap();
            assert!(r >= last);
            assert!(6.0 * q as f64 <= 2.5 * (r as f64).cbrt() + 1e-9);
            last = r;
        }
    }

    #[test]
    fn amplified_query_count_triples() {
        let dj = zoo::deutsch_jozsa(4).unwrap();
        assert_eq!(amplify_majority3(&dj.algorithm).query_count(), 3);
        let grover = zoo::grover_unique_or(4, 2).unwrap();
        let amp = amplify_majority3(&grover.algorithm);
        assert_eq!(amp.query_count(), 9);
        let mut o = standard_oracle(&InputString::new(2, vec![0, 1, 0, 0]).unwrap());
        amp.run(&mut o).unwrap();
        assert_eq!(o.calls(), 9);
    }

    #[test]
    fn amplified_coin() {
        let coin = zoo::fourier_coin(3, 2).unwrap();
        let mut o = standard_oracle(&IndexFunction::identity(1).unwrap());
        let p = amplify_majority3(&coin).run(&mut o).unwrap().p1;
        assert!((p - 20.0 / 27.0).abs() < 1e-9);
    }

    #[test]
    fn compiled_run_respects_query_budget() {
        let dj = zoo::deutsch_jozsa(8).unwrap();
        let x = InputString::new(2, vec![0, 1, 1, 0, 1, 0, 0, 1]).unwrap();
        for seed in 0..200 {
            let run = compile_and_run_once(&dj.algorithm, &x, 3, seed).unwrap();
            assert!(run.classical_queries_used <= 3);
            assert_eq!(
                run.classical_queries_used as usize,
                run.sampled_c.image().len()
            );
            assert_eq!(run.emulated_queries, 3);
        }
    }

    #[test]
    fn compiled_run_rejects_bad_r() {
        let dj = zoo::deutsch_jozsa(4).unwrap();
        let x = InputString::constant(4, 2, 0).unwrap();
        assert!(compile_and_run_once(&dj.algorithm, &x, 0, 1).is_err());
        assert!(compile_and_run_once(&dj.algorithm, &x, 5, 1).is_err());
    }

    #[test]
    fn compiled_run_is_reproducible() {
        let dj = zoo::deutsch_jozsa(4).unwrap();
        let x = InputString::new(2, vec![0, 0, 1, 1]).unwrap();
        let a = compile_and_run_once(&dj.algorithm, &x, 4, 99).unwrap();
        let b = compile_and_run_once(&dj.algorithm, &x, 4, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn emulation_equals_direct_simulation() {
        let dj = zoo::deutsch_jozsa(4).unwrap();
        let x = InputString::new(2, vec![1, 0, 1, 0]).unwrap();
        let c = IndexFunction::new(vec![2, 2, 1, 3]).unwrap();
        let partial = query_image(&mut ClassicalOracle::new(x.clone()), &c).unwrap();
        assert_eq!(partial.known.len(), 3);
        let amp = amplify_majority3(&dj.algorithm);
        let (emulated, _) = emulate(&amp, &partial, &c).unwrap();
        let direct = amp
            .run(&mut standard_oracle(&compose_input(&x, &c).unwrap()))
            .unwrap();
        assert_eq!(emulated, direct);
        let single = run(
            &dj.algorithm,
            &mut standard_oracle(&compose_input(&x, &c).unwrap()),
        )
        .unwrap();
        assert_eq!(
            emulated.p1.to_bits(),
            majority3_of(single.p1, single.p1, single.p1).to_bits()
        );
    }

    #[test]
    fn estimate_is_independent_of_job_count() {
        let dj = zoo::deutsch_jozsa(4).unwrap();
        let x = InputString::new(2, vec![0, 1, 0, 1]).unwrap();
        let a = estimate_success(&dj.algorithm, &x, 1, 3, 300, 5, Some(1)).unwrap();
        let b = estimate_success(&dj.algorithm, &x, 1, 3, 300, 5, Some(4)).unwrap();
        assert_eq!(a, b);
        assert!(estimate_success(&dj.algorithm, &x, 1, 3, 0, 5, None).is_err());
    }

    #[test]
    fn constant_entry_always_succeeds() {
        let e = zoo::constant_function(1, 4, 2).unwrap();
        let x = InputString::new(2, vec![1, 0, 0, 1]).unwrap();
        let est = estimate_success_for(&e.function, &e.algorithm, &x, 2, 200, 3, None).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert!(est.max_classical_queries <= 2);
    }

    #[test]
    fn exact_success_for_dj_balanced() {
        // Frozen from a brute-force rational computation: 51/64 at r = 4.
        let dj = zoo::deutsch_jozsa(4).unwrap();
        let x = InputString::new(2, vec![0, 0, 1, 1]).unwrap();
        let exact = exact_success(&dj.algorithm, &x, 1, 4, 1_000_000).unwrap();
        assert!((exact.probability - 51.0 / 64.0).abs() < 1e-12);
        assert_eq!(exact.probability_rational, Some((51, 64)));
        let r1 = exact_success(&dj.algorithm, &x, 1, 1, 1_000_000).unwrap();
        assert!(r1.probability.abs() < 1e-12);
    }
}
