//! One-shot property suite at `n <= 4`.
//!
//! The gadget is supplied by the caller so that a deliberately broken gadget
//! can be shown to fail the suite.

use num_rational::BigRational;
use qsymlab_core::compiler::{
    amplify_majority3, emulate, exact_success, majority3_prob, majority3_prob_exact, query_image,
    with_gadget_ancilla,
};
use qsymlab_core::disting::advantage_exact;
use qsymlab_core::distributions::{
    enumerate_small_range_support, rng_from_seed, sample_small_range, SmallRangeParams,
};
use qsymlab_core::domain::{
    compose_input, first_type_witness, is_symmetric_first_type, is_symmetric_second_type,
    BooleanFunctionTable, IndexFunction, InputString, Permutations,
};
use qsymlab_core::oracles::{
    composed_oracle, oracle_matrix, standard_oracle, ClassicalOracle, QuantumOracle,
};
use qsymlab_core::statevector::{run, OracleCall, QueryProcedure, RegisterLayout};
use qsymlab_core::zoo;
use rand::Rng;

/// Builds an oracle for `x∘g` from `x`, `g` and the ancilla register index.
pub type GadgetBuilder =
    dyn Fn(&InputString, &IndexFunction, usize) -> qsymlab_core::Result<Box<dyn QuantumOracle>>;

pub fn default_gadget(
    x: &InputString,
    g: &IndexFunction,
    ancilla: usize,
) -> qsymlab_core::Result<Box<dyn QuantumOracle>> {
    Ok(Box::new(composed_oracle(
        standard_oracle(x),
        standard_oracle(g),
        ancilla,
    )?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub checks: Vec<CheckResult>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<width$}  {}\n", c.name, c.detail));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

type CheckOutcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> CheckOutcome + 'a>);

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run_suite(gadget: &GadgetBuilder) -> SuiteOutcome {
    let checks: Vec<Check<'_>> = vec![
        ("gadget-exactness", Box::new(|| gadget_exactness(gadget))),
        ("gadget-lifted-dj", Box::new(|| gadget_lifted_dj(gadget))),
        ("amplification-20/27", Box::new(amplification_twenty_27ths)),
        ("amplification-law", Box::new(amplification_law)),
        ("oracle-permutation", Box::new(oracle_permutation)),
        (
            "composition-associativity",
            Box::new(composition_associativity),
        ),
        (
            "dj-permutation-invariance",
            Box::new(dj_permutation_invariance),
        ),
        ("symmetry-checker", Box::new(symmetry_checker)),
        (
            "second-type-implies-first",
            Box::new(second_type_implies_first),
        ),
        ("small-range-image-bound", Box::new(image_bound)),
        ("compiler-exactness", Box::new(compiler_exactness)),
        ("compiled-dj-constant", Box::new(compiled_dj_constant)),
        ("zero-query-advantage", Box::new(zero_query_advantage)),
    ];
    let checks = checks
        .into_iter()
        .map(|(name, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
            }
        })
        .collect();
    SuiteOutcome { checks }
}

const CALL: OracleCall = OracleCall {
    index_reg: 0,
    value_reg: 1,
};

fn random_input<R: Rng>(n: usize, m: usize, rng: &mut R) -> InputString {
    InputString::new(m, (0..n).map(|_| rng.gen_range(0..m)).collect()).expect("valid input")
}

fn random_index<R: Rng>(n: usize, rng: &mut R) -> IndexFunction {
    IndexFunction::new((0..n).map(|_| rng.gen_range(0..n)).collect()).expect("valid index function")
}

fn gadget_exactness(gadget: &GadgetBuilder) -> CheckOutcome {
    let mut rng = rng_from_seed(11);
    let mut pairs = 0;
    for n in 1..=4 {
        for m in 1..=3 {
            for _ in 0..40 {
                let x = random_input(n, m, &mut rng);
                let g = random_index(n, &mut rng);
                let layout = RegisterLayout::new(vec![n, m, n]).map_err(fail)?;
                let zero_ancilla = |b: usize| layout.digit(b, 2) == 0;
                let mut oracle = gadget(&x, &g, 2).map_err(fail)?;
                let got =
                    oracle_matrix(oracle.as_mut(), &layout, CALL, zero_ancilla).map_err(fail)?;
                let xg = compose_input(&x, &g).map_err(fail)?;
                let want = oracle_matrix(&mut standard_oracle(&xg), &layout, CALL, zero_ancilla)
                    .map_err(fail)?;
                let dev = got.max_abs_diff(&want);
                if dev > 1e-12 {
                    return Err(format!(
                        "x = {:?}, g = {:?}: deviation {dev:e}",
                        x.values(),
                        g.values()
                    ));
                }
                let calls = (n * m) as u64;
                let c = oracle.counters();
                if (c.x_queries, c.g_queries) != (calls, 2 * calls) {
                    return Err(format!(
                        "counters (x: {}, g: {}) after {calls} calls",
                        c.x_queries, c.g_queries
                    ));
                }
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "{pairs} pairs, deviation <= 1e-12, counters (g: 2, x: 1) per call"
    ))
}

fn gadget_lifted_dj(gadget: &GadgetBuilder) -> CheckOutcome {
    let dj = zoo::deutsch_jozsa(4).map_err(fail)?;
    let (lifted, ancilla) = with_gadget_ancilla(&dj.algorithm, 4).map_err(fail)?;
    let mut rng = rng_from_seed(12);
    for _ in 0..30 {
        let x = random_input(4, 2, &mut rng);
        let g = random_index(4, &mut rng);
        let mut oracle = gadget(&x, &g, ancilla).map_err(fail)?;
        let via = run(&lifted, oracle.as_mut()).map_err(fail)?;
        let direct = run(
            &dj.algorithm,
            &mut standard_oracle(&compose_input(&x, &g).map_err(fail)?),
        )
        .map_err(fail)?;
        if (via.p1 - direct.p1).abs() > 1e-12 {
            return Err(format!("g = {:?}: {} vs {}", g.values(), via.p1, direct.p1));
        }
    }
    Ok("30 oracles agree within 1e-12".into())
}

fn amplification_twenty_27ths() -> CheckOutcome {
    let two_thirds = BigRational::new(2.into(), 3.into());
    let exact = majority3_prob_exact(&two_thirds).map_err(fail)?;
    if exact != BigRational::new(20.into(), 27.into()) {
        return Err(format!("maj3(2/3) = {exact}"));
    }
    let coin = zoo::fourier_coin(3, 2).map_err(fail)?;
    let base = run(
        &coin,
        &mut standard_oracle(&IndexFunction::identity(1).map_err(fail)?),
    )
    .map_err(fail)?;
    let amplified = amplify_majority3(&coin)
        .run(&mut standard_oracle(
            &IndexFunction::identity(1).map_err(fail)?,
        ))
        .map_err(fail)?;
    if (amplified.p1 - 20.0 / 27.0).abs() > 1e-9 {
        return Err(format!("amplified 2/3 coin succeeds with {}", amplified.p1));
    }
    Ok(format!(
        "maj3(2/3) = 20/27 exactly; base {:.12} -> amplified {:.12}",
        base.p1, amplified.p1
    ))
}

fn amplification_law() -> CheckOutcome {
    let grover = zoo::grover_unique_or(4, 1).map_err(fail)?;
    let mut rng = rng_from_seed(13);
    for _ in 0..20 {
        let x = random_input(4, 2, &mut rng);
        let base = run(&grover.algorithm, &mut standard_oracle(&x)).map_err(fail)?;
        let amp = amplify_majority3(&grover.algorithm)
            .run(&mut standard_oracle(&x))
            .map_err(fail)?;
        let want = majority3_prob(base.p1).map_err(fail)?;
        if (amp.p1 - want).abs() > 1e-9 {
            return Err(format!("x = {:?}: {} vs maj3 {}", x.values(), amp.p1, want));
        }
    }
    Ok("20 oracles match maj3(p) within 1e-9".into())
}

fn oracle_permutation() -> CheckOutcome {
    let mut rng = rng_from_seed(14);
    for n in 1..=4 {
        for m in 1..=3 {
            let x = random_input(n, m, &mut rng);
            let layout = RegisterLayout::new(vec![n, m]).map_err(fail)?;
            let oracle = standard_oracle(&x);
            let fwd = oracle
                .basis_permutation(&layout, CALL, false)
                .map_err(fail)?;
            let inv = oracle
                .basis_permutation(&layout, CALL, true)
                .map_err(fail)?;
            let mut seen = vec![false; fwd.len()];
            for (b, &p) in fwd.iter().enumerate() {
                if seen[p] || inv[p] != b {
                    return Err(format!("x = {:?} is not a bijection", x.values()));
                }
                seen[p] = true;
            }
        }
    }
    Ok("bijective with matching inverse for n <= 4, M <= 3".into())
}

fn composition_associativity() -> CheckOutcome {
    let fns: Vec<IndexFunction> = (0..27usize)
        .map(|c| IndexFunction::new(vec![c % 3, (c / 3) % 3, c / 9]).expect("valid"))
        .collect();
    for xb in 0..8usize {
        let x = InputString::new(2, (0..3).map(|i| (xb >> i) & 1).collect()).map_err(fail)?;
        for g in &fns {
            let xg = compose_input(&x, g).map_err(fail)?;
            for h in &fns {
                let left = compose_input(&xg, h).map_err(fail)?;
                let right = compose_input(&x, &g.compose(h).map_err(fail)?).map_err(fail)?;
                if left != right {
                    return Err(format!("g = {:?}, h = {:?}", g.values(), h.values()));
                }
            }
        }
    }
    Ok("all 5832 triples at n = 3".into())
}

fn dj_permutation_invariance() -> CheckOutcome {
    let dj = zoo::deutsch_jozsa(4).map_err(fail)?;
    let mut count = 0;
    for (x, fx) in dj.function.entries() {
        let x = InputString::new(2, x.to_vec()).map_err(fail)?;
        for pi in Permutations::new(4) {
            let pi = IndexFunction::new(pi).map_err(fail)?;
            let xp = compose_input(&x, &pi).map_err(fail)?;
            let p = run(&dj.algorithm, &mut standard_oracle(&xp))
                .map_err(fail)?
                .prob(fx);
            if (p - 1.0).abs() > 1e-9 {
                return Err(format!("x = {:?}, pi = {:?}: {p}", x.values(), pi.values()));
            }
            count += 1;
        }
    }
    Ok(format!("{count} (x, pi) pairs succeed with probability 1"))
}

fn symmetry_checker() -> CheckOutcome {
    let dj = zoo::deutsch_jozsa(4).map_err(fail)?;
    if !is_symmetric_first_type(&dj.function).map_err(fail)? {
        return Err("DJ reported asymmetric".into());
    }
    let dictator =
        BooleanFunctionTable::from_predicate(3, 2, |x| Some(x[0] as u8)).map_err(fail)?;
    match first_type_witness(&dictator).map_err(fail)? {
        Some(w) => Ok(format!(
            "DJ symmetric; dictator witness x = {:?}, pi = {:?}",
            w.x, w.pi
        )),
        None => Err("dictator reported symmetric".into()),
    }
}

fn second_type_implies_first() -> CheckOutcome {
    let inputs: Vec<Vec<usize>> = (0..4).map(|b| vec![b >> 1, b & 1]).collect();
    for code in 0..81usize {
        let mut c = code;
        let mut entries = Vec::new();
        for x in &inputs {
            if c % 3 != 0 {
                entries.push((x.clone(), (c % 3 - 1) as u8));
            }
            c /= 3;
        }
        let f = BooleanFunctionTable::new(2, 2, entries).map_err(fail)?;
        if is_symmetric_second_type(&f).map_err(fail)?
            && !is_symmetric_first_type(&f).map_err(fail)?
        {
            return Err(format!("{f:?}"));
        }
    }
    Ok("all 81 partial tables at n = 2, M = 2".into())
}

fn image_bound() -> CheckOutcome {
    let mut rng = rng_from_seed(15);
    for r in 1..=4 {
        let p = SmallRangeParams::new(4, r).map_err(fail)?;
        for _ in 0..2000 {
            let c = sample_small_range(p, &mut rng);
            if c.image().len() > r {
                return Err(format!("r = {r}: image {:?}", c.image()));
            }
        }
    }
    let support = enumerate_small_range_support(SmallRangeParams::new(2, 2).map_err(fail)?, 1_000)
        .map_err(fail)?;
    let id = support.probability_of(&IndexFunction::identity(2).map_err(fail)?);
    let non_inj = support.mass_where(|g| !g.is_injective());
    let quarter = BigRational::new(1.into(), 4.into());
    let half = BigRational::new(1.into(), 2.into());
    if id != quarter || non_inj != half {
        return Err(format!(
            "n = r = 2: Pr[id] = {id}, non-injective mass = {non_inj}"
        ));
    }
    Ok("8000 draws within range; n = r = 2 gives Pr[id] = 1/4, non-injective 1/2".into())
}

fn compiler_exactness() -> CheckOutcome {
    let dj = zoo::deutsch_jozsa(4).map_err(fail)?;
    let amplified = amplify_majority3(&dj.algorithm);
    let mut rng = rng_from_seed(16);
    for _ in 0..30 {
        let x = random_input(4, 2, &mut rng);
        let c = random_index(4, &mut rng);
        let mut classical = ClassicalOracle::new(x.clone());
        let partial = query_image(&mut classical, &c).map_err(fail)?;
        if classical.queries() > c.image().len() as u64 {
            return Err(format!(
                "{} queries for |Im C| = {}",
                classical.queries(),
                c.image().len()
            ));
        }
        let (emulated, _) = emulate(&amplified, &partial, &c).map_err(fail)?;
        let xc = compose_input(&x, &c).map_err(fail)?;
        let direct = amplified.run(&mut standard_oracle(&xc)).map_err(fail)?;
        if emulated.p1.to_bits() != direct.p1.to_bits()
            || emulated.p0.to_bits() != direct.p0.to_bits()
        {
            return Err(format!(
                "C = {:?}: {} vs {}",
                c.values(),
                emulated.p1,
                direct.p1
            ));
        }
    }
    Ok("30 fixed C bit-identical to direct simulation".into())
}

fn compiled_dj_constant() -> CheckOutcome {
    let dj = zoo::deutsch_jozsa(4).map_err(fail)?;
    for bit in 0..2 {
        let x = InputString::constant(4, 2, bit).map_err(fail)?;
        for r in 1..=4 {
            let e = exact_success(&dj.algorithm, &x, 0, r, 1_000_000).map_err(fail)?;
            if (e.probability - 1.0).abs() > 1e-12 {
                return Err(format!("x = {bit}^4, r = {r}: {}", e.probability));
            }
        }
    }
    Ok("success 1 for r = 1..4".into())
}

fn zero_query_advantage() -> CheckOutcome {
    let b = zoo::zero_query(4).map_err(fail)?;
    for r in 1..=4 {
        let rep = advantage_exact(&b, r, 1_000_000).map_err(fail)?;
        if rep.advantage != 0.0 {
            return Err(format!("r = {r}: advantage {}", rep.advantage));
        }
    }
    Ok("advantage exactly 0 for r = 1..4".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let outcome = run_suite(&default_gadget);
        assert!(outcome.all_passed(), "{}", outcome.table());
        assert!(outcome
            .checks
            .iter()
            .any(|c| c.name == "amplification-20/27" && c.passed));
    }
}
