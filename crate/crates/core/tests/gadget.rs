//! The composition gadget against the direct oracle of `x∘g`, and the query
//! counter laws of the lifted algorithm.

use qsymlab_core::compiler::{amplify_majority3, with_gadget_ancilla};
use qsymlab_core::distributions::rng_from_seed;
use qsymlab_core::domain::{compose_input, IndexFunction, InputString};
use qsymlab_core::oracles::{composed_oracle, oracle_matrix, standard_oracle, QuantumOracle};
use qsymlab_core::statevector::{run, OracleCall, QueryProcedure, RegisterLayout};
use qsymlab_core::zoo;
use rand::Rng;

const CALL: OracleCall = OracleCall {
    index_reg: 0,
    value_reg: 1,
};

fn gadget_deviation(x: &InputString, g: &IndexFunction) -> f64 {
    let n = x.n();
    let layout = RegisterLayout::new(vec![n, x.m(), n]).unwrap();
    let on_zero_ancilla = |b: usize| layout.digit(b, 2) == 0;
    let mut gadget = composed_oracle(standard_oracle(x), standard_oracle(g), 2).unwrap();
    let got = oracle_matrix(&mut gadget, &layout, CALL, on_zero_ancilla).unwrap();
    let mut direct = standard_oracle(&compose_input(x, g).unwrap());
    let want = oracle_matrix(&mut direct, &layout, CALL, on_zero_ancilla).unwrap();
    got.max_abs_diff(&want)
}

#[test]
fn gadget_is_exact_for_small_tables() {
    let mut rng = rng_from_seed(2024);
    for n in 1..=4usize {
        for m in 1..=4usize {
            for _ in 0..40 {
                let x = InputString::new(m, (0..n).map(|_| rng.gen_range(0..m)).collect()).unwrap();
                let g = IndexFunction::new((0..n).map(|_| rng.gen_range(0..n)).collect()).unwrap();
                assert!(gadget_deviation(&x, &g) <= 1e-12, "x = {x:?}, g = {g:?}");
            }
        }
    }
}

#[test]
fn gadget_is_exact_for_every_g_at_n3() {
    let x = InputString::new(3, vec![2, 0, 1]).unwrap();
    for code in 0..27usize {
        let g = IndexFunction::new(vec![code % 3, (code / 3) % 3, code / 9]).unwrap();
        assert!(gadget_deviation(&x, &g) <= 1e-12);
    }
}

#[test]
fn lifted_algorithm_matches_direct_run() {
    let dj = zoo::deutsch_jozsa(4).unwrap();
    let (lifted, ancilla) = with_gadget_ancilla(&dj.algorithm, 4).unwrap();
    assert_eq!(ancilla, 2);
    let x = InputString::new(2, vec![0, 1, 1, 0]).unwrap();
    let mut rng = rng_from_seed(5);
    for _ in 0..50 {
        let g = IndexFunction::new((0..4).map(|_| rng.gen_range(0..4)).collect()).unwrap();
        let mut gadget =
            composed_oracle(standard_oracle(&x), standard_oracle(&g), ancilla).unwrap();
        let via_gadget = run(&lifted, &mut gadget).unwrap();
        let direct = run(
            &dj.algorithm,
            &mut standard_oracle(&compose_input(&x, &g).unwrap()),
        )
        .unwrap();
        assert!((via_gadget.p1 - direct.p1).abs() <= 1e-12);
        let c = gadget.counters();
        assert_eq!((c.x_queries, c.g_queries), (1, 2));
    }
}

#[test]
fn amplified_lifted_algorithm_makes_6q_g_queries() {
    for iterations in 0..3 {
        let grover = zoo::grover_unique_or(4, iterations).unwrap();
        let q = grover.algorithm.query_count() as u64;
        let (lifted, ancilla) = with_gadget_ancilla(&grover.algorithm, 4).unwrap();
        let amplified = amplify_majority3(&lifted);
        assert_eq!(amplified.query_count() as u64, 3 * q);
        let x = InputString::new(2, vec![0, 0, 0, 1]).unwrap();
        let g = IndexFunction::new(vec![3, 1, 3, 0]).unwrap();
        let mut gadget =
            composed_oracle(standard_oracle(&x), standard_oracle(&g), ancilla).unwrap();
        amplified.run(&mut gadget).unwrap();
        let c = gadget.counters();
        assert_eq!(c.x_queries, 3 * q);
        assert_eq!(c.g_queries, 6 * q);
    }
}
