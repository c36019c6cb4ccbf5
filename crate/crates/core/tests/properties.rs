use proptest::prelude::*;
use qsymlab_core::compiler::{majority3_prob, r_from_q};
use qsymlab_core::distributions::{rng_from_seed, sample_small_range, SmallRangeParams};
use qsymlab_core::domain::{
    compose_input, is_symmetric_first_type, is_symmetric_second_type, BooleanFunctionTable,
    IndexFunction, InputString,
};
use qsymlab_core::oracles::{standard_oracle, QuantumOracle};
use qsymlab_core::statevector::{
    new_basis_state, Matrix, OracleCall, RegisterLayout, State, VALIDITY_TOL,
};

fn index_function(n: usize) -> impl Strategy<Value = IndexFunction> {
    prop::collection::vec(0..n, n).prop_map(|v| IndexFunction::new(v).unwrap())
}

fn input_string(n: usize, m: usize) -> impl Strategy<Value = InputString> {
    prop::collection::vec(0..m, n).prop_map(move |v| InputString::new(m, v).unwrap())
}

fn sized_triple() -> impl Strategy<Value = (InputString, IndexFunction, IndexFunction)> {
    (1usize..=6, 1usize..=5)
        .prop_flat_map(|(n, m)| (input_string(n, m), index_function(n), index_function(n)))
}

proptest! {
    #[test]
    fn composition_is_associative((x, g, h) in sized_triple()) {
        let left = compose_input(&compose_input(&x, &g).unwrap(), &h).unwrap();
        let right = compose_input(&x, &g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn full_image_iff_injective(g in (1usize..=7).prop_flat_map(index_function)) {
        prop_assert_eq!(g.image().len() == g.n(), g.is_injective());
    }

    #[test]
    fn small_range_samples_respect_image_bound(n in 1usize..=20, r_frac in 0.0f64..1.0, seed: u64) {
        let r = 1 + ((n - 1) as f64 * r_frac) as usize;
        let p = SmallRangeParams::new(n, r).unwrap();
        let mut rng = rng_from_seed(seed);
        for _ in 0..20 {
            prop_assert!(sample_small_range(p, &mut rng).image().len() <= r);
        }
    }

    #[test]
    fn standard_oracle_preserves_norm_and_is_a_permutation(
        (x, d_extra, seed) in (1usize..=5, 1usize..=4)
            .prop_flat_map(|(n, m)| (input_string(n, m), 0usize..2, any::<u64>()))
    ) {
        let n = x.n();
        let layout = RegisterLayout::new(vec![2 + d_extra, n, x.m()]).unwrap();
        let call = OracleCall { index_reg: 1, value_reg: 2 };
        let mut oracle = standard_oracle(&x);
        let perm = oracle.basis_permutation(&layout, call, false).unwrap();
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            prop_assert!(!seen[p]);
            seen[p] = true;
        }
        let mut rng = rng_from_seed(seed);
        let mut state = new_basis_state(&layout);
        state.apply_unitary(&Matrix::random_unitary(layout.total_dim(), &mut rng), &[0, 1, 2]).unwrap();
        oracle.apply(&mut state, call).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < VALIDITY_TOL);
    }

    #[test]
    fn unitary_round_trip(dims in prop::collection::vec(1usize..=3, 1..=3), seed: u64) {
        let layout = RegisterLayout::new(dims.clone()).unwrap();
        let mut rng = rng_from_seed(seed);
        let all: Vec<usize> = (0..dims.len()).collect();
        let mut state = State::basis(&layout, 0).unwrap();
        state.apply_unitary(&Matrix::random_unitary(layout.total_dim(), &mut rng), &all).unwrap();
        let before = state.clone();
        let target = vec![dims.len() - 1];
        let u = Matrix::random_unitary(dims[dims.len() - 1], &mut rng);
        state.apply_unitary(&u, &target).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < VALIDITY_TOL);
        state.apply_unitary(&u.dagger(), &target).unwrap();
        for (a, b) in state.amplitudes().iter().zip(before.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn majority_is_monotone_with_fixed_points(p in 0.0f64..=1.0) {
        let a = majority3_prob(p).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        // Pushes away from 1/2 on both sides.
        if p >= 0.5 {
            prop_assert!(a >= p - 1e-15);
        } else {
            prop_assert!(a <= p + 1e-15);
        }
    }

    #[test]
    fn r_from_q_covers_six_q(q in 1usize..50, lambda in 0.5f64..20.0) {
        let r = r_from_q(q, lambda).unwrap();
        prop_assert!(6.0 * q as f64 <= lambda * (r as f64).cbrt() * (1.0 + 1e-9));
    }
}

/// Every table on a tiny domain: second-type symmetry implies first-type.
#[test]
fn second_type_implies_first_type_exhaustively() {
    let (n, m) = (2usize, 2usize);
    let inputs: Vec<Vec<usize>> = (0..4).map(|b| vec![b >> 1, b & 1]).collect();
    // Each input is either outside S, or in S with output 0 or 1.
    for code in 0..3usize.pow(inputs.len() as u32) {
        let mut c = code;
        let mut entries = Vec::new();
        for x in &inputs {
            match c % 3 {
                0 => {}
                v => entries.push((x.clone(), (v - 1) as u8)),
            }
            c /= 3;
        }
        let f = BooleanFunctionTable::new(n, m, entries).unwrap();
        if is_symmetric_second_type(&f).unwrap() {
            assert!(is_symmetric_first_type(&f).unwrap(), "{f:?}");
        }
    }
}

/// Associativity checked on every triple at n = 3, M = 2.
#[test]
fn composition_is_associative_exhaustively() {
    let n = 3;
    let fns: Vec<IndexFunction> = (0..27)
        .map(|c: usize| IndexFunction::new(vec![c % 3, (c / 3) % 3, c / 9]).unwrap())
        .collect();
    for xb in 0..8usize {
        let x = InputString::new(2, (0..n).map(|i| (xb >> i) & 1).collect()).unwrap();
        for g in &fns {
            for h in &fns {
                let left = compose_input(&compose_input(&x, g).unwrap(), h).unwrap();
                assert_eq!(left, compose_input(&x, &g.compose(h).unwrap()).unwrap());
            }
        }
    }
}
