//! Dense statevector simulation over registers of arbitrary finite dimension.
//!
//! Basis states are indexed in mixed radix with register 0 as the most
//! significant digit. A [`QueryAlgorithm`] is a fixed sequence of unitaries and
//! oracle-call placeholders followed by one terminal measurement of a subset of
//! registers; the measured outcome is mapped to a single output bit.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::QuantumOracle;

/// Tolerance for unitarity and normalization checks.
pub const VALIDITY_TOL: f64 = 1e-9;
/// Tolerance for equality of results computed along two exact routes.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct RegisterLayout {
    dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for RegisterLayout {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        RegisterLayout::new(dims)
    }
}

impl From<RegisterLayout> for Vec<usize> {
    fn from(layout: RegisterLayout) -> Self {
        layout.dims
    }
}

impl RegisterLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("layout has no registers".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParameter("register of dimension 0".into()));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidParameter("total dimension overflows".into()))?;
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_registers(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, register: usize) -> usize {
        self.dims[register]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Place value of each register's digit.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Digit of `register` in basis index `basis`.
    pub fn digit(&self, basis: usize, register: usize) -> usize {
        let stride: usize = self.dims[register + 1..].iter().product();
        (basis / stride) % self.dims[register]
    }

    /// Returns a copy with one extra register appended; the new register's index
    /// is the old register count.
    pub fn with_register(&self, dim: usize) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.push(dim);
        Self::new(dims)
    }

    pub(crate) fn check_register(&self, register: usize) -> Result<()> {
        if register >= self.dims.len() {
            return Err(Error::OutOfRange {
                value: register,
                bound: self.dims.len(),
            });
        }
        Ok(())
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries do not form a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        Self::from_row_major(dim, rows.into_iter().flatten().collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    /// The permutation matrix sending basis state `j` to `perm[j]`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (col, &row) in perm.iter().enumerate() {
            if row >= dim {
                return Err(Error::OutOfRange {
                    value: row,
                    bound: dim,
                });
            }
            data[row * dim + col] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(self.data[c * n + r].conj());
            }
        }
        Self { dim: n, data }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, rhs.dim
            )));
        }
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        Ok(Matrix { dim: n, data })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let (a, b) = (self.dim, rhs.dim);
        let n = a * b;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r1 in 0..a {
            for c1 in 0..a {
                let s = self.data[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        data[(r1 * b + r2) * n + c1 * b + c2] = s * rhs.data[r2 * b + c2];
                    }
                }
            }
        }
        Matrix { dim: n, data }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U†U - I)_{rc}|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.data[k * n + r].conj() * self.data[k * n + c];
                }
                if r == c {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn check_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > VALIDITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// Haar-like random unitary by Gram–Schmidt on complex Gaussian columns.
    pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        while cols.len() < dim {
            let mut v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            for u in &cols {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= norm);
            cols.push(v);
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (c, col) in cols.iter().enumerate() {
            for (r, a) in col.iter().enumerate() {
                data[r * dim + c] = *a;
            }
        }
        Matrix { dim, data }
    }
}

/// A pure state over a [`RegisterLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    layout: RegisterLayout,
    amplitudes: Vec<Complex64>,
}

/// `|0...0⟩` on `layout`.
pub fn new_basis_state(layout: &RegisterLayout) -> State {
    State::basis(layout, 0).expect("index 0 is always a basis state")
}

impl State {
    pub fn basis(layout: &RegisterLayout, index: usize) -> Result<State> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::OutOfRange {
                value: index,
                bound: dim,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(State {
            layout: layout.clone(),
            amplitudes,
        })
    }

    pub fn from_amplitudes(layout: &RegisterLayout, amplitudes: Vec<Complex64>) -> Result<State> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let state = State {
            layout: layout.clone(),
            amplitudes,
        };
        let deviation = (state.norm_sqr() - 1.0).abs();
        if deviation > VALIDITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "state is not normalized (|norm² - 1| = {deviation:e})"
            )));
        }
        Ok(state)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `u ⊗ I` where `u` acts on `targets` (first target most significant).
    pub fn apply_unitary(&mut self, u: &Matrix, targets: &[usize]) -> Result<()> {
        self.check_targets(u, targets)?;
        u.check_unitary()?;
        self.apply_unitary_unchecked(u, targets);
        Ok(())
    }

    fn check_targets(&self, u: &Matrix, targets: &[usize]) -> Result<()> {
        check_distinct_registers(&self.layout, targets)?;
        let sub: usize = targets.iter().map(|&t| self.layout.dim(t)).product();
        if sub != u.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{0}x{0} matrix on targets of total dimension {sub}",
                u.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn apply_unitary_unchecked(&mut self, u: &Matrix, targets: &[usize]) {
        let strides = self.layout.strides();
        let sub_dims: Vec<usize> = targets.iter().map(|&t| self.layout.dim(t)).collect();
        let k = u.dim();

        let mut offsets = Vec::with_capacity(k);
        let mut digits = vec![0usize; targets.len()];
        for _ in 0..k {
            offsets.push(
                digits
                    .iter()
                    .zip(targets)
                    .map(|(&d, &t)| d * strides[t])
                    .sum::<usize>(),
            );
            increment_digits(&mut digits, &sub_dims);
        }

        let mut gathered = vec![Complex64::new(0.0, 0.0); k];
        for base in 0..self.amplitudes.len() {
            if targets.iter().any(|&t| self.layout.digit(base, t) != 0) {
                continue;
            }
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base + off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let coeffs = &u.as_slice()[row * k..(row + 1) * k];
                self.amplitudes[base + off] =
                    coeffs.iter().zip(&gathered).map(|(c, a)| c * a).sum();
            }
        }
    }

    /// Moves the amplitude of basis state `b` to `perm(b)`. The caller
    /// guarantees `perm` is a bijection on basis indices.
    pub(crate) fn permute_basis(&mut self, perm: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            out[perm(b)] = *a;
        }
        self.amplitudes = out;
    }

    /// Total probability on basis states whose `register` digit is non-zero.
    pub fn weight_off_zero(&self, register: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| self.layout.digit(*b, register) != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

fn increment_digits(digits: &mut [usize], dims: &[usize]) {
    for (d, &radix) in digits.iter_mut().zip(dims).rev() {
        *d += 1;
        if *d < radix {
            return;
        }
        *d = 0;
    }
}

fn check_distinct_registers(layout: &RegisterLayout, registers: &[usize]) -> Result<()> {
    for (i, &r) in registers.iter().enumerate() {
        layout.check_register(r)?;
        if registers[..i].contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "register {r} listed twice"
            )));
        }
    }
    Ok(())
}

/// Placeholder for one query: `|i⟩|j⟩ -> |i⟩|j + table[i]⟩` on the two registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCall {
    pub index_reg: usize,
    pub value_reg: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Unitary { matrix: Matrix, targets: Vec<usize> },
    Oracle(OracleCall),
}

/// Terminal measurement of `registers`; the outcome, read as a mixed-radix
/// number (first register most significant), indexes into `map`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRule {
    pub registers: Vec<usize>,
    pub map: Vec<u8>,
}

impl OutputRule {
    /// Output `bit` regardless of the state.
    pub fn constant(bit: u8) -> Self {
        Self {
            registers: Vec::new(),
            map: vec![bit],
        }
    }

    /// Output 1 iff `register` is measured in one of `accepting`.
    pub fn accept_values(register_dim: usize, register: usize, accepting: &[usize]) -> Self {
        let map = (0..register_dim)
            .map(|v| accepting.contains(&v) as u8)
            .collect();
        Self {
            registers: vec![register],
            map,
        }
    }
}

/// Exact output distribution of a one-bit algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputDistribution {
    pub p0: f64,
    pub p1: f64,
}

impl OutputDistribution {
    pub fn prob(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.p0
        } else {
            self.p1
        }
    }

    /// Draws one bit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        (rng.gen::<f64>() < self.p1) as u8
    }
}

/// A one-bit quantum query algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::AlgorithmWire", into = "wire::AlgorithmWire")]
pub struct QueryAlgorithm {
    layout: RegisterLayout,
    steps: Vec<Step>,
    output: OutputRule,
}

impl QueryAlgorithm {
    pub fn new(layout: RegisterLayout, steps: Vec<Step>, output: OutputRule) -> Result<Self> {
        for step in &steps {
            match step {
                Step::Unitary { matrix, targets } => {
                    check_distinct_registers(&layout, targets)?;
                    let sub: usize = targets.iter().map(|&t| layout.dim(t)).product();
                    if sub != matrix.dim() {
                        return Err(Error::DimensionMismatch(format!(
                            "{0}x{0} matrix on targets of total dimension {sub}",
                            matrix.dim()
                        )));
                    }
                    matrix.check_unitary()?;
                }
                Step::Oracle(call) => {
                    check_distinct_registers(&layout, &[call.index_reg, call.value_reg])?;
                }
            }
        }
        check_distinct_registers(&layout, &output.registers)?;
        let outcomes: usize = output.registers.iter().map(|&r| layout.dim(r)).product();
        if output.map.len() != outcomes {
            return Err(Error::DimensionMismatch(format!(
                "output map has {} entries for {outcomes} outcomes",
                output.map.len()
            )));
        }
        if let Some(&bad) = output.map.iter().find(|&&b| b > 1) {
            return Err(Error::OutOfRange {
                value: bad as usize,
                bound: 2,
            });
        }
        Ok(Self {
            layout,
            steps,
            output,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn output(&self) -> &OutputRule {
        &self.output
    }

    /// Number of oracle calls, `q`.
    pub fn query_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Oracle(_)))
            .count()
    }

    /// Runs every step from `|0...0⟩`, calling `observe` after each step.
    pub fn evolve_with(
        &self,
        oracle: &mut dyn QuantumOracle,
        mut observe: impl FnMut(usize, &State),
    ) -> Result<State> {
        let mut state = new_basis_state(&self.layout);
        for (k, step) in self.steps.iter().enumerate() {
            match step {
                Step::Unitary { matrix, targets } => state.apply_unitary_unchecked(matrix, targets),
                Step::Oracle(call) => oracle.apply(&mut state, *call)?,
            }
            observe(k, &state);
        }
        Ok(state)
    }

    pub fn final_state(&self, oracle: &mut dyn QuantumOracle) -> Result<State> {
        self.evolve_with(oracle, |_, _| {})
    }

    /// Born-rule output distribution of the final state.
    pub fn output_distribution(&self, state: &State) -> OutputDistribution {
        let mut p = [0.0f64; 2];
        let regs = &self.output.registers;
        for (b, a) in state.amplitudes().iter().enumerate() {
            let outcome = regs.iter().fold(0usize, |acc, &r| {
                acc * self.layout.dim(r) + self.layout.digit(b, r)
            });
            p[self.output.map[outcome] as usize] += a.norm_sqr();
        }
        OutputDistribution { p0: p[0], p1: p[1] }
    }
}

/// Exact output distribution of `alg` against `oracle`; advances the oracle's
/// counters once per oracle call.
pub fn run(alg: &QueryAlgorithm, oracle: &mut dyn QuantumOracle) -> Result<OutputDistribution> {
    let state = alg.final_state(oracle)?;
    Ok(alg.output_distribution(&state))
}

pub fn query_count(alg: &QueryAlgorithm) -> usize {
    alg.query_count()
}

/// Anything that queries an oracle and emits one bit with an exact distribution.
pub trait QueryProcedure: Sync {
    fn layout(&self) -> &RegisterLayout;
    fn query_count(&self) -> usize;
    fn run(&self, oracle: &mut dyn QuantumOracle) -> Result<OutputDistribution>;
}

impl QueryProcedure for QueryAlgorithm {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn query_count(&self) -> usize {
        QueryAlgorithm::query_count(self)
    }

    fn run(&self, oracle: &mut dyn QuantumOracle) -> Result<OutputDistribution> {
        run(self, oracle)
    }
}

mod wire {
    use serde::{Deserialize, Serialize};

    use super::*;

    #[derive(Serialize, Deserialize)]
    pub struct AlgorithmWire {
        registers: RegisterLayout,
        steps: Vec<StepWire>,
        output: OutputRule,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "snake_case")]
    enum StepWire {
        Unitary {
            targets: Vec<usize>,
            matrix: Vec<[f64; 2]>,
        },
        Oracle(OracleCall),
    }

    impl TryFrom<AlgorithmWire> for QueryAlgorithm {
        type Error = Error;

        fn try_from(wire: AlgorithmWire) -> Result<Self> {
            let steps = wire
                .steps
                .into_iter()
                .map(|s| match s {
                    StepWire::Oracle(call) => Ok(Step::Oracle(call)),
                    StepWire::Unitary { targets, matrix } => {
                        let dim = (matrix.len() as f64).sqrt().round() as usize;
                        let data = matrix
                            .into_iter()
                            .map(|[re, im]| Complex64::new(re, im))
                            .collect();
                        Ok(Step::Unitary {
                            matrix: Matrix::from_row_major(dim, data)?,
                            targets,
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            QueryAlgorithm::new(wire.registers, steps, wire.output)
        }
    }

    impl From<QueryAlgorithm> for AlgorithmWire {
        fn from(alg: QueryAlgorithm) -> Self {
            AlgorithmWire {
                registers: alg.layout,
                steps: alg
                    .steps
                    .into_iter()
                    .map(|s| match s {
                        Step::Oracle(call) => StepWire::Oracle(call),
                        Step::Unitary { matrix, targets } => StepWire::Unitary {
                            targets,
                            matrix: matrix.data.iter().map(|a| [a.re, a.im]).collect(),
                        },
                    })
                    .collect(),
                output: alg.output,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::oracles::StandardOracle;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hadamard() -> Matrix {
        Matrix::from_rows(vec![
            vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
            vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
        ])
        .unwrap()
    }

    #[test]
    fn basis_state_examples() {
        let s = new_basis_state(&RegisterLayout::new(vec![2]).unwrap());
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0)]);
        let s = new_basis_state(&RegisterLayout::new(vec![2, 3]).unwrap());
        assert_eq!(s.amplitudes().len(), 6);
        assert_eq!(s.amplitudes()[0], c(1.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == c(0.0)));
        let s = new_basis_state(&RegisterLayout::new(vec![4]).unwrap());
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn layout_rejects_degenerate_dims() {
        assert!(RegisterLayout::new(vec![]).is_err());
        assert!(RegisterLayout::new(vec![2, 0]).is_err());
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = new_basis_state(&RegisterLayout::new(vec![2]).unwrap());
        s.apply_unitary(&hadamard(), &[0]).unwrap();
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2)).norm() < EXACT_TOL);
        assert!((s.amplitudes()[1] - c(FRAC_1_SQRT_2)).norm() < EXACT_TOL);
    }

    #[test]
    fn identity_leaves_state_alone() {
        let layout = RegisterLayout::new(vec![3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = new_basis_state(&layout);
        s.apply_unitary(&Matrix::random_unitary(6, &mut rng), &[0, 1])
            .unwrap();
        let before = s.clone();
        s.apply_unitary(&Matrix::identity(3), &[0]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn unitary_then_dagger_restores_state() {
        let layout = RegisterLayout::new(vec![2, 3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = new_basis_state(&layout);
        s.apply_unitary(&Matrix::random_unitary(12, &mut rng), &[0, 1, 2])
            .unwrap();
        let before = s.clone();
        let u = Matrix::random_unitary(6, &mut rng);
        s.apply_unitary(&u, &[1, 2]).unwrap();
        s.apply_unitary(&u.dagger(), &[1, 2]).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < EXACT_TOL);
        }
    }

    #[test]
    fn target_order_matches_kron() {
        // Applying A on [0] and B on [1] equals A⊗B on [0, 1]; on [1, 0] it is B⊗A.
        let layout = RegisterLayout::new(vec![2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::random_unitary(2, &mut rng);
        let b = Matrix::random_unitary(3, &mut rng);
        let start = {
            let mut s = new_basis_state(&layout);
            s.apply_unitary(&Matrix::random_unitary(6, &mut rng), &[0, 1])
                .unwrap();
            s
        };
        let mut separate = start.clone();
        separate.apply_unitary(&a, &[0]).unwrap();
        separate.apply_unitary(&b, &[1]).unwrap();
        let mut joint = start.clone();
        joint.apply_unitary(&a.kron(&b), &[0, 1]).unwrap();
        let mut swapped = start;
        swapped.apply_unitary(&b.kron(&a), &[1, 0]).unwrap();
        for ((x, y), z) in separate
            .amplitudes()
            .iter()
            .zip(joint.amplitudes())
            .zip(swapped.amplitudes())
        {
            assert!((x - y).norm() < EXACT_TOL);
            assert!((x - z).norm() < EXACT_TOL);
        }
    }

    #[test]
    fn apply_unitary_errors() {
        let layout = RegisterLayout::new(vec![2, 3]).unwrap();
        let mut s = new_basis_state(&layout);
        assert!(matches!(
            s.apply_unitary(&Matrix::identity(2), &[1]),
            Err(Error::DimensionMismatch(_))
        ));
        let not_unitary =
            Matrix::from_rows(vec![vec![c(1.0), c(1.0)], vec![c(0.0), c(1.0)]]).unwrap();
        assert!(matches!(
            s.apply_unitary(&not_unitary, &[0]),
            Err(Error::NotUnitary { .. })
        ));
        assert!(s.apply_unitary(&Matrix::identity(4), &[0, 0]).is_err());
    }

    #[test]
    fn zero_step_constant_algorithm() {
        let alg = QueryAlgorithm::new(
            RegisterLayout::new(vec![2]).unwrap(),
            vec![],
            OutputRule::constant(1),
        )
        .unwrap();
        let mut oracle = StandardOracle::from_table(vec![0, 1], 2).unwrap();
        let d = run(&alg, &mut oracle).unwrap();
        assert_eq!(d.p1, 1.0);
        assert_eq!(query_count(&alg), 0);
    }

    #[test]
    fn algorithm_validation() {
        let layout = RegisterLayout::new(vec![2, 2]).unwrap();
        let bad_map = OutputRule {
            registers: vec![0],
            map: vec![0, 1, 1],
        };
        assert!(QueryAlgorithm::new(layout.clone(), vec![], bad_map).is_err());
        let bad_call = Step::Oracle(OracleCall {
            index_reg: 0,
            value_reg: 0,
        });
        assert!(QueryAlgorithm::new(layout, vec![bad_call], OutputRule::constant(0)).is_err());
    }

    #[test]
    fn json_round_trip_and_shape() {
        let layout = RegisterLayout::new(vec![2, 2]).unwrap();
        let alg = QueryAlgorithm::new(
            layout,
            vec![
                Step::Unitary {
                    matrix: hadamard(),
                    targets: vec![0],
                },
                Step::Oracle(OracleCall {
                    index_reg: 0,
                    value_reg: 1,
                }),
            ],
            OutputRule::accept_values(2, 1, &[1]),
        )
        .unwrap();
        let json = serde_json::to_value(&alg).unwrap();
        assert_eq!(json["registers"], serde_json::json!([2, 2]));
        assert_eq!(
            json["steps"][1],
            serde_json::json!({"oracle": {"index_reg": 0, "value_reg": 1}})
        );
        assert_eq!(
            json["steps"][0]["unitary"]["matrix"]
                .as_array()
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            json["output"],
            serde_json::json!({"registers": [1], "map": [0, 1]})
        );
        let back: QueryAlgorithm = serde_json::from_value(json).unwrap();
        assert_eq!(back, alg);
    }

    #[test]
    fn json_rejects_non_unitary() {
        let text = r#"{"registers":[2],"steps":[{"unitary":{"targets":[0],"matrix":[[1,0],[1,0],[0,0],[1,0]]}}],"output":{"registers":[],"map":[0]}}"#;
        assert!(serde_json::from_str::<QueryAlgorithm>(text).is_err());
    }
}
