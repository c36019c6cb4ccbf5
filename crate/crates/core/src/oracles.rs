//! Oracle realizations: the additive query unitary, the counted classical
//! lookup, and the gadget that realizes `O_{x∘g}` from `O_g`, `O_x`, `O_g†`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{IndexFunction, InputString};
use crate::error::{Error, Result};
use crate::statevector::{Matrix, OracleCall, RegisterLayout, State, VALIDITY_TOL};

/// Query tallies, split by the underlying table they touch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounters {
    pub x_queries: u64,
    pub g_queries: u64,
    pub classical_queries: u64,
}

impl std::ops::Add for QueryCounters {
    type Output = QueryCounters;

    fn add(self, rhs: Self) -> Self {
        QueryCounters {
            x_queries: self.x_queries + rhs.x_queries,
            g_queries: self.g_queries + rhs.g_queries,
            classical_queries: self.classical_queries + rhs.classical_queries,
        }
    }
}

/// A quantum oracle usable at an [`OracleCall`] step. Implementations act as
/// permutations of the computational basis.
pub trait QuantumOracle {
    fn apply(&mut self, state: &mut State, call: OracleCall) -> Result<()>;
    fn counters(&self) -> QueryCounters;
}

/// Which counter a [`StandardOracle`] tallies into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRole {
    Input,
    Index,
}

/// `|i⟩|j⟩ -> |i⟩|(j + table[i]) mod d⟩` with `d` the value-register dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardOracle {
    table: Vec<usize>,
    value_dim: usize,
    role: TableRole,
    calls: u64,
}

impl StandardOracle {
    /// Oracle for a raw table; the value register must have dimension `value_dim`.
    pub fn from_table(table: Vec<usize>, value_dim: usize) -> Result<Self> {
        Self::with_role(table, value_dim, TableRole::Input)
    }

    fn with_role(table: Vec<usize>, value_dim: usize, role: TableRole) -> Result<Self> {
        if table.is_empty() || value_dim == 0 {
            return Err(Error::InvalidParameter(
                "empty oracle table or value space".into(),
            ));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= value_dim) {
            return Err(Error::OutOfRange {
                value: bad,
                bound: value_dim,
            });
        }
        Ok(Self {
            table,
            value_dim,
            role,
            calls: 0,
        })
    }

    pub fn index_dim(&self) -> usize {
        self.table.len()
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    fn check_call(&self, layout: &RegisterLayout, call: OracleCall) -> Result<()> {
        layout.check_register(call.index_reg)?;
        layout.check_register(call.value_reg)?;
        if call.index_reg == call.value_reg {
            return Err(Error::IncompatibleOracle(
                "index and value registers coincide".into(),
            ));
        }
        let (di, dv) = (layout.dim(call.index_reg), layout.dim(call.value_reg));
        if di != self.index_dim() || dv != self.value_dim {
            return Err(Error::IncompatibleOracle(format!(
                "oracle expects registers of dimension ({}, {}), got ({di}, {dv})",
                self.index_dim(),
                self.value_dim
            )));
        }
        Ok(())
    }

    /// Basis map of one call on `layout`: `perm[b]` is the image of basis state `b`.
    pub fn basis_permutation(
        &self,
        layout: &RegisterLayout,
        call: OracleCall,
        inverse: bool,
    ) -> Result<Vec<usize>> {
        self.check_call(layout, call)?;
        let strides = layout.strides();
        let sv = strides[call.value_reg];
        let d = self.value_dim;
        Ok((0..layout.total_dim())
            .map(|b| {
                let i = layout.digit(b, call.index_reg);
                let j = layout.digit(b, call.value_reg);
                let shift = if inverse {
                    d - self.table[i]
                } else {
                    self.table[i]
                };
                b - j * sv + ((j + shift) % d) * sv
            })
            .collect())
    }

    fn apply_signed(&mut self, state: &mut State, call: OracleCall, inverse: bool) -> Result<()> {
        let perm = self.basis_permutation(state.layout(), call, inverse)?;
        state.permute_basis(|b| perm[b]);
        self.calls += 1;
        Ok(())
    }

    /// `O†`: the oracle of the negated table, `|i⟩|j⟩ -> |i⟩|(j - table[i]) mod d⟩`.
    /// Counts as one query.
    pub fn apply_inverse(&mut self, state: &mut State, call: OracleCall) -> Result<()> {
        self.apply_signed(state, call, true)
    }
}

impl QuantumOracle for StandardOracle {
    fn apply(&mut self, state: &mut State, call: OracleCall) -> Result<()> {
        self.apply_signed(state, call, false)
    }

    fn counters(&self) -> QueryCounters {
        match self.role {
            TableRole::Input => QueryCounters {
                x_queries: self.calls,
                ..Default::default()
            },
            TableRole::Index => QueryCounters {
                g_queries: self.calls,
                ..Default::default()
            },
        }
    }
}

impl From<&InputString> for StandardOracle {
    fn from(x: &InputString) -> Self {
        Self::with_role(x.values().to_vec(), x.m(), TableRole::Input)
            .expect("InputString entries are below M")
    }
}

impl From<&IndexFunction> for StandardOracle {
    fn from(g: &IndexFunction) -> Self {
        Self::with_role(g.values().to_vec(), g.n(), TableRole::Index)
            .expect("IndexFunction entries are below n")
    }
}

/// Standard oracle of an input string (value space `[M]`) or an index
/// function (value space `[n]`).
pub fn standard_oracle<'a, T>(table: &'a T) -> StandardOracle
where
    StandardOracle: From<&'a T>,
{
    StandardOracle::from(table)
}

/// Counted classical access `i -> x[i]`. No memoization: every call counts.
#[derive(Debug, Clone)]
pub struct ClassicalOracle {
    x: InputString,
    queries: u64,
}

impl ClassicalOracle {
    pub fn new(x: InputString) -> Self {
        Self { x, queries: 0 }
    }

    pub fn query(&mut self, i: usize) -> Result<usize> {
        let v = self.x.get(i).ok_or(Error::OutOfRange {
            value: i,
            bound: self.x.n(),
        })?;
        self.queries += 1;
        Ok(v)
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn m(&self) -> usize {
        self.x.m()
    }

    pub fn counters(&self) -> QueryCounters {
        QueryCounters {
            classical_queries: self.queries,
            ..Default::default()
        }
    }
}

pub fn classical_oracle(x: InputString) -> ClassicalOracle {
    ClassicalOracle::new(x)
}

/// `O_{x∘g}` realized as `O_g` on (index, ancilla), `O_x` on (ancilla, value),
/// `O_g†` on (index, ancilla). The ancilla register must have dimension `n`
/// and hold `|0⟩` on entry; it holds `|0⟩` again on exit.
#[derive(Debug, Clone)]
pub struct ComposedOracle {
    ox: StandardOracle,
    og: StandardOracle,
    ancilla: usize,
}

impl ComposedOracle {
    pub fn new(ox: StandardOracle, og: StandardOracle, ancilla: usize) -> Result<Self> {
        let n = og.index_dim();
        if og.value_dim() != n || ox.index_dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "g oracle is [{}] -> [{}] but x oracle indexes [{}]",
                og.index_dim(),
                og.value_dim(),
                ox.index_dim()
            )));
        }
        Ok(Self { ox, og, ancilla })
    }

    pub fn ancilla(&self) -> usize {
        self.ancilla
    }
}

impl QuantumOracle for ComposedOracle {
    fn apply(&mut self, state: &mut State, call: OracleCall) -> Result<()> {
        let layout = state.layout();
        layout.check_register(self.ancilla)?;
        if self.ancilla == call.index_reg || self.ancilla == call.value_reg {
            return Err(Error::IncompatibleOracle(
                "ancilla overlaps the query registers".into(),
            ));
        }
        if layout.dim(self.ancilla) != self.og.index_dim() {
            return Err(Error::IncompatibleOracle(format!(
                "ancilla has dimension {}, expected n = {}",
                layout.dim(self.ancilla),
                self.og.index_dim()
            )));
        }
        let dirty = state.weight_off_zero(self.ancilla);
        if dirty > VALIDITY_TOL {
            return Err(Error::IncompatibleOracle(format!(
                "ancilla not in |0⟩ on entry (weight {dirty:e})"
            )));
        }
        let to_ancilla = OracleCall {
            index_reg: call.index_reg,
            value_reg: self.ancilla,
        };
        self.og.apply(state, to_ancilla)?;
        self.ox.apply(
            state,
            OracleCall {
                index_reg: self.ancilla,
                value_reg: call.value_reg,
            },
        )?;
        self.og.apply_inverse(state, to_ancilla)?;
        let residual = state.weight_off_zero(self.ancilla);
        if residual > VALIDITY_TOL {
            return Err(Error::AncillaNotClean(residual));
        }
        Ok(())
    }

    fn counters(&self) -> QueryCounters {
        self.ox.counters() + self.og.counters()
    }
}

pub fn composed_oracle(
    ox: StandardOracle,
    og: StandardOracle,
    ancilla: usize,
) -> Result<ComposedOracle> {
    ComposedOracle::new(ox, og, ancilla)
}

/// Values of `x` learned on a subset of indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTable {
    pub m: usize,
    pub known: BTreeMap<usize, usize>,
}

/// The standard oracle of `x∘c`, built only from `x` restricted to `Im(c)`.
pub fn oracle_from_partial(x_on_image: &PartialTable, c: &IndexFunction) -> Result<StandardOracle> {
    let table = c
        .values()
        .iter()
        .map(|&i| {
            x_on_image
                .known
                .get(&i)
                .copied()
                .ok_or(Error::MissingImageEntry(i))
        })
        .collect::<Result<Vec<_>>>()?;
    StandardOracle::from_table(table, x_on_image.m)
}

/// Dense matrix of one call of `oracle` on `layout`, built column by column
/// from basis inputs. `columns` restricts which basis inputs are fed; other
/// columns are left zero.
pub fn oracle_matrix(
    oracle: &mut dyn QuantumOracle,
    layout: &RegisterLayout,
    call: OracleCall,
    columns: impl Fn(usize) -> bool,
) -> Result<Matrix> {
    let dim = layout.total_dim();
    let mut data = vec![num_complex::Complex64::new(0.0, 0.0); dim * dim];
    for col in (0..dim).filter(|&c| columns(c)) {
        let mut state = State::basis(layout, col)?;
        oracle.apply(&mut state, call)?;
        for (row, a) in state.amplitudes().iter().enumerate() {
            data[row * dim + col] = *a;
        }
    }
    Matrix::from_row_major(dim, data)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::domain::compose_input;
    use crate::statevector::new_basis_state;

    fn layout(dims: &[usize]) -> RegisterLayout {
        RegisterLayout::new(dims.to_vec()).unwrap()
    }

    const CALL: OracleCall = OracleCall {
        index_reg: 0,
        value_reg: 1,
    };

    fn basis_of(l: &RegisterLayout, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(l.dims())
            .fold(0, |acc, (d, r)| acc * r + d)
    }

    #[test]
    fn standard_oracle_adds_mod_d() {
        let x = InputString::new(3, vec![0, 1, 2]).unwrap();
        let l = layout(&[3, 3]);
        let perm = standard_oracle(&x)
            .basis_permutation(&l, CALL, false)
            .unwrap();
        assert_eq!(perm[basis_of(&l, &[2, 1])], basis_of(&l, &[2, 0]));
    }

    #[test]
    fn zero_table_is_identity() {
        let x = InputString::constant(4, 3, 0).unwrap();
        let l = layout(&[4, 3]);
        let perm = standard_oracle(&x)
            .basis_permutation(&l, CALL, false)
            .unwrap();
        assert!(perm.iter().enumerate().all(|(b, &p)| b == p));
    }

    #[test]
    fn d_applications_return_to_start() {
        let x = InputString::new(5, vec![3, 1, 4]).unwrap();
        let l = layout(&[3, 5]);
        let mut o = standard_oracle(&x);
        for b in 0..l.total_dim() {
            let mut s = State::basis(&l, b).unwrap();
            for _ in 0..5 {
                o.apply(&mut s, CALL).unwrap();
            }
            assert_eq!(s, State::basis(&l, b).unwrap());
        }
    }

    #[test]
    fn standard_oracle_is_a_permutation() {
        let g = IndexFunction::new(vec![2, 2, 0, 1]).unwrap();
        let l = layout(&[4, 4, 2]);
        let perm = standard_oracle(&g)
            .basis_permutation(&l, CALL, false)
            .unwrap();
        let distinct: BTreeSet<_> = perm.iter().collect();
        assert_eq!(distinct.len(), l.total_dim());
    }

    #[test]
    fn value_dim_mismatch_is_rejected_at_application() {
        let x = InputString::new(3, vec![0, 1]).unwrap();
        let mut s = new_basis_state(&layout(&[2, 2]));
        assert!(matches!(
            standard_oracle(&x).apply(&mut s, CALL),
            Err(Error::IncompatibleOracle(_))
        ));
    }

    #[test]
    fn classical_oracle_counts_every_call() {
        let mut o = classical_oracle(InputString::new(5, vec![4, 1, 2]).unwrap());
        assert_eq!(o.query(1).unwrap(), 1);
        assert_eq!(o.queries(), 1);
        o.query(1).unwrap();
        assert_eq!(o.queries(), 2);
        assert!(o.query(3).is_err());
        assert_eq!(o.queries(), 2);
    }

    #[test]
    fn composed_oracle_counts_two_g_one_x() {
        let x = InputString::new(3, vec![2, 0, 1, 1]).unwrap();
        let g = IndexFunction::new(vec![3, 0, 0, 2]).unwrap();
        let l = layout(&[4, 3, 4]);
        let mut o = composed_oracle(standard_oracle(&x), standard_oracle(&g), 2).unwrap();
        let mut s = new_basis_state(&l);
        o.apply(&mut s, CALL).unwrap();
        let c = o.counters();
        assert_eq!((c.g_queries, c.x_queries, c.classical_queries), (2, 1, 0));
    }

    #[test]
    fn composed_matches_standard_on_composition() {
        let x = InputString::new(3, vec![2, 0, 1, 1]).unwrap();
        let g = IndexFunction::new(vec![3, 0, 0, 2]).unwrap();
        let l = layout(&[4, 3, 4]);
        let mut composed = composed_oracle(standard_oracle(&x), standard_oracle(&g), 2).unwrap();
        let zero_ancilla = |b: usize| l.digit(b, 2) == 0;
        let got = oracle_matrix(&mut composed, &l, CALL, zero_ancilla).unwrap();
        let xg = compose_input(&x, &g).unwrap();
        let mut direct = standard_oracle(&xg);
        let want = oracle_matrix(&mut direct, &l, CALL, zero_ancilla).unwrap();
        assert!(got.max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn composed_rejects_dirty_or_wrong_ancilla() {
        let x = InputString::new(2, vec![1, 0, 1]).unwrap();
        let g = IndexFunction::new(vec![1, 2, 0]).unwrap();
        let mut o = composed_oracle(standard_oracle(&x), standard_oracle(&g), 2).unwrap();
        let l = layout(&[3, 2, 3]);
        let mut dirty = State::basis(&l, basis_of(&l, &[0, 0, 1])).unwrap();
        assert!(matches!(
            o.apply(&mut dirty, CALL),
            Err(Error::IncompatibleOracle(_))
        ));
        let mut wrong = new_basis_state(&layout(&[3, 2, 2]));
        assert!(matches!(
            o.apply(&mut wrong, CALL),
            Err(Error::IncompatibleOracle(_))
        ));
        assert!(composed_oracle(
            standard_oracle(&InputString::new(2, vec![0, 1]).unwrap()),
            standard_oracle(&g),
            2
        )
        .is_err());
    }

    #[test]
    fn partial_oracle_reads_only_the_image() {
        let c = IndexFunction::new(vec![1, 1, 3, 3]).unwrap();
        let partial = PartialTable {
            m: 8,
            known: BTreeMap::from([(1, 7), (3, 2)]),
        };
        let o = oracle_from_partial(&partial, &c).unwrap();
        assert_eq!(o.table(), &[7, 7, 2, 2]);

        let id = IndexFunction::identity(4).unwrap();
        assert_eq!(
            oracle_from_partial(&partial, &id).unwrap_err(),
            Error::MissingImageEntry(0)
        );

        let x = InputString::new(8, vec![5, 7, 6, 2]).unwrap();
        let full = PartialTable {
            m: 8,
            known: x.values().iter().copied().enumerate().collect(),
        };
        let l = layout(&[4, 8]);
        let mut a = oracle_from_partial(&full, &c).unwrap();
        let mut b = standard_oracle(&compose_input(&x, &c).unwrap());
        let ma = oracle_matrix(&mut a, &l, CALL, |_| true).unwrap();
        let mb = oracle_matrix(&mut b, &l, CALL, |_| true).unwrap();
        assert_eq!(ma.max_abs_diff(&mb), 0.0);
    }
}
