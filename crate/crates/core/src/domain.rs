//! Inputs, index functions and partial boolean functions over `[M]^n`.
//!
//! All indices are 0-based: the index set `[n]` is `{0, .., n-1}` and the
//! alphabet `[M]` is `{0, .., M-1}`. A string `x` is treated as the function
//! `i -> x[i]`, so composing with an index function `g` gives `(x∘g)[i] = x[g[i]]`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`is_symmetric_first_type`].
pub const FIRST_TYPE_GUARD_N: usize = 8;
/// Largest `n` (and `M`) accepted by [`is_symmetric_second_type`].
pub const SECOND_TYPE_GUARD: usize = 6;
/// Largest `M^n` that [`BooleanFunctionTable::from_predicate`] will enumerate.
pub const FULL_DOMAIN_GUARD: usize = 1 << 20;

/// A total table `x : [n] -> [M]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "InputStringWire", into = "InputStringWire")]
pub struct InputString {
    m: usize,
    values: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct InputStringWire {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    values: Vec<usize>,
}

impl TryFrom<InputStringWire> for InputString {
    type Error = Error;

    fn try_from(wire: InputStringWire) -> Result<Self> {
        if wire.values.len() != wire.n {
            return Err(Error::DimensionMismatch(format!(
                "declared n = {} but {} values given",
                wire.n,
                wire.values.len()
            )));
        }
        InputString::new(wire.m, wire.values)
    }
}

impl From<InputString> for InputStringWire {
    fn from(x: InputString) -> Self {
        InputStringWire {
            n: x.values.len(),
            m: x.m,
            values: x.values,
        }
    }
}

impl InputString {
    pub fn new(m: usize, values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "input string must have n >= 1".into(),
            ));
        }
        if m == 0 {
            return Err(Error::InvalidParameter(
                "alphabet size M must be >= 1".into(),
            ));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= m) {
            return Err(Error::OutOfRange {
                value: bad,
                bound: m,
            });
        }
        Ok(Self { m, values })
    }

    /// The all-`value` string of length `n`.
    pub fn constant(n: usize, m: usize, value: usize) -> Result<Self> {
        Self::new(m, vec![value; n])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.values.get(i).copied()
    }
}

/// A total table `g : [n] -> [n]`. Permutations, the small-range functions
/// `h∘g` and plain index maps all live here; injectivity is a derived property.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "IndexFunctionWire", into = "IndexFunctionWire")]
pub struct IndexFunction {
    values: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct IndexFunctionWire {
    n: usize,
    values: Vec<usize>,
}

impl TryFrom<IndexFunctionWire> for IndexFunction {
    type Error = Error;

    fn try_from(wire: IndexFunctionWire) -> Result<Self> {
        if wire.values.len() != wire.n {
            return Err(Error::DimensionMismatch(format!(
                "declared n = {} but {} values given",
                wire.n,
                wire.values.len()
            )));
        }
        IndexFunction::new(wire.values)
    }
}

impl From<IndexFunction> for IndexFunctionWire {
    fn from(g: IndexFunction) -> Self {
        IndexFunctionWire {
            n: g.values.len(),
            values: g.values,
        }
    }
}

impl IndexFunction {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "index function must have n >= 1".into(),
            ));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= n) {
            return Err(Error::OutOfRange {
                value: bad,
                bound: n,
            });
        }
        Ok(Self { values })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn constant(n: usize, value: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// `Im(g)` as an ordered set.
    pub fn image(&self) -> BTreeSet<usize> {
        self.values.iter().copied().collect()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.n()];
        for &v in &self.values {
            if std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        true
    }

    /// `self ∘ inner`, i.e. `i -> self[inner[i]]`.
    pub fn compose(&self, inner: &IndexFunction) -> Result<IndexFunction> {
        if self.n() != inner.n() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose index functions of sizes {} and {}",
                self.n(),
                inner.n()
            )));
        }
        Ok(IndexFunction {
            values: inner.values.iter().map(|&i| self.values[i]).collect(),
        })
    }
}

/// `x ∘ g`: the string whose `i`-th entry is `x[g[i]]`.
pub fn compose_input(x: &InputString, g: &IndexFunction) -> Result<InputString> {
    if x.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "input has n = {} but index function has n = {}",
            x.n(),
            g.n()
        )));
    }
    Ok(InputString {
        m: x.m,
        values: g.values.iter().map(|&i| x.values[i]).collect(),
    })
}

/// `Im(g)`.
pub fn image(g: &IndexFunction) -> BTreeSet<usize> {
    g.image()
}

/// Lexicographic enumeration of all permutations of `[n]`.
#[derive(Debug, Clone)]
pub struct Permutations {
    current: Option<Vec<usize>>,
}

impl Permutations {
    pub fn new(n: usize) -> Self {
        Self {
            current: Some((0..n).collect()),
        }
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        // Standard next-permutation step; `None` once the sequence is descending.
        if let Some(pivot) = (1..next.len()).rev().find(|&i| next[i - 1] < next[i]) {
            let pivot = pivot - 1;
            let swap = (pivot + 1..next.len())
                .rev()
                .find(|&j| next[j] > next[pivot])
                .expect("a larger element exists right of the pivot");
            next.swap(pivot, swap);
            next[pivot + 1..].reverse();
            self.current = Some(next);
        }
        Some(out)
    }
}

/// A boolean function given extensionally on its domain `S ⊆ [M]^n`.
/// Lookups outside `S` are errors, never silent defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FunctionTableWire", into = "FunctionTableWire")]
pub struct BooleanFunctionTable {
    n: usize,
    m: usize,
    outputs: BTreeMap<Vec<usize>, u8>,
}

#[derive(Serialize, Deserialize)]
struct FunctionTableWire {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    entries: Vec<FunctionEntryWire>,
}

#[derive(Serialize, Deserialize)]
struct FunctionEntryWire {
    x: Vec<usize>,
    f: u8,
}

impl TryFrom<FunctionTableWire> for BooleanFunctionTable {
    type Error = Error;

    fn try_from(wire: FunctionTableWire) -> Result<Self> {
        BooleanFunctionTable::new(wire.n, wire.m, wire.entries.into_iter().map(|e| (e.x, e.f)))
    }
}

impl From<BooleanFunctionTable> for FunctionTableWire {
    fn from(t: BooleanFunctionTable) -> Self {
        FunctionTableWire {
            n: t.n,
            m: t.m,
            entries: t
                .outputs
                .into_iter()
                .map(|(x, f)| FunctionEntryWire { x, f })
                .collect(),
        }
    }
}

impl BooleanFunctionTable {
    pub fn new(
        n: usize,
        m: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, u8)>,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("n and M must be positive".into()));
        }
        let mut outputs = BTreeMap::new();
        for (x, f) in entries {
            if x.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "domain element of length {} in a table with n = {n}",
                    x.len()
                )));
            }
            if let Some(&bad) = x.iter().find(|&&v| v >= m) {
                return Err(Error::OutOfRange {
                    value: bad,
                    bound: m,
                });
            }
            if f > 1 {
                return Err(Error::OutOfRange {
                    value: f as usize,
                    bound: 2,
                });
            }
            if let Some(previous) = outputs.insert(x.clone(), f) {
                if previous != f {
                    return Err(Error::InvalidParameter(format!(
                        "conflicting outputs for {x:?}"
                    )));
                }
            }
        }
        Ok(Self { n, m, outputs })
    }

    /// Tabulates `predicate` over `[M]^n`, keeping the inputs where it returns `Some`.
    pub fn from_predicate(
        n: usize,
        m: usize,
        mut predicate: impl FnMut(&[usize]) -> Option<u8>,
    ) -> Result<Self> {
        let total = checked_pow(m, n)
            .filter(|&t| t <= FULL_DOMAIN_GUARD)
            .ok_or_else(|| {
                Error::GuardExceeded(format!("[{m}]^{n} exceeds {FULL_DOMAIN_GUARD} inputs"))
            })?;
        let mut entries = Vec::new();
        let mut x = vec![0usize; n];
        for _ in 0..total {
            if let Some(f) = predicate(&x) {
                entries.push((x.clone(), f));
            }
            increment_mixed_radix(&mut x, m);
        }
        Self::new(n, m, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.outputs.contains_key(x)
    }

    pub fn lookup(&self, x: &[usize]) -> Option<u8> {
        self.outputs.get(x).copied()
    }

    /// `f(x)`; errors when `x ∉ S`.
    pub fn evaluate(&self, x: &InputString) -> Result<u8> {
        self.lookup(x.values())
            .ok_or_else(|| Error::OffDomain(x.values().to_vec()))
    }

    /// Iterates `(x, f(x))` over `S` in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], u8)> {
        self.outputs.iter().map(|(x, &f)| (x.as_slice(), f))
    }
}

/// Anything that can report `f(x)` for a domain element. The compiler only ever
/// asks for the value on the caller's original input.
pub trait DecisionFunction {
    fn evaluate(&self, x: &InputString) -> Result<u8>;
}

impl DecisionFunction for BooleanFunctionTable {
    fn evaluate(&self, x: &InputString) -> Result<u8> {
        BooleanFunctionTable::evaluate(self, x)
    }
}

/// Why a symmetry check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The transformed input is not in `S`.
    LeavesDomain,
    /// The transformed input is in `S` but `f` differs there.
    ValueChanged,
}

/// A concrete counterexample to permutation symmetry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryWitness {
    pub x: Vec<usize>,
    pub pi: Vec<usize>,
    /// Relabeling of values; `None` for first-type checks.
    pub sigma: Option<Vec<usize>>,
    pub transformed: Vec<usize>,
    pub kind: ViolationKind,
}

/// First-type witness search: `None` when `f(x∘π) = f(x)` for all `x ∈ S`, `π ∈ S_n`.
pub fn first_type_witness(f: &BooleanFunctionTable) -> Result<Option<SymmetryWitness>> {
    if f.n > FIRST_TYPE_GUARD_N {
        return Err(Error::GuardExceeded(format!(
            "n = {} > {FIRST_TYPE_GUARD_N} for first-type symmetry",
            f.n
        )));
    }
    let perms: Vec<Vec<usize>> = Permutations::new(f.n).collect();
    let mut moved = vec![0usize; f.n];
    for (x, fx) in f.entries() {
        for pi in &perms {
            for (slot, &p) in moved.iter_mut().zip(pi) {
                *slot = x[p];
            }
            if let Some(w) = check_one(f, x, fx, &moved, pi, None) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Second-type witness search over `S_n × S_M`.
pub fn second_type_witness(f: &BooleanFunctionTable) -> Result<Option<SymmetryWitness>> {
    if f.n > SECOND_TYPE_GUARD || f.m > SECOND_TYPE_GUARD {
        return Err(Error::GuardExceeded(format!(
            "n = {}, M = {} exceed {SECOND_TYPE_GUARD} for second-type symmetry",
            f.n, f.m
        )));
    }
    let perms: Vec<Vec<usize>> = Permutations::new(f.n).collect();
    let relabels: Vec<Vec<usize>> = Permutations::new(f.m).collect();
    let mut moved = vec![0usize; f.n];
    for (x, fx) in f.entries() {
        for pi in &perms {
            for sigma in &relabels {
                for (slot, &p) in moved.iter_mut().zip(pi) {
                    *slot = sigma[x[p]];
                }
                if let Some(w) = check_one(f, x, fx, &moved, pi, Some(sigma)) {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

fn check_one(
    f: &BooleanFunctionTable,
    x: &[usize],
    fx: u8,
    moved: &[usize],
    pi: &[usize],
    sigma: Option<&Vec<usize>>,
) -> Option<SymmetryWitness> {
    let kind = match f.lookup(moved) {
        None => ViolationKind::LeavesDomain,
        Some(v) if v != fx => ViolationKind::ValueChanged,
        Some(_) => return None,
    };
    Some(SymmetryWitness {
        x: x.to_vec(),
        pi: pi.to_vec(),
        sigma: sigma.cloned(),
        transformed: moved.to_vec(),
        kind,
    })
}

/// `f(x∘π) = f(x)` for every `x ∈ S` and `π ∈ S_n` (with `S` closed under `π`).
pub fn is_symmetric_first_type(f: &BooleanFunctionTable) -> Result<bool> {
    first_type_witness(f).map(|w| w.is_none())
}

/// `f(σ∘x∘π) = f(x)` for every `x ∈ S`, `π ∈ S_n`, `σ ∈ S_M`.
pub fn is_symmetric_second_type(f: &BooleanFunctionTable) -> Result<bool> {
    second_type_witness(f).map(|w| w.is_none())
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Little-endian odometer over `[radix]^len`; wraps to all zeros.
pub(crate) fn increment_mixed_radix(digits: &mut [usize], radix: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return;
        }
        *d = 0;
    }
}
