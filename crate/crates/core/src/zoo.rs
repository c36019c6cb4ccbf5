//! Concrete permutation-symmetric functions with exact query algorithms, plus
//! a few distinguishers for probing `D_perm` against `D_r`.
//!
//! Every algorithm here is total: it is a fixed unitary circuit, so it runs on
//! any table of the right shape, including inputs outside the function's
//! domain. Phase queries are built from the additive oracle by preparing the
//! value register in the `|−⟩` state.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::BooleanFunctionTable;
use crate::error::{Error, Result};
use crate::statevector::{Matrix, OracleCall, OutputRule, QueryAlgorithm, RegisterLayout, Step};

/// A decision problem together with an algorithm for it.
#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub function: BooleanFunctionTable,
    pub algorithm: QueryAlgorithm,
    /// Per-input success guarantee of `algorithm` on the domain.
    pub known_success: String,
}

/// A one-bit algorithm querying an index function `g : [n] -> [n]`.
#[derive(Debug, Clone)]
pub struct Distinguisher {
    pub id: String,
    pub n: usize,
    pub algorithm: QueryAlgorithm,
}

/// Catalog row for `zoo list`.
#[derive(Debug, Clone, Serialize)]
pub struct ZooInfo {
    pub id: &'static str,
    pub kind: &'static str,
    pub constraints: &'static str,
    pub query_count: &'static str,
    pub description: &'static str,
}

pub fn catalog() -> Vec<ZooInfo> {
    vec![
        ZooInfo {
            id: "dj",
            kind: "decision",
            constraints: "n a power of two, M = 2",
            query_count: "1",
            description: "Deutsch-Jozsa: 0 on constant inputs, 1 on balanced inputs",
        },
        ZooInfo {
            id: "grover-or",
            kind: "decision",
            constraints: "n a power of two, M = 2, iterations >= 0",
            query_count: "iterations + 1",
            description: "Grover search with a verification query: 0 on all-zeros, 1 on weight-one inputs",
        },
        ZooInfo {
            id: "const0",
            kind: "decision",
            constraints: "any n, M; M^n <= 2^20",
            query_count: "0",
            description: "constant 0 on [M]^n",
        },
        ZooInfo {
            id: "const1",
            kind: "decision",
            constraints: "any n, M; M^n <= 2^20",
            query_count: "0",
            description: "constant 1 on [M]^n",
        },
        ZooInfo {
            id: "zero-query",
            kind: "distinguisher",
            constraints: "n >= 1",
            query_count: "0",
            description: "outputs 1 with probability 1/n independent of the oracle",
        },
        ZooInfo {
            id: "collision-sniffer",
            kind: "distinguisher",
            constraints: "n >= 2",
            query_count: "1",
            description: "Fourier-samples the index register after one query; accepts on outcome 0 with probability sum_v |g^-1(v)|^2 / n^2",
        },
        ZooInfo {
            id: "collision-sniffer-2",
            kind: "distinguisher",
            constraints: "n >= 2, n^4 <= 2^20",
            query_count: "2",
            description: "two independent sniffer rounds; accepts if either round reads 0",
        },
    ]
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_power_of_two(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must be a power of two >= 2"
        )));
    }
    Ok(())
}

/// `H^{⊗k}` on a register of dimension `n = 2^k`.
pub fn walsh_hadamard(n: usize) -> Result<Matrix> {
    check_power_of_two(n)?;
    let scale = 1.0 / (n as f64).sqrt();
    let data = (0..n * n)
        .map(|e| {
            let sign = if ((e / n) & (e % n)).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            c(sign * scale)
        })
        .collect();
    Matrix::from_row_major(n, data)
}

/// Discrete Fourier transform on `Z_d`.
pub fn fourier(d: usize) -> Matrix {
    let scale = 1.0 / (d as f64).sqrt();
    let data = (0..d * d)
        .map(|e| {
            let phase = 2.0 * PI * (((e / d) * (e % d)) % d) as f64 / d as f64;
            Complex64::from_polar(scale, phase)
        })
        .collect();
    Matrix::from_row_major(d, data).expect("d*d entries")
}

/// Sends `|0⟩` to `|−⟩ = (|0⟩ - |1⟩)/√2`.
pub fn minus_prep() -> Matrix {
    Matrix::from_rows(vec![
        vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
        vec![c(-FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
    ])
    .expect("2x2")
}

/// Inversion about the mean, `2|s⟩⟨s| - I`.
pub fn grover_diffusion(n: usize) -> Matrix {
    let data = (0..n * n)
        .map(|e| {
            let delta = if e / n == e % n { 1.0 } else { 0.0 };
            c(2.0 / n as f64 - delta)
        })
        .collect();
    Matrix::from_row_major(n, data).expect("n*n entries")
}

fn unitary(matrix: Matrix, targets: &[usize]) -> Step {
    Step::Unitary {
        matrix,
        targets: targets.to_vec(),
    }
}

fn query(index_reg: usize, value_reg: usize) -> Step {
    Step::Oracle(OracleCall {
        index_reg,
        value_reg,
    })
}

/// Deutsch–Jozsa on `x ∈ {0,1}^n`: outputs 0 exactly on constant inputs and 1
/// exactly on balanced ones, with one query.
pub fn deutsch_jozsa(n: usize) -> Result<ZooEntry> {
    check_power_of_two(n)?;
    let function = BooleanFunctionTable::from_predicate(n, 2, |x| {
        let ones = x.iter().filter(|&&b| b == 1).count();
        match ones {
            0 => Some(0),
            k if k == n => Some(0),
            k if 2 * k == n => Some(1),
            _ => None,
        }
    })?;
    let layout = RegisterLayout::new(vec![n, 2])?;
    let wh = walsh_hadamard(n)?;
    let steps = vec![
        unitary(wh.clone(), &[0]),
        unitary(minus_prep(), &[1]),
        query(0, 1),
        unitary(wh, &[0]),
    ];
    let accept: Vec<usize> = (1..n).collect();
    let algorithm = QueryAlgorithm::new(layout, steps, OutputRule::accept_values(n, 0, &accept))?;
    Ok(ZooEntry {
        id: "dj".into(),
        n,
        m: 2,
        function,
        algorithm,
        known_success: "exact: success 1 on every promise input".into(),
    })
}

/// Iteration count closest to a full rotation onto a single marked item.
pub fn default_grover_iterations(n: usize) -> usize {
    let theta = (1.0 / n as f64).sqrt().asin();
    (PI / (4.0 * theta) - 0.5).round().max(0.0) as usize
}

/// Grover search for a unique marked index, then one more query that copies
/// `x` at the (coherently) found index into the output register.
pub fn grover_unique_or(n: usize, iterations: usize) -> Result<ZooEntry> {
    check_power_of_two(n)?;
    let function = BooleanFunctionTable::from_predicate(n, 2, |x| {
        match x.iter().filter(|&&b| b == 1).count() {
            0 => Some(0),
            1 => Some(1),
            _ => None,
        }
    })?;
    let layout = RegisterLayout::new(vec![n, 2, 2])?;
    let mut steps = vec![
        unitary(walsh_hadamard(n)?, &[0]),
        unitary(minus_prep(), &[1]),
    ];
    let diffusion = grover_diffusion(n);
    for _ in 0..iterations {
        steps.push(query(0, 1));
        steps.push(unitary(diffusion.clone(), &[0]));
    }
    steps.push(query(0, 2));
    let algorithm = QueryAlgorithm::new(layout, steps, OutputRule::accept_values(2, 2, &[1]))?;
    let theta = (1.0 / n as f64).sqrt().asin();
    let hit = ((2 * iterations + 1) as f64 * theta).sin().powi(2);
    Ok(ZooEntry {
        id: "grover-or".into(),
        n,
        m: 2,
        function,
        algorithm,
        known_success: format!("1 on all-zeros; sin^2((2t+1)θ) = {hit:.10} on weight-one inputs"),
    })
}

/// The constant-`bit` function on `[M]^n` with a zero-query algorithm.
pub fn constant_function(bit: u8, n: usize, m: usize) -> Result<ZooEntry> {
    if bit > 1 {
        return Err(Error::OutOfRange {
            value: bit as usize,
            bound: 2,
        });
    }
    let function = BooleanFunctionTable::from_predicate(n, m, |_| Some(bit))?;
    let algorithm = QueryAlgorithm::new(
        RegisterLayout::new(vec![n, m])?,
        vec![],
        OutputRule::constant(bit),
    )?;
    Ok(ZooEntry {
        id: format!("const{bit}"),
        n,
        m,
        function,
        algorithm,
        known_success: "exact: success 1".into(),
    })
}

/// Zero-query algorithm that outputs 1 with probability `ones / d`.
pub fn fourier_coin(d: usize, ones: usize) -> Result<QueryAlgorithm> {
    if d == 0 || ones > d {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= ones <= d, got {ones}/{d}"
        )));
    }
    let accept: Vec<usize> = (0..ones).collect();
    QueryAlgorithm::new(
        RegisterLayout::new(vec![d])?,
        vec![unitary(fourier(d), &[0])],
        OutputRule::accept_values(d, 0, &accept),
    )
}

/// A distinguisher that never queries; outputs 1 with probability `1/n`.
pub fn zero_query(n: usize) -> Result<Distinguisher> {
    let algorithm = QueryAlgorithm::new(
        RegisterLayout::new(vec![n, n])?,
        vec![unitary(fourier(n), &[0])],
        OutputRule::accept_values(n, 0, &[0]),
    )?;
    Ok(Distinguisher {
        id: "zero-query".into(),
        n,
        algorithm,
    })
}

/// `rounds` independent copies of: uniform superposition over `i`, one query
/// into a fresh `[n]` register, Fourier transform of the index register.
/// Outputs 1 iff some round reads index 0, which happens in a single round
/// with probability `Σ_v |g⁻¹(v)|² / n²`. With `rounds = 0` the circuit makes
/// no query and always outputs 1.
pub fn collision_sniffer(n: usize, rounds: usize) -> Result<Distinguisher> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "collision sniffer needs n >= 2".into(),
        ));
    }
    let pairs = rounds.max(1);
    let layout = RegisterLayout::new(vec![n; 2 * pairs])?;
    if layout.total_dim() > crate::domain::FULL_DOMAIN_GUARD {
        return Err(Error::GuardExceeded(format!(
            "{rounds} sniffer rounds at n = {n} need dimension {}",
            layout.total_dim()
        )));
    }
    let f = fourier(n);
    let mut steps = Vec::new();
    for k in 0..rounds {
        steps.push(unitary(f.clone(), &[2 * k]));
        steps.push(query(2 * k, 2 * k + 1));
        steps.push(unitary(f.clone(), &[2 * k]));
    }
    let registers: Vec<usize> = (0..pairs).map(|k| 2 * k).collect();
    let outcomes = n.pow(pairs as u32);
    let map = (0..outcomes)
        .map(|mut o| {
            let mut any_zero = false;
            for _ in 0..pairs {
                any_zero |= o % n == 0;
                o /= n;
            }
            (any_zero || rounds == 0) as u8
        })
        .collect();
    let algorithm = QueryAlgorithm::new(layout, steps, OutputRule { registers, map })?;
    Ok(Distinguisher {
        id: match rounds {
            1 => "collision-sniffer".into(),
            k => format!("collision-sniffer-{k}"),
        },
        n,
        algorithm,
    })
}

/// Decision entry by catalog id.
pub fn entry(id: &str, n: usize, iterations: Option<usize>) -> Result<ZooEntry> {
    match id {
        "dj" => deutsch_jozsa(n),
        "grover-or" => grover_unique_or(
            n,
            iterations.unwrap_or_else(|| default_grover_iterations(n)),
        ),
        "const0" => constant_function(0, n, 2),
        "const1" => constant_function(1, n, 2),
        other => Err(Error::InvalidParameter(format!(
            "unknown zoo entry '{other}'"
        ))),
    }
}

/// Distinguisher by catalog id.
pub fn distinguisher(id: &str, n: usize) -> Result<Distinguisher> {
    match id {
        "zero-query" => zero_query(n),
        "collision-sniffer" => collision_sniffer(n, 1),
        "collision-sniffer-2" => collision_sniffer(n, 2),
        other => Err(Error::InvalidParameter(format!(
            "unknown distinguisher '{other}'"
        ))),
    }
}
