//! `--input` spec parsing.

use anyhow::Result;
use qsymlab_core::distributions::{derive_seed, rng_from_seed};
use qsymlab_core::domain::InputString;
use qsymlab_core::zoo::ZooEntry;
use rand::Rng;

use crate::UsageError;

/// Stream reserved for drawing a `random-promise` input; trial streams count up from 0.
pub const RANDOM_PROMISE_STREAM: u64 = u64::MAX;

/// Parses `spec` into an input of length `entry.n` over `[entry.m]`.
///
/// Accepted forms: `constant0` (or `zeros`), `constant1` (or `ones`),
/// `balanced` (first half 0, second half 1), `unique:K` (a single 1 at K),
/// `random-promise` (uniform over the function's promise set, drawn from
/// `seed`), or an explicit comma-separated list of values.
pub fn parse_input(spec: &str, entry: &ZooEntry, seed: u64) -> Result<InputString> {
    let n = entry.n;
    let m = entry.m;
    let values: Vec<usize> = match spec.trim() {
        "constant0" | "zeros" => vec![0; n],
        "constant1" | "ones" => vec![1 % m; n],
        "balanced" => {
            if !n.is_multiple_of(2) {
                return Err(UsageError(format!("balanced input needs even n, got {n}")).into());
            }
            (0..n).map(|i| usize::from(i >= n / 2)).collect()
        }
        "random-promise" => {
            let domain: Vec<&[usize]> = entry.function.entries().map(|(x, _)| x).collect();
            if domain.is_empty() {
                return Err(UsageError(format!("'{}' has an empty promise set", entry.id)).into());
            }
            let mut rng = rng_from_seed(derive_seed(seed, RANDOM_PROMISE_STREAM));
            domain[rng.gen_range(0..domain.len())].to_vec()
        }
        s if s.starts_with("unique:") => {
            let k: usize = s["unique:".len()..]
                .parse()
                .map_err(|_| UsageError(format!("bad position in '{s}'")))?;
            if k >= n {
                return Err(UsageError(format!("unique:{k} needs k < n = {n}")).into());
            }
            (0..n).map(|i| usize::from(i == k)).collect()
        }
        s => s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| UsageError(format!("unrecognized input spec '{s}'")))?,
    };
    if values.len() != n {
        return Err(UsageError(format!("input has length {} but n = {n}", values.len())).into());
    }
    InputString::new(m, values).map_err(|e| UsageError(e.to_string()).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsymlab_core::zoo;

    #[test]
    fn named_inputs() {
        let dj = zoo::deutsch_jozsa(4).unwrap();
        assert_eq!(
            parse_input("zeros", &dj, 0).unwrap().values(),
            &[0, 0, 0, 0]
        );
        assert_eq!(
            parse_input("balanced", &dj, 0).unwrap().values(),
            &[0, 0, 1, 1]
        );
        assert_eq!(
            parse_input("unique:2", &dj, 0).unwrap().values(),
            &[0, 0, 1, 0]
        );
        assert_eq!(
            parse_input("1,0,0,1", &dj, 0).unwrap().values(),
            &[1, 0, 0, 1]
        );
        assert!(parse_input("unique:4", &dj, 0).is_err());
        assert!(parse_input("1,0", &dj, 0).is_err());
        assert!(parse_input("0,0,2,0", &dj, 0).is_err());
    }

    #[test]
    fn random_promise_is_in_domain_and_seeded() {
        let dj = zoo::deutsch_jozsa(8).unwrap();
        for seed in 0..20 {
            let x = parse_input("random-promise", &dj, seed).unwrap();
            assert!(dj.function.contains(x.values()));
            assert_eq!(x, parse_input("random-promise", &dj, seed).unwrap());
        }
    }
}
