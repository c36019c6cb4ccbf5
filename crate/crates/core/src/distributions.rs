//! The small-range distribution `D_r` and the uniform permutation
//! distribution, as seeded samplers and as exact rational enumerations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::{Error as _, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{increment_mixed_radix, IndexFunction};
use crate::error::{Error, Result};

/// Default cap on the number of `(g, h)` pairs (or permutations) enumerated.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Generator used for every sampled quantity.
pub type ExperimentRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `stream`-th child of `root`. Depends only on `(root, stream)`,
/// never on scheduling.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    mix64(root ^ mix64(stream))
}

pub fn rng_from_seed(seed: u64) -> ExperimentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)")]
pub struct SmallRangeParams {
    n: usize,
    r: usize,
}

impl TryFrom<(usize, usize)> for SmallRangeParams {
    type Error = Error;

    fn try_from((n, r): (usize, usize)) -> Result<Self> {
        SmallRangeParams::new(n, r)
    }
}

impl SmallRangeParams {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || r == 0 || r > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= r <= n, got n = {n}, r = {r}"
            )));
        }
        Ok(Self { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `r^n · n!/(n-r)!`, or `None` on overflow.
    pub fn pair_count(&self) -> Option<u128> {
        let g = (0..self.n).try_fold(1u128, |acc, _| acc.checked_mul(self.r as u128))?;
        let h = falling_factorial(self.n, self.r)?;
        g.checked_mul(h)
    }
}

fn falling_factorial(n: usize, k: usize) -> Option<u128> {
    (0..k).try_fold(1u128, |acc, i| acc.checked_mul((n - i) as u128))
}

/// Swaps a uniformly random choice into each of the first `k` cells of `0..n`.
fn partial_fisher_yates<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut cells: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        cells.swap(i, j);
    }
    cells.truncate(k);
    cells
}

/// One draw of `h∘g` with `g : [n] -> [r]` uniform and `h : [r] -> [n]` a
/// uniform injection.
pub fn sample_small_range<R: Rng + ?Sized>(p: SmallRangeParams, rng: &mut R) -> IndexFunction {
    let g: Vec<usize> = (0..p.n).map(|_| rng.gen_range(0..p.r)).collect();
    let h = partial_fisher_yates(p.n, p.r, rng);
    IndexFunction::new(g.into_iter().map(|v| h[v]).collect()).expect("h maps into [n]")
}

/// Uniform permutation of `[n]`.
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<IndexFunction> {
    IndexFunction::new(partial_fisher_yates(n, n, rng))
}

pub fn is_injective(g: &IndexFunction) -> bool {
    g.is_injective()
}

/// A finitely supported distribution over index functions with exact weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSupport {
    entries: Vec<(IndexFunction, BigRational)>,
}

impl WeightedSupport {
    pub fn new(entries: Vec<(IndexFunction, BigRational)>) -> Result<Self> {
        let total: BigRational = entries.iter().map(|(_, p)| p.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (g, p) in &entries {
            if p < &BigRational::zero() {
                return Err(Error::InvalidParameter("negative probability".into()));
            }
            if !seen.insert(g) {
                return Err(Error::InvalidParameter(format!("duplicate entry {g:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(IndexFunction, BigRational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probability_of(&self, g: &IndexFunction) -> BigRational {
        self.entries
            .iter()
            .find(|(h, _)| h == g)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn mass_where(&self, pred: impl Fn(&IndexFunction) -> bool) -> BigRational {
        self.entries
            .iter()
            .filter(|(g, _)| pred(g))
            .map(|(_, p)| p.clone())
            .sum()
    }

    pub fn total(&self) -> BigRational {
        self.mass_where(|_| true)
    }

    /// `E[value(g)]`. Weights of entries with bit-identical values are summed
    /// exactly before the single conversion to `f64`, so a value that does not
    /// depend on `g` comes back unchanged.
    pub fn expectation(&self, mut value: impl FnMut(&IndexFunction) -> Result<f64>) -> Result<f64> {
        let mut by_value: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (g, p) in &self.entries {
            *by_value
                .entry(value(g)?.to_bits())
                .or_insert_with(BigRational::zero) += p;
        }
        Ok(by_value
            .into_iter()
            .map(|(bits, w)| f64::from_bits(bits) * w.to_f64().unwrap_or(0.0))
            .sum())
    }
}

impl Serialize for WeightedSupport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Prob {
            num: u64,
            den: u64,
        }
        #[derive(Serialize)]
        struct Entry<'a> {
            g: &'a IndexFunction,
            p: Prob,
        }
        let entries = self
            .entries
            .iter()
            .map(|(g, p)| {
                let num = p.numer().to_u64();
                let den = p.denom().to_u64();
                match (num, den) {
                    (Some(num), Some(den)) => Ok(Entry {
                        g,
                        p: Prob { num, den },
                    }),
                    _ => Err(S::Error::custom("probability does not fit in u64/u64")),
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut s = serializer.serialize_struct("WeightedSupport", 1)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for WeightedSupport {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Prob {
            num: u64,
            den: u64,
        }
        #[derive(Deserialize)]
        struct Entry {
            g: IndexFunction,
            p: Prob,
        }
        #[derive(Deserialize)]
        struct Wire {
            entries: Vec<Entry>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let entries = wire
            .entries
            .into_iter()
            .map(|e| {
                if e.p.den == 0 {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                Ok((
                    e.g,
                    BigRational::new(BigInt::from(e.p.num), BigInt::from(e.p.den)),
                ))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        WeightedSupport::new(entries).map_err(serde::de::Error::custom)
    }
}

/// All injections `[k] -> [n]` in lexicographic order.
fn injections(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(
        n: usize,
        k: usize,
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                extend(n, k, prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(
        n,
        k,
        &mut Vec::with_capacity(k),
        &mut vec![false; n],
        &mut out,
    );
    out
}

fn check_budget(required: Option<u128>, budget: u64) -> Result<()> {
    match required {
        Some(req) if req <= budget as u128 => Ok(()),
        Some(req) => Err(Error::BudgetExceeded {
            required: req,
            budget,
        }),
        None => Err(Error::BudgetExceeded {
            required: u128::MAX,
            budget,
        }),
    }
}

/// Exact law of `h∘g` under `D_r`, aggregating pairs that compose to the same
/// function.
pub fn enumerate_small_range_support(p: SmallRangeParams, budget: u64) -> Result<WeightedSupport> {
    check_budget(p.pair_count(), budget)?;
    let hs = injections(p.n, p.r);
    let total = p.pair_count().expect("checked above");
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let g_count = total / hs.len() as u128;
    let mut g = vec![0usize; p.n];
    for _ in 0..g_count {
        for h in &hs {
            let composed: Vec<usize> = g.iter().map(|&v| h[v]).collect();
            *counts.entry(composed).or_insert(0) += 1;
        }
        increment_mixed_radix(&mut g, p.r);
    }
    let den = BigInt::from(total);
    let entries = counts
        .into_iter()
        .map(|(values, count)| {
            (
                IndexFunction::new(values).expect("composition maps into [n]"),
                BigRational::new(BigInt::from(count), den.clone()),
            )
        })
        .collect();
    WeightedSupport::new(entries)
}

/// Uniform distribution over `S_n` as an explicit support.
pub fn enumerate_permutations(n: usize, budget: u64) -> Result<WeightedSupport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    check_budget(falling_factorial(n, n), budget)?;
    let all: Vec<Vec<usize>> = crate::domain::Permutations::new(n).collect();
    let p = BigRational::new(BigInt::one(), BigInt::from(all.len()));
    WeightedSupport::new(
        all.into_iter()
            .map(|v| {
                (
                    IndexFunction::new(v).expect("permutation of [n]"),
                    p.clone(),
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn params_validate() {
        assert!(SmallRangeParams::new(4, 0).is_err());
        assert!(SmallRangeParams::new(4, 5).is_err());
        assert!(SmallRangeParams::new(4, 4).is_ok());
    }

    #[test]
    fn r_one_gives_constants() {
        let mut rng = rng_from_seed(1);
        let p = SmallRangeParams::new(7, 1).unwrap();
        for _ in 0..200 {
            assert_eq!(sample_small_range(p, &mut rng).image().len(), 1);
        }
    }

    #[test]
    fn image_bound_holds_for_samples() {
        let mut rng = rng_from_seed(2);
        let p = SmallRangeParams::new(16, 4).unwrap();
        for _ in 0..10_000 {
            assert!(sample_small_range(p, &mut rng).image().len() <= 4);
        }
    }

    #[test]
    fn permutations_are_injective() {
        let mut rng = rng_from_seed(3);
        assert_eq!(
            sample_permutation(1, &mut rng).unwrap(),
            IndexFunction::identity(1).unwrap()
        );
        for _ in 0..500 {
            let pi = sample_permutation(9, &mut rng).unwrap();
            assert!(is_injective(&pi));
            assert_eq!(pi.image().len(), 9);
        }
    }

    #[test]
    fn injectivity_examples() {
        assert!(is_injective(&IndexFunction::identity(5).unwrap()));
        assert!(!is_injective(&IndexFunction::constant(2, 1).unwrap()));
    }

    #[test]
    fn enumerator_n2_r1() {
        let s = enumerate_small_range_support(SmallRangeParams::new(2, 1).unwrap(), 100).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(
            s.probability_of(&IndexFunction::constant(2, 0).unwrap()),
            ratio(1, 2)
        );
        assert_eq!(
            s.probability_of(&IndexFunction::constant(2, 1).unwrap()),
            ratio(1, 2)
        );
    }

    #[test]
    fn enumerator_n2_r2() {
        let s = enumerate_small_range_support(SmallRangeParams::new(2, 2).unwrap(), 100).unwrap();
        assert_eq!(
            s.probability_of(&IndexFunction::identity(2).unwrap()),
            ratio(1, 4)
        );
        assert_eq!(s.mass_where(|g| !g.is_injective()), ratio(1, 2));
        assert!(s.total().is_one());
    }

    #[test]
    fn enumerator_respects_budget() {
        let p = SmallRangeParams::new(6, 6).unwrap();
        assert!(matches!(
            enumerate_small_range_support(p, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(enumerate_permutations(9, 1000).is_err());
    }

    #[test]
    fn permutation_support_is_uniform() {
        let s = enumerate_permutations(4, 100).unwrap();
        assert_eq!(s.len(), 24);
        assert!(s.entries().iter().all(|(_, p)| *p == ratio(1, 24)));
    }

    #[test]
    fn derived_seeds_differ_and_repeat() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    #[test]
    fn support_json_round_trip() {
        let s = enumerate_small_range_support(SmallRangeParams::new(3, 2).unwrap(), 1000).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        assert!(json["entries"][0]["p"]["num"].is_u64());
        let back: WeightedSupport = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }
}
