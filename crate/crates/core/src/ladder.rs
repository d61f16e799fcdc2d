//! The exact density ladder of down-closed prefixes of `P_{r,r}`.
//!
//! For a down-closed `A ⊆ P_{r,s}` the Lagrangian is attained at the uniform
//! point, where it equals the probability that `r` labelled balls thrown
//! into `s` urns produce a sorted occupancy vector in `A`. Walking a linear
//! extension of the dominance order therefore gives a ladder of exact
//! values from 0 to 1 whose steps are single occupancy probabilities.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::{factorial, multinomial, weak_compositions};
use crate::dominance::{down_sets, linear_extension, pattern_of, Composition, DownSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::{certify_max_upper, maximize, OptimizerConfig, UpperBound};

/// Exact rationals, always reduced with a positive denominator.
pub type ExactRational = BigRational;

fn ratio(num: BigUint, den: BigUint) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn power(base: usize, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

/// Number of functions `[r] -> [s]` whose sorted fibre sizes equal `R`
/// (padded with zeros to length `s`): `r!/prod R_j! * s!/prod_k c_k!`.
pub fn occupancy_count(composition: &Composition, s: usize) -> Result<BigUint> {
    let parts = padded(composition, s)?;
    let arrangements = parts_arrangements(&parts);
    Ok(multinomial(&parts) * arrangements)
}

/// `s! / prod_k c_k!` where `c_k` counts the urns holding exactly `k` balls.
fn parts_arrangements(parts: &[u32]) -> BigUint {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for &p in parts {
        *counts.entry(p).or_default() += 1;
    }
    let denom = counts.values().fold(BigUint::one(), |acc, &c| acc * factorial(c));
    factorial(parts.len() as u32) / denom
}

fn padded(composition: &Composition, s: usize) -> Result<Vec<u32>> {
    let parts = composition.parts();
    if parts.len() > s {
        if parts[s..].iter().any(|&p| p != 0) {
            return Err(Error::InvalidParameter(format!("composition {composition} has more than {s} non-zero parts")));
        }
        return Ok(parts[..s].to_vec());
    }
    let mut out = parts.to_vec();
    out.resize(s, 0);
    Ok(out)
}

/// Probability that `r` balls in `s` urns have sorted occupancy `R`.
pub fn occupancy_probability(composition: &Composition, s: usize) -> Result<ExactRational> {
    let count = occupancy_count(composition, s)?;
    Ok(ratio(count, power(s, composition.r())))
}

/// Occupancy probability for `r` balls in `r` urns.
pub fn urn_probability_exact(composition: &Composition) -> Result<ExactRational> {
    occupancy_probability(composition, composition.r() as usize)
}

/// Number of functions `[r] -> [s]` whose sorted fibre-size vector lies in
/// `A`, counted fibre vector by fibre vector.
pub fn fiber_count(a: &DownSet) -> BigUint {
    weak_compositions(a.r(), a.s())
        .into_iter()
        .filter(|fibres| {
            let sorted = Composition::sorted_from(fibres.clone()).expect("s >= 1");
            a.contains(&sorted)
        })
        .map(|fibres| multinomial(&fibres))
        .sum()
}

/// `lambda_A(1/s, ..., 1/s)` by function counting.
pub fn uniform_value_exact(a: &DownSet) -> ExactRational {
    ratio(fiber_count(a), power(a.s(), a.r()))
}

/// The same value through the Lagrange polynomial of `G_A`.
pub fn uniform_value_via_polynomial(a: &DownSet) -> ExactRational {
    pattern_of(a).lagrange_polynomial().eval_uniform_exact(a.s()).expect("pattern lives on exactly s variables")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderEntry {
    /// 1-based position `i` in the enumeration `R_1, ..., R_m`.
    pub index: usize,
    pub composition: Composition,
    /// `Lambda_{A_i}`.
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub value: ExactRational,
    /// `Lambda_{A_i} - Lambda_{A_{i-1}}`.
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub step: ExactRational,
}

/// The ladder `Lambda_{A_1} <= ... <= Lambda_{A_m}` for prefixes of
/// [`linear_extension`]; `A_0 = ∅` has value 0 and is left implicit.
pub fn ladder(r: u32) -> Result<Vec<LadderEntry>> {
    if r < 2 {
        return Err(Error::UniformityTooSmall { min: 2, got: r });
    }
    let order = linear_extension(r);
    let position: HashMap<Vec<u32>, usize> = order.iter().enumerate().map(|(i, c)| (c.parts().to_vec(), i)).collect();

    // fibre counts grouped by sorted fibre vector, in one pass
    let mut counts = vec![BigUint::zero(); order.len()];
    for fibres in weak_compositions(r, r as usize) {
        let mut sorted = fibres.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        counts[position[&sorted]] += multinomial(&fibres);
    }

    let total = power(r as usize, r);
    let mut cumulative = BigUint::zero();
    let mut previous = ExactRational::zero();
    let mut entries = Vec::with_capacity(order.len());
    for (i, (composition, count)) in order.into_iter().zip(counts).enumerate() {
        cumulative += count;
        let value = ratio(cumulative.clone(), total.clone());
        let step = &value - &previous;
        previous = value.clone();
        entries.push(LadderEntry { index: i + 1, composition, value, step });
    }
    Ok(entries)
}

/// Ladder values with the leading `Lambda_{A_0} = 0`.
pub fn ladder_values(entries: &[LadderEntry]) -> Vec<ExactRational> {
    std::iter::once(ExactRational::zero()).chain(entries.iter().map(|e| e.value.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxStep {
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub step: ExactRational,
    pub composition: Composition,
    pub index: usize,
}

/// Largest ladder step; ties go to the lowest index.
pub fn max_step(r: u32) -> Result<MaxStep> {
    let entries = ladder(r)?;
    let mut best = &entries[0];
    for e in &entries[1..] {
        if e.step > best.step {
            best = e;
        }
    }
    Ok(MaxStep { step: best.step.clone(), composition: best.composition.clone(), index: best.index })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub r: u32,
    pub trials: u64,
    pub seed: u64,
    pub counts: BTreeMap<Composition, u64>,
}

impl MonteCarlo {
    pub fn frequency(&self, c: &Composition) -> f64 {
        self.counts.get(c).copied().unwrap_or(0) as f64 / self.trials as f64
    }
}

/// Fixed shard count so results do not depend on the worker pool size.
const MC_SHARDS: u64 = 64;

/// Seeded simulation of `r` balls thrown into `r` urns. Trials are split
/// into a fixed number of shards, each with its own ChaCha stream, and the
/// counts merged in shard order.
pub fn monte_carlo_urns(r: u32, trials: u64, seed: u64) -> Result<MonteCarlo> {
    if r < 1 {
        return Err(Error::UniformityTooSmall { min: 1, got: r });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let shards: Vec<BTreeMap<Composition, u64>> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let n = trials / MC_SHARDS + u64::from(shard < trials % MC_SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut local: HashMap<Vec<u32>, u64> = HashMap::new();
            let mut urns = vec![0u32; r as usize];
            for _ in 0..n {
                urns.iter_mut().for_each(|u| *u = 0);
                for _ in 0..r {
                    urns[rng.gen_range(0..r as usize)] += 1;
                }
                let mut sorted = urns.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                *local.entry(sorted).or_default() += 1;
            }
            local.into_iter().map(|(k, v)| (Composition::new(k).expect("sorted"), v)).collect()
        })
        .collect();
    let mut counts = BTreeMap::new();
    for shard in shards {
        for (k, v) in shard {
            *counts.entry(k).or_default() += v;
        }
    }
    Ok(MonteCarlo { r, trials, seed, counts })
}

/// Outcome of comparing the exact uniform value of a down-closed set with
/// the optimizer (and, for small `s`, the grid upper bound).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub r: u32,
    pub s: usize,
    pub members: Vec<Composition>,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub uniform_value: ExactRational,
    pub optimizer_value: f64,
    pub optimizer_point: Vec<f64>,
    pub kkt_residual: f64,
    pub upper: Option<UpperBound>,
    /// Optimizer value does not exceed the uniform value by more than 1e-6.
    pub not_above: bool,
    /// Optimizer value is at least the uniform value minus 1e-9.
    pub not_below: bool,
    /// Grid upper bound, when computed, is at least the uniform value.
    pub upper_consistent: bool,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.not_above && self.not_below && self.upper_consistent
    }
}

pub const LEMMA_ABOVE_TOL: f64 = 1e-6;
pub const LEMMA_BELOW_TOL: f64 = 1e-9;
pub const LEMMA_GRID_MAX_S: usize = 4;
pub const LEMMA_GRID_RESOLUTION: usize = 48;

/// Checks that the optimizer cannot beat the uniform point on `G_A`.
pub fn verify_lemma(a: &DownSet, opt: &OptimizerConfig) -> Result<LemmaReport> {
    let exact = uniform_value_exact(a);
    let u = exact.to_f64_lossy();
    let pattern = pattern_of(a);
    let res = maximize::<f64>(&pattern, opt)?;
    let upper =
        if a.s() <= LEMMA_GRID_MAX_S { Some(certify_max_upper(&pattern, LEMMA_GRID_RESOLUTION)?) } else { None };
    let upper_consistent = upper.as_ref().is_none_or(|ub| ub.bound >= u);
    Ok(LemmaReport {
        r: a.r(),
        s: a.s(),
        members: a.members().iter().cloned().collect(),
        uniform_value: exact,
        optimizer_value: res.value,
        optimizer_point: res.point.coords().to_vec(),
        kkt_residual: res.kkt_residual,
        not_above: res.value <= u + LEMMA_ABOVE_TOL,
        not_below: res.value >= u - LEMMA_BELOW_TOL,
        upper_consistent,
        upper,
    })
}

/// [`verify_lemma`] for every down-closed subset of `P_{r,s}`.
pub fn lemma_sweep(r: u32, s: usize, opt: &OptimizerConfig) -> Result<Vec<LemmaReport>> {
    down_sets(r, s).par_iter().map(|a| verify_lemma(a, opt)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn q(n: i64, d: i64) -> ExactRational {
        BigRational::new(n.into(), d.into())
    }

    fn c(parts: &[u32]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    fn downset(r: u32, s: usize, items: &[&[u32]]) -> DownSet {
        DownSet::new(r, s, items.iter().map(|p| c(p)).collect::<BTreeSet<_>>()).unwrap()
    }

    #[test]
    fn uniform_values() {
        assert_eq!(uniform_value_exact(&downset(2, 2, &[&[1, 1]])), q(1, 2));
        assert_eq!(uniform_value_exact(&DownSet::full(4, 3)), q(1, 1));
        assert_eq!(uniform_value_exact(&downset(3, 3, &[&[1, 1, 1]])), q(2, 9));
        assert_eq!(uniform_value_exact(&DownSet::empty(3, 3)), q(0, 1));
    }

    #[test]
    fn urn_probabilities() {
        assert_eq!(urn_probability_exact(&c(&[2, 1, 0])).unwrap(), q(2, 3));
        assert_eq!(urn_probability_exact(&c(&[1, 1])).unwrap(), q(1, 2));
        // zero padding to r urns
        assert_eq!(urn_probability_exact(&c(&[2, 1])).unwrap(), q(2, 3));
        assert!(occupancy_probability(&c(&[1, 1, 1]), 2).is_err());
    }

    #[test]
    fn small_ladders() {
        let l2 = ladder(2).unwrap();
        assert_eq!(ladder_values(&l2), vec![q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(l2.iter().map(|e| e.step.clone()).collect::<Vec<_>>(), vec![q(1, 2), q(1, 2)]);
        let l3 = ladder(3).unwrap();
        assert_eq!(ladder_values(&l3), vec![q(0, 1), q(2, 9), q(8, 9), q(1, 1)]);
        assert_eq!(l3.iter().map(|e| e.step.clone()).collect::<Vec<_>>(), vec![q(2, 9), q(2, 3), q(1, 9)]);
        assert!(ladder(1).is_err());
    }

    #[test]
    fn max_steps() {
        let m3 = max_step(3).unwrap();
        assert_eq!((m3.step, m3.composition, m3.index), (q(2, 3), c(&[2, 1, 0]), 2));
        let m2 = max_step(2).unwrap();
        assert_eq!((m2.step, m2.index), (q(1, 2), 1));
    }

    #[test]
    fn monte_carlo_basics() {
        let one = monte_carlo_urns(3, 1, 9).unwrap();
        assert_eq!(one.counts.len(), 1);
        assert_eq!(one.counts.values().sum::<u64>(), 1);
        let a = monte_carlo_urns(4, 5000, 11).unwrap();
        let b = monte_carlo_urns(4, 5000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 5000);
        assert!(monte_carlo_urns(3, 0, 1).is_err());
    }

    #[test]
    fn lemma_small_cases() {
        let opt = OptimizerConfig { starts: 10, ..Default::default() };
        let rep = verify_lemma(&downset(3, 3, &[&[1, 1, 1]]), &opt).unwrap();
        assert_eq!(rep.uniform_value, q(2, 9));
        assert!(rep.passed(), "{rep:?}");
        let rep = verify_lemma(&DownSet::full(2, 2), &opt).unwrap();
        assert_eq!(rep.uniform_value, q(1, 1));
        assert!(rep.passed(), "{rep:?}");
    }
}
