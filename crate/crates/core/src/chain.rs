//! Edge-by-edge chains of r-graphs on `[m]`.
//!
//! Adding one edge `{u_1..u_r}` adds `r! x_{u_1}...x_{u_r} <= r!/r^r` to the
//! Lagrange polynomial at any simplex point, so consecutive Lagrangians in
//! the chain differ by at most `r!/r^r`. Once `m` is large enough the top of
//! the chain exceeds `1 - r!/r^r`, so the chain's values leave no gap longer
//! than `r!/r^r` in `[0, 1 - r!/r^r]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinat::{binomial, factorial, subsets_colex, subsets_lex};
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::scalar::{Real, Scalar};
use crate::simplex::{maximize_poly, OptimizerConfig, SimplexPoint};

pub const STEP_TOL: f64 = 1e-6;
pub const MONOTONE_TOL: f64 = 1e-9;
pub const TOP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeOrder {
    #[default]
    Colex,
    Lex,
    /// Seeded uniformly random permutation of the colex order.
    Random(u64),
}

/// `r!/r^r`, the largest possible jump.
pub fn gap_bound(r: u32) -> BigRational {
    let den = num_traits::pow(BigInt::from(r), r as usize);
    BigRational::new(BigInt::from(factorial(r)), den)
}

/// `r! C(m, r) / m^r`, the uniform value of the complete r-graph on `[m]`.
pub fn complete_uniform_value(r: u32, m: usize) -> BigRational {
    let num = factorial(r) * binomial(m as u64, r as u64);
    let den = num_traits::pow(BigInt::from(m), r as usize);
    BigRational::new(BigInt::from(num), den)
}

/// Smallest `m` with `r! C(m, r) / m^r > 1 - r!/r^r`.
pub fn minimal_m(r: u32) -> Result<usize> {
    if r < 3 {
        return Err(Error::UniformityTooSmall { min: 3, got: r });
    }
    let target = BigRational::from_integer(1.into()) - gap_bound(r);
    // the left side increases to 1 as m grows, so the scan terminates
    let mut m = r as usize;
    while complete_uniform_value(r, m) <= target {
        m += 1;
    }
    Ok(m)
}

/// All r-subsets of `[m]` (0-based) in the requested order.
pub fn edge_enumeration(m: usize, r: u32, order: EdgeOrder) -> Result<Vec<Vec<usize>>> {
    if m < r as usize {
        return Err(Error::InvalidParameter(format!("need m >= r, got m = {m}, r = {r}")));
    }
    Ok(match order {
        EdgeOrder::Colex => subsets_colex(m, r as usize),
        EdgeOrder::Lex => subsets_lex(m, r as usize),
        EdgeOrder::Random(seed) => {
            let mut edges = subsets_colex(m, r as usize);
            edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            edges
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub r: u32,
    pub m: usize,
    pub order: EdgeOrder,
    pub opt: OptimizerConfig,
}

impl ChainConfig {
    pub fn new(r: u32, m: usize) -> Self {
        Self { r, m, order: EdgeOrder::Colex, opt: OptimizerConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 3 {
            return Err(Error::UniformityTooSmall { min: 3, got: self.r });
        }
        if self.m < self.r as usize {
            return Err(Error::InvalidParameter(format!("need m >= r, got m = {}, r = {}", self.m, self.r)));
        }
        self.opt.validate()
    }
}

/// Certified lower bounds on the Lagrangians `Lambda_0, ..., Lambda_N` of
/// the chain, `N = C(m, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLadder<T> {
    pub r: u32,
    pub m: usize,
    /// Edge `R_i` added at step `i` is `edges[i - 1]`.
    pub edges: Vec<Vec<usize>>,
    pub values: Vec<T>,
    pub points: Vec<SimplexPoint<T>>,
    pub kkt_residuals: Vec<T>,
    pub max_step: T,
    pub max_step_index: usize,
}

impl<T: Real> ChainLadder<T> {
    pub fn step(&self, i: usize) -> T {
        self.values[i] - self.values[i - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Assembles a ladder from precomputed values (used for reports and
    /// tests); points default to the uniform point with zero residual.
    pub fn from_values(r: u32, m: usize, values: Vec<T>) -> Self {
        let n = values.len();
        let mut ladder = Self {
            r,
            m,
            edges: Vec::new(),
            values,
            points: vec![SimplexPoint::uniform(m); n],
            kkt_residuals: vec![T::zero(); n],
            max_step: T::zero(),
            max_step_index: 0,
        };
        ladder.refresh_max_step();
        ladder
    }

    fn refresh_max_step(&mut self) {
        self.max_step = T::zero();
        self.max_step_index = 0;
        for i in 1..self.values.len() {
            let s = self.step(i);
            if self.max_step_index == 0 || s > self.max_step {
                self.max_step = s;
                self.max_step_index = i;
            }
        }
    }
}

/// Maximizes the Lagrangian of every prefix `G_i = {R_1, ..., R_i}`,
/// warm-starting each run from the previous optimum.
pub fn build_chain_ladder<T: Real>(config: &ChainConfig) -> Result<ChainLadder<T>> {
    config.validate()?;
    let (r, m) = (config.r, config.m);
    let edges = edge_enumeration(m, r, config.order)?;
    let mut values = vec![T::zero()];
    let mut points = vec![SimplexPoint::uniform(m)];
    let mut kkt_residuals = vec![T::zero()];
    for i in 1..=edges.len() {
        let pattern = Pattern::simple(r, m, &edges[..i])?;
        let warm = points[i - 1].coords().to_vec();
        let res = maximize_poly(&pattern.lagrange_polynomial(), &config.opt, &[warm])?;
        values.push(res.value);
        points.push(res.point);
        kkt_residuals.push(res.kkt_residual);
    }
    let mut ladder = ChainLadder { r, m, edges, values, points, kkt_residuals, max_step: T::zero(), max_step_index: 0 };
    ladder.refresh_max_step();
    Ok(ladder)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub index: usize,
    pub num_edges: usize,
    pub value: f64,
    pub step: f64,
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopCheck {
    pub value: f64,
    /// `1 - r!/r^r`.
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub r: u32,
    pub m: usize,
    pub bound: f64,
    pub rows: Vec<StepRow>,
    pub max_step: f64,
    pub max_step_index: usize,
    /// Indices `i` with step above `r!/r^r + 1e-6`.
    pub step_violations: Vec<usize>,
    /// Indices `i` where the value drops by more than 1e-9.
    pub monotone_violations: Vec<usize>,
    /// Present when `m >= minimal_m(r)`.
    pub top: Option<TopCheck>,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.step_violations.is_empty()
            && self.monotone_violations.is_empty()
            && self.top.as_ref().is_none_or(|t| t.passed)
    }
}

pub fn step_rows<T: Real>(ladder: &ChainLadder<T>) -> Vec<StepRow> {
    (0..ladder.values.len())
        .map(|i| StepRow {
            index: i,
            num_edges: i,
            value: ladder.values[i].to_f64_lossy(),
            step: if i == 0 { 0.0 } else { ladder.step(i).to_f64_lossy() },
            kkt_residual: ladder.kkt_residuals[i].to_f64_lossy(),
        })
        .collect()
}

/// Checks every step against `r!/r^r` and, for large enough `m`, that the
/// top of the ladder clears `1 - r!/r^r`.
pub fn verify_gap_bound<T: Real>(ladder: &ChainLadder<T>, r: u32) -> Result<GapReport> {
    let bound = gap_bound(r).to_f64_lossy();
    let rows = step_rows(ladder);
    let step_violations = rows.iter().skip(1).filter(|row| row.step > bound + STEP_TOL).map(|row| row.index).collect();
    let monotone_violations = rows.iter().skip(1).filter(|row| row.step < -MONOTONE_TOL).map(|row| row.index).collect();
    let top = if r >= 3 && ladder.m >= minimal_m(r)? {
        let value = rows.last().map_or(0.0, |row| row.value);
        let threshold = 1.0 - bound;
        Some(TopCheck { value, threshold, passed: value > threshold })
    } else {
        None
    };
    Ok(GapReport {
        r,
        m: ladder.m,
        bound,
        max_step: ladder.max_step.to_f64_lossy(),
        max_step_index: ladder.max_step_index,
        rows,
        step_violations,
        monotone_violations,
        top,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearEqualityReport {
    pub eps: f64,
    pub delta: f64,
    /// Steps within `eps` of `r!/r^r`.
    pub triggered: Vec<usize>,
    /// Triggered steps whose previous value is not below `delta`.
    pub violations: Vec<usize>,
}

impl NearEqualityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const NEAR_EQUALITY_EPS: f64 = 0.01;
pub const NEAR_EQUALITY_DELTA: f64 = 0.01;

/// A step close to `r!/r^r` forces the new edge's vertices to carry weight
/// near `1/r` each, leaving almost nothing for the previous graph; so any
/// near-maximal step must start from a value close to 0.
pub fn near_equality_check<T: Real>(ladder: &ChainLadder<T>, r: u32, eps: f64, delta: f64) -> NearEqualityReport {
    let bound = gap_bound(r).to_f64_lossy();
    let mut triggered = Vec::new();
    let mut violations = Vec::new();
    for i in 1..ladder.values.len() {
        if ladder.step(i).to_f64_lossy() > bound - eps {
            triggered.push(i);
            if !(ladder.values[i - 1].to_f64_lossy() < delta) {
                violations.push(i);
            }
        }
    }
    NearEqualityReport { eps, delta, triggered, violations }
}

/// Longest interval between consecutive (sorted) ladder values, with the
/// index of its upper end in sorted order.
pub fn largest_uncovered_gap<T: Real>(values: &[T]) -> (T, usize) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = (T::zero(), 0);
    for i in 1..sorted.len() {
        let gap = sorted[i] - sorted[i - 1];
        if gap > best.0 {
            best = (gap, i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn minimal_m_for_triples() {
        assert_eq!(minimal_m(3).unwrap(), 13);
        let target = q(7, 9);
        assert_eq!(complete_uniform_value(3, 12), q(110, 144));
        assert!(complete_uniform_value(3, 12) < target);
        assert_eq!(complete_uniform_value(3, 13), q(132, 169));
        assert!(complete_uniform_value(3, 13) > target);
        assert!(minimal_m(2).is_err());
    }

    #[test]
    fn minimal_m_satisfies_strict_inequality() {
        for r in 3..=6 {
            let m = minimal_m(r).unwrap();
            let target = q(1, 1) - gap_bound(r);
            assert!(complete_uniform_value(r, m) > target);
            assert!(m == r as usize || complete_uniform_value(r, m - 1) <= target);
        }
    }

    #[test]
    fn enumerations() {
        let colex = edge_enumeration(4, 3, EdgeOrder::Colex).unwrap();
        assert_eq!(colex, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]);
        assert_eq!(edge_enumeration(6, 3, EdgeOrder::Lex).unwrap().len(), 20);
        assert_eq!(edge_enumeration(3, 3, EdgeOrder::Colex).unwrap(), vec![vec![0, 1, 2]]);
        let mut shuffled = edge_enumeration(6, 3, EdgeOrder::Random(5)).unwrap();
        assert_eq!(shuffled, edge_enumeration(6, 3, EdgeOrder::Random(5)).unwrap());
        shuffled.sort();
        assert_eq!(shuffled, edge_enumeration(6, 3, EdgeOrder::Lex).unwrap());
        assert!(edge_enumeration(2, 3, EdgeOrder::Colex).is_err());
    }

    #[test]
    fn single_edge_chain() {
        let ladder: ChainLadder<f64> = build_chain_ladder(&ChainConfig::new(3, 3)).unwrap();
        assert_eq!(ladder.len(), 2);
        assert!((ladder.values[1] - 2.0 / 9.0).abs() < 1e-12);
        let rep = verify_gap_bound(&ladder, 3).unwrap();
        assert!(rep.passed());
        assert!((rep.max_step - 2.0 / 9.0).abs() < 1e-12);
        let ne = near_equality_check(&ladder, 3, NEAR_EQUALITY_EPS, NEAR_EQUALITY_DELTA);
        assert_eq!(ne.triggered, vec![1]);
        assert!(ne.passed());
    }

    #[test]
    fn extra_vertex_gets_no_weight() {
        let ladder: ChainLadder<f64> = build_chain_ladder(&ChainConfig::new(3, 4)).unwrap();
        assert!((ladder.values[1] - 2.0 / 9.0).abs() < 1e-8);
        assert!(ladder.points[1].coords()[3] < 1e-6);
    }

    #[test]
    fn near_equality_vacuous_and_violating() {
        let quiet = ChainLadder::from_values(3, 6, vec![0.0, 0.1, 0.2, 0.3]);
        let rep = near_equality_check(&quiet, 3, 0.01, 0.01);
        assert!(rep.triggered.is_empty() && rep.passed());
        let bad = ChainLadder::from_values(3, 6, vec![0.0, 0.1, 0.1 + 2.0 / 9.0]);
        let rep = near_equality_check(&bad, 3, 0.01, 0.01);
        assert_eq!(rep.violations, vec![2]);
    }

    #[test]
    fn gap_report_flags_offenders() {
        let ladder = ChainLadder::from_values(3, 6, vec![0.0, 0.2, 0.19, 0.5]);
        let rep = verify_gap_bound(&ladder, 3).unwrap();
        assert_eq!(rep.step_violations, vec![3]);
        assert_eq!(rep.monotone_violations, vec![2]);
        assert!(!rep.passed());
    }

    #[test]
    fn uncovered_gap() {
        let (gap, idx) = largest_uncovered_gap::<f64>(&[0.0, 0.5, 0.2, 0.9]);
        assert!((gap - 0.4).abs() < 1e-15);
        assert_eq!(idx, 3);
    }
}
