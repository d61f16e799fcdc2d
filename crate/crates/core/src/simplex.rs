//! Maximizing Lagrange polynomials over the standard simplex.
//!
//! [`maximize`] runs projected gradient ascent from many starts and returns
//! the best point found. The value is a lower bound on the Lagrangian; its
//! quality is reported through the KKT residual. For small dimension
//! [`certify_max_upper`] gives a rigorous upper bound from a rational grid.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{LagrangePolynomial, Pattern};
use crate::scalar::{Real, Scalar};

/// A point of the standard simplex `S_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    coords: Vec<T>,
}

impl<T: Real> SimplexPoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        let sum = coords.iter().fold(T::zero(), |a, &b| a + b);
        if coords.iter().any(|&c| !(c >= T::zero())) || (sum - T::one()).abs() > T::simplex_tol() {
            return Err(Error::NotOnSimplex(format!("{coords:?}")));
        }
        Ok(Self { coords })
    }

    pub fn uniform(m: usize) -> Self {
        let v = T::one() / T::from_usize(m).expect("dimension fits scalar");
        Self { coords: vec![v; m] }
    }

    pub fn vertex(m: usize, i: usize) -> Self {
        let mut coords = vec![T::zero(); m];
        coords[i] = T::one();
        Self { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn m(&self) -> usize {
        self.coords.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.coords
    }
}

/// Euclidean projection onto the simplex (sort-and-threshold).
pub fn project_to_simplex<T: Real>(v: &[T]) -> SimplexPoint<T> {
    assert!(!v.is_empty(), "projection needs at least one coordinate");
    let mut sorted: Vec<T> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (k, &u) in sorted.iter().enumerate() {
        cumsum = cumsum + u;
        let t = (cumsum - T::one()) / T::from_usize(k + 1).unwrap();
        if u - t > T::zero() {
            theta = t;
        }
    }
    let coords = v.iter().map(|&x| (x - theta).max(T::zero())).collect();
    SimplexPoint { coords }
}

/// Exact partial derivatives of the polynomial at `x`, in any scalar type.
pub fn gradient<T: Scalar>(poly: &LagrangePolynomial, x: &[T]) -> Result<Vec<T>> {
    if x.len() != poly.vars() {
        return Err(Error::LengthMismatch { expected: poly.vars(), got: x.len() });
    }
    let mut grad = vec![T::zero(); x.len()];
    for t in poly.monomials() {
        for (i, &ei) in t.exponents.iter().enumerate() {
            if ei == 0 {
                continue;
            }
            let scaled = &t.coefficient * BigRational::from_integer(BigInt::from(ei));
            let mut term = T::from_rational(&scaled);
            for (j, &ej) in t.exponents.iter().enumerate() {
                let e = if j == i { ej - 1 } else { ej };
                for _ in 0..e {
                    term = term * x[j].clone();
                }
            }
            grad[i] = grad[i].clone() + term;
        }
    }
    Ok(grad)
}

/// First-order optimality residual on the simplex. By Euler's identity every
/// partial on the support of a critical point equals `r * value`, and no
/// partial off the support may exceed it.
pub fn kkt_residual<T: Real>(poly: &LagrangePolynomial, x: &[T]) -> Result<T> {
    let grad = gradient(poly, x)?;
    let value = poly.eval(x)?;
    let target = T::from_u32(poly.degree()).unwrap() * value;
    let mut on = T::zero();
    let mut off = T::zero();
    for (&xi, &gi) in x.iter().zip(&grad) {
        if xi > T::support_floor() {
            on = on.max((gi - target).abs());
        } else {
            off = off.max(gi - target);
        }
    }
    Ok(on + off)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Projected gradient step with Armijo backtracking along the projection arc.
    #[default]
    Armijo,
    /// Baum-Eagon update `x_i <- x_i * d_i / (r * value)`; monotone for
    /// polynomials with non-negative coefficients and never leaves the face
    /// it starts in.
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of random starts, on top of the uniform point and the vertices.
    pub starts: usize,
    pub max_iterations: usize,
    pub step_rule: StepRule,
    /// Convergence threshold on the sup-norm movement of the iterate.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { starts: 50, max_iterations: 5000, step_rule: StepRule::Armijo, tolerance: 1e-12, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidParameter("starts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Best point found by [`maximize`]; `value` is a lower bound on the
/// Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<T> {
    pub value: T,
    pub point: SimplexPoint<T>,
    pub kkt_residual: T,
    pub starts_used: usize,
    pub seed: u64,
    /// Index of the start that produced the result.
    pub best_start: usize,
}

/// Float image of a polynomial laid out for repeated evaluation.
struct Compiled<T> {
    degree: T,
    terms: Vec<(T, Vec<(usize, u32)>)>,
}

impl<T: Real> Compiled<T> {
    fn new(poly: &LagrangePolynomial) -> Self {
        let terms = poly
            .monomials()
            .iter()
            .map(|t| {
                let factors = t.exponents.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
                (T::from_rational(&t.coefficient), factors)
            })
            .collect();
        Self { degree: T::from_u32(poly.degree()).unwrap(), terms }
    }

    fn value(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (c, factors)| acc + factors.iter().fold(*c, |p, &(i, e)| p * x[i].powi(e as i32)))
    }

    fn value_and_gradient(&self, x: &[T], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut value = T::zero();
        for (c, factors) in &self.terms {
            value = value + factors.iter().fold(*c, |p, &(i, e)| p * x[i].powi(e as i32));
            for (k, &(i, e)) in factors.iter().enumerate() {
                let mut d = *c * T::from_u32(e).unwrap() * x[i].powi(e as i32 - 1);
                for (l, &(j, f)) in factors.iter().enumerate() {
                    if l != k {
                        d = d * x[j].powi(f as i32);
                    }
                }
                grad[i] = grad[i] + d;
            }
        }
        value
    }
}

fn sup_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// Zeroes coordinates below the support floor and rescales onto the simplex.
fn shrink_support<T: Real>(x: &mut [T]) {
    for c in x.iter_mut() {
        if *c < T::support_floor() {
            *c = T::zero();
        }
    }
    let sum = x.iter().fold(T::zero(), |a, &b| a + b);
    if sum > T::zero() {
        x.iter_mut().for_each(|c| *c = *c / sum);
    }
}

fn ascend<T: Real>(poly: &Compiled<T>, start: Vec<T>, cfg: &OptimizerConfig) -> (Vec<T>, T) {
    let m = start.len();
    let tol = T::lit(cfg.tolerance);
    let mut x = start;
    shrink_support(&mut x);
    let mut grad = vec![T::zero(); m];
    let mut value = poly.value_and_gradient(&x, &mut grad);
    let gmax = grad.iter().fold(T::zero(), |a, &g| a.max(g.abs()));
    let mut step = if gmax > T::zero() { T::one() / gmax } else { T::one() };
    let min_step = T::epsilon() * T::epsilon();
    let sufficient = T::lit(1e-4);
    let mut trial = vec![T::zero(); m];

    for _ in 0..cfg.max_iterations {
        let accepted = match cfg.step_rule {
            StepRule::Armijo => loop {
                let shifted: Vec<T> = x.iter().zip(&grad).map(|(&xi, &gi)| xi + step * gi).collect();
                trial = project_to_simplex(&shifted).into_inner();
                shrink_support(&mut trial);
                let model = x.iter().zip(&trial).zip(&grad).fold(T::zero(), |a, ((&xi, &yi), &gi)| a + gi * (yi - xi));
                if sup_distance(&x, &trial) == T::zero() {
                    break false;
                }
                let fy = poly.value(&trial);
                if fy >= value + sufficient * model && fy >= value {
                    break true;
                }
                step = step * T::lit(0.5);
                if step < min_step {
                    break false;
                }
            },
            StepRule::Multiplicative => {
                let denom = poly.degree * value;
                if denom <= T::zero() {
                    false
                } else {
                    for i in 0..m {
                        trial[i] = x[i] * grad[i] / denom;
                    }
                    shrink_support(&mut trial);
                    poly.value(&trial) >= value
                }
            }
        };
        if !accepted {
            break;
        }
        let moved = sup_distance(&x, &trial);
        std::mem::swap(&mut x, &mut trial);
        value = poly.value_and_gradient(&x, &mut grad);
        step = step * T::lit(2.0);
        if moved < tol {
            break;
        }
    }
    (x, value)
}

fn random_start<T: Real>(m: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // normalized exponentials: a uniform draw from the simplex
    let draws: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| T::lit(d / total)).collect()
}

/// Multi-start maximization of `lambda_P` over the simplex.
pub fn maximize<T: Real>(pattern: &Pattern, config: &OptimizerConfig) -> Result<OptResult<T>> {
    maximize_poly(&pattern.lagrange_polynomial(), config, &[])
}

/// As [`maximize`], with extra warm starts tried right after the uniform
/// point. Starts run in parallel; each random start owns a generator seeded
/// with `seed ^ start_index`, so the result does not depend on scheduling.
pub fn maximize_poly<T: Real>(
    poly: &LagrangePolynomial,
    config: &OptimizerConfig,
    warm_starts: &[Vec<T>],
) -> Result<OptResult<T>> {
    config.validate()?;
    let m = poly.vars();
    for w in warm_starts {
        if w.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: w.len() });
        }
    }
    let compiled = Compiled::<T>::new(poly);

    let fixed = 1 + warm_starts.len() + m;
    let total = fixed + config.starts;
    let start_point = |idx: usize| -> Vec<T> {
        if idx == 0 {
            SimplexPoint::<T>::uniform(m).into_inner()
        } else if idx <= warm_starts.len() {
            project_to_simplex(&warm_starts[idx - 1]).into_inner()
        } else if idx < fixed {
            SimplexPoint::<T>::vertex(m, idx - 1 - warm_starts.len()).into_inner()
        } else {
            random_start(m, config.seed ^ idx as u64)
        }
    };

    let runs: Vec<(Vec<T>, T)> =
        (0..total).into_par_iter().map(|idx| ascend(&compiled, start_point(idx), config)).collect();

    let mut best = 0;
    for (idx, (_, v)) in runs.iter().enumerate() {
        if *v > runs[best].1 {
            best = idx;
        }
    }
    let coords = runs[best].0.clone();
    let value = poly.eval(&coords)?;
    let kkt = kkt_residual(poly, &coords)?;
    Ok(OptResult {
        value,
        point: SimplexPoint { coords },
        kkt_residual: kkt,
        starts_used: total,
        seed: config.seed,
        best_start: best,
    })
}

/// Rigorous upper bound on the Lagrangian from the grid `{k/N} ∩ S_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub resolution: usize,
    pub grid_max: f64,
    /// Grid numerators of the best grid point (divide by `resolution`).
    pub grid_argmax: Vec<usize>,
    pub lipschitz: f64,
    pub bound: f64,
    /// Set when the bound is no better than the trivial bound 1.
    pub coarse: bool,
}

pub const GRID_MAX_VARS: usize = 6;

/// Grid certification of an upper bound on the Lagrangian, for `m <= 6`.
///
/// Every simplex point `x` has a grid point `y` (largest-remainder rounding
/// of `N x`) whose coordinates differ by less than `1/N`; since both sum to
/// one, `|x - y|_1 < 2 floor(m/2) / N`. All partials are non-negative and at
/// most `L` on the simplex (see [`partial_bound`]), and `x - y` sums to
/// zero, so `|f(x) - f(y)| <= (L/2) |x - y|_1 < L floor(m/2) / N`. For
/// `m <= 3` this is the plain `L / N`.
pub fn certify_max_upper(pattern: &Pattern, resolution: usize) -> Result<UpperBound> {
    let m = pattern.m();
    if m > GRID_MAX_VARS {
        return Err(Error::TooManyVariables { max: GRID_MAX_VARS, got: m });
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let poly = pattern.lagrange_polynomial();
    if poly.is_zero() {
        return Ok(UpperBound {
            resolution,
            grid_max: 0.0,
            grid_argmax: vec![0; m],
            lipschitz: 0.0,
            bound: 0.0,
            coarse: false,
        });
    }
    let compiled = Compiled::<f64>::new(&poly);
    let coeff_sum = f64::from_rational(&poly.coefficient_sum());
    let lipschitz = partial_bound(&poly);

    let scale = resolution as f64;
    let (grid_max, grid_argmax) = (0..=resolution)
        .into_par_iter()
        .map(|first| {
            let mut best = (f64::NEG_INFINITY, Vec::new());
            let mut counts = vec![0usize; m];
            let mut x = vec![0.0; m];
            counts[0] = first;
            for_each_composition(resolution - first, &mut counts, 1, &mut |c| {
                for (xi, &ci) in x.iter_mut().zip(c.iter()) {
                    *xi = ci as f64 / scale;
                }
                let v = compiled.value(&x);
                if v > best.0 {
                    best = (v, c.to_vec());
                }
            });
            best
        })
        .reduce(|| (f64::NEG_INFINITY, Vec::new()), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    // floating point slack for the grid evaluations themselves
    let slack = 16.0 * f64::EPSILON * coeff_sum;
    let bound = grid_max + lipschitz * (m / 2) as f64 / scale + slack;
    Ok(UpperBound { resolution, grid_max, grid_argmax, lipschitz, bound, coarse: bound >= 1.0 })
}

/// Upper bound on every partial derivative over the simplex: term by term,
/// `c x^a` has `d/dx_i = c a_i x^(a - e_i)`, and a monomial of degree `d`
/// peaks on the simplex at `prod (b_j/d)^(b_j)`.
pub fn partial_bound(poly: &LagrangePolynomial) -> f64 {
    let d = poly.degree().saturating_sub(1) as f64;
    let mut per_var = vec![0.0f64; poly.vars()];
    for t in poly.monomials() {
        let c = f64::from_rational(&t.coefficient);
        for (i, &k) in t.exponents.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let peak: f64 = t
                .exponents
                .iter()
                .enumerate()
                .map(|(j, &e)| if j == i { e - 1 } else { e })
                .filter(|&b| b > 0)
                .map(|b| (b as f64 / d).powi(b as i32))
                .product();
            per_var[i] += c * k as f64 * peak;
        }
    }
    // headroom for rounding in the sums above
    per_var.into_iter().fold(0.0, f64::max) * (1.0 + 1e-12)
}

fn for_each_composition(rest: usize, counts: &mut [usize], pos: usize, f: &mut impl FnMut(&[usize])) {
    if pos + 1 >= counts.len() {
        if pos < counts.len() {
            counts[pos] = rest;
        } else if rest != 0 {
            return;
        }
        f(counts);
        return;
    }
    for v in 0..=rest {
        counts[pos] = v;
        for_each_composition(rest - v, counts, pos + 1, f);
    }
}
