//! Patterns of r-multisets, their blow-ups and Lagrange polynomials.
//!
//! Vertices, parts and variables are 0-based throughout the library; the
//! file formats in [`crate::io`] use 1-based numbering and convert on the
//! boundary.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::combinat::{binomial_u128, multinomial, subsets_lex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An r-multiset on `[m]`, stored as its multiplicity vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RMultiset {
    mult: Vec<u32>,
}

impl RMultiset {
    pub fn new(mult: Vec<u32>) -> Result<Self> {
        if mult.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Self { mult })
    }

    /// Builds a multiset on `[m]` from a non-decreasing list of 0-based
    /// elements, e.g. `[0, 0, 1]` for `{1,1,2}`.
    pub fn from_elements(m: usize, elements: &[usize]) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyGroundSet);
        }
        if elements.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::UnsortedMultiset);
        }
        let mut mult = vec![0u32; m];
        for &e in elements {
            if e >= m {
                return Err(Error::ElementOutOfRange { element: e + 1, m });
            }
            mult[e] += 1;
        }
        Ok(Self { mult })
    }

    pub fn r(&self) -> u32 {
        self.mult.iter().sum()
    }

    pub fn m(&self) -> usize {
        self.mult.len()
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    pub fn multiplicity(&self, i: usize) -> u32 {
        self.mult[i]
    }

    /// Sorted 0-based element list.
    pub fn elements(&self) -> Vec<usize> {
        self.mult.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize)).collect()
    }

    /// True when no element is repeated, i.e. this is an ordinary edge.
    pub fn is_simple(&self) -> bool {
        self.mult.iter().all(|&c| c <= 1)
    }

    /// `r! / prod_i D(i)!`, the number of orderings of the multiset.
    pub fn lagrange_coefficient(&self) -> BigInt {
        BigInt::from(multinomial(&self.mult))
    }
}

impl fmt::Display for RMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let elems: Vec<String> = self.elements().iter().map(|e| (e + 1).to_string()).collect();
        write!(f, "{{{}}}", elems.join(","))
    }
}

/// A duplicate-free collection of r-multisets on a common ground set `[m]`.
///
/// Uniformity `r = 0` and `r = 1` are accepted so that restricted
/// sub-patterns arising in inductive identities can be represented; the
/// file loaders insist on `r >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    r: u32,
    m: usize,
    multisets: Vec<RMultiset>,
}

impl Pattern {
    pub fn new(r: u32, m: usize, multisets: Vec<RMultiset>) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyGroundSet);
        }
        let mut seen = HashSet::with_capacity(multisets.len());
        for d in &multisets {
            if d.m() != m {
                return Err(Error::GroundSetMismatch { expected: m, got: d.m() });
            }
            if d.r() != r {
                return Err(Error::WrongUniformity { expected: r, got: d.r() });
            }
            if !seen.insert(d.multiplicities()) {
                return Err(Error::DuplicateMultiset(d.mult.clone()));
            }
        }
        Ok(Self { r, m, multisets })
    }

    pub fn empty(r: u32, m: usize) -> Result<Self> {
        Self::new(r, m, Vec::new())
    }

    /// Pattern from sorted 0-based element lists.
    pub fn from_element_lists(r: u32, m: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let multisets = lists
            .iter()
            .map(|l| {
                if l.len() != r as usize {
                    return Err(Error::WrongUniformity { expected: r, got: l.len() as u32 });
                }
                RMultiset::from_elements(m, l)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(r, m, multisets)
    }

    /// An ordinary r-graph on `[m]` viewed as a pattern.
    pub fn simple(r: u32, m: usize, edges: &[Vec<usize>]) -> Result<Self> {
        for e in edges {
            if e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::RepeatedVertex);
            }
        }
        Self::from_element_lists(r, m, edges)
    }

    /// The complete simple r-graph on `[m]`.
    pub fn complete_simple(r: u32, m: usize) -> Result<Self> {
        Self::simple(r, m, &subsets_lex(m, r as usize))
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn multisets(&self) -> &[RMultiset] {
        &self.multisets
    }

    pub fn len(&self) -> usize {
        self.multisets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multisets.is_empty()
    }

    pub fn contains(&self, d: &RMultiset) -> bool {
        self.multisets.contains(d)
    }

    pub fn is_subpattern_of(&self, other: &Pattern) -> bool {
        self.r == other.r && self.m == other.m && self.multisets.iter().all(|d| other.contains(d))
    }

    pub fn lagrange_polynomial(&self) -> LagrangePolynomial {
        LagrangePolynomial::from_pattern(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coefficient: BigRational,
}

/// `r! * sum_{D in P} prod_i x_i^{D(i)} / D(i)!`, held with exact
/// rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangePolynomial {
    degree: u32,
    vars: usize,
    monomials: Vec<Monomial>,
}

impl LagrangePolynomial {
    pub fn zero(degree: u32, vars: usize) -> Self {
        Self { degree, vars, monomials: Vec::new() }
    }

    pub fn from_pattern(p: &Pattern) -> Self {
        let monomials = p
            .multisets
            .iter()
            .map(|d| Monomial {
                exponents: d.mult.clone(),
                coefficient: BigRational::from_integer(d.lagrange_coefficient()),
            })
            .collect();
        Self { degree: p.r, vars: p.m, monomials }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Option<&BigRational> {
        self.monomials.iter().find(|t| t.exponents == exponents).map(|t| &t.coefficient)
    }

    pub fn coefficient_sum(&self) -> BigRational {
        self.monomials.iter().fold(BigRational::zero(), |acc, t| acc + &t.coefficient)
    }

    /// Evaluates at `x` in any scalar type; with [`BigRational`] the result
    /// is exact.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        if x.len() != self.vars {
            return Err(Error::LengthMismatch { expected: self.vars, got: x.len() });
        }
        let mut acc = T::zero();
        for t in &self.monomials {
            let mut term = T::from_rational(&t.coefficient);
            for (xi, &e) in x.iter().zip(&t.exponents) {
                for _ in 0..e {
                    term = term * xi.clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Exact value at `(1/s, ..., 1/s)`. Variables beyond `vars` are
    /// padding and do not occur, so the value is `coefficient_sum / s^r`.
    pub fn eval_uniform_exact(&self, s: usize) -> Result<BigRational> {
        if s == 0 || s < self.vars {
            return Err(Error::InvalidParameter(format!(
                "uniform point needs s >= {} variables, got s = {s}",
                self.vars.max(1)
            )));
        }
        let den = num_traits::pow(BigInt::from(s), self.degree as usize);
        Ok(self.coefficient_sum() / BigRational::from_integer(den))
    }
}

impl fmt::Display for LagrangePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.monomials.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coefficient)?;
            for (i, &e) in t.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Profile of the r-set `edge` with respect to a partition given as a part
/// index per vertex.
pub fn profile(edge: &[usize], part_of: &[usize], m: usize) -> Result<RMultiset> {
    if m == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let mut seen = HashSet::with_capacity(edge.len());
    let mut mult = vec![0u32; m];
    for &v in edge {
        if !seen.insert(v) {
            return Err(Error::RepeatedVertex);
        }
        let part = *part_of.get(v).ok_or(Error::VertexOutsidePartition(v))?;
        if part >= m {
            return Err(Error::VertexOutsidePartition(v));
        }
        mult[part] += 1;
    }
    Ok(RMultiset { mult })
}

/// A pattern together with the sizes of the parts it is blown up into.
/// Part `i` occupies the consecutive vertex range after parts `0..i`.
#[derive(Debug, Clone)]
pub struct BlowupSpec {
    pattern: Pattern,
    part_sizes: Vec<usize>,
}

impl BlowupSpec {
    pub fn new(pattern: Pattern, part_sizes: Vec<usize>) -> Result<Self> {
        if part_sizes.len() != pattern.m() {
            return Err(Error::LengthMismatch { expected: pattern.m(), got: part_sizes.len() });
        }
        Ok(Self { pattern, part_sizes })
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    pub fn n(&self) -> usize {
        self.part_sizes.iter().sum()
    }

    /// Part index of every vertex.
    pub fn part_assignment(&self) -> Vec<usize> {
        self.part_sizes.iter().enumerate().flat_map(|(i, &sz)| std::iter::repeat_n(i, sz)).collect()
    }

    fn part_start(&self, i: usize) -> usize {
        self.part_sizes[..i].iter().sum()
    }
}

/// Edge list of the blow-up: every r-subset of `[n]` whose profile lies in
/// the pattern, each edge sorted, the list sorted lexicographically.
pub fn blow_up(spec: &BlowupSpec) -> Vec<Vec<usize>> {
    let mut edges = Vec::new();
    for d in spec.pattern.multisets() {
        // choices inside each part, then their cartesian product
        let per_part: Vec<Vec<Vec<usize>>> = d
            .multiplicities()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let start = spec.part_start(i);
                subsets_lex(spec.part_sizes[i], c as usize)
                    .into_iter()
                    .map(|s| s.into_iter().map(|v| v + start).collect())
                    .collect()
            })
            .collect();
        if per_part.iter().any(|choices| choices.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; per_part.len()];
        loop {
            let mut edge: Vec<usize> = idx.iter().zip(&per_part).flat_map(|(&k, ch)| ch[k].iter().copied()).collect();
            edge.sort_unstable();
            edges.push(edge);
            let mut pos = per_part.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < per_part[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&k| k == 0) {
                break;
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// `sum_{D in P} prod_i C(|V_i|, D(i))`, or `None` on overflow.
pub fn blow_up_count(spec: &BlowupSpec) -> Option<u128> {
    let mut total: u128 = 0;
    for d in spec.pattern.multisets() {
        let mut prod: u128 = 1;
        for (&sz, &c) in spec.part_sizes.iter().zip(d.multiplicities()) {
            prod = prod.checked_mul(binomial_u128(sz as u64, c as u64)?)?;
        }
        total = total.checked_add(prod)?;
    }
    Some(total)
}

/// Splits `n` into parts proportional to `fractions` by largest-remainder
/// rounding; ties go to the lower index.
pub fn largest_remainder_sizes(n: usize, fractions: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|v| v.floor().max(0.0) as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = raw[a] - raw[a].floor();
        let rb = raw[b] - raw[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub n: usize,
    pub part_sizes: Vec<usize>,
    pub edges: u128,
    pub density: f64,
    pub lagrange_value: f64,
    pub error: f64,
}

/// Compares blow-up edge densities with the Lagrange polynomial at the
/// realized part fractions. The error is expected to decay like `O(1/n)`.
pub fn blowup_density_check(pattern: &Pattern, fractions: &[f64], n_values: &[usize]) -> Result<Vec<DensityRow>> {
    if fractions.len() != pattern.m() {
        return Err(Error::LengthMismatch { expected: pattern.m(), got: fractions.len() });
    }
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|&f| !(f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSimplex(format!("{fractions:?}")));
    }
    let poly = pattern.lagrange_polynomial();
    let r = pattern.r() as u64;
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let sizes = largest_remainder_sizes(n, fractions);
        if (n as u64) < r || sizes.iter().zip(fractions).any(|(&sz, &f)| f > 0.0 && sz == 0) {
            return Err(Error::TooSmall { n });
        }
        let spec = BlowupSpec::new(pattern.clone(), sizes.clone())?;
        let edges = blow_up_count(&spec).ok_or(Error::TooSmall { n })?;
        let total = binomial_u128(n as u64, r).ok_or(Error::TooSmall { n })?;
        let density = edges as f64 / total as f64;
        let actual: Vec<f64> = sizes.iter().map(|&sz| sz as f64 / n as f64).collect();
        let lagrange_value = poly.eval(&actual)?;
        rows.push(DensityRow {
            n,
            part_sizes: sizes,
            edges,
            density,
            lagrange_value,
            error: (density - lagrange_value).abs(),
        });
    }
    Ok(rows)
}
