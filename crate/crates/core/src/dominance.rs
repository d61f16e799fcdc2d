//! Compositions under the dominance order, down-closed sets and the
//! patterns they induce.
//!
//! Also home to the two-variable Muirhead inequality and the bunching check
//! for the two-part case. Half-integer indices are stored doubled (`2i`,
//! `2k`, `2h`) so the odd-`r` case stays in integer arithmetic.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
#[cfg(test)]
use num_traits::One;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinat::{binomial, weak_compositions};
use crate::error::{Error, Result};
use crate::pattern::{Pattern, RMultiset};
use crate::scalar::{f64_to_rational, Scalar};

/// A non-increasing tuple of non-negative integers: an element of `P_{r,s}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidComposition { parts, reason: "length must be at least 1" });
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidComposition { parts, reason: "parts must be non-increasing" });
        }
        Ok(Self { parts })
    }

    /// Sorts an arbitrary multiplicity vector into a composition.
    pub fn sorted_from(mut values: Vec<u32>) -> Result<Self> {
        values.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(values)
    }

    pub fn r(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn s(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn shape(&self) -> (u32, usize) {
        (self.r(), self.s())
    }

    pub fn prefix_sums(&self) -> Vec<u32> {
        self.parts
            .iter()
            .scan(0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// Sum of all prefix sums; strictly increases along the dominance order.
    pub fn prefix_total(&self) -> u64 {
        self.prefix_sums().iter().map(|&p| p as u64).sum()
    }

    /// `(c_0, c_1, ..., c_r)` where `c_k` counts parts equal to `k`.
    pub fn part_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.r() as usize + 1];
        for &p in &self.parts {
            counts[p as usize] += 1;
        }
        counts
    }
}

impl TryFrom<Vec<u32>> for Composition {
    type Error = Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Composition> for Vec<u32> {
    fn from(c: Composition) -> Self {
        c.parts
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join("-"))
    }
}

/// All of `P_{r,s}` in reverse lexicographic order.
pub fn compositions(r: u32, s: usize) -> Vec<Composition> {
    fn rec(rest: u32, cap: u32, s: usize, cur: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if cur.len() == s {
            if rest == 0 {
                out.push(Composition { parts: cur.clone() });
            }
            return;
        }
        let slots = (s - cur.len()) as u32;
        // the remaining slots can hold at most `cap` each
        if rest > cap.saturating_mul(slots) {
            return;
        }
        for v in (0..=rest.min(cap)).rev() {
            cur.push(v);
            rec(rest - v, v, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if s > 0 {
        rec(r, r, s, &mut Vec::with_capacity(s), &mut out);
    }
    out
}

/// `x ⪰ y`: every prefix sum of `x` is at least the matching prefix sum of `y`.
pub fn dominates(x: &Composition, y: &Composition) -> Result<bool> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch { left: x.shape(), right: y.shape() });
    }
    Ok(x.prefix_sums().iter().zip(y.prefix_sums()).all(|(&a, b)| a >= b))
}

/// The unique maximal element `(r, 0, ..., 0)`.
pub fn maximal(r: u32, s: usize) -> Composition {
    let mut parts = vec![0; s];
    parts[0] = r;
    Composition { parts }
}

/// The unique minimal element `(ceil(r/s), ..., floor(r/s))`.
pub fn minimal(r: u32, s: usize) -> Composition {
    let q = r / s as u32;
    let extra = (r % s as u32) as usize;
    Composition { parts: (0..s).map(|i| q + u32::from(i < extra)).collect() }
}

/// Down-closure check by full enumeration of `P_{r,s}`. All members must
/// share one shape; an empty set is down-closed.
pub fn is_down_closed(members: &BTreeSet<Composition>) -> bool {
    first_missing(members).is_none()
}

fn first_missing(members: &BTreeSet<Composition>) -> Option<Composition> {
    let shape = members.iter().next()?.shape();
    let all = compositions(shape.0, shape.1);
    for x in members {
        if x.shape() != shape {
            return Some(x.clone());
        }
        for y in &all {
            if !members.contains(y) && dominates(x, y).unwrap_or(false) {
                return Some(y.clone());
            }
        }
    }
    None
}

/// A down-closed subset of `P_{r,s}`, stored as an explicit member set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DownSet {
    r: u32,
    s: usize,
    members: BTreeSet<Composition>,
}

impl DownSet {
    pub fn new(r: u32, s: usize, members: BTreeSet<Composition>) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter("s must be at least 1".into()));
        }
        for x in &members {
            if x.shape() != (r, s) {
                return Err(Error::ShapeMismatch { left: (r, s), right: x.shape() });
            }
        }
        if let Some(missing) = first_missing(&members) {
            return Err(Error::NotDownClosed(missing.parts));
        }
        Ok(Self { r, s, members })
    }

    /// Smallest down-closed set containing the generators.
    pub fn down_closure(r: u32, s: usize, generators: &[Composition]) -> Result<Self> {
        let mut members = BTreeSet::new();
        for g in generators {
            if g.shape() != (r, s) {
                return Err(Error::ShapeMismatch { left: (r, s), right: g.shape() });
            }
        }
        for y in compositions(r, s) {
            if generators.iter().any(|g| dominates(g, &y).unwrap_or(false)) {
                members.insert(y);
            }
        }
        Ok(Self { r, s, members })
    }

    pub fn empty(r: u32, s: usize) -> Self {
        Self { r, s, members: BTreeSet::new() }
    }

    pub fn full(r: u32, s: usize) -> Self {
        Self { r, s, members: compositions(r, s).into_iter().collect() }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn members(&self) -> &BTreeSet<Composition> {
        &self.members
    }

    pub fn contains(&self, x: &Composition) -> bool {
        self.members.contains(x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `G_A`: every r-multiset on `[s]` whose sorted multiplicity vector lies in `A`.
pub fn pattern_of(a: &DownSet) -> Pattern {
    let multisets = weak_compositions(a.r, a.s)
        .into_iter()
        .filter(|mult| {
            let sorted = Composition::sorted_from(mult.clone()).expect("s >= 1");
            a.contains(&sorted)
        })
        .map(|mult| RMultiset::new(mult).expect("s >= 1"))
        .collect();
    Pattern::new(a.r, a.s, multisets).expect("distinct multiplicity vectors")
}

/// `<y, j>`: append `j` and re-sort non-increasingly.
pub fn insert_sorted(y: &Composition, j: u32) -> Composition {
    let mut parts = y.parts.clone();
    let pos = parts.iter().position(|&p| p < j).unwrap_or(parts.len());
    parts.insert(pos, j);
    Composition { parts }
}

/// `A \ j`: those `y` in `P_{r-j,s-1}` with `<y, j>` in `A`.
pub fn restrict(a: &DownSet, j: u32) -> Result<DownSet> {
    if j > a.r {
        return Err(Error::InvalidParameter(format!("j = {j} exceeds r = {}", a.r)));
    }
    if a.s < 2 {
        return Err(Error::InvalidParameter("restriction needs s >= 2".into()));
    }
    let members = compositions(a.r - j, a.s - 1).into_iter().filter(|y| a.contains(&insert_sorted(y, j))).collect();
    Ok(DownSet { r: a.r - j, s: a.s - 1, members })
}

/// `P_{r,s}` sorted by prefix-sum total, then lexicographically. Since
/// `x ⪰ y`, `x != y` forces a strictly larger prefix total, this refines the
/// dominance order and every prefix of the list is down-closed.
pub fn linear_extension_of(r: u32, s: usize) -> Vec<Composition> {
    let mut all = compositions(r, s);
    all.sort_by(|a, b| a.prefix_total().cmp(&b.prefix_total()).then_with(|| a.cmp(b)));
    all
}

/// The enumeration `R_1, ..., R_m` of `P_{r,r}` used by the density ladder.
pub fn linear_extension(r: u32) -> Vec<Composition> {
    linear_extension_of(r, r as usize)
}

/// Every down-closed subset of `P_{r,s}`, found as order ideals: walk a
/// linear extension and admit an element only if everything it dominates
/// is already in.
pub fn down_sets(r: u32, s: usize) -> Vec<DownSet> {
    let elems = linear_extension_of(r, s);
    let below: Vec<Vec<usize>> = elems
        .iter()
        .enumerate()
        .map(|(i, x)| (0..i).filter(|&j| dominates(x, &elems[j]).unwrap_or(false)).collect())
        .collect();

    fn rec(idx: usize, chosen: &mut Vec<bool>, below: &[Vec<usize>], out: &mut Vec<Vec<bool>>) {
        if idx == chosen.len() {
            out.push(chosen.clone());
            return;
        }
        rec(idx + 1, chosen, below, out);
        if below[idx].iter().all(|&j| chosen[j]) {
            chosen[idx] = true;
            rec(idx + 1, chosen, below, out);
            chosen[idx] = false;
        }
    }
    let mut masks = Vec::new();
    rec(0, &mut vec![false; elems.len()], &below, &mut masks);
    masks
        .into_iter()
        .map(|mask| DownSet {
            r,
            s,
            members: elems.iter().zip(mask).filter(|(_, m)| *m).map(|(e, _)| e.clone()).collect(),
        })
        .collect()
}

fn check_half_indices(k2: u32, i2: u32, j2: u32) -> Result<()> {
    if i2 >= j2 || j2 > k2 {
        return Err(Error::InvalidParameter(format!("need 0 <= i < j <= k, got 2i={i2}, 2j={j2}, 2k={k2}")));
    }
    if !(i2 + k2).is_multiple_of(2) || !(j2 + k2).is_multiple_of(2) {
        return Err(Error::InvalidParameter("i and j must be integer translates of k".into()));
    }
    Ok(())
}

fn pow<T: Scalar>(base: &T, e: u32) -> T {
    (0..e).fold(T::one(), |acc, _| acc * base.clone())
}

/// `x^{k+i} y^{k-i} + x^{k-i} y^{k+i}` with doubled indices.
pub fn muirhead_pair<T: Scalar>(x: &T, y: &T, k2: u32, i2: u32) -> T {
    let hi = (k2 + i2) / 2;
    let lo = (k2 - i2) / 2;
    pow(x, hi) * pow(y, lo) + pow(x, lo) * pow(y, hi)
}

/// The special case of Muirhead's inequality for `0 <= i < j <= k`, with
/// all indices doubled. Floating point comparisons get a relative slack of
/// `1e-12`; exact scalars are compared exactly.
pub fn muirhead_check<T: Scalar>(x: &T, y: &T, k2: u32, i2: u32, j2: u32) -> Result<bool> {
    check_half_indices(k2, i2, j2)?;
    if *x < T::zero() || *y < T::zero() {
        return Err(Error::InvalidParameter("x and y must be non-negative".into()));
    }
    let lhs = muirhead_pair(x, y, k2, i2);
    let rhs = muirhead_pair(x, y, k2, j2);
    let scale = if rhs > T::one() { rhs.clone() } else { T::one() };
    let slack = T::from_rational(&BigRational::new(1.into(), BigInt::from(10).pow(12))) * scale;
    Ok(lhs <= rhs + slack)
}

/// Doubled elements of `I_h = (Z + k) ∩ [-h, h]`.
pub fn half_interval(k2: u32, h2: u32) -> Vec<i64> {
    let (k2, h2) = (k2 as i64, h2 as i64);
    (-h2..=h2).filter(|i| (i + k2).rem_euclid(2) == 0).collect()
}

/// Left side of the two-variable inequality
/// `S_h ((x+y)/2)^{2k} - sum_{i in I_h} C(2k, k+i) x^{k+i} y^{k-i}` where
/// `S_h = sum_{i in I_h} C(2k, k+i)`, with `r = 2k`.
pub fn aim_lhs<T: Scalar>(r: u32, h2: u32, x: &T, y: &T) -> T {
    let binom = |i2: i64| -> T {
        let top = ((r as i64 + i2) / 2) as u64;
        T::from_rational(&BigRational::from_integer(binomial(r as u64, top).into()))
    };
    let two = T::one() + T::one();
    let mean = (x.clone() + y.clone()) / two;
    let mut weight = T::zero();
    let mut subtract = T::zero();
    for i2 in half_interval(r, h2) {
        let c = binom(i2);
        weight = weight + c.clone();
        let hi = ((r as i64 + i2) / 2) as u32;
        subtract = subtract + c * pow(x, hi) * pow(y, r - hi);
    }
    weight * pow(&mean, r) - subtract
}

/// One Muirhead inequality `M(i, j) >= 0` used with a non-negative weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuirheadTerm {
    pub i2: i64,
    pub j2: i64,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub weight: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BunchingReport {
    pub r: u32,
    pub h2: u32,
    /// Per-monomial coefficient of `x^{k+j} y^{k-j}` (equal to that of the
    /// mirrored monomial), for doubled `j` in `I_k^+`.
    #[serde(serialize_with = "crate::io::ser_rational_pairs")]
    pub coefficients: Vec<(i64, BigRational)>,
    pub signs_ok: bool,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub coefficient_sum: BigRational,
    pub sum_zero: bool,
    pub samples: usize,
    /// Smallest sampled value of the left side, evaluated exactly.
    pub min_sample: f64,
    pub samples_ok: bool,
    /// An explicit decomposition into weighted Muirhead inequalities.
    pub pairing: Vec<MuirheadTerm>,
    pub pairing_ok: bool,
}

impl BunchingReport {
    pub fn passed(&self) -> bool {
        self.signs_ok && self.sum_zero && self.samples_ok && self.pairing_ok
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.signs_ok {
            out.push("coefficient signs");
        }
        if !self.sum_zero {
            out.push("coefficient sum");
        }
        if !self.samples_ok {
            out.push("sampled inequality");
        }
        if !self.pairing_ok {
            out.push("muirhead pairing");
        }
        out
    }
}

/// Checks the bunching argument for the two-part case at uniformity `r`
/// and doubled threshold `h2` (`h` must lie in `I_k^+`, `k = r/2`).
pub fn bunching_verify(r: u32, h2: u32, samples: usize, seed: u64) -> Result<BunchingReport> {
    if r < 2 {
        return Err(Error::UniformityTooSmall { min: 2, got: r });
    }
    if h2 > r || !(h2 + r).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("h = {}/2 is not in I_k^+ for r = {r}", h2)));
    }
    let two_pow = BigRational::from_integer(BigInt::from(2).pow(r));
    let binom =
        |j2: i64| -> BigRational { BigRational::from_integer(binomial(r as u64, ((r as i64 + j2) / 2) as u64).into()) };
    let inside = half_interval(r, h2);
    let weight: BigRational = inside.iter().map(|&i| binom(i)).sum();
    let positive_half: Vec<i64> = half_interval(r, r).into_iter().filter(|&j| j >= 0).collect();

    let coefficients: Vec<(i64, BigRational)> = positive_half
        .iter()
        .map(|&j2| {
            let mut c = binom(j2) * &weight / &two_pow;
            if j2 <= h2 as i64 {
                c -= binom(j2);
            }
            (j2, c)
        })
        .collect();
    let signs_ok =
        coefficients.iter().all(|(j2, c)| if *j2 <= h2 as i64 { !c.is_positive() } else { !c.is_negative() });
    let coefficient_sum: BigRational = coefficients
        .iter()
        .map(|(j2, c)| if *j2 == 0 { c.clone() } else { c * BigRational::from_integer(2.into()) })
        .sum();
    let sum_zero = coefficient_sum.is_zero();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sample: Option<BigRational> = None;
    for _ in 0..samples {
        let x = f64_to_rational(rng.gen_range(0.0..=5.0)).expect("finite");
        let y = f64_to_rational(rng.gen_range(0.0..=5.0)).expect("finite");
        let v = aim_lhs(r, h2, &x, &y);
        if min_sample.as_ref().is_none_or(|m| v < *m) {
            min_sample = Some(v);
        }
    }
    let tol = -BigRational::new(1.into(), BigInt::from(10).pow(10));
    let samples_ok = min_sample.as_ref().is_none_or(|m| *m >= tol);

    let pairing = muirhead_pairing(&coefficients, h2 as i64);
    let pairing_ok = pairing_reconstructs(&pairing, &coefficients);

    Ok(BunchingReport {
        r,
        h2,
        coefficients,
        signs_ok,
        coefficient_sum,
        sum_zero,
        samples,
        min_sample: min_sample.map_or(0.0, |m| m.to_f64_lossy()),
        samples_ok,
        pairing,
        pairing_ok,
    })
}

/// Greedy transport of negative coefficient mass (indices up to `h`) onto
/// positive mass (indices above `h`). In units of `M(i, j)`, which has unit
/// coefficients on its four monomials, index `i > 0` carries mass `-c_i`,
/// while the self-paired middle term `i = 0` carries `-c_0 / 2`.
fn muirhead_pairing(coefficients: &[(i64, BigRational)], h2: i64) -> Vec<MuirheadTerm> {
    let half = BigRational::new(1.into(), 2.into());
    let mut need: Vec<(i64, BigRational)> = coefficients
        .iter()
        .filter(|(j2, _)| *j2 <= h2)
        .map(|(j2, c)| (*j2, if *j2 == 0 { -c * &half } else { -c.clone() }))
        .collect();
    let mut have: Vec<(i64, BigRational)> = coefficients.iter().filter(|(j2, _)| *j2 > h2).cloned().collect();
    let mut out = Vec::new();
    let (mut a, mut b) = (0, 0);
    while a < need.len() && b < have.len() {
        if need[a].1.is_zero() {
            a += 1;
            continue;
        }
        if have[b].1.is_zero() {
            b += 1;
            continue;
        }
        let w = need[a].1.clone().min(have[b].1.clone());
        need[a].1 -= &w;
        have[b].1 -= &w;
        out.push(MuirheadTerm { i2: need[a].0, j2: have[b].0, weight: w });
    }
    out
}

fn pairing_reconstructs(pairing: &[MuirheadTerm], coefficients: &[(i64, BigRational)]) -> bool {
    if pairing.iter().any(|t| t.weight.is_negative() || t.i2 >= t.j2) {
        return false;
    }
    let two = BigRational::from_integer(2.into());
    coefficients.iter().all(|(j2, c)| {
        let mut acc = BigRational::zero();
        for t in pairing {
            // M(i, j) = pair(j) - pair(i); pair(0) = 2 x^k y^k
            if t.j2 == *j2 {
                acc += if *j2 == 0 { &t.weight * &two } else { t.weight.clone() };
            }
            if t.i2 == *j2 {
                acc -= if *j2 == 0 { &t.weight * &two } else { t.weight.clone() };
            }
        }
        acc == *c
    })
}

/// Parses `h` written as an integer or half-integer (`"2"`, `"1.5"`,
/// `"3/2"`) into its doubled value.
pub fn parse_half_integer(text: &str) -> Result<u32> {
    let bad = || Error::InvalidParameter(format!("not a non-negative half-integer: {text:?}"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        return match d.trim() {
            "1" => Ok(2 * n),
            "2" => Ok(n),
            _ => Err(bad()),
        };
    }
    if let Some(whole) = t.strip_suffix(".5") {
        let w: u32 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        return Ok(2 * w + 1);
    }
    let whole = t.strip_suffix(".0").unwrap_or(t);
    whole.parse::<u32>().map(|w| 2 * w).map_err(|_| bad())
}

/// Helper for displaying doubled indices.
pub fn format_half(v2: i64) -> String {
    if v2 % 2 == 0 {
        (v2 / 2).to_string()
    } else {
        format!("{}/2", v2)
    }
}
