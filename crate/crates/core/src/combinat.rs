//! Small exact combinatorics helpers shared by the other modules.

use num_bigint::BigUint;
use num_traits::One;

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n! / prod(parts[i]!)` where `n = sum(parts)`.
pub fn multinomial(parts: &[u32]) -> BigUint {
    // Built as a product of binomials so intermediate values stay small.
    let mut total = 0u32;
    let mut acc = BigUint::one();
    for &p in parts {
        total += p;
        acc *= binomial(total as u64, p as u64);
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Binomial coefficient in machine integers; `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All `k`-subsets of `0..n` in colexicographic order: sets are compared by
/// their largest differing element.
pub fn subsets_colex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = subsets_lex(n, k);
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

/// All vectors of `len` non-negative integers summing to `total`, in
/// reverse lexicographic order (first coordinate largest first).
pub fn weak_compositions(total: u32, len: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, len: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == len {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in (0..=rest).rev() {
            cur.push(v);
            rec(rest - v, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if len == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, len, &mut Vec::with_capacity(len), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(binomial(6, 3), BigUint::from(20u32));
        assert_eq!(binomial(3, 5), BigUint::default());
        assert_eq!(multinomial(&[2, 1, 0]), BigUint::from(3u32));
        assert_eq!(multinomial(&[1, 1, 1]), BigUint::from(6u32));
        assert_eq!(binomial_u128(60, 30), Some(118264581564861424));
    }

    #[test]
    fn subset_orders() {
        assert_eq!(subsets_colex(4, 3), vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]);
        assert_eq!(subsets_lex(5, 2).len(), 10);
        assert_eq!(subsets_lex(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets_lex(2, 3).is_empty());
    }

    #[test]
    fn weak_composition_count() {
        // stars and bars: C(total + len - 1, len - 1)
        assert_eq!(weak_compositions(3, 3).len(), 10);
        assert_eq!(weak_compositions(0, 2), vec![vec![0, 0]]);
        assert_eq!(weak_compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }
}
