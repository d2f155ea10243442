//! Exact solution counts of the Vinogradov system
//! `x_1^j + ... + x_k^j = y_1^j + ... + y_k^j`, `1 <= j <= r`, `1 <= x_i, y_i <= M`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest number `M^k` of half-tuples enumerated.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// `N_{k,r}(M)` by meet in the middle: tuples are bucketed by their vector of
/// power sums and every bucket of size `c` contributes `c^2` solutions.
pub fn vinogradov_count(k: u32, r: u32, m: u64) -> Result<u128> {
    if k == 0 || r == 0 || m == 0 {
        return Err(Error::InvalidArgument("k, r and M must be at least 1".into()));
    }
    let size = (m as u128).checked_pow(k).unwrap_or(u128::MAX);
    if size > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { size, limit: ENUMERATION_LIMIT });
    }
    // powers[x][j] = x^{j+1}.
    let powers: Vec<Vec<u128>> = (1..=m)
        .map(|x| (1..=r).map(|j| (x as u128).checked_pow(j)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidArgument("power sums overflow".into()))?;
    if powers[m as usize - 1][r as usize - 1].checked_mul(k as u128).is_none() {
        return Err(Error::InvalidArgument("power sums overflow".into()));
    }
    // Split on the first coordinate; bucket counts are integers, so the merge
    // order does not affect the result.
    let partial: Vec<HashMap<Vec<u128>, u64>> = (0..m as usize)
        .into_par_iter()
        .map(|first| {
            let mut buckets = HashMap::new();
            let mut idx = vec![0usize; k as usize - 1];
            loop {
                let mut key = powers[first].clone();
                for &i in &idx {
                    for (acc, p) in key.iter_mut().zip(&powers[i]) {
                        *acc += p;
                    }
                }
                *buckets.entry(key).or_insert(0) += 1;
                // Odometer over the remaining coordinates.
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        return buckets;
                    }
                    idx[pos] += 1;
                    if idx[pos] < m as usize {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        })
        .collect();
    let mut merged: HashMap<Vec<u128>, u64> = HashMap::new();
    for map in partial {
        for (key, c) in map {
            *merged.entry(key).or_insert(0) += c;
        }
    }
    Ok(merged.values().map(|&c| c as u128 * c as u128).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All 2k-tuples, checked equation by equation.
    fn naive(k: u32, r: u32, m: u64) -> u128 {
        let k = k as usize;
        let total = (m as usize).pow(2 * k as u32);
        let mut count = 0;
        for code in 0..total {
            let mut c = code;
            let mut xs = Vec::with_capacity(2 * k);
            for _ in 0..2 * k {
                xs.push((c % m as usize) as i128 + 1);
                c /= m as usize;
            }
            if (1..=r).all(|j| {
                let lhs: i128 = xs[..k].iter().map(|x| x.pow(j)).sum();
                let rhs: i128 = xs[k..].iter().map(|x| x.pow(j)).sum();
                lhs == rhs
            }) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn small_counts() {
        assert_eq!(vinogradov_count(1, 1, 2).unwrap(), 2);
        assert_eq!(vinogradov_count(2, 1, 2).unwrap(), 6);
        assert_eq!(vinogradov_count(2, 2, 2).unwrap(), 6);
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        for k in 1..=3 {
            for r in 1..=3 {
                for m in 1..=5 {
                    let c = vinogradov_count(k, r, m).unwrap();
                    assert_eq!(c, naive(k, r, m), "k={k} r={r} M={m}");
                    assert!(c >= (m as u128).pow(k));
                    assert!(c <= (m as u128).pow(2 * k));
                }
            }
        }
    }

    #[test]
    fn moments_determine_multisets() {
        // With r >= k the power sums fix the multiset, so the count stabilizes.
        for m in 2..=5 {
            assert_eq!(vinogradov_count(2, 2, m).unwrap(), vinogradov_count(2, 5, m).unwrap());
            assert_eq!(vinogradov_count(3, 3, m).unwrap(), vinogradov_count(3, 4, m).unwrap());
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(vinogradov_count(9, 1, 10), Err(Error::EnumerationTooLarge { .. })));
        assert!(vinogradov_count(0, 1, 2).is_err());
    }
}
