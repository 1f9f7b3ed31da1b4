//! Exact counts of k-element multisets of `{0, …, n}` with a given sum.
//!
//! `|S_j|`, the number of such multisets summing to `j`, is the coefficient
//! of `q^j` in the Gaussian binomial `[n+k choose k]_q` (pad a partition of
//! `j` into at most `k` parts of size at most `n` with zeros). Counts are
//! arbitrary precision; callers convert to floating point at the boundary.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

/// Coefficients `a_0, …, a_{nk}` of `[n+k choose k]_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QBinomial {
    pub n: usize,
    pub k: usize,
    pub coefficients: Vec<BigUint>,
}

impl QBinomial {
    /// `a_j`, zero outside `0..=nk`.
    pub fn coefficient(&self, j: i64) -> BigUint {
        usize::try_from(j)
            .ok()
            .and_then(|j| self.coefficients.get(j).cloned())
            .unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.n * self.k
    }
}

/// `[n+k choose k]_q` as an exact coefficient vector.
///
/// Built as the product `∏_{i=1..k} (1 - q^{n+i}) / (1 - q^i)`: step `i`
/// multiplies by `1 - q^{n+i}` and then divides exactly by `1 - q^i`,
/// which is a stride-`i` prefix sum. Every partial product is itself a
/// Gaussian binomial, so the division never leaves a remainder.
pub fn gaussian_binomial(n: usize, k: usize) -> QBinomial {
    let mut poly: Vec<BigInt> = vec![BigInt::from(1)];
    for i in 1..=k {
        let shift = n + i;
        let mut next: Vec<BigInt> = vec![BigInt::zero(); poly.len() + shift];
        for (d, c) in next.iter_mut().zip(&poly) {
            *d += c;
        }
        for (d, c) in next[shift..].iter_mut().zip(&poly) {
            *d -= c;
        }
        for idx in i..next.len() {
            let (head, tail) = next.split_at_mut(idx);
            tail[0] += &head[idx - i];
        }
        let degree = i * n;
        debug_assert!(next[degree + 1..].iter().all(Zero::is_zero));
        next.truncate(degree + 1);
        poly = next;
    }
    let coefficients = poly
        .into_iter()
        .map(|c| c.to_biguint().expect("gaussian binomial coefficients are non-negative"))
        .collect();
    QBinomial { n, k, coefficients }
}

/// `|S_j|`: multisets of size exactly `k` from `{0, …, n}` summing to `j`.
/// Zero for `j < 0` or `j > kn`.
pub fn count_sumtuples(j: i64, k: usize, n: usize) -> BigUint {
    if j < 0 || j as u128 > (k as u128) * (n as u128) {
        return BigUint::zero();
    }
    gaussian_binomial(n, k).coefficient(j)
}

/// `|S_j|` split by the number of distinct values in the multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleCounts {
    pub j: i64,
    pub k: usize,
    pub n: usize,
    pub total: BigUint,
    /// `by_distinct[d - 1]` counts multisets with exactly `d` distinct values.
    pub by_distinct: Vec<BigUint>,
}

impl TupleCounts {
    /// `c_d` for `1 <= d <= k`.
    pub fn distinct(&self, d: usize) -> &BigUint {
        &self.by_distinct[d - 1]
    }

    /// `|T_j|`: multisets whose `k` elements are pairwise distinct.
    pub fn all_distinct(&self) -> &BigUint {
        &self.by_distinct[self.k - 1]
    }

    pub fn distinct_f64(&self) -> Vec<f64> {
        self.by_distinct
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }
}

/// Exact `c_1, …, c_k` by a DP over the values `0..=n`: for each value the
/// multiplicity `m >= 1` either joins the multiset (one more distinct value,
/// `m` more elements, `m·v` more sum) or the value is skipped.
pub fn count_by_distinct(j: i64, k: usize, n: usize) -> TupleCounts {
    let mut by_distinct = vec![BigUint::zero(); k];
    if k == 0 || j < 0 || j as u128 > (k as u128) * (n as u128) {
        return TupleCounts {
            j,
            k,
            n,
            total: by_distinct.iter().sum(),
            by_distinct,
        };
    }
    let target = j as usize;
    // table[c][d][s]: multisets of c elements, d distinct values, sum s
    let idx = |c: usize, d: usize, s: usize| (c * (k + 1) + d) * (target + 1) + s;
    let mut table = vec![BigUint::zero(); (k + 1) * (k + 1) * (target + 1)];
    table[idx(0, 0, 0)] = BigUint::from(1u8);
    for v in 0..=n.min(target) {
        // descending c so each value is used at most once as a new distinct value
        for c in (0..k).rev() {
            for d in 0..=c {
                for s in 0..=target {
                    if table[idx(c, d, s)].is_zero() {
                        continue;
                    }
                    let count = table[idx(c, d, s)].clone();
                    for m in 1..=(k - c) {
                        let ns = s + m * v;
                        if ns > target {
                            break;
                        }
                        table[idx(c + m, d + 1, ns)] += &count;
                    }
                }
            }
        }
    }
    for (d, slot) in by_distinct.iter_mut().enumerate() {
        *slot = table[idx(k, d + 1, target)].clone();
    }
    TupleCounts {
        j,
        k,
        n,
        total: by_distinct.iter().sum(),
        by_distinct,
    }
}
