//! The explicit `k = 2` coupling that realises the law of the missing
//! indicators conditioned on a target `j` being missing.
//!
//! Starting from an unconditioned set, every fully present pair
//! `{x, j-x}` is resampled from the pair law conditioned on "not both
//! present", and a present `j/2` is removed. Pairs with at most one element
//! present already satisfy the condition and are left alone, so the result
//! has exactly the conditional law.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Ground, SampledSet};
use crate::rng::stream;
use crate::sumset::kfold_sumset;

/// Largest `n` for which [`conditional_law_exact`] enumerates all subsets.
pub const MAX_ENUMERATION_N: usize = 20;

/// Largest `n` accepted by [`coupling_tv_check`].
pub const MAX_CHECK_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingOutcome {
    pub before: SampledSet,
    pub after: SampledSet,
    pub target_j: usize,
    pub removed: Vec<usize>,
}

/// Probabilities of (remove only `x`, remove only `j-x`, remove both) for a
/// fully present off-diagonal pair.
pub fn pair_removal_probs(p: f64) -> (f64, f64, f64) {
    let denom = 1.0 - p * p;
    let single = p * (1.0 - p) / denom;
    let both = (p * p + 1.0 - 2.0 * p) / denom;
    (single, single, both)
}

/// Applies the coupling for target `j` to a set drawn from `{0, …, n}`.
pub fn couple_given_missing<R: Rng + ?Sized>(
    set: &SampledSet,
    j: usize,
    n: usize,
    p: f64,
    rng: &mut R,
) -> CouplingOutcome {
    let present = |x: usize| x <= n && set.contains(x);
    let (single, _, _) = pair_removal_probs(p);
    let mut removed = Vec::new();
    for &x in set.elements() {
        if 2 * x >= j {
            break;
        }
        let y = j - x;
        if !present(y) {
            continue;
        }
        let u: f64 = rng.random();
        if u < single {
            removed.push(x);
        } else if u < 2.0 * single {
            removed.push(y);
        } else {
            removed.push(x);
            removed.push(y);
        }
    }
    if j.is_multiple_of(2) && present(j / 2) {
        removed.push(j / 2);
    }
    removed.sort_unstable();
    let after: Vec<usize> = set
        .elements()
        .iter()
        .copied()
        .filter(|x| removed.binary_search(x).is_err())
        .collect();
    CouplingOutcome {
        before: set.clone(),
        after: SampledSet::new(after, set.ground()).expect("subset of a valid set"),
        target_j: j,
        removed,
    }
}

/// Missing-indicator vectors over `[0, 2n]` packed as bit masks: bit `i` is
/// set when `i` is not a 2-sum.
pub type IndicatorMask = u64;

/// Exact conditional law of the missing indicators given `I_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLaw {
    pub n: usize,
    pub p: f64,
    pub j: usize,
    /// Inclusive range of indices carried by the masks; bit `j` is cleared.
    pub window: (usize, usize),
    pub masses: BTreeMap<IndicatorMask, f64>,
}

impl ConditionalLaw {
    pub fn mass(&self, mask: IndicatorMask) -> f64 {
        self.masses.get(&mask).copied().unwrap_or(0.0)
    }
}

fn window_mask(n: usize, j: usize) -> IndicatorMask {
    let all = if 2 * n + 1 >= 64 { !0 } else { (1u64 << (2 * n + 1)) - 1 };
    all & !(1u64 << j)
}

/// Conditional law of `(I_i)_{i ∈ [0, 2n], i ≠ j}` given `I_j = 1`, by
/// weighted enumeration of all `2^{n+1}` subsets of `{0, …, n}`.
pub fn conditional_law_exact(n: usize, p: f64, j: usize) -> Result<ConditionalLaw> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationBound {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", "p out of [0,1]"));
    }
    if j > 2 * n {
        return Err(Error::invalid("j", format!("target {j} outside [0, {}]", 2 * n)));
    }
    let keep = window_mask(n, j);
    let ground = n as i32 + 1;
    let mut masses: BTreeMap<IndicatorMask, f64> = BTreeMap::new();
    let mut total = 0.0;
    for subset in 0u64..(1u64 << (n + 1)) {
        // nested-loop 2-sumset
        let mut sums = 0u64;
        for x in 0..=n {
            if subset >> x & 1 == 0 {
                continue;
            }
            for y in x..=n {
                if subset >> y & 1 == 1 {
                    sums |= 1 << (x + y);
                }
            }
        }
        if sums >> j & 1 == 1 {
            continue;
        }
        let size = subset.count_ones() as i32;
        let w = p.powi(size) * (1.0 - p).powi(ground - size);
        if w == 0.0 {
            continue;
        }
        total += w;
        *masses.entry(!sums & keep).or_insert(0.0) += w;
    }
    if total <= 0.0 {
        return Err(Error::NullEvent);
    }
    for m in masses.values_mut() {
        *m /= total;
    }
    Ok(ConditionalLaw {
        n,
        p,
        j,
        window: (0, 2 * n),
        masses,
    })
}

/// Result of comparing simulated coupled indicators with the exact law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCheck {
    pub samples: u64,
    /// Total variation distance between the empirical and exact laws.
    pub tv: f64,
    /// Outcomes where an index missing before the coupling was covered after
    /// it. The coupling only removes elements, so this must be zero.
    pub one_sided_violations: u64,
}

const BATCH: u64 = 1 << 14;

fn indicator_mask(set: &SampledSet, n: usize, keep: IndicatorMask) -> IndicatorMask {
    // 2n + 1 <= 33 bits: one word
    let sums = kfold_sumset(set, 2, n);
    !sums.bits().words()[0] & keep
}

/// Simulates `samples` unconditioned sets, applies the coupling for `j`, and
/// returns the TV distance between the coupled indicator law and
/// [`conditional_law_exact`]. Batches of samples use independent streams
/// under `seed`, so the result does not depend on the worker count.
pub fn coupling_tv_check(n: usize, p: f64, j: usize, samples: u64, seed: u64) -> Result<CouplingCheck> {
    if n > MAX_CHECK_N {
        return Err(Error::EnumerationBound { n, max: MAX_CHECK_N });
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", "p out of (0,1)"));
    }
    let exact = conditional_law_exact(n, p, j)?;
    let keep = window_mask(n, j);
    let ground = Ground::ZeroToN(n);
    let batches = samples.div_ceil(BATCH);

    let (counts, violations) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, b);
            let todo = BATCH.min(samples - b * BATCH);
            let mut counts: BTreeMap<IndicatorMask, u64> = BTreeMap::new();
            let mut violations = 0u64;
            for _ in 0..todo {
                let elements: Vec<usize> = (0..=n).filter(|_| rng.random::<f64>() < p).collect();
                let set = SampledSet::new(elements, ground).expect("ascending");
                let before = indicator_mask(&set, n, keep);
                let outcome = couple_given_missing(&set, j, n, p, &mut rng);
                let after = indicator_mask(&outcome.after, n, keep);
                if before & !after != 0 {
                    violations += 1;
                }
                *counts.entry(after).or_insert(0) += 1;
            }
            (counts, violations)
        })
        .reduce(
            || (BTreeMap::new(), 0),
            |(mut a, va), (b, vb)| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                (a, va + vb)
            },
        );

    let total = samples as f64;
    let mut diff = 0.0;
    for (mask, &c) in &counts {
        diff += (c as f64 / total - exact.mass(*mask)).abs();
    }
    for (mask, &m) in &exact.masses {
        if !counts.contains_key(mask) {
            diff += m;
        }
    }
    Ok(CouplingCheck {
        samples,
        tv: (0.5 * diff).clamp(0.0, 1.0),
        one_sided_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(elems: &[usize], n: usize) -> SampledSet {
        SampledSet::from_unsorted(elems.to_vec(), Ground::ZeroToN(n)).unwrap()
    }

    #[test]
    fn already_missing_is_untouched() {
        let s = set(&[0, 1, 7], 8);
        let out = couple_given_missing(&s, 5, 8, 0.3, &mut stream(1, 0));
        assert_eq!(out.after, s);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn diagonal_is_always_removed() {
        for seed in 0..20 {
            let out = couple_given_missing(&set(&[3], 6), 6, 6, 0.4, &mut stream(seed, 0));
            assert!(out.after.is_empty());
            assert_eq!(out.removed, vec![3]);
        }
    }

    #[test]
    fn removal_probabilities_sum_to_one() {
        for &p in &[0.01, 0.1, 0.3, 0.5, 0.77, 0.99] {
            let (a, b, c) = pair_removal_probs(p);
            assert!((a + b + c - 1.0).abs() < 1e-14, "{p}");
            assert!((a - p / (1.0 + p)).abs() < 1e-15);
        }
    }

    #[test]
    fn single_pair_resampling_frequencies() {
        // p = 1/2: each of the three outcomes has probability 1/3
        let s = set(&[1, 5], 6);
        let runs = 1_000_000u64;
        let mut rng = stream(11, 0);
        let (mut only5, mut only1, mut none) = (0u64, 0u64, 0u64);
        for _ in 0..runs {
            let out = couple_given_missing(&s, 6, 6, 0.5, &mut rng);
            match out.after.elements() {
                [5] => only5 += 1,
                [1] => only1 += 1,
                [] => none += 1,
                other => panic!("unexpected {other:?}"),
            }
        }
        for c in [only5, only1, none] {
            assert!((c as f64 / runs as f64 - 1.0 / 3.0).abs() <= 0.01);
        }
    }

    #[test]
    fn post_state_misses_target() {
        let n = 12;
        for seed in 0..200u64 {
            let mut rng = stream(seed, 3);
            let elements: Vec<usize> = (0..=n).filter(|_| rng.random::<f64>() < 0.6).collect();
            let s = set(&elements, n);
            for j in 0..=2 * n {
                let out = couple_given_missing(&s, j, n, 0.6, &mut rng);
                assert!(!kfold_sumset(&out.after, 2, n).contains(j));
                assert!(out.after.elements().iter().all(|x| s.contains(*x)));
                let mut union: Vec<usize> = out.after.elements().to_vec();
                union.extend(&out.removed);
                union.sort_unstable();
                assert_eq!(union, s.elements());
            }
        }
    }

    #[test]
    fn conditional_law_small_case() {
        // n = 2, p = 1/2, j = 2: the subsets of {0,1,2} avoiding 2 as a
        // 2-sum are those without 1 and without both 0 and 2:
        // {}, {0}, {2}, each with weight 1/8.
        let law = conditional_law_exact(2, 0.5, 2).unwrap();
        let total: f64 = law.masses.values().sum();
        assert!((total - 1.0).abs() < 1e-15);
        // {} misses everything in {0,1,3,4}
        let all_missing = 0b11011;
        assert!((law.mass(all_missing) - 1.0 / 3.0).abs() < 1e-15);
        // {0} covers 0 only; {2} covers 4 only
        assert!((law.mass(0b11010) - 1.0 / 3.0).abs() < 1e-15);
        assert!((law.mass(0b01011) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_law_errors_and_limits() {
        assert!(matches!(conditional_law_exact(4, 1.0, 3), Err(Error::NullEvent)));
        assert!(matches!(
            conditional_law_exact(21, 0.5, 3),
            Err(Error::EnumerationBound { .. })
        ));
        let law = conditional_law_exact(5, 0.0, 4).unwrap();
        assert_eq!(law.masses.len(), 1);
        assert_eq!(law.mass(window_mask(5, 4)), 1.0);
    }

    #[test]
    fn tv_check_is_a_distance() {
        let small = coupling_tv_check(5, 0.4, 5, 100, 9).unwrap();
        assert!((0.0..=1.0).contains(&small.tv));
        assert_eq!(small.one_sided_violations, 0);
        let again = coupling_tv_check(5, 0.4, 5, 100, 9).unwrap();
        assert_eq!(small, again);
        assert!(coupling_tv_check(17, 0.4, 5, 100, 9).is_err());
    }

    #[test]
    fn tv_check_small_instance_converges() {
        let r = coupling_tv_check(6, 0.4, 6, 200_000, 5).unwrap();
        assert!(r.tv <= 0.02, "{}", r.tv);
        assert_eq!(r.one_sided_violations, 0);
    }
}
