//! k-fold sumsets with repetition, truncated (over `[0, kn]`) and modular
//! (over `Z_n`).
//!
//! Both kernels iterate `S_{i+1} = S_i + A` as one shift-OR pass per element
//! of `A`, costing `O(k·|A|·kn/64)` word operations.

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::model::{Mode, Model, SampledSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// Positions `0..=max`.
    Range { max: usize },
    /// Residues `0..modulus`.
    Residues { modulus: usize },
}

/// Presence bitmap of the achievable k-sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumBitmap {
    bits: BitVec,
    domain: Domain,
    k: usize,
    n: usize,
}

impl SumBitmap {
    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.bits.get(j)
    }

    /// Achievable sums in ascending order.
    pub fn sums(&self) -> Vec<usize> {
        self.bits.iter_ones().collect()
    }
}

/// Uncovered targets `X` in an inclusive window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingReport {
    pub x: usize,
    pub missing: Vec<usize>,
    pub window: (usize, usize),
}

fn set_bits(set: &SampledSet, len: usize) -> BitVec {
    BitVec::from_positions(len, set.elements().iter().copied().filter(|&a| a < len))
}

/// Truncated k-fold sumset of a set drawn from `{0, …, n}`: bit `j` is set
/// iff `j = x_1 + … + x_k` with every `x_i` in the set.
///
/// # Panics
/// If an element exceeds `n`.
pub fn kfold_sumset(set: &SampledSet, k: usize, n: usize) -> SumBitmap {
    assert!(
        set.elements().last().is_none_or(|&a| a <= n),
        "set element exceeds ground bound {n}"
    );
    let domain = Domain::Range { max: k * n };
    if k == 0 {
        return SumBitmap {
            bits: BitVec::from_positions(1, [0]),
            domain,
            k,
            n,
        };
    }
    let mut cur = set_bits(set, n + 1);
    if !set.is_empty() {
        for i in 2..=k {
            let mut next = BitVec::zeros(i * n + 1);
            for &a in set.elements() {
                next.or_shifted(&cur, a);
            }
            cur = next;
        }
    }
    let bits = if cur.len() == k * n + 1 {
        cur
    } else {
        BitVec::zeros(k * n + 1)
    };
    SumBitmap { bits, domain, k, n }
}

/// Modular k-fold sumset of a set drawn from `{0, …, n-1}`: residue `j` is
/// set iff `j ≡ x_1 + … + x_k (mod n)`.
///
/// Each pass shift-ORs into a `2n`-bit scratch vector and folds the upper
/// half back, which is a rotate-OR over the `n`-bit residue vector.
///
/// # Panics
/// If `n == 0` or an element is `>= n`.
pub fn kfold_modular_sumset(set: &SampledSet, k: usize, n: usize) -> SumBitmap {
    assert!(n > 0, "modulus must be positive");
    assert!(
        set.elements().last().is_none_or(|&a| a < n),
        "set element exceeds residue range {n}"
    );
    let domain = Domain::Residues { modulus: n };
    if k == 0 {
        return SumBitmap {
            bits: BitVec::from_positions(n, [0]),
            domain,
            k,
            n,
        };
    }
    let mut cur = set_bits(set, n);
    if !set.is_empty() {
        for _ in 2..=k {
            let mut scratch = BitVec::zeros(2 * n);
            for &a in set.elements() {
                scratch.or_shifted(&cur, a);
            }
            let mut next = BitVec::zeros(n);
            next.or_folded(&scratch);
            cur = next;
        }
    }
    SumBitmap { bits: cur, domain, k, n }
}

/// Counts and lists the unset positions of `bitmap` in `[lo, hi]`.
pub fn missing_in_window(bitmap: &SumBitmap, lo: usize, hi: usize) -> Result<MissingReport> {
    check_window(bitmap, lo, hi)?;
    let missing = bitmap.bits.zeros_in(lo, hi);
    Ok(MissingReport {
        x: missing.len(),
        missing,
        window: (lo, hi),
    })
}

/// `X` alone, without materialising the list of missing targets.
pub fn count_missing(bitmap: &SumBitmap, lo: usize, hi: usize) -> Result<usize> {
    check_window(bitmap, lo, hi)?;
    Ok(bitmap.bits.count_zeros_in(lo, hi))
}

fn check_window(bitmap: &SumBitmap, lo: usize, hi: usize) -> Result<()> {
    if lo > hi {
        return Err(Error::invalid("window", format!("lo = {lo} exceeds hi = {hi}")));
    }
    if hi >= bitmap.len() {
        return Err(Error::invalid(
            "window",
            format!("hi = {hi} outside a bitmap of length {}", bitmap.len()),
        ));
    }
    Ok(())
}

/// The sumset the model's mode calls for.
pub fn model_sumset(set: &SampledSet, model: &Model) -> SumBitmap {
    match model.mode() {
        Mode::Truncated => kfold_sumset(set, model.k(), model.n()),
        Mode::Modular => kfold_modular_sumset(set, model.k(), model.n()),
    }
}

/// Number of uncovered targets in the model's window.
pub fn missing_count(set: &SampledSet, model: &Model) -> usize {
    let (lo, hi) = model.window();
    model_sumset(set, model).bits.count_zeros_in(lo, hi)
}

/// Whether every target in the model's window is a k-sum of `set`.
pub fn is_basis(set: &SampledSet, model: &Model) -> bool {
    missing_count(set, model) == 0
}
