//! Closed-form and exact quantities for the number `X` of uncovered targets.
//!
//! For `k = 2` the representations `j = x + y` of a fixed target use pairwise
//! disjoint pairs, so `P(I_j = 1)` factorises exactly. For `k >= 3` only the
//! leading-order asymptotics and the correlation-inequality lower bound are
//! available. Long products of `(1 - p^d)` factors are accumulated in log
//! space.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::counting::count_by_distinct;
use crate::error::{Error, Result};
use crate::model::{factorial, truncated_window, Mode};
use crate::quadrature;

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid("p", "p out of [0,1]"))
    }
}

/// `count · ln(1 - q)`, with `0 · ln 0 = 0`.
#[inline]
fn log_complement_pow(q: f64, count: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * (-q).ln_1p()
    }
}

/// Off-diagonal pairs `{x, y}`, `x < y`, and whether the diagonal `x = y`
/// exists, among the 2-representations of `j`.
fn pair_structure(j: usize, n: usize, mode: Mode) -> (usize, usize) {
    match mode {
        Mode::Truncated => {
            // x ranges over [max(0, j-n), ceil(j/2) - 1]
            let lo = j.saturating_sub(n);
            let hi_excl = j.div_ceil(2);
            let off = hi_excl.saturating_sub(lo);
            let diag = usize::from(j.is_multiple_of(2) && j / 2 <= n);
            (off, diag)
        }
        Mode::Modular => {
            let t = if n % 2 == 1 {
                1
            } else if j.is_multiple_of(2) {
                2
            } else {
                0
            };
            ((n - t) / 2, t)
        }
    }
}

/// Exact `P(I_j = 1)` for `k = 2`: every off-diagonal pair must miss at
/// least one element and every diagonal element must be absent.
pub fn exact_missing_prob_k2(j: usize, n: usize, p: f64, mode: Mode) -> Result<f64> {
    check_p(p)?;
    let in_range = match mode {
        Mode::Truncated => j <= 2 * n,
        Mode::Modular => n > 0 && j < n,
    };
    if !in_range {
        return Err(Error::invalid("j", format!("target {j} outside the {mode} domain for n = {n}")));
    }
    let (off, diag) = pair_structure(j, n, mode);
    let log = log_complement_pow(p * p, off as f64) + log_complement_pow(p, diag as f64);
    Ok(log.exp())
}

/// Target window for `k = 2`: `[⌈αn⌉, ⌊(2-α)n⌋]` or all residues.
fn k2_window(n: usize, alpha: f64, mode: Mode) -> Result<(usize, usize)> {
    match mode {
        Mode::Truncated => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::invalid("alpha", "alpha out of (0,1)"));
            }
            Ok(truncated_window(n, 2, alpha))
        }
        Mode::Modular => {
            if n == 0 {
                return Err(Error::invalid("n", "modulus must be positive"));
            }
            Ok((0, n - 1))
        }
    }
}

/// Exact `E(X) = Σ_j P(I_j = 1)` over the window, for `k = 2`.
pub fn exact_mean_missing_k2(n: usize, p: f64, alpha: f64, mode: Mode) -> Result<f64> {
    check_p(p)?;
    let (lo, hi) = k2_window(n, alpha, mode)?;
    let mut sum = CompensatedSum::default();
    for j in lo..=hi {
        sum.add(exact_missing_prob_k2(j, n, p, mode)?);
    }
    Ok(sum.value())
}

/// Leading-order `E(X)`:
/// truncated `k = 2`: `(4/p²)·exp(-np²α/2)`;
/// truncated `k >= 3`: `2(k-2)!k!/(α^{k-2} n^{k-2} p^k) · exp(-α^{k-1} n^{k-1} p^k / ((k-1)!k!))`;
/// modular: `n·exp(-n^{k-1} p^k / k!)`.
pub fn asympt_mean_missing(n: usize, p: f64, alpha: f64, k: usize, mode: Mode) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("k", "k must be at least 2"));
    }
    if p == 0.0 {
        return Err(Error::Singular("asymptotic mean diverges at p = 0".into()));
    }
    check_p(p)?;
    let nf = n as f64;
    let kf = k as f64;
    Ok(match mode {
        Mode::Truncated => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::invalid("alpha", "alpha out of (0,1)"));
            }
            if k == 2 {
                4.0 / (p * p) * (-nf * p * p * alpha / 2.0).exp()
            } else {
                let pk = p.powi(k as i32);
                let prefactor = 2.0 * factorial(k - 2) * factorial(k)
                    / (alpha.powi(k as i32 - 2) * nf.powi(k as i32 - 2) * pk);
                let exponent = alpha.powi(k as i32 - 1) * nf.powi(k as i32 - 1) * pk
                    / (factorial(k - 1) * factorial(k));
                prefactor * (-exponent).exp()
            }
        }
        Mode::Modular => nf * (-(nf.powf(kf - 1.0) * p.powf(kf)) / factorial(k)).exp(),
    })
}

/// `2 Σ_{j=⌈αn⌉}^{n} (1-p²)^{j/2}`, the symmetric pair-only approximation
/// to `E(X)` for truncated 2-bases.
pub fn half_window_pair_sum(n: usize, p: f64, alpha: f64) -> f64 {
    let (lo, _) = truncated_window(n, 2, alpha);
    let half_log = 0.5 * (-p * p).ln_1p();
    let sum: CompensatedSum = (lo..=n).map(|j| (j as f64 * half_log).exp()).collect();
    2.0 * sum.value()
}

/// `(4/p²)·exp(-np²α/2)`, which bounds [`half_window_pair_sum`] from above.
pub fn pair_sum_upper_bound(n: usize, p: f64, alpha: f64) -> f64 {
    4.0 / (p * p) * (-(n as f64) * p * p * alpha / 2.0).exp()
}

/// `∏_{d=1..k} (1 - p^d)^{c_d(j)}`, where `c_d` counts the k-multisets
/// summing to `j` with exactly `d` distinct values. The events "this
/// multiset is fully present" are increasing, so by the Harris/FKG
/// inequality the product is a lower bound on `P(I_j = 1)`.
pub fn janson_lower_missing_prob(j: usize, k: usize, n: usize, p: f64) -> f64 {
    let counts = count_by_distinct(j as i64, k, n);
    let log: f64 = counts
        .distinct_f64()
        .iter()
        .enumerate()
        .map(|(i, &c)| log_complement_pow(p.powi(i as i32 + 1), c))
        .sum();
    log.exp()
}

/// A Poisson law `Po(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonModel {
    pub lambda: f64,
}

impl PoissonModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 0.0 {
            Ok(PoissonModel { lambda })
        } else {
            Err(Error::invalid("lambda", format!("lambda = {lambda} must be finite and >= 0")))
        }
    }

    pub fn pmf(&self, v: u64) -> f64 {
        if self.lambda == 0.0 {
            return if v == 0 { 1.0 } else { 0.0 };
        }
        let vf = v as f64;
        (-self.lambda + vf * self.lambda.ln() - ln_gamma(vf + 1.0)).exp()
    }

    /// `P(Y > v)`.
    pub fn sf(&self, v: u64) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        gamma_lr(v as f64 + 1.0, self.lambda)
    }

    /// Smallest `v` with `P(Y > v) < tail`.
    pub fn support_bound(&self, tail: f64) -> u64 {
        let mut v = self.lambda.floor() as u64;
        while self.sf(v) >= tail {
            v += 1;
        }
        v
    }
}

/// Numerical tail integral `Ψ(t,k) = ∫_t^∞ exp(-c x^{k-1}) dx` and the
/// closed-form bound `exp(-c t^{k-1}) / (c (k-1) t^{k-2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiTail {
    pub quadrature: f64,
    pub upper: f64,
}

pub fn psi_tail(t: f64, k: usize, c: f64) -> Result<PsiTail> {
    if k < 3 {
        return Err(Error::invalid("k", "tail bound needs k >= 3"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "t must be positive"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", "c must be positive"));
    }
    let e = (k - 1) as i32;
    let base = c * t.powi(e);
    // Work with the integrand scaled by exp(c t^{k-1}) so that deep tails
    // do not underflow before the final multiplication.
    let scaled = |x: f64| (-(c * x.powi(e) - base)).exp();
    let scaled_bound = |x: f64| scaled(x) / (c * (k - 1) as f64 * x.powi(e - 1));
    let upper_scaled = scaled_bound(t);
    let tol = 1e-11 * upper_scaled;
    // Push the right end out until the neglected tail is provably below tol.
    let mut step = upper_scaled;
    let mut b = t + step;
    while scaled_bound(b) > tol {
        step *= 2.0;
        b = t + step;
    }
    let body = quadrature::integrate(scaled, t, b, tol);
    let factor = (-base).exp();
    Ok(PsiTail {
        quadrature: body * factor,
        upper: upper_scaled * factor,
    })
}

/// Stein–Chen error terms for truncated 2-bases.
///
/// `sigma1` and `sigma2` are full-window sums rather than the maximum over
/// `j` of the sums excluding `i = j`; the summand does not depend on `j`,
/// so this is an upper bound on the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinChenDiagnostics {
    /// `C(p) = 2p + 2p³ + p²`
    pub c_p: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// `max_i P(I_i = 1)`, attained at the left end of the window.
    pub max_term: f64,
    pub tv_bound: f64,
    pub window: (usize, usize),
}

/// `C(p) = 2p + 2p³ + p²`.
pub fn coupling_constant(p: f64) -> f64 {
    2.0 * p + 2.0 * p.powi(3) + p * p
}

pub fn stein_chen_diagnostics(n: usize, p: f64, alpha: f64) -> Result<SteinChenDiagnostics> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", "p out of (0,1)"));
    }
    let (lo, hi) = k2_window(n, alpha, Mode::Truncated)?;
    let c_p = coupling_constant(p);
    let p2 = p * p;
    // ln(1 - p² + C(p)p²) and ln(1 - p²)
    let ln_mixed = (-p2 + c_p * p2).ln_1p();
    let ln_plain = (-p2).ln_1p();
    let mut s1 = CompensatedSum::default();
    let mut s2 = CompensatedSum::default();
    for i in lo..=hi {
        // f(i) - 1 = ⌈(i+1)/2⌉ - 1 = ⌊i/2⌋
        let m = (i / 2) as f64;
        let mixed = (m * ln_mixed).exp();
        s1.add(mixed - (m * ln_plain).exp());
        s2.add(mixed);
    }
    let sigma1 = (1.0 - p) * s1.value();
    let sigma2 = c_p * p * s2.value();
    let max_term = exact_missing_prob_k2(lo, n, p, Mode::Truncated)?;
    Ok(SteinChenDiagnostics {
        c_p,
        sigma1,
        sigma2,
        max_term,
        tv_bound: sigma1 + sigma2 + max_term,
        window: (lo, hi),
    })
}

/// Lossy conversion used when exact counts enter floating-point formulas.
pub fn to_f64(v: &num_bigint::BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
