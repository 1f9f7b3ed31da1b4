//! Experiment configuration, random set sampling and threshold formulas.
//!
//! Two ground sets are in play: truncated bases draw from `{0, …, n}` and
//! modular bases from `{0, …, n-1}`. The ground set is bound to the
//! [`Mode`] and never mixed.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Targets are the integers in `[⌈αn⌉, ⌊(k-α)n⌋]`.
    Truncated,
    /// Targets are all residues mod `n`.
    Modular,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Truncated => "truncated",
            Mode::Modular => "modular",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "truncated" | "t" => Ok(Mode::Truncated),
            "modular" | "m" => Ok(Mode::Modular),
            other => Err(Error::invalid("mode", format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sampling {
    /// Each ground-set integer is kept independently with probability `p`.
    Bernoulli,
    /// A uniformly random subset of exactly `m` elements.
    FixedSize(usize),
}

/// The ground set a [`SampledSet`] was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ground {
    /// `{0, …, n}`
    ZeroToN(usize),
    /// `{0, …, n-1}`
    ZeroToNMinus1(usize),
}

impl Ground {
    pub fn for_mode(mode: Mode, n: usize) -> Self {
        match mode {
            Mode::Truncated => Ground::ZeroToN(n),
            Mode::Modular => Ground::ZeroToNMinus1(n),
        }
    }

    pub fn size(self) -> usize {
        match self {
            Ground::ZeroToN(n) => n + 1,
            Ground::ZeroToNMinus1(n) => n,
        }
    }

    pub fn n(self) -> usize {
        match self {
            Ground::ZeroToN(n) | Ground::ZeroToNMinus1(n) => n,
        }
    }
}

/// A sorted, duplicate-free subset of a ground set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledSet {
    elements: Vec<usize>,
    ground: Ground,
}

impl SampledSet {
    /// Validates that `elements` is strictly increasing and inside `ground`.
    pub fn new(elements: Vec<usize>, ground: Ground) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("elements", "not strictly increasing"));
        }
        if let Some(&last) = elements.last() {
            if last >= ground.size() {
                return Err(Error::invalid(
                    "elements",
                    format!("{last} lies outside a ground set of size {}", ground.size()),
                ));
            }
        }
        Ok(SampledSet { elements, ground })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut elements: Vec<usize>, ground: Ground) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        Self::new(elements, ground)
    }

    pub fn empty(ground: Ground) -> Self {
        SampledSet {
            elements: Vec::new(),
            ground,
        }
    }

    pub fn full(ground: Ground) -> Self {
        SampledSet {
            elements: (0..ground.size()).collect(),
            ground,
        }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn ground(&self) -> Ground {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }
}

/// A validated experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    n: usize,
    k: usize,
    alpha: f64,
    p: f64,
    mode: Mode,
    sampling: Sampling,
}

impl Model {
    pub fn new(
        n: usize,
        k: usize,
        alpha: f64,
        p: f64,
        mode: Mode,
        sampling: Sampling,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("k", format!("k = {k} must be at least 2")));
        }
        if n < k {
            return Err(Error::invalid("n", format!("n = {n} must be at least k = {k}")));
        }
        if mode == Mode::Truncated && !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", "alpha out of (0,1)"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p", "p out of [0,1]"));
        }
        let ground = Ground::for_mode(mode, n);
        if let Sampling::FixedSize(m) = sampling {
            if m > ground.size() {
                return Err(Error::invalid(
                    "m",
                    format!("fixed size exceeds ground set of {}", ground.size()),
                ));
            }
        }
        Ok(Model {
            n,
            k,
            alpha,
            p,
            mode,
            sampling,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn ground(&self) -> Ground {
        Ground::for_mode(self.mode, self.n)
    }

    /// Inclusive target window: `[⌈αn⌉, ⌊(k-α)n⌋]` when truncated, all
    /// residues when modular.
    pub fn window(&self) -> (usize, usize) {
        match self.mode {
            Mode::Truncated => truncated_window(self.n, self.k, self.alpha),
            Mode::Modular => (0, self.n - 1),
        }
    }

    /// Bytes occupied by one k-fold sumset bitmap of this model.
    pub fn bitmap_bytes(&self) -> u64 {
        let bits = match self.mode {
            Mode::Truncated => (self.k * self.n + 1) as u64,
            // the modular kernel folds a 2n-bit scratch vector
            Mode::Modular => 2 * self.n as u64,
        };
        bits.div_ceil(64) * 8
    }

    /// Draws a set according to the model's sampling scheme.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledSet {
        match self.sampling {
            Sampling::Bernoulli => bernoulli(self.ground(), self.p, rng),
            Sampling::FixedSize(m) => fixed_size(self.ground(), m, rng),
        }
    }
}

/// `⌈αn⌉` and `⌊(k-α)n⌋`, snapping products that land within rounding
/// error of an integer.
pub fn truncated_window(n: usize, k: usize, alpha: f64) -> (usize, usize) {
    let lo = alpha * n as f64;
    let hi = (k as f64 - alpha) * n as f64;
    (snap(lo).unwrap_or(lo.ceil()) as usize, snap(hi).unwrap_or(hi.floor()) as usize)
}

fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * x.abs().max(1.0)).then_some(r)
}

/// Each element of the model's ground set kept independently with
/// probability `p`.
pub fn sample_bernoulli<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> SampledSet {
    bernoulli(model.ground(), model.p, rng)
}

/// A uniformly random subset of size `m` (the model's `FixedSize(m)`).
pub fn sample_fixed_size<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> Result<SampledSet> {
    match model.sampling {
        Sampling::FixedSize(m) if m <= model.ground().size() => Ok(fixed_size(model.ground(), m, rng)),
        Sampling::FixedSize(_) => Err(Error::invalid(
            "m",
            format!("fixed size exceeds ground set of {}", model.ground().size()),
        )),
        Sampling::Bernoulli => Err(Error::invalid("sampling", "model uses Bernoulli sampling")),
    }
}

fn bernoulli<R: Rng + ?Sized>(ground: Ground, p: f64, rng: &mut R) -> SampledSet {
    let size = ground.size();
    if p <= 0.0 {
        return SampledSet::empty(ground);
    }
    if p >= 1.0 {
        return SampledSet::full(ground);
    }
    // Gaps between kept elements are geometric; this touches O(np) random
    // numbers instead of O(n).
    let gap = Geometric::new(p).expect("p in (0,1)");
    let mut elements = Vec::with_capacity((size as f64 * p * 1.2) as usize + 8);
    let mut next = gap.sample(rng);
    while next < size as u64 {
        elements.push(next as usize);
        next = next.saturating_add(1).saturating_add(gap.sample(rng));
    }
    SampledSet { elements, ground }
}

fn fixed_size<R: Rng + ?Sized>(ground: Ground, m: usize, rng: &mut R) -> SampledSet {
    let mut elements = index::sample(rng, ground.size(), m).into_vec();
    elements.sort_unstable();
    SampledSet { elements, ground }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Shift `A_n` together with the mode-specific constant `K` of the threshold
/// formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub a_n: f64,
    pub constant: f64,
}

impl ThresholdSpec {
    /// `K = k!(k-1)!/α^(k-1)` for truncated bases, `K = k!` for modular ones.
    pub fn new(k: usize, alpha: f64, a_n: f64, mode: Mode) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("k", format!("k = {k} must be at least 2")));
        }
        let constant = match mode {
            Mode::Truncated => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::invalid("alpha", "alpha out of (0,1)"));
                }
                factorial(k) * factorial(k - 1) / alpha.powi(k as i32 - 1)
            }
            Mode::Modular => factorial(k),
        };
        Ok(ThresholdSpec { a_n, constant })
    }

    fn radicand(&self, n: f64, mode: Mode) -> f64 {
        let ln = n.ln();
        match mode {
            Mode::Truncated => self.constant * ln - self.constant * ln.ln() + self.a_n,
            Mode::Modular => self.constant * ln + self.a_n,
        }
    }

    /// Evaluates `(radicand / n^(k-1))^(1/k)`, clamped into `[0, 1]`.
    pub fn evaluate(&self, n: usize, k: usize, mode: Mode) -> Result<f64> {
        if n < 3 {
            return Err(Error::invalid("n", "threshold needs n >= 3"));
        }
        let nf = n as f64;
        let radicand = self.radicand(nf, mode);
        if radicand.is_nan() || radicand <= 0.0 {
            return Err(Error::BelowThreshold { radicand });
        }
        let p = (radicand / nf.powi(k as i32 - 1)).powf(1.0 / k as f64);
        Ok(p.clamp(0.0, 1.0))
    }
}

/// Threshold selection probability for a basis of order `k` with shift
/// `a_n`. Natural logarithms throughout.
///
/// The truncated `k = 2` case is evaluated directly as
/// `sqrt((2/α·ln n − 2/α·ln ln n + A_n)/n)`; every other case goes through
/// [`ThresholdSpec`].
pub fn threshold_p(n: usize, k: usize, alpha: f64, a_n: f64, mode: Mode) -> Result<f64> {
    let ts = ThresholdSpec::new(k, alpha, a_n, mode)?;
    if mode == Mode::Truncated && k == 2 {
        if n < 3 {
            return Err(Error::invalid("n", "threshold needs n >= 3"));
        }
        let nf = n as f64;
        let ln = nf.ln();
        let radicand = 2.0 / alpha * ln - 2.0 / alpha * ln.ln() + a_n;
        if radicand.is_nan() || radicand <= 0.0 {
            return Err(Error::BelowThreshold { radicand });
        }
        return Ok((radicand / nf).sqrt().clamp(0.0, 1.0));
    }
    ts.evaluate(n, k, mode)
}

/// `p = sqrt((1/α + δ)·ln n / n)`, the lower edge of the window where the
/// Poisson approximation for truncated 2-bases is proven.
pub fn poisson_window_p(n: usize, alpha: f64, delta: f64) -> f64 {
    let nf = n as f64;
    ((1.0 / alpha + delta) * nf.ln() / nf).sqrt().clamp(0.0, 1.0)
}

/// Limit of `P(A is a basis)` when the threshold shift tends to `a`.
pub fn limit_basis_prob(k: usize, alpha: f64, a: f64, mode: Mode) -> Result<f64> {
    let ts = ThresholdSpec::new(k, alpha, a, mode)?;
    Ok(match mode {
        Mode::Truncated if k == 2 => (-2.0 * alpha * (-alpha * a / 2.0).exp()).exp(),
        Mode::Truncated => (-(2.0 * alpha / (k as f64 - 1.0)) * (-a / ts.constant).exp()).exp(),
        Mode::Modular => (-(-a / ts.constant).exp()).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn model(n: usize, k: usize, alpha: f64, p: f64, mode: Mode, s: Sampling) -> Result<Model> {
        Model::new(n, k, alpha, p, mode, s)
    }

    #[test]
    fn make_model_validates() {
        assert!(model(100, 2, 0.5, 0.1, Mode::Truncated, Sampling::Bernoulli).is_ok());

        let err = model(100, 2, 1.2, 0.1, Mode::Truncated, Sampling::Bernoulli).unwrap_err();
        assert!(err.to_string().contains("alpha out of (0,1)"), "{err}");
        assert!(matches!(err, Error::Validation { field: "alpha", .. }));

        let err = model(10, 2, 0.5, 0.1, Mode::Modular, Sampling::FixedSize(11)).unwrap_err();
        assert!(err.to_string().contains("fixed size exceeds ground set of 10"), "{err}");
        // 11 fits {0..10}
        assert!(model(10, 2, 0.5, 0.1, Mode::Truncated, Sampling::FixedSize(11)).is_ok());

        assert!(matches!(
            model(100, 1, 0.5, 0.1, Mode::Truncated, Sampling::Bernoulli),
            Err(Error::Validation { field: "k", .. })
        ));
        assert!(matches!(
            model(100, 2, 0.5, 1.5, Mode::Truncated, Sampling::Bernoulli),
            Err(Error::Validation { field: "p", .. })
        ));
        assert!(matches!(
            model(100, 2, f64::NAN, -0.1, Mode::Truncated, Sampling::Bernoulli),
            Err(Error::Validation { field: "alpha", .. })
        ));
        // alpha is ignored in modular mode
        assert!(model(100, 3, 7.0, 0.1, Mode::Modular, Sampling::Bernoulli).is_ok());
    }

    #[test]
    fn windows_use_ceil_and_floor() {
        assert_eq!(truncated_window(10, 2, 0.5), (5, 15));
        assert_eq!(truncated_window(4, 2, 0.5), (2, 6));
        assert_eq!(truncated_window(7, 2, 0.3), (3, 11));
        // 0.3 * 1000 is 300.00000000000006 in binary floating point
        assert_eq!(truncated_window(1000, 2, 0.3), (300, 1700));
        assert_eq!(truncated_window(1000, 3, 0.7), (700, 2300));
        let m = model(9, 2, 0.5, 0.1, Mode::Modular, Sampling::Bernoulli).unwrap();
        assert_eq!(m.window(), (0, 8));
    }

    #[test]
    fn bernoulli_extremes() {
        let mut rng = stream(1, 0);
        let m0 = model(50, 2, 0.5, 0.0, Mode::Truncated, Sampling::Bernoulli).unwrap();
        let m1 = model(50, 2, 0.5, 1.0, Mode::Truncated, Sampling::Bernoulli).unwrap();
        for _ in 0..10 {
            assert!(sample_bernoulli(&m0, &mut rng).is_empty());
            assert_eq!(sample_bernoulli(&m1, &mut rng).elements(), (0..=50).collect::<Vec<_>>());
        }
        let mm = model(50, 2, 0.5, 1.0, Mode::Modular, Sampling::Bernoulli).unwrap();
        assert_eq!(sample_bernoulli(&mm, &mut rng).len(), 50);
    }

    #[test]
    fn bernoulli_mean_size() {
        // Over 10^4 draws the sample mean of |A| is within three standard
        // errors of (n+1)p.
        let n = 100_000;
        let p = 0.01;
        let m = model(n, 2, 0.5, p, Mode::Truncated, Sampling::Bernoulli).unwrap();
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|t| sample_bernoulli(&m, &mut stream(99, t)).len())
            .sum();
        let mean = total as f64 / draws as f64;
        let expected = (n + 1) as f64 * p;
        let se = (n as f64 * p * (1.0 - p) / draws as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * se, "mean {mean} expected {expected}");
    }

    #[test]
    fn fixed_size_extremes_and_errors() {
        let mut rng = stream(2, 0);
        let m0 = model(20, 2, 0.5, 0.0, Mode::Truncated, Sampling::FixedSize(0)).unwrap();
        assert!(sample_fixed_size(&m0, &mut rng).unwrap().is_empty());
        let mf = model(20, 2, 0.5, 0.0, Mode::Truncated, Sampling::FixedSize(21)).unwrap();
        assert_eq!(sample_fixed_size(&mf, &mut rng).unwrap().len(), 21);
        let mb = model(20, 2, 0.5, 0.0, Mode::Truncated, Sampling::Bernoulli).unwrap();
        assert!(sample_fixed_size(&mb, &mut rng).is_err());
    }

    #[test]
    fn fixed_size_is_uniform_over_pairs() {
        // n = 5, m = 2: 15 pairs of {0..5}, each with frequency 1/15 ± 0.005.
        let m = model(5, 2, 0.5, 0.0, Mode::Truncated, Sampling::FixedSize(2)).unwrap();
        let draws = 600_000u64;
        let mut counts = std::collections::HashMap::new();
        let mut rng = stream(3, 0);
        for _ in 0..draws {
            let s = sample_fixed_size(&m, &mut rng).unwrap();
            *counts.entry(s.elements().to_vec()).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 15);
        for (pair, c) in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 15.0).abs() <= 0.005, "{pair:?}: {f}");
        }
    }

    #[test]
    fn threshold_examples() {
        let p = threshold_p(10_000, 2, 0.5, 0.0, Mode::Truncated).unwrap();
        assert!((p - 0.05288).abs() < 5e-6, "{p}");
        let p = threshold_p(10_000, 2, 0.5, 0.0, Mode::Modular).unwrap();
        assert!((p - 0.04292).abs() < 5e-6, "{p}");
        let ts = ThresholdSpec::new(3, 0.5, 0.0, Mode::Truncated).unwrap();
        assert!((ts.constant - 48.0).abs() < 1e-12);
        let p = threshold_p(10_000, 3, 0.5, 0.0, Mode::Truncated).unwrap();
        assert!((p - 0.01497).abs() < 5e-6, "{p}");
    }

    #[test]
    fn threshold_errors_and_clamp() {
        assert!(matches!(
            threshold_p(10_000, 2, 0.5, -1e6, Mode::Truncated),
            Err(Error::BelowThreshold { .. })
        ));
        assert!(matches!(
            threshold_p(10_000, 3, 0.5, -1e6, Mode::Modular),
            Err(Error::BelowThreshold { .. })
        ));
        assert_eq!(threshold_p(10, 2, 0.5, 1e6, Mode::Truncated).unwrap(), 1.0);
        assert!(threshold_p(2, 2, 0.5, 0.0, Mode::Modular).is_err());
    }

    #[test]
    fn threshold_decreases_in_n() {
        for &mode in &[Mode::Truncated, Mode::Modular] {
            for k in 2..=4 {
                let ps: Vec<f64> = (3..=7)
                    .map(|e| threshold_p(10usize.pow(e), k, 0.5, 0.0, mode).unwrap())
                    .collect();
                assert!(ps.windows(2).all(|w| w[1] < w[0]), "{mode} k={k}: {ps:?}");
            }
        }
    }

    #[test]
    fn truncated_k2_matches_general_form() {
        for &n in &[10usize, 1_000, 54_321, 10_000_000] {
            for &alpha in &[0.1, 0.3, 0.5, 0.77, 0.95] {
                for &a in &[-1.0, 0.0, 2.5, 8.0] {
                    let direct = threshold_p(n, 2, alpha, a, Mode::Truncated).unwrap();
                    let ts = ThresholdSpec { a_n: a, constant: 2.0 / alpha };
                    let general = ts.evaluate(n, 2, Mode::Truncated).unwrap();
                    assert!((direct - general).abs() <= 1e-12, "{n} {alpha} {a}");
                }
            }
        }
    }

    #[test]
    fn limit_examples() {
        let e1 = (-1.0f64).exp();
        assert!((limit_basis_prob(2, 0.5, 0.0, Mode::Truncated).unwrap() - e1).abs() < 1e-12);
        assert!((limit_basis_prob(2, 0.5, 0.0, Mode::Modular).unwrap() - e1).abs() < 1e-12);
        let v = limit_basis_prob(3, 0.5, 0.0, Mode::Truncated).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn limit_k2_reduces_to_general_constant() {
        for &alpha in &[0.2, 0.5, 0.9] {
            for &a in &[-3.0, 0.0, 1.7] {
                let direct = limit_basis_prob(2, alpha, a, Mode::Truncated).unwrap();
                let general = (-(2.0 * alpha) * (-a / (2.0 / alpha)).exp()).exp();
                assert!((direct - general).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn limit_increases_in_shift(k in 2usize..6, alpha in 0.05f64..0.95, a in -20.0f64..20.0, da in 0.01f64..5.0) {
            for mode in [Mode::Truncated, Mode::Modular] {
                let lo = limit_basis_prob(k, alpha, a, mode).unwrap();
                let hi = limit_basis_prob(k, alpha, a + da, mode).unwrap();
                // strict unless both saturate in floating point
                let saturated = lo == hi && (lo == 0.0 || lo == 1.0);
                prop_assert!(hi > lo || saturated, "{} {} {}", mode, lo, hi);
            }
        }

        #[test]
        fn fixed_size_has_exact_size(n in 2usize..400, frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let m = ((n + 1) as f64 * frac) as usize;
            let model = Model::new(n, 2, 0.5, 0.0, Mode::Truncated, Sampling::FixedSize(m)).unwrap();
            let s = model.sample(&mut stream(seed, 0));
            prop_assert_eq!(s.len(), m);
            prop_assert!(SampledSet::new(s.elements().to_vec(), s.ground()).is_ok());
        }

        #[test]
        fn bernoulli_sets_are_valid(n in 2usize..2000, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let model = Model::new(n, 2, 0.5, p, Mode::Modular, Sampling::Bernoulli).unwrap();
            let s = model.sample(&mut stream(seed, 1));
            prop_assert!(SampledSet::new(s.elements().to_vec(), s.ground()).is_ok());
        }
    }
}
