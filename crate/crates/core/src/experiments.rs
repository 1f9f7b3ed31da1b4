//! Monte Carlo engine.
//!
//! Trial `t` of a run with master seed `s` always draws from stream
//! `(s, t)`, so a run is a pure function of `(model, trials, seed)` and
//! independent of how rayon schedules the trials.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{asympt_mean_missing, exact_mean_missing_k2, PoissonModel};
use crate::error::{Error, Result};
use crate::model::{limit_basis_prob, threshold_p, Mode, Model, Sampling};
use crate::rng::stream;
use crate::sumset::missing_count;

/// Default cap on the bytes of a single sumset bitmap.
pub const DEFAULT_MEMORY_CAP: u64 = 1 << 30;

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub memory_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

/// Empirical law of `X` over a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub basis_successes: u64,
    /// Sparse histogram: value of `X` ↦ number of trials.
    pub x_histogram: BTreeMap<u64, u64>,
    pub mean_x: f64,
    pub seed: u64,
}

impl TrialStats {
    fn from_histogram(x_histogram: BTreeMap<u64, u64>, seed: u64) -> Self {
        let trials: u64 = x_histogram.values().sum();
        let weighted: u128 = x_histogram.iter().map(|(&v, &c)| v as u128 * c as u128).sum();
        TrialStats {
            trials,
            basis_successes: x_histogram.get(&0).copied().unwrap_or(0),
            mean_x: if trials == 0 { 0.0 } else { weighted as f64 / trials as f64 },
            x_histogram,
            seed,
        }
    }

    /// Sample variance of `X` (denominator `trials - 1`).
    pub fn var_x(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let ss: f64 = self
            .x_histogram
            .iter()
            .map(|(&v, &c)| c as f64 * (v as f64 - self.mean_x).powi(2))
            .sum();
        ss / (self.trials - 1) as f64
    }

    /// Combines two runs by adding their histograms.
    pub fn merge(&self, other: &TrialStats) -> TrialStats {
        let mut hist = self.x_histogram.clone();
        for (&v, &c) in &other.x_histogram {
            *hist.entry(v).or_insert(0) += c;
        }
        TrialStats::from_histogram(hist, self.seed)
    }
}

/// Runs `trials` independent trials with the default resource limits.
pub fn run_trials(model: &Model, trials: u64, seed: u64) -> Result<TrialStats> {
    run_trials_with(model, trials, seed, &Limits::default())
}

pub fn run_trials_with(model: &Model, trials: u64, seed: u64, limits: &Limits) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let needed = model.bitmap_bytes();
    if needed > limits.memory_cap {
        return Err(Error::ResourceCap {
            needed,
            cap: limits.memory_cap,
        });
    }
    let hist = (0..trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut hist: BTreeMap<u64, u64>, t| {
            let set = model.sample(&mut stream(seed, t));
            *hist.entry(missing_count(&set, model) as u64).or_insert(0) += 1;
            hist
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (v, c) in b {
                *a.entry(v).or_insert(0) += c;
            }
            a
        });
    Ok(TrialStats::from_histogram(hist, seed))
}

/// Point estimate and 95% Wilson score interval for `P(X = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub fn estimate_basis_prob(stats: &TrialStats) -> BasisEstimate {
    wilson(stats.basis_successes, stats.trials)
}

pub fn wilson(successes: u64, trials: u64) -> BasisEstimate {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    BasisEstimate {
        p_hat,
        ci_lo: (center - half).clamp(0.0, p_hat),
        ci_hi: (center + half).clamp(p_hat, 1.0),
    }
}

/// `½ Σ_v |p̂(v) − Po_λ(v)|`, with the Poisson mass beyond the largest
/// observed value added in closed form.
pub fn tv_empirical_poisson(stats: &TrialStats, lambda: f64) -> Result<f64> {
    let po = PoissonModel::new(lambda)?;
    let n = stats.trials as f64;
    let top = stats.x_histogram.keys().next_back().copied().unwrap_or(0);
    let mut diff = 0.0;
    for v in 0..=top {
        let emp = stats.x_histogram.get(&v).copied().unwrap_or(0) as f64 / n;
        diff += (emp - po.pmf(v)).abs();
    }
    diff += po.sf(top);
    Ok((0.5 * diff).min(1.0))
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub a_n: f64,
    pub mode: Mode,
}

/// One output record; see the CSV contract in [`crate::report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub k: u64,
    pub alpha: f64,
    pub a_n: Option<f64>,
    pub p: Option<f64>,
    pub mode: Mode,
    pub trials: u64,
    pub basis_prob_hat: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub exact_lambda: Option<f64>,
    pub asympt_lambda: Option<f64>,
    pub limit_prob: Option<f64>,
    pub tv_hat: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
}

impl SweepRow {
    fn blank(n: usize, k: usize, alpha: f64, a_n: Option<f64>, mode: Mode, trials: u64, seed: u64) -> Self {
        SweepRow {
            n: n as u64,
            k: k as u64,
            alpha,
            a_n,
            p: None,
            mode,
            trials,
            basis_prob_hat: None,
            ci_lo: None,
            ci_hi: None,
            exact_lambda: None,
            asympt_lambda: None,
            limit_prob: None,
            tv_hat: None,
            seed,
            error: None,
        }
    }
}

/// Fills a row from a completed run. `a_n` is the threshold shift when the
/// run's `p` came from [`threshold_p`].
pub fn summarize(model: &Model, stats: &TrialStats, a_n: Option<f64>, with_tv: bool) -> SweepRow {
    let (n, k, alpha, p, mode) = (model.n(), model.k(), model.alpha(), model.p(), model.mode());
    let mut row = SweepRow::blank(n, k, alpha, a_n, mode, stats.trials, stats.seed);
    row.p = Some(p);
    let est = estimate_basis_prob(stats);
    row.basis_prob_hat = Some(est.p_hat);
    row.ci_lo = Some(est.ci_lo);
    row.ci_hi = Some(est.ci_hi);
    if k == 2 {
        row.exact_lambda = exact_mean_missing_k2(n, p, alpha, mode).ok();
    }
    row.asympt_lambda = asympt_mean_missing(n, p, alpha, k, mode).ok();
    row.limit_prob = a_n.and_then(|a| limit_basis_prob(k, alpha, a, mode).ok());
    if with_tv {
        row.tv_hat = row.exact_lambda.and_then(|l| tv_empirical_poisson(stats, l).ok());
    }
    row
}

/// Runs every grid point at its threshold probability. Failures are
/// recorded in the row's `error` field and do not stop the sweep.
pub fn sweep(grid: &[GridPoint], trials: u64, seed: u64, with_tv: bool) -> Result<Vec<SweepRow>> {
    sweep_with(grid, trials, seed, with_tv, &Limits::default(), |_, _| {})
}

/// [`sweep`] with explicit limits and a per-row callback (for progress
/// logging).
pub fn sweep_with<F: FnMut(usize, &SweepRow)>(
    grid: &[GridPoint],
    trials: u64,
    seed: u64,
    with_tv: bool,
    limits: &Limits,
    mut on_row: F,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "empty sweep grid"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, g) in grid.iter().enumerate() {
        let row = sweep_point(g, trials, seed, with_tv, limits).unwrap_or_else(|e| {
            let mut row = SweepRow::blank(g.n, g.k, g.alpha, Some(g.a_n), g.mode, trials, seed);
            row.error = Some(e.to_string());
            row
        });
        on_row(i, &row);
        rows.push(row);
    }
    Ok(rows)
}

fn sweep_point(g: &GridPoint, trials: u64, seed: u64, with_tv: bool, limits: &Limits) -> Result<SweepRow> {
    let p = threshold_p(g.n, g.k, g.alpha, g.a_n, g.mode)?;
    let model = Model::new(g.n, g.k, g.alpha, p, g.mode, Sampling::Bernoulli)?;
    let stats = run_trials_with(&model, trials, seed, limits)?;
    Ok(summarize(&model, &stats, Some(g.a_n), with_tv))
}

/// Size of the fixed-size model matched to Bernoulli(p): `round((n+1)p)`
/// for truncated, `round(np)` for modular ground sets.
pub fn matched_fixed_size(model: &Model) -> usize {
    (model.ground().size() as f64 * model.p()).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SampledSet;
    use crate::sumset::is_basis;

    fn bern(n: usize, k: usize, alpha: f64, p: f64, mode: Mode) -> Model {
        Model::new(n, k, alpha, p, mode, Sampling::Bernoulli).unwrap()
    }

    #[test]
    fn extremes() {
        let s = run_trials(&bern(30, 2, 0.5, 1.0, Mode::Truncated), 100, 1).unwrap();
        assert_eq!(s.basis_successes, 100);
        assert_eq!(s.x_histogram, BTreeMap::from([(0, 100)]));

        let s = run_trials(&bern(10, 2, 0.5, 0.0, Mode::Truncated), 100, 1).unwrap();
        // window [5, 15] has 11 targets
        assert_eq!(s.x_histogram, BTreeMap::from([(11, 100)]));
        assert_eq!(s.basis_successes, 0);
        assert_eq!(s.mean_x, 11.0);

        assert!(run_trials(&bern(10, 2, 0.5, 0.0, Mode::Truncated), 0, 1).is_err());
    }

    #[test]
    fn memory_cap_is_enforced() {
        let m = bern(1_000_000, 4, 0.5, 0.01, Mode::Truncated);
        let err = run_trials_with(&m, 1, 1, &Limits { memory_cap: 1024 }).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
    }

    #[test]
    fn stats_invariants_and_determinism() {
        let m = bern(300, 3, 0.4, 0.09, Mode::Truncated);
        let a = run_trials(&m, 500, 42).unwrap();
        let b = run_trials(&m, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x_histogram.values().sum::<u64>(), a.trials);
        assert_eq!(a.basis_successes, a.x_histogram.get(&0).copied().unwrap_or(0));
        let mean = a.x_histogram.iter().map(|(&v, &c)| (v * c) as f64).sum::<f64>() / 500.0;
        assert_eq!(a.mean_x, mean);
        let c = run_trials(&m, 500, 43).unwrap();
        assert_ne!(a.x_histogram, c.x_histogram);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let m = bern(500, 2, 0.5, 0.12, Mode::Truncated);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_trials(&m, 2000, 9).unwrap());
        let b = four.install(|| run_trials(&m, 2000, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn trials_agree_with_exhaustive_basis_probability() {
        // n = 20, p = 0.9: exact P(basis) by enumerating 2^21 subsets.
        let n = 20;
        let p: f64 = 0.9;
        let m = bern(n, 2, 0.5, p, Mode::Truncated);
        let mut exact = 0.0;
        for mask in 0u32..(1 << (n + 1)) {
            let elems: Vec<usize> = (0..=n).filter(|&i| mask >> i & 1 == 1).collect();
            let size = elems.len() as i32;
            // quick reject: both ends of the window need small and large elements
            if size < 4 {
                continue;
            }
            let set = SampledSet::new(elems, m.ground()).unwrap();
            if is_basis(&set, &m) {
                exact += p.powi(size) * (1.0 - p).powi(n as i32 + 1 - size);
            }
        }
        let trials = 100_000;
        let stats = run_trials(&m, trials, 2024).unwrap();
        let est = estimate_basis_prob(&stats);
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((est.p_hat - exact).abs() <= 3.0 * se, "{} vs {exact}", est.p_hat);
    }

    #[test]
    fn wilson_examples() {
        let e = wilson(0, 100);
        assert_eq!((e.p_hat, e.ci_lo), (0.0, 0.0));
        assert!((e.ci_hi - 0.037).abs() < 5e-4, "{}", e.ci_hi);
        let e = wilson(100, 100);
        assert_eq!((e.p_hat, e.ci_hi), (1.0, 1.0));
        let e = wilson(50, 100);
        assert_eq!(e.p_hat, 0.5);
        assert!(((e.ci_lo + e.ci_hi) / 2.0 - 0.5).abs() < 1e-12);
        assert!((e.ci_hi - e.ci_lo - 0.19).abs() < 5e-3, "{}", e.ci_hi - e.ci_lo);
        for s in 0..=37 {
            let e = wilson(s, 37);
            assert!(e.ci_lo <= e.p_hat && e.p_hat <= e.ci_hi);
        }
    }

    fn stats_from(hist: &[(u64, u64)]) -> TrialStats {
        TrialStats::from_histogram(hist.iter().copied().collect(), 0)
    }

    #[test]
    fn tv_examples() {
        let point = stats_from(&[(0, 1000)]);
        assert_eq!(tv_empirical_poisson(&point, 0.0).unwrap(), 0.0);
        let tv = tv_empirical_poisson(&point, 1.0).unwrap();
        assert!((tv - (1.0 - (-1.0f64).exp())).abs() < 1e-12);

        // Po(2) masses scaled to 10^6 and rounded
        let po = PoissonModel::new(2.0).unwrap();
        let hist: Vec<(u64, u64)> = (0..30)
            .map(|v| (v, (po.pmf(v) * 1e6).round() as u64))
            .filter(|&(_, c)| c > 0)
            .collect();
        let tv = tv_empirical_poisson(&stats_from(&hist), 2.0).unwrap();
        assert!(tv <= 1e-3, "{tv}");
        assert!(tv_empirical_poisson(&point, -1.0).is_err());
    }

    #[test]
    fn merge_adds_histograms() {
        let a = stats_from(&[(0, 3), (2, 1)]);
        let b = stats_from(&[(2, 4), (5, 2)]);
        let m = a.merge(&b);
        assert_eq!(m.trials, 10);
        assert_eq!(m.basis_successes, 3);
        assert_eq!(m.x_histogram, BTreeMap::from([(0, 3), (2, 5), (5, 2)]));
        assert_eq!(m, b.merge(&a));
    }

    #[test]
    fn sweep_rows_and_errors() {
        let grid = [
            GridPoint { n: 2000, k: 2, alpha: 0.5, a_n: 0.0, mode: Mode::Truncated },
            GridPoint { n: 2000, k: 2, alpha: 0.5, a_n: -1e6, mode: Mode::Truncated },
            GridPoint { n: 2000, k: 3, alpha: 0.5, a_n: 1.0, mode: Mode::Modular },
        ];
        let rows = sweep(&grid, 200, 5, true).unwrap();
        assert_eq!(rows.len(), 3);
        let r = &rows[0];
        assert!(r.error.is_none());
        let (lo, hat, hi) = (r.ci_lo.unwrap(), r.basis_prob_hat.unwrap(), r.ci_hi.unwrap());
        assert!(lo <= hat && hat <= hi);
        assert!(r.exact_lambda.is_some() && r.tv_hat.is_some() && r.limit_prob.is_some());
        let r = &rows[1];
        assert!(r.error.as_deref().unwrap().contains("below expressible threshold"));
        assert!(r.basis_prob_hat.is_none() && r.p.is_none());
        let r = &rows[2];
        assert!(r.error.is_none() && r.exact_lambda.is_none() && r.asympt_lambda.is_some());
        assert!(sweep(&[], 10, 1, false).is_err());
    }

    #[test]
    fn empirical_mean_tracks_exact_mean() {
        let n = 1000;
        for &p in &[0.08, 0.1, 0.13] {
            let m = bern(n, 2, 0.5, p, Mode::Truncated);
            let stats = run_trials(&m, 10_000, 77).unwrap();
            let exact = exact_mean_missing_k2(n, p, 0.5, Mode::Truncated).unwrap();
            let se = (stats.var_x() / stats.trials as f64).sqrt();
            assert!((stats.mean_x - exact).abs() <= 3.0 * se.max(1e-9), "p={p}: {} vs {exact}", stats.mean_x);
        }
    }
}
