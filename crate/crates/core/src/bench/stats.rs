//! Run metrics, summaries and the two-sample rank-sum test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::mission::MissionOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub success: bool,
    pub steps: u64,
    pub per_dog_path_length: Vec<f64>,
    /// Longest single-dog path.
    pub max_path_length: f64,
    /// Sum over dogs.
    pub total_path_length: f64,
}

impl From<&MissionOutcome> for RunMetrics {
    fn from(o: &MissionOutcome) -> Self {
        let per_dog = o.per_dog_path_length.clone();
        Self {
            seed: o.seed,
            success: o.success,
            steps: o.steps,
            max_path_length: per_dog.iter().copied().fold(0.0, f64::max),
            total_path_length: per_dog.iter().sum(),
            per_dog_path_length: per_dog,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub std: f64,
}

impl Stat {
    /// `None` for an empty sample.
    pub fn of(xs: &[f64]) -> Option<Stat> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(Stat { mean, std })
    }
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}±{:.2}", self.mean, self.std)
    }
}

/// Success rate over all runs; step and path statistics over the successful
/// runs only, absent when there are none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub runs: usize,
    pub successes: usize,
    pub sr: f64,
    pub steps: Option<Stat>,
    /// Per-run longest dog path.
    pub path: Option<Stat>,
    /// Per-run summed dog paths.
    pub total_path: Option<Stat>,
}

pub fn summarize(metrics: &[RunMetrics]) -> CaseSummary {
    let ok: Vec<&RunMetrics> = metrics.iter().filter(|m| m.success).collect();
    let col = |f: fn(&RunMetrics) -> f64| Stat::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    CaseSummary {
        runs: metrics.len(),
        successes: ok.len(),
        sr: if metrics.is_empty() { 0.0 } else { ok.len() as f64 / metrics.len() as f64 },
        steps: col(|m| m.steps as f64),
        path: col(|m| m.max_path_length),
        total_path: col(|m| m.total_path_length),
    }
}

/// Largest combined sample size evaluated exactly.
const EXACT_MAX_TOTAL: usize = 19;
/// Both samples must also be smaller than this for the exact path.
const EXACT_MAX_SMALLER: usize = 10;

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value.
///
/// Small samples (`min(m, n) < 10` and `m + n < 20`) use the exact
/// permutation distribution of the rank sum over the pooled mid-ranks, so
/// ties are handled exactly. Larger samples use the normal approximation with
/// tie and continuity correction. Identical pooled values give `p = 1`.
/// Panics on an empty sample.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "rank_sum_test needs two non-empty samples");
    let (m, n) = (a.len(), b.len());
    let total = m + n;
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    // doubled mid-ranks keep everything integral
    let mut rank2 = vec![0u64; total];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let r2 = (i + 1 + j + 1) as u64;
        rank2[i..=j].iter_mut().for_each(|r| *r = r2);
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    if tie_term == (total as f64).powi(3) - total as f64 {
        return 1.0;
    }
    let w2: u64 = (0..total).filter(|&k| pooled[k].1).map(|k| rank2[k]).sum();

    if m.min(n) < EXACT_MAX_SMALLER && total <= EXACT_MAX_TOTAL {
        exact_p(&rank2, m, w2)
    } else {
        let (mf, nf, nt) = (m as f64, n as f64, total as f64);
        let u = w2 as f64 / 2.0 - mf * (mf + 1.0) / 2.0;
        let mu = mf * nf / 2.0;
        let var = mf * nf / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
        let d = u - mu;
        let z = (d.abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * (1.0 - normal.cdf(z))).min(1.0)
    }
}

/// Fraction of size-`m` subsets of the pooled doubled ranks whose sum is at
/// least as far from the mean as `w2`.
fn exact_p(rank2: &[u64], m: usize, w2: u64) -> f64 {
    let max_sum: u64 = rank2.iter().sum();
    let width = max_sum as usize + 1;
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0f64; width]; m + 1];
    counts[0][0] = 1.0;
    for &r in rank2 {
        let r = r as usize;
        for k in (1..=m).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            let (prev, cur) = (&lo[k - 1], &mut hi[0]);
            for s in (r..width).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    let row = &counts[m];
    let all: f64 = row.iter().sum();
    let mean2 = m as f64 * (rank2.len() as f64 + 1.0);
    let observed = (w2 as f64 - mean2).abs();
    let extreme: f64 = row
        .iter()
        .enumerate()
        .filter(|&(s, &c)| c != 0.0 && (s as f64 - mean2).abs() >= observed - 1e-9)
        .map(|(_, &c)| c)
        .sum();
    (extreme / all).min(1.0)
}
