use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub inner: usize,
    pub outer: usize,
    pub seed: u64,
    pub q_low: f64,
    pub q_high: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { inner: 100, outer: 100, seed: 0, q_low: 0.025, q_high: 0.975 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean_diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
    pub sample_size: usize,
    pub seed: u64,
}

/// Linear-interpolation quantile of sorted data (R's type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstraps the mean of the paired differences `a[i] - b[i]`.
pub fn bootstrap_diff(a: &[f64], b: &[f64], cfg: &BootstrapConfig) -> Result<BootstrapResult, EvalError> {
    if a.is_empty() || b.is_empty() || cfg.inner == 0 || cfg.outer == 0 {
        return Err(EvalError::EmptyInput);
    }
    if a.len() != b.len() {
        return Err(EvalError::Unpaired { a: a.len(), b: b.len() });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut means: Vec<f64> = (0..cfg.outer)
        .map(|_| (0..cfg.inner).map(|_| diffs[rng.random_range(0..diffs.len())]).sum::<f64>() / cfg.inner as f64)
        .collect();
    let mean_diff = means.iter().sum::<f64>() / means.len() as f64;
    means.sort_by(f64::total_cmp);
    // Rounding can leave the mean a hair outside a degenerate interval.
    let ci_low = quantile(&means, cfg.q_low).min(mean_diff);
    let ci_high = quantile(&means, cfg.q_high).max(mean_diff);
    Ok(BootstrapResult { mean_diff, ci_low, ci_high, resamples: cfg.outer, sample_size: cfg.inner, seed: cfg.seed })
}
