use serde::{Deserialize, Serialize};

use super::{McRow, RowStatus};
use crate::error::{Error, Result};

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7):
/// `h = (N − 1) p`, `Q = x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋])`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey box summary of the sequential scale estimates for one `(H, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub hurst: f64,
    pub n: u32,
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
    pub mean: f64,
    pub rmse_vs_h: f64,
}

impl BoxStats {
    pub fn from_values(hurst: f64, n: u32, values: &[f64]) -> Option<BoxStats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&v, 0.25);
        let median = quantile_sorted(&v, 0.5);
        let q3 = quantile_sorted(&v, 0.75);
        let iqr = q3 - q1;
        let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside = v.iter().copied().filter(|x| (fence_lo..=fence_hi).contains(x));
        let whisker_lo = inside.clone().fold(f64::INFINITY, f64::min);
        let whisker_hi = inside.fold(f64::NEG_INFINITY, f64::max);
        let outliers = v.iter().copied().filter(|x| !(fence_lo..=fence_hi).contains(x)).collect();
        let count = v.len();
        let mean = v.iter().sum::<f64>() / count as f64;
        let rmse_vs_h = (v.iter().map(|x| (x - hurst).powi(2)).sum::<f64>() / count as f64).sqrt();
        Some(BoxStats { hurst, n, count, median, q1, q3, whisker_lo, whisker_hi, outliers, mean, rmse_vs_h })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStatsSet {
    pub groups: Vec<BoxStats>,
    /// `(H, n)` groups without a single usable estimate.
    pub skipped: Vec<(f64, u32)>,
}

impl BoxStatsSet {
    pub fn get(&self, hurst: f64, n: u32) -> Option<&BoxStats> {
        self.groups.iter().find(|b| b.hurst == hurst && b.n == n)
    }

    pub fn for_hurst(&self, hurst: f64) -> Vec<BoxStats> {
        self.groups.iter().filter(|b| b.hurst == hurst).cloned().collect()
    }
}

/// Groups the successful `r_seq` estimates by `(H, n)` in order of first
/// appearance of `H`, then ascending `n`.
pub fn box_stats(rows: &[McRow]) -> BoxStatsSet {
    let mut keys: Vec<(f64, u32)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(h, n)| h == r.hurst && n == r.n) {
            keys.push((r.hurst, r.n));
        }
    }
    let hurst_order: Vec<f64> = keys.iter().fold(Vec::new(), |mut acc, &(h, _)| {
        if !acc.contains(&h) {
            acc.push(h);
        }
        acc
    });
    keys.sort_by(|a, b| {
        let ia = hurst_order.iter().position(|&h| h == a.0);
        let ib = hurst_order.iter().position(|&h| h == b.0);
        ia.cmp(&ib).then(a.1.cmp(&b.1))
    });

    let mut set = BoxStatsSet { groups: Vec::new(), skipped: Vec::new() };
    for (h, n) in keys {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.hurst == h && r.n == n && r.status == RowStatus::Ok)
            .filter_map(|r| r.r_seq)
            .collect();
        match BoxStats::from_values(h, n, &values) {
            Some(b) => set.groups.push(b),
            None => set.skipped.push((h, n)),
        }
    }
    set
}

/// Least-squares fit of `log2(rmse)` against `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub levels: Vec<u32>,
    pub log2_rmse: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns
/// `(slope, intercept, r²)`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::RateFit(format!("need matching inputs of length >= 2, got {} and {}", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::RateFit("all abscissae are equal".into()));
    }
    if !(syy > 0.0) {
        return Err(Error::RateFit("response is constant; slope and r² are undefined".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    Ok((slope, intercept, 1.0 - ss_res / syy))
}

pub fn rate_fit_points(levels: &[u32], rmse: &[f64]) -> Result<RateFit> {
    if levels.len() < 3 {
        return Err(Error::RateFit(format!("need at least 3 levels, got {}", levels.len())));
    }
    if let Some(bad) = rmse.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::RateFit(format!("rmse must be positive and finite, got {bad}")));
    }
    let x: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let log2_rmse: Vec<f64> = rmse.iter().map(|r| r.log2()).collect();
    let (slope, intercept, r_squared) = ols(&x, &log2_rmse)?;
    Ok(RateFit { levels: levels.to_vec(), log2_rmse, slope, intercept, r_squared })
}

/// Fits the RMSE decay across the levels of one Hurst value.
pub fn rate_fit(stats: &[BoxStats]) -> Result<RateFit> {
    if let Some(first) = stats.first() {
        if stats.iter().any(|s| s.hurst != first.hurst) {
            return Err(Error::RateFit("box statistics mix several Hurst values".into()));
        }
    }
    let mut sorted: Vec<&BoxStats> = stats.iter().collect();
    sorted.sort_by_key(|s| s.n);
    let levels: Vec<u32> = sorted.iter().map(|s| s.n).collect();
    let rmse: Vec<f64> = sorted.iter().map(|s| s.rmse_vs_h).collect();
    rate_fit_points(&levels, &rmse)
}
