//! Roughness estimators built from the approximate Faber-Schauder
//! coefficients of an antiderivative.
//!
//! For observations of `y` on the dyadic grid of level `n + 2`,
//!
//! ```text
//! ϑ_{n,k} = 2^{3n/2+3} ( y(4k h) − 2 y((4k+1) h) + 2 y((4k+3) h) − y((4k+4) h) ),  h = 2^{-(n+2)}
//! R̂_n(y)  = 1 − (1/n) log2 ‖ϑ_n‖₂
//! ```
//!
//! `R̂_n` depends on the scale of `y`: `R̂_n(ηy) = R̂_n(y) − log2(η)/n`. The
//! sequential scale estimate picks `λ = log2 η` minimizing
//! `Σ_{k=n−m}^{n} α_{n−k} (R̂_k(ηy) − R̂_{k−1}(ηy))²`, a quadratic in `λ`,
//! and reports `R^s_n = R̂_n(η y)`. The same number is an affine combination
//! `Σ_k β_{n,k} R̂_k(y)` with `Σ β = 1` and `Σ β/k = 0`; [`r_seq`] evaluates
//! both forms and fails if they disagree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{DyadicPath, Regularity};

/// Agreement required between the closed-form and β-weighted evaluations.
pub const DUAL_EVALUATION_TOL: f64 = 1e-10;

/// The `2^n` coefficients `ϑ_{n,0..2^n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarthetaVector {
    pub n: u32,
    pub values: Vec<f64>,
}

impl VarthetaVector {
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn require_level(y: &DyadicPath, required: u32) -> Result<()> {
    if y.level() < required {
        Err(Error::InsufficientResolution { required, actual: y.level() })
    } else {
        Ok(())
    }
}

/// Unscaled brackets `y(4k) − 2y(4k+1) + 2y(4k+3) − y(4k+4)` on level `n + 2`.
fn brackets(y: &DyadicPath, n: u32) -> impl Iterator<Item = f64> + '_ {
    let fine = n + 2;
    (0..1usize << n).map(move |k| {
        let i = 4 * k;
        y.at(fine, i) - 2.0 * y.at(fine, i + 1) + 2.0 * y.at(fine, i + 3) - y.at(fine, i + 4)
    })
}

pub fn vartheta_coeffs(y: &DyadicPath, n: u32) -> Result<VarthetaVector> {
    require_level(y, n + 2)?;
    let scale = (1.5 * n as f64 + 3.0).exp2();
    Ok(VarthetaVector { n, values: brackets(y, n).map(|b| scale * b).collect() })
}

/// Faber-Schauder coefficients
/// `θ_{n,k} = 2^{n/2} ( 2f((2k+1)/2^{n+1}) − f(k/2^n) − f((k+1)/2^n) )`.
pub fn faber_schauder_coeffs(f: &DyadicPath, n: u32) -> Result<Vec<f64>> {
    require_level(f, n + 1)?;
    let scale = (0.5 * n as f64).exp2();
    let fine = n + 1;
    Ok((0..1usize << n)
        .map(|k| scale * (2.0 * f.at(fine, 2 * k + 1) - f.at(fine, 2 * k) - f.at(fine, 2 * k + 2)))
        .collect())
}

/// Raw estimate `R̂_n(y) = 1 − (1/n) log2 ‖ϑ_n‖₂`.
///
/// Fails with [`Error::Degenerate`] when every bracket is zero up to the
/// rounding error of the four-point stencil (`y` is quadratic on the grid).
pub fn r_hat(y: &DyadicPath, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("level n must be at least 1".into()));
    }
    require_level(y, n + 2)?;
    let stride = 1usize << (y.level() - n - 2);
    let max_abs = y.values().iter().step_by(stride).fold(0.0f64, |m, v| m.max(v.abs()));
    let noise_floor = 8.0 * f64::EPSILON * max_abs;

    let mut sum_sq = 0.0;
    let mut max_bracket = 0.0f64;
    for b in brackets(y, n) {
        sum_sq += b * b;
        max_bracket = max_bracket.max(b.abs());
    }
    if !(max_bracket > noise_floor) {
        return Err(Error::Degenerate { level: n });
    }
    // log2 ‖ϑ‖ = (3n/2 + 3) + log2 ‖brackets‖, kept apart to avoid overflow.
    let log2_norm = 1.5 * n as f64 + 3.0 + 0.5 * sum_sq.log2();
    Ok(1.0 - log2_norm / n as f64)
}

/// Window length `m` and weights `α_0..α_m` of the sequential scale estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqEstimatorConfig {
    pub m: usize,
    pub alphas: Vec<f64>,
}

impl SeqEstimatorConfig {
    pub fn new(m: usize, alphas: Vec<f64>) -> Result<Self> {
        let cfg = SeqEstimatorConfig { m, alphas };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `m` with all weights equal to one.
    pub fn uniform(m: usize) -> Self {
        SeqEstimatorConfig { m, alphas: vec![1.0; m + 1] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidArgument("window length m must be at least 1".into()));
        }
        if self.alphas.len() != self.m + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights alpha_0..alpha_{}, got {}",
                self.m + 1,
                self.m,
                self.alphas.len()
            )));
        }
        if !(self.alphas[0] > 0.0) || self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weights must satisfy alpha_0 > 0 and alpha_i >= 0, got {:?}",
                self.alphas
            )));
        }
        Ok(())
    }

    /// Smallest level used by the estimate at `n`.
    pub fn lowest_level(&self, n: u32) -> u32 {
        n - self.m as u32 - 1
    }

    fn check_n(&self, n: u32) -> Result<()> {
        self.validate()?;
        if (n as usize) <= self.m + 1 {
            return Err(Error::InsufficientLevels { n, m: self.m });
        }
        Ok(())
    }

    fn alpha(&self, n: u32, k: u32) -> f64 {
        self.alphas[(n - k) as usize]
    }

    /// `c^s_n = Σ_{k=n−m}^{n} α_{n−k} / (k²(k−1)²)`.
    fn c_s(&self, n: u32) -> f64 {
        (n - self.m as u32..=n)
            .map(|k| {
                let (k, km1) = (k as f64, k as f64 - 1.0);
                self.alpha(n, k as u32) / (k * k * km1 * km1)
            })
            .sum()
    }
}

impl Default for SeqEstimatorConfig {
    fn default() -> Self {
        SeqEstimatorConfig::uniform(3)
    }
}

/// `β_{n,k}` for `k = lowest_level..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaWeights {
    pub lowest_level: u32,
    pub weights: Vec<f64>,
}

impl BetaWeights {
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights.iter().enumerate().map(|(i, &b)| (self.lowest_level + i as u32, b))
    }

    pub fn get(&self, k: u32) -> Option<f64> {
        k.checked_sub(self.lowest_level).and_then(|i| self.weights.get(i as usize).copied())
    }
}

pub fn beta_coeffs(n: u32, config: &SeqEstimatorConfig) -> Result<BetaWeights> {
    config.check_n(n)?;
    let m = config.m as u32;
    let c = config.c_s(n);
    let nf = n as f64;
    let lowest = n - m - 1;
    let weights = (lowest..=n)
        .map(|k| {
            let kf = k as f64;
            if k == n {
                1.0 + config.alphas[0] / (c * nf * nf * (nf - 1.0))
            } else if k == lowest {
                -config.alphas[config.m] / (c * nf * (nf - m as f64) * (nf - m as f64 - 1.0))
            } else {
                (config.alpha(n, k) / (kf - 1.0) - config.alpha(n, k + 1) / (kf + 1.0)) / (c * nf * kf)
            }
        })
        .collect();
    Ok(BetaWeights { lowest_level: lowest, weights })
}

/// Raw estimates `R̂_k(y)` for every level in the window of `n`.
pub fn r_hat_window(y: &DyadicPath, n: u32, config: &SeqEstimatorConfig) -> Result<BTreeMap<u32, f64>> {
    config.check_n(n)?;
    require_level(y, n + 2)?;
    (config.lowest_level(n)..=n).map(|k| Ok((k, r_hat(y, k)?))).collect()
}

/// Closed-form minimizer `λ* = log2 η^s_n` given the raw estimates.
pub fn lambda_star(r_hats: &BTreeMap<u32, f64>, n: u32, config: &SeqEstimatorConfig) -> Result<f64> {
    config.check_n(n)?;
    let mut num = 0.0;
    for k in n - config.m as u32..=n {
        let (cur, prev) = match (r_hats.get(&k), r_hats.get(&(k - 1))) {
            (Some(c), Some(p)) => (*c, *p),
            _ => return Err(Error::InvalidArgument(format!("raw estimate missing near level {k}"))),
        };
        let kf = k as f64;
        num += config.alpha(n, k) * (cur - prev) / (kf * (kf - 1.0));
    }
    Ok(-num / config.c_s(n))
}

/// Sequential scaling factor `η^s_n` and its base-2 logarithm `λ*`.
pub fn eta_seq(y: &DyadicPath, n: u32, config: &SeqEstimatorConfig) -> Result<(f64, f64)> {
    let r_hats = r_hat_window(y, n, config)?;
    let lambda = lambda_star(&r_hats, n, config)?;
    Ok((lambda.exp2(), lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: u32,
    /// `R̂_n(y)` on the unscaled input.
    pub r_hat: f64,
    pub r_hat_levels: BTreeMap<u32, f64>,
    pub lambda_star: f64,
    pub eta_seq: f64,
    pub r_seq: f64,
    pub beta: BetaWeights,
    pub config: SeqEstimatorConfig,
    pub regularity: Regularity,
}

/// Combines precomputed raw estimates into the sequential scale estimate.
pub fn sequential_from_raw(r_hats: BTreeMap<u32, f64>, n: u32, config: &SeqEstimatorConfig) -> Result<EstimateReport> {
    let lambda = lambda_star(&r_hats, n, config)?;
    let beta = beta_coeffs(n, config)?;
    let r_n = r_hats[&n];
    let closed_form = r_n - lambda / n as f64;
    let combination: f64 = beta.iter().map(|(k, b)| b * r_hats[&k]).sum();
    if !((closed_form - combination).abs() <= DUAL_EVALUATION_TOL * closed_form.abs().max(1.0)) {
        return Err(Error::Inconsistent { closed_form, combination });
    }
    Ok(EstimateReport {
        n,
        r_hat: r_n,
        r_hat_levels: r_hats,
        lambda_star: lambda,
        eta_seq: lambda.exp2(),
        r_seq: closed_form,
        beta,
        config: config.clone(),
        regularity: Regularity::NotChecked,
    })
}

/// Sequential scale estimate `R^s_n(y) = R̂_n(η^s_n y)`.
pub fn r_seq(y: &DyadicPath, n: u32, config: &SeqEstimatorConfig) -> Result<EstimateReport> {
    sequential_from_raw(r_hat_window(y, n, config)?, n, config)
}
