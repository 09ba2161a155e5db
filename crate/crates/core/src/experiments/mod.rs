//! Monte Carlo harness: simulate many paths, estimate at several levels,
//! summarize with box statistics and fit empirical convergence rates.

mod stats;
mod svg;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_hurst, Error, Result};
use crate::estimator::{r_seq, SeqEstimatorConfig};
use crate::processes::{
    build_drifted_fbm, build_fou, check_regularity, integrate_transform, DriftSpec, FouSpec, IntegratedPath, TransformG,
};
use crate::sim::{FbmSampler, SimBackend};

pub use stats::{box_stats, ols, quantile_sorted, rate_fit, rate_fit_points, BoxStats, BoxStatsSet, RateFit};
pub use svg::render_boxplot_svg;

/// Finest simulation level a Monte Carlo config may request.
pub const MAX_SIM_LEVEL: u32 = 24;

/// Default tolerance for the `∫ g'(X)² ds > 0` diagnostic.
pub const DEFAULT_REGULARITY_TOL: f64 = 1e-12;

/// Model for `X`, without its Hurst parameter (which comes from the sweep).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `X_t = x0 + ρ ∫ (μ − X_s) ds + W^H_t`.
    Fou { x0: f64, rho: f64, mu: f64 },
    /// `X_t = x0 + W^H_t + c t`.
    DriftedFbm {
        x0: f64,
        #[serde(default)]
        drift: f64,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Fou { .. } => "fou",
            ModelSpec::DriftedFbm { .. } => "dfbm",
        }
    }
}

/// A fully specified simulated model.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub model: ModelSpec,
    pub hurst: f64,
    pub transform: TransformG,
    /// Observation level of `Y`.
    pub target_level: u32,
    pub oversample_q: u32,
    pub backend: SimBackend,
}

impl ProcessSpec {
    pub fn sim_level(&self) -> u32 {
        self.target_level + self.oversample_q
    }

    pub fn sampler(&self) -> Result<FbmSampler> {
        FbmSampler::new(self.sim_level(), self.hurst, self.backend)
    }

    /// Simulates `X` at the fine level and integrates `g(X)` down to the
    /// observation level.
    pub fn simulate_with(&self, sampler: &FbmSampler, seed: u64) -> Result<IntegratedPath> {
        let fbm = sampler.sample(seed);
        let x = match self.model {
            ModelSpec::Fou { x0, rho, mu } => build_fou(&FouSpec { x0, rho, mu, hurst: self.hurst }, &fbm)?,
            ModelSpec::DriftedFbm { x0, drift } => {
                let d = if drift == 0.0 { DriftSpec::None } else { DriftSpec::Constant(drift) };
                build_drifted_fbm(x0, &d, &fbm)?
            }
        };
        integrate_transform(Arc::new(x), &self.transform, self.target_level, self.oversample_q)
    }

    pub fn simulate(&self, seed: u64) -> Result<IntegratedPath> {
        self.simulate_with(&self.sampler()?, seed)
    }
}

fn default_oversample() -> u32 {
    4
}

fn default_regularity_tol() -> f64 {
    DEFAULT_REGULARITY_TOL
}

/// Monte Carlo study configuration; the JSON run-config schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub model: ModelSpec,
    pub transform: TransformG,
    pub hurst_list: Vec<f64>,
    pub n_levels: Vec<u32>,
    pub paths: usize,
    pub seed0: u64,
    #[serde(default)]
    pub estimator: SeqEstimatorConfig,
    #[serde(default = "default_oversample")]
    pub oversample_q: u32,
    #[serde(default)]
    pub backend: SimBackend,
    #[serde(default = "default_regularity_tol")]
    pub regularity_tol: f64,
    /// Free-form provenance recorded alongside the outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Default for McConfig {
    /// Fractional OU log-volatility observed through integrated variance,
    /// `x0 = μ = 2`, `ρ = 0.2`, `H = 0.1`, `m = 3`, unit weights, 200 paths.
    fn default() -> Self {
        McConfig {
            model: ModelSpec::Fou { x0: 2.0, rho: 0.2, mu: 2.0 },
            transform: TransformG::ExpTwoT,
            hurst_list: vec![0.1],
            n_levels: (10..=14).collect(),
            paths: 200,
            seed0: 20250415,
            estimator: SeqEstimatorConfig::default(),
            oversample_q: default_oversample(),
            backend: SimBackend::default(),
            regularity_tol: DEFAULT_REGULARITY_TOL,
            note: None,
        }
    }
}

impl McConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: McConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn max_level(&self) -> u32 {
        self.n_levels.iter().copied().max().unwrap_or(0)
    }

    /// Observation level of `Y`: two levels above the finest estimate.
    pub fn target_level(&self) -> u32 {
        self.max_level() + 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.paths < 1 {
            return bad("paths must be at least 1".into());
        }
        if self.hurst_list.is_empty() {
            return bad("hurst_list is empty".into());
        }
        for &h in &self.hurst_list {
            check_hurst(h).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.n_levels.is_empty() {
            return bad("n_levels is empty".into());
        }
        self.estimator.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(&n) = self.n_levels.iter().find(|&&n| (n as usize) <= self.estimator.m + 1) {
            return bad(format!("level n = {n} must exceed m + 1 = {}", self.estimator.m + 1));
        }
        let sim = self.target_level() + self.oversample_q;
        if sim > MAX_SIM_LEVEL {
            return bad(format!(
                "max(n_levels) + 2 + oversample_q = {sim} exceeds the simulation budget {MAX_SIM_LEVEL}"
            ));
        }
        if let ModelSpec::Fou { rho, .. } = self.model {
            if !(rho >= 0.0) {
                return bad(format!("rho must be nonnegative, got {rho}"));
            }
        }
        if !(self.regularity_tol >= 0.0) {
            return bad("regularity_tol must be nonnegative".into());
        }
        Ok(())
    }

    pub fn process(&self, hurst: f64) -> ProcessSpec {
        ProcessSpec {
            model: self.model,
            hurst,
            transform: self.transform.clone(),
            target_level: self.target_level(),
            oversample_q: self.oversample_q,
            backend: self.backend,
        }
    }

    /// fOU runs with `H ≥ 1/2` fall outside the rough-volatility model the
    /// estimator's guarantees were stated for.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if matches!(self.model, ModelSpec::Fou { .. }) {
            for &h in self.hurst_list.iter().filter(|&&h| h >= 0.5) {
                out.push(format!("fOU with H = {h} >= 1/2 is outside the rough (H < 1/2) model class"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Degenerate,
    SimFailed,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Degenerate => "degenerate",
            RowStatus::SimFailed => "sim_failed",
        }
    }
}

/// One estimate: a path at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub hurst: f64,
    pub n: u32,
    pub path: usize,
    pub seed: u64,
    pub status: RowStatus,
    pub r_hat: Option<f64>,
    pub r_seq: Option<f64>,
    pub regularity_ok: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McTally {
    pub simulated: usize,
    pub estimated: usize,
    pub degenerate: usize,
    pub sim_failed: usize,
    pub regularity_warnings: usize,
}

#[derive(Debug, Clone)]
pub struct McTable {
    pub rows: Vec<McRow>,
    pub tally: McTally,
}

impl McTable {
    /// CSV with header `hurst,n,path,seed,status,r_hat,r_seq`; missing
    /// estimates are empty fields and numbers carry 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["hurst", "n", "path", "seed", "status", "r_hat", "r_seq"]).map_err(io)?;
        let opt = |v: Option<f64>| v.map(crate::io::fmt_f64).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                crate::io::fmt_f64(r.hurst),
                r.n.to_string(),
                r.path.to_string(),
                r.seed.to_string(),
                r.status.as_str().to_string(),
                opt(r.r_hat),
                opt(r.r_seq),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(n, Some((r_hat, r_seq)))`, or `None` where the window is degenerate.
pub type LevelEstimate = (u32, Option<(f64, f64)>);

/// Estimates at every requested level from one integrated path. All levels
/// read restrictions of the same `ip.y`.
pub fn estimate_levels(
    ip: &IntegratedPath,
    levels: &[u32],
    estimator: &SeqEstimatorConfig,
) -> Result<Vec<LevelEstimate>> {
    levels
        .iter()
        .map(|&n| match r_seq(&ip.y, n, estimator) {
            Ok(rep) => Ok((n, Some((rep.r_hat, rep.r_seq)))),
            Err(Error::Degenerate { .. }) => Ok((n, None)),
            Err(e) => Err(e),
        })
        .collect()
}

pub fn run_mc(cfg: &McConfig) -> Result<McTable> {
    run_mc_threads(cfg, None)
}

/// Runs the study on a pool of `threads` workers (rayon's default when
/// `None`). Rows are ordered by `(H, path, n)` regardless of scheduling.
pub fn run_mc_threads(cfg: &McConfig, threads: Option<usize>) -> Result<McTable> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &McConfig) -> Result<McTable> {
    let mut rows = Vec::with_capacity(cfg.hurst_list.len() * cfg.paths * cfg.n_levels.len());
    for &hurst in &cfg.hurst_list {
        let spec = cfg.process(hurst);
        let sampler = spec.sampler();
        let per_path: Vec<Result<Vec<McRow>>> = (0..cfg.paths)
            .into_par_iter()
            .map(|p| {
                let seed = cfg.seed0.wrapping_add(p as u64);
                let failed = || {
                    cfg.n_levels
                        .iter()
                        .map(|&n| McRow {
                            hurst,
                            n,
                            path: p,
                            seed,
                            status: RowStatus::SimFailed,
                            r_hat: None,
                            r_seq: None,
                            regularity_ok: false,
                        })
                        .collect()
                };
                let sampler = match &sampler {
                    Ok(s) => s,
                    Err(_) => return Ok(failed()),
                };
                let ip = match spec.simulate_with(sampler, seed) {
                    Ok(ip) => ip,
                    Err(_) => return Ok(failed()),
                };
                let regularity_ok = check_regularity(&ip, cfg.regularity_tol).is_pass();
                Ok(estimate_levels(&ip, &cfg.n_levels, &cfg.estimator)?
                    .into_iter()
                    .map(|(n, est)| McRow {
                        hurst,
                        n,
                        path: p,
                        seed,
                        status: if est.is_some() { RowStatus::Ok } else { RowStatus::Degenerate },
                        r_hat: est.map(|e| e.0),
                        r_seq: est.map(|e| e.1),
                        regularity_ok,
                    })
                    .collect())
            })
            .collect();
        for r in per_path {
            rows.extend(r?);
        }
    }
    let mut tally = McTally::default();
    for r in &rows {
        tally.simulated += 1;
        match r.status {
            RowStatus::Ok => tally.estimated += 1,
            RowStatus::Degenerate => tally.degenerate += 1,
            RowStatus::SimFailed => tally.sim_failed += 1,
        }
        if r.status != RowStatus::SimFailed && !r.regularity_ok {
            tally.regularity_warnings += 1;
        }
    }
    Ok(McTable { rows, tally })
}
