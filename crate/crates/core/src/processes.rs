//! Construction of the observed process: `X` (fOU or drifted fBm) from an
//! fBm path, the transform `g`, and `Y_t = ∫_0^t g(X_s) ds` on a dyadic
//! observation grid.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_hurst, Error, Result};
use crate::sim::FbmPath;

/// A function sampled on the dyadic grid `{k 2^{-level}}` of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPath {
    level: u32,
    values: Vec<f64>,
    origin: String,
}

impl DyadicPath {
    pub fn new(level: u32, values: Vec<f64>, origin: impl Into<String>) -> Result<Self> {
        if level > 30 {
            return Err(Error::InvalidArgument(format!("grid level {level} too large")));
        }
        let expected = (1usize << level) + 1;
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "dyadic path at level {level} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(DyadicPath { level, values, origin: origin.into() })
    }

    /// Infers the level from `values.len() == 2^level + 1`.
    pub fn from_values(values: Vec<f64>, origin: impl Into<String>) -> Result<Self> {
        let level = level_for_len(values.len())
            .ok_or_else(|| Error::Format(format!("{} values is not 2^L + 1 for any L", values.len())))?;
        DyadicPath::new(level, values, origin)
    }

    /// Samples `f` at every node of the grid.
    pub fn from_fn(level: u32, f: impl Fn(f64) -> f64) -> Self {
        let n = 1usize << level;
        let h = (n as f64).recip();
        let values = (0..=n).map(|k| f(k as f64 * h)).collect();
        DyadicPath { level, values, origin: "function".into() }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    /// Grid times `k 2^{-level}`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = ((1u64 << self.level) as f64).recip();
        (0..self.values.len()).map(move |k| k as f64 * h)
    }

    /// Value at grid index `k` of the coarser level `level`.
    #[inline]
    pub(crate) fn at(&self, level: u32, k: usize) -> f64 {
        self.values[k << (self.level - level)]
    }

    /// Every `2^{self.level - level}`-th value.
    pub fn restrict(&self, level: u32) -> Result<DyadicPath> {
        if level > self.level {
            return Err(Error::InsufficientResolution { required: level, actual: self.level });
        }
        let stride = 1usize << (self.level - level);
        let values = self.values.iter().step_by(stride).copied().collect();
        Ok(DyadicPath { level, values, origin: self.origin.clone() })
    }

    pub fn scaled(&self, factor: f64) -> DyadicPath {
        DyadicPath {
            level: self.level,
            values: self.values.iter().map(|v| v * factor).collect(),
            origin: self.origin.clone(),
        }
    }
}

pub(crate) fn level_for_len(len: usize) -> Option<u32> {
    let n = len.checked_sub(1)?;
    (n.is_power_of_two()).then(|| n.trailing_zeros())
}

/// Fractional Ornstein-Uhlenbeck parameters:
/// `X_t = x0 + ρ ∫_0^t (μ − X_s) ds + W^H_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FouSpec {
    pub x0: f64,
    pub rho: f64,
    pub mu: f64,
    pub hurst: f64,
}

impl FouSpec {
    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        if !(self.rho >= 0.0) || !self.x0.is_finite() || !self.mu.is_finite() || !self.rho.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid fOU parameters {self:?}")));
        }
        Ok(())
    }
}

pub type DriftFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The drift `ξ` in `X_t = x0 + W^H_t + ∫_0^t ξ_s ds`.
///
/// Callbacks receive `(t, X_t)`. For `H < 1/2` the caller must keep `ξ`
/// bounded along the path; for `H > 1/2` it must be Hölder continuous with
/// exponent above `2H − 1`. Neither can be checked here.
#[derive(Clone, Default)]
pub enum DriftSpec {
    #[default]
    None,
    Constant(f64),
    Callback(DriftFn),
}

impl DriftSpec {
    pub fn callback(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        DriftSpec::Callback(Arc::new(f))
    }
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftSpec::None => f.write_str("None"),
            DriftSpec::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            DriftSpec::Callback(_) => f.write_str("Callback(..)"),
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The transform `g` applied to `X` before integration, with its derivative.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformG {
    Identity,
    /// `e^{2t}`, integrated variance under `σ = e^X`.
    #[serde(alias = "exp2t")]
    ExpTwoT,
    Square,
    /// `(t − 2)² + sin(2πt)`.
    #[serde(alias = "nonmono")]
    PaperNonMonotone,
    /// `c0 + c1 t + c2 t² + …`
    Polynomial(Vec<f64>),
    #[serde(skip)]
    Custom {
        g: ScalarFn,
        g_prime: ScalarFn,
    },
}

impl TransformG {
    pub fn custom(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TransformG::Custom { g: Arc::new(g), g_prime: Arc::new(g_prime) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TransformG::Identity => t,
            TransformG::ExpTwoT => (2.0 * t).exp(),
            TransformG::Square => t * t,
            TransformG::PaperNonMonotone => (t - 2.0).powi(2) + (2.0 * std::f64::consts::PI * t).sin(),
            TransformG::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a),
            TransformG::Custom { g, .. } => g(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            TransformG::Identity => 1.0,
            TransformG::ExpTwoT => 2.0 * (2.0 * t).exp(),
            TransformG::Square => 2.0 * t,
            TransformG::PaperNonMonotone => {
                let two_pi = 2.0 * std::f64::consts::PI;
                2.0 * (t - 2.0) + two_pi * (two_pi * t).cos()
            }
            TransformG::Polynomial(c) => {
                c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &a)| acc * t + i as f64 * a)
            }
            TransformG::Custom { g_prime, .. } => g_prime(t),
        }
    }

    /// Short name used in CLI flags and reports.
    pub fn name(&self) -> &'static str {
        match self {
            TransformG::Identity => "identity",
            TransformG::ExpTwoT => "exp2t",
            TransformG::Square => "square",
            TransformG::PaperNonMonotone => "nonmono",
            TransformG::Polynomial(_) => "polynomial",
            TransformG::Custom { .. } => "custom",
        }
    }
}

impl std::str::FromStr for TransformG {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(TransformG::Identity),
            "exp2t" | "exp_two_t" => Ok(TransformG::ExpTwoT),
            "square" => Ok(TransformG::Square),
            "nonmono" | "paper_non_monotone" => Ok(TransformG::PaperNonMonotone),
            other => Err(Error::InvalidArgument(format!(
                "unknown transform '{other}' (expected identity|exp2t|square|nonmono)"
            ))),
        }
    }
}

impl fmt::Debug for TransformG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformG::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            other => f.write_str(other.name()),
        }
    }
}

/// `Y` on the observation grid together with the fine-grid `X` it came from.
#[derive(Debug, Clone)]
pub struct IntegratedPath {
    pub y: DyadicPath,
    pub x_fine: Arc<DyadicPath>,
    /// Trapezoid approximation of `∫_0^1 g'(X_s)² ds`.
    pub gprime_sq_integral: f64,
}

/// Euler scheme for the fOU equation on the grid of `fbm`, with left-endpoint
/// drift. Shares its recursion with [`build_drifted_fbm`].
pub fn build_fou(spec: &FouSpec, fbm: &FbmPath) -> Result<DyadicPath> {
    spec.validate()?;
    if (fbm.hurst() - spec.hurst).abs() > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "fbm hurst {} does not match fOU hurst {}",
            fbm.hurst(),
            spec.hurst
        )));
    }
    let (rho, mu) = (spec.rho, spec.mu);
    let mut path = integrate_drift(spec.x0, fbm, |_, x| rho * (mu - x))?;
    path.origin = format!("fou(H={}, x0={}, rho={}, mu={})", spec.hurst, spec.x0, spec.rho, spec.mu);
    Ok(path)
}

/// `X_k = x0 + W_k + Σ_{j<k} ξ(t_j, X_j) Δ`.
pub fn build_drifted_fbm(x0: f64, drift: &DriftSpec, fbm: &FbmPath) -> Result<DyadicPath> {
    let mut path = match drift {
        DriftSpec::None => {
            let values = fbm.values().iter().map(|w| x0 + w).collect();
            DyadicPath::new(fbm.level(), values, String::new())?
        }
        DriftSpec::Constant(c) => {
            let c = *c;
            integrate_drift(x0, fbm, move |_, _| c)?
        }
        DriftSpec::Callback(f) => integrate_drift(x0, fbm, |t, x| f(t, x))?,
    };
    path.origin = format!("drifted_fbm(H={}, x0={x0}, drift={drift:?})", fbm.hurst());
    Ok(path)
}

fn integrate_drift(x0: f64, fbm: &FbmPath, drift: impl Fn(f64, f64) -> f64) -> Result<DyadicPath> {
    let w = fbm.values();
    let dt = ((1u64 << fbm.level()) as f64).recip();
    let mut values = Vec::with_capacity(w.len());
    let mut drift_sum = 0.0;
    let mut x = x0 + w[0];
    values.push(x);
    for k in 0..w.len() - 1 {
        let xi = drift(k as f64 * dt, x);
        if !xi.is_finite() {
            return Err(Error::DriftEvaluation { index: k, value: xi });
        }
        drift_sum += xi * dt;
        x = x0 + w[k + 1] + drift_sum;
        values.push(x);
    }
    DyadicPath::new(fbm.level(), values, String::new())
}

/// Composite trapezoid integration of `g(X)` over the fine grid of `x`,
/// reported on the grid of `target_level = x.level − oversample_q`.
pub fn integrate_transform(
    x: impl Into<Arc<DyadicPath>>,
    g: &TransformG,
    target_level: u32,
    oversample_q: u32,
) -> Result<IntegratedPath> {
    let x = x.into();
    if x.level() != target_level + oversample_q {
        return Err(Error::LevelMismatch(format!(
            "x has level {}, expected target_level {target_level} + oversample_q {oversample_q}",
            x.level()
        )));
    }
    let h = ((1u64 << x.level()) as f64).recip();
    let stride = 1usize << oversample_q;
    let xs = x.values();

    let mut y = Vec::with_capacity((1usize << target_level) + 1);
    y.push(0.0);
    let mut acc = 0.0;
    let mut g_prev = g.eval(xs[0]);
    let mut dsq_prev = g.derivative(xs[0]).powi(2);
    let mut dsq_sum = 0.0;
    for (i, &xv) in xs.iter().enumerate().skip(1) {
        let g_cur = g.eval(xv);
        let dsq_cur = g.derivative(xv).powi(2);
        acc += 0.5 * (g_prev + g_cur) * h;
        dsq_sum += 0.5 * (dsq_prev + dsq_cur) * h;
        if i % stride == 0 {
            y.push(acc);
        }
        g_prev = g_cur;
        dsq_prev = dsq_cur;
    }
    let origin = format!("integral of {}({})", g.name(), x.origin());
    Ok(IntegratedPath { y: DyadicPath::new(target_level, y, origin)?, x_fine: x, gprime_sq_integral: dsq_sum })
}

/// Outcome of the `∫ g'(X)² ds > 0` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Regularity {
    Pass { value: f64 },
    Warning { value: f64, tolerance: f64 },
    NotChecked,
}

impl Regularity {
    pub fn is_pass(&self) -> bool {
        matches!(self, Regularity::Pass { .. })
    }
}

pub fn check_regularity(ip: &IntegratedPath, tol: f64) -> Regularity {
    let value = ip.gprime_sq_integral;
    if value > tol {
        Regularity::Pass { value }
    } else {
        Regularity::Warning { value, tolerance: tol }
    }
}
