//! Roughness (Hurst parameter) estimation from discrete observations of an
//! antiderivative such as the integrated variance of a rough volatility
//! model.
//!
//! * [`sim`]: exact fGn / fBm sampling (circulant embedding and Cholesky).
//! * [`processes`]: fractional OU and drifted fBm paths, the transform `g`,
//!   and trapezoid integration onto a dyadic observation grid.
//! * [`estimator`]: the coefficient estimator `R̂_n` and the scale-invariant
//!   sequential scale estimator `R^s_n`.
//! * [`experiments`]: Monte Carlo studies, box statistics, rate fits, SVG.
//! * [`cli`]: the `roughness` command line tool.
//!
//! ```
//! use roughness::estimator::{r_seq, SeqEstimatorConfig};
//! use roughness::processes::{build_drifted_fbm, integrate_transform, DriftSpec, TransformG};
//! use roughness::sim::{simulate_fbm, SimBackend};
//!
//! let fbm = simulate_fbm(14, 0.3, 7, SimBackend::default()).unwrap();
//! let x = build_drifted_fbm(0.0, &DriftSpec::None, &fbm).unwrap();
//! let y = integrate_transform(x, &TransformG::ExpTwoT, 12, 2).unwrap();
//! let report = r_seq(&y.y, 10, &SeqEstimatorConfig::default()).unwrap();
//! assert!((report.r_seq - 0.3).abs() < 0.15);
//! ```

// `!(x > tol)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod io;
pub mod processes;
pub mod sim;

pub use error::{Error, Result};
pub use estimator::{
    beta_coeffs, eta_seq, faber_schauder_coeffs, r_hat, r_seq, vartheta_coeffs, BetaWeights, EstimateReport,
    SeqEstimatorConfig, VarthetaVector,
};
pub use experiments::{box_stats, rate_fit, run_mc, BoxStats, McConfig, ModelSpec, RateFit};
pub use processes::{
    build_drifted_fbm, build_fou, check_regularity, integrate_transform, DriftSpec, DyadicPath, FouSpec,
    IntegratedPath, Regularity, TransformG,
};
pub use sim::{fgn_autocov, simulate_fbm, simulate_fgn, BackendKind, FbmPath, SimBackend};
