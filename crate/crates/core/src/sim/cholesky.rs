use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{autocov_unchecked, SimRng};
use crate::error::{Error, Result};

/// Largest fGn length accepted by the Cholesky backend (grid level 14).
pub const MAX_CHOLESKY_STEPS: usize = 1 << 14;

pub(super) struct CholeskySampler {
    lower: DMatrix<f64>,
}

impl CholeskySampler {
    pub(super) fn new(n_steps: usize, hurst: f64) -> Result<Self> {
        if n_steps > MAX_CHOLESKY_STEPS {
            return Err(Error::CholeskyTooLarge { requested: n_steps, max: MAX_CHOLESKY_STEPS });
        }
        let gamma: Vec<f64> = (0..n_steps).map(|k| autocov_unchecked(k as f64, hurst)).collect();
        let cov = DMatrix::from_fn(n_steps, n_steps, |i, j| gamma[i.abs_diff(j)]);
        let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite { n: n_steps })?;
        Ok(CholeskySampler { lower: chol.unpack() })
    }

    pub(super) fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        let n = self.lower.nrows();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.lower * z).data.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_covariance() {
        let s = CholeskySampler::new(16, 0.3).unwrap();
        let prod = &s.lower * s.lower.transpose();
        for i in 0..16usize {
            for j in 0..16 {
                let want = autocov_unchecked(i.abs_diff(j) as f64, 0.3);
                assert!((prod[(i, j)] - want).abs() < 1e-12);
            }
        }
    }
}
