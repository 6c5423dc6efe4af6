//! Exact filtering and log-likelihood for the linear Gaussian model, with
//! identity state noise, identity observation operator and identity
//! observation noise.

use nalgebra::{DMatrix, DVector};

use super::lgssm::LgssmParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanOutput {
    /// `log p(y_{1:T})`.
    pub log_likelihood: f64,
    /// `log p(y_t | y_{1:t-1})` for `t = 1..=T`.
    pub log_increments: Vec<f64>,
    /// Filtering means `E[X_t | y_{1:t}]` for `t = 0..=T`.
    pub means: Vec<Vec<f64>>,
    /// Filtering covariances (row-major) for `t = 0..=T`.
    pub covariances: Vec<Vec<f64>>,
}

impl KalmanOutput {
    /// `log p(y_{1:t})` for `t = 0..=T`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(self.log_increments.iter().map(|v| {
                acc += v;
                acc
            }))
            .collect()
    }
}

/// Runs the Kalman filter over `observations` (`y_1, ..., y_T`).
pub fn kalman_loglik(params: &LgssmParams, observations: &[Vec<f64>]) -> Result<KalmanOutput> {
    params.validate()?;
    let d = params.dim;
    let f = params.transition_matrix();
    let eye = DMatrix::<f64>::identity(d, d);
    let mut mean = DVector::<f64>::zeros(d);
    let mut cov = eye.clone();
    let log_2pi = (2.0 * std::f64::consts::PI).ln();

    let mut out = KalmanOutput {
        log_likelihood: 0.0,
        log_increments: Vec::with_capacity(observations.len()),
        means: vec![mean.iter().copied().collect()],
        covariances: vec![cov.iter().copied().collect()],
    };
    for (idx, y) in observations.iter().enumerate() {
        let step = idx + 1;
        if y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        let y = DVector::from_column_slice(y);
        let pred_mean = &f * &mean;
        let pred_cov = &f * &cov * f.transpose() + &eye;
        let s = &pred_cov + &eye;
        let chol = s
            .clone()
            .cholesky()
            .ok_or(Error::NonPosDefCovariance { step })?;
        let innov = &y - &pred_mean;
        let solved = chol.solve(&innov);
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let inc = -0.5 * (d as f64 * log_2pi + log_det + innov.dot(&solved));
        out.log_increments.push(inc);
        out.log_likelihood += inc;

        // gain K = P S^{-1}; S and P symmetric
        let gain = chol.solve(&pred_cov).transpose();
        mean = &pred_mean + &gain * &innov;
        cov = &pred_cov - &gain * &pred_cov;
        cov = (&cov + cov.transpose()) * 0.5;
        out.means.push(mean.iter().copied().collect());
        // nalgebra stores column-major; the matrix is symmetric so the order agrees
        out.covariances.push(cov.iter().copied().collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_normal(y: f64, var: f64) -> f64 {
        -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + y * y / var)
    }

    #[test]
    fn empty_data() {
        let p = LgssmParams::new(3, 0, 0.4).unwrap();
        assert_eq!(kalman_loglik(&p, &[]).unwrap().log_likelihood, 0.0);
    }

    #[test]
    fn single_step_scalar() {
        let a = 0.6;
        let p = LgssmParams::new(1, 1, a).unwrap();
        let y = 1.3;
        let ll = kalman_loglik(&p, &[vec![y]]).unwrap().log_likelihood;
        assert!((ll - log_normal(y, a * a + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn zero_dynamics_scalar() {
        let p = LgssmParams::new(1, 4, 0.0).unwrap();
        let ys = [0.3, -1.2, 2.0, 0.05];
        let obs: Vec<Vec<f64>> = ys.iter().map(|&y| vec![y]).collect();
        let ll = kalman_loglik(&p, &obs).unwrap().log_likelihood;
        let expected: f64 = ys.iter().map(|&y| log_normal(y, 2.0)).sum();
        assert!((ll - expected).abs() < 1e-12);
    }

    #[test]
    fn two_step_scalar_by_hand() {
        // x0 ~ N(0,1); x1 = a x0 + v; y1 = x1 + w; x2 = a x1 + v; y2 = x2 + w
        let a: f64 = 0.5;
        let p = LgssmParams::new(1, 2, a).unwrap();
        let (y1, y2) = (0.7, -0.4);
        let out = kalman_loglik(&p, &[vec![y1], vec![y2]]).unwrap();
        // joint of (y1, y2) is Gaussian with
        // var(x1) = a^2 + 1, var(x2) = a^2 var(x1) + 1, cov(x1, x2) = a var(x1)
        let v1 = a * a + 1.0;
        let v2 = a * a * v1 + 1.0;
        let c = a * v1;
        let (s11, s22, s12) = (v1 + 1.0, v2 + 1.0, c);
        let det = s11 * s22 - s12 * s12;
        let quad = (s22 * y1 * y1 - 2.0 * s12 * y1 * y2 + s11 * y2 * y2) / det;
        let expected = -0.5 * (2.0 * (2.0 * std::f64::consts::PI).ln() + det.ln() + quad);
        assert!((out.log_likelihood - expected).abs() < 1e-12);
    }
}
