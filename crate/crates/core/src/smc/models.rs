//! Feynman-Kac models: the bootstrap and guided formalisms of the linear
//! Gaussian model, and auxiliary functions for the APF.

use std::f64::consts::PI;

use super::lgssm::{mat_vec, LgssmParams};
use crate::error::{Error, Result};
use crate::stream::UniformStream;

/// A Feynman-Kac model: initial law `mu`, kernels `M_t`, potentials `G_t`.
///
/// Potentials are returned on the log scale.
pub trait FeynmanKac: Sync {
    fn dim(&self) -> usize;

    /// Final time `T`.
    fn horizon(&self) -> usize;

    /// Draws `X_0 ~ mu` into `out`.
    fn sample_initial(&self, stream: &mut UniformStream, out: &mut [f64]);

    /// `log G_0(x_0)`. Defaults to `G_0 = 1`.
    fn log_potential_initial(&self, _x: &[f64]) -> f64 {
        0.0
    }

    /// Draws `X_t ~ M_t(prev, .)` into `out`, for `t >= 1`.
    fn sample_transition(&self, t: usize, prev: &[f64], stream: &mut UniformStream, out: &mut [f64]);

    /// `log G_t(x_{t-1}, x_t)` for `t >= 1`.
    fn log_potential(&self, t: usize, prev: &[f64], x: &[f64]) -> f64;
}

/// Positive function `eta_t` twisting the resampling weights of the APF.
pub trait AuxiliaryFunction: Sync {
    /// `log eta_t(x)` for a particle `x` at time `t`.
    fn log_eta(&self, t: usize, x: &[f64]) -> f64;
}

/// `eta = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitAuxiliary;

impl AuxiliaryFunction for UnitAuxiliary {
    fn log_eta(&self, _t: usize, _x: &[f64]) -> f64 {
        0.0
    }
}

impl<F: Fn(usize, &[f64]) -> f64 + Sync> AuxiliaryFunction for F {
    fn log_eta(&self, t: usize, x: &[f64]) -> f64 {
        self(t, x)
    }
}

/// Log density of `N(mean, var I)` at `y`.
#[inline]
fn log_isotropic_normal(y: &[f64], mean: &[f64], var: f64) -> f64 {
    let d = y.len() as f64;
    let sq: f64 = y.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
    -0.5 * (d * (2.0 * PI * var).ln() + sq / var)
}

struct LgssmCore {
    params: LgssmParams,
    f: Vec<f64>,
    observations: Vec<Vec<f64>>,
}

impl LgssmCore {
    fn new(params: &LgssmParams, observations: &[Vec<f64>]) -> Result<Self> {
        params.validate()?;
        if observations.len() != params.horizon {
            return Err(Error::InvalidArgument(format!(
                "expected {} observations, got {}",
                params.horizon,
                observations.len()
            )));
        }
        if let Some(bad) = observations.iter().find(|y| y.len() != params.dim) {
            return Err(Error::DimensionMismatch {
                expected: params.dim,
                got: bad.len(),
            });
        }
        Ok(LgssmCore {
            params: *params,
            f: params.transition(),
            observations: observations.to_vec(),
        })
    }

    fn obs(&self, t: usize) -> &[f64] {
        &self.observations[t - 1]
    }

    fn sample_initial(&self, stream: &mut UniformStream, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = stream.next_normal();
        }
    }

    /// `log N(y_t; F x, 2 I)`, the predictive density of `y_t` given `x_{t-1}`.
    fn log_predictive(&self, t: usize, prev: &[f64]) -> f64 {
        let d = self.params.dim;
        if d <= 16 {
            let mut buf = [0.0f64; 16];
            mat_vec(&self.f, prev, &mut buf[..d]);
            log_isotropic_normal(self.obs(t), &buf[..d], 2.0)
        } else {
            let mut buf = vec![0.0; d];
            mat_vec(&self.f, prev, &mut buf);
            log_isotropic_normal(self.obs(t), &buf, 2.0)
        }
    }
}

/// Bootstrap formalism: `M_t(x, .) = N(F x, I)`, `G_t(x_{t-1}, x_t) = N(y_t; x_t, I)`.
pub struct BootstrapLgssm(LgssmCore);

impl BootstrapLgssm {
    pub fn new(params: &LgssmParams, observations: &[Vec<f64>]) -> Result<Self> {
        LgssmCore::new(params, observations).map(BootstrapLgssm)
    }

    pub fn params(&self) -> &LgssmParams {
        &self.0.params
    }
}

impl FeynmanKac for BootstrapLgssm {
    fn dim(&self) -> usize {
        self.0.params.dim
    }

    fn horizon(&self) -> usize {
        self.0.params.horizon
    }

    fn sample_initial(&self, stream: &mut UniformStream, out: &mut [f64]) {
        self.0.sample_initial(stream, out)
    }

    fn sample_transition(&self, _t: usize, prev: &[f64], stream: &mut UniformStream, out: &mut [f64]) {
        mat_vec(&self.0.f, prev, out);
        for v in out.iter_mut() {
            *v += stream.next_normal();
        }
    }

    fn log_potential(&self, t: usize, _prev: &[f64], x: &[f64]) -> f64 {
        log_isotropic_normal(self.0.obs(t), x, 1.0)
    }
}

/// Guided formalism: `M_t(x, .) = N((y_t + F x) / 2, I / 2)`,
/// `G_t(x_{t-1}, x_t) = N(y_t; F x_{t-1}, 2 I)`.
pub struct GuidedLgssm(LgssmCore);

impl GuidedLgssm {
    pub fn new(params: &LgssmParams, observations: &[Vec<f64>]) -> Result<Self> {
        LgssmCore::new(params, observations).map(GuidedLgssm)
    }

    pub fn params(&self) -> &LgssmParams {
        &self.0.params
    }
}

impl FeynmanKac for GuidedLgssm {
    fn dim(&self) -> usize {
        self.0.params.dim
    }

    fn horizon(&self) -> usize {
        self.0.params.horizon
    }

    fn sample_initial(&self, stream: &mut UniformStream, out: &mut [f64]) {
        self.0.sample_initial(stream, out)
    }

    fn sample_transition(&self, t: usize, prev: &[f64], stream: &mut UniformStream, out: &mut [f64]) {
        mat_vec(&self.0.f, prev, out);
        let y = self.0.obs(t);
        let sd = std::f64::consts::FRAC_1_SQRT_2;
        for (v, yi) in out.iter_mut().zip(y) {
            *v = 0.5 * (*v + yi) + sd * stream.next_normal();
        }
    }

    fn log_potential(&self, t: usize, prev: &[f64], _x: &[f64]) -> f64 {
        self.0.log_predictive(t, prev)
    }
}

/// `eta_t(x) = M_{t+1}(x, G_{t+1}) = N(y_{t+1}; F x, 2 I)` for the linear
/// Gaussian model; this is the same function for both formalisms. Returns
/// `eta = 1` past the last observation.
pub struct PredictiveAuxiliary(LgssmCore);

impl PredictiveAuxiliary {
    pub fn new(params: &LgssmParams, observations: &[Vec<f64>]) -> Result<Self> {
        LgssmCore::new(params, observations).map(PredictiveAuxiliary)
    }
}

impl AuxiliaryFunction for PredictiveAuxiliary {
    fn log_eta(&self, t: usize, x: &[f64]) -> f64 {
        if t < self.0.params.horizon {
            self.0.log_predictive(t + 1, x)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (LgssmParams, Vec<Vec<f64>>) {
        let p = LgssmParams::new(2, 3, 0.4).unwrap();
        let obs = vec![vec![0.1, -0.2], vec![1.0, 0.5], vec![-0.3, 0.0]];
        (p, obs)
    }

    #[test]
    fn bootstrap_potential_depends_on_current_state_only() {
        let (p, obs) = data();
        let m = BootstrapLgssm::new(&p, &obs).unwrap();
        let x = [0.3, 0.3];
        assert_eq!(
            m.log_potential(2, &[5.0, -5.0], &x),
            m.log_potential(2, &[-1.0, 2.0], &x)
        );
        // bounded by (2 pi)^{-d/2}
        let bound = -(p.dim as f64) / 2.0 * (2.0 * PI).ln();
        assert!((m.log_potential(2, &x, &obs[1]) - bound).abs() < 1e-14);
        assert!(m.log_potential(2, &x, &x) < bound);
    }

    #[test]
    fn guided_potential_depends_on_previous_state_only() {
        let (p, obs) = data();
        let m = GuidedLgssm::new(&p, &obs).unwrap();
        let prev = [0.3, -0.1];
        assert_eq!(
            m.log_potential(1, &prev, &[9.0, 9.0]),
            m.log_potential(1, &prev, &[-3.0, 0.0])
        );
    }

    #[test]
    fn observation_count_checked() {
        let (p, obs) = data();
        assert!(BootstrapLgssm::new(&p, &obs[..2]).is_err());
    }
}
