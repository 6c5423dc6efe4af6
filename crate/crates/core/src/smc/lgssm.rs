//! The linear Gaussian state-space model
//! `X_t = F X_{t-1} + V_t`, `Y_t = X_t + W_t`, with `X_0 ~ N(0, I)`,
//! `V_t, W_t ~ N(0, I)` and `F_ij = alpha^(|i-j|+1)`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::UniformStream;

const SIMULATE_TAG: u64 = 0x73_696d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LgssmParams {
    pub dim: usize,
    pub horizon: usize,
    pub alpha: f64,
}

impl LgssmParams {
    pub fn new(dim: usize, horizon: usize, alpha: f64) -> Result<Self> {
        let p = LgssmParams {
            dim,
            horizon,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("state dimension must be >= 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (-1, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `F` in row-major order.
    pub fn transition(&self) -> Vec<f64> {
        let d = self.dim;
        let mut f = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                f[i * d + j] = self.alpha.powi((i.abs_diff(j) + 1) as i32);
            }
        }
        f
    }

    pub fn transition_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.transition())
    }

    /// Largest absolute eigenvalue of the (symmetric) transition matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.transition_matrix()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `out = F x` for row-major `F`.
#[inline]
pub(crate) fn mat_vec(f: &[f64], x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &f[i * d..(i + 1) * d];
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// A simulated path: `states[t]` for `t = 0..=T`, `observations[t - 1]` for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub observations: Vec<Vec<f64>>,
}

/// Forward simulation from substream `(seed, [sim])`.
pub fn simulate_lgssm(params: &LgssmParams, seed: u64) -> Result<Trajectory> {
    params.validate()?;
    let d = params.dim;
    let f = params.transition();
    let mut stream = UniformStream::derive(seed, &[SIMULATE_TAG]);
    let mut x: Vec<f64> = (0..d).map(|_| stream.next_normal()).collect();
    let mut states = vec![x.clone()];
    let mut observations = Vec::with_capacity(params.horizon);
    let mut next = vec![0.0; d];
    for _ in 0..params.horizon {
        mat_vec(&f, &x, &mut next);
        for v in next.iter_mut() {
            *v += stream.next_normal();
        }
        std::mem::swap(&mut x, &mut next);
        observations.push(x.iter().map(|v| v + stream.next_normal()).collect());
        states.push(x.clone());
    }
    Ok(Trajectory {
        states,
        observations,
    })
}

/// Reads observations from CSV: one row per time step, `d` numeric columns, no header.
pub fn load_observations_csv(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        if rec.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rec.len(),
            });
        }
        let row = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("row {}: cannot parse {s:?}", line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_entries() {
        let p = LgssmParams::new(3, 1, 0.4).unwrap();
        let f = p.transition();
        assert!((f[0] - 0.4).abs() < 1e-15);
        assert!((f[1] - 0.16).abs() < 1e-15);
        assert!((f[2] - 0.064).abs() < 1e-15);
        assert_eq!(f[1], f[3]);
        let zero = LgssmParams::new(4, 1, 0.0).unwrap();
        assert!(zero.transition().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stable_at_tested_sizes() {
        for d in 1..=10 {
            for &a in &[0.1, 0.2, 0.3, 0.4] {
                let r = LgssmParams::new(d, 1, a).unwrap().spectral_radius();
                assert!(r < 1.0, "d={d} alpha={a} radius={r}");
            }
        }
        // not every alpha in (0, 1) is stable once d >= 2
        assert!(LgssmParams::new(2, 1, 0.7).unwrap().spectral_radius() > 1.0);
    }

    #[test]
    fn ar1_stationary_variance() {
        // d = 1: var(x_t) = a^2 var(x_{t-1}) + 1 -> 1 / (1 - a^2)
        let a: f64 = 0.6;
        let mut v = 1.0;
        for _ in 0..200 {
            v = a * a * v + 1.0;
        }
        assert!((v - 1.0 / (1.0 - a * a)).abs() < 1e-12);
        let p = LgssmParams::new(1, 20_000, a).unwrap();
        let tr = simulate_lgssm(&p, 4).unwrap();
        let xs: Vec<f64> = tr.states[100..].iter().map(|x| x[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((var - 1.0 / (1.0 - a * a)).abs() < 0.1, "var = {var}");
    }

    #[test]
    fn simulation_is_reproducible() {
        let p = LgssmParams::new(2, 15, 0.4).unwrap();
        assert_eq!(simulate_lgssm(&p, 11).unwrap(), simulate_lgssm(&p, 11).unwrap());
        assert_ne!(simulate_lgssm(&p, 11).unwrap(), simulate_lgssm(&p, 12).unwrap());
        let tr = simulate_lgssm(&p, 11).unwrap();
        assert_eq!(tr.states.len(), 16);
        assert_eq!(tr.observations.len(), 15);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LgssmParams::new(0, 5, 0.4).is_err());
        assert!(LgssmParams::new(2, 5, 1.0).is_err());
    }
}
