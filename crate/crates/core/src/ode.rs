//! Classical fixed-step fourth-order Runge-Kutta for autonomous systems.

use crate::error::{Error, Result};
use crate::linalg::c64;

/// States whose Euclidean norm exceeds this are treated as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e100;

fn axpy(x: &[c64], h: f64, k: &[c64]) -> Vec<c64> {
    x.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

pub fn rk4_step<F>(f: &F, x: &[c64], h: f64) -> Vec<c64>
where
    F: Fn(&[c64]) -> Vec<c64>,
{
    let k1 = f(x);
    let k2 = f(&axpy(x, 0.5 * h, &k1));
    let k3 = f(&axpy(x, 0.5 * h, &k2));
    let k4 = f(&axpy(x, h, &k3));
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
        .collect()
}

pub(crate) fn state_norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate `steps` steps from `x0`; the returned trajectory includes `x0`.
pub fn integrate<F>(f: F, x0: Vec<c64>, h: f64, steps: usize) -> Result<Vec<Vec<c64>>>
where
    F: Fn(&[c64]) -> Vec<c64>,
{
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0);
    for step in 1..=steps {
        let next = rk4_step(&f, out.last().unwrap(), h);
        let norm = state_norm(&next);
        if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { step, norm });
        }
        out.push(next);
    }
    Ok(out)
}
