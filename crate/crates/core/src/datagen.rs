//! Synthetic data: the period-32 triangle wave, a coupled Duffing network,
//! a semi-discrete nonlinear Schrödinger equation, gaussian noise and the
//! D3 permutation representation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, from_real_row_major, step_indicator, DenseMatrix};
use crate::ode;
use crate::trajectory::{GroupRep, TimeSeries};

/// Samples per period of [`triangle_wave`].
pub const TRIANGLE_PERIOD: usize = 32;

/// Value of the unit triangle wave at sample `k` (1-based), `t_k = (k - 1) / 32`.
///
/// `s_k = sum_j min(t - j, 1 - t + j) * (H_j(t) - H_{j+1}(t))`.
pub fn triangle_value(k: usize) -> f64 {
    let t = (k as f64 - 1.0) / TRIANGLE_PERIOD as f64;
    let last = t.ceil() as usize;
    (0..=last)
        .map(|j| {
            let j = j as f64;
            let window = step_indicator(t, j) as f64 - step_indicator(t, j + 1.0) as f64;
            (t - j).min(1.0 - t + j) * window
        })
        .sum()
}

/// `T` samples of the period-32 triangle wave (scalar, `dt = 1`).
pub fn triangle_wave(samples: usize) -> TimeSeries {
    let values: Vec<f64> = (1..=samples).map(triangle_value).collect();
    TimeSeries::from_scalar(&values, 1.0).expect("triangle wave is finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation.
    pub scale: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(scale: f64, seed: u64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise scale must be positive, got {scale}"
            )));
        }
        Ok(Self { scale, seed })
    }
}

/// Add seeded gaussian noise to every component. Complex series receive
/// independent noise on the real and imaginary parts.
pub fn add_noise(series: &TimeSeries, spec: &NoiseSpec) -> Result<TimeSeries> {
    let normal = Normal::new(0.0, spec.scale)
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let complex = !series.is_real();
    let mut data = series.data().clone();
    // column-major: sample by sample, component by component
    for z in data.iter_mut() {
        z.re += normal.sample(&mut rng);
        if complex {
            z.im += normal.sample(&mut rng);
        }
    }
    TimeSeries::new(data, series.dt())?.with_labels(series.labels().to_vec())
}

/// Parameters of `x_i' = y_i`, `y_i' = sigma y_i - x_i (beta + alpha^2 x_i) + sum_{j != i} eta (x_i - x_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub eta: f64,
}

impl Default for DuffingParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: -36.0,
            sigma: 0.0,
            eta: 0.2,
        }
    }
}

pub const DUFFING_X0: [f64; 3] = [8.0, 7.0, 4.0];
pub const DUFFING_Y0: [f64; 3] = [15.0, 14.0, 9.0];

/// Right-hand side of the three-node Duffing network; state is `(x1, x2, x3, y1, y2, y3)`.
pub fn duffing_rhs(params: &DuffingParams, state: &[f64]) -> [f64; 6] {
    let (x, y) = (&state[..3], &state[3..6]);
    let mut out = [0.0; 6];
    for i in 0..3 {
        out[i] = y[i];
        let coupling: f64 = (0..3).filter(|&j| j != i).map(|j| params.eta * (x[i] - x[j])).sum();
        out[3 + i] =
            params.sigma * y[i] - x[i] * (params.beta + params.alpha * params.alpha * x[i]) + coupling;
    }
    out
}

/// RK4 trajectory of the Duffing network with `samples` points (including the
/// initial state) spaced `dt` apart.
pub fn duffing_network(
    samples: usize,
    dt: f64,
    params: &DuffingParams,
    x0: [f64; 3],
    y0: [f64; 3],
) -> Result<TimeSeries> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let start: Vec<c64> = x0.iter().chain(&y0).map(|&v| c64::new(v, 0.0)).collect();
    let p = *params;
    let traj = ode::integrate(
        move |s| {
            let re: Vec<f64> = s.iter().map(|z| z.re).collect();
            duffing_rhs(&p, &re).iter().map(|&v| c64::new(v, 0.0)).collect()
        },
        start,
        dt,
        samples - 1,
    )?;
    let labels = ["x1", "x2", "x3", "y1", "y2", "y3"].map(String::from).to_vec();
    TimeSeries::from_samples(&traj, dt)?.with_labels(labels)
}

/// Uniform spatial grid `xmin, xmin + h_x, ..., xmax`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub h_x: f64,
}

impl Default for SpatialGrid {
    fn default() -> Self {
        Self {
            xmin: -20.0,
            xmax: 20.0,
            h_x: 0.25,
        }
    }
}

impl SpatialGrid {
    pub fn points(&self) -> usize {
        ((self.xmax - self.xmin) / self.h_x).round() as usize + 1
    }

    pub fn x(&self, k: usize) -> f64 {
        self.xmin + k as f64 * self.h_x
    }
}

/// Bright-soliton profile `sqrt(2) sech(x + 10) exp(i x / 2)` with zeroed endpoints.
pub fn soliton_profile(grid: &SpatialGrid) -> Vec<c64> {
    let n = grid.points();
    (0..n)
        .map(|k| {
            if k == 0 || k + 1 == n {
                return c64::new(0.0, 0.0);
            }
            let x = grid.x(k);
            c64::from_polar(2f64.sqrt() / (x + 10.0).cosh(), x / 2.0)
        })
        .collect()
}

/// Semi-discrete NLSE right-hand side:
/// `i w_k' = -(2/h^2) w_k + (1/h^2)(w_{k+1} + w_{k-1}) + q |w_k|^2 w_k`,
/// with the first and last nodes pinned at zero.
pub fn nlse_rhs(w: &[c64], h_x: f64, q: f64) -> Vec<c64> {
    let n = w.len();
    let inv_h2 = 1.0 / (h_x * h_x);
    let minus_i = c64::new(0.0, -1.0);
    let mut out = vec![c64::new(0.0, 0.0); n];
    for k in 1..n.saturating_sub(1) {
        let rhs = w[k] * (-2.0 * inv_h2) + (w[k + 1] + w[k - 1]) * inv_h2 + w[k] * (q * w[k].norm_sqr());
        out[k] = minus_i * rhs;
    }
    out
}

/// `samples` snapshots (including the initial state) of the semi-discrete NLSE
/// from the soliton initial condition, integrated with RK4 at step `h_t`.
pub fn nlse_grid(samples: usize, h_t: f64, q: f64, grid: &SpatialGrid) -> Result<TimeSeries> {
    nlse_grid_from(samples, h_t, q, grid, soliton_profile(grid))
}

/// As [`nlse_grid`] with an explicit initial state.
pub fn nlse_grid_from(
    samples: usize,
    h_t: f64,
    q: f64,
    grid: &SpatialGrid,
    initial: Vec<c64>,
) -> Result<TimeSeries> {
    let limit = grid.h_x * grid.h_x / 4.0;
    if !(h_t > 0.0 && h_t <= limit) {
        return Err(Error::StabilityGuard { h_t, limit });
    }
    if initial.len() != grid.points() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} nodes, grid has {}",
            initial.len(),
            grid.points()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let h_x = grid.h_x;
    let traj = ode::integrate(move |w| nlse_rhs(w, h_x, q), initial, h_t, samples - 1)?;
    let labels = (1..=grid.points()).map(|k| format!("w{k}")).collect();
    TimeSeries::from_samples(&traj, h_t)?.with_labels(labels)
}

/// Discrete L2 mass `sum |w_k|^2 h_x` of one snapshot.
pub fn nlse_mass(w: &[c64], h_x: f64) -> f64 {
    w.iter().map(|z| z.norm_sqr()).sum::<f64>() * h_x
}

fn cycle3() -> DenseMatrix {
    from_real_row_major(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
}

fn swap23() -> DenseMatrix {
    from_real_row_major(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0])
}

fn lift2(p: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::identity(2, 2).kronecker(p)
}

/// `r_rho = I_2 (x) (3-cycle)`, the rotation generator acting on `(x1,x2,x3,y1,y2,y3)`.
pub fn d3_rotation() -> DenseMatrix {
    lift2(&cycle3())
}

/// `kappa_rho = I_2 (x) (transposition of nodes 2 and 3)`.
pub fn d3_reflection() -> DenseMatrix {
    lift2(&swap23())
}

/// The six elements `{e, r, r^2, k, k r, k r^2}` of D3 acting on the Duffing state.
pub fn d3_representation() -> GroupRep {
    let r = d3_rotation();
    let k = d3_reflection();
    let r2 = &r * &r;
    let elements = vec![
        DenseMatrix::identity(6, 6),
        r.clone(),
        r2.clone(),
        k.clone(),
        &k * &r,
        &k * &r2,
    ];
    GroupRep::new(elements).expect("D3 permutation representation is a group")
}
