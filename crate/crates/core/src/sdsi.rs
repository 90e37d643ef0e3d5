//! Sparse, group-symmetrized linear models on the lag-embedded state, and
//! forecasting with them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, check_delta, from_pair_rows, s_constant, to_pair_rows, DenseMatrix};
use crate::obstruction;
use crate::ode::DIVERGENCE_LIMIT;
use crate::solver::{self, SolverConfig};
use crate::trajectory::{equivariant_hankel, hankel, kron_lift, GroupRep, TimeSeries};

/// Identified lag-`L` model `z_{t+1} = A z_t` on `z_t = (x_t, ..., x_{t+L-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdsiModel {
    pub lag: usize,
    pub dim: usize,
    /// Sparse operator from the solver.
    pub a_hat: DenseMatrix,
    /// Group average of `a_hat`.
    pub a_sym: DenseMatrix,
    /// Stacked `x_1, ..., x_L`.
    pub x1: Vec<c64>,
    pub group: GroupRep,
    pub delta: f64,
    pub epsilon: f64,
    pub dt: f64,
}

/// Constants of the one-step and `T`-step error bounds for an identified model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lag: usize,
    pub truncation_rank: usize,
    /// `s(r)` for the transposed lag-0 trajectory matrix.
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub nu: f64,
    pub eps_bound: f64,
    /// `||H_{L,1} - A_hat H_{L,0}||_F`
    pub residual: f64,
    /// `||H_{L,1} (I - Q)||_F`
    pub tail: f64,
    pub a_hat_norm: f64,
    pub a_sym_norm: f64,
    /// Set when `||A_hat||_F > 1`, where the geometric sums explode.
    pub vacuous: bool,
    /// Whether `residual <= nu` held numerically.
    pub one_step_bound_holds: bool,
    /// `||(I_L (x) g) A_sym - A_sym (I_L (x) g)||_F` per group element.
    pub commutator_norms: Vec<f64>,
    pub nonzeros: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentifyConfig {
    pub delta: f64,
    pub support_threshold: f64,
    /// Defaults to `nL` when unset.
    pub max_sweeps: Option<usize>,
    pub lag_min: usize,
    /// Upper limit for the degree search.
    pub max_lag: Option<usize>,
}

impl IdentifyConfig {
    pub fn new(delta: f64, support_threshold: f64) -> Self {
        Self {
            delta,
            support_threshold,
            max_sweeps: None,
            lag_min: 1,
            max_lag: None,
        }
    }

    pub fn with_lag_min(mut self, lag_min: usize) -> Self {
        self.lag_min = lag_min;
        self
    }

    pub fn with_max_lag(mut self, max_lag: usize) -> Self {
        self.max_lag = Some(max_lag);
        self
    }

    pub fn with_max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = Some(max_sweeps);
        self
    }
}

/// Choose `L = max(degree, lag_min)` and identify at that lag.
pub fn identify(series: &TimeSeries, group: &GroupRep, cfg: &IdentifyConfig) -> Result<(SdsiModel, BoundReport)> {
    check_delta(cfg.delta)?;
    if cfg.lag_min == 0 {
        return Err(Error::InvalidParameter("lag_min must be at least 1".into()));
    }
    let needed = 2 * cfg.lag_min + 1;
    if series.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            available: series.len(),
        });
    }
    let report = obstruction::degree_bounded(series, group, cfg.delta, cfg.max_lag)?;
    let lag = report.degree.max(cfg.lag_min);
    identify_at_lag(series, group, lag, cfg)
}

/// Identify with a fixed lag, skipping the degree search.
pub fn identify_at_lag(
    series: &TimeSeries,
    group: &GroupRep,
    lag: usize,
    cfg: &IdentifyConfig,
) -> Result<(SdsiModel, BoundReport)> {
    check_delta(cfg.delta)?;
    let t = series.len();
    if lag == 0 || t < lag + 2 {
        return Err(Error::InsufficientSamples {
            needed: lag.max(1) + 2,
            available: t,
        });
    }
    let n = series.dim();
    let nl = n * lag;
    let head = series.slice(0, t - 1)?;
    let tail_series = series.slice(1, t)?;
    let h0 = equivariant_hankel(&head, group, lag)?;
    let h1 = equivariant_hankel(&tail_series, group, lag)?;

    let solver_cfg = SolverConfig::new(cfg.delta, cfg.max_sweeps.unwrap_or(nl), cfg.support_threshold);
    let h0t = h0.transpose();
    let h1t = h1.transpose();
    let sol = solver::slr_solve(&h0t, &h1t, &solver_cfg)?;
    let a_hat = sol.x.transpose();
    let a_sym = symmetrize(&a_hat, group, lag)?;

    let x1: Vec<c64> = (0..lag).flat_map(|i| series.sample(i)).collect();

    let (u_delta, rank_report) = linalg::truncation_projector(&h0t, cfg.delta)?;
    let tail = (&h1t - &u_delta * (u_delta.adjoint() * &h1t)).norm();
    let residual = (&h1 - &a_hat * &h0).norm();
    let a_hat_norm = a_hat.norm();
    let c = s_constant(rank_report.r, nl.min(h0.ncols()));
    let root = (nl as f64).sqrt();
    let d = root * a_hat_norm * c;
    let geometric: f64 = (0..t).map(|k| a_hat_norm.powi(k as i32)).sum();
    let e = d * geometric;
    let f = root * geometric;
    let nu = d * cfg.delta + root * tail;
    let eps_bound = e * cfg.delta + f * tail;
    let commutator_norms = commutator_norms(&a_sym, group, lag);

    let model = SdsiModel {
        lag,
        dim: n,
        a_sym: a_sym.clone(),
        a_hat,
        x1,
        group: group.clone(),
        delta: cfg.delta,
        epsilon: cfg.support_threshold,
        dt: series.dt(),
    };
    let bound = BoundReport {
        lag,
        truncation_rank: rank_report.r,
        c,
        d,
        e,
        f,
        nu,
        eps_bound,
        residual,
        tail,
        a_hat_norm,
        a_sym_norm: a_sym.norm(),
        vacuous: a_hat_norm > 1.0,
        one_step_bound_holds: residual <= nu * (1.0 + 1e-10) + 1e-12,
        commutator_norms,
        nonzeros: sol.nonzeros(),
    };
    Ok((model, bound))
}

/// `(1/N) sum_j (I_L (x) g_j^*) A (I_L (x) g_j)`.
pub fn symmetrize(a_hat: &DenseMatrix, group: &GroupRep, lag: usize) -> Result<DenseMatrix> {
    let side = group.dim() * lag;
    if a_hat.shape() != (side, side) {
        return Err(Error::DimensionMismatch(format!(
            "operator is {:?}, expected {side}x{side}",
            a_hat.shape()
        )));
    }
    let mut acc = DenseMatrix::zeros(side, side);
    for g in group.elements() {
        let lift = kron_lift(g, lag);
        acc += lift.adjoint() * a_hat * &lift;
    }
    Ok(acc.unscale(group.order() as f64))
}

/// `||(I_L (x) g) A - A (I_L (x) g)||_F` for every element.
pub fn commutator_norms(a: &DenseMatrix, group: &GroupRep, lag: usize) -> Vec<f64> {
    group
        .elements()
        .iter()
        .map(|g| {
            let lift = kron_lift(g, lag);
            (&lift * a - a * &lift).norm()
        })
        .collect()
}

fn iterate(a: &DenseMatrix, start: Vec<c64>, n: usize, steps: usize, dt: f64) -> Result<TimeSeries> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let side = a.nrows();
    let mut z = DenseMatrix::from_vec(side, 1, start);
    let mut out = DenseMatrix::zeros(n, steps);
    for step in 1..=steps {
        z = a * &z;
        let norm = z.norm();
        if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { step, norm });
        }
        out.column_mut(step - 1).copy_from(&z.rows(0, n));
    }
    TimeSeries::new(out, dt)
}

impl SdsiModel {
    pub fn operator(&self, symmetrized: bool) -> &DenseMatrix {
        if symmetrized {
            &self.a_sym
        } else {
            &self.a_hat
        }
    }

    /// First block of `A^t X_1` for `t = 1..=steps`, i.e. estimates of
    /// `x_2, ..., x_{steps+1}`.
    pub fn predict(&self, steps: usize, symmetrized: bool) -> Result<TimeSeries> {
        iterate(self.operator(symmetrized), self.x1.clone(), self.dim, steps, self.dt)
    }

    /// As [`predict`](Self::predict) from `(I_L (x) g_j) X_1`.
    pub fn predict_orbit(&self, g_index: usize, steps: usize, symmetrized: bool) -> Result<TimeSeries> {
        let g = self.group.elements().get(g_index).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "group element {g_index} out of range (order {})",
                self.group.order()
            ))
        })?;
        let lift = kron_lift(g, self.lag);
        let start = lift * DenseMatrix::from_column_slice(self.x1.len(), 1, &self.x1);
        iterate(self.operator(symmetrized), start.iter().copied().collect(), self.dim, steps, self.dt)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelDocument>(text)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    n: usize,
    #[serde(rename = "L")]
    lag: usize,
    delta: f64,
    epsilon: f64,
    #[serde(default = "unit_dt")]
    dt: f64,
    a_hat: Vec<Vec<[f64; 2]>>,
    a_sym: Vec<Vec<[f64; 2]>>,
    x1: Vec<[f64; 2]>,
    group: Vec<Vec<Vec<[f64; 2]>>>,
}

fn unit_dt() -> f64 {
    1.0
}

impl From<&SdsiModel> for ModelDocument {
    fn from(m: &SdsiModel) -> Self {
        Self {
            n: m.dim,
            lag: m.lag,
            delta: m.delta,
            epsilon: m.epsilon,
            dt: m.dt,
            a_hat: to_pair_rows(&m.a_hat),
            a_sym: to_pair_rows(&m.a_sym),
            x1: m.x1.iter().map(|z| [z.re, z.im]).collect(),
            group: m.group.elements().iter().map(to_pair_rows).collect(),
        }
    }
}

impl TryFrom<ModelDocument> for SdsiModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let side = doc.n * doc.lag;
        let a_hat = from_pair_rows(&doc.a_hat)?;
        let a_sym = from_pair_rows(&doc.a_sym)?;
        if a_hat.shape() != (side, side) || a_sym.shape() != (side, side) || doc.x1.len() != side {
            return Err(Error::DimensionMismatch(format!(
                "model with n = {} and L = {} needs {side}x{side} operators and a length-{side} X1",
                doc.n, doc.lag
            )));
        }
        let elements = doc
            .group
            .iter()
            .map(|g| from_pair_rows(g))
            .collect::<Result<Vec<_>>>()?;
        let group = GroupRep::new_unchecked(elements)?;
        if group.dim() != doc.n {
            return Err(Error::DimensionMismatch(format!(
                "group acts on C^{}, model state is C^{}",
                group.dim(),
                doc.n
            )));
        }
        Ok(Self {
            lag: doc.lag,
            dim: doc.n,
            a_hat,
            a_sym,
            x1: doc.x1.iter().map(|p| c64::new(p[0], p[1])).collect(),
            group,
            delta: doc.delta,
            epsilon: doc.epsilon,
            dt: doc.dt,
        })
    }
}

/// Solve `H_1(x_1..x_{T-1}) A ~ H_1(x_2..x_T)` for the reduced-form operator.
pub fn identify_reduced(series: &TimeSeries, cfg: &SolverConfig) -> Result<DenseMatrix> {
    let t = series.len();
    if t < 3 {
        return Err(Error::InsufficientSamples { needed: 3, available: t });
    }
    let x = hankel(&series.slice(0, t - 1)?, 1)?;
    let y = hankel(&series.slice(1, t)?, 1)?;
    Ok(solver::slr_solve(&x, &y, cfg)?.x)
}

/// `u_{k+1} = H_1(series) A^k e_1` for `k = 0..steps`, iterated on the
/// coefficient vector.
pub fn reduced_predict(series: &TimeSeries, a: &DenseMatrix, steps: usize) -> Result<TimeSeries> {
    let h = hankel(series, 1)?;
    let side = h.ncols();
    if a.shape() != (side, side) {
        return Err(Error::DimensionMismatch(format!(
            "reduced operator is {:?}, expected {side}x{side}",
            a.shape()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let mut c = DenseMatrix::zeros(side, 1);
    c[(0, 0)] = c64::new(1.0, 0.0);
    let mut out = DenseMatrix::zeros(h.nrows(), steps);
    for k in 0..steps {
        if k > 0 {
            c = a * &c;
            let norm = c.norm();
            if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
                return Err(Error::Divergence { step: k, norm });
            }
        }
        out.column_mut(k).copy_from(&(&h * &c));
    }
    TimeSeries::new(out, series.dt())
}

/// Root-mean-square error over all components and samples.
pub fn rmse(prediction: &TimeSeries, truth: &TimeSeries) -> Result<f64> {
    if prediction.data().shape() != truth.data().shape() {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {:?}, truth is {:?}",
            prediction.data().shape(),
            truth.data().shape()
        )));
    }
    let count = prediction.data().len();
    if count == 0 {
        return Ok(0.0);
    }
    Ok((prediction.data() - truth.data()).norm() / (count as f64).sqrt())
}
