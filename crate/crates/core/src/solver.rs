//! Column-wise sparse least squares on the delta-truncated system.
//!
//! For each right-hand side the solver starts from the truncated
//! pseudo-inverse solution, keeps the coordinates whose moduli exceed the
//! support threshold, refits them against the projected system
//! `U_delta^* A x = U_delta^* y`, and repeats until the iterate stops moving
//! (in the sup norm) by more than `delta` or the sweep budget runs out.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, check_delta, ensure_finite, step_indicator, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Truncation tolerance for the delta-rank and the sweep stopping rule.
    pub delta: f64,
    /// Maximum number of refit sweeps per column.
    pub max_sweeps: usize,
    /// Coefficients with modulus at or below this are dropped from the support.
    pub support_threshold: f64,
}

impl SolverConfig {
    pub fn new(delta: f64, max_sweeps: usize, support_threshold: f64) -> Self {
        Self {
            delta,
            max_sweeps,
            support_threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if !(self.support_threshold.is_finite() && self.support_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "support threshold must be positive, got {}",
                self.support_threshold
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParameter("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub x: DenseMatrix,
    /// Ascending coordinate indices kept in each column.
    pub supports: Vec<Vec<usize>>,
    /// `||A x_j - y_j||` measured against the original (untruncated) `A`.
    pub residual_norms: Vec<f64>,
    pub truncation_rank: usize,
    pub sweeps_used: Vec<usize>,
}

impl SparseSolution {
    pub fn nonzeros(&self) -> usize {
        self.x.iter().filter(|z| **z != c64::new(0.0, 0.0)).count()
    }
}

/// Sort coordinates by decreasing modulus (stable: ties keep index order) and
/// count how many exceed `epsilon`, with a floor of one.
pub fn support_select(x: &[c64], epsilon: f64) -> (Vec<usize>, usize) {
    let moduli: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let mut sigma: Vec<usize> = (0..x.len()).collect();
    sigma.sort_by(|&a, &b| moduli[b].total_cmp(&moduli[a]));
    let count: usize = moduli.iter().map(|&m| step_indicator(m, epsilon)).sum();
    (sigma, count.max(1))
}

/// The delta-truncated system shared by every column.
struct Projected {
    a_hat: DenseMatrix,
    y_hat: DenseMatrix,
    reference: DenseMatrix,
    rank: usize,
}

fn project(a: &DenseMatrix, y: &DenseMatrix, delta: f64) -> Result<Projected> {
    let svd = linalg::economy_svd(a)?;
    let rank = svd.delta_rank(delta);
    if rank == 0 {
        return Err(Error::ZeroDeltaRank { delta });
    }
    let u_delta = svd.u.columns(0, rank);
    let a_hat = u_delta.adjoint() * a;
    let y_hat = u_delta.adjoint() * y;
    // X0 = V_delta^* T_delta Y_hat
    let mut scaled = y_hat.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row.scale_mut(1.0 / svd.singular_values[i]);
    }
    let reference = svd.v.rows(0, rank).adjoint() * scaled;
    Ok(Projected {
        a_hat,
        y_hat,
        reference,
        rank,
    })
}

struct ColumnResult {
    x: Vec<c64>,
    support: Vec<usize>,
    sweeps: usize,
}

fn solve_column(
    a_hat: &DenseMatrix,
    y_hat: &DenseMatrix,
    col: usize,
    start: Vec<c64>,
    rank: usize,
    cfg: &SolverConfig,
) -> Result<ColumnResult> {
    let n = a_hat.ncols();
    let rhs = y_hat.column(col).into_owned();
    let mut x0 = start;
    let (mut sigma, mut n0) = support_select(&x0, cfg.support_threshold);
    // At most rk_delta(A) coordinates survive in each column.
    n0 = n0.min(rank);
    let mut x = x0.clone();
    let mut support: Vec<usize> = Vec::new();
    let mut error = 1.0 + cfg.delta;
    let mut sweeps = 0;

    while sweeps < cfg.max_sweeps && error > cfg.delta {
        let selected = &sigma[..n0];
        let sub = a_hat.select_columns(selected.iter());
        let c = linalg::lstsq(&sub, &DenseMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
        x = vec![c64::new(0.0, 0.0); n];
        for (k, &idx) in selected.iter().enumerate() {
            x[idx] = c[(k, 0)];
        }
        error = x
            .iter()
            .zip(&x0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        support = selected.to_vec();
        x0.clone_from(&x);
        let (s, count) = support_select(&x, cfg.support_threshold);
        sigma = s;
        n0 = count.min(rank);
        sweeps += 1;
    }
    support.sort_unstable();
    Ok(ColumnResult { x, support, sweeps })
}

fn check_shapes(a: &DenseMatrix, y: &DenseMatrix) -> Result<()> {
    if a.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but Y has {}",
            a.nrows(),
            y.nrows()
        )));
    }
    if a.ncols() == 0 || a.nrows() == 0 {
        return Err(Error::DimensionMismatch("A must be nonempty".into()));
    }
    ensure_finite(a, "solver matrix")?;
    ensure_finite(y, "solver right-hand side")
}

/// Sparse solution of `A X ~ Y` at tolerance `cfg.delta`.
pub fn slr_solve(a: &DenseMatrix, y: &DenseMatrix, cfg: &SolverConfig) -> Result<SparseSolution> {
    cfg.validate()?;
    check_shapes(a, y)?;
    let proj = project(a, y, cfg.delta)?;
    let reference = proj.reference.clone();
    finish(a, y, cfg, proj, &reference)
}

/// As [`slr_solve`], but the sweeps start from a caller-supplied reference
/// solution instead of the truncated pseudo-inverse.
pub fn slr_solve_from(
    a: &DenseMatrix,
    y: &DenseMatrix,
    cfg: &SolverConfig,
    reference: &DenseMatrix,
) -> Result<SparseSolution> {
    cfg.validate()?;
    check_shapes(a, y)?;
    if reference.shape() != (a.ncols(), y.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "reference is {:?}, expected {:?}",
            reference.shape(),
            (a.ncols(), y.ncols())
        )));
    }
    let proj = project(a, y, cfg.delta)?;
    finish(a, y, cfg, proj, reference)
}

fn finish(
    a: &DenseMatrix,
    y: &DenseMatrix,
    cfg: &SolverConfig,
    proj: Projected,
    reference: &DenseMatrix,
) -> Result<SparseSolution> {
    let p = y.ncols();
    let columns: Vec<ColumnResult> = (0..p)
        .into_par_iter()
        .map(|j| {
            let start: Vec<c64> = reference.column(j).iter().copied().collect();
            solve_column(&proj.a_hat, &proj.y_hat, j, start, proj.rank, cfg)
        })
        .collect::<Result<_>>()?;

    let n = a.ncols();
    let mut x = DenseMatrix::zeros(n, p);
    let mut supports = Vec::with_capacity(p);
    let mut sweeps_used = Vec::with_capacity(p);
    for (j, col) in columns.into_iter().enumerate() {
        x.column_mut(j).copy_from_slice(&col.x);
        supports.push(col.support);
        sweeps_used.push(col.sweeps);
    }
    let residual = a * &x - y;
    Ok(SparseSolution {
        residual_norms: linalg::column_norms(&residual),
        x,
        supports,
        truncation_rank: proj.rank,
        sweeps_used,
    })
}

/// Per-column check of `||A x_j - y_j|| <= ||x_j|| s(r) delta + ||(I - Q) y_j||`
/// where `Q` projects onto the leading `r = rk_delta(A)` left singular vectors.
///
/// A relative slack of `1e-10 * (||y_j|| + ||A||_F ||x_j||)` absorbs rounding
/// when the bound is attained with equality.
pub fn verify_bound(
    a: &DenseMatrix,
    y: &DenseMatrix,
    sol: &SparseSolution,
    cfg: &SolverConfig,
) -> Result<Vec<bool>> {
    let (u_delta, report) = linalg::truncation_projector(a, cfg.delta)?;
    let a_norm = a.norm();
    let residual = a * &sol.x - y;
    let y_perp = y - &u_delta * (u_delta.adjoint() * y);
    Ok((0..y.ncols())
        .map(|j| {
            let lhs = residual.column(j).norm();
            let x_norm = sol.x.column(j).norm();
            let rhs = x_norm * report.s_constant * cfg.delta + y_perp.column(j).norm();
            let slack = 1e-10 * (y.column(j).norm() + a_norm * x_norm);
            lhs <= rhs + slack
        })
        .collect())
}
