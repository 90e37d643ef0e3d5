//! Dense complex linear algebra: economy SVD, delta-rank, truncation
//! projectors and minimum-norm least squares.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>` (column-major). The SVD
//! itself is delegated to nalgebra's bidiagonalization + implicit-shift QR;
//! strongly rectangular inputs are first reduced to a square triangular
//! factor with a Householder QR.

use nalgebra::{Complex, DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = Complex<f64>;

/// Dense complex matrix used throughout the crate.
pub type DenseMatrix = DMatrix<c64>;

/// `H_a(x)`: 1 when `x > a`, 0 otherwise. The boundary `x == a` maps to 0.
#[inline]
pub fn step_indicator(x: f64, a: f64) -> usize {
    usize::from(x > a)
}

/// Economy-sized singular value decomposition `A = U * diag(s) * V`.
///
/// `u` is `m x k`, `v` is `k x n` (already conjugate-transposed) and the
/// singular values are sorted in descending order, with `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactorization {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.ncols()
    }

    /// Number of singular values strictly greater than `delta`.
    pub fn delta_rank(&self, delta: f64) -> usize {
        self.singular_values
            .iter()
            .map(|&s| step_indicator(s, delta))
            .sum()
    }

    pub fn report(&self, delta: f64) -> DeltaRankReport {
        DeltaRankReport::from_singular_values(&self.singular_values, delta)
    }

    /// `U * diag(s) * V`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * &self.v
    }
}

/// Outcome of a delta-rank computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRankReport {
    /// Number of singular values strictly above `delta`.
    pub r: usize,
    pub delta: f64,
    /// `sqrt(sum_{j > r} s_j^2)`, the Frobenius error of the rank-`r` truncation.
    pub tail_energy: f64,
    /// `sqrt(r * (min(m, n) - r))`.
    pub s_constant: f64,
}

impl DeltaRankReport {
    pub fn from_singular_values(singular_values: &[f64], delta: f64) -> Self {
        let r: usize = singular_values
            .iter()
            .map(|&s| step_indicator(s, delta))
            .sum();
        let tail_energy = singular_values[r..]
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt();
        Self {
            r,
            delta,
            tail_energy,
            s_constant: s_constant(r, singular_values.len()),
        }
    }
}

/// `sqrt(r * (min_dim - r))`.
pub fn s_constant(r: usize, min_dim: usize) -> f64 {
    ((r * min_dim.saturating_sub(r)) as f64).sqrt()
}

pub(crate) fn ensure_finite(a: &DenseMatrix, what: &'static str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn max_iterations(a: &DenseMatrix) -> usize {
    // nalgebra counts QR sweeps over the whole bidiagonal; typical usage is a
    // small multiple of min(m, n).
    200 * a.nrows().min(a.ncols()).max(16)
}

fn nalgebra_svd(a: DenseMatrix, vectors: bool) -> Result<SvdFactorization> {
    let (m, n) = a.shape();
    let niter = max_iterations(&a);
    let svd = SVD::try_new(a, vectors, vectors, f64::EPSILON, niter)
        .ok_or(Error::SvdNonConvergence { rows: m, cols: n })?;
    let singular_values = svd.singular_values.iter().copied().collect();
    let (u, v) = if vectors {
        (svd.u.unwrap(), svd.v_t.unwrap())
    } else {
        (DenseMatrix::zeros(0, 0), DenseMatrix::zeros(0, 0))
    };
    Ok(SvdFactorization {
        u,
        singular_values,
        v,
    })
}

fn svd_impl(a: &DenseMatrix, vectors: bool) -> Result<SvdFactorization> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "cannot factor an empty matrix".into(),
        ));
    }
    ensure_finite(a, "matrix passed to SVD")?;

    if n > m {
        // Factor the adjoint and swap roles.
        let t = svd_impl(&a.adjoint(), vectors)?;
        return Ok(SvdFactorization {
            u: t.v.adjoint(),
            singular_values: t.singular_values,
            v: t.u.adjoint(),
        });
    }

    if m >= 2 * n {
        let qr = a.clone().qr();
        let r = qr.r();
        let inner = nalgebra_svd(r, vectors)?;
        if !vectors {
            return Ok(inner);
        }
        let q = qr.q();
        return Ok(SvdFactorization {
            u: q * inner.u,
            singular_values: inner.singular_values,
            v: inner.v,
        });
    }

    nalgebra_svd(a.clone(), vectors)
}

/// Economy SVD of a nonempty matrix with finite entries.
pub fn economy_svd(a: &DenseMatrix) -> Result<SvdFactorization> {
    svd_impl(a, true)
}

/// Singular values only, sorted descending.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    Ok(svd_impl(a, false)?.singular_values)
}

/// `rk_delta(A)`: the count of singular values strictly greater than `delta`.
pub fn delta_rank(a: &DenseMatrix, delta: f64) -> Result<DeltaRankReport> {
    check_delta(delta)?;
    let s = singular_values(a)?;
    if s.is_empty() {
        return Ok(DeltaRankReport {
            r: 0,
            delta,
            tail_energy: 0.0,
            s_constant: 0.0,
        });
    }
    Ok(DeltaRankReport::from_singular_values(&s, delta))
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must be positive and finite, got {delta}"
        )))
    }
}

/// Leading `r = rk_delta(A)` left singular vectors. `Q = U_delta U_delta^*`
/// is the rank-`r` orthogonal projector with `||A - QA||_F <= sqrt(min(m,n) - r) * delta`.
pub fn truncation_projector(a: &DenseMatrix, delta: f64) -> Result<(DenseMatrix, DeltaRankReport)> {
    check_delta(delta)?;
    let svd = economy_svd(a)?;
    let report = svd.report(delta);
    if report.r == 0 {
        return Err(Error::ZeroDeltaRank { delta });
    }
    Ok((svd.u.columns(0, report.r).into_owned(), report))
}

/// Minimum-norm least-squares solution of `A X = Y`.
///
/// Singular values at or below `max(m, n) * eps * s_max` are treated as zero.
pub fn lstsq(a: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    if a.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "lstsq: A has {} rows, Y has {}",
            a.nrows(),
            y.nrows()
        )));
    }
    ensure_finite(y, "least-squares right-hand side")?;
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(DenseMatrix::zeros(n, y.ncols()));
    }
    let svd = economy_svd(a)?;
    let s_max = svd.singular_values[0];
    let tol = (m.max(n) as f64) * f64::EPSILON * s_max;
    let rank = svd.singular_values.iter().take_while(|&&s| s > tol).count();
    if rank == 0 {
        return Ok(DenseMatrix::zeros(n, y.ncols()));
    }
    let u_r = svd.u.columns(0, rank);
    let mut coeffs = u_r.adjoint() * y;
    for (i, mut row) in coeffs.row_iter_mut().enumerate() {
        row.scale_mut(1.0 / svd.singular_values[i]);
    }
    Ok(svd.v.rows(0, rank).adjoint() * coeffs)
}

/// Column-wise Euclidean norms.
pub fn column_norms(a: &DenseMatrix) -> Vec<f64> {
    a.column_iter().map(|c| c.norm()).collect()
}

/// Promote a real matrix (row-major slice) to a complex one.
pub fn from_real_row_major(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
    DenseMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c64::new(x, 0.0)))
}

/// Row-major `[re, im]` pairs, the JSON layout for matrices.
pub fn to_pair_rows(a: &DenseMatrix) -> Vec<Vec<[f64; 2]>> {
    a.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Inverse of [`to_pair_rows`]; rows must share one length.
pub fn from_pair_rows(rows: &[Vec<[f64; 2]>]) -> Result<DenseMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "row {i} has {} entries, expected {cols}",
            rows[i].len()
        )));
    }
    let m = DenseMatrix::from_fn(rows.len(), cols, |i, j| c64::new(rows[i][j][0], rows[i][j][1]));
    ensure_finite(&m, "matrix")?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
        from_real_row_major(rows, cols, data)
    }

    fn diag(values: &[f64]) -> DenseMatrix {
        let n = values.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c64::new(v, 0.0);
        }
        m
    }

    #[test]
    fn step_indicator_is_strict() {
        assert_eq!(step_indicator(0.5, 0.5), 0);
        assert_eq!(step_indicator(1.0, 0.5), 1);
        assert_eq!(step_indicator(-1.0, 0.0), 0);
    }

    #[test]
    fn svd_of_small_matrices() {
        let s = economy_svd(&DenseMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);

        let s = economy_svd(&diag(&[3.0, 4.0])).unwrap();
        assert!((s.singular_values[0] - 4.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 3.0).abs() < 1e-14);

        let s = economy_svd(&real(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!((s.singular_values[0] - 2.0).abs() < 1e-14);
        assert!(s.singular_values[1].abs() < 1e-14);
    }

    #[test]
    fn svd_factor_invariants_on_rectangular_shapes() {
        for &(m, n) in &[(7, 3), (3, 7), (5, 5), (40, 4), (4, 40)] {
            let a = DenseMatrix::from_fn(m, n, |i, j| {
                c64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 * 0.3)
            });
            let svd = economy_svd(&a).unwrap();
            let k = m.min(n);
            assert_eq!(svd.u.shape(), (m, k));
            assert_eq!(svd.v.shape(), (k, n));
            for w in svd.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let tol = 1e-10 * m.max(n) as f64;
            let eye = DenseMatrix::identity(k, k);
            assert!((svd.u.adjoint() * &svd.u - &eye).norm() < tol);
            assert!((&svd.v * svd.v.adjoint() - &eye).norm() < tol);
            assert!((svd.reconstruct() - &a).norm() <= 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn svd_rejects_empty_and_nan() {
        assert!(economy_svd(&DenseMatrix::zeros(0, 3)).is_err());
        let mut a = DenseMatrix::identity(2, 2);
        a[(0, 1)] = c64::new(f64::NAN, 0.0);
        assert!(matches!(economy_svd(&a), Err(Error::NonFinite(_))));
    }

    #[test]
    fn delta_rank_examples() {
        assert_eq!(delta_rank(&DenseMatrix::identity(3, 3), 0.5).unwrap().r, 3);
        assert_eq!(delta_rank(&DenseMatrix::zeros(2, 3), 0.1).unwrap().r, 0);
        assert_eq!(delta_rank(&diag(&[2.0, 1.0, 0.1]), 0.5).unwrap().r, 2);
        // s == delta is excluded
        assert_eq!(delta_rank(&diag(&[1.0, 0.5]), 0.5).unwrap().r, 1);
        assert!(delta_rank(&diag(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn truncation_projector_examples() {
        let a = DenseMatrix::identity(2, 2);
        let (u, rep) = truncation_projector(&a, 0.5).unwrap();
        assert_eq!(rep.r, 2);
        let q = &u * u.adjoint();
        assert!((&a - &q * &a).norm() < 1e-14);

        let a = diag(&[2.0, 0.01]);
        let (u, rep) = truncation_projector(&a, 0.5).unwrap();
        assert_eq!(rep.r, 1);
        let err = (&a - &u * u.adjoint() * &a).norm();
        assert!((err - 0.01).abs() < 1e-14);
        assert!(err <= 0.5);

        assert!(matches!(
            truncation_projector(&DenseMatrix::zeros(3, 2), 0.1),
            Err(Error::ZeroDeltaRank { .. })
        ));
    }

    #[test]
    fn lstsq_examples() {
        let y = real(3, 1, &[1.0, -2.0, 3.5]);
        assert!((lstsq(&DenseMatrix::identity(3, 3), &y).unwrap() - &y).norm() < 1e-14);

        let a = real(2, 1, &[1.0, 1.0]);
        let x = lstsq(&a, &real(2, 1, &[1.0, 3.0])).unwrap();
        assert!((x[(0, 0)].re - 2.0).abs() < 1e-14);

        assert!(lstsq(&a, &real(3, 1, &[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn lstsq_rank_deficient_is_minimum_norm() {
        // Two identical columns: min-norm solution splits the weight evenly.
        let a = real(3, 2, &[1.0, 1.0, 2.0, 2.0, 0.0, 0.0]);
        let y = real(3, 1, &[2.0, 4.0, 0.0]);
        let x = lstsq(&a, &y).unwrap();
        assert!((x[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)].re - 1.0).abs() < 1e-12);
    }
}
