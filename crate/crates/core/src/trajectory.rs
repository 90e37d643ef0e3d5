//! Time-series containers, Hankel trajectory matrices and finite unitary
//! group representations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ensure_finite, DenseMatrix};

/// Uniformly sampled sequence of state vectors in `C^n`.
///
/// Samples are stored as the columns of an `n x T` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: DenseMatrix,
    dt: f64,
    labels: Vec<String>,
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl TimeSeries {
    /// Build from an `n x T` matrix whose columns are the samples.
    pub fn new(data: DenseMatrix, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        ensure_finite(&data, "time series")?;
        let labels = default_labels(data.nrows());
        Ok(Self { data, dt, labels })
    }

    /// Build from a list of samples, each of length `n`.
    pub fn from_samples(samples: &[Vec<c64>], dt: f64) -> Result<Self> {
        let n = samples.first().map_or(0, Vec::len);
        if let Some((t, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "sample {t} has dimension {}, expected {n}",
                s.len()
            )));
        }
        let data = DenseMatrix::from_fn(n, samples.len(), |i, t| samples[t][i]);
        Self::new(data, dt)
    }

    /// Scalar real series.
    pub fn from_scalar(values: &[f64], dt: f64) -> Result<Self> {
        let data = DenseMatrix::from_fn(1, values.len(), |_, t| c64::new(values[t], 0.0));
        Self::new(data, dt)
    }

    /// Real series from row-per-sample data.
    pub fn from_real_rows(rows: &[Vec<f64>], dt: f64) -> Result<Self> {
        let samples: Vec<Vec<c64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c64::new(x, 0.0)).collect())
            .collect();
        Self::from_samples(&samples, dt)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} components",
                labels.len(),
                self.dim()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of samples `T`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `n x T` sample matrix.
    pub fn data(&self) -> &DenseMatrix {
        &self.data
    }

    /// Sample `t` (0-based).
    pub fn sample(&self, t: usize) -> Vec<c64> {
        self.data.column(t).iter().copied().collect()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Real parts of component `i` over time.
    pub fn component_re(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().map(|z| z.re).collect()
    }

    /// Samples `start..end` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.len() {
            return Err(Error::InvalidParameter(format!(
                "slice {start}..{end} out of range for {} samples",
                self.len()
            )));
        }
        Ok(Self {
            data: self.data.columns(start, end - start).into_owned(),
            dt: self.dt,
            labels: self.labels.clone(),
        })
    }

    /// Apply `g` to every sample.
    pub fn transform(&self, g: &DenseMatrix) -> Result<Self> {
        if g.ncols() != self.dim() || g.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to {}-dimensional states",
                g.nrows(),
                g.ncols(),
                self.dim()
            )));
        }
        Ok(Self {
            data: g * &self.data,
            dt: self.dt,
            labels: self.labels.clone(),
        })
    }
}

/// Hankel trajectory matrix `H_L` of shape `nL x (T - L + 1)`; block `(i, j)` is `x_{i+j}`.
pub fn hankel(series: &TimeSeries, lag: usize) -> Result<DenseMatrix> {
    let (n, t) = (series.dim(), series.len());
    if lag == 0 || lag > t {
        return Err(Error::LagOutOfRange { lag, samples: t });
    }
    let cols = t - lag + 1;
    let data = series.data();
    let mut h = DenseMatrix::zeros(n * lag, cols);
    for j in 0..cols {
        for i in 0..lag {
            h.view_mut((i * n, j), (n, 1)).copy_from(&data.column(i + j));
        }
    }
    Ok(h)
}

/// `I_L (x) g`: block diagonal with `lag` copies of `g`.
pub fn kron_lift(g: &DenseMatrix, lag: usize) -> DenseMatrix {
    let n = g.nrows();
    let mut out = DenseMatrix::zeros(n * lag, g.ncols() * lag);
    for b in 0..lag {
        out.view_mut((b * n, b * g.ncols()), g.shape()).copy_from(g);
    }
    out
}

/// Finite group of `n x n` unitary matrices, in the caller's element order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRep {
    elements: Vec<DenseMatrix>,
    identity_index: Option<usize>,
}

/// Result of checking the group axioms numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupValidation {
    pub order: usize,
    pub dim: usize,
    /// `max_j ||g_j^* g_j - I||_F`
    pub unitarity_deviation: f64,
    pub identity_index: Option<usize>,
    /// `max_{j,k} min_l ||g_j g_k - g_l||_F`
    pub closure_deviation: f64,
    pub unitary: bool,
    pub has_identity: bool,
    pub closed: bool,
}

impl GroupValidation {
    pub fn passes(&self) -> bool {
        self.unitary && self.has_identity && self.closed
    }
}

/// Tolerance (absolute, Frobenius) for the unitarity, identity and closure checks.
pub const GROUP_TOLERANCE: f64 = 1e-10;

impl GroupRep {
    /// Validated construction; fails unless every group axiom holds within
    /// [`GROUP_TOLERANCE`].
    pub fn new(elements: Vec<DenseMatrix>) -> Result<Self> {
        let g = Self::new_unchecked(elements)?;
        let report = g.validate();
        if !report.passes() {
            return Err(Error::InvalidGroup(format!(
                "unitarity deviation {:e}, identity present: {}, closure deviation {:e}",
                report.unitarity_deviation, report.has_identity, report.closure_deviation
            )));
        }
        Ok(g)
    }

    /// Construction that only checks shapes. Use when a measured
    /// representation carries noise and strict validation would reject it.
    pub fn new_unchecked(elements: Vec<DenseMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidGroup("empty element list".into()));
        };
        let n = first.nrows();
        if let Some(bad) = elements.iter().position(|g| g.shape() != (n, n)) {
            return Err(Error::InvalidGroup(format!(
                "element {bad} is not {n}x{n}"
            )));
        }
        for g in &elements {
            ensure_finite(g, "group element")?;
        }
        let eye = DenseMatrix::identity(n, n);
        let identity_index = elements
            .iter()
            .position(|g| (g - &eye).norm() <= GROUP_TOLERANCE);
        Ok(Self {
            elements,
            identity_index,
        })
    }

    /// `{I_n}`.
    pub fn trivial(n: usize) -> Self {
        Self {
            elements: vec![DenseMatrix::identity(n, n)],
            identity_index: Some(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DenseMatrix] {
        &self.elements
    }

    pub fn identity_index(&self) -> Option<usize> {
        self.identity_index
    }

    pub fn validate(&self) -> GroupValidation {
        validate_group(self)
    }
}

/// Report unitarity, identity membership and closure of `group`.
pub fn validate_group(group: &GroupRep) -> GroupValidation {
    let n = group.dim();
    let eye = DenseMatrix::identity(n, n);
    let unitarity_deviation = group
        .elements
        .iter()
        .map(|g| (g.adjoint() * g - &eye).norm())
        .fold(0.0, f64::max);
    let mut closure_deviation: f64 = 0.0;
    for a in &group.elements {
        for b in &group.elements {
            let ab = a * b;
            let best = group
                .elements
                .iter()
                .map(|c| (&ab - c).norm())
                .fold(f64::INFINITY, f64::min);
            closure_deviation = closure_deviation.max(best);
        }
    }
    GroupValidation {
        order: group.order(),
        dim: n,
        unitarity_deviation,
        identity_index: group.identity_index,
        closure_deviation,
        unitary: unitarity_deviation <= GROUP_TOLERANCE,
        has_identity: group.identity_index.is_some(),
        closed: closure_deviation <= GROUP_TOLERANCE,
    }
}

/// `[(I_L (x) g_1) H_L | ... | (I_L (x) g_N) H_L]`, shape `nL x N(T - L + 1)`.
pub fn equivariant_hankel(series: &TimeSeries, group: &GroupRep, lag: usize) -> Result<DenseMatrix> {
    if group.dim() != series.dim() {
        return Err(Error::DimensionMismatch(format!(
            "group acts on C^{} but series lives in C^{}",
            group.dim(),
            series.dim()
        )));
    }
    let base = hankel(series, lag)?;
    let cols = base.ncols();
    let n = series.dim();
    let mut out = DenseMatrix::zeros(base.nrows(), cols * group.order());
    for (k, g) in group.elements.iter().enumerate() {
        // (I_L (x) g) H applies g to every n-row block.
        for i in 0..lag {
            let block = g * base.rows(i * n, n);
            out.view_mut((i * n, k * cols), (n, cols)).copy_from(&block);
        }
    }
    Ok(out)
}
