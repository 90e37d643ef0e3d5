//! Continuous-time identification from a dictionary of feature maps:
//! finite-difference derivatives, feature matrices, sparse coefficients and
//! RK4 replay of the identified vector field.
//!
//! A state is a tuple of `m` variables, each in `C^n`, stored stacked as one
//! sample of length `m * n`. Every feature map sends a state to an `n x p`
//! block; stacking blocks over samples gives `N n` regression rows.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, from_pair_rows, to_pair_rows, DenseMatrix};
use crate::ode;
use crate::solver::{self, SolverConfig};
use crate::trajectory::TimeSeries;

/// How the components of a series split into variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableLayout {
    /// Variable count `m`.
    pub count: usize,
    /// Components per variable `n`.
    pub size: usize,
    pub names: Vec<String>,
}

impl VariableLayout {
    /// Every component is its own scalar variable.
    pub fn components(names: &[String]) -> Self {
        Self {
            count: names.len(),
            size: 1,
            names: names.to_vec(),
        }
    }

    /// One vector-valued variable spanning all `size` components.
    pub fn field(name: &str, size: usize) -> Self {
        Self {
            count: 1,
            size,
            names: vec![name.to_owned()],
        }
    }

    pub fn dim(&self) -> usize {
        self.count * self.size
    }

    fn var<'a>(&self, state: &'a [c64], v: usize) -> &'a [c64] {
        &state[v * self.size..(v + 1) * self.size]
    }
}

/// Layout selector in dictionary files.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayoutSpec {
    #[default]
    Components,
    Field {
        #[serde(default = "default_field_name")]
        name: String,
    },
}

fn default_field_name() -> String {
    "u".to_owned()
}

impl LayoutSpec {
    pub fn resolve(&self, series: &TimeSeries) -> VariableLayout {
        match self {
            Self::Components => VariableLayout::components(series.labels()),
            Self::Field { name } => VariableLayout::field(name, series.dim()),
        }
    }
}

/// Built-in feature maps. Positions in the doc comments are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FeatureMap {
    /// Elementwise `u_v^exponent` for each listed variable (all when empty).
    Power {
        #[serde(default)]
        vars: Vec<usize>,
        exponent: u32,
        #[serde(default)]
        mask_ends: bool,
    },
    /// Component `k` is `u_{k+1}`; positions `1`, `n - 1` and `n` are zero.
    ShiftLeft {
        #[serde(default)]
        var: usize,
    },
    /// Component `k` is `u_{k-1}`; positions `1`, `2` and `n` are zero.
    ShiftRight {
        #[serde(default)]
        var: usize,
    },
    /// Elementwise `|u_v|^exponent u_v`.
    ModulusPower {
        #[serde(default)]
        var: usize,
        exponent: u32,
        #[serde(default)]
        mask_ends: bool,
    },
    /// All ones.
    Constant,
}

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

fn mask(col: &mut [c64], enabled: bool) {
    if enabled && !col.is_empty() {
        col[0] = zero();
        let last = col.len() - 1;
        col[last] = zero();
    }
}

impl FeatureMap {
    fn vars(&self, layout: &VariableLayout) -> Vec<usize> {
        match self {
            Self::Power { vars, .. } if vars.is_empty() => (0..layout.count).collect(),
            Self::Power { vars, .. } => vars.clone(),
            Self::ShiftLeft { var } | Self::ShiftRight { var } | Self::ModulusPower { var, .. } => vec![*var],
            Self::Constant => Vec::new(),
        }
    }

    /// Output columns `p`.
    pub fn outputs(&self, layout: &VariableLayout) -> usize {
        match self {
            Self::Power { .. } => self.vars(layout).len(),
            _ => 1,
        }
    }

    pub fn validate(&self, layout: &VariableLayout) -> Result<()> {
        if let Some(&v) = self.vars(layout).iter().find(|&&v| v >= layout.count) {
            return Err(Error::Dictionary(format!(
                "variable index {v} out of range ({} variables)",
                layout.count
            )));
        }
        if matches!(self, Self::ShiftLeft { .. } | Self::ShiftRight { .. }) && layout.size < 3 {
            return Err(Error::Dictionary(format!(
                "shift maps need variables with at least 3 components, got {}",
                layout.size
            )));
        }
        Ok(())
    }

    /// The `n x p` block at one state.
    pub fn eval(&self, state: &[c64], layout: &VariableLayout) -> DenseMatrix {
        let n = layout.size;
        let mut out = DenseMatrix::zeros(n, self.outputs(layout));
        match self {
            Self::Power { exponent, mask_ends, .. } => {
                for (c, v) in self.vars(layout).into_iter().enumerate() {
                    let mut col: Vec<c64> = layout.var(state, v).iter().map(|z| z.powu(*exponent)).collect();
                    mask(&mut col, *mask_ends);
                    out.column_mut(c).copy_from_slice(&col);
                }
            }
            Self::ShiftLeft { var } => {
                let u = layout.var(state, *var);
                for k in 1..n.saturating_sub(2) {
                    out[(k, 0)] = u[k + 1];
                }
            }
            Self::ShiftRight { var } => {
                let u = layout.var(state, *var);
                for k in 2..n.saturating_sub(1) {
                    out[(k, 0)] = u[k - 1];
                }
            }
            Self::ModulusPower { var, exponent, mask_ends } => {
                let mut col: Vec<c64> = layout
                    .var(state, *var)
                    .iter()
                    .map(|z| z * z.norm().powi(*exponent as i32))
                    .collect();
                mask(&mut col, *mask_ends);
                out.column_mut(0).copy_from_slice(&col);
            }
            Self::Constant => out.fill(c64::new(1.0, 0.0)),
        }
        out
    }

    /// Display name of each output column.
    pub fn term_names(&self, layout: &VariableLayout) -> Vec<String> {
        let field = layout.size > 1;
        let base = |v: usize| {
            let name = &layout.names[v];
            if field {
                format!("{name}_k")
            } else {
                name.clone()
            }
        };
        match self {
            Self::Power { exponent, .. } => self
                .vars(layout)
                .into_iter()
                .map(|v| match exponent {
                    0 => "1".to_owned(),
                    1 => base(v),
                    e => format!("{}^{e}", base(v)),
                })
                .collect(),
            Self::ShiftLeft { var } => vec![format!("{}_{{k+1}}", layout.names[*var])],
            Self::ShiftRight { var } => vec![format!("{}_{{k-1}}", layout.names[*var])],
            Self::ModulusPower { var, exponent, .. } => {
                let b = base(*var);
                match exponent {
                    0 => vec![b],
                    1 => vec![format!("|{b}|{b}")],
                    e => vec![format!("|{b}|^{e}{b}")],
                }
            }
            Self::Constant => vec!["1".to_owned()],
        }
    }
}

/// Ordered feature maps plus the variable layout and a fixed complex factor
/// multiplying every feature (the vector field is `factor * features * C`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    #[serde(default)]
    pub layout: LayoutSpec,
    #[serde(default = "unit_factor")]
    pub factor: [f64; 2],
    pub terms: Vec<FeatureMap>,
}

fn unit_factor() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DictionaryFile {
    Full(Dictionary),
    Terms(Vec<FeatureMap>),
}

impl Dictionary {
    pub fn new(layout: LayoutSpec, terms: Vec<FeatureMap>) -> Self {
        Self {
            layout,
            factor: unit_factor(),
            terms,
        }
    }

    pub fn with_factor(mut self, factor: c64) -> Self {
        self.factor = [factor.re, factor.im];
        self
    }

    pub fn factor(&self) -> c64 {
        c64::new(self.factor[0], self.factor[1])
    }

    /// Accepts a bare list of maps or an object with `layout`, `factor`, `terms`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DictionaryFile = serde_json::from_str(text)
            .map_err(|e| Error::Dictionary(format!("unrecognized dictionary entry: {e}")))?;
        let dict = match file {
            DictionaryFile::Full(d) => d,
            DictionaryFile::Terms(terms) => Self::new(LayoutSpec::Components, terms),
        };
        if dict.terms.is_empty() {
            return Err(Error::Dictionary("empty dictionary".into()));
        }
        Ok(dict)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self, layout: &VariableLayout) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.validate(layout))
    }

    pub fn width(&self, layout: &VariableLayout) -> usize {
        self.terms.iter().map(|t| t.outputs(layout)).sum()
    }

    pub fn term_names(&self, layout: &VariableLayout) -> Vec<String> {
        self.terms.iter().flat_map(|t| t.term_names(layout)).collect()
    }

    /// `[f_1(x) | ... | f_M(x)]` at one state, `n x sum p_j`.
    pub fn eval(&self, state: &[c64], layout: &VariableLayout) -> DenseMatrix {
        let blocks: Vec<DenseMatrix> = self.terms.iter().map(|t| t.eval(state, layout)).collect();
        let mut out = DenseMatrix::zeros(layout.size, self.width(layout));
        let mut c = 0;
        for b in blocks {
            out.columns_mut(c, b.ncols()).copy_from(&b);
            c += b.ncols();
        }
        out
    }
}

/// Linear terms in every variable followed by `x_i^k`, `k = 2..=max_power`,
/// for the first three variables.
pub fn duffing_dictionary(max_power: u32) -> Dictionary {
    let mut terms = vec![FeatureMap::Power {
        vars: Vec::new(),
        exponent: 1,
        mask_ends: false,
    }];
    terms.extend((2..=max_power).map(|k| FeatureMap::Power {
        vars: vec![0, 1, 2],
        exponent: k,
        mask_ends: false,
    }));
    Dictionary::new(LayoutSpec::Components, terms)
}

/// Identity, right and left shifts and `|u|^j u` for `j = 1..=max_power`,
/// all zero at the two end nodes, with factor `-i`.
pub fn nlse_dictionary(max_power: u32) -> Dictionary {
    let mut terms = vec![
        FeatureMap::Power {
            vars: vec![0],
            exponent: 1,
            mask_ends: true,
        },
        FeatureMap::ShiftRight { var: 0 },
        FeatureMap::ShiftLeft { var: 0 },
    ];
    terms.extend((1..=max_power).map(|j| FeatureMap::ModulusPower {
        var: 0,
        exponent: j,
        mask_ends: true,
    }));
    Dictionary::new(
        LayoutSpec::Field {
            name: "w".to_owned(),
        },
        terms,
    )
    .with_factor(c64::new(0.0, -1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Samples where the stencil does not fit are left out.
    #[default]
    DropEndpoints,
    /// Every sample is kept; those where the stencil does not fit are zero
    /// and flagged invalid.
    ZeroPadMasked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDiffSpec {
    /// 1 (forward), 2 or 4 (central).
    pub order: usize,
    pub h: f64,
    #[serde(default)]
    pub boundary: BoundaryPolicy,
    /// Components whose derivative is forced to zero.
    #[serde(default)]
    pub pinned: Vec<usize>,
}

impl FiniteDiffSpec {
    pub fn new(order: usize, h: f64) -> Self {
        Self {
            order,
            h,
            boundary: BoundaryPolicy::DropEndpoints,
            pinned: Vec::new(),
        }
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_pinned(mut self, pinned: Vec<usize>) -> Self {
        self.pinned = pinned;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if ![1, 2, 4].contains(&self.order) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference order must be 1, 2 or 4, got {}",
                self.order
            )));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.h)));
        }
        Ok(())
    }

    /// Samples lost at the start and end.
    fn reach(&self) -> (usize, usize) {
        match self.order {
            1 => (0, 1),
            2 => (1, 1),
            _ => (2, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    /// `dim x times.len()`
    pub values: DenseMatrix,
    /// Sample index of each column.
    pub times: Vec<usize>,
    /// Whether the stencil fit at each column.
    pub valid: Vec<bool>,
}

/// Finite-difference time derivative of every component.
pub fn finite_diff(series: &TimeSeries, spec: &FiniteDiffSpec) -> Result<Derivative> {
    spec.validate()?;
    if ((series.dt() - spec.h) / spec.h).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "series step {} differs from stencil step {}",
            series.dt(),
            spec.h
        )));
    }
    let (before, after) = spec.reach();
    let t = series.len();
    if t < before + after + 1 {
        return Err(Error::InsufficientSamples {
            needed: before + after + 1,
            available: t,
        });
    }
    let dim = series.dim();
    if let Some(&p) = spec.pinned.iter().find(|&&p| p >= dim) {
        return Err(Error::InvalidParameter(format!("pinned component {p} out of range")));
    }
    let x = series.data();
    let h = spec.h;
    let stencil = |k: usize| -> Vec<c64> {
        (0..dim)
            .map(|i| match spec.order {
                1 => (x[(i, k + 1)] - x[(i, k)]) / h,
                2 => (x[(i, k + 1)] - x[(i, k - 1)]) / (2.0 * h),
                _ => (-x[(i, k + 2)] + x[(i, k + 1)] * 8.0 - x[(i, k - 1)] * 8.0 + x[(i, k - 2)]) / (12.0 * h),
            })
            .collect()
    };
    let times: Vec<usize> = match spec.boundary {
        BoundaryPolicy::DropEndpoints => (before..t - after).collect(),
        BoundaryPolicy::ZeroPadMasked => (0..t).collect(),
    };
    let valid: Vec<bool> = times.iter().map(|&k| k >= before && k + after < t).collect();
    let mut values = DenseMatrix::zeros(dim, times.len());
    for (c, &k) in times.iter().enumerate() {
        if valid[c] {
            values.column_mut(c).copy_from_slice(&stencil(k));
        }
    }
    for &p in &spec.pinned {
        values.row_mut(p).fill(zero());
    }
    Ok(Derivative { values, times, valid })
}

/// `[V_N(f_1) | ... | V_N(f_M)]` over the given samples, `N n x sum p_j`.
pub fn build_feature_matrix(
    series: &TimeSeries,
    layout: &VariableLayout,
    dictionary: &Dictionary,
    times: &[usize],
) -> Result<DenseMatrix> {
    if layout.dim() != series.dim() {
        return Err(Error::DimensionMismatch(format!(
            "layout covers {} components, series has {}",
            layout.dim(),
            series.dim()
        )));
    }
    dictionary.validate(layout)?;
    if let Some(&t) = times.iter().find(|&&t| t >= series.len()) {
        return Err(Error::InvalidParameter(format!("sample {t} out of range")));
    }
    let n = layout.size;
    let states: Vec<Vec<c64>> = times.iter().map(|&t| series.sample(t)).collect();
    let blocks: Vec<DenseMatrix> = dictionary
        .terms
        .par_iter()
        .map(|f| {
            let p = f.outputs(layout);
            let mut block = DenseMatrix::zeros(times.len() * n, p);
            for (r, s) in states.iter().enumerate() {
                block.view_mut((r * n, 0), (n, p)).copy_from(&f.eval(s, layout));
            }
            block
        })
        .collect();
    let mut out = DenseMatrix::zeros(times.len() * n, dictionary.width(layout));
    let mut c = 0;
    for b in blocks {
        out.columns_mut(c, b.ncols()).copy_from(&b);
        c += b.ncols();
    }
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("feature matrix"));
    }
    Ok(out)
}

/// Assembled regression `lhs ~ factor * features * C`.
#[derive(Debug, Clone)]
pub struct Regression {
    /// `N n x m`: column `v` stacks the derivative of variable `v`.
    pub lhs: DenseMatrix,
    /// Already multiplied by the dictionary factor.
    pub features: DenseMatrix,
    pub times: Vec<usize>,
    pub layout: VariableLayout,
    pub dictionary: Dictionary,
}

pub fn assemble_regression(
    series: &TimeSeries,
    dictionary: &Dictionary,
    fd: &FiniteDiffSpec,
) -> Result<Regression> {
    let layout = dictionary.layout.resolve(series);
    let deriv = finite_diff(series, fd)?;
    let keep: Vec<usize> = (0..deriv.times.len()).filter(|&c| deriv.valid[c]).collect();
    let times: Vec<usize> = keep.iter().map(|&c| deriv.times[c]).collect();
    let n = layout.size;
    let mut lhs = DenseMatrix::zeros(times.len() * n, layout.count);
    for (r, &c) in keep.iter().enumerate() {
        for v in 0..layout.count {
            for i in 0..n {
                lhs[(r * n + i, v)] = deriv.values[(v * n + i, c)];
            }
        }
    }
    let mut features = build_feature_matrix(series, &layout, dictionary, &times)?;
    features *= dictionary.factor();
    Ok(Regression {
        lhs,
        features,
        times,
        layout,
        dictionary: dictionary.clone(),
    })
}

/// Sparse coefficients of an identified vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedDynamics {
    /// `features x targets`
    pub coefficients: DenseMatrix,
    pub dictionary: Dictionary,
    pub layout: VariableLayout,
    /// `||features C - lhs||_F`
    pub residual: f64,
    pub truncation_rank: usize,
}

/// Solve `features C ~ lhs` with the sparse solver.
pub fn identify_dynamics(lhs: &DenseMatrix, features: &DenseMatrix, cfg: &SolverConfig) -> Result<(DenseMatrix, f64, usize)> {
    let sol = solver::slr_solve(features, lhs, cfg)?;
    let residual = (features * &sol.x - lhs).norm();
    Ok((sol.x, residual, sol.truncation_rank))
}

/// As [`identify_dynamics`] after scaling every feature column to unit norm;
/// coefficients are mapped back to the original columns. The support
/// threshold then applies to the scaled coefficients.
pub fn identify_dynamics_scaled(
    lhs: &DenseMatrix,
    features: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<(DenseMatrix, f64, usize)> {
    let norms: Vec<f64> = linalg::column_norms(features)
        .into_iter()
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let mut scaled = features.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col.unscale_mut(norms[j]);
    }
    let sol = solver::slr_solve(&scaled, lhs, cfg)?;
    let mut c = sol.x;
    for (j, mut row) in c.row_iter_mut().enumerate() {
        row.unscale_mut(norms[j]);
    }
    let residual = (features * &c - lhs).norm();
    Ok((c, residual, sol.truncation_rank))
}

impl Regression {
    pub fn identify(&self, cfg: &SolverConfig, scale_columns: bool) -> Result<IdentifiedDynamics> {
        let (coefficients, residual, truncation_rank) = if scale_columns {
            identify_dynamics_scaled(&self.lhs, &self.features, cfg)?
        } else {
            identify_dynamics(&self.lhs, &self.features, cfg)?
        };
        Ok(IdentifiedDynamics {
            coefficients,
            dictionary: self.dictionary.clone(),
            layout: self.layout.clone(),
            residual,
            truncation_rank,
        })
    }
}

/// One nonzero coefficient of a target equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: [f64; 2],
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEquation {
    pub target: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DynamicsDocument {
    layout: VariableLayout,
    dictionary: Dictionary,
    coefficients: Vec<Vec<[f64; 2]>>,
    residual: f64,
    truncation_rank: usize,
    equations: Vec<TargetEquation>,
}

impl IdentifiedDynamics {
    pub fn nonzeros(&self) -> usize {
        self.coefficients.iter().filter(|z| **z != zero()).count()
    }

    /// Coefficient of the named feature in the named target, if both exist.
    pub fn coefficient(&self, target: &str, feature: &str) -> Option<c64> {
        let v = self.layout.names.iter().position(|n| n == target)?;
        let j = self.dictionary.term_names(&self.layout).iter().position(|n| n == feature)?;
        Some(self.coefficients[(j, v)])
    }

    /// Sparse term list per target, `d/dt target = factor * sum coefficient * feature`.
    pub fn equations(&self) -> Vec<TargetEquation> {
        let names = self.dictionary.term_names(&self.layout);
        self.layout
            .names
            .iter()
            .enumerate()
            .map(|(v, target)| TargetEquation {
                target: target.clone(),
                terms: names
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| self.coefficients[(j, v)] != zero())
                    .map(|(j, name)| {
                        let z = self.coefficients[(j, v)];
                        Term {
                            coefficient: [z.re, z.im],
                            feature: name.clone(),
                        }
                    })
                    .collect(),
            })
            .collect()
    }

    /// Vector field at one stacked state.
    pub fn rhs(&self, state: &[c64]) -> Vec<c64> {
        let block = self.dictionary.eval(state, &self.layout) * &self.coefficients;
        let factor = self.dictionary.factor();
        // column v holds variable v
        block.iter().map(|z| z * factor).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DynamicsDocument {
            layout: self.layout.clone(),
            dictionary: self.dictionary.clone(),
            coefficients: to_pair_rows(&self.coefficients),
            residual: self.residual,
            truncation_rank: self.truncation_rank,
            equations: self.equations(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DynamicsDocument = serde_json::from_str(text)?;
        let coefficients = from_pair_rows(&doc.coefficients)?;
        doc.dictionary.validate(&doc.layout)?;
        let width = doc.dictionary.width(&doc.layout);
        if coefficients.shape() != (width, doc.layout.count) {
            return Err(Error::DimensionMismatch(format!(
                "coefficients are {:?}, dictionary needs {width}x{}",
                coefficients.shape(),
                doc.layout.count
            )));
        }
        Ok(Self {
            coefficients,
            dictionary: doc.dictionary,
            layout: doc.layout,
            residual: doc.residual,
            truncation_rank: doc.truncation_rank,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fixed-step RK4 replay of `dynamics` from `x0`; includes `x0`.
pub fn simulate(dynamics: &IdentifiedDynamics, x0: &[c64], dt: f64, steps: usize) -> Result<TimeSeries> {
    if x0.len() != dynamics.layout.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} components, model expects {}",
            x0.len(),
            dynamics.layout.dim()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let traj = ode::integrate(|x| dynamics.rhs(x), x0.to_vec(), dt, steps)?;
    let layout = &dynamics.layout;
    let labels: Vec<String> = if layout.size == 1 {
        layout.names.clone()
    } else {
        layout
            .names
            .iter()
            .flat_map(|name| (1..=layout.size).map(move |i| format!("{name}{i}")))
            .collect()
    };
    TimeSeries::from_samples(&traj, dt)?.with_labels(labels)
}
