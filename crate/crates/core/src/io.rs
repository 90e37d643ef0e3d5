//! CSV time series, JSON reports and uniform resampling.
//!
//! CSV layout: header row, one sample per row, optional leading `t` column.
//! A complex component `w` occupies two adjacent columns `w_re`, `w_im`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, DenseMatrix};
use crate::trajectory::TimeSeries;

/// Write `bytes` to a temporary file next to `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Shortest decimal text that parses back to the same double.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Contents of a CSV file before a time step is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub timestamps: Option<Vec<f64>>,
    pub labels: Vec<String>,
    /// One entry per row.
    pub samples: Vec<Vec<c64>>,
}

enum Column {
    Real(usize),
    Complex(usize, usize),
}

fn csv_error(path: &Path, row: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row,
        col,
        msg: msg.into(),
    }
}

/// Parse a CSV file without interpreting the timestamps.
pub fn read_csv_raw(path: &Path) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, 0, e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, 1, 0, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(csv_error(path, 1, 0, "missing header row"));
    }

    let has_time = headers[0] == "t";
    let first = usize::from(has_time);
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    let mut c = first;
    while c < headers.len() {
        let h = &headers[c];
        if let Some(stem) = h.strip_suffix("_re") {
            let partner = format!("{stem}_im");
            if headers.get(c + 1) != Some(&partner) {
                return Err(csv_error(path, 1, c + 2, format!("expected column {partner} after {h}")));
            }
            columns.push(Column::Complex(c, c + 1));
            labels.push(stem.to_owned());
            c += 2;
        } else if h.ends_with("_im") {
            return Err(csv_error(path, 1, c + 1, format!("{h} has no preceding _re column")));
        } else {
            columns.push(Column::Real(c));
            labels.push(h.clone());
            c += 1;
        }
    }

    let width = headers.len();
    let mut timestamps = has_time.then(Vec::new);
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // 1-based file line, the header being line 1
        let row = i + 2;
        let record = record.map_err(|e| csv_error(path, row, 0, e.to_string()))?;
        if record.len() != width {
            return Err(csv_error(
                path,
                row,
                record.len().min(width) + 1,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let cell = |col: usize| -> Result<f64> {
            let text = &record[col];
            let v: f64 = text
                .parse()
                .map_err(|_| csv_error(path, row, col + 1, format!("not a number: {text:?}")))?;
            if !v.is_finite() {
                return Err(csv_error(path, row, col + 1, format!("non-finite value {text:?}")));
            }
            Ok(v)
        };
        if let Some(ts) = timestamps.as_mut() {
            ts.push(cell(0)?);
        }
        let sample = columns
            .iter()
            .map(|col| match *col {
                Column::Real(k) => Ok(c64::new(cell(k)?, 0.0)),
                Column::Complex(re, im) => Ok(c64::new(cell(re)?, cell(im)?)),
            })
            .collect::<Result<Vec<_>>>()?;
        samples.push(sample);
    }
    Ok(CsvData {
        timestamps,
        labels,
        samples,
    })
}

/// Relative tolerance on the spacing of a `t` column treated as uniform.
pub const UNIFORM_TOLERANCE: f64 = 1e-9;

/// Read a uniformly sampled series. The step comes from the `t` column when
/// present and defaults to 1 otherwise; irregular timestamps are rejected
/// (see [`resample_uniform`]).
pub fn read_csv(path: &Path) -> Result<TimeSeries> {
    let data = read_csv_raw(path)?;
    let dt = match &data.timestamps {
        Some(ts) if ts.len() >= 2 => uniform_step(ts)?,
        _ => 1.0,
    };
    to_series(&data, dt)
}

fn to_series(data: &CsvData, dt: f64) -> Result<TimeSeries> {
    let n = data.labels.len();
    let m = DenseMatrix::from_fn(n, data.samples.len(), |i, t| data.samples[t][i]);
    TimeSeries::new(m, dt)?.with_labels(data.labels.clone())
}

fn uniform_step(ts: &[f64]) -> Result<f64> {
    check_monotone(ts)?;
    let dt = ts[1] - ts[0];
    let span = ts[ts.len() - 1] - ts[0];
    for (k, &t) in ts.iter().enumerate() {
        let expected = ts[0] + k as f64 * dt;
        if (t - expected).abs() > UNIFORM_TOLERANCE * span.max(dt) {
            return Err(Error::InvalidParameter(format!(
                "timestamps are not uniform at row {}: {t} vs {expected}; resample first",
                k + 2
            )));
        }
    }
    Ok(dt)
}

fn check_monotone(ts: &[f64]) -> Result<()> {
    match ts.windows(2).position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        Some(k) => Err(Error::NonMonotone(k + 1)),
        None => Ok(()),
    }
}

fn header(series: &TimeSeries) -> Vec<String> {
    let mut h = vec!["t".to_owned()];
    for label in series.labels() {
        if series.is_real() {
            h.push(label.clone());
        } else {
            h.push(format!("{label}_re"));
            h.push(format!("{label}_im"));
        }
    }
    h
}

/// CSV text for `series` with a leading `t = k * dt` column. Real series get
/// one column per component, complex ones a `_re`/`_im` pair.
pub fn csv_string(series: &TimeSeries) -> Result<String> {
    csv_string_from(series, 0.0)
}

/// As [`csv_string`] with the time column starting at `t0`.
pub fn csv_string_from(series: &TimeSeries, t0: f64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(series)).map_err(std::io::Error::from)?;
    let real = series.is_real();
    for t in 0..series.len() {
        let mut record = vec![format_float(t0 + t as f64 * series.dt())];
        for z in series.sample(t) {
            record.push(format_float(z.re));
            if !real {
                record.push(format_float(z.im));
            }
        }
        w.write_record(&record).map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    write_atomic(path, csv_string(series)?.as_bytes())
}

pub fn write_csv_from(path: &Path, series: &TimeSeries, t0: f64) -> Result<()> {
    write_atomic(path, csv_string_from(series, t0)?.as_bytes())
}

/// Pretty-printed JSON, written atomically.
pub fn write_report<T: Serialize + ?Sized>(path: &Path, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// One row of a lag-versus-error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseEntry {
    pub lag: usize,
    pub rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplineBoundary {
    /// Zero second derivative at both ends.
    #[default]
    Natural,
    /// Continuous third derivative at the second and penultimate knots.
    NotAKnot,
}

/// Cubic spline through `(x_k, y_k)`, stored as knot second derivatives.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

/// Solve a tridiagonal system in place (Thomas algorithm).
fn solve_tridiagonal(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = sub[i - 1] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64], boundary: SplineBoundary) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} knots but {} values",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 4 {
            return Err(Error::InsufficientSamples {
                needed: 4,
                available: x.len(),
            });
        }
        check_monotone(x)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        // unknowns m_1 .. m_{n-2}
        let k = n - 2;
        let mut diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * (h[i - 1] + h[i])).collect();
        let mut sub: Vec<f64> = (2..n - 1).map(|i| h[i - 1]).collect();
        let mut sup: Vec<f64> = (1..n - 2).map(|i| h[i]).collect();
        let mut rhs: Vec<f64> = (1..n - 1).map(|i| 6.0 * (slope[i] - slope[i - 1])).collect();
        if boundary == SplineBoundary::NotAKnot {
            // m_0 = ((h0 + h1) m_1 - h0 m_2) / h1, and symmetrically at the end
            let (h0, h1) = (h[0], h[1]);
            diag[0] += h0 * (h0 + h1) / h1;
            sup[0] -= h0 * h0 / h1;
            let (a, b) = (h[n - 2], h[n - 3]);
            diag[k - 1] += a * (a + b) / b;
            sub[k - 2] -= a * a / b;
        }
        solve_tridiagonal(&sub, &mut diag, &sup, &mut rhs);
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&rhs);
        if boundary == SplineBoundary::NotAKnot {
            m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
            let (a, b) = (h[n - 2], h[n - 3]);
            m[n - 1] = ((a + b) * m[n - 2] - a * m[n - 3]) / b;
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Resample irregular data onto `t_first, t_first + dt_out, ...` up to
/// `t_last`, with one spline per real and imaginary component.
pub fn resample_uniform(timestamps: &[f64], samples: &TimeSeries, dt_out: f64) -> Result<TimeSeries> {
    resample_uniform_with(timestamps, samples, dt_out, SplineBoundary::Natural)
}

pub fn resample_uniform_with(
    timestamps: &[f64],
    samples: &TimeSeries,
    dt_out: f64,
    boundary: SplineBoundary,
) -> Result<TimeSeries> {
    if !(dt_out.is_finite() && dt_out > 0.0) {
        return Err(Error::InvalidParameter(format!("dt_out must be positive, got {dt_out}")));
    }
    if timestamps.len() != samples.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} timestamps for {} samples",
            timestamps.len(),
            samples.len()
        )));
    }
    if timestamps.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            available: timestamps.len(),
        });
    }
    check_monotone(timestamps)?;
    let t0 = timestamps[0];
    let span = timestamps[timestamps.len() - 1] - t0;
    let count = (span / dt_out * (1.0 + 1e-12)).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|k| t0 + k as f64 * dt_out).collect();
    let real = samples.is_real();
    let n = samples.dim();
    let mut out = DenseMatrix::zeros(n, count);
    for i in 0..n {
        let row = samples.data().row(i);
        let re: Vec<f64> = row.iter().map(|z| z.re).collect();
        let spline_re = CubicSpline::new(timestamps, &re, boundary)?;
        let spline_im = if real {
            None
        } else {
            let im: Vec<f64> = row.iter().map(|z| z.im).collect();
            Some(CubicSpline::new(timestamps, &im, boundary)?)
        };
        for (k, &t) in grid.iter().enumerate() {
            let im = spline_im.as_ref().map_or(0.0, |s| s.eval(t));
            out[(i, k)] = c64::new(spline_re.eval(t), im);
        }
    }
    TimeSeries::new(out, dt_out)?.with_labels(samples.labels().to_vec())
}

/// Read a CSV and, when its `t` column is irregular, resample it at `dt_out`
/// (or at the mean spacing when `dt_out` is `None`).
pub fn read_csv_resampled(path: &Path, dt_out: Option<f64>) -> Result<TimeSeries> {
    read_csv_resampled_with(path, dt_out, SplineBoundary::Natural)
}

pub fn read_csv_resampled_with(path: &Path, dt_out: Option<f64>, boundary: SplineBoundary) -> Result<TimeSeries> {
    let data = read_csv_raw(path)?;
    let Some(ts) = data.timestamps.as_ref().filter(|ts| ts.len() >= 2) else {
        return to_series(&data, dt_out.unwrap_or(1.0));
    };
    if dt_out.is_none() {
        if let Ok(dt) = uniform_step(ts) {
            return to_series(&data, dt);
        }
    }
    let mean = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    let raw = to_series(&data, 1.0)?;
    resample_uniform_with(ts, &raw, dt_out.unwrap_or(mean), boundary)
}
