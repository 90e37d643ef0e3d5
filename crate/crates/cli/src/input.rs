use std::path::Path;

use serde::Deserialize;
use sysid::datagen::d3_representation;
use sysid::dictionary::{duffing_dictionary, nlse_dictionary, Dictionary};
use sysid::io::{read_csv, read_csv_resampled_with, SplineBoundary};
use sysid::trajectory::{GroupRep, TimeSeries};
use sysid::{c64, DenseMatrix};

use crate::args::{InputArgs, Spline};
use crate::failure::{CliResult, Failure};

pub fn load_series(args: &InputArgs) -> CliResult<TimeSeries> {
    Ok(match args.resample_dt {
        Some(dt) => {
            let boundary = match args.spline {
                Spline::Natural => SplineBoundary::Natural,
                Spline::NotAKnot => SplineBoundary::NotAKnot,
            };
            read_csv_resampled_with(&args.input, Some(dt), boundary)?
        }
        None => read_csv(&args.input)?,
    })
}

/// A matrix entry in a group file: a real number or `[re, im]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

pub fn parse_group(spec: &str, dim: usize, allow_inexact: bool) -> CliResult<GroupRep> {
    match spec {
        "trivial" => Ok(GroupRep::trivial(dim)),
        "d3" => Ok(d3_representation()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("group {path}: {e} (expected trivial, d3 or a JSON file)")))?;
            let raw: Vec<Vec<Vec<Entry>>> =
                serde_json::from_str(&text).map_err(|e| Failure::Runtime(format!("group {path}: {e}")))?;
            let mut elements = Vec::with_capacity(raw.len());
            for (k, rows) in raw.iter().enumerate() {
                let size = rows.len();
                if rows.iter().any(|r| r.len() != size) {
                    return Err(Failure::Runtime(format!("group {path}: element {k} is not square")));
                }
                elements.push(DenseMatrix::from_fn(size, size, |i, j| match rows[i][j] {
                    Entry::Real(x) => c64::new(x, 0.0),
                    Entry::Complex([re, im]) => c64::new(re, im),
                }));
            }
            if allow_inexact {
                Ok(GroupRep::new_unchecked(elements)?)
            } else {
                Ok(GroupRep::new(elements)?)
            }
        }
    }
}

pub fn parse_dictionary(spec: &str) -> CliResult<Dictionary> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        let mut parts = rest.splitn(2, ':');
        let name = parts.next().unwrap_or_default();
        let power = parts
            .next()
            .map(|p| p.parse::<u32>().map_err(|e| Failure::Usage(format!("dictionary power {p}: {e}"))))
            .transpose()?;
        return match name {
            "duffing" => Ok(duffing_dictionary(power.unwrap_or(9))),
            "nlse" => Ok(nlse_dictionary(power.unwrap_or(200))),
            other => Err(Failure::Usage(format!(
                "unknown built-in dictionary {other} (expected duffing or nlse)"
            ))),
        };
    }
    Ok(Dictionary::load(Path::new(spec))?)
}

pub fn check_positive(name: &str, value: f64) -> CliResult<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {value}")))
    }
}
