use std::path::{Path, PathBuf};

use serde::Serialize;
use sysid::datagen::{
    add_noise, duffing_network, nlse_grid, triangle_wave, DuffingParams, NoiseSpec, SpatialGrid, DUFFING_X0,
    DUFFING_Y0,
};
use sysid::dictionary::{assemble_regression, simulate as integrate, BoundaryPolicy, FiniteDiffSpec, IdentifiedDynamics};
use sysid::io::{read_csv, write_csv, write_csv_from, write_report, RmseEntry};
use sysid::obstruction::{degree_bounded, max_search_lag};
use sysid::sdsi::{identify as identify_model, identify_at_lag, rmse, BoundReport, IdentifyConfig, SdsiModel};
use sysid::solver::SolverConfig;
use sysid::trajectory::TimeSeries;
use sysid::c64;

use crate::args::{Boundary, DegreeArgs, GenArgs, GenKind, IdentifyArgs, IdentifyOdeArgs, PredictArgs, SimulateArgs};
use crate::failure::{CliResult, Failure};
use crate::input::{check_positive, load_series, parse_dictionary, parse_group};

fn emit<T: Serialize>(json: bool, value: &T, table: impl FnOnce() -> String) -> CliResult<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", table());
    }
    Ok(())
}

#[derive(Serialize)]
struct GenSummary {
    kind: &'static str,
    n: usize,
    #[serde(rename = "T")]
    samples: usize,
    dt: f64,
    out: PathBuf,
}

pub fn gen(a: GenArgs, json: bool) -> CliResult<()> {
    if let Some(dt) = a.dt {
        check_positive("dt", dt)?;
    }
    let (kind, series) = match a.kind {
        GenKind::Triangle => {
            let s = triangle_wave(a.samples.unwrap_or(257));
            let s = match a.dt {
                Some(dt) => TimeSeries::new(s.data().clone(), dt)?.with_labels(s.labels().to_vec())?,
                None => s,
            };
            ("triangle", s)
        }
        GenKind::Duffing => (
            "duffing",
            duffing_network(
                a.samples.unwrap_or(5001),
                a.dt.unwrap_or(1e-3),
                &DuffingParams::default(),
                DUFFING_X0,
                DUFFING_Y0,
            )?,
        ),
        GenKind::Nlse => (
            "nlse",
            nlse_grid(a.samples.unwrap_or(40), a.dt.unwrap_or(1e-2), a.q, &SpatialGrid::default())?,
        ),
    };
    let series = match a.noise_scale {
        Some(scale) => {
            let spec = NoiseSpec::new(scale, a.seed).map_err(|e| Failure::Usage(e.to_string()))?;
            add_noise(&series, &spec)?
        }
        None => series,
    };
    write_csv(&a.out, &series)?;
    let summary = GenSummary {
        kind,
        n: series.dim(),
        samples: series.len(),
        dt: series.dt(),
        out: a.out,
    };
    emit(json, &summary, || {
        format!(
            "{}: n = {}, T = {}, dt = {} -> {}\n",
            summary.kind,
            summary.n,
            summary.samples,
            summary.dt,
            summary.out.display()
        )
    })
}

pub fn degree(a: DegreeArgs, json: bool) -> CliResult<()> {
    check_positive("delta", a.delta)?;
    let series = load_series(&a.input)?;
    let group = parse_group(&a.group, series.dim(), a.allow_inexact_group)?;
    let report = degree_bounded(&series, &group, a.delta, a.max_lag)?;
    emit(json, &report, || {
        let mut s = format!("degree {} (delta {})\n", report.degree, report.delta);
        s.push_str("    L  rank(L+1)  rank(L)  drk\n");
        for p in &report.rank_trace {
            s.push_str(&format!(
                "{:>5}  {:>9}  {:>7}  {:>3}\n",
                p.lag,
                p.rank_extended,
                p.rank_base,
                p.drk()
            ));
        }
        s
    })
}

#[derive(Serialize)]
struct Escalation {
    target: f64,
    target_met: bool,
    trace: Vec<RmseEntry>,
    failed_lags: Vec<(usize, String)>,
}

#[derive(Serialize)]
struct IdentifySummary {
    model: PathBuf,
    report_path: PathBuf,
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    escalation: Option<Escalation>,
}

fn report_path_for(model: &Path) -> PathBuf {
    model.with_extension("report.json")
}

/// Forecast RMSE of `model` against the held-out samples, or against the
/// training samples after the first when there are none.
fn score(model: &SdsiModel, train: &TimeSeries, holdout: Option<&TimeSeries>) -> sysid::Result<f64> {
    match holdout {
        Some(h) => {
            let steps = train.len() - 1 + h.len();
            let pred = model.predict(steps, false)?;
            rmse(&pred.slice(steps - h.len(), steps)?, h)
        }
        None => {
            let steps = train.len() - 1;
            rmse(&model.predict(steps, false)?, &train.slice(1, train.len())?)
        }
    }
}

fn escalate(
    a: &IdentifyArgs,
    series: &TimeSeries,
    group: &sysid::trajectory::GroupRep,
    cfg: &IdentifyConfig,
) -> CliResult<(SdsiModel, BoundReport, Escalation)> {
    let target = a.rmse_target.expect("clap requires --rmse-target");
    if a.holdout + 3 > series.len() {
        return Err(Failure::Usage(format!(
            "--holdout {} leaves too few of the {} samples for training",
            a.holdout,
            series.len()
        )));
    }
    let split = series.len() - a.holdout;
    let train = series.slice(0, split)?;
    let holdout = if a.holdout > 0 { Some(series.slice(split, series.len())?) } else { None };
    let start = degree_bounded(&train, group, cfg.delta, cfg.max_lag)?.degree.max(cfg.lag_min);
    let cap = a.lag_cap.unwrap_or_else(|| max_search_lag(train.len())).max(start);
    let mut trace = Vec::new();
    let mut failed_lags = Vec::new();
    let mut best: Option<(f64, SdsiModel, BoundReport)> = None;
    for lag in start..=cap {
        let attempt = identify_at_lag(&train, group, lag, cfg)
            .and_then(|(m, r)| score(&m, &train, holdout.as_ref()).map(|e| (e, m, r)));
        match attempt {
            Ok((err, model, report)) => {
                trace.push(RmseEntry { lag, rmse: err });
                let met = err <= target;
                if best.as_ref().is_none_or(|(b, _, _)| err < *b) {
                    best = Some((err, model, report));
                }
                if met {
                    break;
                }
            }
            Err(e) => failed_lags.push((lag, e.to_string())),
        }
    }
    let (err, model, report) = best.ok_or_else(|| {
        Failure::Runtime(format!("no lag in {start}..={cap} could be identified: {failed_lags:?}"))
    })?;
    Ok((
        model,
        report,
        Escalation {
            target,
            target_met: err <= target,
            trace,
            failed_lags,
        },
    ))
}

pub fn identify(a: IdentifyArgs, json: bool) -> CliResult<()> {
    check_positive("delta", a.delta)?;
    check_positive("epsilon", a.epsilon)?;
    if a.lag_min == 0 {
        return Err(Failure::Usage("--lag-min must be at least 1".into()));
    }
    let series = load_series(&a.input)?;
    let group = parse_group(&a.group, series.dim(), a.allow_inexact_group)?;
    let mut cfg = IdentifyConfig::new(a.delta, a.epsilon).with_lag_min(a.lag_min);
    if let Some(l) = a.max_lag {
        cfg = cfg.with_max_lag(l);
    }
    if let Some(s) = a.max_sweeps {
        cfg = cfg.with_max_sweeps(s);
    }
    let (model, report, escalation) = if a.auto_escalate {
        let (m, r, e) = escalate(&a, &series, &group, &cfg)?;
        (m, r, Some(e))
    } else {
        let (m, r) = identify_model(&series, &group, &cfg)?;
        (m, r, None)
    };
    model.save(&a.model_out)?;
    let report_path = a.report_out.clone().unwrap_or_else(|| report_path_for(&a.model_out));
    write_report(&report_path, &report)?;
    let summary = IdentifySummary {
        model: a.model_out,
        report_path,
        report,
        escalation,
    };
    emit(json, &summary, || {
        let r = &summary.report;
        let worst = r.commutator_norms.iter().copied().fold(0.0, f64::max);
        let mut s = format!(
            "L = {}, delta-rank {}, {} nonzeros\nresidual {:.6e}, nu {:.6e}, eps_bound {:.6e}{}\n\
             max commutator norm {:.3e}\n",
            r.lag,
            r.truncation_rank,
            r.nonzeros,
            r.residual,
            r.nu,
            r.eps_bound,
            if r.vacuous { " (vacuous: ||A_hat|| > 1)" } else { "" },
            worst
        );
        if let Some(e) = &summary.escalation {
            s.push_str(&format!(
                "escalation to rmse {}: {}\n",
                e.target,
                if e.target_met { "met" } else { "not met, kept the best lag" }
            ));
            for entry in &e.trace {
                s.push_str(&format!("  L = {:>3}  rmse {:.6e}\n", entry.lag, entry.rmse));
            }
            for (lag, msg) in &e.failed_lags {
                s.push_str(&format!("  L = {lag:>3}  failed: {msg}\n"));
            }
        }
        s.push_str(&format!(
            "model -> {}\nreport -> {}\n",
            summary.model.display(),
            summary.report_path.display()
        ));
        s
    })
}

#[derive(Serialize)]
struct RmseReport {
    lag: usize,
    steps: usize,
    symmetrized: bool,
    score_from: usize,
    scored_samples: usize,
    rmse: f64,
}

pub fn predict(a: PredictArgs, json: bool) -> CliResult<()> {
    if a.steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let model = SdsiModel::load(&a.model)?;
    let forecast = match a.orbit {
        Some(g) => model.predict_orbit(g, a.steps, a.symmetrized)?,
        None => model.predict(a.steps, a.symmetrized)?,
    };
    // forecast sample k is x_{k+2}
    write_csv_from(&a.out, &forecast, forecast.dt())?;
    let Some(truth_path) = &a.truth else {
        #[derive(Serialize)]
        struct Written<'a> {
            steps: usize,
            out: &'a Path,
        }
        return emit(json, &Written { steps: a.steps, out: &a.out }, || {
            format!("{} forecast samples -> {}\n", a.steps, a.out.display())
        });
    };
    let truth = read_csv(truth_path)?;
    if truth.dim() != forecast.dim() {
        return Err(Failure::Runtime(format!(
            "truth has {} components, model has {}",
            truth.dim(),
            forecast.dim()
        )));
    }
    let from = a.score_from.max(1);
    let end = truth.len().min(a.steps + 1);
    if from >= end {
        return Err(Failure::Runtime(format!(
            "no truth samples to score: --score-from {} with {} truth samples and {} steps",
            a.score_from,
            truth.len(),
            a.steps
        )));
    }
    let err = rmse(&forecast.slice(from - 1, end - 1)?, &truth.slice(from, end)?)?;
    let report = RmseReport {
        lag: model.lag,
        steps: a.steps,
        symmetrized: a.symmetrized,
        score_from: from,
        scored_samples: end - from,
        rmse: err,
    };
    if let Some(p) = &a.report_out {
        write_report(p, &report)?;
    }
    emit(json, &report, || {
        format!(
            "{} forecast samples -> {}\nrmse over samples {}..{}: {:.6e}\n",
            a.steps,
            a.out.display(),
            from,
            end - 1,
            err
        )
    })
}

fn format_coefficient(c: [f64; 2]) -> String {
    if c[1] == 0.0 {
        format!("{}", c[0])
    } else {
        format!("({}{:+}i)", c[0], c[1])
    }
}

fn equations_table(dynamics: &IdentifiedDynamics) -> String {
    let mut s = String::new();
    for eq in dynamics.equations() {
        let mut rhs = String::new();
        for (k, t) in eq.terms.iter().enumerate() {
            let [re, im] = t.coefficient;
            let (sign, c) = if im == 0.0 && re < 0.0 { ("-", [-re, im]) } else { ("+", [re, im]) };
            match (k, sign) {
                (0, "-") => rhs.push('-'),
                (0, _) => {}
                _ => rhs.push_str(&format!(" {sign} ")),
            }
            rhs.push_str(&format!("{} {}", format_coefficient(c), t.feature));
        }
        if rhs.is_empty() {
            rhs.push('0');
        }
        s.push_str(&format!("d{}/dt = {rhs}\n", eq.target));
    }
    s
}

#[derive(Serialize)]
struct OdeSummary {
    out: PathBuf,
    residual: f64,
    truncation_rank: usize,
    nonzeros: usize,
    equations: Vec<sysid::dictionary::TargetEquation>,
}

pub fn identify_ode(a: IdentifyOdeArgs, json: bool) -> CliResult<()> {
    check_positive("delta", a.delta)?;
    check_positive("epsilon", a.epsilon)?;
    let dictionary = parse_dictionary(&a.dict)?;
    let mut series = load_series(&a.input)?;
    if let Some(n) = a.train_samples {
        series = series.slice(0, n.min(series.len()))?;
    }
    let boundary = match a.boundary {
        Boundary::DropEndpoints => BoundaryPolicy::DropEndpoints,
        Boundary::ZeroPadMasked => BoundaryPolicy::ZeroPadMasked,
    };
    let fd = FiniteDiffSpec::new(a.fd_order, series.dt())
        .with_boundary(boundary)
        .with_pinned(a.pinned.clone());
    fd.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let regression = assemble_regression(&series, &dictionary, &fd)?;
    let dynamics = regression.identify(&SolverConfig::new(a.delta, a.max_sweeps, a.epsilon), a.scale_columns)?;
    dynamics.save(&a.out)?;
    let summary = OdeSummary {
        out: a.out,
        residual: dynamics.residual,
        truncation_rank: dynamics.truncation_rank,
        nonzeros: dynamics.nonzeros(),
        equations: dynamics.equations(),
    };
    emit(json, &summary, || {
        format!(
            "{}delta-rank {}, {} nonzeros, residual {:.6e}\ndynamics -> {}\n",
            equations_table(&dynamics),
            summary.truncation_rank,
            summary.nonzeros,
            summary.residual,
            summary.out.display()
        )
    })
}

pub fn simulate(a: SimulateArgs, json: bool) -> CliResult<()> {
    check_positive("dt", a.dt)?;
    let dynamics = IdentifiedDynamics::load(&a.dynamics)?;
    let x0: Vec<c64> = match &a.x0_from {
        Some(path) => {
            let s = read_csv(path)?;
            if a.row >= s.len() {
                return Err(Failure::Runtime(format!(
                    "{} has {} samples, --row {} is out of range",
                    path.display(),
                    s.len(),
                    a.row
                )));
            }
            s.sample(a.row)
        }
        None => a.x0.iter().map(|&x| c64::new(x, 0.0)).collect(),
    };
    let traj = integrate(&dynamics, &x0, a.dt, a.steps)?;
    write_csv(&a.out, &traj)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        n: usize,
        samples: usize,
        dt: f64,
        out: &'a Path,
    }
    let summary = Summary {
        n: traj.dim(),
        samples: traj.len(),
        dt: traj.dt(),
        out: &a.out,
    };
    emit(json, &summary, || {
        format!(
            "{} samples of {} components, dt = {} -> {}\n",
            summary.samples,
            summary.n,
            summary.dt,
            summary.out.display()
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_path_sits_next_to_model() {
        assert_eq!(report_path_for(Path::new("out/m.json")), PathBuf::from("out/m.report.json"));
        assert_eq!(report_path_for(Path::new("m")), PathBuf::from("m.report.json"));
    }

    #[test]
    fn coefficients_print_compactly() {
        assert_eq!(format_coefficient([36.4, 0.0]), "36.4");
        assert_eq!(format_coefficient([-32.0, 0.5]), "(-32+0.5i)");
    }

    #[test]
    fn geometric_scores_perfectly() {
        let values: Vec<f64> = (0..12).map(|k| 0.9f64.powi(k)).collect();
        let s = TimeSeries::from_scalar(&values, 1.0).unwrap();
        let g = sysid::trajectory::GroupRep::trivial(1);
        let cfg = IdentifyConfig::new(1e-10, 1e-12);
        let (m, _) = identify_at_lag(&s.slice(0, 8).unwrap(), &g, 1, &cfg).unwrap();
        assert!(score(&m, &s.slice(0, 8).unwrap(), Some(&s.slice(8, 12).unwrap())).unwrap() < 1e-12);
        assert!(score(&m, &s, None).unwrap() < 1e-12);
    }
}
