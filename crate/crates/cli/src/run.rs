//! Run orchestration: resolve a request into result rows (analytic,
//! simulated, or both, per sweep point and strategy) and emit the CSV /
//! JSON / SVG artifacts.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use mmwpt_core::analytic::coverage;
use mmwpt_core::montecarlo::estimate_coverage;
use mmwpt_core::scenario::Strategy;
use mmwpt_core::{Quadrature, Report, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{self, LobeProbMode, ResolvedConfig};
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Closed-form coverage only.
    Analytic,
    /// Monte Carlo coverage only.
    Simulate,
    /// Both, with the absolute gap per row.
    Validate,
    /// One row per sweep value (analytic, plus Monte Carlo when trials > 0).
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    Ra,
    Na,
    Both,
}

impl StrategyChoice {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyChoice::Ra => vec![Strategy::Random],
            StrategyChoice::Na => vec![Strategy::Nearest],
            StrategyChoice::Both => vec![Strategy::Random, Strategy::Nearest],
        }
    }
}

fn strategy_label(strategy: Strategy) -> &'static str {
    match strategy {
        Strategy::Random => "ra",
        Strategy::Nearest => "na",
    }
}

/// Everything one invocation needs; built from the command line by `main`
/// or directly by tests.
#[derive(Debug, Clone, Serialize)]
pub struct RunRequest {
    pub mode: Mode,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub sweep_param: Option<String>,
    pub sweep_values: Vec<f64>,
    pub strategy: StrategyChoice,
    pub trials: u64,
    pub seed: u64,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

impl RunRequest {
    /// A request with nothing optional set: validate mode on the built-in
    /// scenario.
    pub fn defaults() -> Self {
        Self {
            mode: Mode::Validate,
            config_path: None,
            overrides: Vec::new(),
            sweep_param: None,
            sweep_values: Vec::new(),
            strategy: StrategyChoice::Both,
            trials: 20_000,
            seed: 42,
            out_csv: None,
            out_json: None,
            out_svg: None,
        }
    }
}

/// One output row. The CSV column order is exactly the field order here;
/// `runtime_seconds` is blanked in CSV output so identical requests give
/// byte-identical files, and carries the measured time in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_value: Option<f64>,
    pub strategy: String,
    pub analytic_p: Option<f64>,
    pub mc_p: Option<f64>,
    pub mc_ci_low: Option<f64>,
    pub mc_ci_high: Option<f64>,
    pub abs_gap: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub runtime_seconds: Option<f64>,
}

/// Rows plus the per-row analytic reports (where an analytic pass ran).
#[derive(Debug)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub reports: Vec<Option<Report>>,
    pub resolved: ResolvedConfig,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: &'a ResultRow,
    /// Full analytic diagnostics: per-term values, truncation bounds, and
    /// the saturation flag.
    analytic_report: &'a Option<Report>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    request: &'a RunRequest,
    lobe_prob_mode: LobeProbMode,
    config: &'a Scenario,
    quadrature: &'a Quadrature,
    rows: Vec<JsonRow<'a>>,
}

/// Apply one sweep axis to a copy of the base scenario. A bare axis name
/// applies across every tier; the `.typical` suffix touches only the tier
/// hosting the reference user.
fn apply_axis(
    base: &Scenario,
    lobe: LobeProbMode,
    param: &str,
    value: f64,
) -> Result<Scenario> {
    let mut scn = base.clone();
    let typical = scn.typical_tier - 1;
    match param {
        "nb" => {
            if value.fract() != 0.0 || value < 1.0 || value > 4096.0 {
                bail!("sweep axis 'nb': {value} is not a valid element count");
            }
            scn.pb_array = lobe.array(value as u32)?;
        }
        "gamma_th_dbm" => scn.energy_threshold = config::dbm_to_watts(value),
        "mean_pb_count" => {
            for tier in &mut scn.tiers {
                tier.mean_pb_count = value;
            }
        }
        "mean_pb_count.typical" => scn.tiers[typical].mean_pb_count = value,
        "sigma_u" => {
            for tier in &mut scn.tiers {
                tier.eu_scatter = value;
            }
        }
        "sigma_u.typical" => scn.tiers[typical].eu_scatter = value,
        "sigma_b" => {
            for tier in &mut scn.tiers {
                tier.pb_scatter = value;
            }
        }
        "sigma_b.typical" => scn.tiers[typical].pb_scatter = value,
        other => bail!(
            "unknown sweep axis '{other}'; expected nb, gamma_th_dbm, mean_pb_count, \
             sigma_u or sigma_b (optionally suffixed .typical)"
        ),
    }
    scn.validate()
        .with_context(|| format!("sweep axis '{param}' = {value}"))?;
    Ok(scn)
}

/// Execute a request and write the requested artifacts. Rows come back for
/// callers that want them in-process.
pub fn run(request: &RunRequest) -> Result<RunOutcome> {
    let resolved = config::load_config(request.config_path.as_deref(), &request.overrides)?;

    let sweep_points: Vec<Option<f64>> = match request.mode {
        Mode::Sweep => {
            let Some(param) = request.sweep_param.as_deref() else {
                bail!("sweep mode needs --sweep <axis>");
            };
            if request.sweep_values.len() < 2 {
                bail!("sweep mode needs at least two --values, got {}", request.sweep_values.len());
            }
            // Surface a bad axis before any computation starts.
            apply_axis(&resolved.scenario, resolved.lobe_prob_mode, param, request.sweep_values[0])?;
            request.sweep_values.iter().copied().map(Some).collect()
        }
        _ => {
            if request.sweep_param.is_some() || !request.sweep_values.is_empty() {
                bail!("--sweep/--values only apply to sweep mode");
            }
            vec![None]
        }
    };

    let wants_analytic = !matches!(request.mode, Mode::Simulate);
    let wants_mc = match request.mode {
        Mode::Analytic => false,
        Mode::Simulate | Mode::Validate => {
            if request.trials == 0 {
                bail!("this mode needs at least one trial");
            }
            true
        }
        Mode::Sweep => request.trials > 0,
    };

    let jobs: Vec<(Option<f64>, Strategy)> = sweep_points
        .iter()
        .flat_map(|point| {
            request
                .strategy
                .strategies()
                .into_iter()
                .map(move |s| (*point, s))
        })
        .collect();

    let computed: Result<Vec<(ResultRow, Option<Report>)>> = jobs
        .par_iter()
        .map(|&(point, strategy)| {
            let mut scn = match (point, request.sweep_param.as_deref()) {
                (Some(value), Some(param)) => {
                    apply_axis(&resolved.scenario, resolved.lobe_prob_mode, param, value)?
                }
                _ => resolved.scenario.clone(),
            };
            scn.strategy = strategy;
            let quad = Quadrature::defaults(&scn);
            let started = Instant::now();
            let report = if wants_analytic {
                Some(coverage(&scn, &quad).with_context(|| {
                    format!("analytic solver failed at sweep value {point:?}")
                })?)
            } else {
                None
            };
            let estimate = if wants_mc {
                Some(estimate_coverage(&scn, request.trials, request.seed)?)
            } else {
                None
            };
            let analytic_p = report.as_ref().map(|r| r.probability);
            let mc_p = estimate.as_ref().map(|e| e.probability);
            let row = ResultRow {
                sweep_value: point,
                strategy: strategy_label(strategy).to_string(),
                analytic_p,
                mc_p,
                mc_ci_low: estimate.as_ref().map(|e| e.ci_low),
                mc_ci_high: estimate.as_ref().map(|e| e.ci_high),
                abs_gap: analytic_p.zip(mc_p).map(|(a, m)| (a - m).abs()),
                trials: estimate.as_ref().map(|e| e.trials),
                seed: estimate.as_ref().map(|e| e.seed),
                runtime_seconds: Some(started.elapsed().as_secs_f64()),
            };
            Ok((row, report))
        })
        .collect();
    let (rows, reports): (Vec<_>, Vec<_>) = computed?.into_iter().unzip();

    if let Some(path) = &request.out_csv {
        write_csv(path, &rows).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &request.out_json {
        let report = JsonReport {
            request,
            lobe_prob_mode: resolved.lobe_prob_mode,
            config: &resolved.scenario,
            quadrature: &Quadrature::defaults(&resolved.scenario),
            rows: rows
                .iter()
                .zip(&reports)
                .map(|(row, analytic_report)| JsonRow {
                    row,
                    analytic_report,
                })
                .collect(),
        };
        fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &request.out_svg {
        if !matches!(request.mode, Mode::Sweep) {
            bail!("--svg needs sweep mode (a plot wants an x axis)");
        }
        let param = request.sweep_param.as_deref().unwrap_or("sweep");
        fs::write(path, svg::render(&rows, param))
            .with_context(|| format!("writing {}", path.display()))?;
    }

    Ok(RunOutcome {
        rows,
        reports,
        resolved,
    })
}

/// Write rows in the fixed column order, runtime cell blank.
pub fn write_csv(path: &std::path::Path, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        let mut stamped = row.clone();
        stamped.runtime_seconds = None;
        writer.serialize(stamped)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read rows back from a CSV produced by `write_csv`.
pub fn read_csv(path: &std::path::Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}
