//! Suite execution and report persistence.

use crate::checks::{run_check, Context};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::json::{format_float, to_canonical};
use graphcalc_core::rng::derive_seed;
use graphcalc_core::{InequalityReport, WeightedGraph};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

pub const SCHEMA: &str = "graphcalc-report/1";

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 5] = ["schema", "check", "series", "x", "y"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub index: usize,
    pub name: String,
    pub seed: u64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<InequalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub environment: Environment,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub precision: &'static str,
}

/// Wall-clock seconds per check, kept apart from the bundle so that it stays reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub checks: Vec<(String, f64)>,
}

impl ReportBundle {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn to_json(&self) -> String {
        to_canonical(&serde_json::to_value(self).expect("bundle serializes"))
    }

    /// Plot-ready rows; each constant becomes a row of series `constant/<name>` with empty x.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for c in &self.checks {
            let Some(r) = &c.report else {
                w.write_record([SCHEMA, &c.name, "error", "", ""]).map_err(io)?;
                continue;
            };
            for row in &r.rows {
                w.write_record([SCHEMA, &c.name, &row.series, &format_float(row.x), &format_float(row.y)])
                    .map_err(io)?;
            }
            for k in &r.constants {
                w.write_record([SCHEMA, &c.name, &format!("constant/{}", k.name), "", &format_float(k.value)])
                    .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Thread count from GRAPHCALC_THREADS, defaulting to rayon's choice.
pub fn thread_count() -> usize {
    std::env::var("GRAPHCALC_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&n| n > 0).unwrap_or(0)
}

/// Runs every check of the suite, concurrently, keeping config order.
pub fn run_suite(cfg: &ExperimentConfig, graph: &WeightedGraph) -> Result<(ReportBundle, Timings), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = Context::new(graph);
    let results: Vec<(CheckOutcome, f64)> = pool.install(|| {
        cfg.suite
            .par_iter()
            .enumerate()
            .map(|(index, check)| {
                let name = check.name().to_string();
                let seed = derive_seed(cfg.seed, &name);
                let start = Instant::now();
                let result = run_check(&ctx, cfg, check, seed);
                let secs = start.elapsed().as_secs_f64();
                let outcome = match result {
                    Ok(r) => CheckOutcome { index, name, seed, status: "ok", report: Some(r), error: None },
                    Err(e) => {
                        CheckOutcome { index, name, seed, status: "error", report: None, error: Some(e.to_string()) }
                    }
                };
                (outcome, secs)
            })
            .collect()
    });
    let timings = Timings { checks: results.iter().map(|(c, t)| (c.name.clone(), *t)).collect() };
    let bundle = ReportBundle {
        schema: SCHEMA,
        // The output location does not affect results and would break byte equality across runs.
        config: ExperimentConfig { output: None, ..cfg.clone() },
        environment: Environment { version: env!("CARGO_PKG_VERSION"), precision: "f64" },
        checks: results.into_iter().map(|(c, _)| c).collect(),
    };
    Ok((bundle, timings))
}

/// Writes `report.json`, `report.csv` and `timings.json` into `dir`.
pub fn write_outputs(dir: &Path, bundle: &ReportBundle, timings: &Timings) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), bundle.to_json())?;
    std::fs::write(dir.join("report.csv"), bundle.to_csv()?)?;
    let t = serde_json::to_string_pretty(timings).expect("timings serialize");
    std::fs::write(dir.join("timings.json"), t + "\n")?;
    Ok(())
}
