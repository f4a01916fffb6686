use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gsq_core::run_replications;
use gsq_core::sim::metric_names;
use rayon::prelude::*;

use crate::input::{load_config, write_file, Failure};
use crate::simulate::{check_run_args, sim_failure};
use crate::svg::{line_chart, Point};
use crate::RunArgs;

/// Arrival rates `low, low + step, ...` up to `high`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(low: f64, high: f64, step: f64) -> Result<Self, Failure> {
        if !(low.is_finite() && high.is_finite() && low > 0.0 && low < high) {
            return Err(Failure::usage(anyhow::anyhow!(
                "--lambda-low {low} / --lambda-high {high}: need 0 < low < high"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Failure::usage(anyhow::anyhow!("--lambda-step {step}: step must be > 0")));
        }
        let count = ((high - low) / step + 1e-9).floor() as usize + 1;
        Ok(Self {
            values: (0..count).map(|k| low + k as f64 * step).collect(),
        })
    }
}

pub fn run(
    config: &Path,
    grid: &Grid,
    metrics: &[String],
    run: &RunArgs,
    output: &Path,
    svg_dir: Option<&Path>,
) -> Result<(), Failure> {
    check_run_args(run)?;
    let cfg = load_config(config)?;
    let known = metric_names(cfg.groups.len());
    let selected: Vec<String> = if metrics.is_empty() {
        known.clone()
    } else {
        if let Some(bad) = metrics.iter().find(|m| !known.contains(m)) {
            return Err(Failure::usage(anyhow::anyhow!(
                "--metrics: unknown metric `{bad}` (known: {})",
                known.join(", ")
            )));
        }
        metrics.to_vec()
    };

    let reports = grid
        .values
        .par_iter()
        .map(|&lambda| {
            run_replications(
                &cfg.with_arrival_rate(lambda),
                run.horizon,
                run.warmup,
                run.seed,
                run.replications,
            )
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(sim_failure)?;

    let mut csv = String::from("lambda,metric,mean,ci_low,ci_high\n");
    for (&lambda, report) in grid.values.iter().zip(&reports) {
        for name in &selected {
            let m = report.get(name).expect("known metric");
            let _ = writeln!(csv, "{lambda},{name},{},{},{}", m.mean, m.ci_low, m.ci_high);
        }
    }
    write_file(output, &csv)?;

    let dir = svg_dir
        .map(Path::to_path_buf)
        .or_else(|| output.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::usage(anyhow::anyhow!("cannot create {}: {e}", dir.display())))?;
    }
    for name in &selected {
        let points: Vec<Point> = grid
            .values
            .iter()
            .zip(&reports)
            .map(|(&x, r)| {
                let m = r.get(name).expect("known metric");
                Point {
                    x,
                    mean: m.mean,
                    low: m.ci_low,
                    high: m.ci_high,
                }
            })
            .collect();
        write_file(&dir.join(format!("sweep_{name}.svg")), &line_chart(name, "lambda", &points))?;
    }
    println!(
        "{} grid points x {} metrics written to {}; charts in {}",
        grid.values.len(),
        selected.len(),
        output.display(),
        if dir.as_os_str().is_empty() { Path::new(".") } else { &dir }.display()
    );
    Ok(())
}
