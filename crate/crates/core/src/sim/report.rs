use std::fmt::Write as _;

use super::RunStats;
use crate::stats::confidence_interval;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricEstimate {
    pub name: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MetricEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Across-replication means with 95% Student-t intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub metrics: Vec<MetricEstimate>,
    pub replications: usize,
    pub seed: u64,
    /// Per-replication statistics, in replication order.
    pub runs: Vec<RunStats>,
}

/// Metric names in report order for a system with `groups` groups.
pub fn metric_names(groups: usize) -> Vec<String> {
    let mut names = vec!["system_count".to_string()];
    names.extend((0..groups).map(|j| format!("group_count_{j}")));
    names.extend(
        [
            "buffer_count",
            "held_count",
            "sojourn_time",
            "virtual_service_time",
            "loss_probability",
            "abandonment_fraction",
            "power_rate",
            "throughput",
        ]
        .map(String::from),
    );
    names
}

pub(crate) fn metric_values(s: &RunStats) -> Vec<f64> {
    let mut v = vec![s.mean_system_count];
    v.extend(&s.mean_group_count);
    v.extend([
        s.mean_buffer_count,
        s.mean_held_count,
        s.mean_sojourn(),
        s.mean_virtual_service(),
        s.loss_probability(),
        s.abandonment_fraction(),
        s.mean_power_rate,
        s.throughput(),
    ]);
    v
}

impl SimReport {
    pub(crate) fn aggregate(runs: Vec<RunStats>, seed: u64) -> Self {
        let groups = runs[0].mean_group_count.len();
        let names = metric_names(groups);
        let per_run: Vec<Vec<f64>> = runs.iter().map(metric_values).collect();
        let metrics = names
            .into_iter()
            .enumerate()
            .map(|(k, name)| {
                let samples: Vec<f64> = per_run.iter().map(|v| v[k]).collect();
                let ci = confidence_interval(&samples, 0.95);
                let (mut low, mut high) = (ci.low(), ci.high());
                if name.ends_with("probability") || name.ends_with("fraction") {
                    low = low.max(0.0);
                    high = high.min(1.0);
                }
                MetricEstimate {
                    name,
                    mean: ci.mean,
                    ci_low: low,
                    ci_high: high,
                }
            })
            .collect();
        Self {
            metrics,
            replications: runs.len(),
            seed,
            runs,
        }
    }

    pub fn get(&self, name: &str) -> Option<&MetricEstimate> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Mean of `name`; panics on an unknown metric.
    pub fn mean(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("unknown metric {name}"))
            .mean
    }

    /// One metric per row, followed by the replication count and seed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,mean,ci_low,ci_high\n");
        for m in &self.metrics {
            let _ = writeln!(out, "{},{},{},{}", m.name, m.mean, m.ci_low, m.ci_high);
        }
        let r = self.replications;
        let s = self.seed;
        let _ = writeln!(out, "replications,{r},{r},{r}");
        let _ = writeln!(out, "seed,{s},{s},{s}");
        out
    }

    pub fn to_pretty(&self) -> String {
        let mut out = format!(
            "{} replications, base seed {}\n{:<22} {:>14} {:>14} {:>14}\n",
            self.replications, self.seed, "metric", "mean", "ci_low", "ci_high"
        );
        for m in &self.metrics {
            let _ = writeln!(
                out,
                "{:<22} {:>14.6} {:>14.6} {:>14.6}",
                m.name, m.mean, m.ci_low, m.ci_high
            );
        }
        out
    }
}
