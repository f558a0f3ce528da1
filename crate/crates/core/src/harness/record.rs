use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::harness::ExperimentConfig;

/// Per-step series of one metric for one algorithm, aggregated over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: String,
    pub algorithm: String,
    pub steps: Vec<u64>,
    pub values: Vec<f64>,
    /// Standard error of the mean across runs (0 with a single run).
    pub stderr: Vec<f64>,
}

impl MetricSeries {
    /// Mean and standard error at each step over equally long run curves.
    pub(crate) fn aggregate(metric: &str, algorithm: &str, steps: Vec<u64>, runs: &[&Vec<f64>]) -> Self {
        let len = steps.len();
        let count = runs.len() as f64;
        let mut values = Vec::with_capacity(len);
        let mut stderr = Vec::with_capacity(len);
        for t in 0..len {
            let mean = runs.iter().map(|c| c[t]).sum::<f64>() / count;
            let se = if runs.len() > 1 {
                let var = runs.iter().map(|c| (c[t] - mean).powi(2)).sum::<f64>() / (count - 1.0);
                (var / count).sqrt()
            } else {
                0.0
            };
            values.push(mean);
            stderr.push(se);
        }
        MetricSeries { metric: metric.to_string(), algorithm: algorithm.to_string(), steps, values, stderr }
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub metric: String,
    pub value: f64,
}

/// Outcome of one experiment: echoed config, series, summary scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub series: Vec<MetricSeries>,
    pub summary: Vec<SummaryRow>,
    pub wall_clock_secs: f64,
}

#[derive(Serialize)]
struct RecordMeta<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    discount: f64,
    step_index_mode: crate::harness::StepIndexMode,
    wall_clock_secs: f64,
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

impl RunRecord {
    /// Metric names in order of first appearance.
    pub fn metrics(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for s in &self.series {
            if !names.contains(&s.metric.as_str()) {
                names.push(&s.metric);
            }
        }
        names
    }

    pub fn series(&self, metric: &str, algorithm: &str) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.metric == metric && s.algorithm == algorithm)
    }

    pub fn summary_value(&self, algorithm: &str, metric: &str) -> Option<f64> {
        self.summary.iter().find(|r| r.algorithm == algorithm && r.metric == metric).map(|r| r.value)
    }

    /// Writes `<metric>.csv` (header `step,algorithm,value,stderr`) for each
    /// metric and `summary.csv` (header `algorithm,metric,value`).
    pub fn write_csvs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for metric in self.metrics() {
            let path = dir.join(format!("{metric}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["step", "algorithm", "value", "stderr"])?;
            for s in self.series.iter().filter(|s| s.metric == metric) {
                for ((step, v), se) in s.steps.iter().zip(&s.values).zip(&s.stderr) {
                    w.write_record([step.to_string(), s.algorithm.clone(), format_value(*v), format_value(*se)])?;
                }
            }
            w.flush()?;
            written.push(path);
        }
        let path = dir.join("summary.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["algorithm", "metric", "value"])?;
        for row in &self.summary {
            w.write_record([row.algorithm.clone(), row.metric.clone(), format_value(row.value)])?;
        }
        w.flush()?;
        written.push(path);
        Ok(written)
    }

    /// CSVs plus `record.json` (config echo, seed, timing).
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = self.write_csvs(dir)?;
        let meta = RecordMeta {
            config: &self.config,
            seed: self.seed,
            discount: self.config.resolved_discount(),
            step_index_mode: self.config.step_index_mode,
            wall_clock_secs: self.wall_clock_secs,
        };
        let path = dir.join("record.json");
        fs::write(&path, serde_json::to_string_pretty(&meta)?)?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_mean_and_stderr() {
        let a = vec![1.0, 2.0];
        let b = vec![3.0, 2.0];
        let s = MetricSeries::aggregate("m", "x", vec![1, 2], &[&a, &b]);
        assert_eq!(s.values, vec![2.0, 2.0]);
        assert!((s.stderr[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.stderr[1], 0.0);
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-9, 12345.678] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }
}
