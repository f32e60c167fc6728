use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvalReport;

/// Epoch and test scores of one tracked best model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedBest {
    pub epoch: usize,
    pub test: EvalReport,
}

/// Outcome of one trained cell, kept without parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset_name: String,
    pub seed: u64,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub best_by_ctc: TrackedBest,
    pub best_by_label: TrackedBest,
}

/// Arithmetic mean of test scores across repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub n_runs: usize,
    pub ctc_error: f64,
    pub label_error: f64,
    pub seq_error: f64,
    pub insertions: f64,
    pub deletions: f64,
    pub substitutions: f64,
}

impl MeanReport {
    fn of(reports: &[&EvalReport]) -> Self {
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
        Self {
            n_runs: reports.len(),
            ctc_error: mean(&|r| r.ctc_error),
            label_error: mean(&|r| r.label_error),
            seq_error: mean(&|r| r.seq_error),
            insertions: mean(&|r| r.insertions as f64),
            deletions: mean(&|r| r.deletions as f64),
            substitutions: mean(&|r| r.substitutions as f64),
        }
    }
}

/// Best-of and mean-of repetitions under each criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Lowest CTC loss among the repetitions' CTC-selected models.
    pub best_ctc: EvalReport,
    /// Lowest label error among the repetitions' label-selected models.
    pub best_label: EvalReport,
    pub mean_ctc: MeanReport,
    pub mean_label: MeanReport,
}

/// Ties between repetitions go to the earlier one in `runs`.
pub fn select_best(runs: &[RunSummary]) -> Result<Selection> {
    if runs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pick = |key: fn(&RunSummary) -> (&EvalReport, f64)| {
        let mut best = key(&runs[0]);
        for r in &runs[1..] {
            let cand = key(r);
            if cand.1 < best.1 {
                best = cand;
            }
        }
        best.0.clone()
    };
    let ctc: Vec<&EvalReport> = runs.iter().map(|r| &r.best_by_ctc.test).collect();
    let label: Vec<&EvalReport> = runs.iter().map(|r| &r.best_by_label.test).collect();
    Ok(Selection {
        best_ctc: pick(|r| (&r.best_by_ctc.test, r.best_by_ctc.test.ctc_error)),
        best_label: pick(|r| (&r.best_by_label.test, r.best_by_label.test.label_error)),
        mean_ctc: MeanReport::of(&ctc),
        mean_label: MeanReport::of(&label),
    })
}
