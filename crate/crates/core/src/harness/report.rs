use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{CellPaths, RUN_MANIFEST_FILE};
use super::RunManifest;
use crate::dataset::ALL_FONTS;
use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::trainer::{select_best, EpochLog, RunSummary, Selection};

/// Canonical row order: the pooled dataset, then the six single-font sets.
pub const TABLE_ROWS: [&str; 7] = [
    ALL_FONTS,
    "Arial_14",
    "Calibri_14",
    "Cambria_14",
    "Georgia_14",
    "LucidaFax_14",
    "TNR_14",
];

pub const TABLE_COLUMNS: [&str; 4] = [
    "best_ctc_labelError",
    "best_ctc_seqError",
    "best_label_labelError",
    "best_label_seqError",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    /// Best repetition per criterion.
    Best,
    /// Mean over repetitions per criterion.
    Mean,
}

/// One dataset's four error fractions, in [`TABLE_COLUMNS`] order; `None`
/// when the dataset was not part of the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsRow {
    pub dataset: String,
    pub values: Option<[f64; 4]>,
    pub n_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub kind: TableKind,
    pub rows: Vec<ResultsRow>,
}

impl ResultsTable {
    /// Rows are the canonical seven followed by any other dataset names in
    /// sorted order.
    pub fn from_runs(kind: TableKind, runs: &[RunSummary]) -> Result<Self> {
        let mut by_dataset: BTreeMap<&str, Vec<RunSummary>> = BTreeMap::new();
        for r in runs {
            by_dataset.entry(&r.dataset_name).or_default().push(r.clone());
        }
        let mut names: Vec<&str> = TABLE_ROWS.to_vec();
        names.extend(by_dataset.keys().filter(|k| !TABLE_ROWS.contains(k)));
        let rows = names
            .into_iter()
            .map(|name| {
                let Some(group) = by_dataset.get(name) else {
                    return Ok(ResultsRow {
                        dataset: name.to_string(),
                        values: None,
                        n_runs: 0,
                    });
                };
                let mut group = group.clone();
                group.sort_by_key(|r| r.seed);
                let sel = select_best(&group)?;
                Ok(ResultsRow {
                    dataset: name.to_string(),
                    values: Some(row_values(kind, &sel)),
                    n_runs: group.len(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { kind, rows })
    }

    pub fn row(&self, dataset: &str) -> Option<&ResultsRow> {
        self.rows.iter().find(|r| r.dataset == dataset)
    }

    /// Percentages with five decimals; absent rows are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = format!("dataset,{},n_runs\n", TABLE_COLUMNS.join(","));
        for r in &self.rows {
            out.push_str(&r.dataset);
            for i in 0..4 {
                out.push(',');
                if let Some(v) = r.values {
                    let _ = write!(out, "{:.5}", v[i] * 100.0);
                }
            }
            let _ = writeln!(out, ",{}", r.n_runs);
        }
        out
    }

    /// Fixed-width text rendering.
    pub fn render(&self) -> String {
        let title = match self.kind {
            TableKind::Best => "Best models per criterion (test sets)",
            TableKind::Mean => "Mean over repetitions per criterion (test sets)",
        };
        let mut out = format!("{title}\n{:<14}", "dataset");
        for c in TABLE_COLUMNS {
            let _ = write!(out, "{c:>24}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<14}", r.dataset);
            for i in 0..4 {
                let cell = match r.values {
                    Some(v) => crate::metrics::format_percent(v[i]),
                    None => "n/a".to_string(),
                };
                let _ = write!(out, "{cell:>24}");
            }
            out.push('\n');
        }
        out
    }
}

fn row_values(kind: TableKind, sel: &Selection) -> [f64; 4] {
    match kind {
        TableKind::Best => [
            sel.best_ctc.label_error,
            sel.best_ctc.seq_error,
            sel.best_label.label_error,
            sel.best_label.seq_error,
        ],
        TableKind::Mean => [
            sel.mean_ctc.label_error,
            sel.mean_ctc.seq_error,
            sel.mean_label.label_error,
            sel.mean_label.seq_error,
        ],
    }
}

pub const PLOT_CSV_HEADER: &str = "run,epoch,metric,split,value";

/// Long-format error curves: one row per run, epoch, metric and split.
pub fn emit_plot_data(runs: &[(String, Vec<EpochLog>)]) -> Result<String> {
    if runs.iter().all(|(_, logs)| logs.is_empty()) {
        return Err(Error::EmptyInput);
    }
    let metrics: [(&str, fn(&EvalReport) -> f64); 3] = [
        ("ctc_error", |r| r.ctc_error),
        ("label_error", |r| r.label_error),
        ("seq_error", |r| r.seq_error),
    ];
    let mut out = String::from(PLOT_CSV_HEADER);
    out.push('\n');
    for (run, logs) in runs {
        let mut logs: Vec<&EpochLog> = logs.iter().collect();
        logs.sort_by_key(|l| l.epoch);
        for log in logs {
            for (metric, get) in &metrics {
                for (split, report) in [("train", &log.train), ("test", &log.test)] {
                    let _ = writeln!(out, "{run},{},{metric},{split},{}", log.epoch, get(report));
                }
            }
        }
    }
    Ok(out)
}

/// Rebuilds tables and plot data from the completed cells of an output
/// directory.
pub fn load_report(output_dir: &Path) -> Result<(ResultsTable, ResultsTable, String)> {
    let manifest_path = output_dir.join(RUN_MANIFEST_FILE);
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let mut runs = Vec::new();
    let mut curves = Vec::new();
    for cell in &manifest.cells {
        let paths = CellPaths::new(output_dir, &cell.dataset_name, cell.seed);
        if let Some((summary, logs)) = paths.load_completed()? {
            curves.push((paths.id.clone(), logs));
            runs.push(summary);
        }
    }
    if runs.is_empty() {
        return Err(Error::Config(format!(
            "no completed runs under {}",
            output_dir.display()
        )));
    }
    Ok((
        ResultsTable::from_runs(TableKind::Best, &runs)?,
        ResultsTable::from_runs(TableKind::Mean, &runs)?,
        emit_plot_data(&curves)?,
    ))
}
