//! Experiment orchestration: dataset builds, the dataset-by-seed training
//! matrix, result tables and plot data.

mod config;
mod matrix;
mod report;

pub use config::{ExperimentConfig, Preset, DESK_FONTS, DESK_WORDS};
pub use matrix::{
    cell_id, run_cell, run_matrix, train_cell, CellOutcome, CellPaths, MatrixOutcome, RunManifest, RUN_MANIFEST_FILE,
};
pub use report::{
    emit_plot_data, load_report, ResultsRow, ResultsTable, TableKind, PLOT_CSV_HEADER, TABLE_COLUMNS, TABLE_ROWS,
};
