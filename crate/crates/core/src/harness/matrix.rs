use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{emit_plot_data, ResultsTable, TableKind};
use super::ExperimentConfig;
use crate::dataset::{build_alphabet, build_datasets, Alphabet, DatasetSplit, SHUFFLE_ALGORITHM};
use crate::error::{Error, Result};
use crate::trainer::{epoch_logs_csv, save_model, EpochLog, RunSummary, Trainer};
use crate::Scalar;

pub const RUN_MANIFEST_FILE: &str = "manifest.json";
const RUN_MANIFEST_FORMAT: &str = "wordocr-run/1";

pub fn cell_id(dataset_name: &str, seed: u64) -> String {
    format!("{dataset_name}_seed{seed}")
}

/// File locations of one (dataset, seed) cell. `summary.json` is written
/// last and marks the cell complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellPaths {
    pub id: String,
    pub dir: PathBuf,
    pub state: PathBuf,
    pub summary: PathBuf,
    pub logs: PathBuf,
    pub epochs_csv: PathBuf,
    pub best_by_ctc: PathBuf,
    pub best_by_label: PathBuf,
    pub failure: PathBuf,
}

impl CellPaths {
    pub fn new(output_dir: &Path, dataset_name: &str, seed: u64) -> Self {
        let id = cell_id(dataset_name, seed);
        let dir = output_dir.join("runs").join(&id);
        Self {
            state: dir.join("state.ckpt"),
            summary: dir.join("summary.json"),
            logs: dir.join("logs.json"),
            epochs_csv: dir.join("epochs.csv"),
            best_by_ctc: dir.join("best_by_ctc.ckpt"),
            best_by_label: dir.join("best_by_label.ckpt"),
            failure: dir.join("failure.txt"),
            id,
            dir,
        }
    }

    pub fn load_completed(&self) -> Result<Option<(RunSummary, Vec<EpochLog>)>> {
        if !self.summary.exists() {
            return Ok(None);
        }
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let summary = serde_json::from_str(&read(&self.summary)?)?;
        let logs = serde_json::from_str(&read(&self.logs)?)?;
        Ok(Some((summary, logs)))
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("part");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Trains one cell, resuming from its saved state when present, and writes
/// its logs, best models and summary.
pub fn train_cell<T: Scalar>(
    split: &DatasetSplit,
    alphabet: &Alphabet,
    cfg: &ExperimentConfig,
    paths: &CellPaths,
) -> Result<(RunSummary, Vec<EpochLog>)> {
    fs::create_dir_all(&paths.dir).map_err(|e| Error::io(&paths.dir, e))?;
    let mut trainer = if paths.state.exists() {
        log::info!("{}: resuming from {}", paths.id, paths.state.display());
        Trainer::<T>::resume(&paths.state, split)?
    } else {
        // each repetition also draws its own initial weights
        let hp = crate::trainer::Hyperparams {
            seed: split.seed,
            ..cfg.hyperparams.clone()
        };
        Trainer::<T>::new(split, alphabet.clone(), hp, cfg.net)?
    };
    trainer.run(Some(&paths.state))?;

    let summary = trainer.summary()?;
    let tracker = trainer.tracker();
    for (path, model, criterion) in [
        (&paths.best_by_ctc, &tracker.best_by_ctc, "ctc_error"),
        (&paths.best_by_label, &tracker.best_by_label, "label_error"),
    ] {
        let m = model.as_ref().expect("a finished run tracks both criteria");
        let meta = json!({
            "dataset_name": split.dataset_name,
            "seed": split.seed,
            "criterion": criterion,
            "epoch": m.epoch,
            "test": m.test,
            "preprocess": cfg.preprocess,
        });
        save_model(path, &m.params, alphabet, meta)?;
    }
    let logs = trainer.logs().to_vec();
    write_atomic(&paths.epochs_csv, epoch_logs_csv(&logs).as_bytes())?;
    write_atomic(&paths.logs, &serde_json::to_vec_pretty(&logs)?)?;
    write_atomic(&paths.summary, &serde_json::to_vec_pretty(&summary)?)?;
    if paths.failure.exists() {
        fs::remove_file(&paths.failure).map_err(|e| Error::io(&paths.failure, e))?;
    }
    Ok((summary, logs))
}

/// Result of one matrix cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub dataset_name: String,
    pub seed: u64,
    /// Already complete from an earlier invocation.
    pub skipped: bool,
    pub result: std::result::Result<RunSummary, String>,
    #[serde(skip)]
    pub logs: Vec<EpochLog>,
}

/// Completed cells are loaded instead of retrained.
pub fn run_cell(split: &DatasetSplit, alphabet: &Alphabet, cfg: &ExperimentConfig) -> CellOutcome {
    let paths = CellPaths::new(&cfg.output_dir, &split.dataset_name, split.seed);
    let outcome = |skipped, r: Result<(RunSummary, Vec<EpochLog>)>| {
        let (result, logs) = match r {
            Ok((s, l)) => (Ok(s), l),
            Err(e) => (Err(e.to_string()), Vec::new()),
        };
        CellOutcome {
            dataset_name: split.dataset_name.clone(),
            seed: split.seed,
            skipped,
            result,
            logs,
        }
    };
    match paths.load_completed() {
        Ok(Some(done)) => return outcome(true, Ok(done)),
        Ok(None) => {}
        Err(e) => log::warn!("{}: unreadable summary, retraining: {e}", paths.id),
    }
    let r = train_cell::<f64>(split, alphabet, cfg, &paths);
    if let Err(e) = &r {
        log::error!("{} failed: {e}", paths.id);
        let _ = fs::create_dir_all(&paths.dir);
        let _ = fs::write(&paths.failure, format!("{e}\n"));
    }
    outcome(false, r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dataset_name: String,
    pub seed: u64,
    pub id: String,
}

/// Everything needed to reproduce a matrix run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub software_version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub scalar: String,
    pub shuffle_algorithm: String,
    pub learning_rate_schedule: String,
    pub alphabet: Alphabet,
    pub cells: Vec<CellRecord>,
}

#[derive(Clone, Debug)]
pub struct MatrixOutcome {
    pub best: ResultsTable,
    pub mean: ResultsTable,
    pub cells: Vec<CellOutcome>,
}

impl MatrixOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.result.is_err())
    }
}

/// Builds every split, trains every (dataset, seed) cell with up to `jobs`
/// cells in parallel, and writes tables, plot data and the run manifest
/// under the configured output directory.
pub fn run_matrix(cfg: &ExperimentConfig, jobs: usize) -> Result<MatrixOutcome> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let corpus = cfg.load_corpus()?;
    let alphabet = build_alphabet(&corpus);
    let splits = build_datasets(&corpus, &cfg.fonts, &cfg.seeds, &cfg.preprocess, cfg.render_mode)?;

    let manifest = RunManifest {
        format: RUN_MANIFEST_FORMAT.into(),
        software_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        config_hash: cfg.hash()?,
        scalar: f64::NAME.into(),
        shuffle_algorithm: SHUFFLE_ALGORITHM.into(),
        learning_rate_schedule: "constant".into(),
        alphabet: alphabet.clone(),
        cells: splits
            .iter()
            .map(|s| CellRecord {
                dataset_name: s.dataset_name.clone(),
                seed: s.seed,
                id: cell_id(&s.dataset_name, s.seed),
            })
            .collect(),
    };
    let manifest_path = out.join(RUN_MANIFEST_FILE);
    if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let previous: RunManifest = serde_json::from_str(&text)?;
        if previous.config_hash != manifest.config_hash {
            return Err(Error::Config(format!(
                "{} holds results of a different configuration",
                out.display()
            )));
        }
    }
    write_atomic(&manifest_path, &serde_json::to_vec_pretty(&manifest)?)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let cells: Vec<CellOutcome> = pool.install(|| {
        splits
            .par_iter()
            .with_max_len(1)
            .map(|s| run_cell(s, &alphabet, cfg))
            .collect()
    });

    let runs: Vec<RunSummary> = cells.iter().filter_map(|c| c.result.as_ref().ok().cloned()).collect();
    let best = ResultsTable::from_runs(TableKind::Best, &runs)?;
    let mean = ResultsTable::from_runs(TableKind::Mean, &runs)?;
    write_atomic(&out.join("results_best.csv"), best.to_csv().as_bytes())?;
    write_atomic(&out.join("results_mean.csv"), mean.to_csv().as_bytes())?;
    write_atomic(
        &out.join("results.txt"),
        format!("{}\n{}", best.render(), mean.render()).as_bytes(),
    )?;
    let curves: Vec<(String, Vec<EpochLog>)> = cells
        .iter()
        .filter(|c| c.result.is_ok())
        .map(|c| (cell_id(&c.dataset_name, c.seed), c.logs.clone()))
        .collect();
    if !curves.is_empty() {
        write_atomic(&out.join("plot_data.csv"), emit_plot_data(&curves)?.as_bytes())?;
    }
    Ok(MatrixOutcome { best, mean, cells })
}
