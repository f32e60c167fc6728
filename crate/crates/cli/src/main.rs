use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wordocr::dataset::{build_datasets, load_split, split_alphabet, write_split, RenderMode};
use wordocr::harness::{load_report, run_matrix, train_cell, CellPaths, ExperimentConfig, Preset};
use wordocr::imaging::{preprocess_page, preprocess_word, read_gray, write_gray, PreprocessConfig};
use wordocr::trainer::{evaluate_model, load_model, recognize, PreparedData, StopPolicy};
use wordocr::{Error, Params, Result};

#[derive(Parser, Debug)]
#[command(
    name = "wordocr",
    version,
    about = "Printed-word OCR with a bidirectional LSTM and CTC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Experiment configuration (JSON); overrides the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PresetArg::Paper)]
    preset: PresetArg,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Word list, one word per line.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Use only the first N corpus words.
    #[arg(long)]
    words: Option<usize>,
    /// Normalized word height in pixels.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    epsilon: Option<u32>,
    #[arg(long)]
    gap_min: Option<usize>,
    /// Memory blocks per direction.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    /// Stop when test label error stalls for this many epochs.
    #[arg(long)]
    patience: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Word,
    Page,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the corpus in every font and write seeded train/test splits.
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Only this split seed instead of the configured seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Binarize, segment and normalize an external image.
    Preprocess {
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Treat the input as a page and split it into lines and words.
        #[arg(long)]
        page: bool,
        #[arg(long, default_value_t = 32)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        epsilon: u32,
        #[arg(long, default_value_t = 7)]
        gap_min: usize,
    },
    /// Train one dataset split.
    Train {
        /// Dataset manifest written by `generate`.
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Weight-initialization and epoch-order seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score a model on a dataset split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        manifest: PathBuf,
        /// Evaluate the training partition instead of the test partition.
        #[arg(long)]
        train: bool,
        #[arg(long)]
        json: bool,
    },
    /// Transcribe word images.
    Decode {
        #[arg(long)]
        model: PathBuf,
        images: Vec<PathBuf>,
        /// Images are already binarized-cropped-normalized word images.
        #[arg(long)]
        normalized: bool,
    },
    /// Train the full dataset-by-seed matrix.
    Matrix {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Cells trained in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Rebuild result tables and plot data from a matrix output directory.
    Report { dir: PathBuf },
}

fn resolve_config(a: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(match a.preset {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Desk => Preset::Desk,
        }),
    };
    if let Some(v) = &a.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = &a.corpus {
        cfg.corpus = Some(v.clone());
    }
    if let Some(v) = a.words {
        cfg.corpus_words = Some(v);
    }
    if let Some(v) = a.height {
        cfg.preprocess.height = v;
    }
    if let Some(v) = a.epsilon {
        cfg.preprocess.epsilon = v;
    }
    if let Some(v) = a.gap_min {
        cfg.preprocess.gap_min = v;
    }
    if let Some(v) = a.hidden {
        cfg.net.hidden = v;
    }
    if let Some(v) = a.epochs {
        cfg.hyperparams.max_epochs = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.hyperparams.learning_rate = v;
    }
    if let Some(v) = a.momentum {
        cfg.hyperparams.momentum = v;
    }
    if let Some(p) = a.patience {
        cfg.hyperparams.stop_policy = StopPolicy::EarlyStop { patience: p };
    }
    cfg.validate_fields()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { cfg, seed, mode } => {
            let mut cfg = resolve_config(&cfg)?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(m) = mode {
                cfg.render_mode = match m {
                    ModeArg::Word => RenderMode::Word,
                    ModeArg::Page => RenderMode::Page,
                };
            }
            let corpus = cfg.load_corpus()?;
            let splits = build_datasets(&corpus, &cfg.fonts, &cfg.seeds, &cfg.preprocess, cfg.render_mode)?;
            let dir = cfg.output_dir.join("datasets");
            create_dir(&dir)?;
            for split in &splits {
                let path = write_split(&dir, split, cfg.render_mode, cfg.preprocess.height)?;
                println!("{}", path.display());
            }
        }
        Command::Preprocess {
            image,
            out,
            page,
            height,
            epsilon,
            gap_min,
        } => {
            let pcfg = PreprocessConfig {
                height,
                epsilon,
                gap_min,
            };
            let img = read_gray(&image)?;
            create_dir(&out)?;
            if page {
                for (li, line) in preprocess_page(&img, &pcfg)?.iter().enumerate() {
                    for (wi, word) in line.iter().enumerate() {
                        let path = out.join(format!("line{li:03}_word{wi:03}.pgm"));
                        write_gray(&path, word)?;
                        println!("{}", path.display());
                    }
                }
            } else {
                let path = out.join("word.pgm");
                write_gray(&path, &preprocess_word(&img, &pcfg)?)?;
                println!("{}", path.display());
            }
        }
        Command::Train { manifest, cfg, seed } => {
            let mut cfg = resolve_config(&cfg)?;
            let (m, split) = load_split(&manifest)?;
            if m.height != cfg.preprocess.height {
                log::warn!(
                    "dataset height {} differs from configured {}",
                    m.height,
                    cfg.preprocess.height
                );
                cfg.preprocess.height = m.height;
            }
            if let Some(s) = seed {
                cfg.hyperparams.seed = s;
            }
            let paths = CellPaths::new(&cfg.output_dir, &split.dataset_name, split.seed);
            let (summary, _) = train_cell::<f64>(&split, &split_alphabet(&split), &cfg, &paths)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            println!("outputs in {}", paths.dir.display());
        }
        Command::Evaluate {
            model,
            manifest,
            train,
            json,
        } => {
            let (params, alphabet, _): (Params, _, _) = load_model(&model)?;
            let (_, split) = load_split(&manifest)?;
            let samples = if train { &split.train } else { &split.test };
            let data = PreparedData::new(&split.dataset_name, samples, &alphabet)?;
            let report = evaluate_model(&params, &data)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("{}", wordocr::metrics::REPORT_CSV_HEADER);
                println!("{}", report.csv_row());
            }
        }
        Command::Decode {
            model,
            images,
            normalized,
        } => {
            if images.is_empty() {
                return Err(Error::Config("no images given".into()));
            }
            let (params, alphabet, _): (Params, _, _) = load_model(&model)?;
            let pcfg = PreprocessConfig {
                height: params.dims().input_size,
                ..PreprocessConfig::default()
            };
            for path in &images {
                let img = read_gray(path)?;
                let img = if normalized { img } else { preprocess_word(&img, &pcfg)? };
                println!("{}\t{}", path.display(), recognize(&params, &alphabet, &img)?);
            }
        }
        Command::Matrix { cfg, jobs } => {
            let cfg = resolve_config(&cfg)?;
            let outcome = run_matrix(&cfg, jobs)?;
            println!("{}\n{}", outcome.best.render(), outcome.mean.render());
            let failed: Vec<String> = outcome
                .failures()
                .map(|c| format!("{} seed {}: {}", c.dataset_name, c.seed, c.result.as_ref().unwrap_err()))
                .collect();
            if !failed.is_empty() {
                for f in &failed {
                    eprintln!("failed: {f}");
                }
                return Err(Error::CellsFailed(failed.len()));
            }
        }
        Command::Report { dir } => {
            let (best, mean, plot) = load_report(&dir)?;
            for (name, text) in [
                ("results_best.csv", best.to_csv()),
                ("results_mean.csv", mean.to_csv()),
                ("plot_data.csv", plot),
            ] {
                let path = dir.join(name);
                std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
            }
            println!("{}\n{}", best.render(), mean.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
