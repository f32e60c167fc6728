use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{load_corpus, Corpus, FontSpec, RenderMode};
use crate::error::{Error, Result};
use crate::imaging::PreprocessConfig;
use crate::trainer::{Hyperparams, NetConfig, StopPolicy};

/// Named experiment scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Full protocol: 5000 words, six fonts, five seeds, 80 epochs, N = 100.
    #[default]
    Paper,
    /// Single-machine scale: the 300 most frequent words, two fonts, three
    /// seeds, 40 epochs, N = 64.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (expected paper or desk)"
            ))),
        }
    }
}

pub const DESK_WORDS: usize = 300;
pub const DESK_FONTS: [&str; 2] = ["Arial_14", "TNR_14"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    /// Word list file; the bundled French list when absent.
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    /// Keep only the first this-many corpus words.
    #[serde(default)]
    pub corpus_words: Option<usize>,
    pub fonts: Vec<FontSpec>,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub render_mode: RenderMode,
    pub net: NetConfig,
    pub hyperparams: Hyperparams,
    /// One split and one training run per seed and dataset.
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn paper() -> Self {
        Self {
            preset: Preset::Paper,
            corpus: None,
            corpus_words: None,
            fonts: FontSpec::paper_set(),
            preprocess: PreprocessConfig::default(),
            render_mode: RenderMode::Word,
            net: NetConfig { hidden: 100 },
            hyperparams: Hyperparams::default(),
            seeds: vec![1, 2, 3, 4, 5],
            output_dir: PathBuf::from("runs/paper"),
        }
    }

    pub fn desk() -> Self {
        Self {
            preset: Preset::Desk,
            corpus_words: Some(DESK_WORDS),
            fonts: FontSpec::paper_set()
                .into_iter()
                .filter(|f| DESK_FONTS.contains(&f.name.as_str()))
                .collect(),
            net: NetConfig { hidden: 64 },
            hyperparams: Hyperparams {
                max_epochs: 40,
                ..Hyperparams::default()
            },
            seeds: vec![1, 2, 3],
            output_dir: PathBuf::from("runs/desk"),
            ..Self::paper()
        }
    }

    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Paper => Self::paper(),
            Preset::Desk => Self::desk(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Field checks plus the preset's font and seed counts.
    pub fn validate(&self) -> Result<()> {
        self.validate_fields()?;
        if self.preset == Preset::Paper && self.fonts.len() != 6 {
            return Err(Error::Config(format!(
                "paper preset needs six fonts, got {}",
                self.fonts.len()
            )));
        }
        if self.preset == Preset::Paper && self.seeds.len() != 5 {
            return Err(Error::Config(format!(
                "paper preset needs five seeds, got {}",
                self.seeds.len()
            )));
        }
        Ok(())
    }

    /// Checks that hold for any subset of the experiment, such as a single
    /// seed or font.
    pub fn validate_fields(&self) -> Result<()> {
        self.hyperparams.validate()?;
        if self.net.hidden == 0 {
            return Err(Error::Config("net.hidden must be at least 1".into()));
        }
        if self.fonts.is_empty() {
            return Err(Error::Config("at least one font is required".into()));
        }
        let names: HashSet<&str> = self.fonts.iter().map(|f| f.name.as_str()).collect();
        if names.len() != self.fonts.len() || names.contains(crate::dataset::ALL_FONTS) {
            return Err(Error::Config("font names must be distinct and not \"all\"".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.corpus_words == Some(0) {
            return Err(Error::Config("corpus_words must be at least 1".into()));
        }
        if self.preprocess.height == 0 {
            return Err(Error::Config("preprocess.height must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        let corpus = match &self.corpus {
            Some(path) => load_corpus(path)?,
            None => Corpus::bundled_french(),
        };
        match self.corpus_words {
            Some(n) => corpus.truncated(n),
            None => Ok(corpus),
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn early_stop(mut self) -> Self {
        self.hyperparams.stop_policy = StopPolicy::early_stop();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        let p = ExperimentConfig::paper();
        p.validate().unwrap();
        assert_eq!((p.fonts.len(), p.seeds.len(), p.net.hidden), (6, 5, 100));
        assert_eq!(p.hyperparams.max_epochs, 80);
        let d = ExperimentConfig::desk();
        d.validate().unwrap();
        assert_eq!((d.fonts.len(), d.net.hidden, d.hyperparams.max_epochs), (2, 64, 40));
        assert_eq!(d.load_corpus().unwrap().len(), DESK_WORDS);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = ExperimentConfig::paper();
        c.seeds = vec![1, 2, 3, 4, 4];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::paper();
        c.fonts.pop();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::desk();
        c.fonts[1].name = c.fonts[0].name.clone();
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip_and_hash() {
        let c = ExperimentConfig::desk();
        let s = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash().unwrap(), c.hash().unwrap());
        assert_ne!(ExperimentConfig::paper().hash().unwrap(), c.hash().unwrap());
        assert_eq!("desk".parse::<Preset>().unwrap(), Preset::Desk);
        assert!("big".parse::<Preset>().is_err());
    }
}
