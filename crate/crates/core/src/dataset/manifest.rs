//! On-disk dataset layout: PGM images under `images/<font>/` plus one JSON
//! manifest per (dataset, seed) split.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetSplit, RenderMode, Sample, SHUFFLE_ALGORITHM};
use crate::error::{Error, Result};
use crate::imaging::{read_gray, write_pgm};

pub const MANIFEST_FORMAT: &str = "wordocr-dataset/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub transcript: String,
    pub font: String,
    pub word_id: usize,
    pub split: Partition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub dataset_name: String,
    pub seed: u64,
    pub mode: RenderMode,
    pub height: usize,
    pub shuffle: String,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn manifest_file_name(dataset_name: &str, seed: u64) -> String {
        format!("{dataset_name}_seed{seed}.json")
    }
}

fn image_rel_path(sample: &Sample) -> String {
    format!("images/{}/{:05}.pgm", sample.font, sample.word_id)
}

/// Writes the split's images (shared across splits of the same font) and its
/// manifest into `dir`; returns the manifest path.
pub fn write_split(dir: &Path, split: &DatasetSplit, mode: RenderMode, height: usize) -> Result<PathBuf> {
    let mut entries = Vec::with_capacity(split.len());
    for (part, samples) in [(Partition::Train, &split.train), (Partition::Test, &split.test)] {
        for s in samples.iter() {
            let rel = image_rel_path(s);
            let abs = dir.join(&rel);
            if let Some(parent) = abs.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            write_pgm(&abs, &s.image)?;
            entries.push(ManifestEntry {
                path: rel,
                transcript: s.transcript.clone(),
                font: s.font.clone(),
                word_id: s.word_id,
                split: part,
            });
        }
    }
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.into(),
        dataset_name: split.dataset_name.clone(),
        seed: split.seed,
        mode,
        height,
        shuffle: SHUFFLE_ALGORITHM.into(),
        entries,
    };
    let path = dir.join(DatasetManifest::manifest_file_name(&split.dataset_name, split.seed));
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads a manifest and its images back into a split.
pub fn load_split(manifest_path: &Path) -> Result<(DatasetManifest, DatasetSplit)> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(Error::Config(format!(
            "unsupported manifest format {}",
            manifest.format
        )));
    }
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let mut cache: HashMap<&str, Sample> = HashMap::new();
    let mut split = DatasetSplit {
        dataset_name: manifest.dataset_name.clone(),
        seed: manifest.seed,
        train: Vec::new(),
        test: Vec::new(),
    };
    for e in &manifest.entries {
        let sample = match cache.get(e.path.as_str()) {
            Some(s) => s.clone(),
            None => {
                let img = read_gray(&root.join(&e.path))?;
                if img.height() != manifest.height {
                    return Err(Error::InvalidImage(format!(
                        "{} has height {}, manifest says {}",
                        e.path,
                        img.height(),
                        manifest.height
                    )));
                }
                let s = Sample::new(img, e.transcript.clone(), e.font.clone(), e.word_id)?;
                cache.insert(&e.path, s.clone());
                s
            }
        };
        match e.split {
            Partition::Train => split.train.push(sample),
            Partition::Test => split.test.push(sample),
        }
    }
    Ok((manifest, split))
}
