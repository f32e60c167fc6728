//! Corpus handling, synthetic word-image generation and the seeded 80/20
//! experiment splits.

mod alphabet;
mod corpus;
mod manifest;
mod render;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use alphabet::{build_alphabet, Alphabet, BLANK};
pub use corpus::{load_corpus, Corpus, BUNDLED_FRENCH_5000};
pub use manifest::{load_split, write_split, DatasetManifest, ManifestEntry, Partition};
pub use render::{
    render_page, render_page_with_boxes, render_word, FontFace, FontSpec, PageLayout, WordBox, BUNDLED_PREFIX,
    RENDER_DPI,
};

use crate::error::{Error, Result};
use crate::imaging::{preprocess_page, preprocess_word, GrayImage, PreprocessConfig};

/// Name of the dataset pooling every font.
pub const ALL_FONTS: &str = "all";

/// Identifies the shuffle used for splits so manifests stay interpretable.
pub const SHUFFLE_ALGORITHM: &str = "chacha8/rand-0.9-fisher-yates";

/// Smallest frame count a CTC path for `word` can use: one frame per
/// character plus one blank between each pair of equal neighbours.
pub fn min_frames(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    chars.len() + chars.windows(2).filter(|w| w[0] == w[1]).count()
}

/// A height-normalized word image with its transcript.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: Arc<GrayImage>,
    pub transcript: String,
    pub font: String,
    pub word_id: usize,
}

impl Sample {
    pub fn new(
        image: GrayImage,
        transcript: impl Into<String>,
        font: impl Into<String>,
        word_id: usize,
    ) -> Result<Self> {
        let transcript = transcript.into();
        if transcript.is_empty() {
            return Err(Error::ZeroLengthTarget(word_id));
        }
        let required = min_frames(&transcript);
        if image.width() < required {
            return Err(Error::SampleTooNarrow {
                word: transcript,
                width: image.width(),
                required,
            });
        }
        Ok(Self {
            image: Arc::new(image),
            transcript,
            font: font.into(),
            word_id,
        })
    }

    /// Identity used for split disjointness.
    pub fn key(&self) -> (usize, &str) {
        (self.word_id, &self.font)
    }
}

/// One seeded train/test partition of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub dataset_name: String,
    pub seed: u64,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Every character of both partitions' transcripts.
pub fn split_alphabet(split: &DatasetSplit) -> Alphabet {
    Alphabet::from_chars(split.train.iter().chain(&split.test).flat_map(|s| s.transcript.chars()))
}

/// Number of training samples out of `n`: 80 %, rounded toward train.
pub fn train_count(n: usize) -> usize {
    (4 * n).div_ceil(5)
}

/// Deterministic seeded shuffle, then the first 80 % (rounded up) to train.
pub fn split_80_20(dataset_name: &str, samples: &[Sample], seed: u64) -> Result<DatasetSplit> {
    if samples.len() < 5 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = train_count(samples.len());
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok(DatasetSplit {
        dataset_name: dataset_name.to_string(),
        seed,
        train: pick(&order[..n_train]),
        test: pick(&order[n_train..]),
    })
}

/// How raw word images are produced before standardization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    /// Each word rendered on its own canvas.
    #[default]
    Word,
    /// Words typeset onto pages, then recovered by line/word segmentation.
    Page,
}

impl std::fmt::Display for RenderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RenderMode::Word => "word",
            RenderMode::Page => "page",
        })
    }
}

/// Words per typeset line and lines per page in page mode.
pub const PAGE_WORDS_PER_LINE: usize = 6;
pub const PAGE_LINES: usize = 25;

/// Renders and standardizes every corpus word in one face.
pub fn render_samples(
    corpus: &Corpus,
    face: &FontFace,
    cfg: &PreprocessConfig,
    mode: RenderMode,
) -> Result<Vec<Sample>> {
    match mode {
        RenderMode::Word => corpus
            .words()
            .par_iter()
            .enumerate()
            .map(|(id, w)| {
                let img = preprocess_word(&render_word(w, face)?, cfg)?;
                Sample::new(img, w.clone(), face.name(), id)
            })
            .collect(),
        RenderMode::Page => render_samples_paged(corpus, face, cfg),
    }
}

fn render_samples_paged(corpus: &Corpus, face: &FontFace, cfg: &PreprocessConfig) -> Result<Vec<Sample>> {
    let per_page = PAGE_WORDS_PER_LINE * PAGE_LINES;
    let chunks: Vec<(usize, &[String])> = corpus
        .words()
        .chunks(per_page)
        .enumerate()
        .map(|(i, c)| (i * per_page, c))
        .collect();
    let pages: Vec<Vec<Sample>> = chunks
        .par_iter()
        .map(|&(offset, words)| {
            let lines: Vec<Vec<String>> = words.chunks(PAGE_WORDS_PER_LINE).map(|l| l.to_vec()).collect();
            let page = render_page(&lines, face, PageLayout::default())?;
            let segmented = preprocess_page(&page, cfg)?;
            let found: usize = segmented.iter().map(Vec::len).sum();
            if segmented.len() != lines.len() || found != words.len() {
                return Err(Error::InvalidImage(format!(
                    "page at word {offset} in {}: segmented {} lines / {found} words, expected {} / {}",
                    face.name(),
                    segmented.len(),
                    lines.len(),
                    words.len()
                )));
            }
            segmented
                .into_iter()
                .flatten()
                .zip(words)
                .enumerate()
                .map(|(k, (img, w))| Sample::new(img, w.clone(), face.name(), offset + k))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(pages.into_iter().flatten().collect())
}

/// Seeded splits for every font plus, with more than one font, the pooled
/// "all" dataset. Output order: for each seed, fonts in order then "all".
pub fn build_datasets(
    corpus: &Corpus,
    fonts: &[FontSpec],
    seeds: &[u64],
    cfg: &PreprocessConfig,
    mode: RenderMode,
) -> Result<Vec<DatasetSplit>> {
    if fonts.is_empty() {
        return Err(Error::Config("at least one font is required".into()));
    }
    let per_font: Vec<(String, Vec<Sample>)> = fonts
        .iter()
        .map(|spec| {
            let face = FontFace::load(spec)?;
            Ok((spec.name.clone(), render_samples(corpus, &face, cfg, mode)?))
        })
        .collect::<Result<_>>()?;
    let pooled: Vec<Sample> = if fonts.len() > 1 {
        per_font.iter().flat_map(|(_, s)| s.iter().cloned()).collect()
    } else {
        Vec::new()
    };

    let mut out = Vec::with_capacity(seeds.len() * (fonts.len() + 1));
    for &seed in seeds {
        for (name, samples) in &per_font {
            out.push(split_80_20(name, samples, seed)?);
        }
        if !pooled.is_empty() {
            out.push(split_80_20(ALL_FONTS, &pooled, seed)?);
        }
    }
    Ok(out)
}

/// The full protocol: six fonts and five repetition seeds, 35 splits.
pub fn build_experiment_datasets(
    corpus: &Corpus,
    fonts: &[FontSpec],
    seeds: &[u64],
    cfg: &PreprocessConfig,
    mode: RenderMode,
) -> Result<Vec<DatasetSplit>> {
    if fonts.len() != 6 {
        return Err(Error::Config(format!(
            "expected exactly six fonts, got {}",
            fonts.len()
        )));
    }
    if seeds.len() != 5 {
        return Err(Error::Config(format!(
            "expected five repetition seeds, got {}",
            seeds.len()
        )));
    }
    build_datasets(corpus, fonts, seeds, cfg, mode)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn dummy_samples(n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| Sample::new(GrayImage::filled(4, 2, 0).unwrap(), "ab", "f", i).unwrap())
            .collect()
    }

    #[test]
    fn ten_samples_split_eight_two() {
        let s = split_80_20("f", &dummy_samples(10), 7).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        assert_eq!(train_count(5), 4);
        assert_eq!(train_count(7), 6);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let samples = dummy_samples(53);
        let a = split_80_20("f", &samples, 42).unwrap();
        let b = split_80_20("f", &samples, 42).unwrap();
        assert_eq!(a, b);
        let train: HashSet<usize> = a.train.iter().map(|s| s.word_id).collect();
        let test: HashSet<usize> = a.test.iter().map(|s| s.word_id).collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(train.len() + test.len(), 53);
    }

    #[test]
    fn different_seeds_give_different_tests() {
        let samples = dummy_samples(5000);
        let a = split_80_20("f", &samples, 1).unwrap();
        let b = split_80_20("f", &samples, 2).unwrap();
        let ta: Vec<usize> = a.test.iter().map(|s| s.word_id).collect();
        let tb: Vec<usize> = b.test.iter().map(|s| s.word_id).collect();
        assert_ne!(ta, tb);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            split_80_20("f", &dummy_samples(4), 0),
            Err(Error::TooFewSamples(4))
        ));
    }

    #[test]
    fn sample_invariants() {
        let img = GrayImage::filled(3, 2, 0).unwrap();
        assert!(Sample::new(img.clone(), "", "f", 0).is_err());
        assert_eq!(min_frames("aab"), 4);
        assert!(matches!(
            Sample::new(img, "aab", "f", 0),
            Err(Error::SampleTooNarrow { required: 4, .. })
        ));
    }

    #[test]
    fn rendered_samples_have_configured_height() {
        let corpus = Corpus::from_words(["été", "garçon", "le"]).unwrap();
        let face = FontFace::load(&FontSpec::paper_set()[0]).unwrap();
        let cfg = PreprocessConfig::default();
        let samples = render_samples(&corpus, &face, &cfg, RenderMode::Word).unwrap();
        assert_eq!(samples.len(), 3);
        for s in &samples {
            assert_eq!(s.image.height(), 32);
            assert!(s.image.data().iter().any(|&v| v > 0));
        }
    }

    #[test]
    fn dataset_counts_and_font_mix() {
        let corpus = Corpus::bundled_french().truncated(40).unwrap();
        let fonts = FontSpec::paper_set();
        let cfg = PreprocessConfig::default();
        let splits = build_experiment_datasets(&corpus, &fonts, &[1, 2, 3, 4, 5], &cfg, RenderMode::Word).unwrap();
        assert_eq!(splits.len(), 35);
        for s in splits.iter().filter(|s| s.dataset_name == ALL_FONTS) {
            assert_eq!(s.len(), 240);
            let fonts_in_test: HashSet<&str> = s.test.iter().map(|x| x.font.as_str()).collect();
            assert_eq!(fonts_in_test.len(), 6);
        }
        assert!(build_experiment_datasets(&corpus, &fonts[..2], &[1, 2, 3, 4, 5], &cfg, RenderMode::Word).is_err());
    }
}
