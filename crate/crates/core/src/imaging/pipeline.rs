use serde::{Deserialize, Serialize};

use super::{
    binarize, normalize_height, otsu_threshold, segment_lines, segment_words, tight_crop_unit_pad, BinaryImage,
    GrayImage,
};
use crate::error::Result;

/// Knobs of the page/word preprocessing chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Normalized word height in pixels.
    pub height: usize,
    /// Profile values `<= epsilon` count as blank.
    pub epsilon: u32,
    /// Blank-column runs shorter than this do not separate words.
    pub gap_min: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            height: 32,
            epsilon: 0,
            gap_min: 7,
        }
    }
}

/// Otsu binarization with ink = dark side of the threshold.
pub fn binarize_otsu(img: &GrayImage) -> Result<BinaryImage> {
    let t = otsu_threshold(img)?;
    Ok(binarize(img, t))
}

/// Crop to ink with a one-pixel border, then rescale to the configured height.
pub fn standardize_word(word: &BinaryImage, cfg: &PreprocessConfig) -> Result<GrayImage> {
    normalize_height(&tight_crop_unit_pad(word)?, cfg.height)
}

/// Single-word image to network input raster.
pub fn preprocess_word(img: &GrayImage, cfg: &PreprocessConfig) -> Result<GrayImage> {
    standardize_word(&binarize_otsu(img)?, cfg)
}

/// Page image to height-normalized word images, grouped by line.
pub fn preprocess_page(img: &GrayImage, cfg: &PreprocessConfig) -> Result<Vec<Vec<GrayImage>>> {
    let page = binarize_otsu(img)?;
    segment_lines(&page, cfg.epsilon)
        .iter()
        .map(|line| {
            segment_words(line, cfg.epsilon, cfg.gap_min)
                .iter()
                .map(|w| standardize_word(w, cfg))
                .collect()
        })
        .collect()
}
