//! Raster types and the page-to-word preprocessing pipeline: Otsu
//! binarization, projection profiles, zero-run line/word segmentation,
//! unit-padded cropping and height normalization.

mod io;
mod normalize;
mod otsu;
mod pipeline;
mod segment;

pub use io::{read_gray, write_binary_pgm, write_gray, write_pgm};
pub use normalize::normalize_height;
pub use otsu::{between_class_variance_ratio, binarize, otsu_threshold};
pub use pipeline::{binarize_otsu, preprocess_page, preprocess_word, standardize_word, PreprocessConfig};
pub use segment::{
    axis_projection, find_content_runs, line_runs, segment_lines, segment_words, tight_crop_unit_pad, word_runs, Axis,
    PixelRun, Projection,
};

use crate::error::{Error, Result};

/// 8-bit grayscale raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} bytes for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    /// Photometric inverse, for light-on-dark sources.
    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 255 - v).collect(),
        }
    }

    /// Column `col` scaled into `[0, 1]`, top to bottom.
    pub fn column_unit<T: crate::Scalar>(&self, col: usize) -> impl Iterator<Item = T> + '_ {
        let scale = T::of(1.0 / 255.0);
        (0..self.height).map(move |r| T::of(self.get(r, col) as f64) * scale)
    }
}

/// Bilevel raster with `1` = ink, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} values for a {width}x{height} raster",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidImage(format!("binary pixel value {v}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn blank(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Sets a pixel; any non-zero `ink` is stored as `1`.
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ink: u8) {
        self.data[row * self.width + col] = u8::from(ink != 0);
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn transposed(&self) -> Self {
        let mut data = vec![0; self.data.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                data[c * self.height + r] = self.get(r, c);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            data,
        }
    }

    /// Sub-image covering rows `rows.0..rows.1` and columns `cols.0..cols.1`.
    pub fn crop(&self, rows: (usize, usize), cols: (usize, usize)) -> Result<Self> {
        if rows.0 >= rows.1 || cols.0 >= cols.1 || rows.1 > self.height || cols.1 > self.width {
            return Err(Error::InvalidImage(format!(
                "crop rows {rows:?} cols {cols:?} outside {}x{}",
                self.width, self.height
            )));
        }
        let w = cols.1 - cols.0;
        let mut data = Vec::with_capacity(w * (rows.1 - rows.0));
        for r in rows.0..rows.1 {
            let start = r * self.width + cols.0;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        Ok(Self {
            width: w,
            height: rows.1 - rows.0,
            data,
        })
    }

    /// Renders ink as black on white (`0`/`255`).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v == 1 { 0 } else { 255 }).collect(),
        }
    }
}
