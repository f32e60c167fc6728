use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Output width for a `width x height` raster rescaled to `target` rows,
/// `max(1, round(width * target / height))` with halves rounded up.
pub(crate) fn scaled_width(width: usize, height: usize, target: usize) -> usize {
    ((2 * width * target + height) / (2 * height)).max(1)
}

/// Source coordinate and interpolation weight for output index `i` under
/// half-pixel-centre alignment.
#[inline]
fn source_coord(i: usize, scale: f64, len: usize) -> (usize, usize, f64) {
    let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, s - i0 as f64)
}

/// Bilinear resample of a bilevel word image to exactly `target` rows,
/// preserving aspect ratio up to rounding. Ink maps to 255, background to 0.
pub fn normalize_height(word: &BinaryImage, target: usize) -> Result<GrayImage> {
    if target == 0 {
        return Err(Error::Config("normalized height must be positive".into()));
    }
    let (w, h) = (word.width(), word.height());
    let out_w = scaled_width(w, h, target);
    let sy = h as f64 / target as f64;
    let sx = w as f64 / out_w as f64;

    let cols: Vec<_> = (0..out_w).map(|x| source_coord(x, sx, w)).collect();
    let mut data = Vec::with_capacity(out_w * target);
    for y in 0..target {
        let (y0, y1, fy) = source_coord(y, sy, h);
        for &(x0, x1, fx) in &cols {
            let top = word.get(y0, x0) as f64 * (1.0 - fx) + word.get(y0, x1) as f64 * fx;
            let bottom = word.get(y1, x0) as f64 * (1.0 - fx) + word.get(y1, x1) as f64 * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            data.push((v * 255.0).round() as u8);
        }
    }
    GrayImage::new(out_w, target, data)
}
