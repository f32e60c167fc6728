//! Anti-aliased word and page rendering from scalable font files.

use std::path::PathBuf;

use ab_glyph::{Font, FontVec, GlyphId, PxScale, ScaleFont};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Rendering resolution; a 14 pt face renders at about 18.7 px.
pub const RENDER_DPI: f32 = 96.0;

/// Blank pixels around a rendered word or page.
pub const MARGIN_PX: usize = 2;

/// Prefix selecting a font compiled into the library instead of a file.
pub const BUNDLED_PREFIX: &str = "bundled:";

const BUNDLED_FACES: &[(&str, &[u8])] = &[
    ("DejaVuSans.ttf", include_bytes!("../../assets/fonts/DejaVuSans.ttf")),
    (
        "DejaVuSans-Bold.ttf",
        include_bytes!("../../assets/fonts/DejaVuSans-Bold.ttf"),
    ),
    (
        "DejaVuSansMono.ttf",
        include_bytes!("../../assets/fonts/DejaVuSansMono.ttf"),
    ),
    ("DejaVuSerif.ttf", include_bytes!("../../assets/fonts/DejaVuSerif.ttf")),
    (
        "DejaVuSerif-Bold.ttf",
        include_bytes!("../../assets/fonts/DejaVuSerif-Bold.ttf"),
    ),
    ("STIXGeneral.ttf", include_bytes!("../../assets/fonts/STIXGeneral.ttf")),
];

/// A named face at a point size. `face_file` is a filesystem path or
/// `bundled:<file name>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FontSpec {
    pub name: String,
    pub face_file: String,
    pub size: f32,
}

impl FontSpec {
    pub fn new(name: impl Into<String>, face_file: impl Into<String>, size: f32) -> Self {
        Self {
            name: name.into(),
            face_file: face_file.into(),
            size,
        }
    }

    /// The six dataset labels of the reference experiment, each backed by a
    /// freely licensed bundled face of similar design.
    pub fn paper_set() -> Vec<FontSpec> {
        [
            ("Arial_14", "DejaVuSans.ttf"),
            ("Calibri_14", "DejaVuSans-Bold.ttf"),
            ("Cambria_14", "DejaVuSerif-Bold.ttf"),
            ("Georgia_14", "DejaVuSerif.ttf"),
            ("LucidaFax_14", "DejaVuSansMono.ttf"),
            ("TNR_14", "STIXGeneral.ttf"),
        ]
        .into_iter()
        .map(|(name, file)| FontSpec::new(name, format!("{BUNDLED_PREFIX}{file}"), 14.0))
        .collect()
    }

    pub fn pixel_size(&self) -> f32 {
        self.size * RENDER_DPI / 72.0
    }

    fn load_bytes(&self) -> Result<Vec<u8>> {
        if let Some(file) = self.face_file.strip_prefix(BUNDLED_PREFIX) {
            return BUNDLED_FACES
                .iter()
                .find(|(n, _)| *n == file)
                .map(|(_, bytes)| bytes.to_vec())
                .ok_or_else(|| Error::Font(format!("no bundled face named {file}")));
        }
        let path = PathBuf::from(&self.face_file);
        std::fs::read(&path).map_err(|e| Error::io(path, e))
    }
}

/// A parsed font face ready for rasterization.
pub struct FontFace {
    spec: FontSpec,
    font: FontVec,
}

impl std::fmt::Debug for FontFace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FontFace").field("spec", &self.spec).finish()
    }
}

struct PlacedGlyph {
    id: GlyphId,
    x: f32,
}

impl FontFace {
    pub fn load(spec: &FontSpec) -> Result<Self> {
        if !(spec.size > 0.0) {
            return Err(Error::Config(format!("font {} has non-positive size", spec.name)));
        }
        let bytes = spec.load_bytes()?;
        let font = FontVec::try_from_vec(bytes).map_err(|e| Error::Font(format!("{}: {e}", spec.name)))?;
        Ok(Self {
            spec: spec.clone(),
            font,
        })
    }

    pub fn spec(&self) -> &FontSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    fn scale(&self) -> PxScale {
        PxScale::from(self.spec.pixel_size())
    }

    fn glyph_id(&self, c: char) -> Result<GlyphId> {
        let id = self.font.glyph_id(c);
        if id.0 == 0 {
            return Err(Error::Glyph {
                ch: c,
                font: self.spec.name.clone(),
            });
        }
        Ok(id)
    }

    /// Horizontal layout with kerning; returns glyph positions and the
    /// advance width.
    fn layout(&self, text: &str) -> Result<(Vec<PlacedGlyph>, f32)> {
        let scaled = self.font.as_scaled(self.scale());
        let mut caret = 0.0f32;
        let mut prev: Option<GlyphId> = None;
        let mut placed = Vec::new();
        for c in text.chars() {
            let id = if c == ' ' {
                self.font.glyph_id(' ')
            } else {
                self.glyph_id(c)?
            };
            if let Some(p) = prev {
                caret += scaled.kern(p, id);
            }
            placed.push(PlacedGlyph { id, x: caret });
            caret += scaled.h_advance(id);
            prev = Some(id);
        }
        Ok((placed, caret))
    }

    fn ascent(&self) -> f32 {
        self.font.as_scaled(self.scale()).ascent()
    }

    fn line_height(&self) -> f32 {
        let s = self.font.as_scaled(self.scale());
        s.ascent() - s.descent() + s.line_gap()
    }

    /// Accumulates glyph coverage into `canvas` (width `canvas_w`) with the
    /// text baseline at `baseline` and its origin at `x0`.
    fn draw_text(&self, placed: &[PlacedGlyph], x0: f32, baseline: f32, canvas: &mut [f32], canvas_w: usize) {
        let canvas_h = canvas.len() / canvas_w;
        for g in placed {
            let glyph =
                g.id.with_scale_and_position(self.scale(), ab_glyph::point(x0 + g.x, baseline));
            if let Some(outlined) = self.font.outline_glyph(glyph) {
                let b = outlined.px_bounds();
                outlined.draw(|x, y, cov| {
                    let px = b.min.x as i64 + x as i64;
                    let py = b.min.y as i64 + y as i64;
                    if px >= 0 && py >= 0 && (px as usize) < canvas_w && (py as usize) < canvas_h {
                        let cell = &mut canvas[py as usize * canvas_w + px as usize];
                        *cell = (*cell + cov).min(1.0);
                    }
                });
            }
        }
    }

    /// Pixel extent `(min_x, min_y, max_x, max_y)` of laid-out glyphs,
    /// relative to origin and baseline.
    fn ink_bounds(&self, placed: &[PlacedGlyph]) -> Option<(f32, f32, f32, f32)> {
        let mut acc: Option<(f32, f32, f32, f32)> = None;
        for g in placed {
            let glyph = g.id.with_scale_and_position(self.scale(), ab_glyph::point(g.x, 0.0));
            if let Some(outlined) = self.font.outline_glyph(glyph) {
                let b = outlined.px_bounds();
                acc = Some(match acc {
                    None => (b.min.x, b.min.y, b.max.x, b.max.y),
                    Some((a, bb, c, d)) => (a.min(b.min.x), bb.min(b.min.y), c.max(b.max.x), d.max(b.max.y)),
                });
            }
        }
        acc
    }
}

fn coverage_to_gray(canvas: &[f32], width: usize) -> Result<GrayImage> {
    let data = canvas.iter().map(|&c| 255 - (c * 255.0).round() as u8).collect();
    GrayImage::new(width, canvas.len() / width, data)
}

/// Dark-on-light anti-aliased raster of `word` with a blank margin.
pub fn render_word(word: &str, face: &FontFace) -> Result<GrayImage> {
    let (placed, _) = face.layout(word)?;
    let (min_x, min_y, max_x, max_y) = face
        .ink_bounds(&placed)
        .ok_or_else(|| Error::Font(format!("{word:?} has no visible glyphs in {}", face.name())))?;
    let x0 = MARGIN_PX as f32 - min_x.floor();
    let baseline = MARGIN_PX as f32 - min_y.floor();
    let width = (max_x.ceil() - min_x.floor()) as usize + 2 * MARGIN_PX;
    let height = (max_y.ceil() - min_y.floor()) as usize + 2 * MARGIN_PX;
    let mut canvas = vec![0.0f32; width * height];
    face.draw_text(&placed, x0, baseline, &mut canvas, width);
    coverage_to_gray(&canvas, width)
}

/// Layout knobs for synthetic pages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageLayout {
    /// Extra blank rows between consecutive line boxes.
    pub line_spacing_px: usize,
    /// Space between words, in pixels.
    pub word_spacing_px: usize,
}

impl Default for PageLayout {
    fn default() -> Self {
        Self {
            line_spacing_px: 6,
            word_spacing_px: 12,
        }
    }
}

/// Pixel box `[row0, row1) x [col0, col1)` that contains a word's ink on a
/// rendered page.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBox {
    pub line: usize,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

/// Renders lines of words top to bottom as one page.
pub fn render_page(lines: &[Vec<String>], face: &FontFace, layout: PageLayout) -> Result<GrayImage> {
    render_page_with_boxes(lines, face, layout).map(|(img, _)| img)
}

/// Like [`render_page`], also returning where every word was drawn.
pub fn render_page_with_boxes(
    lines: &[Vec<String>],
    face: &FontFace,
    layout: PageLayout,
) -> Result<(GrayImage, Vec<Vec<WordBox>>)> {
    let mut laid = Vec::with_capacity(lines.len());
    let mut page_w = 1usize;
    for line in lines {
        let mut words = Vec::with_capacity(line.len());
        let mut x = 0.0f32;
        for (i, w) in line.iter().enumerate() {
            if i > 0 {
                x += layout.word_spacing_px as f32;
            }
            let (placed, _) = face.layout(w)?;
            let bounds = face
                .ink_bounds(&placed)
                .ok_or_else(|| Error::Font(format!("{w:?} has no visible glyphs")))?;
            // place the word so that its ink starts at x
            let origin = (x - bounds.0).round();
            x = origin + bounds.2;
            words.push((placed, origin, bounds));
        }
        page_w = page_w.max(x.ceil() as usize + 1);
        laid.push(words);
    }
    let pitch = face.line_height().ceil() as usize + layout.line_spacing_px;
    let width = page_w + 2 * MARGIN_PX;
    let height = (pitch * lines.len()).max(1) + 2 * MARGIN_PX;
    let mut canvas = vec![0.0f32; width * height];
    let mut boxes = Vec::with_capacity(laid.len());
    for (li, words) in laid.iter().enumerate() {
        let baseline = (MARGIN_PX + li * pitch) as f32 + face.ascent().ceil();
        let mut line_boxes = Vec::with_capacity(words.len());
        for (placed, origin, (x0, y0, x1, y1)) in words {
            let left = MARGIN_PX as f32 + origin;
            face.draw_text(placed, left, baseline, &mut canvas, width);
            let clamp = |v: f32, hi: usize| (v.max(0.0) as usize).min(hi);
            line_boxes.push(WordBox {
                line: li,
                rows: (
                    clamp((baseline + y0).floor(), height),
                    clamp((baseline + y1).ceil(), height),
                ),
                cols: (clamp((left + x0).floor(), width), clamp((left + x1).ceil(), width)),
            });
        }
        boxes.push(line_boxes);
    }
    Ok((coverage_to_gray(&canvas, width)?, boxes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face(file: &str) -> FontFace {
        FontFace::load(&FontSpec::new("t", format!("{BUNDLED_PREFIX}{file}"), 14.0)).unwrap()
    }

    #[test]
    fn rendering_is_deterministic_and_has_margin() {
        let f = face("DejaVuSans.ttf");
        let a = render_word("été", &f).unwrap();
        let b = render_word("été", &f).unwrap();
        assert_eq!(a, b);
        let w = a.width();
        for c in 0..w {
            assert_eq!(a.get(0, c), 255);
            assert_eq!(a.get(a.height() - 1, c), 255);
        }
        assert!(a.data().iter().any(|&v| v < 128));
    }

    #[test]
    fn distinct_faces_differ() {
        let a = render_word("maison", &face("DejaVuSans.ttf")).unwrap();
        let b = render_word("maison", &face("DejaVuSerif.ttf")).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn missing_glyph_names_character() {
        let err = render_word("a\u{10FFFD}", &face("DejaVuSans.ttf")).unwrap_err();
        assert!(matches!(err, Error::Glyph { ch: '\u{10FFFD}', .. }));
    }

    #[test]
    fn unknown_bundled_face() {
        assert!(FontFace::load(&FontSpec::new("x", "bundled:nope.ttf", 14.0)).is_err());
        assert!(FontFace::load(&FontSpec::new("x", "bundled:DejaVuSans.ttf", 0.0)).is_err());
    }

    #[test]
    fn paper_set_names() {
        let names: Vec<_> = FontSpec::paper_set().into_iter().map(|f| f.name).collect();
        assert_eq!(
            names,
            [
                "Arial_14",
                "Calibri_14",
                "Cambria_14",
                "Georgia_14",
                "LucidaFax_14",
                "TNR_14"
            ]
        );
        for spec in FontSpec::paper_set() {
            FontFace::load(&spec).unwrap();
        }
    }
}
