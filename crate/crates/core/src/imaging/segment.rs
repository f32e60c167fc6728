use serde::{Deserialize, Serialize};

use super::BinaryImage;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

/// Half-open index range `[start, end)` along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PixelRun {
    pub start: usize,
    pub end: usize,
    pub axis: Axis,
}

impl PixelRun {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

/// Ink count per row or per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub axis: Axis,
    pub sums: Vec<u32>,
}

pub fn axis_projection(img: &BinaryImage, axis: Axis) -> Projection {
    let sums = match axis {
        Axis::Rows => img
            .data()
            .chunks_exact(img.width())
            .map(|row| row.iter().map(|&v| v as u32).sum())
            .collect(),
        Axis::Columns => {
            let mut sums = vec![0u32; img.width()];
            for row in img.data().chunks_exact(img.width()) {
                for (s, &v) in sums.iter_mut().zip(row) {
                    *s += v as u32;
                }
            }
            sums
        }
    };
    Projection { axis, sums }
}

/// Maximal runs where the profile exceeds `epsilon`; entries `<= epsilon`
/// count as "almost zero" separators.
pub fn find_content_runs(p: &Projection, epsilon: u32) -> Vec<PixelRun> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &s) in p.sums.iter().enumerate() {
        match (s > epsilon, start) {
            (true, None) => start = Some(i),
            (false, Some(st)) => {
                runs.push(PixelRun {
                    start: st,
                    end: i,
                    axis: p.axis,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        runs.push(PixelRun {
            start: st,
            end: p.sums.len(),
            axis: p.axis,
        });
    }
    runs
}

/// Row runs of a page, one per text line.
///
/// Runs shorter than a quarter of the tallest run are detached accents or
/// i-dots; each joins the neighbouring run across the smaller gap (the run
/// below on a tie).
pub fn line_runs(page: &BinaryImage, epsilon: u32) -> Vec<PixelRun> {
    let mut runs = find_content_runs(&axis_projection(page, Axis::Rows), epsilon);
    let tallest = runs.iter().map(PixelRun::len).max().unwrap_or(0);
    while runs.len() > 1 {
        let Some(i) = runs.iter().position(|r| 4 * r.len() < tallest) else {
            break;
        };
        let gap_above = (i > 0).then(|| runs[i].start - runs[i - 1].end);
        let gap_below = runs.get(i + 1).map(|r| r.start - runs[i].end);
        let into = match (gap_above, gap_below) {
            (Some(a), Some(b)) if a < b => i - 1,
            (Some(_), None) => i - 1,
            _ => i + 1,
        };
        let (lo, hi) = (i.min(into), i.max(into));
        runs[lo].end = runs[hi].end;
        runs.remove(hi);
    }
    runs
}

/// Column runs of a line, with runs separated by fewer than `gap_min`
/// blank columns merged into one word.
pub fn word_runs(line: &BinaryImage, epsilon: u32, gap_min: usize) -> Vec<PixelRun> {
    let raw = find_content_runs(&axis_projection(line, Axis::Columns), epsilon);
    let mut merged: Vec<PixelRun> = Vec::with_capacity(raw.len());
    for run in raw {
        match merged.last_mut() {
            Some(prev) if run.start - prev.end < gap_min => prev.end = run.end,
            _ => merged.push(run),
        }
    }
    merged
}

/// Full-width strips, one per row run of the page.
pub fn segment_lines(page: &BinaryImage, epsilon: u32) -> Vec<BinaryImage> {
    line_runs(page, epsilon)
        .into_iter()
        .map(|r| {
            page.crop((r.start, r.end), (0, page.width()))
                .expect("runs lie inside the page")
        })
        .collect()
}

/// Full-height word strips of a line, left to right.
pub fn segment_words(line: &BinaryImage, epsilon: u32, gap_min: usize) -> Vec<BinaryImage> {
    word_runs(line, epsilon, gap_min)
        .into_iter()
        .map(|r| {
            line.crop((0, line.height()), (r.start, r.end))
                .expect("runs lie inside the line")
        })
        .collect()
}

/// Minimal ink bounding box surrounded by exactly one blank pixel on every
/// side.
pub fn tight_crop_unit_pad(word: &BinaryImage) -> Result<BinaryImage> {
    let rows = axis_projection(word, Axis::Rows).sums;
    let cols = axis_projection(word, Axis::Columns).sums;
    let top = rows.iter().position(|&s| s > 0).ok_or(Error::BlankWord)?;
    let bottom = rows.iter().rposition(|&s| s > 0).expect("ink present") + 1;
    let left = cols.iter().position(|&s| s > 0).expect("ink present");
    let right = cols.iter().rposition(|&s| s > 0).expect("ink present") + 1;

    let w = right - left + 2;
    let h = bottom - top + 2;
    let mut out = BinaryImage::blank(w, h)?;
    for r in top..bottom {
        for c in left..right {
            out.set(r - top + 1, c - left + 1, word.get(r, c));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proj(sums: &[u32]) -> Projection {
        Projection {
            axis: Axis::Rows,
            sums: sums.to_vec(),
        }
    }

    fn spans(runs: &[PixelRun]) -> Vec<(usize, usize)> {
        runs.iter().map(|r| (r.start, r.end)).collect()
    }

    #[test]
    fn runs_fixed_cases() {
        assert!(find_content_runs(&proj(&[0, 0, 0]), 0).is_empty());
        assert_eq!(
            spans(&find_content_runs(&proj(&[0, 5, 5, 0, 3, 0]), 0)),
            vec![(1, 3), (4, 5)]
        );
        assert!(find_content_runs(&proj(&[1, 1, 0, 1]), 1).is_empty());
        assert_eq!(spans(&find_content_runs(&proj(&[2, 2]), 0)), vec![(0, 2)]);
    }

    #[test]
    fn projection_of_single_pixel() {
        let mut img = BinaryImage::blank(5, 4).unwrap();
        img.set(2, 3, 1);
        let rows = axis_projection(&img, Axis::Rows);
        let cols = axis_projection(&img, Axis::Columns);
        assert_eq!(rows.sums, vec![0, 0, 1, 0]);
        assert_eq!(cols.sums, vec![0, 0, 0, 1, 0]);
        let zero = BinaryImage::blank(3, 3).unwrap();
        assert!(axis_projection(&zero, Axis::Columns).sums.iter().all(|&s| s == 0));
    }

    #[test]
    fn accent_above_a_line_stays_with_it() {
        let mut page = BinaryImage::blank(6, 30).unwrap();
        for c in 0..6 {
            for r in 10..20 {
                page.set(r, c, 1);
            }
        }
        page.set(8, 2, 1);
        page.set(22, 3, 1);
        for c in 0..6 {
            page.set(27, c, 1);
            page.set(28, c, 1);
            page.set(29, c, 1);
        }
        let runs = line_runs(&page, 0);
        // the 3-row band is a line of its own; the single dots are not
        assert_eq!(runs.len(), 2);
        assert_eq!((runs[0].start, runs[0].end), (8, 23));
        assert_eq!((runs[1].start, runs[1].end), (27, 30));
    }

    #[test]
    fn two_bands_give_two_lines() {
        let mut page = BinaryImage::blank(6, 10).unwrap();
        for c in 1..5 {
            page.set(1, c, 1);
            page.set(2, c, 1);
            page.set(6, c, 1);
        }
        let lines = segment_lines(&page, 0);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].height(), 2);
        assert_eq!(lines[1].height(), 1);
        assert_eq!(lines[0].width(), 6);
        assert!(segment_lines(&BinaryImage::blank(4, 4).unwrap(), 0).is_empty());
    }

    #[test]
    fn word_gap_merging() {
        // columns: ink at 0, gap 1, ink at 2, gap of 3, ink at 6
        let mut line = BinaryImage::blank(8, 2).unwrap();
        for c in [0, 2, 6] {
            line.set(0, c, 1);
        }
        assert_eq!(spans(&word_runs(&line, 0, 2)), vec![(0, 3), (6, 7)]);
        assert_eq!(spans(&word_runs(&line, 0, 1)), vec![(0, 1), (2, 3), (6, 7)]);
        assert_eq!(segment_words(&line, 0, 2).len(), 2);
        assert_eq!(spans(&word_runs(&line, 0, 4)), vec![(0, 7)]);
    }

    #[test]
    fn crop_single_pixel() {
        let mut img = BinaryImage::blank(5, 5).unwrap();
        img.set(3, 1, 1);
        let out = tight_crop_unit_pad(&img).unwrap();
        assert_eq!((out.width(), out.height()), (3, 3));
        assert_eq!(out.data(), &[0, 0, 0, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn crop_full_ink_grows_by_two() {
        let img = BinaryImage::new(3, 2, vec![1; 6]).unwrap();
        let out = tight_crop_unit_pad(&img).unwrap();
        assert_eq!((out.width(), out.height()), (5, 4));
        assert_eq!(out.ink_count(), 6);
    }

    #[test]
    fn crop_blank_word_errors() {
        let img = BinaryImage::blank(3, 3).unwrap();
        assert!(matches!(tight_crop_unit_pad(&img), Err(Error::BlankWord)));
    }
}
