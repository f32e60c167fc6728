use proptest::prelude::*;
use wordocr::dataset::{render_word, FontFace, FontSpec};
use wordocr::imaging::{
    axis_projection, binarize, binarize_otsu, find_content_runs, normalize_height, otsu_threshold, segment_lines,
    segment_words, tight_crop_unit_pad, Axis, BinaryImage, GrayImage, PreprocessConfig,
};

fn binary(max_w: usize, max_h: usize) -> impl Strategy<Value = BinaryImage> {
    (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u8..=1, w * h).prop_map(move |d| BinaryImage::new(w, h, d).unwrap())
    })
}

fn with_ink(max_w: usize, max_h: usize) -> impl Strategy<Value = BinaryImage> {
    binary(max_w, max_h).prop_filter("needs ink", |b| b.ink_count() > 0)
}

proptest! {
    #[test]
    fn projections_count_every_ink_pixel(img in binary(40, 40)) {
        for axis in [Axis::Rows, Axis::Columns] {
            let p = axis_projection(&img, axis);
            prop_assert_eq!(p.sums.iter().map(|&s| s as usize).sum::<usize>(), img.ink_count());
        }
        prop_assert_eq!(axis_projection(&img, Axis::Rows).sums.len(), img.height());
        prop_assert_eq!(axis_projection(&img, Axis::Columns).sums.len(), img.width());
    }

    #[test]
    fn transposing_swaps_projections(img in binary(30, 30)) {
        prop_assert_eq!(
            axis_projection(&img, Axis::Rows).sums,
            axis_projection(&img.transposed(), Axis::Columns).sums
        );
    }

    #[test]
    fn runs_are_sound(img in binary(50, 8), epsilon in 0u32..4) {
        let p = axis_projection(&img, Axis::Columns);
        let runs = find_content_runs(&p, epsilon);
        let mut covered = vec![false; p.sums.len()];
        for r in &runs {
            prop_assert!(r.start < r.end);
            for i in r.start..r.end {
                covered[i] = true;
            }
        }
        for (i, &s) in p.sums.iter().enumerate() {
            prop_assert_eq!(covered[i], s > epsilon, "index {}", i);
        }
        for w in runs.windows(2) {
            prop_assert!(w[0].end < w[1].start);
        }
    }

    #[test]
    fn unit_pad_crop_has_blank_border_and_is_idempotent(img in with_ink(25, 25)) {
        let c = tight_crop_unit_pad(&img).unwrap();
        let (h, w) = (c.height(), c.width());
        for col in 0..w {
            prop_assert_eq!(c.get(0, col), 0);
            prop_assert_eq!(c.get(h - 1, col), 0);
        }
        for row in 0..h {
            prop_assert_eq!(c.get(row, 0), 0);
            prop_assert_eq!(c.get(row, w - 1), 0);
        }
        prop_assert!((0..w).any(|col| c.get(1, col) == 1));
        prop_assert!((0..w).any(|col| c.get(h - 2, col) == 1));
        prop_assert!((0..h).any(|row| c.get(row, 1) == 1));
        prop_assert!((0..h).any(|row| c.get(row, w - 2) == 1));
        prop_assert_eq!(c.ink_count(), img.ink_count());
        prop_assert_eq!(tight_crop_unit_pad(&c).unwrap(), c);
    }

    #[test]
    fn normalized_height_is_exact(img in binary(40, 40), target in 1usize..64) {
        let out = normalize_height(&img, target).unwrap();
        prop_assert_eq!(out.height(), target);
        let expected = ((img.width() * target) as f64 / img.height() as f64).round().max(1.0) as usize;
        prop_assert_eq!(out.width(), expected);
    }

    #[test]
    fn binarize_splits_at_threshold(data in prop::collection::vec(any::<u8>(), 1..200), t in 0u8..=254) {
        let img = GrayImage::new(data.len(), 1, data.clone()).unwrap();
        let b = binarize(&img, t);
        for (i, &v) in data.iter().enumerate() {
            prop_assert_eq!(b.get(0, i), u8::from(v <= t));
        }
    }
}

#[test]
fn otsu_degenerate_and_two_level_images() {
    let flat = GrayImage::filled(8, 8, 128).unwrap();
    assert_eq!(otsu_threshold(&flat).unwrap(), 0);
    let b = binarize(&flat, 0);
    assert!(b.ink_count() == 0 || b.ink_count() == 64);

    let data: Vec<u8> = (0..64).map(|i| if i % 2 == 0 { 0 } else { 255 }).collect();
    let half = GrayImage::new(8, 8, data.clone()).unwrap();
    let t = otsu_threshold(&half).unwrap();
    assert_eq!(t, 0);
    let b = binarize(&half, t);
    for (i, &v) in data.iter().enumerate() {
        assert_eq!(b.get(i / 8, i % 8), u8::from(v == 0));
    }
}

#[test]
fn white_page_has_no_lines() {
    let white = GrayImage::filled(30, 20, 255).unwrap();
    assert_eq!(binarize(&white, 200).ink_count(), 0);
    assert!(segment_lines(&binarize(&white, 200), 0).is_empty());
}

/// Stacks blocks of ink into a page: `layout[line][word] = (height, width)`.
fn compose(layout: &[Vec<(usize, usize)>], row_gap: usize, col_gap: usize) -> BinaryImage {
    let width = layout
        .iter()
        .map(|l| l.iter().map(|w| w.1 + col_gap).sum::<usize>())
        .max()
        .unwrap();
    let height = layout
        .iter()
        .map(|l| l.iter().map(|w| w.0).max().unwrap() + row_gap)
        .sum::<usize>();
    let mut page = BinaryImage::blank(width, height).unwrap();
    let mut top = 0;
    for line in layout {
        let mut left = 0;
        for &(h, w) in line {
            for r in 0..h {
                for c in 0..w {
                    page.set(top + r, left + c, 1);
                }
            }
            left += w + col_gap;
        }
        top += line.iter().map(|w| w.0).max().unwrap() + row_gap;
    }
    page
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stacked_blocks_round_trip(
        layout in prop::collection::vec(prop::collection::vec((4usize..12, 1usize..10), 1..6), 1..8),
        row_gap in 2usize..5,
    ) {
        let gap_min = PreprocessConfig::default().gap_min;
        let page = compose(&layout, row_gap, gap_min + 1);
        let lines = segment_lines(&page, 0);
        prop_assert_eq!(lines.len(), layout.len());
        for (line, expected) in lines.iter().zip(&layout) {
            let words = segment_words(line, 0, gap_min);
            prop_assert_eq!(words.len(), expected.len());
            for (w, &(_, width)) in words.iter().zip(expected) {
                prop_assert_eq!(w.width(), width);
            }
        }
    }
}

#[test]
fn rendered_line_splits_into_its_words() {
    let face = FontFace::load(&FontSpec::paper_set()[0]).unwrap();
    let words = ["le", "château", "d'eau", "était", "fermé"];
    let cfg = PreprocessConfig::default();
    let line = wordocr::dataset::render_page(
        &[words.iter().map(|w| w.to_string()).collect()],
        &face,
        Default::default(),
    )
    .unwrap();
    let found = segment_words(&segment_lines(&binarize_otsu(&line).unwrap(), 0)[0], 0, cfg.gap_min);
    assert_eq!(found.len(), words.len());
    // each segment should be as wide as the same word rendered alone
    for (seg, w) in found.iter().zip(words) {
        let alone = tight_crop_unit_pad(&binarize_otsu(&render_word(w, &face).unwrap()).unwrap()).unwrap();
        let seg = tight_crop_unit_pad(seg).unwrap();
        assert!((seg.width() as i64 - alone.width() as i64).abs() <= 2, "{w}");
    }
}
