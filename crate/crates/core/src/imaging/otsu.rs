use std::cmp::Ordering;

use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    hist
}

/// Between-class variance at threshold `t`, scaled by `N^2` and kept as the
/// exact fraction `numerator^2 / (n0 * n1)`. Returns `(|numerator|, n0 * n1)`;
/// a one-sided split yields `(0, 1)`.
fn scaled_variance(n0: u64, s0: u64, total_n: u64, total_s: u64) -> (u128, u128) {
    let n1 = total_n - n0;
    if n0 == 0 || n1 == 0 {
        return (0, 1);
    }
    let num = (s0 as i128) * (total_n as i128) - (n0 as i128) * (total_s as i128);
    (num.unsigned_abs(), (n0 as u128) * (n1 as u128))
}

/// Orders `a^2 / da` against `b^2 / db`, exactly when the products fit in
/// 128 bits.
fn cmp_fraction((a, da): (u128, u128), (b, db): (u128, u128)) -> Ordering {
    let exact = a
        .checked_mul(a)
        .and_then(|a2| a2.checked_mul(db))
        .zip(b.checked_mul(b).and_then(|b2| b2.checked_mul(da)));
    match exact {
        Some((lhs, rhs)) => lhs.cmp(&rhs),
        None => {
            let lhs = (a as f64) * (a as f64) / (da as f64);
            let rhs = (b as f64) * (b as f64) / (db as f64);
            lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal)
        }
    }
}

/// Global threshold maximizing between-class variance over the 256-bin
/// histogram. Candidates are `0..=254` (class 0 = intensities `<= t`);
/// ties resolve to the smallest threshold.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    if img.data().is_empty() {
        return Err(Error::EmptyInput);
    }
    let hist = histogram(img);
    let total_n: u64 = hist.iter().sum();
    let total_s: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();

    let mut best_t = 0u8;
    let mut best = (0u128, 1u128);
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 0..=254u8 {
        n0 += hist[t as usize];
        s0 += t as u64 * hist[t as usize];
        let v = scaled_variance(n0, s0, total_n, total_s);
        if cmp_fraction(v, best) == Ordering::Greater {
            best = v;
            best_t = t;
        }
    }
    Ok(best_t)
}

/// Exposed for diagnostics: the scaled variance fraction at threshold `t`.
pub fn between_class_variance_ratio(img: &GrayImage, t: u8) -> (u128, u128) {
    let hist = histogram(img);
    let total_n: u64 = hist.iter().sum();
    let total_s: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let n0: u64 = hist[..=t as usize].iter().sum();
    let s0: u64 = hist[..=t as usize].iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    scaled_variance(n0, s0, total_n, total_s)
}

/// Dark-on-light binarization: pixels with intensity `<= t` become ink (`1`).
pub fn binarize(img: &GrayImage, t: u8) -> BinaryImage {
    let data = img.data().iter().map(|&v| u8::from(v <= t)).collect();
    BinaryImage::new(img.width(), img.height(), data).expect("dimensions carried over from a valid image")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_picks_zero() {
        let img = GrayImage::filled(7, 5, 128).unwrap();
        let t = otsu_threshold(&img).unwrap();
        assert_eq!(t, 0);
        let bin = binarize(&img, t);
        assert_eq!(bin.ink_count(), 0);
    }

    #[test]
    fn two_population_image_splits_exactly() {
        let data: Vec<u8> = (0..64).map(|i| if i % 2 == 0 { 0 } else { 255 }).collect();
        let img = GrayImage::new(8, 8, data.clone()).unwrap();
        let t = otsu_threshold(&img).unwrap();
        assert_eq!(t, 0);
        let bin = binarize(&img, t);
        for (b, g) in bin.data().iter().zip(&data) {
            assert_eq!(*b == 1, *g == 0);
        }
    }

    #[test]
    fn binarize_fixed_cases() {
        let white = GrayImage::filled(4, 3, 255).unwrap();
        for t in [0u8, 100, 254] {
            assert_eq!(binarize(&white, t).ink_count(), 0);
        }
        let black = GrayImage::filled(4, 3, 0).unwrap();
        assert_eq!(binarize(&black, 0).ink_count(), 12);
    }

    #[test]
    fn bimodal_threshold_lands_between_modes() {
        let mut data = vec![30u8; 50];
        data.extend(vec![200u8; 50]);
        let img = GrayImage::new(10, 10, data).unwrap();
        let t = otsu_threshold(&img).unwrap();
        assert_eq!(t, 30);
    }

    #[test]
    fn fraction_comparison_falls_back_on_overflow() {
        let big = (u128::MAX >> 1, 1);
        let small = (1, 1);
        assert_eq!(cmp_fraction(big, small), Ordering::Greater);
        assert_eq!(cmp_fraction((3, 4), (6, 16)), Ordering::Equal);
    }
}
