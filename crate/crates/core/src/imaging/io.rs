use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Reads any 8-bit-convertible PNG or PNM file as grayscale.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| Error::ImageCodec {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(w as usize, h as usize, luma.into_raw())
}

/// Binary (P5) graymap with maxval 255.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut buf = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    buf.extend_from_slice(img.data());
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Writes PGM for `.pgm` paths and PNG otherwise.
pub fn write_gray(path: &Path, img: &GrayImage) -> Result<()> {
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        return write_pgm(path, img);
    }
    image::save_buffer(
        path,
        img.data(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::L8,
    )
    .map_err(|e| Error::ImageCodec {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Bilevel image as a `{0, 255}` graymap, ink = 255.
pub fn write_binary_pgm(path: &Path, img: &BinaryImage) -> Result<()> {
    let data = img.data().iter().map(|&v| v * 255).collect();
    write_pgm(path, &GrayImage::new(img.width(), img.height(), data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_and_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 128, 254, 255]).unwrap();
        for name in ["a.pgm", "a.png"] {
            let p = dir.path().join(name);
            write_gray(&p, &img).unwrap();
            assert_eq!(read_gray(&p).unwrap(), img);
        }
        let raw = fs::read(dir.path().join("a.pgm")).unwrap();
        assert!(raw.starts_with(b"P5\n3 2\n255\n"));
    }

    #[test]
    fn binary_pgm_uses_full_scale() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.pgm");
        write_binary_pgm(&p, &BinaryImage::new(2, 1, vec![1, 0]).unwrap()).unwrap();
        assert_eq!(read_gray(&p).unwrap().data(), &[255, 0]);
    }

    #[test]
    fn missing_file_is_codec_error() {
        assert!(read_gray(Path::new("/nonexistent/x.png")).is_err());
    }
}
