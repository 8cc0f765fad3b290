//! PNG file formats.
//!
//! * images: 8-bit RGB (any readable color type is converted)
//! * trimaps: 8-bit gray with only the values 0, 128 and 255
//! * alpha mattes: 8-bit gray, `v` meaning `v / 255`
//! * masks: 8-bit gray, nonzero is foreground
//! * cut-outs: 8-bit RGBA, straight alpha

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb, Rgba};

use crate::error::{Error, Result};
use crate::raster::{AlphaMatte, BinaryMask, RgbImage, RgbaImage, Trimap};

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })
}

fn save_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_owned(),
        source,
    }
}

fn read_gray(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let img = open(path)?.into_luma8();
    Ok((img.width(), img.height(), img.into_raw()))
}

fn write_gray(path: &Path, width: u32, height: u32, bytes: Vec<u8>) -> Result<()> {
    let buf: ImageBuffer<Luma<u8>, _> = ImageBuffer::from_raw(width, height, bytes).expect("raster length");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(save_err(path))
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = open(path)?.into_rgb8();
    RgbImage::new(img.width(), img.height(), img.into_raw())
}

pub fn write_rgb(path: &Path, image: &RgbImage) -> Result<()> {
    let buf: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(image.width(), image.height(), image.data().to_vec()).expect("raster length");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(save_err(path))
}

pub fn write_rgba(path: &Path, image: &RgbaImage) -> Result<()> {
    let buf: ImageBuffer<Rgba<u8>, _> =
        ImageBuffer::from_raw(image.width(), image.height(), image.data().to_vec()).expect("raster length");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(save_err(path))
}

pub fn read_rgba(path: &Path) -> Result<RgbaImage> {
    let img = open(path)?.into_rgba8();
    RgbaImage::new(img.width(), img.height(), img.into_raw())
}

pub fn read_trimap(path: &Path) -> Result<Trimap> {
    let (w, h, bytes) = read_gray(path)?;
    Trimap::decode(w, h, &bytes)
}

pub fn write_trimap(path: &Path, trimap: &Trimap) -> Result<()> {
    write_gray(path, trimap.width(), trimap.height(), trimap.encode())
}

pub fn read_alpha(path: &Path) -> Result<AlphaMatte> {
    let (w, h, bytes) = read_gray(path)?;
    AlphaMatte::from_bytes(w, h, &bytes)
}

pub fn write_alpha(path: &Path, alpha: &AlphaMatte) -> Result<()> {
    write_gray(path, alpha.width(), alpha.height(), alpha.to_bytes())
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let (w, h, bytes) = read_gray(path)?;
    BinaryMask::from_bytes(w, h, &bytes)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_gray(path, mask.width(), mask.height(), mask.to_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::TrimapLabel;

    #[test]
    fn trimap_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let labels = [TrimapLabel::Background, TrimapLabel::Unknown, TrimapLabel::Foreground]
            .into_iter()
            .cycle()
            .take(35)
            .collect();
        let t = Trimap::new(7, 5, labels).unwrap();
        write_trimap(&path, &t).unwrap();
        assert_eq!(read_trimap(&path).unwrap(), t);
    }

    #[test]
    fn malformed_trimap_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        write_gray(&path, 2, 1, vec![0, 17]).unwrap();
        assert!(matches!(read_trimap(&path), Err(Error::MalformedTrimap { value: 17, .. })));
    }

    #[test]
    fn mask_any_nonzero_is_foreground() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        write_gray(&path, 3, 1, vec![0, 1, 200]).unwrap();
        assert_eq!(read_mask(&path).unwrap().data(), &[false, true, true]);
    }

    #[test]
    fn rgb_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.png");
        let img = RgbImage::from_fn(5, 4, |x, y| [x as u8 * 50, y as u8 * 60, 7]).unwrap();
        write_rgb(&path, &img).unwrap();
        assert_eq!(read_rgb(&path).unwrap(), img);
    }
}
