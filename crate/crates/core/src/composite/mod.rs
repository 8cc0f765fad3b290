//! Compositing `I = α·F + (1 − α)·B`, cut-out extraction, evaluation metrics
//! and synthetic ground-truth scenes.

pub mod metrics;
pub mod synthetic;

use crate::error::Result;
use crate::raster::{ensure_same_dims, quantize_unit, AlphaMatte, RgbImage, RgbaImage};

pub use metrics::{metrics, MetricsReport, Region};
pub use synthetic::{make_synthetic, SyntheticScene};

/// Blends `fg` over `bg` with `alpha` per pixel and channel, in real
/// arithmetic, rounding half up at the end.
pub fn composite_pixelwise(fg: &RgbImage, bg: &RgbImage, alpha: &AlphaMatte) -> Result<RgbImage> {
    ensure_same_dims(fg.dims(), bg.dims())?;
    ensure_same_dims(fg.dims(), alpha.dims())?;
    let data = fg
        .data()
        .chunks_exact(3)
        .zip(bg.data().chunks_exact(3))
        .zip(alpha.data())
        .flat_map(|((f, b), &a)| {
            let mix = move |c: usize| {
                let v = a * f64::from(f[c]) + (1.0 - a) * f64::from(b[c]);
                (v + 0.5).floor().clamp(0.0, 255.0) as u8
            };
            [mix(0), mix(1), mix(2)]
        })
        .collect();
    RgbImage::new(fg.width(), fg.height(), data)
}

/// Layers several extractions of `image` over `background`, in order.
pub fn layer_composite(image: &RgbImage, mattes: &[AlphaMatte], background: &RgbImage) -> Result<RgbImage> {
    ensure_same_dims(image.dims(), background.dims())?;
    mattes
        .iter()
        .try_fold(background.clone(), |out, matte| composite_pixelwise(image, &out, matte))
}

/// Straight-alpha cut-out: RGB copied, alpha quantized to 8 bits.
pub fn extract_rgba(image: &RgbImage, alpha: &AlphaMatte) -> Result<RgbaImage> {
    ensure_same_dims(image.dims(), alpha.dims())?;
    let data = image
        .data()
        .chunks_exact(3)
        .zip(alpha.data())
        .flat_map(|(rgb, &a)| [rgb[0], rgb[1], rgb[2], quantize_unit(a)])
        .collect();
    RgbaImage::new(image.width(), image.height(), data)
}

/// Standard unpremultiplied "over": `src·A + dst·(1 − A)` with `A = a/255`.
pub fn over(src: &RgbaImage, dst: &RgbImage) -> Result<RgbImage> {
    ensure_same_dims(src.dims(), dst.dims())?;
    let data = src
        .data()
        .chunks_exact(4)
        .zip(dst.data().chunks_exact(3))
        .flat_map(|(s, d)| {
            let a = f64::from(s[3]) / 255.0;
            let mix = move |c: usize| {
                let v = f64::from(s[c]) * a + f64::from(d[c]) * (1.0 - a);
                (v + 0.5).floor() as u8
            };
            [mix(0), mix(1), mix(2)]
        })
        .collect();
    RgbImage::new(dst.width(), dst.height(), data)
}
