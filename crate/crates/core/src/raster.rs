//! Raster containers shared by every stage.
//!
//! All rasters are row-major with the origin at the top-left corner. Images
//! carry 8-bit samples; continuous maps (alpha, intermediate values) carry
//! `f64`.

use crate::error::{Error, Result};

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

fn check_len(width: u32, height: u32, channels: usize, len: usize) -> Result<()> {
    check_dims(width, height)?;
    let expected = width as usize * height as usize * channels;
    if len != expected {
        return Err(Error::InvalidRaster(format!(
            "{width}x{height}x{channels} raster needs {expected} samples, got {len}"
        )));
    }
    Ok(())
}

pub(crate) fn ensure_same_dims(expected: (u32, u32), actual: (u32, u32)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// 8-bit RGB image, three interleaved samples per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_len(width, height, 3, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Pixel `i` in raster order, normalized to [0, 1].
    pub fn normalized(&self, i: usize) -> [f64; 3] {
        let p = &self.data[i * 3..i * 3 + 3];
        [
            f64::from(p[0]) / 255.0,
            f64::from(p[1]) / 255.0,
            f64::from(p[2]) / 255.0,
        ]
    }

    pub fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> Result<Self> {
        check_dims(width, height)?;
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidRaster(format!(
                "crop {width}x{height}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in y0..y0 + height {
            let start = (y as usize * self.width as usize + x0 as usize) * 3;
            data.extend_from_slice(&self.data[start..start + width as usize * 3]);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }
}

/// 8-bit RGBA raster with straight (unpremultiplied) color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbaImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbaImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_len(width, height, 4, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 4]) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize * 4);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        [
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        ]
    }
}

/// Single-channel real-valued map.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayMap {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }
}

/// Per-pixel opacity in [0, 1]; 1 is pure foreground.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaMatte(GrayMap);

impl AlphaMatte {
    /// Wraps `map`, rejecting NaN or out-of-range values.
    pub fn new(map: GrayMap) -> Result<Self> {
        if let Some((index, &value)) = map
            .data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::AlphaOutOfRange { value, index });
        }
        Ok(Self(map))
    }

    /// Wraps `map` after clamping into [0, 1]. NaN becomes 0.
    pub fn from_clamped(mut map: GrayMap) -> Self {
        for v in &mut map.data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self(map)
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Result<Self> {
        Self::new(GrayMap::filled(width, height, value)?)
    }

    /// Decodes 8-bit samples, `v` meaning `v / 255`.
    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        check_len(width, height, 1, bytes.len())?;
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Ok(Self(GrayMap {
            width,
            height,
            data,
        }))
    }

    /// Quantizes to 8 bits, rounding half up.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.data.iter().map(|&a| quantize_unit(a)).collect()
    }

    pub fn width(&self) -> u32 {
        self.0.width
    }

    pub fn height(&self) -> u32 {
        self.0.height
    }

    pub fn dims(&self) -> (u32, u32) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.0.get(x, y)
    }

    pub fn as_map(&self) -> &GrayMap {
        &self.0
    }

    pub fn into_map(self) -> GrayMap {
        self.0
    }
}

/// Maps a value in [0, 1] to 0..=255, rounding half up.
pub(crate) fn quantize_unit(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Boolean per-pixel mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: u32, height: u32) -> Result<Self> {
        Self::new(width, height, vec![false; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Any nonzero byte is foreground.
    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| b != 0).collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| !b).collect(),
        }
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Smallest box containing every set pixel, or `None` for an empty mask.
    pub fn tight_bbox(&self) -> Option<BoundingBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x1 > 0).then_some(BoundingBox { x0, y0, x1, y1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum TrimapLabel {
    Background = 0,
    Unknown = 128,
    Foreground = 255,
}

impl TrimapLabel {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Self::Background),
            128 => Some(Self::Unknown),
            255 => Some(Self::Foreground),
            _ => None,
        }
    }

    pub fn to_byte(self) -> u8 {
        self as u8
    }

    /// Opacity the label stands for: 0, 0.5 or 1.
    pub fn alpha(self) -> f64 {
        match self {
            Self::Background => 0.0,
            Self::Unknown => 0.5,
            Self::Foreground => 1.0,
        }
    }
}

/// Tri-valued label map. Every pixel carries exactly one label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trimap {
    width: u32,
    height: u32,
    labels: Vec<TrimapLabel>,
}

impl Trimap {
    pub fn new(width: u32, height: u32, labels: Vec<TrimapLabel>) -> Result<Self> {
        check_len(width, height, 1, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: u32, height: u32, label: TrimapLabel) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            labels: vec![label; width as usize * height as usize],
        })
    }

    /// Builds a trimap from disjoint foreground and background masks; the
    /// remainder is Unknown. Foreground wins where the two overlap.
    pub fn from_masks(foreground: &BinaryMask, background: &BinaryMask) -> Self {
        assert_eq!(foreground.dims(), background.dims(), "mask dimensions differ");
        let labels = foreground
            .data
            .iter()
            .zip(&background.data)
            .map(|(&f, &b)| match (f, b) {
                (true, _) => TrimapLabel::Foreground,
                (false, true) => TrimapLabel::Background,
                (false, false) => TrimapLabel::Unknown,
            })
            .collect();
        Self {
            width: foreground.width,
            height: foreground.height,
            labels,
        }
    }

    /// Decodes a byte raster: 0 → Background, 128 → Unknown, 255 → Foreground.
    pub fn decode(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        check_len(width, height, 1, bytes.len())?;
        let labels = bytes
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                TrimapLabel::from_byte(value).ok_or(Error::MalformedTrimap { value, index })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.to_byte()).collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[TrimapLabel] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [TrimapLabel] {
        &mut self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> TrimapLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self, label: TrimapLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn contains(&self, label: TrimapLabel) -> bool {
        self.labels.contains(&label)
    }

    pub fn mask_of(&self, label: TrimapLabel) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| l == label).collect(),
        }
    }

    /// Alpha map with the label opacities (Unknown → 0.5).
    pub fn to_alpha(&self) -> AlphaMatte {
        AlphaMatte(GrayMap {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|l| l.alpha()).collect(),
        })
    }

    pub fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> Result<Self> {
        check_dims(width, height)?;
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidRaster(format!(
                "crop {width}x{height}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut labels = Vec::with_capacity(width as usize * height as usize);
        for y in y0..y0 + height {
            let start = y as usize * self.width as usize + x0 as usize;
            labels.extend_from_slice(&self.labels[start..start + width as usize]);
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }
}

/// Axis-aligned box with exclusive upper corner: it covers columns
/// `x0..x1` and rows `y0..y1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BoundingBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        if x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidBoundingBox { x0, y0, x1, y1 });
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// `(width, height)` as `(x1 - x0, y1 - y0)`.
    pub fn dimensions(&self) -> (u32, u32) {
        (self.x1 - self.x0, self.y1 - self.y0)
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x1 <= width && self.y1 <= height
    }
}
