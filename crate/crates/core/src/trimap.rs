//! Trimap estimation from instance masks (first pass) and from alpha mattes
//! (feedback passes), plus suppression of competing instances.

use crate::error::{Error, Result};
use crate::morphology::{dilate, erode, squared_depth};
use crate::raster::{AlphaMatte, BinaryMask, BoundingBox, Trimap, TrimapLabel};

/// Thresholds and dilation rate used to derive trimaps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrimapParams {
    /// Fraction of the bbox width/height average used as dilation radius.
    pub rate: f64,
    /// Alpha at or above this is treated as decided foreground.
    pub hi_threshold: f64,
    /// Alpha at or below this is treated as decided background.
    pub lo_threshold: f64,
}

impl Default for TrimapParams {
    fn default() -> Self {
        Self {
            rate: 0.10,
            hi_threshold: 0.95,
            lo_threshold: 0.05,
        }
    }
}

impl TrimapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(Error::param("rate", format!("{} not in (0, 1)", self.rate)));
        }
        let (lo, hi) = (self.lo_threshold, self.hi_threshold);
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::param(
                "thresholds",
                format!("need 0 <= lo < hi <= 1, got lo={lo} hi={hi}"),
            ));
        }
        Ok(())
    }
}

/// `round(rate * (width + height) / 2)`, rounded half up and never below 1.
pub fn dilation_radius(bbox: &BoundingBox, rate: f64) -> u32 {
    let (w, h) = bbox.dimensions();
    let raw = rate * (f64::from(w) + f64::from(h)) / 2.0;
    ((raw + 0.5).floor() as u32).max(1)
}

/// First-pass trimap: the eroded mask is Foreground, everything beyond the
/// dilated mask is Background, the band between is Unknown.
///
/// When the erosion wipes out the mask entirely, a single Foreground pixel
/// is kept so the solver always has an opaque constraint: the deepest mask
/// pixel, the one nearest the rounded centroid among equals. It is the last
/// pixel any erosion removes, so the Unknown band still only grows with the
/// radius.
pub fn mask_to_trimap(mask: &BinaryMask, radius: u32) -> Result<Trimap> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut fg = erode(mask, radius);
    if fg.is_empty() {
        let (cx, cy) = core_pixel(mask);
        fg.set(cx, cy, true);
    }
    let bg = dilate(mask, radius).complement();
    Ok(Trimap::from_masks(&fg, &bg))
}

/// Deepest mask pixel; ties go to the pixel closest to the rounded
/// centroid, then to the first in raster order.
fn core_pixel(mask: &BinaryMask) -> (u32, u32) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                sx += f64::from(x);
                sy += f64::from(y);
                n += 1.0;
            }
        }
    }
    let cx = (sx / n + 0.5).floor() as i64;
    let cy = (sy / n + 0.5).floor() as i64;
    let depth = squared_depth(mask);
    let deepest = depth.iter().copied().fold(0.0, f64::max);
    let w = mask.width();
    let mut best = (0, 0);
    let mut best_d = i64::MAX;
    for (i, _) in depth.iter().enumerate().filter(|(_, &d)| d == deepest) {
        let (x, y) = (i as u32 % w, i as u32 / w);
        let (dx, dy) = (i64::from(x) - cx, i64::from(y) - cy);
        let d = dx * dx + dy * dy;
        if d < best_d {
            best_d = d;
            best = (x, y);
        }
    }
    best
}

/// Feedback-pass trimap from a previous matte.
///
/// Seeds: Foreground where `alpha >= hi`, Background where `alpha <= lo`,
/// Unknown in between. The seed Unknown set is then dilated by `radius`.
/// A matte with no intermediate values (hard edge) gets the band where the
/// dilated Foreground and dilated Background meet.
pub fn alpha_to_trimap(alpha: &AlphaMatte, radius: u32, params: &TrimapParams) -> Result<Trimap> {
    params.validate()?;
    let (w, h) = alpha.dims();
    let fg_seed = BinaryMask::new(w, h, alpha.data().iter().map(|&a| a >= params.hi_threshold).collect())?;
    let bg_seed = BinaryMask::new(w, h, alpha.data().iter().map(|&a| a <= params.lo_threshold).collect())?;
    let total = alpha.data().len();
    if fg_seed.count() == total || bg_seed.count() == total {
        return Err(Error::DegenerateAlpha);
    }

    let seed_unknown = fg_seed.or(&bg_seed).complement();
    let unknown = if seed_unknown.is_empty() {
        dilate(&fg_seed, radius).and(&dilate(&bg_seed, radius))
    } else {
        dilate(&seed_unknown, radius)
    };
    let known = unknown.complement();
    Ok(Trimap::from_masks(&fg_seed.and(&known), &bg_seed.and(&known)))
}

/// Forces the eroded interior of every other instance to Background.
pub fn suppress_other_instances(trimap: &Trimap, others: &[&BinaryMask], radius: u32) -> Result<Trimap> {
    let mut out = trimap.clone();
    for other in others {
        crate::raster::ensure_same_dims(trimap.dims(), other.dims())?;
        let interior = erode(other, radius);
        for (label, &inside) in out.labels_mut().iter_mut().zip(interior.data()) {
            if inside {
                *label = TrimapLabel::Background;
            }
        }
    }
    Ok(out)
}
