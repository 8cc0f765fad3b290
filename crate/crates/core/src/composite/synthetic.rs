//! Procedural ground-truth scenes: a foreground with known alpha composited
//! over a background, plus a deliberately imprecise mask imitating a
//! detector's output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composite::composite_pixelwise;
use crate::error::{Error, Result};
use crate::morphology::{dilate, erode};
use crate::raster::{AlphaMatte, BinaryMask, BoundingBox, GrayMap, RgbImage, RgbaImage};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticScene {
    pub image: RgbImage,
    pub gt_alpha: AlphaMatte,
    pub coarse_mask: BinaryMask,
    pub bbox: BoundingBox,
}

/// Places `fg` at the center of `bg`, composites it, and perturbs the
/// thresholded alpha into a coarse mask by dilating or eroding it with a
/// seeded random radius in `1..=perturb_radius`.
pub fn make_synthetic(fg: &RgbaImage, bg: &RgbImage, perturb_radius: u32, seed: u64) -> Result<SyntheticScene> {
    let (fw, fh) = fg.dims();
    let (bw, bh) = bg.dims();
    if fw > bw || fh > bh {
        return Err(Error::ForegroundTooLarge {
            fg_w: fw,
            fg_h: fh,
            bg_w: bw,
            bg_h: bh,
        });
    }
    let (ox, oy) = ((bw - fw) / 2, (bh - fh) / 2);
    let inside = |x: u32, y: u32| x >= ox && x < ox + fw && y >= oy && y < oy + fh;

    let fg_canvas = RgbImage::from_fn(bw, bh, |x, y| {
        if inside(x, y) {
            let [r, g, b, _] = fg.pixel(x - ox, y - oy);
            [r, g, b]
        } else {
            bg.pixel(x, y)
        }
    })?;
    let mut alpha = Vec::with_capacity(bw as usize * bh as usize);
    for y in 0..bh {
        for x in 0..bw {
            let a = if inside(x, y) { fg.pixel(x - ox, y - oy)[3] } else { 0 };
            alpha.push(f64::from(a) / 255.0);
        }
    }
    let gt_alpha = AlphaMatte::new(GrayMap::new(bw, bh, alpha)?)?;
    let image = composite_pixelwise(&fg_canvas, bg, &gt_alpha)?;

    let exact = BinaryMask::new(bw, bh, gt_alpha.data().iter().map(|&a| a >= 0.5).collect())?;
    let coarse_mask = if perturb_radius == 0 {
        exact
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.random_range(1..=perturb_radius);
        let perturbed = if rng.random_bool(0.5) { dilate(&exact, r) } else { erode(&exact, r) };
        if perturbed.is_empty() {
            exact
        } else {
            perturbed
        }
    };
    let bbox = coarse_mask.tight_bbox().ok_or(Error::EmptyMask)?;
    Ok(SyntheticScene {
        image,
        gt_alpha,
        coarse_mask,
        bbox,
    })
}

fn ramp(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Disk of opaque `color` with a linear falloff of `feather` pixels beyond
/// `radius`.
pub fn feathered_disk(radius: f64, feather: f64, color: [u8; 3]) -> Result<RgbaImage> {
    let extent = (radius + feather).ceil() as u32 + 1;
    let size = 2 * extent;
    let c = f64::from(extent);
    RgbaImage::from_fn(size, size, |x, y| {
        let d = (f64::from(x) + 0.5 - c).hypot(f64::from(y) + 0.5 - c);
        let a = (radius + feather - d) / feather;
        [color[0], color[1], color[2], ramp(a)]
    })
}

/// Rectangle whose edges fade linearly over `feather` pixels.
pub fn soft_rect(width: u32, height: u32, feather: f64, color: [u8; 3]) -> Result<RgbaImage> {
    let margin = feather.ceil() as u32 + 1;
    let (w, h) = (width + 2 * margin, height + 2 * margin);
    RgbaImage::from_fn(w, h, |x, y| {
        let px = f64::from(x) + 0.5 - f64::from(margin);
        let py = f64::from(y) + 0.5 - f64::from(margin);
        let outside_x = (-px).max(px - f64::from(width)).max(0.0);
        let outside_y = (-py).max(py - f64::from(height)).max(0.0);
        let a = 1.0 - outside_x.hypot(outside_y) / feather;
        [color[0], color[1], color[2], ramp(a)]
    })
}

/// A horizontal bar smeared by a horizontal box blur of `streak` pixels,
/// as left by motion during exposure.
pub fn motion_bar(length: u32, thickness: u32, streak: u32, color: [u8; 3]) -> Result<RgbaImage> {
    let margin = streak + 2;
    let (w, h) = (length + 2 * margin, thickness + 4);
    let solid = |x: i64, y: u32| (y >= 2 && y < 2 + thickness) && x >= i64::from(margin) && x < i64::from(margin + length);
    RgbaImage::from_fn(w, h, |x, y| {
        let half = i64::from(streak / 2);
        let taps = 2 * half + 1;
        let covered = (-half..=half).filter(|&d| solid(i64::from(x) + d, y)).count();
        [color[0], color[1], color[2], ramp(covered as f64 / taps as f64)]
    })
}

/// Smooth diagonal gradient in cool tones.
pub fn cool_background(width: u32, height: u32) -> Result<RgbImage> {
    RgbImage::from_fn(width, height, |x, y| {
        let t = (f64::from(x) + f64::from(y)) / f64::from(width + height);
        [ramp(0.08 + 0.12 * t), ramp(0.25 - 0.1 * t), ramp(0.55 + 0.2 * t)]
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Disk,
    Rect,
    MotionBar,
}

impl std::str::FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "disk" => Ok(Self::Disk),
            "rect" => Ok(Self::Rect),
            "motion-bar" => Ok(Self::MotionBar),
            other => Err(format!("unknown fixture kind `{other}` (disk, rect, motion-bar)")),
        }
    }
}

/// Warm foreground color used by every fixture.
pub const FIXTURE_COLOR: [u8; 3] = [235, 170, 40];

/// Standard fixtures: a radius-40 disk with a 4 px feather, a 70×50
/// rectangle with a 3 px feather, and a 90×14 bar streaked over 15 px, each
/// on a 128×128 cool background.
pub fn fixture(kind: FixtureKind, perturb_radius: u32, seed: u64) -> Result<SyntheticScene> {
    let fg = match kind {
        FixtureKind::Disk => feathered_disk(40.0, 4.0, FIXTURE_COLOR)?,
        FixtureKind::Rect => soft_rect(70, 50, 3.0, FIXTURE_COLOR)?,
        FixtureKind::MotionBar => motion_bar(90, 14, 15, FIXTURE_COLOR)?,
    };
    make_synthetic(&fg, &cool_background(128, 128)?, perturb_radius, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::metrics::{metrics, Region};

    #[test]
    fn zero_perturbation_is_exact_threshold() {
        let s = fixture(FixtureKind::Disk, 0, 3).unwrap();
        let exact: Vec<bool> = s.gt_alpha.data().iter().map(|&a| a >= 0.5).collect();
        assert_eq!(s.coarse_mask.data(), &exact[..]);
        assert_eq!(s.bbox, s.coarse_mask.tight_bbox().unwrap());
    }

    #[test]
    fn image_is_the_blend_everywhere() {
        let fg = feathered_disk(10.0, 3.0, [250, 10, 10]).unwrap();
        let bg = cool_background(40, 36).unwrap();
        let s = make_synthetic(&fg, &bg, 2, 1).unwrap();
        let (ox, oy) = ((40 - fg.width()) / 2, (36 - fg.height()) / 2);
        for y in 0..36 {
            for x in 0..40 {
                let a = s.gt_alpha.get(x, y);
                let f = if x >= ox && y >= oy && x < ox + fg.width() && y < oy + fg.height() {
                    let p = fg.pixel(x - ox, y - oy);
                    [p[0], p[1], p[2]]
                } else {
                    bg.pixel(x, y)
                };
                let b = bg.pixel(x, y);
                for c in 0..3 {
                    let v = a * f64::from(f[c]) + (1.0 - a) * f64::from(b[c]);
                    assert!((f64::from(s.image.pixel(x, y)[c]) - v).abs() <= 0.5);
                }
            }
        }
        let all = BinaryMask::from_fn(40, 36, |_, _| true).unwrap();
        let r = metrics(&s.gt_alpha, &s.gt_alpha, &all, Region::All).unwrap();
        assert_eq!((r.sad, r.mse, r.gradient_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn perturbation_is_seeded_and_bounded() {
        let a = fixture(FixtureKind::Disk, 3, 0).unwrap();
        let b = fixture(FixtureKind::Disk, 3, 0).unwrap();
        assert_eq!(a, b);
        let exact = BinaryMask::new(128, 128, a.gt_alpha.data().iter().map(|&v| v >= 0.5).collect()).unwrap();
        assert!(a.coarse_mask.is_subset_of(&dilate(&exact, 3)));
        assert!(erode(&exact, 3).is_subset_of(&a.coarse_mask));
        assert_ne!(a.coarse_mask, exact);
    }

    #[test]
    fn oversized_foreground_rejected() {
        let fg = feathered_disk(30.0, 2.0, [1, 1, 1]).unwrap();
        let bg = cool_background(20, 80).unwrap();
        assert!(matches!(make_synthetic(&fg, &bg, 0, 0), Err(Error::ForegroundTooLarge { .. })));
    }

    #[test]
    fn fixtures_have_soft_edges() {
        for kind in [FixtureKind::Disk, FixtureKind::Rect, FixtureKind::MotionBar] {
            let s = fixture(kind, 0, 0).unwrap();
            let soft = s.gt_alpha.data().iter().filter(|&&a| a > 0.0 && a < 1.0).count();
            let opaque = s.gt_alpha.data().iter().filter(|&&a| a == 1.0).count();
            assert!(soft > 20 && opaque > 100, "{kind:?}: soft={soft} opaque={opaque}");
        }
    }
}
