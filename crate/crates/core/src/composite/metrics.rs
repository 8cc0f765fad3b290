//! SAD, MSE and gradient error between a matte and its ground truth.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{ensure_same_dims, AlphaMatte, BinaryMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    All,
    Unknown,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::All => "all",
            Region::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Σ|a − gt|, in alpha units × pixels.
    pub sad: f64,
    /// mean((a − gt)²).
    pub mse: f64,
    /// Σ(|∇a| − |∇gt|)² with 3×3 Sobel gradients.
    pub gradient_error: f64,
    pub region: Region,
    pub pixels: usize,
}

impl MetricsReport {
    /// `metric=value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "sad={}\nmse={}\ngradient_error={}\nregion={}\npixels={}\n",
            self.sad, self.mse, self.gradient_error, self.region, self.pixels
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Sobel gradient magnitude, replicating edge pixels.
fn sobel_magnitude(alpha: &AlphaMatte) -> Vec<f64> {
    let (w, h) = (alpha.width() as i64, alpha.height() as i64);
    let at = |x: i64, y: i64| alpha.get(x.clamp(0, w - 1) as u32, y.clamp(0, h - 1) as u32);
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out.push(gx.hypot(gy));
        }
    }
    out
}

/// Scores `alpha` against `gt` over the pixels set in `region`.
pub fn metrics(alpha: &AlphaMatte, gt: &AlphaMatte, region: &BinaryMask, kind: Region) -> Result<MetricsReport> {
    ensure_same_dims(gt.dims(), alpha.dims())?;
    ensure_same_dims(gt.dims(), region.dims())?;
    let pixels = region.count();
    if pixels == 0 {
        return Err(Error::EmptyRegion);
    }
    let ga = sobel_magnitude(alpha);
    let gg = sobel_magnitude(gt);
    let (mut sad, mut sq, mut grad) = (0.0, 0.0, 0.0);
    for (i, _) in region.data().iter().enumerate().filter(|(_, &r)| r) {
        let d = alpha.data()[i] - gt.data()[i];
        sad += d.abs();
        sq += d * d;
        let dg = ga[i] - gg[i];
        grad += dg * dg;
    }
    Ok(MetricsReport {
        sad,
        mse: sq / pixels as f64,
        gradient_error: grad,
        region: kind,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GrayMap;

    fn ramp(w: u32, h: u32, offset: f64) -> AlphaMatte {
        let data = (0..w * h).map(|i| 0.1 + 0.6 * f64::from(i % w) / f64::from(w) + offset).collect();
        AlphaMatte::new(GrayMap::new(w, h, data).unwrap()).unwrap()
    }

    #[test]
    fn identical_mattes_score_zero() {
        let a = ramp(8, 6, 0.0);
        let all = BinaryMask::from_fn(8, 6, |_, _| true).unwrap();
        let r = metrics(&a, &a, &all, Region::All).unwrap();
        assert_eq!((r.sad, r.mse, r.gradient_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_offset() {
        let gt = ramp(10, 5, 0.0);
        let a = ramp(10, 5, 0.1);
        let region = BinaryMask::from_fn(10, 5, |_, y| y == 2).unwrap();
        let r = metrics(&a, &gt, &region, Region::Unknown).unwrap();
        assert_eq!(r.pixels, 10);
        assert!((r.sad - 1.0).abs() < 1e-12);
        assert!((r.mse - 0.01).abs() < 1e-12);
        assert!(r.gradient_error < 1e-24);
    }

    #[test]
    fn empty_region_rejected() {
        let a = ramp(4, 4, 0.0);
        assert!(matches!(
            metrics(&a, &a, &BinaryMask::empty(4, 4).unwrap(), Region::All),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn report_formats() {
        let r = MetricsReport {
            sad: 1.5,
            mse: 0.25,
            gradient_error: 0.0,
            region: Region::Unknown,
            pixels: 6,
        };
        assert_eq!(r.to_text(), "sad=1.5\nmse=0.25\ngradient_error=0\nregion=unknown\npixels=6\n");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["region"], "unknown");
        assert_eq!(v["pixels"], 6);
        assert_eq!(v["mse"], 0.25);
    }
}
