//! Patch-based inference.
//!
//! The image is brought to a working resolution, then for each of K rounds
//! patches are centered on randomly drawn Unknown pixels until the whole
//! Unknown region is covered. Each patch is matted independently, patches
//! are pasted back and averaged where they overlap, and the K rounds are
//! merged by a per-pixel median.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matting::{impose_constraints, matte_patch, MattingBackend, MattingRequest};
use crate::pipeline::PipelineConfig;
use crate::raster::{AlphaMatte, GrayMap, RgbImage, Trimap, TrimapLabel};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derivation: the same `(base, parts)` always yields the same
/// seed, on every platform and in every execution order.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResizeMode {
    /// Resize to exactly the working dimensions.
    #[default]
    Stretch,
    /// Largest size that fits inside the working box with the same aspect.
    PreserveAspect,
}

/// Dimensions the pipeline works at for a `source` raster.
pub fn working_dims(source: (u32, u32), working: (u32, u32), mode: ResizeMode) -> (u32, u32) {
    let (w, h) = source;
    let (ww, wh) = working;
    if w <= ww && h <= wh {
        return source;
    }
    match mode {
        ResizeMode::Stretch => working,
        ResizeMode::PreserveAspect => {
            let s = (f64::from(ww) / f64::from(w)).min(f64::from(wh) / f64::from(h));
            let fit = |v: u32, cap: u32| ((f64::from(v) * s).round() as u32).clamp(1, cap);
            (fit(w, ww), fit(h, wh))
        }
    }
}

/// Source coordinate and weight for bilinear sampling along one axis.
fn bilinear_taps(dst: u32, src_len: u32, dst_len: u32) -> (usize, usize, f64) {
    let scale = f64::from(src_len) / f64::from(dst_len);
    let s = ((f64::from(dst) + 0.5) * scale - 0.5).clamp(0.0, f64::from(src_len - 1));
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(src_len as usize - 1);
    (i0, i1, s - i0 as f64)
}

fn nearest_index(dst: u32, src_len: u32, dst_len: u32) -> u32 {
    let s = (f64::from(dst) + 0.5) * f64::from(src_len) / f64::from(dst_len);
    (s.floor() as u32).min(src_len - 1)
}

pub fn resize_bilinear_rgb(image: &RgbImage, width: u32, height: u32) -> RgbImage {
    if image.dims() == (width, height) {
        return image.clone();
    }
    let sw = image.width() as usize;
    let data = image.data();
    let xs: Vec<_> = (0..width).map(|x| bilinear_taps(x, image.width(), width)).collect();
    RgbImage::from_fn(width, height, |x, y| {
        let (x0, x1, fx) = xs[x as usize];
        let (y0, y1, fy) = bilinear_taps(y, image.height(), height);
        let at = |xx: usize, yy: usize, c: usize| f64::from(data[(yy * sw + xx) * 3 + c]);
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let top = at(x0, y0, c) * (1.0 - fx) + at(x1, y0, c) * fx;
            let bottom = at(x0, y1, c) * (1.0 - fx) + at(x1, y1, c) * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            *o = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        out
    })
    .expect("positive dimensions")
}

pub fn resize_bilinear_map(map: &GrayMap, width: u32, height: u32) -> GrayMap {
    if map.dims() == (width, height) {
        return map.clone();
    }
    let sw = map.width() as usize;
    let src = map.data();
    let xs: Vec<_> = (0..width).map(|x| bilinear_taps(x, map.width(), width)).collect();
    let mut data = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        let (y0, y1, fy) = bilinear_taps(y, map.height(), height);
        for &(x0, x1, fx) in &xs {
            let top = src[y0 * sw + x0] * (1.0 - fx) + src[y0 * sw + x1] * fx;
            let bottom = src[y1 * sw + x0] * (1.0 - fx) + src[y1 * sw + x1] * fx;
            data.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    GrayMap::new(width, height, data).expect("positive dimensions")
}

pub fn resize_nearest_trimap(trimap: &Trimap, width: u32, height: u32) -> Trimap {
    if trimap.dims() == (width, height) {
        return trimap.clone();
    }
    let xs: Vec<u32> = (0..width).map(|x| nearest_index(x, trimap.width(), width)).collect();
    let mut labels = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        let sy = nearest_index(y, trimap.height(), height);
        labels.extend(xs.iter().map(|&sx| trimap.get(sx, sy)));
    }
    Trimap::new(width, height, labels).expect("positive dimensions")
}

/// Brings an image and its trimap to the working resolution. Rasters that
/// already fit inside the working box pass through unchanged.
pub fn resize_to_working(image: &RgbImage, trimap: &Trimap, working: (u32, u32), mode: ResizeMode) -> Result<(RgbImage, Trimap)> {
    crate::raster::ensure_same_dims(image.dims(), trimap.dims())?;
    let (w, h) = working_dims(image.dims(), working, mode);
    Ok((resize_bilinear_rgb(image, w, h), resize_nearest_trimap(trimap, w, h)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchRect {
    pub x0: u32,
    pub y0: u32,
    pub width: u32,
    pub height: u32,
}

impl PatchRect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x0 + self.width && y >= self.y0 && y < self.y0 + self.height
    }
}

/// Patch centers for one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchPlan {
    pub centers: Vec<(u32, u32)>,
    /// Patch dimensions, already capped at the raster dimensions.
    pub patch_size: (u32, u32),
    /// Dimensions of the working raster the plan refers to.
    pub working_size: (u32, u32),
    pub rng_seed: u64,
}

impl PatchPlan {
    /// Rectangle for `center`, shifted the least amount that keeps it inside
    /// the raster.
    pub fn rect_for(&self, center: (u32, u32)) -> PatchRect {
        let (pw, ph) = self.patch_size;
        let (w, h) = self.working_size;
        let place = |c: u32, p: u32, len: u32| c.saturating_sub(p / 2).min(len - p);
        PatchRect {
            x0: place(center.0, pw, w),
            y0: place(center.1, ph, h),
            width: pw,
            height: ph,
        }
    }

    pub fn rects(&self) -> Vec<PatchRect> {
        self.centers.iter().map(|&c| self.rect_for(c)).collect()
    }
}

/// Draws uncovered Unknown pixels uniformly at random as patch centers until
/// every Unknown pixel lies inside some patch.
pub fn sample_patch_centers(trimap: &Trimap, patch: u32, seed: u64) -> Result<PatchPlan> {
    if patch == 0 {
        return Err(Error::param("patch_size", "must be positive"));
    }
    let (w, h) = trimap.dims();
    let mut pending: Vec<(u32, u32)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| trimap.get(x, y) == TrimapLabel::Unknown)
        .collect();
    if pending.is_empty() {
        return Err(Error::NoUnknownRegion);
    }

    let mut plan = PatchPlan {
        centers: Vec::new(),
        patch_size: (patch.min(w), patch.min(h)),
        working_size: (w, h),
        rng_seed: seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while !pending.is_empty() {
        let center = pending[rng.random_range(0..pending.len())];
        let rect = plan.rect_for(center);
        plan.centers.push(center);
        pending.retain(|&(x, y)| !rect.contains(x, y));
    }
    Ok(plan)
}

/// Per-pixel values of one round; `None` where no patch landed.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundMap {
    width: u32,
    height: u32,
    values: Vec<Option<f64>>,
}

impl RoundMap {
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> Option<f64> {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Wraps a complete map (every pixel present).
    pub fn from_map(map: &GrayMap) -> Self {
        Self {
            width: map.width(),
            height: map.height(),
            values: map.data().iter().map(|&v| Some(v)).collect(),
        }
    }
}

/// Pastes patches at their top-left `positions` and averages overlaps.
pub fn blend_round(patches: &[(AlphaMatte, (u32, u32))], dims: (u32, u32)) -> Result<RoundMap> {
    let (w, h) = dims;
    let n = w as usize * h as usize;
    let mut sum = vec![0.0; n];
    let mut count = vec![0u32; n];
    for (alpha, (px, py)) in patches {
        let (pw, ph) = alpha.dims();
        if px + pw > w || py + ph > h {
            return Err(Error::InvalidRaster(format!(
                "patch {pw}x{ph}+{px}+{py} exceeds {w}x{h}"
            )));
        }
        for y in 0..ph {
            let row = (py + y) as usize * w as usize;
            for x in 0..pw {
                let i = row + (px + x) as usize;
                sum[i] += alpha.get(x, y);
                count[i] += 1;
            }
        }
    }
    let values = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| (c > 0).then(|| s / f64::from(c)))
        .collect();
    Ok(RoundMap {
        width: w,
        height: h,
        values,
    })
}

/// Per-pixel median over the rounds that covered the pixel; for an even
/// count, the mean of the two middle values. Pixels no round covered take
/// their trimap value, and an uncovered Unknown pixel is an error.
pub fn multi_sample_median(rounds: &[RoundMap], trimap: &Trimap) -> Result<GrayMap> {
    if rounds.is_empty() {
        return Err(Error::param("samples_k", "need at least one round"));
    }
    let (w, h) = trimap.dims();
    for r in rounds {
        crate::raster::ensure_same_dims((w, h), r.dims())?;
    }
    let mut data = Vec::with_capacity(w as usize * h as usize);
    let mut samples = Vec::with_capacity(rounds.len());
    for (i, label) in trimap.labels().iter().enumerate() {
        samples.clear();
        samples.extend(rounds.iter().filter_map(|r| r.values[i]));
        let value = if samples.is_empty() {
            match label {
                TrimapLabel::Foreground => 1.0,
                TrimapLabel::Background => 0.0,
                TrimapLabel::Unknown => {
                    return Err(Error::UncoveredUnknown {
                        x: (i % w as usize) as u32,
                        y: (i / w as usize) as u32,
                    })
                }
            }
        } else {
            samples.sort_by(f64::total_cmp);
            let m = samples.len();
            if m % 2 == 1 {
                samples[m / 2]
            } else {
                (samples[m / 2 - 1] + samples[m / 2]) / 2.0
            }
        };
        data.push(value);
    }
    GrayMap::new(w, h, data)
}

/// Matte one patch. A patch that sees no Foreground or no Background
/// cannot form a valid request; it contributes the trimap opacities instead
/// (0.5 on Unknown).
fn matte_rect(backend: &dyn MattingBackend, image: &RgbImage, trimap: &Trimap, rect: PatchRect) -> Result<AlphaMatte> {
    let tri = trimap.crop(rect.x0, rect.y0, rect.width, rect.height)?;
    if !tri.contains(TrimapLabel::Foreground) || !tri.contains(TrimapLabel::Background) {
        return Ok(tri.to_alpha());
    }
    let img = image.crop(rect.x0, rect.y0, rect.width, rect.height)?;
    matte_patch(backend, &MattingRequest::new(img, tri)?)
}

/// Alpha from a patched run, together with the plans used in each round.
#[derive(Clone, Debug)]
pub struct PatchedOutcome {
    pub alpha: AlphaMatte,
    pub plans: Vec<PatchPlan>,
}

/// Full patch-based inference at the trimap's resolution.
pub fn run_patched_detailed(
    backend: &dyn MattingBackend,
    image: &RgbImage,
    trimap: &Trimap,
    config: &PipelineConfig,
    seed: u64,
) -> Result<PatchedOutcome> {
    crate::raster::ensure_same_dims(image.dims(), trimap.dims())?;
    if !trimap.contains(TrimapLabel::Unknown) {
        return Ok(PatchedOutcome {
            alpha: trimap.mask_of(TrimapLabel::Foreground).into(),
            plans: Vec::new(),
        });
    }
    if !trimap.contains(TrimapLabel::Foreground) || !trimap.contains(TrimapLabel::Background) {
        return Err(Error::InvalidRequest(
            "trimap needs at least one foreground and one background pixel".into(),
        ));
    }

    let (w_img, w_tri) = resize_to_working(image, trimap, config.working_size, config.resize_mode)?;
    let (plans, working_alpha) = if w_tri.contains(TrimapLabel::Unknown) {
        let plans = (0..config.samples_k)
            .map(|k| sample_patch_centers(&w_tri, config.patch_size, derive_seed(seed, &[k as u64])))
            .collect::<Result<Vec<_>>>()?;
        let rounds = plans
            .par_iter()
            .map(|plan| {
                let patches = plan
                    .rects()
                    .into_par_iter()
                    .map(|rect| Ok((matte_rect(backend, &w_img, &w_tri, rect)?, (rect.x0, rect.y0))))
                    .collect::<Result<Vec<_>>>()?;
                blend_round(&patches, w_tri.dims())
            })
            .collect::<Result<Vec<_>>>()?;
        (plans, multi_sample_median(&rounds, &w_tri)?)
    } else {
        // The band vanished at working resolution.
        (Vec::new(), w_tri.to_alpha().into_map())
    };

    let full = resize_bilinear_map(&working_alpha, trimap.width(), trimap.height());
    Ok(PatchedOutcome {
        alpha: impose_constraints(full, trimap),
        plans,
    })
}

pub fn run_patched(
    backend: &dyn MattingBackend,
    image: &RgbImage,
    trimap: &Trimap,
    config: &PipelineConfig,
    seed: u64,
) -> Result<AlphaMatte> {
    run_patched_detailed(backend, image, trimap, config, seed).map(|o| o.alpha)
}
