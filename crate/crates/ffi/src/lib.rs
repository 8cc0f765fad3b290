//! C interface to `instmatte`.
//!
//! Rasters cross the boundary as opaque handles created from caller-owned
//! buffers and released with the matching `*_free` function. Every fallible
//! call returns an [`ImStatus`]; on failure a description is available from
//! [`im_last_error_message`] on the same thread until the next call.
//!
//! Buffer layouts are row-major: RGB images take 3 bytes per pixel, masks
//! one byte per pixel (nonzero = set), trimaps one byte per pixel
//! (0 background, 128 unknown, 255 foreground), alpha mattes one `double`
//! per pixel in [0, 1].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use instmatte::composite::{composite_pixelwise, metrics, Region};
use instmatte::matting::{ReferenceBackend, SolverParams};
use instmatte::patcher::ResizeMode;
use instmatte::pipeline::{matte_instance, InstanceAnnotation, PipelineConfig};
use instmatte::raster::{AlphaMatte, BinaryMask, BoundingBox, GrayMap, RgbImage};
use instmatte::trimap::{mask_to_trimap, TrimapParams};
use instmatte::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    EmptyInput = 4,
    SolverFailure = 5,
    BackendFailure = 6,
    Io = 7,
    Internal = 99,
}

/// RGB image, 8 bits per channel.
pub struct ImImage(RgbImage);

/// Binary mask.
pub struct ImMask(BinaryMask);

/// Alpha matte.
pub struct ImAlpha(AlphaMatte);

/// Pipeline settings; obtain defaults from [`im_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ImConfig {
    pub passes: u32,
    pub samples_k: u32,
    pub patch_size: u32,
    pub working_width: u32,
    pub working_height: u32,
    /// Nonzero keeps the aspect ratio when shrinking to the working size.
    pub preserve_aspect: u8,
    pub initial_rate: f64,
    pub rate_decay: f64,
    pub hi_threshold: f64,
    pub lo_threshold: f64,
    pub seed: u64,
    pub window_radius: u32,
    pub epsilon: f64,
    pub constraint_weight: f64,
    pub cg_tolerance: f64,
    pub cg_max_iterations: u32,
}

/// Evaluation scores.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ImMetrics {
    pub sad: f64,
    pub mse: f64,
    pub gradient_error: f64,
    pub pixels: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ImStatus {
    match e {
        Error::Stage { source, .. } => status_of(source),
        Error::DimensionMismatch { .. } => ImStatus::DimensionMismatch,
        Error::EmptyMask | Error::EmptyRegion | Error::NoUnknownRegion => ImStatus::EmptyInput,
        Error::NonConvergence { .. } | Error::UncoveredUnknown { .. } | Error::DegenerateAlpha => {
            ImStatus::SolverFailure
        }
        Error::BackendFailure { .. } => ImStatus::BackendFailure,
        Error::Io(_) | Error::Image { .. } => ImStatus::Io,
        _ => ImStatus::InvalidArgument,
    }
}

struct Failure(ImStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ImStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ImStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ImStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            ImStatus::Internal
        }
    }
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller guarantees `data` points to `len` readable values.
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: non-null handles were produced by this library and not freed.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

fn expect_len(actual: usize, expected: u64, what: &str) -> Result<(), Failure> {
    if actual as u64 != expected {
        return Err(Failure(
            ImStatus::InvalidArgument,
            format!("`{what}` holds {actual} values, expected {expected}"),
        ));
    }
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: `out` is non-null and writable per the caller's contract.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message describing the last failure on this thread; empty after a
/// successful call. Owned by the library.
#[no_mangle]
pub extern "C" fn im_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn im_config_default() -> ImConfig {
    let p = PipelineConfig::default();
    ImConfig {
        passes: p.passes as u32,
        samples_k: p.samples_k as u32,
        patch_size: p.patch_size,
        working_width: p.working_size.0,
        working_height: p.working_size.1,
        preserve_aspect: u8::from(p.resize_mode == ResizeMode::PreserveAspect),
        initial_rate: p.initial_rate,
        rate_decay: p.rate_decay,
        hi_threshold: p.trimap_params.hi_threshold,
        lo_threshold: p.trimap_params.lo_threshold,
        seed: p.seed,
        window_radius: p.solver.window_radius,
        epsilon: p.solver.epsilon,
        constraint_weight: p.solver.constraint_weight,
        cg_tolerance: p.solver.cg_tolerance,
        cg_max_iterations: p.solver.cg_max_iterations as u32,
    }
}

impl From<&ImConfig> for PipelineConfig {
    fn from(c: &ImConfig) -> Self {
        PipelineConfig {
            passes: c.passes as usize,
            samples_k: c.samples_k as usize,
            patch_size: c.patch_size,
            working_size: (c.working_width, c.working_height),
            resize_mode: if c.preserve_aspect != 0 { ResizeMode::PreserveAspect } else { ResizeMode::Stretch },
            initial_rate: c.initial_rate,
            rate_decay: c.rate_decay,
            trimap_params: TrimapParams {
                rate: c.initial_rate,
                hi_threshold: c.hi_threshold,
                lo_threshold: c.lo_threshold,
            },
            solver: SolverParams {
                window_radius: c.window_radius,
                epsilon: c.epsilon,
                constraint_weight: c.constraint_weight,
                cg_tolerance: c.cg_tolerance,
                cg_max_iterations: c.cg_max_iterations as usize,
            },
            seed: c.seed,
            keep_history: false,
        }
    }
}

/// Copies `len = 3·width·height` bytes into a new image.
///
/// # Safety
/// `rgb` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn im_image_new(
    width: u32,
    height: u32,
    rgb: *const u8,
    len: usize,
    out: *mut *mut ImImage,
) -> ImStatus {
    guard(|| {
        let data = unsafe { slice(rgb, len, "rgb") }?;
        expect_len(len, 3 * u64::from(width) * u64::from(height), "rgb")?;
        let img = RgbImage::new(width, height, data.to_vec())?;
        unsafe { emit(out, ImImage(img), "out") }
    })
}

/// # Safety
/// `image` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn im_image_width(image: *const ImImage) -> u32 {
    unsafe { image.as_ref() }.map_or(0, |i| i.0.width())
}

/// # Safety
/// `image` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn im_image_height(image: *const ImImage) -> u32 {
    unsafe { image.as_ref() }.map_or(0, |i| i.0.height())
}

/// Copies the pixels into `rgb`, which must hold exactly `3·width·height`
/// bytes.
///
/// # Safety
/// `image` must be a live handle; `rgb` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn im_image_copy_data(image: *const ImImage, rgb: *mut u8, len: usize) -> ImStatus {
    guard(|| {
        let img = unsafe { handle(image, "image") }?;
        expect_len(len, img.0.data().len() as u64, "rgb")?;
        if rgb.is_null() {
            return Err(null("rgb"));
        }
        unsafe { ptr::copy_nonoverlapping(img.0.data().as_ptr(), rgb, len) };
        Ok(())
    })
}

/// # Safety
/// `image` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn im_image_free(image: *mut ImImage) {
    if !image.is_null() {
        drop(unsafe { Box::from_raw(image) });
    }
}

/// Builds a mask from `width·height` bytes, nonzero meaning set.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn im_mask_new(
    width: u32,
    height: u32,
    bytes: *const u8,
    len: usize,
    out: *mut *mut ImMask,
) -> ImStatus {
    guard(|| {
        let data = unsafe { slice(bytes, len, "bytes") }?;
        expect_len(len, u64::from(width) * u64::from(height), "bytes")?;
        let mask = BinaryMask::from_bytes(width, height, data)?;
        unsafe { emit(out, ImMask(mask), "out") }
    })
}

/// # Safety
/// `mask` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn im_mask_free(mask: *mut ImMask) {
    if !mask.is_null() {
        drop(unsafe { Box::from_raw(mask) });
    }
}

/// Builds a matte from `width·height` values in [0, 1].
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn im_alpha_new(
    width: u32,
    height: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut ImAlpha,
) -> ImStatus {
    guard(|| {
        let data = unsafe { slice(values, len, "values") }?;
        expect_len(len, u64::from(width) * u64::from(height), "values")?;
        let alpha = AlphaMatte::new(GrayMap::new(width, height, data.to_vec())?)?;
        unsafe { emit(out, ImAlpha(alpha), "out") }
    })
}

/// # Safety
/// `alpha` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn im_alpha_width(alpha: *const ImAlpha) -> u32 {
    unsafe { alpha.as_ref() }.map_or(0, |a| a.0.width())
}

/// # Safety
/// `alpha` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn im_alpha_height(alpha: *const ImAlpha) -> u32 {
    unsafe { alpha.as_ref() }.map_or(0, |a| a.0.height())
}

/// Copies the matte into `values`, which must hold `width·height` doubles.
///
/// # Safety
/// `alpha` must be a live handle; `values` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn im_alpha_copy_data(alpha: *const ImAlpha, values: *mut f64, len: usize) -> ImStatus {
    guard(|| {
        let a = unsafe { handle(alpha, "alpha") }?;
        expect_len(len, a.0.data().len() as u64, "values")?;
        if values.is_null() {
            return Err(null("values"));
        }
        unsafe { ptr::copy_nonoverlapping(a.0.data().as_ptr(), values, len) };
        Ok(())
    })
}

/// # Safety
/// `alpha` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn im_alpha_free(alpha: *mut ImAlpha) {
    if !alpha.is_null() {
        drop(unsafe { Box::from_raw(alpha) });
    }
}

/// Writes the initial trimap of `mask` at dilation `radius` as encoded
/// bytes into `trimap`, which must hold `width·height` bytes.
///
/// # Safety
/// `mask` must be a live handle; `trimap` must point to `len` writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn im_mask_to_trimap(mask: *const ImMask, radius: u32, trimap: *mut u8, len: usize) -> ImStatus {
    guard(|| {
        let m = unsafe { handle(mask, "mask") }?;
        let (w, h) = m.0.dims();
        expect_len(len, u64::from(w) * u64::from(h), "trimap")?;
        if trimap.is_null() {
            return Err(null("trimap"));
        }
        let bytes = mask_to_trimap(&m.0, radius)?.encode();
        unsafe { ptr::copy_nonoverlapping(bytes.as_ptr(), trimap, len) };
        Ok(())
    })
}

/// Runs the full feedback pipeline for one instance with the reference
/// solver. `bbox` is `[x0, y0, x1, y1]` or null for the mask's tight box;
/// `others` lists the coarse masks of competing instances.
///
/// # Safety
/// All handles must be live; `bbox` must be null or point to 4 values;
/// `others` must point to `n_others` live handles (or be null when
/// `n_others` is 0); `config` may be null for defaults; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn im_matte_instance(
    image: *const ImImage,
    mask: *const ImMask,
    bbox: *const u32,
    others: *const *const ImMask,
    n_others: usize,
    config: *const ImConfig,
    out: *mut *mut ImAlpha,
) -> ImStatus {
    guard(|| {
        let img = unsafe { handle(image, "image") }?;
        let m = unsafe { handle(mask, "mask") }?;
        let bbox = if bbox.is_null() {
            m.0.tight_bbox().ok_or(Error::EmptyMask)?
        } else {
            let b = unsafe { slice(bbox, 4, "bbox") }?;
            BoundingBox::new(b[0], b[1], b[2], b[3])?
        };
        let other_masks = unsafe { slice(others, n_others, "others") }?
            .iter()
            .map(|&o| unsafe { handle(o, "others[i]") }.map(|o| &o.0))
            .collect::<Result<Vec<_>, _>>()?;
        let config = match unsafe { config.as_ref() } {
            Some(c) => PipelineConfig::from(c),
            None => PipelineConfig::default(),
        };
        let backend = ReferenceBackend::new(config.solver)?;
        let inst = InstanceAnnotation {
            id: 0,
            label: String::new(),
            score: 1.0,
            bbox,
            mask: m.0.clone(),
        };
        let result = matte_instance(&backend, &img.0, &inst, &other_masks, &config)?;
        unsafe { emit(out, ImAlpha(result.final_alpha), "out") }
    })
}

/// `alpha·fg + (1 − alpha)·bg` per pixel.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn im_composite(
    fg: *const ImImage,
    bg: *const ImImage,
    alpha: *const ImAlpha,
    out: *mut *mut ImImage,
) -> ImStatus {
    guard(|| {
        let (f, b, a) = unsafe { (handle(fg, "fg")?, handle(bg, "bg")?, handle(alpha, "alpha")?) };
        let img = composite_pixelwise(&f.0, &b.0, &a.0)?;
        unsafe { emit(out, ImImage(img), "out") }
    })
}

/// Scores `alpha` against `gt` over `region`, or over every pixel when
/// `region` is null.
///
/// # Safety
/// `alpha` and `gt` must be live handles, `region` null or live; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn im_metrics(
    alpha: *const ImAlpha,
    gt: *const ImAlpha,
    region: *const ImMask,
    out: *mut ImMetrics,
) -> ImStatus {
    guard(|| {
        let (a, g) = unsafe { (handle(alpha, "alpha")?, handle(gt, "gt")?) };
        let (w, h) = g.0.dims();
        let all;
        let (mask, kind) = match unsafe { region.as_ref() } {
            Some(r) => (&r.0, Region::Unknown),
            None => {
                all = BinaryMask::from_fn(w, h, |_, _| true)?;
                (&all, Region::All)
            }
        };
        let report = metrics(&a.0, &g.0, mask, kind)?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ImMetrics {
            sad: report.sad,
            mse: report.mse,
            gradient_error: report.gradient_error,
            pixels: report.pixels as u64,
        };
        Ok(())
    })
}
