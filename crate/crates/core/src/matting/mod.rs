//! Matting backends.
//!
//! A backend turns an image patch and its trimap into an alpha matte. The
//! [`matte_patch`] entry point validates the request and re-imposes the
//! trimap constraints on whatever the backend returns, so every backend
//! satisfies the same contract: opaque on Foreground, transparent on
//! Background, values in [0, 1].

pub mod cg;
pub mod laplacian;

use std::path::PathBuf;
use std::process::Command;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::io;
use crate::raster::{AlphaMatte, GrayMap, RgbImage, Trimap, TrimapLabel};

pub use laplacian::{build_matting_laplacian, PixelStencilMatrix};

/// Tunables of the reference affinity solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub window_radius: u32,
    pub epsilon: f64,
    pub constraint_weight: f64,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            window_radius: 1,
            epsilon: 1e-7,
            constraint_weight: 100.0,
            cg_tolerance: 1e-10,
            cg_max_iterations: 2000,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_radius < 1 {
            return Err(Error::param("window_radius", "must be at least 1"));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("constraint_weight", self.constraint_weight),
            ("cg_tolerance", self.cg_tolerance),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// An image patch with its trimap. Holds at least one Foreground and one
/// Background pixel.
#[derive(Clone, Debug)]
pub struct MattingRequest {
    image: RgbImage,
    trimap: Trimap,
}

impl MattingRequest {
    pub fn new(image: RgbImage, trimap: Trimap) -> Result<Self> {
        crate::raster::ensure_same_dims(image.dims(), trimap.dims())?;
        if !trimap.contains(TrimapLabel::Foreground) {
            return Err(Error::InvalidRequest("trimap has no foreground pixel".into()));
        }
        if !trimap.contains(TrimapLabel::Background) {
            return Err(Error::InvalidRequest("trimap has no background pixel".into()));
        }
        Ok(Self { image, trimap })
    }

    pub fn image(&self) -> &RgbImage {
        &self.image
    }

    pub fn trimap(&self) -> &Trimap {
        &self.trimap
    }
}

pub trait MattingBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Whether concurrent calls to [`MattingBackend::matte`] are allowed.
    fn is_reentrant(&self) -> bool {
        true
    }

    fn matte(&self, request: &MattingRequest) -> Result<AlphaMatte>;
}

/// Runs `backend` and enforces the output contract.
pub fn matte_patch(backend: &dyn MattingBackend, request: &MattingRequest) -> Result<AlphaMatte> {
    let trimap = request.trimap();
    if !trimap.contains(TrimapLabel::Unknown) {
        return Ok(trimap.mask_of(TrimapLabel::Foreground).into());
    }
    let alpha = backend.matte(request)?;
    if alpha.dims() != trimap.dims() {
        return Err(Error::BackendFailure {
            backend: backend.name().to_owned(),
            reason: format!("returned {:?} matte for a {:?} patch", alpha.dims(), trimap.dims()),
        });
    }
    Ok(impose_constraints(alpha.into_map(), trimap))
}

/// Clamps to [0, 1] and snaps Foreground/Background pixels to exactly 1/0.
pub fn impose_constraints(mut map: GrayMap, trimap: &Trimap) -> AlphaMatte {
    for (v, label) in map.data_mut().iter_mut().zip(trimap.labels()) {
        match label {
            TrimapLabel::Foreground => *v = 1.0,
            TrimapLabel::Background => *v = 0.0,
            TrimapLabel::Unknown => {}
        }
    }
    AlphaMatte::from_clamped(map)
}

impl From<crate::raster::BinaryMask> for AlphaMatte {
    fn from(mask: crate::raster::BinaryMask) -> Self {
        let (w, h) = mask.dims();
        let data = mask.data().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        AlphaMatte::new(GrayMap::new(w, h, data).expect("mask dimensions")).expect("binary values")
    }
}

/// The penalized system `(L + c·D) α = c·b` solved by the reference backend.
pub struct ConstrainedSystem {
    pub laplacian: PixelStencilMatrix,
    /// `c` on constrained pixels, 0 on Unknown.
    pub penalty: Vec<f64>,
    /// `c` on Foreground, 0 elsewhere.
    pub rhs: Vec<f64>,
}

impl ConstrainedSystem {
    pub fn assemble(image: &RgbImage, trimap: &Trimap, params: &SolverParams) -> Result<Self> {
        params.validate()?;
        crate::raster::ensure_same_dims(image.dims(), trimap.dims())?;
        let laplacian = build_matting_laplacian(image, params.window_radius, params.epsilon)?;
        let c = params.constraint_weight;
        let penalty = trimap
            .labels()
            .iter()
            .map(|l| if *l == TrimapLabel::Unknown { 0.0 } else { c })
            .collect();
        let rhs = trimap
            .labels()
            .iter()
            .map(|l| if *l == TrimapLabel::Foreground { c } else { 0.0 })
            .collect();
        Ok(Self {
            laplacian,
            penalty,
            rhs,
        })
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.laplacian.mul_vec_into(x, out);
        for ((o, p), xi) in out.iter_mut().zip(&self.penalty).zip(x) {
            *o += p * xi;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.laplacian
            .diagonal()
            .iter()
            .zip(&self.penalty)
            .map(|(l, p)| l + p)
            .collect()
    }
}

/// Solves the penalized system by conjugate gradient and returns the raw
/// (unclamped) solution together with solver statistics.
pub fn solve_alpha_raw(image: &RgbImage, trimap: &Trimap, params: &SolverParams, trace_energy: bool) -> Result<cg::CgOutcome> {
    let system = ConstrainedSystem::assemble(image, trimap, params)?;
    let x0 = trimap.labels().iter().map(|l| l.alpha()).collect();
    let mut diag = system.diagonal();
    // Unknown pixels in flat regions can have a vanishing Laplacian diagonal.
    for d in &mut diag {
        if *d <= f64::EPSILON {
            *d = 1.0;
        }
    }
    cg::solve(
        |v, o| system.apply(v, o),
        &diag,
        &system.rhs,
        x0,
        cg::CgSettings {
            tolerance: params.cg_tolerance,
            max_iterations: params.cg_max_iterations,
            trace_energy,
        },
    )
}

/// Reference solve: CG on the penalized system, clamped, constraints snapped.
pub fn solve_alpha(image: &RgbImage, trimap: &Trimap, params: &SolverParams) -> Result<AlphaMatte> {
    let outcome = solve_alpha_raw(image, trimap, params, false)?;
    let (w, h) = trimap.dims();
    Ok(impose_constraints(GrayMap::new(w, h, outcome.solution)?, trimap))
}

/// Deterministic affinity-based backend.
#[derive(Clone, Debug, Default)]
pub struct ReferenceBackend {
    pub params: SolverParams,
}

impl ReferenceBackend {
    pub fn new(params: SolverParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl MattingBackend for ReferenceBackend {
    fn name(&self) -> &str {
        "reference"
    }

    fn matte(&self, request: &MattingRequest) -> Result<AlphaMatte> {
        solve_alpha(request.image(), request.trimap(), &self.params)
    }
}

/// Delegates to an external program invoked as
/// `<program> <image.png> <trimap.png> <alpha.png>`; exit status 0 means the
/// alpha file was written.
#[derive(Clone, Debug)]
pub struct ExecBackend {
    program: PathBuf,
    reentrant: bool,
    name: String,
}

impl ExecBackend {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        let program = program.into();
        let name = format!("exec:{}", program.display());
        Self {
            program,
            reentrant: false,
            name,
        }
    }

    /// Declares the program safe to run as several concurrent processes.
    pub fn reentrant(mut self, yes: bool) -> Self {
        self.reentrant = yes;
        self
    }

    fn failure(&self, reason: impl Into<String>) -> Error {
        Error::BackendFailure {
            backend: self.name.clone(),
            reason: reason.into(),
        }
    }
}

impl MattingBackend for ExecBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_reentrant(&self) -> bool {
        self.reentrant
    }

    fn matte(&self, request: &MattingRequest) -> Result<AlphaMatte> {
        let dir = tempfile::tempdir()?;
        let image_path = dir.path().join("image.png");
        let trimap_path = dir.path().join("trimap.png");
        let alpha_path = dir.path().join("alpha.png");
        io::write_rgb(&image_path, request.image())?;
        io::write_trimap(&trimap_path, request.trimap())?;

        let status = Command::new(&self.program)
            .arg(&image_path)
            .arg(&trimap_path)
            .arg(&alpha_path)
            .status()
            .map_err(|e| self.failure(format!("could not start: {e}")))?;
        if !status.success() {
            return Err(self.failure(format!("exited with {status}")));
        }
        io::read_alpha(&alpha_path).map_err(|e| self.failure(format!("unreadable output: {e}")))
    }
}

/// Serializes calls into a backend that is not reentrant.
pub struct Serialized<'a> {
    inner: &'a dyn MattingBackend,
    gate: Mutex<()>,
}

impl<'a> Serialized<'a> {
    pub fn new(inner: &'a dyn MattingBackend) -> Self {
        Self {
            inner,
            gate: Mutex::new(()),
        }
    }
}

impl MattingBackend for Serialized<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn is_reentrant(&self) -> bool {
        true
    }

    fn matte(&self, request: &MattingRequest) -> Result<AlphaMatte> {
        let _guard = self.gate.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
        self.inner.matte(request)
    }
}
