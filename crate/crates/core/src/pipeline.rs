//! Per-instance orchestration: an initial trimap from the coarse mask, then
//! a fixed number of matting passes, each feeding a tighter trimap derived
//! from its alpha into the next.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matting::{MattingBackend, Serialized, SolverParams};
use crate::patcher::{derive_seed, run_patched, ResizeMode};
use crate::raster::{AlphaMatte, BinaryMask, BoundingBox, RgbImage, Trimap};
use crate::trimap::{alpha_to_trimap, dilation_radius, mask_to_trimap, suppress_other_instances, TrimapParams};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Number of matting passes.
    pub passes: usize,
    /// Sampling rounds merged by median in every pass.
    pub samples_k: usize,
    pub patch_size: u32,
    pub working_size: (u32, u32),
    pub resize_mode: ResizeMode,
    /// Dilation rate of the first-pass trimap.
    pub initial_rate: f64,
    /// Factor applied to the rate after every pass.
    pub rate_decay: f64,
    /// Thresholds for feedback trimaps; `rate` is ignored in favor of the
    /// decaying schedule.
    pub trimap_params: TrimapParams,
    pub solver: SolverParams,
    pub seed: u64,
    /// Keep every pass's trimap and alpha in the result.
    pub keep_history: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            passes: 4,
            samples_k: 10,
            patch_size: 320,
            working_size: (640, 640),
            resize_mode: ResizeMode::Stretch,
            initial_rate: 0.10,
            rate_decay: 0.5,
            trimap_params: TrimapParams::default(),
            solver: SolverParams::default(),
            seed: 0,
            keep_history: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.passes < 1 {
            return Err(Error::param("passes", "must be at least 1"));
        }
        if self.samples_k < 1 {
            return Err(Error::param("samples_k", "must be at least 1"));
        }
        if self.patch_size < 1 {
            return Err(Error::param("patch_size", "must be positive"));
        }
        let (ww, wh) = self.working_size;
        if ww < self.patch_size || wh < self.patch_size {
            return Err(Error::param(
                "working_size",
                format!("{ww}x{wh} is smaller than the {} patch", self.patch_size),
            ));
        }
        if !(self.rate_decay > 0.0 && self.rate_decay <= 1.0) {
            return Err(Error::param("rate_decay", format!("{} not in (0, 1]", self.rate_decay)));
        }
        TrimapParams {
            rate: self.initial_rate,
            ..self.trimap_params
        }
        .validate()?;
        self.solver.validate()
    }

    /// Dilation radius for the trimap feeding pass `pass` (0-based).
    pub fn radius_for_pass(&self, bbox: &BoundingBox, pass: usize) -> u32 {
        let rate = self.initial_rate * self.rate_decay.powi(pass as i32);
        dilation_radius(bbox, rate)
    }
}

/// One detected object.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceAnnotation {
    pub id: u64,
    pub label: String,
    pub score: f64,
    pub bbox: BoundingBox,
    pub mask: BinaryMask,
}

impl InstanceAnnotation {
    pub fn validate_for(&self, image_dims: (u32, u32)) -> Result<()> {
        crate::raster::ensure_same_dims(image_dims, self.mask.dims())?;
        if !self.bbox.fits_within(image_dims.0, image_dims.1) {
            let b = self.bbox;
            return Err(Error::InvalidBoundingBox {
                x0: b.x0,
                y0: b.y0,
                x1: b.x1,
                y1: b.y1,
            });
        }
        if self.mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassRecord {
    /// Trimap the pass was run with.
    pub trimap: Trimap,
    /// Alpha the pass produced.
    pub alpha: AlphaMatte,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceMatteResult {
    pub instance_id: u64,
    pub final_alpha: AlphaMatte,
    /// One record per pass when history is kept, else empty.
    pub per_pass: Vec<PassRecord>,
}

/// Runs the feedback loop for one instance. `others` are the coarse masks of
/// the competing instances; their eroded interiors are forced to background
/// in every pass's trimap.
pub fn matte_instance(
    backend: &dyn MattingBackend,
    image: &RgbImage,
    instance: &InstanceAnnotation,
    others: &[&BinaryMask],
    config: &PipelineConfig,
) -> Result<InstanceMatteResult> {
    let id = instance.id;
    config.validate().map_err(|e| e.at_stage(id, 0))?;
    instance.validate_for(image.dims()).map_err(|e| e.at_stage(id, 0))?;

    let radius = config.radius_for_pass(&instance.bbox, 0);
    let mut trimap = mask_to_trimap(&instance.mask, radius)
        .and_then(|t| suppress_other_instances(&t, others, radius))
        .map_err(|e| e.at_stage(id, 0))?;

    let mut per_pass = Vec::new();
    let mut alpha = None;
    for pass in 1..=config.passes {
        let seed = derive_seed(config.seed, &[id, pass as u64]);
        let a = run_patched(backend, image, &trimap, config, seed).map_err(|e| e.at_stage(id, pass))?;
        if pass < config.passes {
            let radius = config.radius_for_pass(&instance.bbox, pass);
            let next = alpha_to_trimap(&a, radius, &config.trimap_params)
                .and_then(|t| suppress_other_instances(&t, others, radius))
                .map_err(|e| e.at_stage(id, pass))?;
            let used = std::mem::replace(&mut trimap, next);
            if config.keep_history {
                per_pass.push(PassRecord {
                    trimap: used,
                    alpha: a.clone(),
                });
            }
        } else if config.keep_history {
            per_pass.push(PassRecord {
                trimap: trimap.clone(),
                alpha: a.clone(),
            });
        }
        alpha = Some(a);
    }

    Ok(InstanceMatteResult {
        instance_id: id,
        final_alpha: alpha.expect("at least one pass"),
        per_pass,
    })
}

/// Which instances of a scene to matte.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceFilter {
    /// Keep only these class labels; `None` keeps all.
    pub labels: Option<Vec<String>>,
    /// Instances scoring below this are dropped entirely.
    pub min_score: f64,
}

/// Mattes every selected instance, one object at a time, with every other
/// retained instance acting as a suppressor. Results follow input order.
/// Instances that fail do not stop the others.
pub fn matte_all(
    backend: &dyn MattingBackend,
    image: &RgbImage,
    instances: &[InstanceAnnotation],
    config: &PipelineConfig,
    filter: &InstanceFilter,
) -> Vec<(u64, Result<InstanceMatteResult>)> {
    let serialized;
    let backend: &dyn MattingBackend = if backend.is_reentrant() {
        backend
    } else {
        serialized = Serialized::new(backend);
        &serialized
    };

    let retained: Vec<&InstanceAnnotation> = instances.iter().filter(|i| i.score >= filter.min_score).collect();
    let selected: Vec<usize> = retained
        .iter()
        .enumerate()
        .filter(|(_, inst)| {
            filter
                .labels
                .as_ref()
                .is_none_or(|labels| labels.contains(&inst.label))
        })
        .map(|(i, _)| i)
        .collect();

    selected
        .par_iter()
        .map(|&i| {
            let inst = retained[i];
            let others: Vec<&BinaryMask> = retained
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| &o.mask)
                .collect();
            (inst.id, matte_instance(backend, image, inst, &others, config))
        })
        .collect()
}
