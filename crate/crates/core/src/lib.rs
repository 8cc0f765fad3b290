//! Instance-aware alpha matting.
//!
//! Coarse instance masks are turned into trimaps, refined by a matting
//! backend at a fixed working resolution through randomly placed patches,
//! and fed back into a new, narrower trimap for a few passes. Neighbouring
//! instances are kept out of each other's unknown band.
//!
//! ```no_run
//! use instmatte::{matte_instance, PipelineConfig, ReferenceBackend};
//! # fn demo(image: &instmatte::RgbImage, inst: &instmatte::InstanceAnnotation) -> instmatte::Result<()> {
//! let backend = ReferenceBackend::default();
//! let result = matte_instance(&backend, image, inst, &[], &PipelineConfig::default())?;
//! println!("{} pixels", result.final_alpha.data().len());
//! # Ok(()) }
//! ```

pub mod composite;
pub mod error;
pub mod ingest;
pub mod io;
pub mod matting;
pub mod morphology;
pub mod patcher;
pub mod pipeline;
pub mod raster;
pub mod trimap;

pub use composite::{composite_pixelwise, extract_rgba, layer_composite, metrics, MetricsReport, Region};
pub use error::{Error, Result};
pub use ingest::{decode_rle, encode_rle, parse_manifest, read_manifest, SceneManifest};
pub use matting::{
    matte_patch, solve_alpha, ExecBackend, MattingBackend, MattingRequest, ReferenceBackend, Serialized, SolverParams,
};
pub use patcher::{multi_sample_median, run_patched, ResizeMode};
pub use pipeline::{
    matte_all, matte_instance, InstanceAnnotation, InstanceFilter, InstanceMatteResult, PassRecord, PipelineConfig,
};
pub use raster::{AlphaMatte, BinaryMask, BoundingBox, GrayMap, RgbImage, RgbaImage, Trimap, TrimapLabel};
pub use trimap::{alpha_to_trimap, mask_to_trimap, suppress_other_instances, TrimapParams};
