use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use instmatte::composite::synthetic::{fixture, FixtureKind};
use instmatte::composite::{extract_rgba, layer_composite, metrics, over, Region};
use instmatte::ingest::{read_manifest, single_instance_document};
use instmatte::io;
use instmatte::matting::{ExecBackend, MattingBackend, ReferenceBackend, SolverParams};
use instmatte::patcher::ResizeMode;
use instmatte::pipeline::{matte_all, InstanceFilter, PipelineConfig};
use instmatte::raster::{BinaryMask, RgbImage, TrimapLabel};
use instmatte::trimap::{alpha_to_trimap, TrimapParams};

#[derive(Parser, Debug)]
#[command(name = "instmatte", version, about = "Instance-aware alpha matting from coarse segmentation masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Matte every instance of a manifest.
    Matte(MatteArgs),
    /// Layer extracted instances over a new background.
    Composite(CompositeArgs),
    /// Generate a synthetic scene with ground-truth alpha.
    Synth(SynthArgs),
    /// Score an alpha matte against ground truth.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct MatteArgs {
    /// Input image; overrides the manifest's `image`.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated class labels to matte.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    /// Drop detections scoring below this.
    #[arg(long, default_value_t = 0.0)]
    min_score: f64,
    #[arg(long, default_value_t = 4)]
    passes: usize,
    /// Sampling rounds per pass.
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 320)]
    patch: u32,
    /// Working resolution, `N` or `WxH`.
    #[arg(long, default_value = "640")]
    working: Dims,
    /// Keep the aspect ratio when shrinking to the working resolution.
    #[arg(long)]
    preserve_aspect: bool,
    #[arg(long, default_value_t = 0.10)]
    rate: f64,
    #[arg(long, default_value_t = 0.5)]
    decay: f64,
    #[arg(long, default_value_t = 0.95)]
    hi: f64,
    #[arg(long, default_value_t = 0.05)]
    lo: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the trimap used in every pass.
    #[arg(long)]
    history: bool,
    /// `reference` or `exec:<program>`.
    #[arg(long, default_value = "reference")]
    backend: BackendSpec,
    /// Background for the `_composite.png` previews (default mid-gray).
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompositeArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    alphas: Vec<PathBuf>,
    #[arg(long)]
    background: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value = "disk")]
    kind: FixtureKind,
    #[arg(long, default_value_t = 3)]
    perturb: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    alpha: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_enum, default_value = "unknown")]
    region: RegionArg,
    /// Trimap whose Unknown pixels form the `unknown` region; derived from
    /// the ground truth when absent.
    #[arg(long)]
    trimap: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum RegionArg {
    All,
    Unknown,
}

#[derive(Clone, Copy, Debug)]
struct Dims(u32, u32);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("`{v}`: {e}"));
        match s.split_once(['x', 'X']) {
            Some((w, h)) => Ok(Dims(parse(w)?, parse(h)?)),
            None => {
                let n = parse(s)?;
                Ok(Dims(n, n))
            }
        }
    }
}

#[derive(Clone, Debug)]
enum BackendSpec {
    Reference,
    Exec(PathBuf),
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reference" => Ok(Self::Reference),
            _ => match s.strip_prefix("exec:") {
                Some(p) if !p.is_empty() => Ok(Self::Exec(PathBuf::from(p))),
                _ => Err(format!("unknown backend `{s}` (reference, exec:<program>)")),
            },
        }
    }
}

/// Errors that abort a command before any instance is processed.
struct InvalidInput(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InvalidInput {
    fn from(e: E) -> Self {
        InvalidInput(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Matte(a) => run_matte(a),
        Command::Composite(a) => run_composite(a).map(|()| ExitCode::SUCCESS),
        Command::Synth(a) => run_synth(a).map(|()| ExitCode::SUCCESS),
        Command::Eval(a) => run_eval(a).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|InvalidInput(e)| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}

fn run_matte(a: MatteArgs) -> Result<ExitCode, InvalidInput> {
    let config = PipelineConfig {
        passes: a.passes,
        samples_k: a.k,
        patch_size: a.patch,
        working_size: (a.working.0, a.working.1),
        resize_mode: if a.preserve_aspect { ResizeMode::PreserveAspect } else { ResizeMode::Stretch },
        initial_rate: a.rate,
        rate_decay: a.decay,
        trimap_params: TrimapParams {
            rate: a.rate,
            hi_threshold: a.hi,
            lo_threshold: a.lo,
        },
        solver: SolverParams::default(),
        seed: a.seed,
        keep_history: a.history,
    };
    config.validate()?;
    if !(0.0..=1.0).contains(&a.min_score) {
        return Err(anyhow::anyhow!("--min-score {} not in [0, 1]", a.min_score).into());
    }

    // The manifest names the image, but its masks must be checked against
    // the image dims; read the document once to find the image first.
    let image_path = match &a.image {
        Some(p) => p.clone(),
        None => manifest_image(&a.manifest)?,
    };
    let image = io::read_rgb(&image_path)?;
    let manifest = read_manifest(&a.manifest, image.dims())
        .with_context(|| format!("invalid manifest {}", a.manifest.display()))?;

    let backend: Box<dyn MattingBackend> = match &a.backend {
        BackendSpec::Reference => Box::new(ReferenceBackend::new(config.solver)?),
        BackendSpec::Exec(p) => Box::new(ExecBackend::new(p)),
    };
    let background = match &a.background {
        Some(p) => {
            let bg = io::read_rgb(p)?;
            if bg.dims() != image.dims() {
                bail_input(format!("background {} does not match the image dims", p.display()))?;
            }
            bg
        }
        None => RgbImage::filled(image.width(), image.height(), [128, 128, 128])?,
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;

    let filter = InstanceFilter {
        labels: a.labels.clone(),
        min_score: a.min_score,
    };
    let results = matte_all(backend.as_ref(), &image, &manifest.instances, &config, &filter);
    if results.is_empty() {
        eprintln!("no instance selected");
    }

    let stem = image_path.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    let mut failed = false;
    for (id, result) in results {
        let written = result.map_err(anyhow::Error::from).and_then(|r| {
            let base = a.out.join(format!("{stem}_inst{id}"));
            let path = |suffix: &str| PathBuf::from(format!("{}{suffix}", base.display()));
            io::write_alpha(&path("_alpha.png"), &r.final_alpha)?;
            let rgba = extract_rgba(&image, &r.final_alpha)?;
            io::write_rgba(&path("_rgba.png"), &rgba)?;
            io::write_rgb(&path("_composite.png"), &over(&rgba, &background)?)?;
            for (k, rec) in r.per_pass.iter().enumerate() {
                io::write_trimap(&path(&format!("_trimap_p{k}.png")), &rec.trimap)?;
            }
            Ok(())
        });
        match written {
            Ok(()) => eprintln!("instance {id}: ok"),
            Err(e) => {
                failed = true;
                eprintln!("instance {id}: failed: {e:#}");
            }
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn bail_input(msg: String) -> Result<(), InvalidInput> {
    Err(anyhow::anyhow!(msg).into())
}

fn manifest_image(manifest: &Path) -> anyhow::Result<PathBuf> {
    let doc = std::fs::read_to_string(manifest).with_context(|| format!("cannot read {}", manifest.display()))?;
    let v: serde_json::Value =
        serde_json::from_str(&doc).with_context(|| format!("invalid manifest {}", manifest.display()))?;
    let Some(name) = v.get("image").and_then(|i| i.as_str()) else {
        bail!("no --image given and the manifest names no image");
    };
    Ok(manifest.parent().unwrap_or(Path::new(".")).join(name))
}

fn run_composite(a: CompositeArgs) -> Result<(), InvalidInput> {
    let image = io::read_rgb(&a.image)?;
    let background = io::read_rgb(&a.background)?;
    let mattes = a
        .alphas
        .iter()
        .map(|p| io::read_alpha(p))
        .collect::<Result<Vec<_>, _>>()?;
    io::write_rgb(&a.out, &layer_composite(&image, &mattes, &background)?)?;
    Ok(())
}

fn run_synth(a: SynthArgs) -> Result<(), InvalidInput> {
    let scene = fixture(a.kind, a.perturb, a.seed)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    io::write_rgb(&a.out.join("image.png"), &scene.image)?;
    io::write_alpha(&a.out.join("gt_alpha.png"), &scene.gt_alpha)?;
    io::write_mask(&a.out.join("mask.png"), &scene.coarse_mask)?;
    let label = match a.kind {
        FixtureKind::Disk => "disk",
        FixtureKind::Rect => "rect",
        FixtureKind::MotionBar => "motion-bar",
    };
    let doc = single_instance_document("image.png", 1, label, &scene.bbox, "mask.png");
    std::fs::write(a.out.join("manifest.json"), doc + "\n")?;
    Ok(())
}

fn run_eval(a: EvalArgs) -> Result<(), InvalidInput> {
    let alpha = io::read_alpha(&a.alpha)?;
    let gt = io::read_alpha(&a.gt)?;
    let (w, h) = gt.dims();
    let (region, kind) = match a.region {
        RegionArg::All => (BinaryMask::from_fn(w, h, |_, _| true)?, Region::All),
        RegionArg::Unknown => {
            let trimap = match &a.trimap {
                Some(p) => io::read_trimap(p)?,
                None => alpha_to_trimap(&gt, 1, &TrimapParams::default())?,
            };
            (trimap.mask_of(TrimapLabel::Unknown), Region::Unknown)
        }
    };
    let report = metrics(&alpha, &gt, &region, kind)?;
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}
