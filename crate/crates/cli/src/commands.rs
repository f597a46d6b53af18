use std::path::{Path, PathBuf};
use std::time::Instant;

use baseline_core::evaluation::{evaluate_pages, EvalReport};
use baseline_core::groundtruth::{generate_pixel_gt, render_oracle_maps, synth_corpus, SynthStyle, DEFAULT_INTERLINE};
use baseline_core::{detect_baselines, ConfidenceMaps, PipelineConfig, Point, PolyChain, Region};
use baseline_npl::{preprocess, Npl, NplArchitecture, Variant, WeightStore};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::formats::{
    atomic_write, binary_png, gray_png, maps_to_bytes, overlay_png, read_doc, read_file, read_gray, read_maps,
    to_json_17, BaselineDoc,
};

#[derive(Debug, Parser)]
#[command(name = "baseline", version, about = "Text baseline detection")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `key=value` file (or a detection JSON carrying a config snapshot)
    /// that overrides the pipeline flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for multi-file runs (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

// parsed once per process, so the variant size spread is irrelevant
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect baselines from confidence maps, or from an image and weights.
    Detect(DetectArgs),
    /// Run the pixel labeler and write confidence maps.
    Infer(InferArgs),
    /// Render pixel ground truth planes from a baseline JSON.
    Gtgen(GtgenArgs),
    /// Write synthetic pages: ground truth JSON and oracle maps.
    Synth(SynthArgs),
    /// Score hypothesis baselines against ground truth.
    Eval(EvalArgs),
}

/// Pipeline constants; unset flags keep their defaults.
#[derive(Debug, Args, Default)]
pub struct PipelineFlags {
    #[arg(long)]
    pub bin_threshold: Option<f64>,
    #[arg(long)]
    pub min_sp_distance: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub diameters: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub harmonics: Option<Vec<usize>>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub reg_degree: Option<usize>,
    #[arg(long)]
    pub min_sps_per_baseline: Option<usize>,
    #[arg(long)]
    pub data_cost_cap: Option<f64>,
    /// Connectivity normalization: mean or literal.
    #[arg(long)]
    pub connectivity: Option<String>,
    /// Ignore the separator map.
    #[arg(long)]
    pub no_separators: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// `ARUC` confidence map files.
    #[arg(long, num_args = 1.., conflicts_with_all = ["image", "weights"])]
    pub maps: Vec<PathBuf>,
    /// PNG or PGM page images (requires --weights).
    #[arg(long, num_args = 1..)]
    pub image: Vec<PathBuf>,
    /// `ARUW` weights for the ARU-Net.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Baseline JSON whose regions restrict the clustering.
    #[arg(long)]
    pub regions: Option<PathBuf>,
    /// Also write an overlay PNG next to each JSON output.
    #[arg(long)]
    pub overlay: bool,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// PNG or PGM page image.
    #[arg(long)]
    pub image: PathBuf,
    /// `ARUW` weights for the ARU-Net.
    #[arg(long)]
    pub weights: PathBuf,
    /// Also write the three class planes as PNGs beside the output.
    #[arg(long)]
    pub png: bool,
}

#[derive(Debug, Args)]
pub struct GtgenArgs {
    /// Baseline JSON with page dimensions.
    #[arg(long)]
    pub baselines: PathBuf,
    /// Interline distance used for lone baselines.
    #[arg(long, default_value_t = DEFAULT_INTERLINE)]
    pub default_interline: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Style {
    Straight,
    Curved,
    Rotated,
    Mixed,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of pages to write.
    #[arg(long, default_value_t = 1)]
    pub pages: usize,
    /// Page layout.
    #[arg(long, value_enum, default_value_t = Style::Straight)]
    pub style: Style,
    /// Gaussian blur of the oracle maps.
    #[arg(long, default_value_t = 1.5)]
    pub blur: f64,
    /// Uniform noise amplitude of the oracle maps.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth baseline JSON files.
    #[arg(long, num_args = 1.., required = true)]
    pub gt: Vec<PathBuf>,
    /// Hypothesis baseline JSON files, paired with --gt by position.
    #[arg(long, num_args = 1.., required = true)]
    pub hyp: Vec<PathBuf>,
    /// Matching tolerance in pixels (default: derived from each page).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

pub fn run(cli: Cli) -> Result<()> {
    if cli.common.threads > 0 {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build_global();
    }
    match &cli.command {
        Command::Detect(a) => cmd_detect(&cli.common, a),
        Command::Infer(a) => cmd_infer(&cli.common, a),
        Command::Gtgen(a) => cmd_gtgen(&cli.common, a),
        Command::Synth(a) => cmd_synth(&cli.common, a),
        Command::Eval(a) => cmd_eval(&cli.common, a),
    }
}

fn require_out(common: &Common) -> Result<&Path> {
    common.out.as_deref().ok_or_else(|| CliError::Usage("--out is required".into()))
}

/// Defaults, then flags, then the `--config` file.
pub fn resolve_config(common: &Common, flags: &PipelineFlags) -> Result<PipelineConfig> {
    let mut c = PipelineConfig::default();
    let usage = |e: baseline_core::Error| CliError::Usage(e.to_string());
    macro_rules! take {
        ($($f:ident),*) => {$(if let Some(v) = flags.$f.clone() { c.$f = v; })*};
    }
    take!(bin_threshold, min_sp_distance, diameters, harmonics, sigma, alpha, beta, gamma, delta, eta);
    take!(reg_degree, min_sps_per_baseline, data_cost_cap);
    if let Some(m) = &flags.connectivity {
        c.set("connectivity", m).map_err(usage)?;
    }
    if flags.no_separators {
        c.use_separators = false;
    }
    if let Some(path) = &common.config {
        let bytes = read_file(path)?;
        let text = String::from_utf8(bytes).map_err(|e| CliError::format(path, "config", e))?;
        if text.trim_start().starts_with('{') {
            let doc = BaselineDoc::from_json(text.as_bytes()).map_err(|e| CliError::format(path, "config", e))?;
            c = doc.config.ok_or_else(|| CliError::format(path, "config", "JSON has no config snapshot"))?;
        } else {
            c.apply_key_values(&text).map_err(|e| CliError::format(path, "config", e))?;
        }
    }
    c.validate().map_err(usage)?;
    Ok(c)
}

fn load_npl(path: &Path) -> Result<Npl> {
    let ws = WeightStore::from_bytes(&read_file(path)?).map_err(|e| CliError::format(path, "weights", e))?;
    Npl::new(NplArchitecture::reference(Variant::ARU), ws).map_err(|e| CliError::format(path, "weights", e))
}

/// Network inference on one image: maps at network resolution plus the
/// downscaling factor.
fn infer_maps(net: &Npl, image: &Path) -> Result<(ConfidenceMaps, usize, baseline_core::GrayImage)> {
    let img = read_gray(image)?;
    let pre = preprocess(&img).map_err(|e| CliError::format(image, "image", e))?;
    if pre.degenerate {
        log::warn!("{}: constant image", image.display());
    }
    let out = net.forward(&pre.input).map_err(|e| CliError::Pipeline(format!("{}: {e}", image.display())))?;
    let maps = out.to_maps().map_err(|e| CliError::Pipeline(e.to_string()))?;
    Ok((maps, pre.factor, img))
}

/// Maps a point of a `factor`-downscaled raster to the center of its
/// source block.
fn upscale(p: Point, factor: usize) -> Point {
    let f = factor as f64;
    Point::new(p.x * f + (f - 1.0) / 2.0, p.y * f + (f - 1.0) / 2.0)
}

fn output_path(out: &Path, input: &Path, many: bool, ext: &str) -> PathBuf {
    if many || out.is_dir() {
        let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "page".into());
        out.join(format!("{stem}.{ext}"))
    } else {
        out.to_path_buf()
    }
}

pub fn cmd_detect(common: &Common, a: &DetectArgs) -> Result<()> {
    let out = require_out(common)?;
    let config = resolve_config(common, &a.pipeline)?;
    let regions: Vec<Region> = match &a.regions {
        Some(p) => read_doc(p)?.region_list().map_err(|e| CliError::format(p, "baseline JSON", e))?,
        None => Vec::new(),
    };
    let (inputs, net) = match (a.maps.is_empty(), a.image.is_empty(), &a.weights) {
        (false, true, None) => (&a.maps, None),
        (true, false, Some(w)) => (&a.image, Some(load_npl(w)?)),
        (true, false, None) => return Err(CliError::Usage("--image needs --weights".into())),
        _ => return Err(CliError::Usage("give either --maps or --image with --weights".into())),
    };
    let many = inputs.len() > 1;
    let results: Vec<Result<()>> = inputs
        .par_iter()
        .map(|input| {
            let t0 = Instant::now();
            let (maps, factor, background) = match &net {
                None => {
                    let m = read_maps(input)?;
                    let bg = m.baseline.clone();
                    (m, 1, bg)
                }
                Some(net) => infer_maps(net, input)?,
            };
            let t1 = Instant::now();
            let det = detect_baselines(&maps, &regions, &config).map_err(|e| CliError::Pipeline(e.to_string()))?;
            let baselines: Vec<PolyChain> = if factor == 1 {
                det.baselines
            } else {
                det.baselines
                    .iter()
                    .map(|c| c.map_points(|p| upscale(p, factor)).expect("scaling keeps points distinct"))
                    .collect()
            };
            log::info!(
                "{}: {} baselines, {} superpixels; maps {:?}, detection {:?}",
                input.display(),
                baselines.len(),
                det.superpixels.len(),
                t1 - t0,
                t1.elapsed()
            );
            let (h, w) = background.dims();
            let mut doc = BaselineDoc::new(w, h, &baselines, &regions);
            doc.config = Some(config.clone());
            let path = output_path(out, input, many, "json");
            atomic_write(&path, &doc.to_json())?;
            if a.overlay {
                atomic_write(&path.with_extension("png"), &overlay_png(&background, &baselines))?;
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

pub fn cmd_infer(common: &Common, a: &InferArgs) -> Result<()> {
    let out = require_out(common)?;
    let net = load_npl(&a.weights)?;
    let (maps, _, _) = infer_maps(&net, &a.image)?;
    atomic_write(out, &maps_to_bytes(&maps))?;
    if a.png {
        let planes = [("baseline", Some(&maps.baseline)), ("separator", Some(&maps.separator)), ("other", maps.other.as_ref())];
        for (name, plane) in planes {
            if let Some(p) = plane {
                atomic_write(&out.with_extension(format!("{name}.png")), &gray_png(p))?;
            }
        }
    }
    Ok(())
}

pub fn cmd_gtgen(common: &Common, a: &GtgenArgs) -> Result<()> {
    let out = require_out(common)?;
    let doc = read_doc(&a.baselines)?;
    let chains = doc.chains().map_err(|e| CliError::format(&a.baselines, "baseline JSON", e))?;
    if doc.width == 0 || doc.height == 0 {
        return Err(CliError::format(&a.baselines, "baseline JSON", "zero page size"));
    }
    let gt = generate_pixel_gt(doc.height, doc.width, &chains, a.default_interline);
    atomic_write(&out.join("baseline.png"), &binary_png(&gt.baseline))?;
    atomic_write(&out.join("separator.png"), &binary_png(&gt.separator))?;
    atomic_write(&out.join("other.png"), &binary_png(&gt.other))?;
    Ok(())
}

pub fn cmd_synth(common: &Common, a: &SynthArgs) -> Result<()> {
    let out = require_out(common)?;
    if a.pages == 0 {
        return Err(CliError::Usage("--pages must be at least 1".into()));
    }
    let style = match a.style {
        Style::Straight => SynthStyle::Straight,
        Style::Curved => SynthStyle::Curved,
        Style::Rotated => SynthStyle::Rotated,
        Style::Mixed => SynthStyle::Mixed,
    };
    let pages = synth_corpus(a.pages, common.seed, style);
    let results: Vec<Result<()>> = pages
        .par_iter()
        .enumerate()
        .map(|(i, page)| {
            let maps = render_oracle_maps(page, a.blur, a.noise, page.seed);
            let doc = BaselineDoc::new(page.width, page.height, &page.baselines, &page.regions);
            let stem = out.join(format!("page_{i:03}"));
            atomic_write(&stem.with_extension("json"), &doc.to_json())?;
            atomic_write(&stem.with_extension("aruc"), &maps_to_bytes(&maps))?;
            atomic_write(&stem.with_extension("png"), &gray_png(&maps.baseline))?;
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

pub fn cmd_eval(common: &Common, a: &EvalArgs) -> Result<()> {
    let out = require_out(common)?;
    if a.gt.len() != a.hyp.len() {
        return Err(CliError::Usage(format!("{} --gt files but {} --hyp files", a.gt.len(), a.hyp.len())));
    }
    let mut pages = Vec::with_capacity(a.gt.len());
    for (g, h) in a.gt.iter().zip(&a.hyp) {
        let gt = read_doc(g)?.chains().map_err(|e| CliError::format(g, "baseline JSON", e))?;
        let hyp = read_doc(h)?.chains().map_err(|e| CliError::format(h, "baseline JSON", e))?;
        pages.push((gt, hyp));
    }
    let report: EvalReport = evaluate_pages(&pages, a.tolerance);
    atomic_write(out, &to_json_17(&report))
}
