//! Command-line interface.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use splat2d_core::fit::{fit_with, FitConfig};
use splat2d_core::metrics::evaluate;
use splat2d_core::raster::{render_with, supersample_reference_with};
use splat2d_core::{Camera, FilterMode, Image, RenderConfig, Scene};

use crate::gradcheck::{format_report, gradcheck, GradcheckOptions};
use crate::multiscale::{multiscale_eval, write_csv, MultiscaleOptions, Scale};
use crate::procedural::{gen_scene, GenParams, SceneKind};
use crate::runner::{Parallel, THREADS_ENV};
use crate::{load_scene, ppm, save_scene};

#[derive(Debug, Parser)]
#[command(name = "splat2d", version, about = "Anti-aliased 2D Gaussian splatting renderer")]
pub struct Cli {
    /// Worker threads for rendering (0 = one per core).
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render views of a scene to PPM.
    Render(RenderCmd),
    /// Score filter modes at several zoom factors against supersampled references.
    MultiscaleEval(MultiscaleCmd),
    /// Optimize a scene against target views.
    Fit(FitCmd),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckCmd),
    /// PSNR, SSIM and MSE between two PPM images, as JSON.
    Metrics(MetricsCmd),
    /// Write a procedural scene file.
    GenScene(GenSceneCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    None,
    Clamp,
    Aa,
}

impl From<FilterArg> for FilterMode {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::None => FilterMode::None,
            FilterArg::Clamp => FilterMode::Clamp,
            FilterArg::Aa => FilterMode::Aa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Grid,
    CheckerSphere,
    Random,
}

impl From<KindArg> for SceneKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Grid => SceneKind::Grid,
            KindArg::CheckerSphere => SceneKind::CheckerSphere,
            KindArg::Random => SceneKind::Random,
        }
    }
}

#[derive(Debug, Args)]
pub struct FilterParams {
    /// Screen-space variance of the Mip filter, in pixels squared.
    #[arg(long)]
    pub mip_sigma: Option<f64>,
    /// Flat smoothing strength.
    #[arg(long)]
    pub sreg: Option<f64>,
    /// Std-dev of the clamp mode's screen-space Gaussian, in pixels.
    #[arg(long)]
    pub clamp_sigma: Option<f64>,
    /// Tile size (8, 16 or 32).
    #[arg(long)]
    pub tile_size: Option<usize>,
}

impl FilterParams {
    fn config(&self, mode: FilterMode) -> Result<RenderConfig> {
        let mut c = RenderConfig::with_mode(mode);
        if let Some(v) = self.mip_sigma {
            c.mip_sigma = v;
        }
        if let Some(v) = self.sreg {
            c.smooth_sreg = v;
        }
        if let Some(v) = self.clamp_sigma {
            c.clamp_sigma = v;
        }
        if let Some(v) = self.tile_size {
            c.tile_size = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct RenderCmd {
    #[arg(long)]
    pub scene: PathBuf,
    /// Camera index; repeat for several views.
    #[arg(long = "view", default_values_t = [0usize])]
    pub views: Vec<usize>,
    #[arg(long, value_enum, default_value_t = FilterArg::Aa)]
    pub filter: FilterArg,
    #[command(flatten)]
    pub params: FilterParams,
    /// Output PPM. With several views, `_view<N>` is inserted before the extension.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write depth, normalized by the largest depth in the view.
    #[arg(long)]
    pub depth: Option<PathBuf>,
    /// Also write normals mapped from [-1, 1] to [0, 1].
    #[arg(long)]
    pub normal: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MultiscaleCmd {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub view: usize,
    /// Filter modes to score; repeatable. Defaults to all three.
    #[arg(long = "filter", value_enum)]
    pub filters: Vec<FilterArg>,
    #[command(flatten)]
    pub params: FilterParams,
    /// Comma-separated zoom factors such as 1/8,1/2,1,4x.
    #[arg(long, value_delimiter = ',')]
    pub scales: Vec<Scale>,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    /// Initial scene; its cameras define the target views.
    #[arg(long)]
    pub scene: PathBuf,
    /// Target image per camera, in camera order.
    #[arg(long = "target", conflicts_with = "target_scene")]
    pub targets: Vec<PathBuf>,
    /// Scene whose supersampled renders from the initial scene's cameras are the targets.
    #[arg(long)]
    pub target_scene: Option<PathBuf>,
    /// Supersampling factor for --target-scene renders.
    #[arg(long, default_value_t = 4)]
    pub target_supersample: usize,
    #[arg(long, value_enum, default_value_t = FilterArg::Aa)]
    pub filter: FilterArg,
    #[command(flatten)]
    pub params: FilterParams,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// D-SSIM weight of the loss.
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    /// Optimized scene file.
    #[arg(long)]
    pub out: PathBuf,
    /// Loss trace CSV; defaults to the output path with a `.loss.csv` extension.
    #[arg(long)]
    pub loss_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckCmd {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub splats: usize,
    #[arg(long, default_value_t = 20)]
    pub size: usize,
    /// Filter modes to check; repeatable. Defaults to all three.
    #[arg(long = "filter", value_enum)]
    pub filters: Vec<FilterArg>,
    #[arg(long, default_value_t = crate::gradcheck::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct MetricsCmd {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenSceneCmd {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Lattice side for grid, splat count otherwise.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Camera resolution.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn modes(filters: &[FilterArg]) -> Vec<FilterMode> {
    if filters.is_empty() {
        FilterMode::ALL.to_vec()
    } else {
        filters.iter().map(|f| (*f).into()).collect()
    }
}

fn camera(scene: &Scene, view: usize) -> Result<&Camera> {
    scene
        .cameras
        .get(view)
        .with_context(|| format!("view {view} out of range (scene has {} cameras)", scene.cameras.len()))
}

fn load(path: &Path) -> Result<Scene> {
    Ok(load_scene(path)?)
}

fn write_ppm(path: &Path, img: &Image) -> Result<()> {
    let bytes = ppm::encode_gray(img)?;
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn view_path(path: &Path, view: usize, many: bool) -> PathBuf {
    if !many {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_view{view}.{}", ext.to_string_lossy()),
        None => format!("{stem}_view{view}"),
    };
    path.with_file_name(name)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn cmd_render(cmd: &RenderCmd, runner: &Parallel) -> Result<()> {
    let scene = load(&cmd.scene)?;
    let config = cmd.params.config(cmd.filter.into())?;
    let many = cmd.views.len() > 1;
    for &view in &cmd.views {
        let out = render_with(&scene, camera(&scene, view)?, &config, runner);
        write_ppm(&view_path(&cmd.out, view, many), &out.color)?;
        if let Some(p) = &cmd.depth {
            let far = out.depth.data.iter().copied().fold(0.0, f64::max);
            let mut d = out.depth.clone();
            if far > 0.0 {
                d.data.iter_mut().for_each(|v| *v /= far);
            }
            write_ppm(&view_path(p, view, many), &d)?;
        }
        if let Some(p) = &cmd.normal {
            let mut n = out.normal.clone();
            n.data.iter_mut().for_each(|v| *v = 0.5 * (*v + 1.0));
            write_ppm(&view_path(p, view, many), &n)?;
        }
    }
    Ok(())
}

fn cmd_multiscale(cmd: &MultiscaleCmd, runner: &Parallel) -> Result<()> {
    let scene = load(&cmd.scene)?;
    let view = camera(&scene, cmd.view)?;
    let options = MultiscaleOptions {
        scales: if cmd.scales.is_empty() { Scale::DEFAULT.to_vec() } else { cmd.scales.clone() },
        modes: modes(&cmd.filters),
        render: cmd.params.config(FilterMode::Aa)?,
        ..MultiscaleOptions::default()
    };
    let rows = multiscale_eval(&scene, view, &options, runner)?;
    match &cmd.out {
        Some(p) => write_csv(&rows, create(p)?)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_fit(cmd: &FitCmd, runner: &Parallel) -> Result<()> {
    let scene = load(&cmd.scene)?;
    ensure!(!scene.cameras.is_empty(), "{} has no cameras to fit against", cmd.scene.display());
    let render = cmd.params.config(cmd.filter.into())?;
    let targets: Vec<(Camera, Image)> = if let Some(path) = &cmd.target_scene {
        let gt = load(path)?;
        scene
            .cameras
            .iter()
            .map(|c| Ok((c.clone(), supersample_reference_with(&gt, c, cmd.target_supersample, &render, runner)?)))
            .collect::<Result<_>>()?
    } else {
        if cmd.targets.len() != scene.cameras.len() {
            bail!("expected {} --target images (one per camera), got {}", scene.cameras.len(), cmd.targets.len());
        }
        scene
            .cameras
            .iter()
            .zip(&cmd.targets)
            .map(|(c, p)| Ok((c.clone(), ppm::read(p).with_context(|| format!("reading {}", p.display()))?)))
            .collect::<Result<_>>()?
    };
    let config = FitConfig { iterations: cmd.iters, loss_lambda: cmd.lambda, render, ..FitConfig::default() };
    let result = fit_with(&scene, &targets, &config, runner)?;
    save_scene(&result.scene, &cmd.out)?;
    let loss_path = cmd.loss_out.clone().unwrap_or_else(|| cmd.out.with_extension("loss.csv"));
    let mut w = csv::Writer::from_writer(create(&loss_path)?);
    w.write_record(["iteration", "loss"])?;
    for (i, l) in result.losses.iter().enumerate() {
        w.write_record([i.to_string(), format!("{l:.9e}")])?;
    }
    w.flush()?;
    if let Some(last) = result.losses.last() {
        log::info!("final loss {last:.6e}");
    }
    Ok(())
}

fn cmd_gradcheck(cmd: &GradcheckCmd) -> Result<()> {
    let options = GradcheckOptions {
        seed: cmd.seed,
        splats: cmd.splats,
        image_size: cmd.size,
        modes: modes(&cmd.filters),
        tolerance: cmd.tolerance,
    };
    ensure!(options.splats >= 1 && options.image_size >= 1, "--splats and --size must be at least 1");
    let reports = gradcheck(&options);
    print!("{}", format_report(&reports, options.tolerance));
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed(options.tolerance)).map(|r| r.mode.name()).collect();
    if failed.is_empty() {
        println!("PASS");
        Ok(())
    } else {
        bail!("gradient check failed for {}", failed.join(", "))
    }
}

fn cmd_metrics(cmd: &MetricsCmd) -> Result<()> {
    let a = ppm::read(&cmd.a).with_context(|| format!("reading {}", cmd.a.display()))?;
    let b = ppm::read(&cmd.b).with_context(|| format!("reading {}", cmd.b.display()))?;
    let r = evaluate(&a, &b)?;
    let json = serde_json::json!({ "psnr": r.psnr, "ssim": r.ssim, "mse": r.mse });
    let mut out = io::stdout().lock();
    writeln!(out, "{json}")?;
    Ok(())
}

fn cmd_gen_scene(cmd: &GenSceneCmd) -> Result<()> {
    let params = GenParams { kind: cmd.kind.into(), count: cmd.count, seed: cmd.seed, image_size: cmd.size };
    save_scene(&gen_scene(&params)?, &cmd.out)?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let runner = Parallel::new(cli.threads).context("starting worker threads")?;
    match &cli.command {
        Command::Render(c) => cmd_render(c, &runner),
        Command::MultiscaleEval(c) => cmd_multiscale(c, &runner),
        Command::Fit(c) => cmd_fit(c, &runner),
        Command::Gradcheck(c) => cmd_gradcheck(c),
        Command::Metrics(c) => cmd_metrics(c),
        Command::GenScene(c) => cmd_gen_scene(c),
    }
}
