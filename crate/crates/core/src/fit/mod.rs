//! Gradients and optimization.
//!
//! [`render_backward`] differentiates the forward renderer analytically;
//! [`finite_diff_gradients`] is its black-box oracle. [`fit`] runs Adam on a
//! fixed set of splats against target images with an L1 + D-SSIM loss,
//! refreshing frequency bounds from the target cameras every
//! `freq_recompute_interval` iterations.

mod adam;
mod backward;
mod check;
mod finite_diff;

use alloc::vec::Vec;

pub use adam::Adam;
pub use backward::{render_backward, render_backward_with, SplatGradients};
pub use check::{check_gradients, relative_error, GradientCheck, GradientComparison, ParamGroup, FD_CONSISTENCY_LIMIT, GRAD_FLOOR};
pub use finite_diff::{fd_step, finite_diff_gradients, finite_diff_gradients_with_steps, linear_loss, JacobianHandling};

use crate::image::ImageError;
use crate::metrics::ssim_with_grad;
use crate::raster::render_with;
use crate::splat::PARAM_COUNT;
use crate::{Camera, FilterMode, Image, RenderConfig, Scene, Serial, TileRunner};

/// Adam learning rates per parameter group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearningRates {
    /// Multiplied by the scene extent.
    pub center: f64,
    pub rotation: f64,
    pub scale: f64,
    pub opacity: f64,
    pub color: f64,
}

impl Default for LearningRates {
    fn default() -> Self {
        Self { center: 1.6e-4, rotation: 1e-3, scale: 5e-3, opacity: 5e-2, color: 2.5e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub iterations: usize,
    pub lr: LearningRates,
    /// The center learning rate decays exponentially to this fraction of its
    /// initial value over the run.
    pub center_lr_final_ratio: f64,
    /// Weight of the D-SSIM term: `(1 - l) L1 + l (1 - SSIM)`.
    pub loss_lambda: f64,
    pub freq_recompute_interval: usize,
    pub render: RenderConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            lr: LearningRates::default(),
            center_lr_final_ratio: 0.01,
            loss_lambda: 0.2,
            freq_recompute_interval: 100,
            render: RenderConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("at least one target view is required")]
    NoTargets,
    #[error("iterations and freq_recompute_interval must be at least 1")]
    BadSchedule,
    #[error("target {index}: {source}")]
    Target { index: usize, source: ImageError },
    #[error("loss became non-finite at iteration {0}")]
    Diverged(usize),
    #[error(transparent)]
    Config(#[from] crate::ConfigError),
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub scene: Scene,
    /// Loss of the render at the start of each iteration.
    pub losses: Vec<f64>,
}

/// `(1 - lambda) L1 + lambda (1 - SSIM)` and its gradient w.r.t. `rendered`.
pub fn image_loss(rendered: &Image, target: &Image, lambda: f64) -> Result<(f64, Image), ImageError> {
    rendered.check_same_dims(target)?;
    let n = rendered.data.len() as f64;
    let mut grad = Image::new(rendered.width, rendered.height, rendered.channels);
    let mut l1 = 0.0;
    for ((g, r), t) in grad.data.iter_mut().zip(&rendered.data).zip(&target.data) {
        let d = r - t;
        l1 += d.abs();
        *g = (1.0 - lambda) * d.signum() * (d != 0.0) as u8 as f64 / n;
    }
    let mut loss = (1.0 - lambda) * l1 / n;
    if lambda != 0.0 {
        let (s, sg) = ssim_with_grad(rendered, target)?;
        loss += lambda * (1.0 - s);
        for (g, d) in grad.data.iter_mut().zip(&sg.data) {
            *g -= lambda * d;
        }
    }
    Ok((loss, grad))
}

fn learning_rates(lr: &LearningRates, center_scale: f64) -> [f64; PARAM_COUNT] {
    let mut out = [0.0; PARAM_COUNT];
    out[..3].fill(lr.center * center_scale);
    out[3..7].fill(lr.rotation);
    out[7..9].fill(lr.scale);
    out[9] = lr.opacity;
    out[10..].fill(lr.color);
    out
}

/// Optimizes `initial` against `(camera, image)` targets on the calling thread.
pub fn fit(initial: &Scene, targets: &[(Camera, Image)], config: &FitConfig) -> Result<FitResult, FitError> {
    fit_with(initial, targets, config, &Serial)
}

/// [`fit`] with tile-parallel forward and backward passes.
pub fn fit_with<R: TileRunner>(
    initial: &Scene,
    targets: &[(Camera, Image)],
    config: &FitConfig,
    runner: &R,
) -> Result<FitResult, FitError> {
    if targets.is_empty() {
        return Err(FitError::NoTargets);
    }
    if config.iterations == 0 || config.freq_recompute_interval == 0 {
        return Err(FitError::BadSchedule);
    }
    config.render.validate()?;
    for (index, (cam, img)) in targets.iter().enumerate() {
        if img.dims() != (cam.width, cam.height, 3) {
            let source = ImageError::DimensionMismatch((cam.width, cam.height, 3), img.dims());
            return Err(FitError::Target { index, source });
        }
    }
    let cameras: Vec<Camera> = targets.iter().map(|t| t.0.clone()).collect();
    let mut scene = initial.clone();
    let extent = scene.extent();
    let mut adam = Adam::new(scene.splats.len());
    let mut losses = Vec::with_capacity(config.iterations);
    let decay = libm::log(config.center_lr_final_ratio.max(1e-12));

    for it in 0..config.iterations {
        if config.render.filter_mode == FilterMode::Aa && it % config.freq_recompute_interval == 0 {
            scene.update_frequency_bounds(&cameras, config.render.near_plane);
        }
        let (cam, target) = &targets[it % targets.len()];
        let out = render_with(&scene, cam, &config.render, runner);
        let (loss, d_image) = image_loss(&out.color, target, config.loss_lambda)
            .map_err(|source| FitError::Target { index: it % targets.len(), source })?;
        if !loss.is_finite() {
            return Err(FitError::Diverged(it));
        }
        losses.push(loss);

        let grads: Vec<[f64; PARAM_COUNT]> =
            backward::render_backward_with(&scene, cam, &config.render, &d_image, runner).iter().map(|g| g.to_array()).collect();
        let progress = it as f64 / config.iterations.max(2).saturating_sub(1) as f64;
        let lr = learning_rates(&config.lr, extent * libm::exp(decay * progress));
        let steps = adam.step(&grads, &lr);
        for (s, d) in scene.splats.iter_mut().zip(&steps) {
            for (i, d) in d.iter().enumerate() {
                if *d != 0.0 {
                    s.set_param(i, s.param(i) + d);
                }
            }
            if d[3..7].iter().any(|v| *v != 0.0) {
                s.normalize_rotation();
            }
            if !(0..PARAM_COUNT).all(|i| s.param(i).is_finite()) {
                return Err(FitError::Diverged(it));
            }
        }
    }
    Ok(FitResult { scene, losses })
}
