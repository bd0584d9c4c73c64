//! Forward rendering.
//!
//! Splats are binned into screen tiles by their conservative pixel boxes,
//! sorted front to back by center depth and alpha-blended per pixel with
//! early termination. [`render_reference`] does the same blend without tiling
//! or culling and serves as the oracle for [`render`].

mod binning;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub use binning::TileBinning;

use crate::filters::{self, eval_mip, mip_covariance, mip_terms, screen_gaussian};
use crate::geometry::{self, jacobian_from_planes, pixel_center, PixelRect, SplatScreenTransform};
use crate::image::ImageError;
use crate::splat::{gaussian_local, object_to_world};
use crate::{Camera, FilterMode, Image, Mat2, Mat3, RenderConfig, RenderOutput, Scene, Serial, TileRunner};
use crate::{Vec2, Vec3, Vec4};

/// A splat projected for one camera.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub transform: SplatScreenTransform,
    pub frame: Mat3,
    pub eff_scales: [f64; 2],
    pub opacity: f64,
    pub smoothing_var: f64,
    pub color: Vec3,
    pub normal: Vec3,
    pub center_px: Vec2,
    pub bbox: Option<PixelRect>,
}

impl Prepared {
    pub fn depth(&self) -> f64 {
        self.transform.center_depth()
    }
}

pub(crate) fn prepare(scene: &Scene, camera: &Camera, config: &RenderConfig) -> Vec<Prepared> {
    let wts = camera.world_to_screen();
    let eye = camera.position();
    scene
        .splats
        .iter()
        .map(|s| {
            let frame = s.rotation_matrix();
            let smoothing_var = if config.filter_mode == FilterMode::Aa {
                let mut freq = s.freq_bound;
                if freq == 0.0 && !scene.cameras.is_empty() {
                    freq = filters::max_sampling_rate(&s.center, &scene.cameras, config.near_plane);
                }
                filters::smoothing_variance(freq, config.smooth_sreg)
            } else {
                0.0
            };
            let (eff_scales, opacity) = if config.filter_mode == FilterMode::Aa {
                filters::smooth_with_variance(s.scales, s.opacity, smoothing_var)
            } else {
                (s.scales, s.opacity)
            };
            let transform = SplatScreenTransform::new(&wts, &object_to_world(&s.center, &frame, eff_scales), config.near_plane);
            let n: Vec3 = frame.column(2).into_owned();
            let normal = if n.dot(&(eye - s.center)) < 0.0 { -n } else { n };
            let bbox = geometry::bbox_for_transform(&transform, opacity, camera, config);
            Prepared {
                center_px: transform.projected_center(),
                transform,
                frame,
                eff_scales,
                opacity,
                smoothing_var,
                color: s.color,
                normal,
                bbox,
            }
        })
        .collect()
}

/// Which kernel produced a contribution, with what the backward pass needs.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Kernel {
    Object,
    Mip { inv: Mat2 },
    Screen,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Contribution {
    /// `opacity * G`.
    pub alpha: f64,
    pub g: f64,
    pub uv: Vec2,
    pub depth: f64,
    pub hu: Vec4,
    pub hv: Vec4,
    pub denom: f64,
    pub kernel: Kernel,
}

pub(crate) enum Eval {
    Degenerate,
    Skip,
    Hit(Contribution),
}

/// Per-(splat, pixel) Jacobians captured from one render, used to evaluate
/// the Mip filter with `J` held fixed while splat parameters move.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JacobianCache {
    map: BTreeMap<(usize, usize), Mat2>,
}

impl JacobianCache {
    pub fn get(&self, splat: usize, pixel: usize) -> Option<&Mat2> {
        self.map.get(&(splat, pixel))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Jacobians<'a> {
    Live,
    Frozen(&'a JacobianCache),
}

#[inline]
pub(crate) fn eval(
    p: &Prepared,
    splat: usize,
    pixel: &Vec2,
    pixel_index: usize,
    config: &RenderConfig,
    jacobians: Jacobians<'_>,
    record: Option<&mut Vec<((usize, usize), Mat2)>>,
) -> Eval {
    let t = &p.transform;
    let (hu, hv) = t.local_planes(pixel);
    let denom = hu[0] * hv[1] - hu[1] * hv[0];
    let Ok(hit) = geometry::ray_splat_intersect(t, pixel) else {
        return Eval::Degenerate;
    };
    if hit.depth <= config.near_plane {
        return Eval::Skip;
    }
    let uv = hit.uv;
    let (g, kernel) = match config.filter_mode {
        FilterMode::None => (gaussian_local(&uv), Kernel::Object),
        FilterMode::Clamp => {
            let go = gaussian_local(&uv);
            let gs = screen_gaussian(pixel, &p.center_px, config.clamp_sigma);
            if go >= gs {
                (go, Kernel::Object)
            } else {
                (gs, Kernel::Screen)
            }
        }
        FilterMode::Aa => {
            if config.mip_sigma == 0.0 {
                (gaussian_local(&uv), Kernel::Object)
            } else {
                let jac = match jacobians {
                    Jacobians::Frozen(cache) => match cache.get(splat, pixel_index) {
                        Some(j) => *j,
                        None => jacobian_from_planes(&t.m, &hu, &hv, denom),
                    },
                    Jacobians::Live => jacobian_from_planes(&t.m, &hu, &hv, denom),
                };
                if let Some(rec) = record {
                    rec.push(((splat, pixel_index), jac));
                }
                let (peak, inv) = mip_terms(&mip_covariance(&jac, config.mip_sigma));
                (eval_mip(&uv, peak, &inv), Kernel::Mip { inv })
            }
        }
    };
    let alpha = p.opacity * g;
    if alpha < config.alpha_cutoff {
        return Eval::Skip;
    }
    Eval::Hit(Contribution { alpha, g, uv, depth: hit.depth, hu, hv, denom, kernel })
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct PixelResult {
    pub color: Vec3,
    pub transmittance: f64,
    pub depth: f64,
    pub normal: Vec3,
    pub skips: usize,
}

/// Front-to-back blend of `order` at one pixel. A contribution is blended
/// in full; blending stops once transmittance drops below the floor.
#[allow(clippy::too_many_arguments)]
pub(crate) fn shade_pixel(
    prepared: &[Prepared],
    order: impl Iterator<Item = usize>,
    pixel: &Vec2,
    pixel_index: usize,
    background: &Vec3,
    config: &RenderConfig,
    jacobians: Jacobians<'_>,
    mut record: Option<&mut Vec<((usize, usize), Mat2)>>,
) -> PixelResult {
    let mut out = PixelResult { transmittance: 1.0, ..Default::default() };
    let mut depth_acc = 0.0;
    for idx in order {
        let p = &prepared[idx];
        let c = match eval(p, idx, pixel, pixel_index, config, jacobians, record.as_deref_mut()) {
            Eval::Degenerate => {
                out.skips += 1;
                continue;
            }
            Eval::Skip => continue,
            Eval::Hit(c) => c,
        };
        let w = c.alpha * out.transmittance;
        out.color += p.color * w;
        out.normal += p.normal * w;
        depth_acc += c.depth * w;
        out.transmittance *= 1.0 - c.alpha;
        if out.transmittance < config.transmittance_floor {
            break;
        }
    }
    let alpha = 1.0 - out.transmittance;
    out.depth = if alpha > 0.0 { depth_acc / alpha } else { 0.0 };
    out.color += background * out.transmittance;
    out
}

struct TileOut {
    rect: PixelRect,
    pixels: Vec<PixelResult>,
    jacobians: Vec<((usize, usize), Mat2)>,
}

fn write_pixel(out: &mut RenderOutput, x: usize, y: usize, px: &PixelResult) {
    out.color.pixel_mut(x, y).copy_from_slice(px.color.as_slice());
    out.alpha.pixel_mut(x, y)[0] = 1.0 - px.transmittance;
    out.depth.pixel_mut(x, y)[0] = px.depth;
    out.normal.pixel_mut(x, y).copy_from_slice(px.normal.as_slice());
    out.degenerate_skips += px.skips;
}

/// Bins prepared splats into tiles.
pub(crate) fn bin(prepared: &[Prepared], camera: &Camera, config: &RenderConfig) -> TileBinning {
    TileBinning::build(
        camera.width,
        camera.height,
        config.tile_size,
        prepared.iter().enumerate().filter_map(|(i, p)| p.bbox.map(|b| (i, b, p.depth()))),
    )
}

/// Tile binning for a scene and camera.
pub fn tile_binning(scene: &Scene, camera: &Camera, config: &RenderConfig) -> TileBinning {
    bin(&prepare(scene, camera, config), camera, config)
}

fn render_impl<R: TileRunner>(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    runner: &R,
    jacobians: Jacobians<'_>,
    record: bool,
) -> (RenderOutput, JacobianCache) {
    let prepared = prepare(scene, camera, config);
    let binning = bin(&prepared, camera, config);
    let (w, h) = (camera.width, camera.height);
    let tiles = runner.run(binning.tile_count(), |t| {
        let rect = binning.tile_rect(t, w, h);
        let list = &binning.lists[t];
        let mut rec = Vec::new();
        let mut pixels = Vec::with_capacity(rect.width() * rect.height());
        for y in rect.y0..rect.y1 {
            for x in rect.x0..rect.x1 {
                let px = shade_pixel(
                    &prepared,
                    list.iter().map(|e| e.0),
                    &pixel_center(x, y),
                    y * w + x,
                    &scene.background,
                    config,
                    jacobians,
                    if record { Some(&mut rec) } else { None },
                );
                pixels.push(px);
            }
        }
        TileOut { rect, pixels, jacobians: rec }
    });
    let mut out = RenderOutput::new(w, h);
    let mut cache = JacobianCache::default();
    for tile in tiles {
        let r = tile.rect;
        for (i, px) in tile.pixels.iter().enumerate() {
            write_pixel(&mut out, r.x0 + i % r.width(), r.y0 + i / r.width(), px);
        }
        cache.map.extend(tile.jacobians);
    }
    (out, cache)
}

/// Renders one view on the calling thread. `config` is expected to pass
/// [`RenderConfig::validate`].
pub fn render(scene: &Scene, camera: &Camera, config: &RenderConfig) -> RenderOutput {
    render_with(scene, camera, config, &Serial)
}

/// Renders one view, distributing tiles over `runner`. The output does not
/// depend on the runner.
pub fn render_with<R: TileRunner>(scene: &Scene, camera: &Camera, config: &RenderConfig, runner: &R) -> RenderOutput {
    render_impl(scene, camera, config, runner, Jacobians::Live, false).0
}

/// Renders and returns the Mip-filter Jacobian used for every evaluated
/// (splat, pixel) pair. Empty unless the mode is [`FilterMode::Aa`].
pub fn render_recording_jacobians(scene: &Scene, camera: &Camera, config: &RenderConfig) -> (RenderOutput, JacobianCache) {
    render_impl(scene, camera, config, &Serial, Jacobians::Live, true)
}

/// Renders with the Mip-filter Jacobian taken from `cache` wherever it has an
/// entry (falling back to the live value elsewhere).
pub fn render_frozen_jacobians(scene: &Scene, camera: &Camera, config: &RenderConfig, cache: &JacobianCache) -> RenderOutput {
    render_impl(scene, camera, config, &Serial, Jacobians::Frozen(cache), false).0
}

/// Brute-force oracle: every pixel blends every splat in front of the near
/// plane in global depth order, with no tiling or box culling.
pub fn render_reference(scene: &Scene, camera: &Camera, config: &RenderConfig) -> RenderOutput {
    let prepared = prepare(scene, camera, config);
    let mut order: Vec<(usize, f64)> =
        prepared.iter().enumerate().filter(|(_, p)| p.transform.valid).map(|(i, p)| (i, p.depth())).collect();
    order.sort_by(binning::depth_order);
    let mut out = RenderOutput::new(camera.width, camera.height);
    for y in 0..camera.height {
        for x in 0..camera.width {
            let px = shade_pixel(
                &prepared,
                order.iter().map(|e| e.0),
                &pixel_center(x, y),
                y * camera.width + x,
                &scene.background,
                config,
                Jacobians::Live,
                None,
            );
            write_pixel(&mut out, x, y, &px);
        }
    }
    out
}

/// Renders unfiltered at `factor` times the resolution (intrinsics scaled by
/// `factor`) and box-downsamples back: the anti-aliased target for `camera`.
pub fn supersample_reference(scene: &Scene, camera: &Camera, factor: usize, config: &RenderConfig) -> Result<Image, ImageError> {
    supersample_reference_with(scene, camera, factor, config, &Serial)
}

pub fn supersample_reference_with<R: TileRunner>(
    scene: &Scene,
    camera: &Camera,
    factor: usize,
    config: &RenderConfig,
    runner: &R,
) -> Result<Image, ImageError> {
    if factor == 0 {
        return Err(ImageError::BadFactor { factor, width: camera.width, height: camera.height });
    }
    let cfg = RenderConfig { filter_mode: FilterMode::None, ..config.clone() };
    let hi = camera.scaled(factor as f64);
    render_with(scene, &hi, &cfg, runner).color.box_downsample(factor)
}
