//! Reverse-mode gradients of the rendered color buffer.
//!
//! The Mip filter's Jacobian is treated as a constant: gradients flow through
//! the local coordinates `uv` but not through `I + sigma J J^T`. Frequency
//! bounds (and so the smoothing variance) are constants as well.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::pixel_center;
use crate::raster::{self, Contribution, Eval, Jacobians, Kernel, Prepared};
use crate::splat::PARAM_COUNT;
use crate::{Camera, Image, Mat4, Quat, RenderConfig, Scene, Serial, TileRunner, Vec2, Vec3, Vec4};

/// Loss gradient for one splat, in optimizer coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SplatGradients {
    pub d_center: Vec3,
    /// With respect to the raw quaternion (w, x, y, z); orthogonal to it.
    pub d_rotation: Vec4,
    pub d_log_scales: [f64; 2],
    pub d_logit_opacity: f64,
    pub d_color: Vec3,
}

impl SplatGradients {
    /// Same layout as [`crate::Splat::param`].
    pub fn to_array(&self) -> [f64; PARAM_COUNT] {
        let mut a = [0.0; PARAM_COUNT];
        a[..3].copy_from_slice(self.d_center.as_slice());
        a[3..7].copy_from_slice(self.d_rotation.as_slice());
        a[7..9].copy_from_slice(&self.d_log_scales);
        a[9] = self.d_logit_opacity;
        a[10..].copy_from_slice(self.d_color.as_slice());
        a
    }

    pub fn from_array(a: &[f64; PARAM_COUNT]) -> Self {
        Self {
            d_center: Vec3::new(a[0], a[1], a[2]),
            d_rotation: Vec4::new(a[3], a[4], a[5], a[6]),
            d_log_scales: [a[7], a[8]],
            d_logit_opacity: a[9],
            d_color: Vec3::new(a[10], a[11], a[12]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Gradients w.r.t. the projected quantities of one splat, accumulated over
/// pixels before the per-splat chain rule.
#[derive(Clone, Copy, Debug)]
struct Accum {
    d_m: Mat4,
    d_opacity: f64,
    d_color: Vec3,
    d_center_px: Vec2,
}

impl Default for Accum {
    fn default() -> Self {
        Self { d_m: Mat4::zeros(), d_opacity: 0.0, d_color: Vec3::zeros(), d_center_px: Vec2::zeros() }
    }
}

impl Accum {
    fn add(&mut self, o: &Accum) {
        self.d_m += o.d_m;
        self.d_opacity += o.d_opacity;
        self.d_color += o.d_color;
        self.d_center_px += o.d_center_px;
    }
}

/// Back-propagates `d_uv` through the closed-form intersection into `M`.
#[inline]
fn uv_to_m(c: &Contribution, pixel: &Vec2, d_uv: &Vec2, d_m: &mut Mat4) {
    let (hu, hv, d) = (&c.hu, &c.hv, c.denom);
    let (u, v) = (c.uv[0], c.uv[1]);
    let g_nu = d_uv[0] / d;
    let g_nv = d_uv[1] / d;
    let g_d = -(d_uv[0] * u + d_uv[1] * v) / d;
    let dhu = [-hv[3] * g_nv + hv[1] * g_d, hv[3] * g_nu - hv[0] * g_d, 0.0, -hv[1] * g_nu + hv[0] * g_nv];
    let dhv = [hu[3] * g_nv - hu[1] * g_d, -hu[3] * g_nu + hu[0] * g_d, 0.0, hu[1] * g_nu - hu[0] * g_nv];
    for i in [0usize, 1, 3] {
        d_m[(0, i)] -= dhu[i];
        d_m[(1, i)] -= dhv[i];
        d_m[(3, i)] += pixel[0] * dhu[i] + pixel[1] * dhv[i];
    }
}

struct Hit {
    slot: usize,
    idx: usize,
    c: Contribution,
    transmittance: f64,
}

/// Re-runs the blend for one pixel and back-propagates `d_pixel`.
#[allow(clippy::too_many_arguments)]
fn backward_pixel(
    prepared: &[Prepared],
    list: &[(usize, f64)],
    pixel: &Vec2,
    pixel_index: usize,
    d_pixel: &Vec3,
    background: &Vec3,
    config: &RenderConfig,
    jacobians: Jacobians<'_>,
    hits: &mut Vec<Hit>,
    accum: &mut [Accum],
) {
    hits.clear();
    let mut t = 1.0;
    for (slot, &(idx, _)) in list.iter().enumerate() {
        let c = match raster::eval(&prepared[idx], idx, pixel, pixel_index, config, jacobians, None) {
            Eval::Hit(c) => c,
            _ => continue,
        };
        hits.push(Hit { slot, idx, c, transmittance: t });
        t *= 1.0 - c.alpha;
        if t < config.transmittance_floor {
            break;
        }
    }
    // `behind` is the color seen through the current splat, i.e. the blend
    // of everything after it with the background.
    let mut behind = *background;
    for h in hits.iter().rev() {
        let p = &prepared[h.idx];
        let a = h.c.alpha;
        let acc = &mut accum[h.slot];
        acc.d_color += d_pixel * (a * h.transmittance);
        let d_alpha = h.transmittance * d_pixel.dot(&(p.color - behind));
        behind = p.color * a + behind * (1.0 - a);

        acc.d_opacity += d_alpha * h.c.g;
        let d_g = d_alpha * p.opacity;
        match h.c.kernel {
            Kernel::Object => {
                let d_uv = h.c.uv * (-d_g * h.c.g);
                uv_to_m(&h.c, pixel, &d_uv, &mut acc.d_m);
            }
            Kernel::Mip { inv } => {
                let d_uv = (inv * h.c.uv) * (-d_g * h.c.g);
                uv_to_m(&h.c, pixel, &d_uv, &mut acc.d_m);
            }
            Kernel::Screen => {
                let s2 = config.clamp_sigma * config.clamp_sigma;
                acc.d_center_px += (pixel - p.center_px) * (d_g * h.c.g / s2);
            }
        }
    }
}

/// Chain rule from projected quantities to optimizer parameters.
fn splat_gradients(
    splat: &crate::Splat,
    p: &Prepared,
    acc: &Accum,
    world_to_screen: &Mat4,
) -> SplatGradients {
    let d_h = world_to_screen.transpose() * acc.d_m;
    let mut d_center = Vec3::new(d_h[(0, 3)], d_h[(1, 3)], d_h[(2, 3)]);

    if acc.d_center_px != Vec2::zeros() {
        let depth = p.transform.center_depth();
        for k in 0..3 {
            for i in 0..2 {
                let dc = (world_to_screen[(i, k)] - p.center_px[i] * world_to_screen[(3, k)]) / depth;
                d_center[k] += acc.d_center_px[i] * dc;
            }
        }
    }

    let col = |j: usize| Vec3::new(d_h[(0, j)], d_h[(1, j)], d_h[(2, j)]);
    let (tu, tv): (Vec3, Vec3) = (p.frame.column(0).into_owned(), p.frame.column(1).into_owned());
    let d_eff = [col(0).dot(&tu), col(1).dot(&tv)];
    let d_tu = col(0) * p.eff_scales[0];
    let d_tv = col(1) * p.eff_scales[1];

    let mut d_log_scales = [0.0; 2];
    for i in 0..2 {
        let (s, e) = (splat.scales[i], p.eff_scales[i]);
        d_log_scales[i] = d_eff[i] * (s * s / e) + acc.d_opacity * p.opacity * p.smoothing_var / (e * e);
    }

    SplatGradients {
        d_center,
        d_rotation: quaternion_grad(&splat.rotation, &d_tu, &d_tv),
        d_log_scales,
        d_logit_opacity: acc.d_opacity * p.opacity * (1.0 - splat.opacity),
        d_color: acc.d_color,
    }
}

/// Gradient w.r.t. the raw quaternion given gradients w.r.t. the first two
/// columns of its (normalized) rotation matrix.
pub(crate) fn quaternion_grad(q: &Quat, d_tu: &Vec3, d_tv: &Vec3) -> Vec4 {
    let norm = q.norm();
    let n = q.normalize();
    let (w, x, y, z) = (n.w, n.i, n.j, n.k);
    let a = d_tu;
    let b = d_tv;
    let gw = a.dot(&Vec3::new(0.0, 2.0 * z, -2.0 * y)) + b.dot(&Vec3::new(-2.0 * z, 0.0, 2.0 * x));
    let gx = a.dot(&Vec3::new(0.0, 2.0 * y, 2.0 * z)) + b.dot(&Vec3::new(2.0 * y, -4.0 * x, 2.0 * w));
    let gy = a.dot(&Vec3::new(-4.0 * y, 2.0 * x, -2.0 * w)) + b.dot(&Vec3::new(2.0 * x, 0.0, 2.0 * z));
    let gz = a.dot(&Vec3::new(-4.0 * z, 2.0 * w, 2.0 * x)) + b.dot(&Vec3::new(-2.0 * w, -4.0 * z, 2.0 * y));
    let g = Vec4::new(gw, gx, gy, gz);
    let nv = Vec4::new(w, x, y, z);
    (g - nv * nv.dot(&g)) / norm
}

/// Gradients of `sum(d_image * color)` w.r.t. every splat parameter.
pub fn render_backward(scene: &Scene, camera: &Camera, config: &RenderConfig, d_image: &Image) -> Vec<SplatGradients> {
    render_backward_with(scene, camera, config, d_image, &Serial)
}

/// [`render_backward`] over a tile runner. Per-tile buffers are merged in
/// tile order, so the result does not depend on the runner.
pub fn render_backward_with<R: TileRunner>(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    d_image: &Image,
    runner: &R,
) -> Vec<SplatGradients> {
    backward_impl(scene, camera, config, d_image, runner, Jacobians::Live)
}

pub(crate) fn backward_impl<R: TileRunner>(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    d_image: &Image,
    runner: &R,
    jacobians: Jacobians<'_>,
) -> Vec<SplatGradients> {
    assert_eq!(d_image.dims(), (camera.width, camera.height, 3), "gradient image must match the view");
    let prepared = raster::prepare(scene, camera, config);
    let binning = raster::bin(&prepared, camera, config);
    let (w, h) = (camera.width, camera.height);
    let tiles = runner.run(binning.tile_count(), |t| {
        let rect = binning.tile_rect(t, w, h);
        let list = &binning.lists[t];
        let mut accum = vec![Accum::default(); list.len()];
        let mut hits = Vec::new();
        for y in rect.y0..rect.y1 {
            for x in rect.x0..rect.x1 {
                let g = d_image.pixel(x, y);
                let d_pixel = Vec3::new(g[0], g[1], g[2]);
                if d_pixel == Vec3::zeros() {
                    continue;
                }
                backward_pixel(
                    &prepared,
                    list,
                    &pixel_center(x, y),
                    y * w + x,
                    &d_pixel,
                    &scene.background,
                    config,
                    jacobians,
                    &mut hits,
                    &mut accum,
                );
            }
        }
        accum
    });
    let mut totals = vec![Accum::default(); scene.splats.len()];
    for (t, accum) in tiles.iter().enumerate() {
        for (&(idx, _), a) in binning.lists[t].iter().zip(accum) {
            totals[idx].add(a);
        }
    }
    let wts = camera.world_to_screen();
    scene
        .splats
        .iter()
        .zip(&prepared)
        .zip(&totals)
        .map(|((s, p), acc)| splat_gradients(s, p, acc, &wts))
        .collect()
}
