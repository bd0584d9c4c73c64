//! Projection and ray/splat intersection.
//!
//! A pixel `x = (x, y)` defines two screen planes `h_x = (-1, 0, 0, x)` and
//! `h_y = (0, -1, 0, y)`. Pulled back through `M = W H` they become planes in
//! the splat's `(u, v, 1, 1)` coordinates, and their meet with the splat plane
//! gives the local intersection point in closed form.

use crate::filters;
use crate::{Camera, FilterMode, Mat2, Mat4, RenderConfig, Splat, Vec2, Vec4};

/// `M = W H` for one splat and one camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplatScreenTransform {
    pub m: Mat4,
    /// False when the splat center is at or behind the near plane.
    pub valid: bool,
    /// Squared infinity norm of `m`, scale for the degeneracy test.
    norm_sq: f64,
}

/// Ray/splat hit for one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intersection {
    pub uv: Vec2,
    /// Camera-space depth of the hit point.
    pub depth: f64,
    pub denom: f64,
}

/// The pixel ray is (numerically) parallel to the splat plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Degenerate;

/// Inclusive-exclusive pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }
}

pub fn world_to_screen(camera: &Camera) -> Mat4 {
    camera.world_to_screen()
}

/// Continuous coordinates of the center of pixel `(i, j)`.
#[inline]
pub fn pixel_center(i: usize, j: usize) -> Vec2 {
    Vec2::new(i as f64 + 0.5, j as f64 + 0.5)
}

impl SplatScreenTransform {
    pub fn new(world_to_screen: &Mat4, object_to_world: &Mat4, near_plane: f64) -> Self {
        let m = world_to_screen * object_to_world;
        let center_depth = m[(3, 3)];
        let norm = (0..4)
            .map(|r| m.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Self { m, valid: center_depth > near_plane, norm_sq: norm * norm }
    }

    pub fn for_splat(splat: &Splat, camera: &Camera, near_plane: f64) -> Self {
        Self::new(&camera.world_to_screen(), &splat.object_to_world(), near_plane)
    }

    /// Camera-space depth of the splat center.
    pub fn center_depth(&self) -> f64 {
        self.m[(3, 3)]
    }

    /// Projected splat center in pixels.
    pub fn projected_center(&self) -> Vec2 {
        let w = self.m[(3, 3)];
        Vec2::new(self.m[(0, 3)] / w, self.m[(1, 3)] / w)
    }

    /// `(h_u, h_v) = (M^T h_x, M^T h_y)`.
    #[inline]
    pub fn local_planes(&self, pixel: &Vec2) -> (Vec4, Vec4) {
        let m = &self.m;
        let hu = Vec4::from_fn(|i, _| -m[(0, i)] + pixel[0] * m[(3, i)]);
        let hv = Vec4::from_fn(|i, _| -m[(1, i)] + pixel[1] * m[(3, i)]);
        (hu, hv)
    }

    #[inline]
    fn is_degenerate(&self, denom: f64) -> bool {
        denom.is_nan() || denom.abs() < 1e-9 * self.norm_sq
    }
}

/// Local coordinates of the pixel ray's hit with the splat plane.
pub fn ray_splat_intersect(t: &SplatScreenTransform, pixel: &Vec2) -> Result<Intersection, Degenerate> {
    let (hu, hv) = t.local_planes(pixel);
    let denom = hu[0] * hv[1] - hu[1] * hv[0];
    if t.is_degenerate(denom) {
        return Err(Degenerate);
    }
    let u = (hu[1] * hv[3] - hu[3] * hv[1]) / denom;
    let v = (hu[3] * hv[0] - hu[0] * hv[3]) / denom;
    let m = &t.m;
    let depth = m[(2, 0)] * u + m[(2, 1)] * v + m[(2, 2)] + m[(2, 3)];
    Ok(Intersection { uv: Vec2::new(u, v), depth, denom })
}

/// Exact Jacobian `d(u, v) / d(x, y)` of [`ray_splat_intersect`].
pub fn intersect_jacobian(t: &SplatScreenTransform, pixel: &Vec2) -> Result<Mat2, Degenerate> {
    let (hu, hv) = t.local_planes(pixel);
    let d = hu[0] * hv[1] - hu[1] * hv[0];
    if t.is_degenerate(d) {
        return Err(Degenerate);
    }
    Ok(jacobian_from_planes(&t.m, &hu, &hv, d))
}

/// Jacobian given precomputed planes and a non-degenerate denominator.
/// Only the fourth plane component depends on the pixel, with slope `M[3, :]`.
#[inline]
pub(crate) fn jacobian_from_planes(m: &Mat4, hu: &Vec4, hv: &Vec4, d: f64) -> Mat2 {
    let w = [m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]];
    let nu = hu[1] * hv[3] - hu[3] * hv[1];
    let nv = hu[3] * hv[0] - hu[0] * hv[3];
    let (u, v) = (nu / d, nv / d);

    let dnu_x = w[1] * hv[3] - w[3] * hv[1];
    let dnv_x = w[3] * hv[0] - w[0] * hv[3];
    let dd_x = w[0] * hv[1] - w[1] * hv[0];

    let dnu_y = hu[1] * w[3] - hu[3] * w[1];
    let dnv_y = hu[3] * w[0] - hu[0] * w[3];
    let dd_y = hu[0] * w[1] - hu[1] * w[0];

    Mat2::new(
        (dnu_x - u * dd_x) / d,
        (dnu_y - u * dd_y) / d,
        (dnv_x - v * dd_x) / d,
        (dnv_y - v * dd_y) / d,
    )
}

/// Continuous-coordinate bounds `[xmin, xmax, ymin, ymax]` of the projection
/// of the local disk `u^2 + v^2 <= r^2`, or `None` if the disk crosses the
/// camera plane (unbounded projection).
///
/// Uses the dual conic: a screen line `l` is tangent to the projected disk iff
/// `l^T T diag(r^2, r^2, -1) T^T l = 0`, where `T` keeps rows x, y, w and
/// columns u, v, 1 of `M`.
pub fn disk_screen_bounds(m: &Mat4, radius: f64) -> Option<[f64; 4]> {
    let rows = [0usize, 1, 3];
    let cols = [0usize, 1, 3];
    let t = |r: usize, c: usize| m[(rows[r], cols[c])];
    let r2 = radius * radius;
    let q = |a: usize, b: usize| r2 * (t(a, 0) * t(b, 0) + t(a, 1) * t(b, 1)) - t(a, 2) * t(b, 2);
    let q22 = q(2, 2);
    if q22.is_nan() || q22 >= 0.0 || t(2, 2) <= 0.0 {
        return None;
    }
    let solve = |qaa: f64, qa2: f64| -> (f64, f64) {
        let disc = libm::sqrt((qa2 * qa2 - qaa * q22).max(0.0));
        let a = (qa2 + disc) / q22;
        let b = (qa2 - disc) / q22;
        (a.min(b), a.max(b))
    };
    let (x0, x1) = solve(q(0, 0), q(0, 2));
    let (y0, y1) = solve(q(1, 1), q(1, 2));
    Some([x0, x1, y0, y1])
}

/// Splat as seen by the rasterizer: geometry and opacity after any flat
/// smoothing the filter mode applies.
pub(crate) fn effective_splat(splat: &Splat, config: &RenderConfig) -> ([f64; 2], f64) {
    if config.filter_mode == FilterMode::Aa {
        let s = filters::flat_smooth(splat, config.smooth_sreg);
        (s.eff_scales, s.eff_opacity)
    } else {
        (splat.scales, splat.opacity)
    }
}

/// Conservative pixel box for a prepared splat. `None` when nothing can pass
/// the alpha cutoff inside the viewport.
pub(crate) fn bbox_for_transform(
    t: &SplatScreenTransform,
    opacity: f64,
    camera: &Camera,
    config: &RenderConfig,
) -> Option<PixelRect> {
    if !t.valid || opacity <= config.alpha_cutoff {
        return None;
    }
    let cutoff_radius = libm::sqrt(2.0 * libm::log(opacity / config.alpha_cutoff));
    let radius = cutoff_radius.max(config.bbox_nsigma);
    let (w, h) = (camera.width as f64, camera.height as f64);
    let mut b = disk_screen_bounds(&t.m, radius).unwrap_or([f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY]);
    match config.filter_mode {
        FilterMode::None => {}
        FilterMode::Aa => {
            // The filtered footprint lies inside the Minkowski sum of the
            // unfiltered one and a disk of radius r * sqrt(sigma) pixels;
            // the slack covers the per-pixel variation of J.
            let pad = 1.1 * radius * libm::sqrt(config.mip_sigma) + 1.0;
            b = [b[0] - pad, b[1] + pad, b[2] - pad, b[3] + pad];
        }
        FilterMode::Clamp => {
            let c = t.projected_center();
            let r = radius * config.clamp_sigma;
            b = [b[0].min(c[0] - r), b[1].max(c[0] + r), b[2].min(c[1] - r), b[3].max(c[1] + r)];
        }
    }
    let margin = 1e-6 * (1.0 + w.max(h));
    let lo = |v: f64| libm::ceil(v - margin - 0.5);
    let hi = |v: f64| libm::floor(v + margin - 0.5);
    let (x0, x1, y0, y1) = (lo(b[0]).max(0.0), hi(b[1]).min(w - 1.0), lo(b[2]).max(0.0), hi(b[3]).min(h - 1.0));
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some(PixelRect { x0: x0 as usize, y0: y0 as usize, x1: x1 as usize + 1, y1: y1 as usize + 1 })
}

/// Conservative pixel box outside of which the splat's (filtered) kernel
/// never reaches `alpha_cutoff`. `None` when culled or off-screen.
pub fn screen_bbox(splat: &Splat, camera: &Camera, config: &RenderConfig) -> Option<PixelRect> {
    let (scales, opacity) = effective_splat(splat, config);
    let h = crate::splat::object_to_world(&splat.center, &splat.rotation_matrix(), scales);
    let t = SplatScreenTransform::new(&camera.world_to_screen(), &h, config.near_plane);
    bbox_for_transform(&t, opacity, camera, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splat::gaussian_local;
    use crate::{Quat, Vec3};

    fn axis_camera(f: f64) -> Camera {
        Camera::new(f, f, 32.0, 32.0, 64, 64, Mat4::identity())
    }

    fn facing_splat(depth: f64, scales: [f64; 2]) -> Splat {
        Splat::new(Vec3::new(0.0, 0.0, depth), Quat::identity(), scales, 0.9, Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn center_ray_hits_origin() {
        let cam = axis_camera(100.0);
        let t = SplatScreenTransform::for_splat(&facing_splat(2.0, [0.5, 0.5]), &cam, 0.2);
        let hit = ray_splat_intersect(&t, &t.projected_center()).unwrap();
        assert!(hit.uv.norm() < 1e-12);
        assert!((hit.depth - 2.0).abs() < 1e-12);
    }

    #[test]
    fn similar_triangles_offset() {
        let (f, d, su) = (100.0, 2.0, 0.5);
        let cam = axis_camera(f);
        let t = SplatScreenTransform::for_splat(&facing_splat(d, [su, 0.3]), &cam, 0.2);
        let px = t.projected_center() + Vec2::new(f * su / d, 0.0);
        let hit = ray_splat_intersect(&t, &px).unwrap();
        assert!((hit.uv - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fronto_parallel_jacobian() {
        let (f, d) = (100.0, 3.0);
        let t = SplatScreenTransform::for_splat(&facing_splat(d, [1.0, 1.0]), &axis_camera(f), 0.2);
        for px in [Vec2::new(32.0, 32.0), Vec2::new(5.5, 60.5)] {
            let j = intersect_jacobian(&t, &px).unwrap();
            assert!((j - Mat2::identity() * (d / f)).abs().max() < 1e-14);
        }
        let t2 = SplatScreenTransform::for_splat(&facing_splat(d, [1.0, 1.0]), &axis_camera(2.0 * f), 0.2);
        let j2 = intersect_jacobian(&t2, &Vec2::new(10.0, 10.0)).unwrap();
        assert!((j2 - Mat2::identity() * (d / (2.0 * f))).abs().max() < 1e-14);
    }

    #[test]
    fn edge_on_is_degenerate() {
        // plane containing the optical axis: normal along x
        let r = nalgebra::UnitQuaternion::from_axis_angle(&Vec3::y_axis(), core::f64::consts::FRAC_PI_2);
        let s = Splat::new(Vec3::new(0.0, 0.0, 2.0), r.into_inner(), [0.5, 0.5], 0.5, Vec3::zeros());
        let t = SplatScreenTransform::for_splat(&s, &axis_camera(100.0), 0.2);
        assert_eq!(ray_splat_intersect(&t, &Vec2::new(32.0, 20.0)), Err(Degenerate));
        assert_eq!(intersect_jacobian(&t, &Vec2::new(32.0, 20.0)), Err(Degenerate));
    }

    #[test]
    fn behind_camera_is_culled() {
        let cam = axis_camera(100.0);
        let s = facing_splat(-2.0, [1.0, 1.0]);
        assert!(!SplatScreenTransform::for_splat(&s, &cam, 0.2).valid);
        assert_eq!(screen_bbox(&s, &cam, &RenderConfig::with_mode(FilterMode::None)), None);
        let s = facing_splat(0.1, [1.0, 1.0]);
        assert_eq!(screen_bbox(&s, &cam, &RenderConfig::default()), None);
    }

    #[test]
    fn bbox_covers_three_sigma() {
        let (f, d) = (10.0, 4.0);
        let cam = Camera::new(f, f, 64.0, 64.0, 128, 128, Mat4::identity());
        let s = facing_splat(d, [1.0, 1.0]);
        let b = screen_bbox(&s, &cam, &RenderConfig::with_mode(FilterMode::None)).unwrap();
        let half = 3.0 * f / d;
        assert!(b.x0 as f64 + 0.5 <= 64.0 - half && b.x1 as f64 - 0.5 >= 64.0 + half);
        assert!(b.y0 as f64 + 0.5 <= 64.0 - half && b.y1 as f64 - 0.5 >= 64.0 + half);
    }

    #[test]
    fn bbox_clamps_to_viewport() {
        let cam = axis_camera(100.0);
        let s = facing_splat(1.0, [5.0, 5.0]);
        for mode in FilterMode::ALL {
            let b = screen_bbox(&s, &cam, &RenderConfig::with_mode(mode)).unwrap();
            assert_eq!(b, PixelRect { x0: 0, y0: 0, x1: 64, y1: 64 });
        }
    }

    #[test]
    fn bbox_is_conservative_exhaustive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let cfg = RenderConfig::with_mode(FilterMode::None);
        let cam = Camera::look_at(Vec3::new(0.0, 0.0, -3.0), Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), 30.0, 24, 20);
        let wts = cam.world_to_screen();
        for _ in 0..300 {
            let q = Quat::new(rng.random(), rng.random(), rng.random(), rng.random::<f64>() - 0.5);
            let s = Splat::new(
                Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-2.0..1.0)),
                q,
                [rng.random_range(0.02..0.8), rng.random_range(0.02..0.8)],
                rng.random_range(0.01..0.99),
                Vec3::zeros(),
            );
            let t = SplatScreenTransform::new(&wts, &s.object_to_world(), cfg.near_plane);
            let b = screen_bbox(&s, &cam, &cfg);
            for y in 0..cam.height {
                for x in 0..cam.width {
                    if b.is_some_and(|b| b.contains(x, y)) || !t.valid {
                        continue;
                    }
                    if let Ok(hit) = ray_splat_intersect(&t, &pixel_center(x, y)) {
                        if hit.depth > cfg.near_plane {
                            assert!(s.opacity * gaussian_local(&hit.uv) < cfg.alpha_cutoff, "pixel ({x},{y}) escaped bbox {b:?}");
                        }
                    }
                }
            }
        }
    }
}
