//! Anti-aliasing filters: flat smoothing bounded by the training sampling
//! rate, the object-space Mip filter, and the legacy clamp.

use crate::splat::gaussian_local;
use crate::{Camera, Mat2, Splat, Vec2, Vec3};

/// Fraction of the viewport added on each side for the frustum test.
pub const FRUSTUM_MARGIN: f64 = 0.15;

/// Highest `f / d` over the cameras whose (expanded) frustum contains
/// `center`; 0 when no camera sees it.
pub fn max_sampling_rate(center: &Vec3, cameras: &[Camera], near_plane: f64) -> f64 {
    let mut best = 0.0f64;
    for cam in cameras {
        let c = cam.to_camera(center);
        let depth = c[2];
        if depth <= near_plane {
            continue;
        }
        let x = cam.fx * c[0] / depth + cam.cx;
        let y = cam.fy * c[1] / depth + cam.cy;
        let (w, h) = (cam.width as f64, cam.height as f64);
        let inside = x >= -FRUSTUM_MARGIN * w
            && x <= (1.0 + FRUSTUM_MARGIN) * w
            && y >= -FRUSTUM_MARGIN * h
            && y <= (1.0 + FRUSTUM_MARGIN) * h;
        if inside {
            best = best.max(cam.fx / depth);
        }
    }
    best
}

/// A splat after convolution with its on-plane smoothing kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedSplat<'a> {
    pub base: &'a Splat,
    pub eff_scales: [f64; 2],
    pub eff_opacity: f64,
    pub sigma_smooth_sq: f64,
}

/// Smoothing variance `s_reg / freq^2`; 0 for an unseen splat.
#[inline]
pub fn smoothing_variance(freq_bound: f64, s_reg: f64) -> f64 {
    if freq_bound > 0.0 {
        s_reg / (freq_bound * freq_bound)
    } else {
        0.0
    }
}

/// Adds the smoothing variance to both plane axes and rescales opacity so
/// that `opacity * s_u * s_v` is preserved.
pub fn flat_smooth(splat: &Splat, s_reg: f64) -> SmoothedSplat<'_> {
    let var = smoothing_variance(splat.freq_bound, s_reg);
    let (eff_scales, eff_opacity) = smooth_with_variance(splat.scales, splat.opacity, var);
    SmoothedSplat { base: splat, eff_scales, eff_opacity, sigma_smooth_sq: var }
}

/// Effective scales and opacity for a given smoothing variance.
#[inline]
pub fn smooth_with_variance(scales: [f64; 2], opacity: f64, var: f64) -> ([f64; 2], f64) {
    let [su, sv] = scales;
    let eu = libm::sqrt(su * su + var);
    let ev = libm::sqrt(sv * sv + var);
    ([eu, ev], opacity * (su / eu) * (sv / ev))
}

impl SmoothedSplat<'_> {
    /// `d eff_opacity / d log s_i`, with the smoothing variance held fixed.
    pub fn opacity_log_scale_grad(&self) -> [f64; 2] {
        let v = self.sigma_smooth_sq;
        let [eu, ev] = self.eff_scales;
        [self.eff_opacity * v / (eu * eu), self.eff_opacity * v / (ev * ev)]
    }

    /// `d eff_scale_i / d log s_i`.
    pub fn scale_log_scale_grad(&self) -> [f64; 2] {
        let [su, sv] = self.base.scales;
        [su * su / self.eff_scales[0], sv * sv / self.eff_scales[1]]
    }
}

/// Local covariance `I + sigma J J^T` of the Mip-filtered kernel.
#[inline]
pub fn mip_covariance(jac: &Mat2, mip_sigma: f64) -> Mat2 {
    Mat2::identity() + jac * jac.transpose() * mip_sigma
}

/// Normalization factor and inverse of a symmetric positive-definite 2x2
/// local covariance: `(det^-1/2, inverse)`.
#[inline]
pub(crate) fn mip_terms(cov: &Mat2) -> (f64, Mat2) {
    let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(1, 0)];
    let inv = Mat2::new(cov[(1, 1)], -cov[(0, 1)], -cov[(1, 0)], cov[(0, 0)]) / det;
    (1.0 / libm::sqrt(det), inv)
}

#[inline]
pub(crate) fn eval_mip(uv: &Vec2, peak: f64, inv: &Mat2) -> f64 {
    let q = uv[0] * (inv[(0, 0)] * uv[0] + inv[(0, 1)] * uv[1]) + uv[1] * (inv[(1, 0)] * uv[0] + inv[(1, 1)] * uv[1]);
    peak * libm::exp(-0.5 * q)
}

/// `det(S)^-1/2 exp(-uv^T S^-1 uv / 2)` with `S = I + sigma J J^T`: the
/// screen-space Mip filter pulled back into splat-local coordinates.
pub fn mip_filtered_gaussian(uv: &Vec2, jac: &Mat2, mip_sigma: f64) -> f64 {
    if mip_sigma == 0.0 {
        return gaussian_local(uv);
    }
    let (peak, inv) = mip_terms(&mip_covariance(jac, mip_sigma));
    eval_mip(uv, peak, &inv)
}

/// Isotropic screen-space Gaussian of std-dev `clamp_sigma` around `center`.
#[inline]
pub fn screen_gaussian(pixel: &Vec2, center: &Vec2, clamp_sigma: f64) -> f64 {
    let d = (pixel - center) / clamp_sigma;
    gaussian_local(&d)
}

/// `max(G(uv), G((pixel - center) / clamp_sigma))`.
pub fn clamped_gaussian(uv: &Vec2, pixel: &Vec2, projected_center: &Vec2, clamp_sigma: f64) -> f64 {
    gaussian_local(uv).max(screen_gaussian(pixel, projected_center, clamp_sigma))
}
