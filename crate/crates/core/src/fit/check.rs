//! Comparison of analytic and finite-difference gradients.

use super::{fd_step, finite_diff_gradients_with_steps, linear_loss, render_backward, JacobianHandling, SplatGradients};
use crate::{Camera, Image, RenderConfig, Scene};

/// Gradients smaller than this in both sources are not compared.
pub const GRAD_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamGroup {
    Center,
    Rotation,
    Scale,
    Opacity,
    Color,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 5] = [Self::Center, Self::Rotation, Self::Scale, Self::Opacity, Self::Color];

    pub fn name(self) -> &'static str {
        match self {
            Self::Center => "center",
            Self::Rotation => "rotation",
            Self::Scale => "scale",
            Self::Opacity => "opacity",
            Self::Color => "color",
        }
    }

    pub fn of_param(i: usize) -> Self {
        match i {
            0..=2 => Self::Center,
            3..=6 => Self::Rotation,
            7 | 8 => Self::Scale,
            9 => Self::Opacity,
            _ => Self::Color,
        }
    }
}

/// `|a - b| / max(|a|, |b|)`, or `None` when both are below [`GRAD_FLOOR`].
pub fn relative_error(a: f64, b: f64) -> Option<f64> {
    let m = a.abs().max(b.abs());
    if m <= GRAD_FLOOR {
        None
    } else {
        Some((a - b).abs() / m)
    }
}

/// Worst relative error per group and how many parameters were compared.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradientComparison {
    pub worst: [f64; 5],
    pub compared: [usize; 5],
}

impl GradientComparison {
    pub fn add(&mut self, analytic: &[SplatGradients], reference: &[SplatGradients]) {
        assert_eq!(analytic.len(), reference.len());
        for (a, r) in analytic.iter().zip(reference) {
            for (i, (x, y)) in a.to_array().iter().zip(r.to_array()).enumerate() {
                let g = ParamGroup::of_param(i) as usize;
                if let Some(e) = relative_error(*x, y) {
                    self.worst[g] = self.worst[g].max(e);
                    self.compared[g] += 1;
                }
            }
        }
    }

    pub fn max_error(&self) -> f64 {
        self.worst.iter().copied().fold(0.0, f64::max)
    }

    pub fn group(&self, g: ParamGroup) -> (f64, usize) {
        (self.worst[g as usize], self.compared[g as usize])
    }
}

/// Finite differences at the standard step and at a tenth of it must agree
/// this well for a parameter to be compared.
pub const FD_CONSISTENCY_LIMIT: f64 = 5e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradientCheck {
    /// Analytic (frozen Jacobian) against finite differences.
    pub comparison: GradientComparison,
    /// Parameters left out because their finite-difference stencil straddles
    /// a kink (a clamp branch switch or a degeneracy skip).
    pub excluded: usize,
    pub total: usize,
}

impl GradientCheck {
    pub fn merge(&mut self, other: &GradientCheck) {
        for i in 0..5 {
            self.comparison.worst[i] = self.comparison.worst[i].max(other.comparison.worst[i]);
            self.comparison.compared[i] += other.comparison.compared[i];
        }
        self.excluded += other.excluded;
        self.total += other.total;
    }
}

/// Compares [`render_backward`] to frozen-Jacobian finite differences of
/// `sum(weights * color)`.
pub fn check_gradients(scene: &Scene, camera: &Camera, config: &RenderConfig, weights: &Image) -> GradientCheck {
    let loss = |o: &crate::RenderOutput| linear_loss(weights, o);
    let analytic = render_backward(scene, camera, config, weights);
    let fd = finite_diff_gradients_with_steps(scene, camera, config, JacobianHandling::Frozen, fd_step, loss);
    let fine = finite_diff_gradients_with_steps(scene, camera, config, JacobianHandling::Frozen, |i| fd_step(i) * 0.1, loss);
    let mut check = GradientCheck::default();
    for ((a, f), g) in analytic.iter().zip(&fd).zip(&fine) {
        let (a, f, g) = (a.to_array(), f.to_array(), g.to_array());
        let mut keep_a = [0.0; crate::splat::PARAM_COUNT];
        let mut keep_f = [0.0; crate::splat::PARAM_COUNT];
        for i in 0..a.len() {
            check.total += 1;
            if relative_error(f[i], g[i]).is_some_and(|e| e >= FD_CONSISTENCY_LIMIT) {
                check.excluded += 1;
            } else {
                keep_a[i] = a[i];
                keep_f[i] = f[i];
            }
        }
        check.comparison.add(&[SplatGradients::from_array(&keep_a)], &[SplatGradients::from_array(&keep_f)]);
    }
    check
}
