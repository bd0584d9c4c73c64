//! Central-difference gradient oracle.

use alloc::vec::Vec;

use super::SplatGradients;
use crate::raster::{render, render_frozen_jacobians, render_recording_jacobians, JacobianCache};
use crate::splat::PARAM_COUNT;
use crate::{Camera, Image, RenderConfig, RenderOutput, Scene};

/// Step for parameter `i` of [`crate::Splat::param`]: 1e-3 for the center,
/// 1e-4 otherwise.
pub fn fd_step(i: usize) -> f64 {
    if i < 3 {
        1e-3
    } else {
        1e-4
    }
}

/// How the Mip filter's Jacobian behaves under perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianHandling {
    /// Recomputed from the perturbed splat.
    Live,
    /// Held at the unperturbed value, matching the analytic backward pass.
    Frozen,
}

/// `sum(weights * color)`, the loss whose gradient [`super::render_backward`]
/// computes when given `weights` as the upstream image.
pub fn linear_loss(weights: &Image, out: &RenderOutput) -> f64 {
    weights.data.iter().zip(&out.color.data).map(|(w, c)| w * c).sum()
}

/// Central differences of `loss(render(...))` for every splat parameter.
/// Costs two renders per scalar parameter.
pub fn finite_diff_gradients<L>(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    jacobians: JacobianHandling,
    loss: L,
) -> Vec<SplatGradients>
where
    L: Fn(&RenderOutput) -> f64,
{
    finite_diff_gradients_with_steps(scene, camera, config, jacobians, fd_step, loss)
}

/// [`finite_diff_gradients`] with a custom step per parameter index.
pub fn finite_diff_gradients_with_steps<S, L>(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    jacobians: JacobianHandling,
    step: S,
    loss: L,
) -> Vec<SplatGradients>
where
    S: Fn(usize) -> f64,
    L: Fn(&RenderOutput) -> f64,
{
    let cache: Option<JacobianCache> = match jacobians {
        JacobianHandling::Live => None,
        JacobianHandling::Frozen => Some(render_recording_jacobians(scene, camera, config).1),
    };
    let eval = |s: &Scene| -> f64 {
        let out = match &cache {
            Some(c) => render_frozen_jacobians(s, camera, config, c),
            None => render(s, camera, config),
        };
        loss(&out)
    };
    let mut work = scene.clone();
    (0..scene.splats.len())
        .map(|k| {
            let mut g = [0.0; PARAM_COUNT];
            for (i, gi) in g.iter_mut().enumerate() {
                let h = step(i);
                let base = scene.splats[k].param(i);
                work.splats[k].set_param(i, base + h);
                let plus = eval(&work);
                work.splats[k].set_param(i, base - h);
                let minus = eval(&work);
                work.splats[k] = scene.splats[k].clone();
                *gi = (plus - minus) / (2.0 * h);
            }
            SplatGradients::from_array(&g)
        })
        .collect()
}
