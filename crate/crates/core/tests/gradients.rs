mod common;

use rand::Rng;
use splat2d_core::fit::{
    check_gradients, finite_diff_gradients, linear_loss, render_backward, GradientCheck, GradientComparison, JacobianHandling,
    ParamGroup,
};
use splat2d_core::{Camera, FilterMode, Image, Quat, RenderConfig, Scene, Splat, Vec3};

fn fd_config(mode: FilterMode) -> RenderConfig {
    RenderConfig { alpha_cutoff: 1e-12, transmittance_floor: 1e-12, ..RenderConfig::with_mode(mode) }
}

fn weights(seed: u64, size: usize) -> Image {
    let mut r = common::rng(seed);
    let mut w = Image::new(size, size, 3);
    w.data.iter_mut().for_each(|v| *v = r.random_range(-1.0..1.0));
    w
}

#[test]
fn frozen_jacobian_gradients_match_finite_differences() {
    for mode in FilterMode::ALL {
        let config = fd_config(mode);
        let mut total = GradientCheck::default();
        for seed in 0..10 {
            let (scene, cam) = common::gradient_scene(seed, 5, 20);
            total.merge(&check_gradients(&scene, &cam, &config, &weights(seed + 1000, 20)));
        }
        println!("{}: {} of {} parameters excluded at kinks", mode.name(), total.excluded, total.total);
        if mode != FilterMode::Clamp {
            assert_eq!(total.excluded, 0, "{}", mode.name());
        }
        assert!(total.excluded * 50 <= total.total, "{}: too many kinks", mode.name());
        for g in ParamGroup::ALL {
            let (worst, n) = total.comparison.group(g);
            assert!(n > 0, "{} {}: nothing compared", mode.name(), g.name());
            assert!(worst < 1e-3, "{} {}: worst relative error {worst}", mode.name(), g.name());
        }
    }
}

#[test]
fn live_jacobian_discrepancy_is_reported() {
    let config = fd_config(FilterMode::Aa);
    let mut r = GradientComparison::default();
    for seed in 0..3 {
        let (scene, cam) = common::gradient_scene(seed, 5, 20);
        let w = weights(seed + 1000, 20);
        let analytic = render_backward(&scene, &cam, &config, &w);
        let fd = finite_diff_gradients(&scene, &cam, &config, JacobianHandling::Live, |o| linear_loss(&w, o));
        r.add(&analytic, &fd);
    }
    for g in ParamGroup::ALL {
        let (worst, n) = r.group(g);
        println!("aa live-J {}: worst relative error {worst:.3e} over {n}", g.name());
    }
    assert!(r.group(ParamGroup::Color).0 < 1e-3);
    assert!(r.group(ParamGroup::Opacity).0 < 1e-3);
}

#[test]
fn background_only_loss_has_zero_gradient() {
    let (scene, cam) = common::random_scene(3, 5, 20);
    let w = Image::filled(20, 20, &[1.0, 1.0, 1.0]);
    let mut far = scene.clone();
    for s in &mut far.splats {
        s.center += Vec3::new(50.0, 0.0, 0.0);
    }
    let g = render_backward(&far, &cam, &RenderConfig::default(), &w);
    assert!(g.iter().all(|g| g.to_array().iter().all(|v| *v == 0.0)));
}

#[test]
fn symmetric_scene_has_mirrored_gradients() {
    let cam = Camera::look_at(Vec3::new(0.0, 0.0, -4.0), Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), 24.0, 24, 24);
    let make = |x: f64| Splat::new(Vec3::new(x, 0.0, 0.0), Quat::identity(), [0.3, 0.2], 0.7, Vec3::new(0.8, 0.3, 0.1));
    let mut scene = Scene::new(vec![make(-0.5), make(0.5)], vec![cam.clone()], Vec3::zeros());
    scene.compute_frequency_bounds(0.2);
    let w = Image::filled(24, 24, &[1.0, 0.5, 0.25]);
    let g = render_backward(&scene, &cam, &fd_config(FilterMode::None), &w);
    assert!((g[0].d_center.x + g[1].d_center.x).abs() < 1e-9);
    assert!((g[0].d_logit_opacity - g[1].d_logit_opacity).abs() < 1e-9);
    assert!((g[0].d_log_scales[1] - g[1].d_log_scales[1]).abs() < 1e-9);
}
