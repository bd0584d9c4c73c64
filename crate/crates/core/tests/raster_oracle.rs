mod common;

use common::*;
use splat2d_core::raster::{render, render_reference, render_with, supersample_reference, tile_binning};
use splat2d_core::{geometry, FilterMode, RenderConfig, Serial, Vec3};

#[test]
fn tiled_matches_reference_in_every_mode() {
    for seed in 0..20u64 {
        let (scene, cam) = random_scene(seed, 10 + (seed as usize * 7) % 41, 64);
        for mode in FilterMode::ALL {
            let cfg = RenderConfig::with_mode(mode);
            let a = render(&scene, &cam, &cfg);
            let b = render_reference(&scene, &cam, &cfg);
            let d = max_abs_diff(&a.color.data, &b.color.data);
            assert!(d < 1e-5, "seed {seed} mode {mode:?}: {d}");
            assert!(max_abs_diff(&a.alpha.data, &b.alpha.data) < 1e-5);
        }
    }
}

#[test]
fn tile_size_does_not_matter() {
    let (scene, cam) = random_scene(99, 40, 48);
    let base = render(&scene, &cam, &RenderConfig::default());
    for tile_size in [8, 32] {
        let cfg = RenderConfig { tile_size, ..Default::default() };
        assert_eq!(render(&scene, &cam, &cfg), base);
    }
}

#[test]
fn insertion_order_is_irrelevant() {
    let (mut scene, cam) = random_scene(5, 30, 32);
    let cfg = RenderConfig::default();
    let a = render_reference(&scene, &cam, &cfg);
    scene.splats.reverse();
    let b = render_reference(&scene, &cam, &cfg);
    assert!(max_abs_diff(&a.color.data, &b.color.data) < 1e-12);
}

#[test]
fn zero_filters_reduce_to_plain_kernel() {
    for seed in 0..5 {
        let (scene, cam) = random_scene(seed, 30, 48);
        let aa = RenderConfig { mip_sigma: 0.0, smooth_sreg: 0.0, ..RenderConfig::with_mode(FilterMode::Aa) };
        let a = render(&scene, &cam, &aa);
        let b = render(&scene, &cam, &RenderConfig::with_mode(FilterMode::None));
        assert!(max_abs_diff(&a.color.data, &b.color.data) <= 1e-12);
    }
}

#[test]
fn deterministic_and_runner_independent() {
    let (scene, cam) = random_scene(8, 50, 64);
    let cfg = RenderConfig::default();
    let a = render(&scene, &cam, &cfg);
    let b = render_with(&scene, &cam, &cfg, &Serial);
    assert_eq!(a, b);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.color.data), bits(&render(&scene, &cam, &cfg).color.data));
}

#[test]
fn outputs_are_bounded() {
    for seed in 0..5 {
        let (scene, cam) = random_scene(seed + 100, 50, 32);
        for mode in FilterMode::ALL {
            let out = render(&scene, &cam, &RenderConfig::with_mode(mode));
            assert!(out.alpha.data.iter().all(|a| (0.0..=1.0).contains(a)));
            assert!(out.color.data.iter().all(|c| c.is_finite() && *c >= 0.0 && *c <= 1.0 + 1e-12));
            for (d, a) in out.depth.data.iter().zip(&out.alpha.data) {
                if *a > 0.0 {
                    assert!(*d > RenderConfig::default().near_plane);
                }
            }
        }
    }
}

#[test]
fn binning_follows_boxes() {
    let (scene, cam) = random_scene(3, 50, 64);
    let cfg = RenderConfig::default();
    let b = tile_binning(&scene, &cam, &cfg);
    for (i, s) in scene.splats.iter().enumerate() {
        let rect = geometry::screen_bbox(s, &cam, &cfg);
        for t in 0..b.tile_count() {
            let tr = b.tile_rect(t, cam.width, cam.height);
            let overlaps =
                rect.is_some_and(|r| r.x0 < tr.x1 && tr.x0 < r.x1 && r.y0 < tr.y1 && tr.y0 < r.y1);
            let count = b.lists[t].iter().filter(|e| e.0 == i).count();
            assert_eq!(count, overlaps as usize, "splat {i} tile {t}");
        }
    }
    for l in &b.lists {
        assert!(l.windows(2).all(|w| (w[0].1, w[0].0) < (w[1].1, w[1].0)));
    }
}

#[test]
fn supersampling_constant_background() {
    let (mut scene, cam) = random_scene(1, 0, 16);
    scene.background = Vec3::new(0.3, 0.6, 0.9);
    let ss = supersample_reference(&scene, &cam, 8, &RenderConfig::default()).unwrap();
    assert!(ss.data.chunks(3).all(|p| p == [0.3, 0.6, 0.9]));
}
