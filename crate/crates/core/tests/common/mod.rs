#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splat2d_core::{Camera, Quat, Scene, Splat, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_quat(rng: &mut ChaCha8Rng) -> Quat {
    Quat::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
    .normalize()
}

pub fn random_splat(rng: &mut ChaCha8Rng, half_extent: f64, scale: (f64, f64)) -> Splat {
    Splat::new(
        Vec3::new(
            rng.random_range(-half_extent..half_extent),
            rng.random_range(-half_extent..half_extent),
            rng.random_range(-half_extent..half_extent),
        ),
        random_quat(rng),
        [rng.random_range(scale.0..scale.1), rng.random_range(scale.0..scale.1)],
        rng.random_range(0.1..0.99),
        Vec3::new(rng.random(), rng.random(), rng.random()),
    )
}

pub fn orbit_camera(rng: &mut ChaCha8Rng, size: usize, focal: f64) -> Camera {
    let eye = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), -4.0);
    Camera::look_at(eye, Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), focal, size, size)
}

/// Random scene of `n` splats in a unit box seen by one camera.
pub fn random_scene(seed: u64, n: usize, size: usize) -> (Scene, Camera) {
    let mut r = rng(seed);
    let cam = orbit_camera(&mut r, size, size as f64 * 1.2);
    let splats = (0..n).map(|_| random_splat(&mut r, 1.0, (0.05, 0.45))).collect();
    let mut scene = Scene::new(splats, vec![cam.clone()], Vec3::new(0.05, 0.1, 0.15));
    scene.compute_frequency_bounds(0.2);
    (scene, cam)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Scene for finite-difference checks: splats wide enough that a 1e-3 center
/// step stays in the Taylor regime, and none viewed near edge-on.
pub fn gradient_scene(seed: u64, n: usize, size: usize) -> (Scene, Camera) {
    let mut r = rng(seed);
    let cam = orbit_camera(&mut r, size, size as f64 * 1.2);
    let mut splats = Vec::with_capacity(n);
    while splats.len() < n {
        let s = random_splat(&mut r, 0.8, (0.15, 0.45));
        let view = (s.center - cam.position()).normalize();
        if s.normal().dot(&view).abs() > 0.3 {
            splats.push(s);
        }
    }
    let mut scene = Scene::new(splats, vec![cam.clone()], Vec3::new(0.05, 0.1, 0.15));
    scene.compute_frequency_bounds(0.2);
    (scene, cam)
}
