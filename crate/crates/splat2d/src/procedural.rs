//! Procedural test scenes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splat2d_core::{Camera, Quat, Scene, Splat, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SceneKind {
    /// Fronto-parallel checkerboard lattice of small splats.
    Grid,
    /// Splats tangent to a unit sphere with alternating colors.
    CheckerSphere,
    /// Uniform random splats in a box.
    Random,
}

impl SceneKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Grid => "grid",
            Self::CheckerSphere => "checker-sphere",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SceneKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        match s {
            "grid" => Ok(Self::Grid),
            "checker-sphere" => Ok(Self::CheckerSphere),
            "random" => Ok(Self::Random),
            _ => Err(GenError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("unknown scene kind {0:?} (expected grid, checker-sphere or random)")]
    UnknownKind(String),
    #[error("count must be at least 1")]
    Count,
    #[error("image size must be at least 1")]
    Size,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub kind: SceneKind,
    /// Lattice side for `grid` (n x n splats), splat count otherwise.
    pub count: usize,
    pub seed: u64,
    /// Width and height of the generated cameras.
    pub image_size: usize,
}

impl GenParams {
    pub fn new(kind: SceneKind, count: usize, seed: u64) -> Self {
        Self { kind, count, seed, image_size: 128 }
    }
}

/// World-space spacing of the grid lattice.
pub const GRID_PITCH: f64 = 0.2;
const GRID_DISTANCE: f64 = 4.0;

fn up() -> Vec3 {
    Vec3::new(0.0, -1.0, 0.0)
}

fn checker_color(even: bool) -> Vec3 {
    if even {
        Vec3::new(0.95, 0.9, 0.8)
    } else {
        Vec3::new(0.05, 0.1, 0.2)
    }
}

pub fn gen_scene(params: &GenParams) -> Result<Scene, GenError> {
    if params.count == 0 {
        return Err(GenError::Count);
    }
    if params.image_size == 0 {
        return Err(GenError::Size);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let size = params.image_size;
    Ok(match params.kind {
        SceneKind::Grid => grid(params.count, size, &mut rng),
        SceneKind::CheckerSphere => checker_sphere(params.count, size),
        SceneKind::Random => random(params.count, size, &mut rng),
    })
}

/// The grid lattice fills about 85% of a `size`-pixel view, so at 128 pixels
/// neighbouring splats are 6.4 pixels apart on a 16 x 16 lattice.
fn grid(n: usize, size: usize, rng: &mut ChaCha8Rng) -> Scene {
    let focal = size as f64;
    let cam = Camera::look_at(Vec3::new(0.0, 0.0, -GRID_DISTANCE), Vec3::zeros(), up(), focal, size, size);
    let pitch = GRID_PITCH * 16.0 / n as f64;
    let half = (n as f64 - 1.0) * 0.5;
    let mut splats = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let center = Vec3::new((col as f64 - half) * pitch, (row as f64 - half) * pitch, 0.0);
            let angle = rng.random_range(-0.3..0.3);
            let rotation = Quat::new(libm::cos(angle * 0.5), 0.0, 0.0, libm::sin(angle * 0.5));
            let scales = [0.4 * pitch, 0.25 * pitch];
            splats.push(Splat::new(center, rotation, scales, 0.9, checker_color((row + col) % 2 == 0)));
        }
    }
    let mut scene = Scene::new(splats, vec![cam], Vec3::new(0.5, 0.5, 0.5));
    scene.compute_frequency_bounds(splat2d_core::RenderConfig::default().near_plane);
    scene
}

fn orbit_cameras(count: usize, radius: f64, size: usize) -> Vec<Camera> {
    (0..count)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / count as f64;
            let eye = Vec3::new(radius * libm::sin(a), 0.3 * radius * libm::cos(2.0 * a), -radius * libm::cos(a));
            Camera::look_at(eye, Vec3::zeros(), up(), size as f64 * 1.1, size, size)
        })
        .collect()
}

/// Quaternion whose third frame axis is `normal`.
fn facing(normal: &Vec3) -> Quat {
    let r = nalgebra::UnitQuaternion::rotation_between(&Vec3::z(), normal)
        .unwrap_or_else(|| nalgebra::UnitQuaternion::from_axis_angle(&Vec3::x_axis(), PI));
    r.into_inner()
}

/// Fibonacci points on the unit sphere; colors alternate on a latitude /
/// longitude checkerboard with 8 x 8 cells.
fn checker_sphere(n: usize, size: usize) -> Scene {
    let golden = PI * (3.0 - 5f64.sqrt());
    let scale = 2.2 / (n as f64).sqrt();
    let splats = (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let phi = golden * i as f64;
            let p = Vec3::new(r * libm::cos(phi), y, r * libm::sin(phi));
            let lat = ((libm::acos(y) / PI) * 8.0) as usize;
            let lon = ((phi.rem_euclid(2.0 * PI) / (2.0 * PI)) * 8.0) as usize;
            Splat::new(p, facing(&p), [scale, scale], 0.95, checker_color((lat + lon).is_multiple_of(2)))
        })
        .collect();
    let mut scene = Scene::new(splats, orbit_cameras(4, 4.0, size), Vec3::new(0.0, 0.0, 0.0));
    scene.compute_frequency_bounds(splat2d_core::RenderConfig::default().near_plane);
    scene
}

fn random(n: usize, size: usize, rng: &mut ChaCha8Rng) -> Scene {
    let splats = (0..n)
        .map(|_| {
            let mut v = || rng.random_range(-1.0..1.0);
            let center = Vec3::new(v(), v(), v());
            let rotation = Quat::new(v(), v(), v(), v());
            let scales = [rng.random_range(0.05..0.3), rng.random_range(0.05..0.3)];
            let opacity = rng.random_range(0.3..0.95);
            let color = Vec3::new(rng.random(), rng.random(), rng.random());
            Splat::new(center, rotation, scales, opacity, color)
        })
        .collect();
    let mut scene = Scene::new(splats, orbit_cameras(4, 4.0, size), Vec3::new(0.1, 0.1, 0.1));
    scene.compute_frequency_bounds(splat2d_core::RenderConfig::default().near_plane);
    scene
}
