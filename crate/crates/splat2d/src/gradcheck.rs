//! Analytic gradients against finite differences on small random scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splat2d_core::fit::{check_gradients, GradientCheck, ParamGroup};
use splat2d_core::{Camera, FilterMode, Image, Quat, RenderConfig, Scene, Splat, Vec3};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct GradcheckOptions {
    pub seed: u64,
    pub splats: usize,
    pub image_size: usize,
    pub modes: Vec<FilterMode>,
    pub tolerance: f64,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self { seed: 0, splats: 5, image_size: 20, modes: FilterMode::ALL.to_vec(), tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Clone, Debug)]
pub struct ModeReport {
    pub mode: FilterMode,
    pub check: GradientCheck,
}

impl ModeReport {
    pub fn worst(&self) -> f64 {
        self.check.comparison.max_error()
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.worst() < tolerance
    }
}

/// Rendering setup for gradient checks: cutoffs low enough that no
/// contribution is skipped inside a finite-difference stencil.
pub fn check_config(mode: FilterMode) -> RenderConfig {
    RenderConfig { alpha_cutoff: 1e-12, transmittance_floor: 1e-12, ..RenderConfig::with_mode(mode) }
}

/// `n` splats of moderate size in a box, none seen within ~17 degrees of
/// edge-on, viewed by one camera.
pub fn gradient_scene(seed: u64, n: usize, size: usize) -> (Scene, Camera) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eye = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), -4.0);
    let cam = Camera::look_at(eye, Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), size as f64 * 1.2, size, size);
    let mut splats = Vec::with_capacity(n);
    while splats.len() < n {
        let mut v = |a: f64| rng.random_range(-a..a);
        let center = Vec3::new(v(0.8), v(0.8), v(0.8));
        let rotation = Quat::new(v(1.0), v(1.0), v(1.0), v(1.0));
        let scales = [rng.random_range(0.15..0.45), rng.random_range(0.15..0.45)];
        let color = Vec3::new(rng.random(), rng.random(), rng.random());
        let s = Splat::new(center, rotation, scales, rng.random_range(0.1..0.99), color);
        if s.normal().dot(&(s.center - eye).normalize()).abs() > 0.3 {
            splats.push(s);
        }
    }
    let mut scene = Scene::new(splats, vec![cam.clone()], Vec3::new(0.05, 0.1, 0.15));
    scene.compute_frequency_bounds(RenderConfig::default().near_plane);
    (scene, cam)
}

/// Random upstream gradient in `[-1, 1]`.
pub fn loss_weights(seed: u64, size: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut w = Image::new(size, size, 3);
    w.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    w
}

pub fn gradcheck(options: &GradcheckOptions) -> Vec<ModeReport> {
    let (scene, cam) = gradient_scene(options.seed, options.splats, options.image_size);
    let w = loss_weights(options.seed, options.image_size);
    options
        .modes
        .iter()
        .map(|&mode| ModeReport { mode, check: check_gradients(&scene, &cam, &check_config(mode), &w) })
        .collect()
}

/// Human-readable table, one line per (mode, group).
pub fn format_report(reports: &[ModeReport], tolerance: f64) -> String {
    let mut s = String::new();
    for r in reports {
        for g in ParamGroup::ALL {
            let (worst, n) = r.check.comparison.group(g);
            let verdict = if worst < tolerance { "ok" } else { "FAIL" };
            s.push_str(&format!("{:<6} {:<9} worst {:.3e} over {:>3} params  {verdict}\n", r.mode.name(), g.name(), worst, n));
        }
        if r.check.excluded > 0 {
            s.push_str(&format!(
                "{:<6} {} of {} params skipped: finite differences straddle a kink\n",
                r.mode.name(),
                r.check.excluded,
                r.check.total
            ));
        }
    }
    s
}
