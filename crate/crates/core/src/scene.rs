use alloc::vec::Vec;

use crate::{filters, Camera, Splat, Vec3};

/// Splats, training cameras and background color.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub splats: Vec<Splat>,
    pub cameras: Vec<Camera>,
    pub background: Vec3,
}

impl Scene {
    pub fn new(splats: Vec<Splat>, cameras: Vec<Camera>, background: Vec3) -> Self {
        Self { splats, cameras, background }
    }

    /// Recomputes every splat's frequency bound from `cameras`. Returns
    /// `false` (and leaves the splats untouched) when `cameras` is empty.
    pub fn update_frequency_bounds(&mut self, cameras: &[Camera], near_plane: f64) -> bool {
        if cameras.is_empty() {
            return false;
        }
        for s in &mut self.splats {
            s.freq_bound = filters::max_sampling_rate(&s.center, cameras, near_plane);
        }
        true
    }

    /// Frequency bounds from the scene's own camera list.
    pub fn compute_frequency_bounds(&mut self, near_plane: f64) -> bool {
        let cams = core::mem::take(&mut self.cameras);
        let ok = self.update_frequency_bounds(&cams, near_plane);
        self.cameras = cams;
        ok
    }

    /// Radius of the camera centers around their mean, times 1.1; falls back
    /// to the splat centers' spread, then to 1.
    pub fn extent(&self) -> f64 {
        let spread = |pts: &mut dyn Iterator<Item = Vec3>| -> f64 {
            let pts: Vec<Vec3> = pts.collect();
            if pts.is_empty() {
                return 0.0;
            }
            let mean = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / pts.len() as f64;
            pts.iter().map(|p| (p - mean).norm()).fold(0.0, f64::max) * 1.1
        };
        let cams = spread(&mut self.cameras.iter().map(|c| c.position()));
        if cams > 1e-6 {
            return cams;
        }
        let splats = spread(&mut self.splats.iter().map(|s| s.center));
        if splats > 1e-6 {
            splats
        } else {
            1.0
        }
    }
}
