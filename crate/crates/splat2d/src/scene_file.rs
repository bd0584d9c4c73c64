//! JSON scene files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "background": [0, 0, 0],
//!   "cameras": [{"fx": 100, "fy": 100, "cx": 32, "cy": 32, "width": 64, "height": 64,
//!                "world_to_camera": [1,0,0,0, 0,1,0,0, 0,0,1,4, 0,0,0,1]}],
//!   "splats": [{"center": [0,0,0], "rotation": [1,0,0,0], "scales": [0.5, 0.2],
//!               "opacity": 0.8, "color": [1, 0.5, 0], "freq_bound": 0}]
//! }
//! ```
//!
//! `rotation` is a (w, x, y, z) quaternion and `world_to_camera` is row-major.
//! Unknown fields are rejected. Quaternions are renormalized on load.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use splat2d_core::{Camera, Mat4, Quat, Scene, Splat, Vec3};

pub const FORMAT_VERSION: u32 = 1;

/// Quaternions within this distance of unit length are kept bit-for-bit.
const NORM_KEEP: f64 = 1e-12;
const NORM_WARN: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum SceneFileError {
    #[error("cannot access {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scene file: {0}")]
    Parse(String),
    #[error("scene file: {path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    pub background: [f64; 3],
    pub cameras: Vec<CameraRecord>,
    pub splats: Vec<SplatRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub world_to_camera: [f64; 16],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplatRecord {
    pub center: [f64; 3],
    pub rotation: [f64; 4],
    pub scales: [f64; 2],
    pub opacity: f64,
    pub color: [f64; 3],
    #[serde(default)]
    pub freq_bound: f64,
}

fn invalid(path: String, message: impl Into<String>) -> SceneFileError {
    SceneFileError::Invalid { path, message: message.into() }
}

fn check_finite(path: &str, values: &[f64]) -> Result<(), SceneFileError> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) if values.len() == 1 => Err(invalid(path.to_string(), format!("non-finite value {}", values[i]))),
        Some(i) => Err(invalid(format!("{path}[{i}]"), format!("non-finite value {}", values[i]))),
    }
}

impl CameraRecord {
    fn from_camera(c: &Camera) -> Self {
        let m = &c.world_to_camera;
        Self {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            world_to_camera: std::array::from_fn(|i| m[(i / 4, i % 4)]),
        }
    }

    fn to_camera(&self, path: &str) -> Result<Camera, SceneFileError> {
        for (name, v) in [("fx", self.fx), ("fy", self.fy), ("cx", self.cx), ("cy", self.cy)] {
            check_finite(&format!("{path}.{name}"), &[v])?;
        }
        check_finite(&format!("{path}.world_to_camera"), &self.world_to_camera)?;
        let cam = Camera::new(
            self.fx,
            self.fy,
            self.cx,
            self.cy,
            self.width,
            self.height,
            Mat4::from_row_slice(&self.world_to_camera),
        );
        if !cam.is_valid() {
            return Err(invalid(
                path.to_string(),
                "camera needs positive focal lengths, a non-empty image and a rigid world_to_camera",
            ));
        }
        Ok(cam)
    }
}

impl SplatRecord {
    fn from_splat(s: &Splat) -> Self {
        let q = &s.rotation;
        Self {
            center: [s.center.x, s.center.y, s.center.z],
            rotation: [q.w, q.i, q.j, q.k],
            scales: s.scales,
            opacity: s.opacity,
            color: [s.color.x, s.color.y, s.color.z],
            freq_bound: s.freq_bound,
        }
    }

    fn to_splat(&self, path: &str) -> Result<Splat, SceneFileError> {
        check_finite(&format!("{path}.center"), &self.center)?;
        check_finite(&format!("{path}.rotation"), &self.rotation)?;
        check_finite(&format!("{path}.scales"), &self.scales)?;
        check_finite(&format!("{path}.opacity"), &[self.opacity])?;
        check_finite(&format!("{path}.color"), &self.color)?;
        check_finite(&format!("{path}.freq_bound"), &[self.freq_bound])?;
        if let Some(i) = self.scales.iter().position(|s| *s <= 0.0) {
            return Err(invalid(format!("{path}.scales[{i}]"), "scales must be positive"));
        }
        if !(self.opacity > 0.0 && self.opacity <= 1.0) {
            return Err(invalid(format!("{path}.opacity"), "opacity must be in (0, 1]"));
        }
        if self.freq_bound < 0.0 {
            return Err(invalid(format!("{path}.freq_bound"), "freq_bound must be non-negative"));
        }
        let [w, x, y, z] = self.rotation;
        let mut q = Quat::new(w, x, y, z);
        let drift = (q.norm() - 1.0).abs();
        if q.norm() == 0.0 {
            return Err(invalid(format!("{path}.rotation"), "zero quaternion"));
        }
        if drift > NORM_KEEP {
            if drift > NORM_WARN {
                log::warn!("{path}.rotation: renormalizing quaternion (|q| - 1 = {drift:.3e})");
            }
            q = q.normalize();
        }
        let [cx, cy, cz] = self.center;
        let [r, g, b] = self.color;
        Ok(Splat {
            center: Vec3::new(cx, cy, cz),
            rotation: q,
            scales: self.scales,
            opacity: self.opacity,
            color: Vec3::new(r, g, b),
            freq_bound: self.freq_bound,
        })
    }
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            version: FORMAT_VERSION,
            background: [scene.background.x, scene.background.y, scene.background.z],
            cameras: scene.cameras.iter().map(CameraRecord::from_camera).collect(),
            splats: scene.splats.iter().map(SplatRecord::from_splat).collect(),
        }
    }

    pub fn to_scene(&self) -> Result<Scene, SceneFileError> {
        if self.version != FORMAT_VERSION {
            return Err(invalid(
                "version".into(),
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.version),
            ));
        }
        check_finite("background", &self.background)?;
        let cameras = self
            .cameras
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_camera(&format!("cameras[{i}]")))
            .collect::<Result<_, _>>()?;
        let splats = self
            .splats
            .iter()
            .enumerate()
            .map(|(i, s)| s.to_splat(&format!("splats[{i}]")))
            .collect::<Result<_, _>>()?;
        let [r, g, b] = self.background;
        Ok(Scene::new(splats, cameras, Vec3::new(r, g, b)))
    }
}

pub fn parse_scene(text: &str) -> Result<Scene, SceneFileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: SceneFile = serde_path_to_error::deserialize(de).map_err(|e| SceneFileError::Parse(e.to_string()))?;
    file.to_scene()
}

pub fn scene_to_json(scene: &Scene) -> String {
    serde_json::to_string_pretty(&SceneFile::from_scene(scene)).expect("scene serialization cannot fail")
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneFileError> {
    let text = fs::read_to_string(path).map_err(|source| SceneFileError::Io { path: path.into(), source })?;
    parse_scene(&text)
}

pub fn save_scene(scene: &Scene, path: &Path) -> Result<(), SceneFileError> {
    let mut text = scene_to_json(scene);
    text.push('\n');
    fs::write(path, text).map_err(|source| SceneFileError::Io { path: path.into(), source })
}
