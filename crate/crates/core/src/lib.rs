//! Anti-aliased 2D Gaussian splatting.
//!
//! Planar Gaussian primitives are shaded at exact ray/plane intersections and
//! alpha-blended front to back. Three filter modes are supported:
//!
//! * [`FilterMode::None`]: the raw object-space kernel.
//! * [`FilterMode::Clamp`]: max of the object-space kernel and a fixed
//!   screen-space Gaussian around the projected center.
//! * [`FilterMode::Aa`]: a per-splat flat smoothing kernel bounded by the
//!   training views' sampling rate, plus an object-space Mip filter derived
//!   from the per-pixel Jacobian of the ray/splat mapping.
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats, procedural
//! scenes and the command-line tool live in the `splat2d` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod camera;
pub mod config;
pub mod exec;
pub mod filters;
pub mod fit;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod raster;
pub mod scene;
pub mod splat;

pub use camera::Camera;
pub use config::{ConfigError, FilterMode, RenderConfig};
pub use exec::{Serial, TileRunner};
pub use image::{Image, ImageError, RenderOutput};
pub use scene::Scene;
pub use splat::Splat;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec4 = nalgebra::Vector4<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat4 = nalgebra::Matrix4<f64>;
pub type Quat = nalgebra::Quaternion<f64>;

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}
