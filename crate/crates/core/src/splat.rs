//! The planar Gaussian primitive.

use crate::{logit, sigmoid, Mat3, Mat4, Quat, Vec2, Vec3, Vec4};

/// Number of optimizable scalars per splat (see [`Splat::param`]).
pub const PARAM_COUNT: usize = 13;

/// One planar Gaussian disk.
///
/// The tangent frame is held as a quaternion; `R = [t_u, t_v, t_u x t_v]` is
/// its rotation matrix. Scales and opacity are stored in their natural units
/// and exposed in log / logit form for optimization.
#[derive(Clone, Debug, PartialEq)]
pub struct Splat {
    pub center: Vec3,
    pub rotation: Quat,
    pub scales: [f64; 2],
    pub opacity: f64,
    pub color: Vec3,
    /// Maximum training sampling rate (cycles per world unit); 0 = unknown.
    pub freq_bound: f64,
}

impl Splat {
    pub fn new(center: Vec3, rotation: Quat, scales: [f64; 2], opacity: f64, color: Vec3) -> Self {
        debug_assert!(scales[0] > 0.0 && scales[1] > 0.0);
        debug_assert!(opacity > 0.0 && opacity < 1.0);
        Self {
            center,
            rotation: rotation.normalize(),
            scales,
            opacity,
            color,
            freq_bound: 0.0,
        }
    }

    /// Builds a splat from a rotation matrix whose first two columns are the
    /// tangent axes.
    pub fn from_frame(center: Vec3, frame: &Mat3, scales: [f64; 2], opacity: f64, color: Vec3) -> Self {
        let rot = nalgebra::Rotation3::from_matrix_unchecked(*frame);
        let q = nalgebra::UnitQuaternion::from_rotation_matrix(&rot);
        Self::new(center, q.into_inner(), scales, opacity, color)
    }

    pub fn log_scales(&self) -> [f64; 2] {
        [libm::log(self.scales[0]), libm::log(self.scales[1])]
    }

    pub fn set_log_scales(&mut self, log_scales: [f64; 2]) {
        self.scales = [libm::exp(log_scales[0]), libm::exp(log_scales[1])];
    }

    pub fn logit_opacity(&self) -> f64 {
        logit(self.opacity)
    }

    pub fn set_logit_opacity(&mut self, x: f64) {
        self.opacity = sigmoid(x);
    }

    /// Rotation matrix of the normalized quaternion.
    pub fn rotation_matrix(&self) -> Mat3 {
        rotation_matrix(&self.rotation)
    }

    pub fn tangents(&self) -> (Vec3, Vec3) {
        let r = self.rotation_matrix();
        (r.column(0).into_owned(), r.column(1).into_owned())
    }

    /// Plane normal `t_u x t_v`.
    pub fn normal(&self) -> Vec3 {
        self.rotation_matrix().column(2).into_owned()
    }

    pub fn normalize_rotation(&mut self) {
        self.rotation = self.rotation.normalize();
    }

    /// Object-to-world matrix `H` mapping `(u, v, 1, 1)` to the world point
    /// `p + s_u t_u u + s_v t_v v`.
    pub fn object_to_world(&self) -> Mat4 {
        object_to_world(&self.center, &self.rotation_matrix(), self.scales)
    }

    /// Optimizer-space parameter `i`: center (0..3), raw quaternion w,x,y,z
    /// (3..7), log scales (7..9), logit opacity (9), color (10..13).
    pub fn param(&self, i: usize) -> f64 {
        match i {
            0..=2 => self.center[i],
            3 => self.rotation.w,
            4 => self.rotation.i,
            5 => self.rotation.j,
            6 => self.rotation.k,
            7 | 8 => libm::log(self.scales[i - 7]),
            9 => self.logit_opacity(),
            10..=12 => self.color[i - 10],
            _ => panic!("splat parameter index {i} out of range"),
        }
    }

    /// Sets optimizer-space parameter `i`. The quaternion is not renormalized.
    pub fn set_param(&mut self, i: usize, value: f64) {
        match i {
            0..=2 => self.center[i] = value,
            3 => self.rotation.w = value,
            4 => self.rotation.i = value,
            5 => self.rotation.j = value,
            6 => self.rotation.k = value,
            7 | 8 => self.scales[i - 7] = libm::exp(value),
            9 => self.set_logit_opacity(value),
            10..=12 => self.color[i - 10] = value,
            _ => panic!("splat parameter index {i} out of range"),
        }
    }
}

/// `H = [s_u t_u, s_v t_v, 0, p; 0 0 0 1]`.
pub fn object_to_world(center: &Vec3, frame: &Mat3, scales: [f64; 2]) -> Mat4 {
    let tu = frame.column(0) * scales[0];
    let tv = frame.column(1) * scales[1];
    Mat4::from_columns(&[
        Vec4::new(tu[0], tu[1], tu[2], 0.0),
        Vec4::new(tv[0], tv[1], tv[2], 0.0),
        Vec4::zeros(),
        Vec4::new(center[0], center[1], center[2], 1.0),
    ])
}

/// Rotation matrix of `q / |q|`.
pub fn rotation_matrix(q: &Quat) -> Mat3 {
    let q = q.normalize();
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Unit-covariance Gaussian in splat-local coordinates.
#[inline]
pub fn gaussian_local(uv: &Vec2) -> f64 {
    libm::exp(-0.5 * (uv[0] * uv[0] + uv[1] * uv[1]))
}
