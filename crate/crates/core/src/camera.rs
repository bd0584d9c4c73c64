//! Pinhole camera.

use crate::{Mat3, Mat4, Vec2, Vec3, Vec4};

/// Pinhole camera with OpenCV axis conventions (x right, y down, z forward).
///
/// Pixel `(i, j)` is sampled at its center `(i + 0.5, j + 0.5)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub world_to_camera: Mat4,
}

impl Camera {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize, world_to_camera: Mat4) -> Self {
        Self { fx, fy, cx, cy, width, height, world_to_camera }
    }

    /// Camera at `eye` looking at `target`; `up` is the approximate world up
    /// direction (image y grows opposite to it).
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, focal: f64, width: usize, height: usize) -> Self {
        let z = (target - eye).normalize();
        let x = z.cross(&up).normalize();
        let y = z.cross(&x);
        let rot = Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let t = -(rot * eye);
        let mut m = Mat4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        Self::new(focal, focal, width as f64 * 0.5, height as f64 * 0.5, width, height, m)
    }

    /// Checks intrinsics and that the pose block is a rotation.
    pub fn is_valid(&self) -> bool {
        let r = self.rotation();
        self.fx > 0.0
            && self.fy > 0.0
            && self.width >= 1
            && self.height >= 1
            && (r.transpose() * r - Mat3::identity()).abs().max() < 1e-9
            && self.world_to_camera.row(3) == nalgebra::RowVector4::new(0.0, 0.0, 0.0, 1.0)
    }

    pub fn rotation(&self) -> Mat3 {
        self.world_to_camera.fixed_view::<3, 3>(0, 0).into_owned()
    }

    /// Camera center in world coordinates.
    pub fn position(&self) -> Vec3 {
        let t: Vec3 = self.world_to_camera.fixed_view::<3, 1>(0, 3).into_owned();
        -(self.rotation().transpose() * t)
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        (self.world_to_camera * Vec4::new(p[0], p[1], p[2], 1.0)).xyz()
    }

    /// World-to-screen matrix `W`: `W (p, 1) = (fx x + cx z, fy y + cy z, z, z)`
    /// for camera-space `(x, y, z)`.
    pub fn world_to_screen(&self) -> Mat4 {
        #[rustfmt::skip]
        let k = Mat4::new(
            self.fx, 0.0, self.cx, 0.0,
            0.0, self.fy, self.cy, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        );
        k * self.world_to_camera
    }

    /// Continuous pixel coordinates of a world point; `None` at or behind the
    /// camera plane.
    pub fn project(&self, p: &Vec3) -> Option<Vec2> {
        let c = self.to_camera(p);
        if c[2] <= 0.0 {
            return None;
        }
        Some(Vec2::new(self.fx * c[0] / c[2] + self.cx, self.fy * c[1] / c[2] + self.cy))
    }

    /// Same pose with intrinsics and resolution scaled by `k`; the field of
    /// view is preserved.
    pub fn scaled(&self, k: f64) -> Self {
        let dim = |d: usize| -> usize {
            let v = libm::round(d as f64 * k);
            if v < 1.0 {
                1
            } else {
                v as usize
            }
        };
        Self {
            fx: self.fx * k,
            fy: self.fy * k,
            cx: self.cx * k,
            cy: self.cy * k,
            width: dim(self.width),
            height: dim(self.height),
            world_to_camera: self.world_to_camera,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_camera() -> Camera {
        Camera::new(100.0, 100.0, 50.0, 50.0, 100, 100, Mat4::identity())
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let w = axis_camera().world_to_screen();
        let s = w * Vec4::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(s, Vec4::new(50.0, 50.0, 1.0, 1.0));
    }

    #[test]
    fn pinhole_arithmetic() {
        let w = axis_camera().world_to_screen();
        let s = w * Vec4::new(1.0, 0.0, 2.0, 1.0);
        assert_eq!(s[0] / s[3], 100.0);
        assert_eq!(s[2], 2.0);
    }

    #[test]
    fn x_plane_vanishes_on_projection() {
        let cam = Camera::look_at(Vec3::new(0.3, -1.0, -4.0), Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), 120.0, 64, 48);
        assert!(cam.is_valid());
        let w = cam.world_to_screen();
        for p in [Vec3::new(0.1, 0.2, 0.3), Vec3::new(-1.0, 0.5, 2.0), Vec3::new(0.7, -0.9, -1.1)] {
            let s = w * Vec4::new(p[0], p[1], p[2], 1.0);
            let x = s[0] / s[3];
            let y = s[1] / s[3];
            let hx = Vec4::new(-1.0, 0.0, 0.0, x);
            let hy = Vec4::new(0.0, -1.0, 0.0, y);
            assert!(hx.dot(&s).abs() < 1e-9 * s.norm());
            assert!(hy.dot(&s).abs() < 1e-9 * s.norm());
            let pix = cam.project(&p).unwrap();
            assert!((pix - Vec2::new(x, y)).norm() < 1e-9);
        }
    }

    #[test]
    fn look_at_centers_target() {
        let cam = Camera::look_at(Vec3::new(1.0, 2.0, -3.0), Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0), 80.0, 40, 30);
        let pix = cam.project(&Vec3::new(0.5, 0.0, 0.0)).unwrap();
        assert!((pix - Vec2::new(20.0, 15.0)).norm() < 1e-9);
        assert!((cam.position() - Vec3::new(1.0, 2.0, -3.0)).norm() < 1e-12);
    }

    #[test]
    fn scaling_preserves_framing() {
        let cam = Camera::look_at(Vec3::new(0.0, 0.0, -3.0), Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), 80.0, 64, 48);
        let p = Vec3::new(0.4, -0.2, 0.5);
        let a = cam.project(&p).unwrap();
        for k in [0.125, 0.5, 2.0, 8.0] {
            let c = cam.scaled(k);
            let b = c.project(&p).unwrap();
            assert!((b - a * k).norm() < 1e-9);
            assert_eq!(c.width as f64, 64.0 * k);
        }
    }
}
