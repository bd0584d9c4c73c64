mod common;

use rand::Rng;
use splat2d_core::geometry::{intersect_jacobian, ray_splat_intersect, screen_bbox, SplatScreenTransform};
use splat2d_core::{Mat2, RenderConfig, Vec2, Vec4};

const NEAR: f64 = 0.2;

/// Random non-degenerate (splat, camera, pixel) triple with the pixel inside
/// the splat's footprint.
fn sample(r: &mut rand_chacha::ChaCha8Rng) -> (SplatScreenTransform, Vec2) {
    loop {
        let s = common::random_splat(r, 1.0, (0.05, 0.8));
        let focal = r.random_range(30.0..200.0);
        let cam = common::orbit_camera(r, 64, focal);
        let view = (s.center - cam.position()).normalize();
        if s.normal().dot(&view).abs() < 0.05 {
            continue;
        }
        let Some(rect) = screen_bbox(&s, &cam, &RenderConfig::default()) else { continue };
        let t = SplatScreenTransform::for_splat(&s, &cam, NEAR);
        let p = Vec2::new(
            r.random_range(rect.x0 as f64..rect.x1 as f64),
            r.random_range(rect.y0 as f64..rect.y1 as f64),
        );
        if ray_splat_intersect(&t, &p).is_ok_and(|i| i.depth > NEAR) {
            return (t, p);
        }
    }
}

fn fd_jacobian(t: &SplatScreenTransform, p: &Vec2, h: f64) -> Mat2 {
    let uv = |q: Vec2| ray_splat_intersect(t, &q).unwrap().uv;
    let dx = (uv(p + Vec2::new(h, 0.0)) - uv(p - Vec2::new(h, 0.0))) / (2.0 * h);
    let dy = (uv(p + Vec2::new(0.0, h)) - uv(p - Vec2::new(0.0, h))) / (2.0 * h);
    Mat2::from_columns(&[dx, dy])
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut r = common::rng(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (t, p) = sample(&mut r);
        let j = intersect_jacobian(&t, &p).unwrap();
        let fd = fd_jacobian(&t, &p, 1e-4);
        worst = worst.max((j - fd).norm() / j.norm());
    }
    assert!(worst < 1e-4, "worst relative Frobenius error {worst}");
}

#[test]
fn intersection_reprojects_to_pixel() {
    let mut r = common::rng(102);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (t, p) = sample(&mut r);
        let hit = ray_splat_intersect(&t, &p).unwrap();
        let q = t.m * Vec4::new(hit.uv.x, hit.uv.y, 1.0, 1.0);
        let back = Vec2::new(q[0] / q[3], q[1] / q[3]);
        worst = worst.max((back - p).norm());
        assert!((q[2] - hit.depth).abs() < 1e-9 * (1.0 + hit.depth.abs()));
    }
    assert!(worst < 1e-6, "worst reprojection error {worst}");
}

#[test]
fn jacobian_is_continuous() {
    let mut r = common::rng(103);
    for _ in 0..50 {
        let (t, p) = sample(&mut r);
        let j0 = intersect_jacobian(&t, &p).unwrap();
        let j1 = intersect_jacobian(&t, &(p + Vec2::new(1e-7, -1e-7))).unwrap();
        assert!((j0 - j1).norm() < 1e-4 * j0.norm());
    }
}
