use std::path::Path;
use std::process::{Command, Output};

fn splat2d(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splat2d")).args(args).current_dir(dir).env_remove("SPLAT2D_THREADS").output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = splat2d(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn grid(dir: &Path) {
    grid_sized(dir, "64");
}

fn grid_sized(dir: &Path, size: &str) {
    ok(&["gen-scene", "--kind", "grid", "--count", "8", "--size", size, "--out", "s.json"], dir);
}

#[test]
fn render_writes_p6() {
    let dir = tempfile::tempdir().unwrap();
    grid(dir.path());
    ok(&["render", "--scene", "s.json", "--view", "0", "--filter", "aa", "--out", "out.ppm", "--depth", "d.ppm"], dir.path());
    let bytes = std::fs::read(dir.path().join("out.ppm")).unwrap();
    assert!(bytes.starts_with(b"P6\n64 64\n255\n"));
    assert_eq!(bytes.len(), 13 + 64 * 64 * 3);
    assert!(dir.path().join("d.ppm").exists());
}

#[test]
fn renders_match_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    grid(dir.path());
    ok(&["--threads", "1", "render", "--scene", "s.json", "--filter", "clamp", "--out", "a.ppm"], dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_splat2d"))
        .args(["render", "--scene", "s.json", "--filter", "clamp", "--out", "b.ppm"])
        .env("SPLAT2D_THREADS", "4")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.ppm"), read("b.ppm"));
}

#[test]
fn multiscale_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    grid_sized(dir.path(), "96");
    let out = ok(&["multiscale-eval", "--scene", "s.json", "--filter", "none", "--filter", "clamp", "--filter", "aa"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scale,mode,psnr,ssim,mse");
    assert_eq!(lines.len(), 1 + 7 * 3);
    let scales: Vec<&str> = lines[1..].iter().step_by(3).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(scales, ["1/8", "1/4", "1/2", "1", "2x", "4x", "8x"]);
}

#[test]
fn gradcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["gradcheck", "--seed", "3", "--splats", "5"], dir.path());
    assert!(String::from_utf8(out.stdout).unwrap().trim_end().ends_with("PASS"));
}

#[test]
fn metrics_json() {
    let dir = tempfile::tempdir().unwrap();
    grid(dir.path());
    ok(&["render", "--scene", "s.json", "--out", "a.ppm"], dir.path());
    let out = ok(&["metrics", "a.ppm", "a.ppm"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["psnr"], 100.0);
    assert_eq!(v["ssim"], 1.0);
    assert_eq!(v["mse"], 0.0);
}

#[test]
fn fit_writes_scene_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    grid(dir.path());
    ok(&["fit", "--scene", "s.json", "--target-scene", "s.json", "--iters", "5", "--out", "fit.json"], dir.path());
    let trace = std::fs::read_to_string(dir.path().join("fit.loss.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);
    splat2d::load_scene(&dir.path().join("fit.json")).unwrap();
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = splat2d(&["render", "--scene", "missing.json", "--out", "x.ppm"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("missing.json"));
    grid(dir.path());
    let out = splat2d(&["render", "--scene", "s.json", "--view", "3", "--out", "x.ppm"], dir.path());
    assert!(!out.status.success());
    let out = splat2d(&["render", "--scene", "s.json", "--mip-sigma", "-1", "--out", "x.ppm"], dir.path());
    assert!(!out.status.success());
}
