use sha2::{Digest, Sha256};
use splat2d::procedural::{gen_scene, GenParams, SceneKind};
use splat2d::scene_file::{parse_scene, scene_to_json, SceneFileError};
use splat2d::{load_scene, save_scene};

const MINIMAL: &str = r#"{
  "version": 1,
  "background": [0, 0, 0],
  "cameras": [{"fx": 100, "fy": 100, "cx": 32, "cy": 32, "width": 64, "height": 64,
               "world_to_camera": [1,0,0,0, 0,1,0,0, 0,0,1,4, 0,0,0,1]}],
  "splats": [{"center": [0,0,0], "rotation": [1,0,0,0], "scales": [0.5, 0.2],
              "opacity": 0.8, "color": [1, 0.5, 0]}]
}"#;

fn error(text: &str) -> String {
    parse_scene(text).unwrap_err().to_string()
}

#[test]
fn round_trip_is_bit_exact() {
    let scene = gen_scene(&GenParams::new(SceneKind::Random, 40, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    save_scene(&scene, &path).unwrap();
    let back = load_scene(&path).unwrap();
    assert_eq!(back.splats, scene.splats);
    assert_eq!(back.cameras, scene.cameras);
    assert_eq!(back.background, scene.background);
}

#[test]
fn legacy_file_defaults_freq_bound() {
    let scene = parse_scene(MINIMAL).unwrap();
    assert_eq!(scene.splats[0].freq_bound, 0.0);
    assert_eq!(scene.cameras[0].width, 64);
}

#[test]
fn missing_field_is_named() {
    let text = MINIMAL.replace(r#""scales": [0.5, 0.2],"#, "");
    let e = error(&text);
    assert!(e.contains("splats[0]") && e.contains("scales"), "{e}");
}

#[test]
fn unknown_field_is_rejected() {
    let text = MINIMAL.replace(r#""opacity": 0.8"#, r#""opacity": 0.8, "alpha": 1"#);
    let e = error(&text);
    assert!(e.contains("splats[0]") && e.contains("alpha"), "{e}");
}

#[test]
fn invalid_values_carry_paths() {
    let e = error(&MINIMAL.replace("[0.5, 0.2]", "[0.5, -0.2]"));
    assert!(e.contains("splats[0].scales[1]"), "{e}");
    let e = error(&MINIMAL.replace(r#""fx": 100"#, r#""fx": 1e400"#));
    assert!(e.contains("cameras[0]"), "{e}");
    let e = error(&MINIMAL.replace(r#""version": 1"#, r#""version": 2"#));
    assert!(e.contains("version"), "{e}");
    let e = error(&MINIMAL.replace("0,0,1,4", "0,0,2,4"));
    assert!(e.contains("cameras[0]"), "{e}");
    assert!(matches!(parse_scene("{"), Err(SceneFileError::Parse(_))));
}

#[test]
fn quaternions_are_renormalized() {
    let scene = parse_scene(&MINIMAL.replace("[1,0,0,0]", "[2,0,0,0]")).unwrap();
    assert_eq!(scene.splats[0].rotation.w, 1.0);
}

#[test]
fn generation_is_deterministic() {
    for kind in [SceneKind::Grid, SceneKind::CheckerSphere, SceneKind::Random] {
        let p = GenParams::new(kind, 12, 5);
        assert_eq!(gen_scene(&p).unwrap().splats, gen_scene(&p).unwrap().splats);
    }
}

#[test]
fn random_seed7_checksum() {
    let scene = gen_scene(&GenParams::new(SceneKind::Random, 50, 7)).unwrap();
    let digest = Sha256::digest(scene_to_json(&scene).as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, "e2d675c92036102a9e3385b4643ec97e3032f1f42f94e5fe01317a3cee82db5c");
}
