//! Scene files, image IO, procedural scenes, evaluation harnesses and the
//! `splat2d` command-line tool, on top of [`splat2d_core`].

pub mod cli;
pub mod gradcheck;
pub mod multiscale;
pub mod ppm;
pub mod procedural;
pub mod runner;
pub mod scene_file;

pub use runner::Parallel;
pub use scene_file::{load_scene, save_scene, SceneFileError};
