#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use navproj::projector::{load_projector_config, DEFAULT_BASE_FRAME, DEFAULT_LENS_FRAME};
use navproj::{
    Intrinsics, Pipeline, Point3, ProjectorConfig, ResampleParams, RigidTransform, StyleConfig, TransformTree,
};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sample_scene.png")
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

pub fn sample_tree() -> TransformTree {
    TransformTree::from_config_str(&read_data("transforms.toml")).unwrap()
}

pub fn sample_projector() -> ProjectorConfig {
    load_projector_config(&read_data("projector.toml")).unwrap().with_mount_from(&sample_tree()).unwrap()
}

pub fn sample_pipeline(d: f64, diam: f64) -> Pipeline {
    let style = StyleConfig::from_config_str(&read_data("style.toml")).unwrap();
    let cfg = load_projector_config(&read_data("projector.toml")).unwrap();
    Pipeline::new(cfg, style, ResampleParams::new(d, diam).unwrap())
        .unwrap()
        .with_transforms(sample_tree())
        .unwrap()
}

/// Backward linear scan, written independently of the library: walk the path
/// from the end, keep a point when it clears the threshold from the last kept one.
pub fn oracle_resample(points: &[Point3], d: f64, diam: f64) -> Vec<Point3> {
    let mut kept: Vec<Point3> = Vec::new();
    for idx in (0..points.len()).rev() {
        let p = points[idx];
        let accept = match kept.last() {
            None => true,
            Some(prev) => {
                let thr = if kept.len() == 1 { d + diam } else { d };
                ((p.x - prev.x).powi(2) + (p.y - prev.y).powi(2)).sqrt() >= thr
            }
        };
        if accept {
            kept.push(p);
        }
    }
    kept
}

/// Projector `height` above the base, `offset_x` forward, facing `yaw`,
/// tilted `tilt` below horizontal, lens frame in camera convention.
pub fn tilted_projector(k: Intrinsics, height: f64, offset_x: f64, yaw: f64, tilt: f64) -> ProjectorConfig {
    let body =
        RigidTransform::from_xyz_ypr(DEFAULT_BASE_FRAME, "mount", [offset_x, 0.0, height], [yaw, tilt, 0.0])
            .unwrap();
    let optical =
        RigidTransform::from_xyz_ypr("mount", DEFAULT_LENS_FRAME, [0.0; 3], [-FRAC_PI_2, 0.0, -FRAC_PI_2])
            .unwrap();
    let tree = TransformTree::from_edges([body, optical]).unwrap();
    let mount = tree.lookup(DEFAULT_BASE_FRAME, DEFAULT_LENS_FRAME).unwrap();
    ProjectorConfig::new(k, mount, 0.99, 10.98).unwrap()
}

pub fn world_pose(x: f64, y: f64, yaw: f64) -> RigidTransform {
    RigidTransform::from_xyz_ypr("map", DEFAULT_BASE_FRAME, [x, y, 0.0], [yaw, 0.0, 0.0]).unwrap()
}

/// Bilinear point inside the quadrilateral `c` (TL, TR, BR, BL).
pub fn bilerp(c: &[Point3; 4], s: f64, t: f64) -> Point3 {
    let top = c[0] * (1.0 - s) + c[1] * s;
    let bottom = c[3] * (1.0 - s) + c[2] * s;
    top * (1.0 - t) + bottom * t
}
