//! Pinhole projector model.
//!
//! The lens frame uses camera convention: +Z along the projection axis, +X to
//! the right and +Y down in the image. Pixel (0, 0) is the center of the
//! top-left pixel, so the image spans `[-0.5, width - 0.5] x [-0.5, height - 0.5]`.
//!
//! `robot_pose` arguments map robot-base coordinates into the world frame;
//! `ProjectorConfig::mount` maps lens coordinates into the robot base.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, RigidTransform, TransformTree, UnitQuaternion};

/// Points closer than this to the lens plane count as behind it.
pub const MIN_DEPTH: f64 = 1e-9;
/// Convergence threshold on the Newton step in normalized image coordinates.
pub const UNDISTORT_TOLERANCE: f64 = 1e-10;
const UNDISTORT_MAX_ITERATIONS: usize = 50;
// A ray whose normalized z-component is above -this is treated as not descending.
const DESCENT_EPSILON: f64 = 1e-12;

pub const DEFAULT_BASE_FRAME: &str = "base_link";
pub const DEFAULT_LENS_FRAME: &str = "projector_lens";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Distortion {
    #[default]
    None,
    /// Radial-tangential (plumb bob): `k1, k2, p1, p2, k3`.
    RadTan { k1: f64, k2: f64, p1: f64, p2: f64, k3: f64 },
}

impl Distortion {
    pub fn radtan(c: [f64; 5]) -> Self {
        Distortion::RadTan { k1: c[0], k2: c[1], p1: c[2], p2: c[3], k3: c[4] }
    }

    pub fn coefficients(&self) -> [f64; 5] {
        match *self {
            Distortion::None => [0.0; 5],
            Distortion::RadTan { k1, k2, p1, p2, k3 } => [k1, k2, p1, p2, k3],
        }
    }

    /// Maps ideal normalized coordinates to distorted ones.
    pub fn distort(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Distortion::None => (x, y),
            Distortion::RadTan { k1, k2, p1, p2, k3 } => {
                let r2 = x * x + y * y;
                let radial = 1.0 + k1 * r2 + k2 * r2 * r2 + k3 * r2 * r2 * r2;
                (
                    x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
                    y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y,
                )
            }
        }
    }

    /// Inverts [`Distortion::distort`] by Newton iteration.
    pub fn undistort(&self, xd: f64, yd: f64) -> Result<(f64, f64)> {
        let Distortion::RadTan { k1, k2, p1, p2, k3 } = *self else {
            return Ok((xd, yd));
        };
        let (mut x, mut y) = (xd, yd);
        for _ in 0..UNDISTORT_MAX_ITERATIONS {
            let (fx, fy) = self.distort(x, y);
            let (ex, ey) = (fx - xd, fy - yd);
            let r2 = x * x + y * y;
            let radial = 1.0 + k1 * r2 + k2 * r2 * r2 + k3 * r2 * r2 * r2;
            let dr = k1 + 2.0 * k2 * r2 + 3.0 * k3 * r2 * r2;
            let jxx = radial + 2.0 * x * x * dr + 2.0 * p1 * y + 6.0 * p2 * x;
            let jxy = 2.0 * x * y * dr + 2.0 * p1 * x + 2.0 * p2 * y;
            let jyy = radial + 2.0 * y * y * dr + 6.0 * p1 * y + 2.0 * p2 * x;
            let det = jxx * jyy - jxy * jxy;
            if !(det.abs() > 1e-300) || !det.is_finite() {
                break;
            }
            let sx = (jyy * ex - jxy * ey) / det;
            let sy = (jxx * ey - jxy * ex) / det;
            x -= sx;
            y -= sy;
            if sx.hypot(sy) < UNDISTORT_TOLERANCE {
                return Ok((x, y));
            }
        }
        Err(Error::param(format!("undistortion did not converge for ({xd}, {yd})")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub width_px: u32,
    pub height_px: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub distortion: Distortion,
}

impl Intrinsics {
    pub fn new(width_px: u32, height_px: u32, fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = Self { width_px, height_px, fx, fy, cx, cy, distortion: Distortion::None };
        k.validate()?;
        Ok(k)
    }

    pub fn with_distortion(mut self, distortion: Distortion) -> Result<Self> {
        if distortion.coefficients().iter().any(|c| !c.is_finite()) {
            return Err(Error::param("distortion coefficients must be finite"));
        }
        self.distortion = distortion;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::param("image size must be positive"));
        }
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::param("focal lengths must be > 0"));
        }
        let in_range = |c: f64, n: u32| c.is_finite() && c >= 0.0 && c < n as f64;
        if !in_range(self.cx, self.width_px) || !in_range(self.cy, self.height_px) {
            return Err(Error::param("principal point must lie inside the image"));
        }
        Ok(())
    }

    /// Row-major `[fx 0 cx; 0 fy cy; 0 0 1]`.
    pub fn camera_matrix(&self) -> [f64; 9] {
        [self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0]
    }

    /// Pixel of a lens-frame point, or `BehindLens` when its depth is not positive.
    pub fn project_lens_point(&self, p: Point3) -> Result<(f64, f64)> {
        if !(p.z > MIN_DEPTH) {
            return Err(Error::BehindLens { depth: p.z });
        }
        let (xd, yd) = self.distortion.distort(p.x / p.z, p.y / p.z);
        Ok((self.fx * xd + self.cx, self.fy * yd + self.cy))
    }

    /// Lens-frame direction `(x, y, 1)` through a pixel.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Result<Point3> {
        let (x, y) = self.distortion.undistort((u - self.cx) / self.fx, (v - self.cy) / self.fy)?;
        Ok(Point3::new(x, y, 1.0))
    }

    /// Image corners in TL, TR, BR, BL order (outer pixel edges).
    pub fn corners(&self) -> [(f64, f64); 4] {
        let (r, b) = (self.width_px as f64 - 0.5, self.height_px as f64 - 0.5);
        [(-0.5, -0.5), (r, -0.5), (r, b), (-0.5, b)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorConfig {
    pub intrinsics: Intrinsics,
    /// Robot base -> projector lens.
    pub mount: RigidTransform,
    pub throw_min_m: f64,
    pub throw_max_m: f64,
}

impl ProjectorConfig {
    pub fn new(
        intrinsics: Intrinsics,
        mount: RigidTransform,
        throw_min_m: f64,
        throw_max_m: f64,
    ) -> Result<Self> {
        intrinsics.validate()?;
        if !(throw_min_m.is_finite()
            && throw_max_m.is_finite()
            && 0.0 < throw_min_m
            && throw_min_m < throw_max_m)
        {
            return Err(Error::param(format!(
                "throw range must satisfy 0 < min < max, got [{throw_min_m}, {throw_max_m}]"
            )));
        }
        Ok(Self { intrinsics, mount, throw_min_m, throw_max_m })
    }

    /// Replaces the mount with the chain between the mount's frames in `tree`.
    pub fn with_mount_from(mut self, tree: &TransformTree) -> Result<Self> {
        self.mount = tree.lookup(&self.mount.parent_frame, &self.mount.child_frame)?;
        Ok(self)
    }

    pub fn base_frame(&self) -> &str {
        &self.mount.parent_frame
    }

    pub fn lens_frame(&self) -> &str {
        &self.mount.child_frame
    }
}

/// A projector placed in the world: config plus precomputed lens pose.
#[derive(Debug, Clone)]
pub struct ProjectorView<'a> {
    pub config: &'a ProjectorConfig,
    lens_to_world: RigidTransform,
    world_to_lens: RigidTransform,
}

impl<'a> ProjectorView<'a> {
    pub fn new(config: &'a ProjectorConfig, robot_pose: &RigidTransform) -> Result<Self> {
        let lens_to_world = robot_pose.compose(&config.mount)?;
        let world_to_lens = lens_to_world.invert();
        Ok(Self { config, lens_to_world, world_to_lens })
    }

    pub fn lens_position(&self) -> Point3 {
        self.lens_to_world.translation
    }

    pub fn lens_to_world(&self) -> &RigidTransform {
        &self.lens_to_world
    }

    pub fn project(&self, p_world: Point3) -> Result<(f64, f64)> {
        self.config.intrinsics.project_lens_point(self.world_to_lens.apply(p_world))
    }

    /// Where the pixel's ray meets z = 0. The ray must descend strictly.
    pub fn unproject_to_ground(&self, u: f64, v: f64) -> Result<Point3> {
        let ray = self.config.intrinsics.pixel_ray(u, v)?;
        self.intersect_ground(self.lens_to_world.apply_vector(ray))
    }

    fn intersect_ground(&self, d: Point3) -> Result<Point3> {
        let o = self.lens_to_world.translation;
        if !(d.z < -DESCENT_EPSILON * d.norm()) {
            return Err(Error::NoGroundIntersection);
        }
        let t = -o.z / d.z;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NoGroundIntersection);
        }
        Ok(Point3::ground(o.x + t * d.x, o.y + t * d.y))
    }

    pub fn ground_footprint(&self) -> Result<GroundFootprint> {
        const NAMES: [&str; 4] = ["top-left", "top-right", "bottom-right", "bottom-left"];
        let mut corners = [Point3::ORIGIN; 4];
        for (i, (u, v)) in self.config.intrinsics.corners().into_iter().enumerate() {
            corners[i] =
                self.unproject_to_ground(u, v).map_err(|_| Error::FootprintUndefined { corner: NAMES[i] })?;
        }
        let [tl, tr, br, bl] = corners;
        let mid = |a: Point3, b: Point3| Point3::ground((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        let (top_mid, bottom_mid) = (mid(tl, tr), mid(br, bl));
        let lens = self.lens_position();
        let nadir = Point3::ground(lens.x, lens.y);
        let (top_w, bottom_w) = (tl.distance(&tr), bl.distance(&br));
        let (near_width_m, far_width_m) = if top_mid.distance(&nadir) < bottom_mid.distance(&nadir) {
            (top_w, bottom_w)
        } else {
            (bottom_w, top_w)
        };
        Ok(GroundFootprint {
            corners,
            near_width_m,
            far_width_m,
            depth_m: top_mid.distance(&bottom_mid),
            area_m2: crate::marker::signed_area(&corners).abs(),
        })
    }

    pub fn validate_throw(&self) -> ThrowReport {
        let axis = self.lens_to_world.apply_vector(Point3::new(0.0, 0.0, 1.0));
        let distance_m = match self.intersect_ground(axis) {
            Ok(hit) => hit.distance(&self.lens_position()),
            Err(_) => return ThrowReport::Undefined,
        };
        let cfg = self.config;
        if distance_m < cfg.throw_min_m {
            ThrowReport::TooClose { distance_m, min_m: cfg.throw_min_m }
        } else if distance_m > cfg.throw_max_m {
            ThrowReport::TooFar { distance_m, max_m: cfg.throw_max_m }
        } else {
            ThrowReport::Ok { distance_m }
        }
    }
}

pub fn project_point(
    cfg: &ProjectorConfig,
    robot_pose: &RigidTransform,
    p_world: Point3,
) -> Result<(f64, f64)> {
    ProjectorView::new(cfg, robot_pose)?.project(p_world)
}

pub fn unproject_to_ground(
    cfg: &ProjectorConfig,
    robot_pose: &RigidTransform,
    pixel: (f64, f64),
) -> Result<Point3> {
    ProjectorView::new(cfg, robot_pose)?.unproject_to_ground(pixel.0, pixel.1)
}

pub fn ground_footprint(cfg: &ProjectorConfig, robot_pose: &RigidTransform) -> Result<GroundFootprint> {
    ProjectorView::new(cfg, robot_pose)?.ground_footprint()
}

pub fn validate_throw(cfg: &ProjectorConfig, robot_pose: &RigidTransform) -> Result<ThrowReport> {
    Ok(ProjectorView::new(cfg, robot_pose)?.validate_throw())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundFootprint {
    /// TL, TR, BR, BL image corners on the ground.
    pub corners: [Point3; 4],
    pub near_width_m: f64,
    pub far_width_m: f64,
    /// Distance between the midpoints of the near and far edges.
    pub depth_m: f64,
    pub area_m2: f64,
}

impl std::fmt::Display for GroundFootprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [tl, tr, br, bl] = self.corners;
        writeln!(f, "corners (TL TR BR BL): {tl} {tr} {br} {bl}")?;
        writeln!(f, "near width: {:.4} m", self.near_width_m)?;
        writeln!(f, "far width:  {:.4} m", self.far_width_m)?;
        writeln!(f, "depth:      {:.4} m", self.depth_m)?;
        write!(f, "area:       {:.4} m^2", self.area_m2)
    }
}

/// Lens-to-ground distance along the optical axis against the rated throw range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThrowReport {
    Ok {
        distance_m: f64,
    },
    TooClose {
        distance_m: f64,
        min_m: f64,
    },
    TooFar {
        distance_m: f64,
        max_m: f64,
    },
    /// The optical axis never reaches the ground.
    Undefined,
}

impl ThrowReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ThrowReport::Ok { .. })
    }
}

impl std::fmt::Display for ThrowReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ThrowReport::Ok { distance_m } => {
                write!(f, "ok: throw distance {distance_m:.4} m within rated range")
            }
            ThrowReport::TooClose { distance_m, min_m } => write!(
                f,
                "warning: throw distance {distance_m:.4} m is below the minimum {min_m} m; projection will be blurred (too close)"
            ),
            ThrowReport::TooFar { distance_m, max_m } => write!(
                f,
                "warning: throw distance {distance_m:.4} m exceeds the maximum {max_m} m; projection will be blurred (too far)"
            ),
            ThrowReport::Undefined => {
                write!(f, "warning: optical axis does not meet the ground; throw distance undefined")
            }
        }
    }
}

// ---- calibration file ------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProjector {
    image_width: u32,
    image_height: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    camera_matrix: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distortion_model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distortion_coefficients: Option<Vec<f64>>,
    throw_min_m: f64,
    throw_max_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mount: Option<RawMount>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMount {
    #[serde(default = "default_base")]
    parent: String,
    #[serde(default = "default_lens")]
    child: String,
    #[serde(default)]
    x: f64,
    #[serde(default)]
    y: f64,
    #[serde(default)]
    z: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    yaw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pitch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    roll: Option<f64>,
    /// `[qx, qy, qz, qw]`, alternative to yaw/pitch/roll.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
}

fn default_base() -> String {
    DEFAULT_BASE_FRAME.to_owned()
}

fn default_lens() -> String {
    DEFAULT_LENS_FRAME.to_owned()
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(field, format!("non-finite value {v}")))
    }
}

impl RawMount {
    fn into_transform(self) -> Result<RigidTransform> {
        let translation =
            Point3::new(finite("mount.x", self.x)?, finite("mount.y", self.y)?, finite("mount.z", self.z)?);
        let has_ypr = self.yaw.is_some() || self.pitch.is_some() || self.roll.is_some();
        let rotation = match (self.q, has_ypr) {
            (Some(_), true) => {
                return Err(Error::parse("mount.q", "give either q or yaw/pitch/roll, not both"))
            }
            (Some(q), false) => {
                if q.len() != 4 {
                    return Err(Error::parse("mount.q", format!("expected 4 numbers, got {}", q.len())));
                }
                UnitQuaternion::new(q[0], q[1], q[2], q[3])
                    .map_err(|e| Error::parse("mount.q", e.to_string()))?
            }
            (None, _) => UnitQuaternion::from_ypr(
                finite("mount.yaw", self.yaw.unwrap_or(0.0))?,
                finite("mount.pitch", self.pitch.unwrap_or(0.0))?,
                finite("mount.roll", self.roll.unwrap_or(0.0))?,
            ),
        };
        if self.parent == self.child {
            return Err(Error::parse("mount", "parent and child frames must differ"));
        }
        Ok(RigidTransform::new(self.parent, self.child, translation, rotation))
    }
}

/// Parses the projector calibration file.
pub fn load_projector_config(text: &str) -> Result<ProjectorConfig> {
    let raw: RawProjector = toml::from_str(text).map_err(|e| Error::parse("projector", e.message()))?;

    let explicit = [raw.fx, raw.fy, raw.cx, raw.cy];
    let (fx, fy, cx, cy) = match (&raw.camera_matrix, explicit.iter().any(Option::is_some)) {
        (Some(_), true) => {
            return Err(Error::parse("camera_matrix", "give either camera_matrix or fx/fy/cx/cy, not both"))
        }
        (Some(k), false) => {
            if k.len() != 9 {
                return Err(Error::parse("camera_matrix", format!("expected 9 numbers, got {}", k.len())));
            }
            for (i, v) in k.iter().enumerate() {
                finite(&format!("camera_matrix[{i}]"), *v)?;
            }
            if k[1] != 0.0 {
                return Err(Error::parse("camera_matrix", "nonzero skew (K[0][1]) is not supported"));
            }
            if k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0 || k[8] != 1.0 {
                return Err(Error::parse("camera_matrix", "expected [fx 0 cx; 0 fy cy; 0 0 1]"));
            }
            (k[0], k[4], k[2], k[5])
        }
        (None, _) => {
            let get = |name: &str, v: Option<f64>| {
                v.ok_or_else(|| Error::parse(name, "missing field (or give camera_matrix)"))
                    .and_then(|v| finite(name, v))
            };
            (get("fx", raw.fx)?, get("fy", raw.fy)?, get("cx", raw.cx)?, get("cy", raw.cy)?)
        }
    };

    let coeffs = raw.distortion_coefficients.unwrap_or_default();
    for (i, v) in coeffs.iter().enumerate() {
        finite(&format!("distortion_coefficients[{i}]"), *v)?;
    }
    let distortion = match raw.distortion_model.as_deref().unwrap_or("none") {
        "none" => {
            if coeffs.iter().any(|c| *c != 0.0) {
                return Err(Error::parse(
                    "distortion_coefficients",
                    "nonzero coefficients with distortion_model = \"none\"",
                ));
            }
            Distortion::None
        }
        "radtan" => {
            let c: [f64; 5] = coeffs.as_slice().try_into().map_err(|_| {
                Error::parse(
                    "distortion_coefficients",
                    format!("radtan needs 5 numbers (k1 k2 p1 p2 k3), got {}", coeffs.len()),
                )
            })?;
            Distortion::radtan(c)
        }
        other => {
            return Err(Error::parse(
                "distortion_model",
                format!("unknown model '{other}', expected \"none\" or \"radtan\""),
            ))
        }
    };

    let intrinsics = Intrinsics::new(raw.image_width, raw.image_height, fx, fy, cx, cy)
        .and_then(|k| k.with_distortion(distortion))
        .map_err(|e| Error::parse("intrinsics", e.to_string()))?;
    let mount = match raw.mount {
        Some(m) => m.into_transform()?,
        None => RigidTransform::identity(DEFAULT_BASE_FRAME, DEFAULT_LENS_FRAME),
    };
    ProjectorConfig::new(
        intrinsics,
        mount,
        finite("throw_min_m", raw.throw_min_m)?,
        finite("throw_max_m", raw.throw_max_m)?,
    )
    .map_err(|e| Error::parse("throw_min_m/throw_max_m", e.to_string()))
}

/// Writes a calibration file that [`load_projector_config`] reads back to an
/// equal config.
pub fn serialize_projector_config(cfg: &ProjectorConfig) -> String {
    let k = &cfg.intrinsics;
    let (model, coeffs) = match k.distortion {
        Distortion::None => ("none", None),
        d @ Distortion::RadTan { .. } => ("radtan", Some(d.coefficients().to_vec())),
    };
    let t = cfg.mount.translation;
    let raw = RawProjector {
        image_width: k.width_px,
        image_height: k.height_px,
        camera_matrix: Some(k.camera_matrix().to_vec()),
        fx: None,
        fy: None,
        cx: None,
        cy: None,
        distortion_model: Some(model.to_owned()),
        distortion_coefficients: coeffs,
        throw_min_m: cfg.throw_min_m,
        throw_max_m: cfg.throw_max_m,
        mount: Some(RawMount {
            parent: cfg.mount.parent_frame.clone(),
            child: cfg.mount.child_frame.clone(),
            x: t.x,
            y: t.y,
            z: t.z,
            yaw: None,
            pitch: None,
            roll: None,
            q: Some(cfg.mount.rotation.components().to_vec()),
        }),
    };
    toml::to_string(&raw).expect("projector config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn intr(fx: f64, cx: f64, cy: f64) -> Intrinsics {
        Intrinsics::new(640, 480, fx, fx, cx, cy).unwrap()
    }

    fn world_pose() -> RigidTransform {
        RigidTransform::identity("map", DEFAULT_BASE_FRAME)
    }

    /// Lens `h` meters above the base origin, looking straight down.
    pub(crate) fn nadir(k: Intrinsics, h: f64) -> ProjectorConfig {
        let mount = RigidTransform::from_xyz_ypr(
            DEFAULT_BASE_FRAME,
            DEFAULT_LENS_FRAME,
            [0.0, 0.0, h],
            [0.0, 0.0, PI],
        )
        .unwrap();
        ProjectorConfig::new(k, mount, 0.99, 10.98).unwrap()
    }

    /// Lens facing +X, pitched `tilt` below horizontal, via an optical frame.
    fn pitched(k: Intrinsics, h: f64, tilt: f64) -> ProjectorConfig {
        let body = RigidTransform::from_xyz_ypr(DEFAULT_BASE_FRAME, "mount", [0.0, 0.0, h], [0.0, tilt, 0.0])
            .unwrap();
        let optical = RigidTransform::from_xyz_ypr(
            "mount",
            DEFAULT_LENS_FRAME,
            [0.0; 3],
            [-FRAC_PI_2, 0.0, -FRAC_PI_2],
        )
        .unwrap();
        ProjectorConfig::new(k, body.compose(&optical).unwrap(), 0.99, 10.98).unwrap()
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let k = intr(500.0, 320.0, 240.0);
        let mount = RigidTransform::identity(DEFAULT_BASE_FRAME, DEFAULT_LENS_FRAME);
        let cfg = ProjectorConfig::new(k, mount, 0.99, 10.98).unwrap();
        assert_eq!(project_point(&cfg, &world_pose(), Point3::new(0.0, 0.0, 1.0)).unwrap(), (320.0, 240.0));
        assert_eq!(project_point(&cfg, &world_pose(), Point3::new(0.5, 0.0, 1.0)).unwrap(), (570.0, 240.0));
        assert!(matches!(
            project_point(&cfg, &world_pose(), Point3::new(0.0, 0.0, -1.0)),
            Err(Error::BehindLens { .. })
        ));
        assert!(project_point(&cfg, &world_pose(), Point3::new(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn nadir_principal_point_unprojects_below_lens() {
        let cfg = nadir(intr(500.0, 320.0, 240.0), 1.0);
        let p = unproject_to_ground(&cfg, &world_pose(), (320.0, 240.0)).unwrap();
        assert!(p.distance(&Point3::ORIGIN) < 1e-15);
    }

    #[test]
    fn level_axis_has_no_ground_intersection() {
        let cfg = pitched(intr(500.0, 320.0, 240.0), 1.0, 0.0);
        assert_eq!(
            unproject_to_ground(&cfg, &world_pose(), (320.0, 240.0)),
            Err(Error::NoGroundIntersection)
        );
        // upper half of the image looks up
        assert!(unproject_to_ground(&cfg, &world_pose(), (320.0, 10.0)).is_err());
        assert!(unproject_to_ground(&cfg, &world_pose(), (320.0, 400.0)).is_ok());
        assert_eq!(validate_throw(&cfg, &world_pose()).unwrap(), ThrowReport::Undefined);
        assert_eq!(
            ground_footprint(&cfg, &world_pose()),
            Err(Error::FootprintUndefined { corner: "top-left" })
        );
    }

    #[test]
    fn frame_mismatch_is_reported() {
        let cfg = nadir(intr(500.0, 320.0, 240.0), 1.0);
        let pose = RigidTransform::identity("map", "other_base");
        assert!(matches!(project_point(&cfg, &pose, Point3::ORIGIN), Err(Error::FrameChain { .. })));
    }

    #[test]
    fn project_unproject_grid_round_trip() {
        let cfg = pitched(intr(600.0, 319.5, 239.5), 1.2, 0.7);
        let view = ProjectorView::new(&cfg, &world_pose()).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let px = (i as f64 * 639.0 / 8.0, j as f64 * 479.0 / 8.0);
                let g = view.unproject_to_ground(px.0, px.1).unwrap();
                let back = view.project(g).unwrap();
                assert!((back.0 - px.0).abs() < 1e-6 && (back.1 - px.1).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_coefficients_are_bit_identical() {
        let plain = pitched(intr(600.0, 319.5, 239.5), 1.2, 0.7);
        let mut zeroed = plain.clone();
        zeroed.intrinsics.distortion = Distortion::radtan([0.0; 5]);
        let (a, b) = (
            ProjectorView::new(&plain, &world_pose()).unwrap(),
            ProjectorView::new(&zeroed, &world_pose()).unwrap(),
        );
        for k in 0..50 {
            let p = Point3::ground(1.0 + 0.013 * k as f64, -0.3 + 0.011 * k as f64);
            let (pa, pb) = (a.project(p).unwrap(), b.project(p).unwrap());
            assert_eq!(pa.0.to_bits(), pb.0.to_bits());
            assert_eq!(pa.1.to_bits(), pb.1.to_bits());
        }
    }

    #[test]
    fn undistort_inverts_distort() {
        let d = Distortion::radtan([-0.08, 0.02, 0.001, -0.0007, 0.003]);
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.2), (-0.5, 0.4), (0.61, 0.33)] {
            let (xd, yd) = d.distort(x, y);
            let (ux, uy) = d.undistort(xd, yd).unwrap();
            assert!((ux - x).abs() < 1e-12 && (uy - y).abs() < 1e-12);
        }
    }

    #[test]
    fn nadir_footprint_closed_form() {
        let (h, f) = (1.3, 800.0);
        let cfg = nadir(Intrinsics::new(1280, 720, f, f, 639.5, 359.5).unwrap(), h);
        let fp = ground_footprint(&cfg, &world_pose()).unwrap();
        let (w, d) = (h * 1280.0 / f, h * 720.0 / f);
        assert!((fp.near_width_m - w).abs() < 1e-9);
        assert!((fp.far_width_m - w).abs() < 1e-9);
        assert!((fp.depth_m - d).abs() < 1e-9);
        assert!((fp.area_m2 - w * d).abs() < 1e-9);
        let cx: f64 = fp.corners.iter().map(|c| c.x).sum::<f64>() / 4.0;
        let cy: f64 = fp.corners.iter().map(|c| c.y).sum::<f64>() / 4.0;
        assert!(cx.abs() < 1e-12 && cy.abs() < 1e-12);
        // footprint corners reproject onto the image corners
        let view = ProjectorView::new(&cfg, &world_pose()).unwrap();
        for (c, px) in fp.corners.iter().zip(cfg.intrinsics.corners()) {
            let back = view.project(*c).unwrap();
            assert!((back.0 - px.0).abs() < 1e-6 && (back.1 - px.1).abs() < 1e-6);
        }
    }

    #[test]
    fn throw_validation_bounds() {
        let k = intr(500.0, 320.0, 240.0);
        for (h, ok) in
            [(1.096, true), (1.491, true), (0.99, true), (10.98, true), (0.5, false), (11.0, false)]
        {
            let r = validate_throw(&nadir(k, h), &world_pose()).unwrap();
            assert_eq!(r.is_ok(), ok, "{h}: {r}");
        }
        let r = validate_throw(&nadir(k, 0.5), &world_pose()).unwrap();
        assert!(matches!(r, ThrowReport::TooClose { min_m, .. } if min_m == 0.99));
        assert!(r.to_string().contains("too close"));
        let r = validate_throw(&nadir(k, 12.0), &world_pose()).unwrap();
        assert!(matches!(r, ThrowReport::TooFar { .. }));
        // throw is measured along the axis, not vertically
        let r = validate_throw(&pitched(k, 0.8, PI / 6.0), &world_pose()).unwrap();
        assert!(matches!(r, ThrowReport::Ok { distance_m } if (distance_m - 1.6).abs() < 1e-12));
    }

    #[test]
    fn config_from_camera_matrix() {
        let cfg = load_projector_config(
            "image_width = 640\nimage_height = 480\ncamera_matrix = [500, 0, 320, 0, 500, 240, 0, 0, 1]\n\
             throw_min_m = 0.99\nthrow_max_m = 10.98\n",
        )
        .unwrap();
        let k = cfg.intrinsics;
        assert_eq!((k.fx, k.fy, k.cx, k.cy), (500.0, 500.0, 320.0, 240.0));
        assert_eq!(k.distortion, Distortion::None);
        assert_eq!(cfg.base_frame(), DEFAULT_BASE_FRAME);
        assert_eq!(cfg.lens_frame(), DEFAULT_LENS_FRAME);
    }

    #[test]
    fn config_errors_name_the_field() {
        let base = "image_width = 640\nimage_height = 480\nthrow_min_m = 0.99\nthrow_max_m = 10.98\n";
        let err = |extra: &str| load_projector_config(&format!("{base}{extra}")).unwrap_err().to_string();
        assert!(err("camera_matrix = [500, 1, 320, 0, 500, 240, 0, 0, 1]\n").contains("skew"));
        assert!(err("camera_matrix = [500, 0, 320, 0, 500, 240, 0, 0, 2]\n").contains("camera_matrix"));
        assert!(err("camera_matrix = [500, 0, 320]\n").contains("camera_matrix"));
        assert!(err("fx = 500.0\nfy = 500.0\ncx = 320.0\n").contains("cy"));
        assert!(err("fx = nan\nfy = 500.0\ncx = 320.0\ncy = 240.0\n").contains("fx"));
        assert!(err("fx = 500.0\nfy = 500.0\ncx = 320.0\ncy = 240.0\ndistortion_model = \"radtan\"\ndistortion_coefficients = [0.1]\n")
            .contains("distortion_coefficients"));
        assert!(err("fx = 500.0\nfy = 500.0\ncx = 320.0\ncy = 240.0\ndistortion_model = \"fisheye\"\n")
            .contains("distortion_model"));
        assert!(err("fx = 500.0\nfy = 500.0\ncx = 700.0\ncy = 240.0\n").contains("principal point"));
        let missing = load_projector_config("image_width = 640\nimage_height = 480\nfx = 1.0\nfy = 1.0\ncx = 1.0\ncy = 1.0\nthrow_max_m = 2.0\n")
            .unwrap_err()
            .to_string();
        assert!(missing.contains("throw_min_m"), "{missing}");
    }

    #[test]
    fn config_round_trip() {
        let text = "image_width = 1280\nimage_height = 720\nfx = 1400.0\nfy = 1395.5\ncx = 639.5\ncy = 359.5\n\
                    distortion_model = \"radtan\"\ndistortion_coefficients = [-0.05, 0.01, 0.0005, -0.0002, 0.0]\n\
                    throw_min_m = 0.99\nthrow_max_m = 10.98\n\
                    [mount]\nparent = \"base_link\"\nchild = \"projector_lens\"\nx = 0.15\nz = 1.2\nyaw = -1.2\npitch = 0.3\nroll = -2.0\n";
        let a = load_projector_config(text).unwrap();
        let b = load_projector_config(&serialize_projector_config(&a)).unwrap();
        assert_eq!(a, b);
        assert_eq!(serialize_projector_config(&a), serialize_projector_config(&b));
    }
}
