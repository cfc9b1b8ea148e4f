//! Rigid-body math and the static transform hierarchy.
//!
//! Rotations follow the static-transform-publisher convention: a pose is given
//! as `x y z yaw pitch roll` (meters, radians) and the rotation is
//! `Rz(yaw) * Ry(pitch) * Rx(roll)`.
//!
//! A [`RigidTransform`] with `parent_frame = A` and `child_frame = B` maps
//! points expressed in `B` into `A`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted deviation of a quaternion norm from 1 before normalizing.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn ground(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: &Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, o: &Point3) -> f64 {
        (*self - *o).norm()
    }

    /// Distance in the x/y plane, ignoring z.
    pub fn planar_distance(&self, o: &Point3) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitQuaternion {
    qx: f64,
    qy: f64,
    qz: f64,
    qw: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion { qx: 0.0, qy: 0.0, qz: 0.0, qw: 1.0 };

    /// Normalizes `(qx, qy, qz, qw)`. Inputs whose norm is off by more than
    /// [`QUATERNION_NORM_TOLERANCE`] are rejected.
    pub fn new(qx: f64, qy: f64, qz: f64, qw: f64) -> Result<Self> {
        if !(qx.is_finite() && qy.is_finite() && qz.is_finite() && qw.is_finite()) {
            return Err(Error::param("quaternion has non-finite components"));
        }
        let n = (qx * qx + qy * qy + qz * qz + qw * qw).sqrt();
        if (n - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
            return Err(Error::param(format!(
                "quaternion norm {n} is not within {QUATERNION_NORM_TOLERANCE} of 1"
            )));
        }
        Ok(Self::raw(qx, qy, qz, qw).normalized())
    }

    const fn raw(qx: f64, qy: f64, qz: f64, qw: f64) -> Self {
        Self { qx, qy, qz, qw }
    }

    pub fn from_axis_angle(axis: Point3, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if !(n > 0.0) || !n.is_finite() || !angle.is_finite() {
            return Err(Error::param("axis-angle needs a finite non-zero axis"));
        }
        let (s, c) = (angle * 0.5).sin_cos();
        let a = axis * (s / n);
        Ok(Self::raw(a.x, a.y, a.z, c).normalized())
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn from_ypr(yaw: f64, pitch: f64, roll: f64) -> Self {
        let (sy, cy) = (yaw * 0.5).sin_cos();
        let (sp, cp) = (pitch * 0.5).sin_cos();
        let (sr, cr) = (roll * 0.5).sin_cos();
        Self::raw(
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
            cy * cp * cr + sy * sp * sr,
        )
        .normalized()
    }

    pub fn components(&self) -> [f64; 4] {
        [self.qx, self.qy, self.qz, self.qw]
    }

    pub fn norm(&self) -> f64 {
        (self.qx * self.qx + self.qy * self.qy + self.qz * self.qz + self.qw * self.qw).sqrt()
    }

    // Idempotent: an already unit quaternion is returned bit-for-bit.
    fn normalized(self) -> Self {
        let n = self.norm();
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return self;
        }
        Self::raw(self.qx / n, self.qy / n, self.qz / n, self.qw / n)
    }

    pub fn conjugate(&self) -> Self {
        Self::raw(-self.qx, -self.qy, -self.qz, self.qw)
    }

    /// Hamilton product `self * o`, renormalized.
    pub fn mul(&self, o: &UnitQuaternion) -> Self {
        let (a, b) = (self, o);
        Self::raw(
            a.qw * b.qx + a.qx * b.qw + a.qy * b.qz - a.qz * b.qy,
            a.qw * b.qy - a.qx * b.qz + a.qy * b.qw + a.qz * b.qx,
            a.qw * b.qz + a.qx * b.qy - a.qy * b.qx + a.qz * b.qw,
            a.qw * b.qw - a.qx * b.qx - a.qy * b.qy - a.qz * b.qz,
        )
        .normalized()
    }

    pub fn rotate(&self, v: Point3) -> Point3 {
        let u = Point3::new(self.qx, self.qy, self.qz);
        let t = u.cross(&v) * 2.0;
        v + t * self.qw + u.cross(&t)
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let v = (self.qx * self.qx + self.qy * self.qy + self.qz * self.qz).sqrt();
        2.0 * v.atan2(self.qw.abs())
    }

    /// Row-major 3x3 rotation matrix.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let (x, y, z, w) = (self.qx, self.qy, self.qz, self.qw);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
            [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
            [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    pub translation: Point3,
    pub rotation: UnitQuaternion,
    pub parent_frame: String,
    pub child_frame: String,
}

impl RigidTransform {
    pub fn new(
        parent_frame: impl Into<String>,
        child_frame: impl Into<String>,
        translation: Point3,
        rotation: UnitQuaternion,
    ) -> Self {
        Self { translation, rotation, parent_frame: parent_frame.into(), child_frame: child_frame.into() }
    }

    pub fn identity(parent_frame: impl Into<String>, child_frame: impl Into<String>) -> Self {
        Self::new(parent_frame, child_frame, Point3::ORIGIN, UnitQuaternion::IDENTITY)
    }

    /// Static-transform-publisher style construction.
    pub fn from_xyz_ypr(
        parent_frame: impl Into<String>,
        child_frame: impl Into<String>,
        xyz: [f64; 3],
        ypr: [f64; 3],
    ) -> Result<Self> {
        if xyz.iter().chain(ypr.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("transform has non-finite x/y/z/yaw/pitch/roll"));
        }
        Ok(Self::new(
            parent_frame,
            child_frame,
            Point3::new(xyz[0], xyz[1], xyz[2]),
            UnitQuaternion::from_ypr(ypr[0], ypr[1], ypr[2]),
        ))
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        self.rotation.rotate(p) + self.translation
    }

    /// Rotates a direction without translating it.
    pub fn apply_vector(&self, v: Point3) -> Point3 {
        self.rotation.rotate(v)
    }

    /// `self * other`: maps `other.child_frame` into `self.parent_frame`.
    pub fn compose(&self, other: &RigidTransform) -> Result<RigidTransform> {
        if self.child_frame != other.parent_frame {
            return Err(Error::FrameChain {
                expected: self.child_frame.clone(),
                found: other.parent_frame.clone(),
            });
        }
        Ok(RigidTransform {
            translation: self.apply(other.translation),
            rotation: self.rotation.mul(&other.rotation),
            parent_frame: self.parent_frame.clone(),
            child_frame: other.child_frame.clone(),
        })
    }

    pub fn invert(&self) -> RigidTransform {
        let r = self.rotation.conjugate();
        RigidTransform {
            translation: -r.rotate(self.translation),
            rotation: r,
            parent_frame: self.child_frame.clone(),
            child_frame: self.parent_frame.clone(),
        }
    }

    /// Translation distance and rotation angle of this transform away from identity.
    pub fn deviation_from_identity(&self) -> (f64, f64) {
        (self.translation.norm(), self.rotation.angle())
    }
}

/// Static forest of named frames. Each child frame has at most one parent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransformTree {
    // keyed by child frame
    edges: BTreeMap<String, RigidTransform>,
}

impl TransformTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = RigidTransform>) -> Result<Self> {
        let mut tree = Self::new();
        for e in edges {
            tree.insert(e)?;
        }
        Ok(tree)
    }

    pub fn insert(&mut self, edge: RigidTransform) -> Result<()> {
        if edge.parent_frame == edge.child_frame {
            return Err(Error::Tree(format!(
                "edge '{}' -> '{}' links a frame to itself",
                edge.parent_frame, edge.child_frame
            )));
        }
        if let Some(existing) = self.edges.get(&edge.child_frame) {
            return Err(Error::Tree(format!(
                "frame '{}' already has parent '{}'",
                edge.child_frame, existing.parent_frame
            )));
        }
        let mut cur = edge.parent_frame.as_str();
        while let Some(up) = self.edges.get(cur) {
            if up.parent_frame == edge.child_frame {
                return Err(Error::Tree(format!(
                    "edge '{}' -> '{}' would create a cycle",
                    edge.parent_frame, edge.child_frame
                )));
            }
            cur = up.parent_frame.as_str();
        }
        self.edges.insert(edge.child_frame.clone(), edge);
        Ok(())
    }

    pub fn contains_frame(&self, frame: &str) -> bool {
        self.edges.contains_key(frame) || self.edges.values().any(|e| e.parent_frame == frame)
    }

    pub fn edges(&self) -> impl Iterator<Item = &RigidTransform> {
        self.edges.values()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    // (root, root <- frame)
    fn chain_to_root(&self, frame: &str) -> Result<(String, RigidTransform)> {
        let mut acc = RigidTransform::identity(frame, frame);
        let mut cur = frame.to_owned();
        while let Some(edge) = self.edges.get(&cur) {
            acc = edge.compose(&acc)?;
            cur = edge.parent_frame.clone();
        }
        Ok((cur, acc))
    }

    /// Transform with `parent_frame = from_frame`, `child_frame = to_frame`,
    /// i.e. the pose of `to_frame` expressed in `from_frame`.
    pub fn lookup(&self, from_frame: &str, to_frame: &str) -> Result<RigidTransform> {
        if from_frame == to_frame {
            return Ok(RigidTransform::identity(from_frame, to_frame));
        }
        let unreachable = || Error::Lookup { from: from_frame.to_owned(), to: to_frame.to_owned() };
        if !self.contains_frame(from_frame) || !self.contains_frame(to_frame) {
            return Err(unreachable());
        }
        let (root_from, root_t_from) = self.chain_to_root(from_frame)?;
        let (root_to, root_t_to) = self.chain_to_root(to_frame)?;
        if root_from != root_to {
            return Err(unreachable());
        }
        root_t_from.invert().compose(&root_t_to)
    }

    /// Parses the transform config file: a list of `[[transform]]` records
    /// with `parent`, `child` and optional `x y z yaw pitch roll` (default 0).
    pub fn from_config_str(text: &str) -> Result<Self> {
        let file: TransformFile =
            toml::from_str(text).map_err(|e| Error::parse("transforms", e.message()))?;
        let mut tree = Self::new();
        for (i, rec) in file.transform.into_iter().enumerate() {
            let edge = RigidTransform::from_xyz_ypr(
                rec.parent,
                rec.child,
                [rec.x, rec.y, rec.z],
                [rec.yaw, rec.pitch, rec.roll],
            )
            .map_err(|e| Error::parse(format!("transform[{i}]"), e.to_string()))?;
            tree.insert(edge)?;
        }
        Ok(tree)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformFile {
    #[serde(default)]
    transform: Vec<TransformRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TransformRecord {
    pub parent: String,
    pub child: String,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub z: f64,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub pitch: f64,
    #[serde(default)]
    pub roll: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    type Mat4 = [[f64; 4]; 4];

    // Homogeneous-matrix oracle, built from explicit elementary rotations.
    fn rx(a: f64) -> [[f64; 3]; 3] {
        let (s, c) = a.sin_cos();
        [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    }
    fn ry(a: f64) -> [[f64; 3]; 3] {
        let (s, c) = a.sin_cos();
        [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    }
    fn rz(a: f64) -> [[f64; 3]; 3] {
        let (s, c) = a.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    }
    fn m3mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        r
    }
    fn homog(r: [[f64; 3]; 3], t: [f64; 3]) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..3 {
            m[i][..3].copy_from_slice(&r[i]);
            m[i][3] = t[i];
        }
        m[3][3] = 1.0;
        m
    }
    fn m4mul(a: Mat4, b: Mat4) -> Mat4 {
        let mut r = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                r[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        r
    }
    fn m4apply(m: Mat4, p: Point3) -> Point3 {
        let v = [p.x, p.y, p.z, 1.0];
        let r: Vec<f64> = (0..3).map(|i| (0..4).map(|k| m[i][k] * v[k]).sum()).collect();
        Point3::new(r[0], r[1], r[2])
    }
    fn ypr_oracle(xyz: [f64; 3], ypr: [f64; 3]) -> Mat4 {
        homog(m3mul(m3mul(rz(ypr[0]), ry(ypr[1])), rx(ypr[2])), xyz)
    }

    fn close(a: Point3, b: Point3, tol: f64) -> bool {
        a.distance(&b) < tol
    }

    fn tf(xyz: [f64; 3], ypr: [f64; 3]) -> RigidTransform {
        RigidTransform::from_xyz_ypr("a", "b", xyz, ypr).unwrap()
    }

    #[test]
    fn all_zero_ypr_is_identity() {
        let t = tf([0.0; 3], [0.0; 3]);
        assert_eq!(t.rotation, UnitQuaternion::IDENTITY);
        assert_eq!(t.translation, Point3::ORIGIN);
    }

    #[test]
    fn yaw_quarter_turn_maps_x_to_y() {
        let t = tf([0.0; 3], [FRAC_PI_2, 0.0, 0.0]);
        assert!(close(t.apply(Point3::new(1.0, 0.0, 0.0)), Point3::new(0.0, 1.0, 0.0), 1e-12));
    }

    #[test]
    fn ypr_matches_matrix_oracle() {
        let xyz = [0.4, -1.2, 2.5];
        let ypr = [0.3, -0.7, 0.1];
        let t = tf(xyz, ypr);
        let m = ypr_oracle(xyz, ypr);
        let pts = [
            [0.1, 0.2, 0.3],
            [-1.0, 4.0, 2.0],
            [3.3, -0.2, 0.0],
            [0.0, 0.0, 0.0],
            [10.0, 10.0, -5.0],
            [-0.7, -0.7, 0.7],
            [2.0, 0.5, -3.0],
            [1e-3, 5.0, 1.0],
            [-8.0, 0.25, 0.5],
            [0.9, -6.0, 4.4],
        ];
        for p in pts {
            let p = Point3::new(p[0], p[1], p[2]);
            assert!(close(t.apply(p), m4apply(m, p), 1e-12), "{p}");
        }
    }

    #[test]
    fn to_matrix_matches_oracle() {
        let q = UnitQuaternion::from_ypr(1.1, 0.4, -2.0);
        let r = m3mul(m3mul(rz(1.1), ry(0.4)), rx(-2.0));
        let m = q.to_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - r[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(matches!(
            RigidTransform::from_xyz_ypr("a", "b", [f64::NAN, 0.0, 0.0], [0.0; 3]),
            Err(Error::Param(_))
        ));
        assert!(RigidTransform::from_xyz_ypr("a", "b", [0.0; 3], [0.0, f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn quaternion_norm_check() {
        assert!(UnitQuaternion::new(0.0, 0.0, 0.0, 1.0 + 1e-7).is_ok());
        assert!(UnitQuaternion::new(0.0, 0.0, 0.0, 1.0 + 1e-5).is_err());
        assert!(UnitQuaternion::new(0.0, 0.0, 0.0, 0.0).is_err());
        let q = UnitQuaternion::new(0.5, 0.5, 0.5, 0.5 + 5e-7).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-12);
        // normalization is idempotent
        let c = q.components();
        assert_eq!(UnitQuaternion::new(c[0], c[1], c[2], c[3]).unwrap(), q);
    }

    #[test]
    fn compose_with_identity() {
        let t = tf([1.0, 2.0, 3.0], [0.2, 0.3, 0.4]);
        let id = RigidTransform::identity("b", "b");
        let c = t.compose(&id).unwrap();
        assert!(close(c.translation, t.translation, 1e-15));
        assert!(c.rotation.mul(&t.rotation.conjugate()).angle() < 1e-12);
        assert_eq!((c.parent_frame.as_str(), c.child_frame.as_str()), ("a", "b"));
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = tf([1.0, -2.0, 0.5], [2.0, -0.4, 1.3]);
        let (dt, da) = t.compose(&t.invert()).unwrap().deviation_from_identity();
        assert!(dt < 1e-12 && da < 1e-12, "{dt} {da}");
    }

    #[test]
    fn compose_two_quarter_turns() {
        let a = RigidTransform::from_xyz_ypr("w", "m", [1.0, 0.0, 0.0], [FRAC_PI_2, 0.0, 0.0]).unwrap();
        let b = RigidTransform::from_xyz_ypr("m", "c", [1.0, 0.0, 0.0], [FRAC_PI_2, 0.0, 0.0]).unwrap();
        let c = a.compose(&b).unwrap();
        let oracle = m4mul(
            ypr_oracle([1.0, 0.0, 0.0], [FRAC_PI_2, 0.0, 0.0]),
            ypr_oracle([1.0, 0.0, 0.0], [FRAC_PI_2, 0.0, 0.0]),
        );
        let origin = c.apply(Point3::ORIGIN);
        assert!(close(origin, Point3::new(1.0, 1.0, 0.0), 1e-12));
        assert!(close(origin, m4apply(oracle, Point3::ORIGIN), 1e-12));
        assert!((c.rotation.angle() - PI).abs() < 1e-12);
        // net 180 degrees about +Z
        assert!(close(c.apply_vector(Point3::new(1.0, 0.0, 0.0)), Point3::new(-1.0, 0.0, 0.0), 1e-12));
        assert!(close(c.apply_vector(Point3::new(0.0, 0.0, 1.0)), Point3::new(0.0, 0.0, 1.0), 1e-12));
    }

    #[test]
    fn compose_frame_mismatch() {
        let a = tf([0.0; 3], [0.0; 3]);
        let err = a.compose(&a).unwrap_err();
        assert_eq!(err, Error::FrameChain { expected: "b".into(), found: "a".into() });
    }

    #[test]
    fn invert_identity_and_translation() {
        let id = RigidTransform::identity("a", "b").invert();
        assert_eq!(id.translation, Point3::ORIGIN);
        assert_eq!(id.rotation, UnitQuaternion::IDENTITY);
        assert_eq!((id.parent_frame.as_str(), id.child_frame.as_str()), ("b", "a"));

        let t = tf([1.0, 2.0, 3.0], [0.0; 3]).invert();
        assert_eq!(t.translation, Point3::new(-1.0, -2.0, -3.0));
    }

    #[test]
    fn invert_round_trip_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let xyz = [0.7, -3.1, 1.9];
        let ypr = [2.4, 0.9, -1.7];
        let t = tf(xyz, ypr);
        let inv = t.invert();
        // matrix-inverse oracle: R^T, -R^T t
        let r = m3mul(m3mul(rz(ypr[0]), ry(ypr[1])), rx(ypr[2]));
        let mut rt = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rt[i][j] = r[j][i];
            }
        }
        let tinv: Vec<f64> = (0..3).map(|i| -(0..3).map(|k| rt[i][k] * xyz[k]).sum::<f64>()).collect();
        let oracle = homog(rt, [tinv[0], tinv[1], tinv[2]]);
        for _ in 0..100 {
            let p = Point3::new(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
            );
            assert!(close(inv.apply(t.apply(p)), p, 1e-12));
            assert!(close(inv.apply(p), m4apply(oracle, p), 1e-12));
        }
    }

    fn mast_tree() -> (TransformTree, RigidTransform, RigidTransform) {
        let e1 = RigidTransform::from_xyz_ypr("base", "mast", [0.1, 0.0, 1.0], [0.2, 0.0, 0.0]).unwrap();
        let e2 =
            RigidTransform::from_xyz_ypr("mast", "projector", [0.05, 0.0, 0.2], [0.0, 0.8, 0.1]).unwrap();
        (TransformTree::from_edges([e1.clone(), e2.clone()]).unwrap(), e1, e2)
    }

    #[test]
    fn lookup_same_frame_is_identity() {
        let (tree, _, _) = mast_tree();
        let t = tree.lookup("mast", "mast").unwrap();
        assert_eq!(t.deviation_from_identity(), (0.0, 0.0));
    }

    #[test]
    fn lookup_two_edge_chain() {
        let (tree, _, _) = mast_tree();
        let t = tree.lookup("base", "projector").unwrap();
        let oracle = m4mul(
            ypr_oracle([0.1, 0.0, 1.0], [0.2, 0.0, 0.0]),
            ypr_oracle([0.05, 0.0, 0.2], [0.0, 0.8, 0.1]),
        );
        for p in [Point3::ORIGIN, Point3::new(1.0, 2.0, 3.0), Point3::new(-0.5, 0.3, 0.0)] {
            assert!(close(t.apply(p), m4apply(oracle, p), 1e-12));
        }
        let back = tree.lookup("projector", "base").unwrap();
        let (dt, da) = t.compose(&back).unwrap().deviation_from_identity();
        assert!(dt < 1e-12 && da < 1e-12);
    }

    #[test]
    fn lookup_disconnected_is_error() {
        let (mut tree, _, _) = mast_tree();
        tree.insert(RigidTransform::identity("map", "odom")).unwrap();
        let err = tree.lookup("projector", "odom").unwrap_err();
        assert_eq!(err, Error::Lookup { from: "projector".into(), to: "odom".into() });
        assert!(tree.lookup("base", "nowhere").is_err());
    }

    #[test]
    fn lookup_independent_of_insertion_order() {
        let (a, e1, e2) = mast_tree();
        let e3 = RigidTransform::from_xyz_ypr("base", "laser", [0.3, 0.0, 0.2], [0.0, 0.0, 0.0]).unwrap();
        let mut a = a;
        a.insert(e3.clone()).unwrap();
        let b = TransformTree::from_edges([e3, e2, e1]).unwrap();
        assert_eq!(a.lookup("laser", "projector").unwrap(), b.lookup("laser", "projector").unwrap());
    }

    #[test]
    fn tree_rejects_cycles_and_second_parent() {
        let (mut tree, _, _) = mast_tree();
        assert!(matches!(tree.insert(RigidTransform::identity("projector", "base")), Err(Error::Tree(_))));
        assert!(matches!(tree.insert(RigidTransform::identity("other", "mast")), Err(Error::Tree(_))));
        assert!(matches!(tree.insert(RigidTransform::identity("x", "x")), Err(Error::Tree(_))));
    }

    #[test]
    fn config_file_parses() {
        let text = r#"
            [[transform]]
            parent = "base_link"
            child = "projector_mount"
            x = 0.15
            z = 1.2
            pitch = 0.9

            [[transform]]
            parent = "projector_mount"
            child = "projector_lens"
            yaw = -1.5707963267948966
            roll = -1.5707963267948966
        "#;
        let tree = TransformTree::from_config_str(text).unwrap();
        assert_eq!(tree.len(), 2);
        let t = tree.lookup("base_link", "projector_lens").unwrap();
        assert!(close(t.translation, Point3::new(0.15, 0.0, 1.2), 1e-15));
        assert!(TransformTree::from_config_str("[[transform]]\nparent = \"a\"\n").is_err());
        assert!(TransformTree::from_config_str("[[transform]]\nparent = \"a\"\nchild = \"b\"\nx = nan\n")
            .is_err());
    }

    fn arb_transform() -> impl Strategy<Value = RigidTransform> {
        (prop::array::uniform3(-20.0f64..20.0), prop::array::uniform3(-PI..PI))
            .prop_map(|(xyz, ypr)| tf(xyz, ypr))
    }

    proptest! {
        #[test]
        fn prop_compose_inverse_identity(t in arb_transform()) {
            let (dt, da) = t.compose(&t.invert()).unwrap().deviation_from_identity();
            prop_assert!(dt < 1e-12 && da < 1e-12);
            let (dt, da) = t.invert().compose(&t).unwrap().deviation_from_identity();
            prop_assert!(dt < 1e-12 && da < 1e-12);
        }

        #[test]
        fn prop_preserves_distances(
            t in arb_transform(),
            a in prop::array::uniform3(-10.0f64..10.0),
            b in prop::array::uniform3(-10.0f64..10.0),
        ) {
            let a = Point3::new(a[0], a[1], a[2]);
            let b = Point3::new(b[0], b[1], b[2]);
            prop_assert!((t.apply(a).distance(&t.apply(b)) - a.distance(&b)).abs() < 1e-12);
        }
    }
}
