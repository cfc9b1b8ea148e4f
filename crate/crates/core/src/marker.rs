//! Flat ground-plane markers: arrows, destination disks, free polygons and
//! polylines, and the style config that controls them.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::resample::{AnchorKind, AnchorList};

pub const DEFAULT_DISK_SEGMENTS: u32 = 64;
pub const MIN_DISK_SEGMENTS: u32 = 8;
/// Bounds on the distance-compensation factor, relative to the base size.
pub const SCALE_CLAMP: (f64, f64) = (0.25, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0, 0, 0]);
    pub const PURPLE: Rgb = Rgb([128, 0, 128]);
    pub const GREEN: Rgb = Rgb([0, 160, 0]);
}

/// The four arrow parameters: shaft length and diameter, head length and diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrowDimensions {
    pub shaft_length_m: f64,
    pub shaft_diameter_m: f64,
    pub head_length_m: f64,
    pub head_diameter_m: f64,
}

impl Default for ArrowDimensions {
    /// Shaft as long as the head.
    fn default() -> Self {
        Self { shaft_length_m: 0.2, shaft_diameter_m: 0.1, head_length_m: 0.2, head_diameter_m: 0.2 }
    }
}

impl ArrowDimensions {
    pub fn validate(&self) -> Result<()> {
        let all = [self.shaft_length_m, self.shaft_diameter_m, self.head_length_m, self.head_diameter_m];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param(format!("arrow dimensions must all be > 0: {self:?}")));
        }
        if self.head_diameter_m < self.shaft_diameter_m {
            return Err(Error::param("arrow head diameter is narrower than the shaft"));
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.shaft_length_m + self.head_length_m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shaft_length_m: self.shaft_length_m * factor,
            shaft_diameter_m: self.shaft_diameter_m * factor,
            head_length_m: self.head_length_m * factor,
            head_diameter_m: self.head_diameter_m * factor,
        }
    }
}

/// Polygon on the ground plane, counterclockwise, all vertices at z = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundPolygon {
    pub vertices: Vec<Point3>,
    pub color: Rgb,
}

impl GroundPolygon {
    /// Shoelace area; positive for counterclockwise vertex order.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn is_simple(&self) -> bool {
        is_simple(&self.vertices)
    }

    pub fn is_valid(&self) -> bool {
        self.vertices.len() >= 3
            && self.vertices.iter().all(|v| v.z == 0.0 && v.is_finite())
            && self.signed_area() > 0.0
            && self.is_simple()
    }
}

pub(crate) fn signed_area(v: &[Point3]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

fn orient(a: Point3, b: Point3, c: Point3) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a: Point3, b: Point3, c: Point3, d: Point3) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point3, q: Point3, r: Point3, o: f64| {
        o == 0.0 && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// No two non-adjacent edges touch. Quadratic; polygons here are small.
pub(crate) fn is_simple(v: &[Point3]) -> bool {
    let n = v.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(a, b, v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn place(anchor: Point3, heading: f64, local: &[(f64, f64)]) -> Vec<Point3> {
    let (s, c) = heading.sin_cos();
    local.iter().map(|&(x, y)| Point3::ground(anchor.x + x * c - y * s, anchor.y + x * s + y * c)).collect()
}

/// Seven-vertex arrow: shaft rectangle with its tail on `anchor`, then the head
/// triangle, rotated by `heading` about the anchor.
pub fn build_arrow(
    anchor: Point3,
    heading: f64,
    dims: &ArrowDimensions,
    color: Rgb,
) -> Result<GroundPolygon> {
    dims.validate()?;
    if !anchor.is_finite() || !heading.is_finite() {
        return Err(Error::param("arrow anchor/heading must be finite"));
    }
    let sl = dims.shaft_length_m;
    let sr = dims.shaft_diameter_m / 2.0;
    let hr = dims.head_diameter_m / 2.0;
    let tip = sl + dims.head_length_m;
    let local = [(0.0, -sr), (sl, -sr), (sl, -hr), (tip, 0.0), (sl, hr), (sl, sr), (0.0, sr)];
    Ok(GroundPolygon { vertices: place(anchor, heading, &local), color })
}

/// Regular N-gon inscribed in the circle, first vertex at angle 0, CCW.
pub fn regular_polygon(center: Point3, diameter_m: f64, segments: u32, color: Rgb) -> Result<GroundPolygon> {
    if !(diameter_m.is_finite() && diameter_m > 0.0) {
        return Err(Error::param(format!("disk diameter must be > 0, got {diameter_m}")));
    }
    if segments < 3 {
        return Err(Error::param("polygon needs at least 3 segments"));
    }
    if !center.is_finite() {
        return Err(Error::param("disk center must be finite"));
    }
    let r = diameter_m / 2.0;
    let vertices = (0..segments)
        .map(|k| {
            let (s, c) = (TAU * k as f64 / segments as f64).sin_cos();
            Point3::ground(center.x + r * c, center.y + r * s)
        })
        .collect();
    Ok(GroundPolygon { vertices, color })
}

pub fn build_disk(center: Point3, diameter_m: f64, segments: u32, color: Rgb) -> Result<GroundPolygon> {
    if segments < MIN_DISK_SEGMENTS {
        return Err(Error::param(format!(
            "disk needs at least {MIN_DISK_SEGMENTS} segments, got {segments}"
        )));
    }
    regular_polygon(center, diameter_m, segments, color)
}

/// Shrinks arrows with distance from the lens: factor
/// `reference / |anchor - lens|`, clamped to [`SCALE_CLAMP`].
pub fn distance_compensated_scale(
    anchor: Point3,
    lens_position: Point3,
    base: &ArrowDimensions,
    reference_distance_m: f64,
) -> Result<ArrowDimensions> {
    if !(reference_distance_m.is_finite() && reference_distance_m > 0.0) {
        return Err(Error::param("reference distance must be > 0"));
    }
    let dist = anchor.distance(&lens_position);
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::param("anchor coincides with the lens"));
    }
    let factor = (reference_distance_m / dist).clamp(SCALE_CLAMP.0, SCALE_CLAMP.1);
    Ok(base.scaled(factor))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MarkerShape {
    Arrow(ArrowDimensions),
    Disk {
        diameter_m: f64,
        segments: u32,
    },
    /// Vertices relative to the marker pose.
    Polygon {
        vertices: Vec<Point3>,
    },
    /// Strip of rectangles, one per segment, relative to the marker pose.
    Polyline {
        vertices: Vec<Point3>,
        width_m: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSpec {
    pub shape: MarkerShape,
    pub position: Point3,
    pub heading: f64,
    pub color: Rgb,
}

impl MarkerSpec {
    pub fn ground_polygons(&self) -> Result<Vec<GroundPolygon>> {
        let at = Point3::ground(self.position.x, self.position.y);
        match &self.shape {
            MarkerShape::Arrow(dims) => Ok(vec![build_arrow(at, self.heading, dims, self.color)?]),
            MarkerShape::Disk { diameter_m, segments } => {
                Ok(vec![build_disk(at, *diameter_m, *segments, self.color)?])
            }
            MarkerShape::Polygon { vertices } => {
                let local: Vec<(f64, f64)> = vertices.iter().map(|v| (v.x, v.y)).collect();
                let mut vertices = place(at, self.heading, &local);
                if signed_area(&vertices) < 0.0 {
                    vertices.reverse();
                }
                let poly = GroundPolygon { vertices, color: self.color };
                if !poly.is_valid() {
                    return Err(Error::param("polygon marker is degenerate or self-intersecting"));
                }
                Ok(vec![poly])
            }
            MarkerShape::Polyline { vertices, width_m } => {
                if !(width_m.is_finite() && *width_m > 0.0) {
                    return Err(Error::param("polyline width must be > 0"));
                }
                let hw = width_m / 2.0;
                let mut out = Vec::new();
                for seg in vertices.windows(2) {
                    let (a, b) = (seg[0], seg[1]);
                    let len = a.planar_distance(&b);
                    if !(len > 0.0) {
                        continue;
                    }
                    let dir = (b.y - a.y).atan2(b.x - a.x);
                    let start = place(at, self.heading, &[(a.x, a.y)])[0];
                    let rect = [(0.0, -hw), (len, -hw), (len, hw), (0.0, hw)];
                    out.push(GroundPolygon {
                        vertices: place(start, dir + self.heading, &rect),
                        color: self.color,
                    });
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrowStyle {
    pub shaft_length: f64,
    pub shaft_diameter: f64,
    pub head_length: f64,
    pub head_diameter: f64,
    pub color: Rgb,
}

impl Default for ArrowStyle {
    fn default() -> Self {
        let d = ArrowDimensions::default();
        Self {
            shaft_length: d.shaft_length_m,
            shaft_diameter: d.shaft_diameter_m,
            head_length: d.head_length_m,
            head_diameter: d.head_diameter_m,
            color: Rgb::PURPLE,
        }
    }
}

impl ArrowStyle {
    pub fn dimensions(&self) -> ArrowDimensions {
        ArrowDimensions {
            shaft_length_m: self.shaft_length,
            shaft_diameter_m: self.shaft_diameter,
            head_length_m: self.head_length,
            head_diameter_m: self.head_diameter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DestinationStyle {
    pub color: Rgb,
    pub segments: u32,
}

impl Default for DestinationStyle {
    fn default() -> Self {
        Self { color: Rgb::GREEN, segments: DEFAULT_DISK_SEGMENTS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleCompensation {
    pub enabled: bool,
    pub reference_distance_m: f64,
}

impl Default for ScaleCompensation {
    fn default() -> Self {
        Self { enabled: false, reference_distance_m: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StyleConfig {
    pub arrow: ArrowStyle,
    pub destination: DestinationStyle,
    pub scale_compensation: ScaleCompensation,
}

impl StyleConfig {
    pub fn from_config_str(text: &str) -> Result<Self> {
        let style: StyleConfig = toml::from_str(text).map_err(|e| Error::parse("style", e.message()))?;
        style.validate()?;
        Ok(style)
    }

    pub fn validate(&self) -> Result<()> {
        self.arrow.dimensions().validate()?;
        if self.destination.segments < MIN_DISK_SEGMENTS {
            return Err(Error::param(format!("destination.segments must be >= {MIN_DISK_SEGMENTS}")));
        }
        let r = self.scale_compensation.reference_distance_m;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("scale_compensation.reference_distance_m must be > 0"));
        }
        Ok(())
    }
}

/// Destination anchor becomes a disk of `destination_diameter_m` (omitted when
/// that is 0); every other anchor an arrow along its heading. When scale
/// compensation is enabled and `lens_position` is known, arrows shrink with
/// distance from the lens.
pub fn markers_for_anchors(
    anchors: &AnchorList,
    style: &StyleConfig,
    destination_diameter_m: f64,
    lens_position: Option<Point3>,
) -> Result<Vec<MarkerSpec>> {
    let base = style.arrow.dimensions();
    let mut out = Vec::with_capacity(anchors.len());
    for a in anchors.iter() {
        let position = Point3::ground(a.position.x, a.position.y);
        match a.kind {
            AnchorKind::Destination => {
                if destination_diameter_m > 0.0 {
                    out.push(MarkerSpec {
                        shape: MarkerShape::Disk {
                            diameter_m: destination_diameter_m,
                            segments: style.destination.segments,
                        },
                        position,
                        heading: a.heading,
                        color: style.destination.color,
                    });
                }
            }
            AnchorKind::Arrow => {
                let dims = match (style.scale_compensation.enabled, lens_position) {
                    (true, Some(lens)) => distance_compensated_scale(
                        position,
                        lens,
                        &base,
                        style.scale_compensation.reference_distance_m,
                    )?,
                    _ => base,
                };
                out.push(MarkerSpec {
                    shape: MarkerShape::Arrow(dims),
                    position,
                    heading: a.heading,
                    color: style.arrow.color,
                });
            }
        }
    }
    Ok(out)
}
