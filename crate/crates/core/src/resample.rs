//! Evenly spaced arrow anchors from an unevenly spaced planner path.
//!
//! The scan runs from the destination back to the start. The destination is
//! always kept. Each following anchor is the first earlier pose whose planar
//! distance from the previous anchor reaches the spacing `D`; the gap right
//! after the destination must also clear the destination circle, `D + diameter`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, UnitQuaternion};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub position: Point3,
    pub orientation: UnitQuaternion,
}

impl Pose {
    pub fn at(position: Point3) -> Self {
        Self { position, orientation: UnitQuaternion::IDENTITY }
    }
}

/// Planner output: index 0 is the start, the last pose is the destination.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NavPath {
    pub frame: String,
    pub poses: Vec<Pose>,
}

impl NavPath {
    pub fn new(frame: impl Into<String>, poses: Vec<Pose>) -> Self {
        Self { frame: frame.into(), poses }
    }

    pub fn from_points(frame: impl Into<String>, points: impl IntoIterator<Item = Point3>) -> Self {
        Self::new(frame, points.into_iter().map(Pose::at).collect())
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleParams {
    pub arrow_spacing_m: f64,
    pub destination_diameter_m: f64,
}

impl ResampleParams {
    pub fn new(arrow_spacing_m: f64, destination_diameter_m: f64) -> Result<Self> {
        let p = Self { arrow_spacing_m, destination_diameter_m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arrow_spacing_m.is_finite() && self.arrow_spacing_m > 0.0) {
            return Err(Error::param(format!("arrow spacing must be > 0, got {}", self.arrow_spacing_m)));
        }
        if !(self.destination_diameter_m.is_finite() && self.destination_diameter_m >= 0.0) {
            return Err(Error::param(format!(
                "destination diameter must be >= 0, got {}",
                self.destination_diameter_m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorKind {
    Destination,
    Arrow,
}

impl AnchorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnchorKind::Destination => "destination",
            AnchorKind::Arrow => "arrow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub position: Point3,
    pub heading: f64,
    pub kind: AnchorKind,
}

/// Destination first, then arrows walking back toward the start.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchorList {
    pub anchors: Vec<Anchor>,
}

impl AnchorList {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Anchor> {
        self.anchors.iter()
    }

    pub fn positions(&self) -> Vec<Point3> {
        self.anchors.iter().map(|a| a.position).collect()
    }
}

/// Headings are left at 0; see [`derive_headings`].
pub fn resample(path: &NavPath, params: &ResampleParams) -> Result<AnchorList> {
    params.validate()?;
    let poses = &path.poses;
    let mut anchors = Vec::new();
    if poses.is_empty() {
        return Ok(AnchorList { anchors });
    }

    let last = poses.len() - 1;
    let mut i = last;
    loop {
        let p = poses[i].position;
        anchors.push(Anchor {
            position: p,
            heading: 0.0,
            kind: if i == last { AnchorKind::Destination } else { AnchorKind::Arrow },
        });
        let threshold = if i == last {
            params.arrow_spacing_m + params.destination_diameter_m
        } else {
            params.arrow_spacing_m
        };

        let mut next = None;
        let mut j = i;
        while j > 0 {
            j -= 1;
            if p.planar_distance(&poses[j].position) >= threshold {
                next = Some(j);
                break;
            }
        }
        match next {
            Some(j) => i = j,
            None => break,
        }
    }
    Ok(AnchorList { anchors })
}

/// Each arrow points at its neighbour nearer the destination; the destination
/// takes the heading of the first arrow (0 when alone).
pub fn derive_headings(list: &AnchorList) -> AnchorList {
    let mut anchors = list.anchors.clone();
    for k in 1..anchors.len() {
        let from = anchors[k].position;
        let to = anchors[k - 1].position;
        anchors[k].heading = (to.y - from.y).atan2(to.x - from.x);
    }
    if !anchors.is_empty() {
        anchors[0].heading = anchors.get(1).map_or(0.0, |a| a.heading);
    }
    AnchorList { anchors }
}
