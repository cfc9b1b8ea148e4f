//! Projected navigation intent for mobile robots.
//!
//! A planner path is thinned into evenly spaced arrow anchors plus a
//! destination disk ([`resample`]), turned into flat ground markers
//! ([`marker`]), projected through a calibrated pinhole projector mounted on
//! the robot's transform tree ([`projector`], [`geometry`]) and rasterized into
//! the image the projector displays ([`render`]). Paths arrive from files or a
//! TCP stream ([`ingest`]).

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod ingest;
pub mod marker;
pub mod pipeline;
pub mod projector;
pub mod render;
pub mod resample;

pub use error::{Error, Result};
pub use geometry::{Point3, RigidTransform, TransformTree, UnitQuaternion};
pub use marker::{ArrowDimensions, GroundPolygon, MarkerShape, MarkerSpec, Rgb, StyleConfig};
pub use pipeline::Pipeline;
pub use projector::{GroundFootprint, Intrinsics, ProjectorConfig, ProjectorView, ThrowReport};
pub use render::{Framebuffer, ImageFormat, Scene};
pub use resample::{Anchor, AnchorKind, AnchorList, NavPath, Pose, ResampleParams};
