//! C ABI for `navproj`.
//!
//! Every fallible function returns an [`NpStatus`]; on failure a message for
//! the calling thread is available from [`np_last_error`]. Objects are opaque
//! handles created by `*_new`/`*_load` and released with the matching `*_free`.
//! Robot poses are planar: `x`, `y` in meters and `yaw` in radians, placing the
//! robot base frame in the world.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use navproj::projector::{self, load_projector_config};
use navproj::render::{encode_image, ImageFormat};
use navproj::resample::{derive_headings, resample};
use navproj::{
    AnchorKind, Error, Framebuffer, NavPath, Pipeline, Point3, ProjectorConfig, ResampleParams,
    RigidTransform, StyleConfig, ThrowReport, TransformTree,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    TransformError = 4,
    BehindLens = 5,
    NoGroundIntersection = 6,
    FootprintUndefined = 7,
    BufferTooSmall = 8,
    IoError = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpImageFormat {
    Png = 0,
    Ppm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpAnchorKind {
    Destination = 0,
    Arrow = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpThrowKind {
    Ok = 0,
    TooClose = 1,
    TooFar = 2,
    /// The optical axis never meets the ground.
    Undefined = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NpPoint3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NpPose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NpPixel {
    pub u: f64,
    pub v: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpAnchor {
    pub position: NpPoint3,
    pub heading: f64,
    pub kind: NpAnchorKind,
}

/// Ground quadrilateral lit by the projector, corners ordered
/// top-left, top-right, bottom-right, bottom-left of the image.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NpFootprint {
    pub corners: [NpPoint3; 4],
    pub near_width_m: f64,
    pub far_width_m: f64,
    pub depth_m: f64,
    pub area_m2: f64,
}

/// `distance_m` is NaN when `kind` is `NP_THROW_KIND_UNDEFINED`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpThrow {
    pub kind: NpThrowKind,
    pub distance_m: f64,
}

/// Opaque projector calibration and mount.
pub struct NpProjector {
    config: ProjectorConfig,
}

/// Opaque path-to-frame pipeline.
pub struct NpPipeline {
    pipeline: Pipeline,
}

/// Opaque RGB8 frame.
pub struct NpFramebuffer {
    fb: Framebuffer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> NpStatus {
    match e {
        Error::Param(_) => NpStatus::InvalidArgument,
        Error::Parse { .. } => NpStatus::ParseError,
        Error::FrameChain { .. } | Error::Lookup { .. } | Error::Tree(_) => NpStatus::TransformError,
        Error::BehindLens { .. } => NpStatus::BehindLens,
        Error::NoGroundIntersection => NpStatus::NoGroundIntersection,
        Error::FootprintUndefined { .. } => NpStatus::FootprintUndefined,
        Error::Io(_) => NpStatus::IoError,
    }
}

struct Fail(NpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn fail(status: NpStatus, msg: &str) -> Fail {
    Fail(status, msg.to_owned())
}

/// Runs `f`, recording any error or panic for [`np_last_error`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            NpStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(fail(NpStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(NpStatus::InvalidArgument, &format!("{what} is not valid UTF-8")))
}

unsafe fn opt_text<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if s.is_null() {
        Ok(None)
    } else {
        text(s, what).map(Some)
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| fail(NpStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| fail(NpStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn points<'a>(pts: *const NpPoint3, len: usize) -> Result<&'a [NpPoint3], Fail> {
    if len == 0 {
        Ok(&[])
    } else if pts.is_null() {
        Err(fail(NpStatus::NullPointer, "points is null"))
    } else {
        Ok(std::slice::from_raw_parts(pts, len))
    }
}

fn to_point(p: &NpPoint3) -> Point3 {
    Point3::new(p.x, p.y, p.z)
}

fn from_point(p: Point3) -> NpPoint3 {
    NpPoint3 { x: p.x, y: p.y, z: p.z }
}

fn robot_pose(cfg: &ProjectorConfig, pose: NpPose2) -> Result<RigidTransform, Fail> {
    Ok(RigidTransform::from_xyz_ypr("world", cfg.base_frame(), [pose.x, pose.y, 0.0], [pose.yaw, 0.0, 0.0])?)
}

fn load_projector(
    projector_toml: &str,
    transforms_toml: Option<&str>,
) -> Result<(ProjectorConfig, Option<TransformTree>), Fail> {
    let mut cfg = load_projector_config(projector_toml)?;
    let tree = match transforms_toml {
        Some(t) => {
            let tree = TransformTree::from_config_str(t)?;
            if tree.contains_frame(cfg.base_frame()) && tree.contains_frame(cfg.lens_frame()) {
                cfg = cfg.with_mount_from(&tree)?;
            }
            Some(tree)
        }
        None => None,
    };
    Ok((cfg, tree))
}

/// Message for the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn np_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a projector calibration (TOML text). When `transforms_toml` is not
/// NULL and names both the base and lens frames, the mount is taken from it.
///
/// # Safety
/// Strings must be NUL-terminated; `out_projector` must be writable.
#[no_mangle]
pub unsafe extern "C" fn np_projector_load(
    projector_toml: *const c_char,
    transforms_toml: *const c_char,
    out_projector: *mut *mut NpProjector,
) -> NpStatus {
    guard(|| {
        let slot = out(out_projector, "out_projector")?;
        *slot = ptr::null_mut();
        let (config, _) = load_projector(
            text(projector_toml, "projector_toml")?,
            opt_text(transforms_toml, "transforms_toml")?,
        )?;
        *slot = Box::into_raw(Box::new(NpProjector { config }));
        Ok(())
    })
}

/// # Safety
/// `projector` must come from [`np_projector_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn np_projector_free(projector: *mut NpProjector) {
    if !projector.is_null() {
        drop(Box::from_raw(projector));
    }
}

/// Image pixel of a world point (pixel centers at integer coordinates).
///
/// # Safety
/// `projector` must be a live handle; `out_pixel` must be writable.
#[no_mangle]
pub unsafe extern "C" fn np_projector_project(
    projector: *const NpProjector,
    robot: NpPose2,
    point: NpPoint3,
    out_pixel: *mut NpPixel,
) -> NpStatus {
    guard(|| {
        let cfg = &handle(projector, "projector")?.config;
        let slot = out(out_pixel, "out_pixel")?;
        let (u, v) = projector::project_point(cfg, &robot_pose(cfg, robot)?, to_point(&point))?;
        *slot = NpPixel { u, v };
        Ok(())
    })
}

/// Ground point (z = 0) lit by pixel `(u, v)`.
///
/// # Safety
/// `projector` must be a live handle; `out_point` must be writable.
#[no_mangle]
pub unsafe extern "C" fn np_projector_unproject(
    projector: *const NpProjector,
    robot: NpPose2,
    u: f64,
    v: f64,
    out_point: *mut NpPoint3,
) -> NpStatus {
    guard(|| {
        let cfg = &handle(projector, "projector")?.config;
        let slot = out(out_point, "out_point")?;
        *slot = from_point(projector::unproject_to_ground(cfg, &robot_pose(cfg, robot)?, (u, v))?);
        Ok(())
    })
}

/// # Safety
/// `projector` must be a live handle; `out_footprint` must be writable.
#[no_mangle]
pub unsafe extern "C" fn np_projector_footprint(
    projector: *const NpProjector,
    robot: NpPose2,
    out_footprint: *mut NpFootprint,
) -> NpStatus {
    guard(|| {
        let cfg = &handle(projector, "projector")?.config;
        let slot = out(out_footprint, "out_footprint")?;
        let fp = projector::ground_footprint(cfg, &robot_pose(cfg, robot)?)?;
        *slot = NpFootprint {
            corners: fp.corners.map(from_point),
            near_width_m: fp.near_width_m,
            far_width_m: fp.far_width_m,
            depth_m: fp.depth_m,
            area_m2: fp.area_m2,
        };
        Ok(())
    })
}

/// Lens-to-ground throw against the rated range. An out-of-range throw is
/// reported in `out_throw`, not as an error status.
///
/// # Safety
/// `projector` must be a live handle; `out_throw` must be writable.
#[no_mangle]
pub unsafe extern "C" fn np_projector_validate_throw(
    projector: *const NpProjector,
    robot: NpPose2,
    out_throw: *mut NpThrow,
) -> NpStatus {
    guard(|| {
        let cfg = &handle(projector, "projector")?.config;
        let slot = out(out_throw, "out_throw")?;
        *slot = match projector::validate_throw(cfg, &robot_pose(cfg, robot)?)? {
            ThrowReport::Ok { distance_m } => NpThrow { kind: NpThrowKind::Ok, distance_m },
            ThrowReport::TooClose { distance_m, .. } => NpThrow { kind: NpThrowKind::TooClose, distance_m },
            ThrowReport::TooFar { distance_m, .. } => NpThrow { kind: NpThrowKind::TooFar, distance_m },
            ThrowReport::Undefined => NpThrow { kind: NpThrowKind::Undefined, distance_m: f64::NAN },
        };
        Ok(())
    })
}

/// Resamples a path into anchors, destination first. Writes at most
/// `capacity` anchors and always sets `out_len` to the full count; returns
/// `NP_STATUS_BUFFER_TOO_SMALL` if they did not fit.
///
/// # Safety
/// `points` must hold `len` elements; `out_anchors` must hold `capacity`.
#[no_mangle]
pub unsafe extern "C" fn np_resample(
    points: *const NpPoint3,
    len: usize,
    spacing_m: f64,
    destination_diameter_m: f64,
    out_anchors: *mut NpAnchor,
    capacity: usize,
    out_len: *mut usize,
) -> NpStatus {
    guard(|| {
        let count = out(out_len, "out_len")?;
        *count = 0;
        let path = NavPath::from_points("world", self::points(points, len)?.iter().map(to_point));
        let params = ResampleParams::new(spacing_m, destination_diameter_m)?;
        let anchors = derive_headings(&resample(&path, &params)?);
        *count = anchors.len();
        if anchors.len() > capacity {
            return Err(fail(
                NpStatus::BufferTooSmall,
                &format!("{} anchors, capacity {capacity}", anchors.len()),
            ));
        }
        if anchors.is_empty() {
            return Ok(());
        }
        if out_anchors.is_null() {
            return Err(fail(NpStatus::NullPointer, "out_anchors is null"));
        }
        let dst = std::slice::from_raw_parts_mut(out_anchors, anchors.len());
        for (d, a) in dst.iter_mut().zip(anchors.iter()) {
            *d = NpAnchor {
                position: from_point(a.position),
                heading: a.heading,
                kind: match a.kind {
                    AnchorKind::Destination => NpAnchorKind::Destination,
                    AnchorKind::Arrow => NpAnchorKind::Arrow,
                },
            };
        }
        Ok(())
    })
}

/// Builds a rendering pipeline. `transforms_toml` and `style_toml` may be NULL.
///
/// # Safety
/// Strings must be NUL-terminated; `out_pipeline` must be writable.
#[no_mangle]
pub unsafe extern "C" fn np_pipeline_new(
    projector_toml: *const c_char,
    transforms_toml: *const c_char,
    style_toml: *const c_char,
    spacing_m: f64,
    destination_diameter_m: f64,
    out_pipeline: *mut *mut NpPipeline,
) -> NpStatus {
    guard(|| {
        let slot = out(out_pipeline, "out_pipeline")?;
        *slot = ptr::null_mut();
        let (cfg, tree) = load_projector(
            text(projector_toml, "projector_toml")?,
            opt_text(transforms_toml, "transforms_toml")?,
        )?;
        let style = match opt_text(style_toml, "style_toml")? {
            Some(s) => StyleConfig::from_config_str(s)?,
            None => StyleConfig::default(),
        };
        let mut pipeline =
            Pipeline::new(cfg, style, ResampleParams::new(spacing_m, destination_diameter_m)?)?;
        if let Some(t) = tree {
            pipeline = pipeline.with_transforms(t)?;
        }
        *slot = Box::into_raw(Box::new(NpPipeline { pipeline }));
        Ok(())
    })
}

/// # Safety
/// `pipeline` must come from [`np_pipeline_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn np_pipeline_free(pipeline: *mut NpPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

fn render_into(p: &Pipeline, path: &NavPath, slot: &mut *mut NpFramebuffer) -> Result<(), Fail> {
    let fb = p.render_path(path)?;
    *slot = Box::into_raw(Box::new(NpFramebuffer { fb }));
    Ok(())
}

/// Renders one frame from a JSON path record.
///
/// # Safety
/// `pipeline` must be a live handle; `path_json` NUL-terminated;
/// `out_frame` writable.
#[no_mangle]
pub unsafe extern "C" fn np_pipeline_render_json(
    pipeline: *const NpPipeline,
    path_json: *const c_char,
    out_frame: *mut *mut NpFramebuffer,
) -> NpStatus {
    guard(|| {
        let p = &handle(pipeline, "pipeline")?.pipeline;
        let slot = out(out_frame, "out_frame")?;
        *slot = ptr::null_mut();
        let path = navproj::ingest::parse_path_text(text(path_json, "path_json")?)?;
        render_into(p, &path, slot)
    })
}

/// Renders one frame from path points given in `frame`, ordered start to goal.
///
/// # Safety
/// `pipeline` must be a live handle; `frame` NUL-terminated; `points` must
/// hold `len` elements; `out_frame` writable.
#[no_mangle]
pub unsafe extern "C" fn np_pipeline_render_points(
    pipeline: *const NpPipeline,
    frame: *const c_char,
    points: *const NpPoint3,
    len: usize,
    out_frame: *mut *mut NpFramebuffer,
) -> NpStatus {
    guard(|| {
        let p = &handle(pipeline, "pipeline")?.pipeline;
        let slot = out(out_frame, "out_frame")?;
        *slot = ptr::null_mut();
        let path =
            NavPath::from_points(text(frame, "frame")?, self::points(points, len)?.iter().map(to_point));
        render_into(p, &path, slot)
    })
}

/// # Safety
/// `frame` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn np_framebuffer_width(frame: *const NpFramebuffer) -> u32 {
    frame.as_ref().map_or(0, |f| f.fb.width())
}

/// # Safety
/// `frame` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn np_framebuffer_height(frame: *const NpFramebuffer) -> u32 {
    frame.as_ref().map_or(0, |f| f.fb.height())
}

/// Row-major RGB8 pixels, `3 * width * height` bytes, owned by the frame.
///
/// # Safety
/// `frame` must be a live handle or NULL; `out_len` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn np_framebuffer_data(frame: *const NpFramebuffer, out_len: *mut usize) -> *const u8 {
    let (data, len) =
        frame.as_ref().map_or((ptr::null(), 0), |f| (f.fb.pixels().as_ptr(), f.fb.pixels().len()));
    if let Some(l) = out_len.as_mut() {
        *l = len;
    }
    data
}

/// Encodes the frame as PNG or binary PPM into a new buffer released with
/// [`np_bytes_free`].
///
/// # Safety
/// `frame` must be a live handle; `out_bytes` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn np_framebuffer_encode(
    frame: *const NpFramebuffer,
    format: NpImageFormat,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> NpStatus {
    guard(|| {
        let f = handle(frame, "frame")?;
        let bytes_slot = out(out_bytes, "out_bytes")?;
        let len_slot = out(out_len, "out_len")?;
        let format = match format {
            NpImageFormat::Png => ImageFormat::Png,
            NpImageFormat::Ppm => ImageFormat::Ppm,
        };
        let boxed = encode_image(&f.fb, format).into_boxed_slice();
        *len_slot = boxed.len();
        *bytes_slot = Box::into_raw(boxed).cast::<u8>();
        Ok(())
    })
}

/// # Safety
/// `frame` must come from a render call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn np_framebuffer_free(frame: *mut NpFramebuffer) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// # Safety
/// `bytes` and `len` must be exactly as returned by [`np_framebuffer_encode`].
#[no_mangle]
pub unsafe extern "C" fn np_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}
