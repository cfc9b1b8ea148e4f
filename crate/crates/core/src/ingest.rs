//! Path ingestion from files or a TCP stream of newline-delimited JSON records.
//!
//! Record schema, one per line on the wire or one per file:
//!
//! ```json
//! {"seq": 7, "frame": "map", "poses": [{"p": [1.0, 2.0, 0.0], "q": [0, 0, 0, 1]}]}
//! ```
//!
//! `seq` and `q` are optional. Orientations are validated but do not affect
//! arrow headings.

use std::io::{BufRead, BufReader, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, UnitQuaternion};
use crate::pipeline::Pipeline;
use crate::render::{frame_path, write_image, Framebuffer, ImageFormat};
use crate::resample::{NavPath, Pose};

const POLL_INTERVAL: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, PartialEq)]
pub struct PathMessage {
    pub sequence_number: Option<u64>,
    pub path: NavPath,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seq: Option<u64>,
    frame: String,
    poses: Vec<RawPose>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose {
    p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
}

pub fn parse_path_message(text: &str) -> Result<PathMessage> {
    let raw: RawRecord = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let mut poses = Vec::with_capacity(raw.poses.len());
    for (i, rp) in raw.poses.into_iter().enumerate() {
        if rp.p.len() != 3 {
            return Err(Error::parse(
                format!("poses[{i}].p"),
                format!("expected 3 numbers, got {}", rp.p.len()),
            ));
        }
        let position = Point3::new(rp.p[0], rp.p[1], rp.p[2]);
        if !position.is_finite() {
            return Err(Error::parse(format!("poses[{i}].p"), "non-finite coordinate"));
        }
        let orientation = match rp.q {
            None => UnitQuaternion::IDENTITY,
            Some(q) if q.len() == 4 => UnitQuaternion::new(q[0], q[1], q[2], q[3])
                .map_err(|e| Error::parse(format!("poses[{i}].q"), e.to_string()))?,
            Some(q) => {
                return Err(Error::parse(
                    format!("poses[{i}].q"),
                    format!("expected 4 numbers, got {}", q.len()),
                ))
            }
        };
        poses.push(Pose { position, orientation });
    }
    Ok(PathMessage { sequence_number: raw.seq, path: NavPath::new(raw.frame, poses) })
}

pub fn parse_path_text(text: &str) -> Result<NavPath> {
    parse_path_message(text).map(|m| m.path)
}

/// Single-line JSON record; orientation omitted for identity poses.
pub fn serialize_path(path: &NavPath, sequence_number: Option<u64>) -> String {
    let raw = RawRecord {
        seq: sequence_number,
        frame: path.frame.clone(),
        poses: path
            .poses
            .iter()
            .map(|pose| RawPose {
                p: vec![pose.position.x, pose.position.y, pose.position.z],
                q: (pose.orientation != UnitQuaternion::IDENTITY)
                    .then(|| pose.orientation.components().to_vec()),
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("path record serializes")
}

pub fn load_path_file(path: &std::path::Path) -> Result<NavPath> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_path_text(&text)
}

/// A frame produced by the server for one accepted path update.
#[derive(Debug, Clone)]
pub struct RenderedFrame {
    /// 1-based count of frames emitted by this server.
    pub index: u64,
    /// Server-wide update counter of the path this frame shows.
    pub update: u64,
    pub sequence_number: Option<u64>,
    pub framebuffer: Framebuffer,
}

pub trait FrameSink: Send + 'static {
    fn on_frame(&mut self, frame: RenderedFrame) -> Result<()>;
}

impl<F> FrameSink for F
where
    F: FnMut(RenderedFrame) -> Result<()> + Send + 'static,
{
    fn on_frame(&mut self, frame: RenderedFrame) -> Result<()> {
        self(frame)
    }
}

/// Writes `frame_000001.png`, `frame_000002.png`, ... into a directory.
#[derive(Debug, Clone)]
pub struct DirectorySink {
    pub dir: PathBuf,
    pub format: ImageFormat,
}

impl FrameSink for DirectorySink {
    fn on_frame(&mut self, frame: RenderedFrame) -> Result<()> {
        let path = frame_path(&self.dir, frame.index, self.format);
        write_image(&path, &frame.framebuffer, self.format)?;
        log::info!(
            "frame_written: {} update={} seq={:?}",
            path.display(),
            frame.update,
            frame.sequence_number
        );
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct ServerStats {
    pub connections: AtomicU64,
    pub accepted: AtomicU64,
    pub parse_errors: AtomicU64,
    pub frames_rendered: AtomicU64,
    pub frames_dropped_stale: AtomicU64,
}

#[derive(Default)]
struct Slot {
    update: u64,
    current: Option<Arc<PathMessage>>,
}

struct Shared {
    slot: Mutex<Slot>,
    changed: Condvar,
    shutdown: AtomicBool,
    stats: ServerStats,
}

impl Shared {
    fn publish(&self, msg: PathMessage) -> u64 {
        let mut slot = self.slot.lock().unwrap();
        slot.update += 1;
        slot.current = Some(Arc::new(msg));
        self.stats.accepted.fetch_add(1, Ordering::SeqCst);
        self.changed.notify_all();
        slot.update
    }

    fn current(&self) -> (u64, Option<Arc<PathMessage>>) {
        let slot = self.slot.lock().unwrap();
        (slot.update, slot.current.clone())
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
    renderer: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stats(&self) -> &ServerStats {
        &self.shared.stats
    }

    /// Latest accepted path and its update number.
    pub fn current_path(&self) -> Option<(u64, Arc<PathMessage>)> {
        let (u, p) = self.shared.current();
        p.map(|p| (u, p))
    }

    /// Stops accepting, renders any pending update, and joins the workers.
    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.shared.shutdown.store(true, Ordering::SeqCst);
        self.shared.changed.notify_all();
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
        if let Some(h) = self.renderer.take() {
            let _ = h.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Binds `addr` and serves until [`ServerHandle::shutdown`].
///
/// Each line received is one path record. A valid record replaces the current
/// path; a malformed one is logged and skipped. Rendering coalesces: the
/// worker always renders the newest path, and drops a finished frame if a
/// newer path arrived while it was rendering.
pub fn serve(addr: &str, pipeline: Pipeline, sink: impl FrameSink) -> Result<ServerHandle> {
    let listener = TcpListener::bind(addr).map_err(|e| Error::Io(format!("bind {addr}: {e}")))?;
    listener.set_nonblocking(true)?;
    let local = listener.local_addr()?;
    let shared = Arc::new(Shared {
        slot: Mutex::new(Slot::default()),
        changed: Condvar::new(),
        shutdown: AtomicBool::new(false),
        stats: ServerStats::default(),
    });
    log::info!("listening: {local}");

    let acceptor = {
        let shared = Arc::clone(&shared);
        thread::Builder::new().name("navproj-accept".into()).spawn(move || accept_loop(listener, shared))?
    };
    let renderer = {
        let shared = Arc::clone(&shared);
        thread::Builder::new()
            .name("navproj-render".into())
            .spawn(move || render_loop(pipeline, sink, shared))?
    };
    Ok(ServerHandle { addr: local, shared, acceptor: Some(acceptor), renderer: Some(renderer) })
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    let mut readers = Vec::new();
    while !shared.shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                shared.stats.connections.fetch_add(1, Ordering::SeqCst);
                log::info!("connection_opened: {peer}");
                let shared = Arc::clone(&shared);
                match thread::Builder::new()
                    .name(format!("navproj-conn-{peer}"))
                    .spawn(move || read_connection(stream, peer, shared))
                {
                    Ok(h) => readers.push(h),
                    Err(e) => log::error!("connection_failed: {peer}: {e}"),
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL_INTERVAL),
            Err(e) => {
                log::warn!("accept_failed: {e}");
                thread::sleep(POLL_INTERVAL);
            }
        }
        readers.retain(|h: &JoinHandle<()>| !h.is_finished());
    }
    for h in readers {
        let _ = h.join();
    }
}

fn read_connection(stream: TcpStream, peer: SocketAddr, shared: Arc<Shared>) {
    if stream.set_nonblocking(false).is_err() || stream.set_read_timeout(Some(POLL_INTERVAL)).is_err() {
        log::error!("connection_failed: {peer}: cannot configure socket");
        return;
    }
    let mut reader = BufReader::new(stream);
    let mut buf = Vec::new();
    let mut line_no = 0u64;
    let mut last_seq: Option<u64> = None;
    loop {
        if shared.shutdown.load(Ordering::SeqCst) {
            break;
        }
        // partial lines survive read timeouts in `buf`
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => {
                if !buf.is_empty() {
                    line_no += 1;
                    handle_line(&buf, line_no, peer, &mut last_seq, &shared);
                }
                break;
            }
            Ok(_) => {
                if buf.last() != Some(&b'\n') {
                    continue;
                }
                line_no += 1;
                handle_line(&buf, line_no, peer, &mut last_seq, &shared);
                buf.clear();
            }
            Err(e)
                if matches!(
                    e.kind(),
                    ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted
                ) => {}
            Err(e) => {
                log::warn!("connection_error: {peer}: {e}");
                break;
            }
        }
    }
    log::info!("connection_closed: {peer}");
}

fn handle_line(raw: &[u8], line_no: u64, peer: SocketAddr, last_seq: &mut Option<u64>, shared: &Shared) {
    let text = String::from_utf8_lossy(raw);
    let text = text.trim();
    if text.is_empty() {
        return;
    }
    let msg = parse_path_message(text).and_then(|m| match (m.sequence_number, *last_seq) {
        (Some(s), Some(prev)) if s <= prev => {
            Err(Error::parse("seq", format!("sequence number {s} does not increase (last {prev})")))
        }
        _ => Ok(m),
    });
    match msg {
        Ok(m) => {
            if m.sequence_number.is_some() {
                *last_seq = m.sequence_number;
            }
            let update = shared.publish(m);
            log::debug!("path_accepted: {peer} line {line_no} update={update}");
        }
        Err(e) => {
            shared.stats.parse_errors.fetch_add(1, Ordering::SeqCst);
            log::warn!("parse_error: {peer} line {line_no}: {e}");
        }
    }
}

fn render_loop(pipeline: Pipeline, mut sink: impl FrameSink, shared: Arc<Shared>) {
    let mut rendered_update = 0u64;
    let mut index = 0u64;
    loop {
        let (update, msg) = {
            let mut slot = shared.slot.lock().unwrap();
            while slot.update == rendered_update && !shared.shutdown.load(Ordering::SeqCst) {
                slot = shared.changed.wait(slot).unwrap();
            }
            if slot.update == rendered_update {
                break; // shutdown with nothing pending
            }
            (slot.update, slot.current.clone())
        };
        rendered_update = update;
        let Some(msg) = msg else { continue };
        let fb = match pipeline.render_path(&msg.path) {
            Ok(fb) => fb,
            Err(e) => {
                log::error!("render_failed: update={update}: {e}");
                continue;
            }
        };
        if shared.current().0 != update {
            shared.stats.frames_dropped_stale.fetch_add(1, Ordering::SeqCst);
            continue;
        }
        index += 1;
        let frame = RenderedFrame { index, update, sequence_number: msg.sequence_number, framebuffer: fb };
        shared.stats.frames_rendered.fetch_add(1, Ordering::SeqCst);
        if let Err(e) = sink.on_frame(frame) {
            log::error!("frame_sink_failed: update={update}: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_empty_and_single_pose() {
        let p = parse_path_text(r#"{"frame":"map","poses":[]}"#).unwrap();
        assert_eq!(p.frame, "map");
        assert!(p.is_empty());
        let p = parse_path_text(r#"{"frame":"map","poses":[{"p":[1,2,0]}]}"#).unwrap();
        assert_eq!(p.poses, vec![Pose::at(Point3::new(1.0, 2.0, 0.0))]);
    }

    #[test]
    fn parses_orientation_and_seq() {
        let m = parse_path_message(
            r#"{"seq":4,"frame":"odom","poses":[{"p":[0,0,0],"q":[0,0,0.7071067811865476,0.7071067811865476]}]}"#,
        )
        .unwrap();
        assert_eq!(m.sequence_number, Some(4));
        assert!((m.path.poses[0].orientation.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_path_text("{\"frame\":\"map\",\n \"poses\":[{\"p\":[1,2]]}").unwrap_err();
        assert!(matches!(e, Error::Parse { ref at, .. } if at.starts_with("line 2")), "{e}");
        let e = parse_path_text(r#"{"frame":"map","poses":[{"p":[1,2,3]},{"p":[1,2]}]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref at, .. } if at == "poses[1].p"), "{e}");
        let e = parse_path_text(r#"{"frame":"map","poses":[{"p":[1,2,3],"q":[0,0,1]}]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref at, .. } if at == "poses[0].q"), "{e}");
        let e = parse_path_text(r#"{"frame":"map","poses":[{"p":[1,2,3],"q":[0,0,0,2]}]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref at, .. } if at == "poses[0].q"), "{e}");
        assert!(parse_path_text(r#"{"frame":"map","poses":[{"p":[1e400,0,0]}]}"#).is_err());
        assert!(parse_path_text(r#"{"poses":[]}"#).is_err());
        assert!(parse_path_text("not json").is_err());
    }

    fn arb_path() -> impl Strategy<Value = NavPath> {
        let pose = (
            prop::array::uniform3(-1e3f64..1e3),
            prop::option::of((-3.0f64..3.0, -1.5f64..1.5, -3.0f64..3.0)),
        )
            .prop_map(|(p, q)| Pose {
                position: Point3::new(p[0], p[1], p[2]),
                orientation: q
                    .map_or(UnitQuaternion::IDENTITY, |(y, pi, r)| UnitQuaternion::from_ypr(y, pi, r)),
            });
        ("[a-z_]{1,12}", prop::collection::vec(pose, 0..40)).prop_map(|(f, poses)| NavPath::new(f, poses))
    }

    proptest! {
        #[test]
        fn prop_serialize_parse_round_trip(path in arb_path(), seq in prop::option::of(any::<u64>())) {
            let text = serialize_path(&path, seq);
            prop_assert!(!text.contains('\n'));
            let back = parse_path_message(&text).unwrap();
            prop_assert_eq!(back.sequence_number, seq);
            prop_assert_eq!(back.path, path);
        }
    }
}
