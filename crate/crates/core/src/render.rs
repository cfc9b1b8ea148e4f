//! Deterministic rasterizer producing the image handed to the projector.
//!
//! Sampling is at pixel centers: pixel `(i, j)` is painted when the point
//! `(i, j)` in projector pixel coordinates lies inside the polygon (even-odd).
//! Samples exactly on an edge follow the top-left rule, so two polygons that
//! share an edge never both paint, and never both skip, a pixel on it.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::marker::{MarkerSpec, Rgb};
use crate::projector::{ProjectorConfig, ProjectorView};

#[derive(Clone, PartialEq, Eq)]
pub struct Framebuffer {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl fmt::Debug for Framebuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Framebuffer({}x{})", self.width, self.height)
    }
}

impl Framebuffer {
    pub fn new(width: u32, height: u32, background: Rgb) -> Self {
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&background.0);
        }
        Self { width, height, pixels }
    }

    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize * 3 {
            return Err(Error::param(format!(
                "pixel buffer of {} bytes does not match {width}x{height} RGB",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Row-major RGB bytes.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let o = self.offset(x, y);
        Rgb([self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]])
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let o = self.offset(x, y);
        self.pixels[o..o + 3].copy_from_slice(&c.0);
    }

    pub fn count(&self, c: Rgb) -> usize {
        self.pixels.chunks_exact(3).filter(|p| *p == c.0).count()
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        (y as usize * self.width as usize + x as usize) * 3
    }
}

/// Fills a polygon given in pixel coordinates. Fewer than 3 vertices, or any
/// non-finite vertex, paints nothing.
pub fn fill_polygon(fb: &mut Framebuffer, vertices: &[(f64, f64)], color: Rgb) {
    let n = vertices.len();
    if n < 3 || vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return;
    }
    // Endpoints ordered by (y, x) so a shared edge yields bit-identical crossings.
    let edges: Vec<((f64, f64), (f64, f64))> = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if (a.1, a.0) <= (b.1, b.0) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .filter(|(a, b)| a.1 != b.1)
        .collect();
    if edges.is_empty() {
        return;
    }
    let ymin = edges.iter().map(|e| e.0 .1).fold(f64::INFINITY, f64::min);
    let ymax = edges.iter().map(|e| e.1 .1).fold(f64::NEG_INFINITY, f64::max);
    let (w, h) = (fb.width as f64, fb.height as f64);
    let row_start = ymin.ceil().max(0.0);
    let row_end = ymax.ceil().min(h); // exclusive: bottom edges are open
    if !(row_start < row_end) {
        return;
    }

    let mut xs: Vec<f64> = Vec::with_capacity(edges.len());
    for row in row_start as u32..row_end as u32 {
        let y = row as f64;
        xs.clear();
        for &((x0, y0), (x1, y1)) in &edges {
            if y0 <= y && y < y1 {
                xs.push(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            // left-closed, right-open
            let start = span[0].ceil().max(0.0);
            let end = span[1].ceil().min(w);
            if start < end {
                for col in start as u32..end as u32 {
                    fb.set(col, row, color);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Painted in order; later markers overwrite earlier ones.
    pub markers: Vec<MarkerSpec>,
    /// World -> robot base.
    pub robot_pose: RigidTransform,
    pub background: Rgb,
}

impl Scene {
    pub fn new(markers: Vec<MarkerSpec>, robot_pose: RigidTransform) -> Self {
        Self { markers, robot_pose, background: Rgb::BLACK }
    }
}

/// Fails only when the robot pose does not chain onto the projector mount.
/// A marker with any vertex behind the lens, or with invalid geometry, is
/// skipped whole.
pub fn render_frame(scene: &Scene, cfg: &ProjectorConfig) -> Result<Framebuffer> {
    let view = ProjectorView::new(cfg, &scene.robot_pose)?;
    let k = &cfg.intrinsics;
    let mut fb = Framebuffer::new(k.width_px, k.height_px, scene.background);
    for (idx, marker) in scene.markers.iter().enumerate() {
        let polygons = match marker.ground_polygons() {
            Ok(p) => p,
            Err(e) => {
                log::warn!("marker {idx} skipped: {e}");
                continue;
            }
        };
        let projected: Result<Vec<Vec<(f64, f64)>>> =
            polygons.iter().map(|poly| poly.vertices.iter().map(|v| view.project(*v)).collect()).collect();
        let Ok(projected) = projected else {
            log::debug!("marker {idx} skipped: vertex behind the lens");
            continue;
        };
        for (poly, px) in polygons.iter().zip(&projected) {
            fill_polygon(&mut fb, px, poly.color);
        }
    }
    Ok(fb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFormat {
    #[default]
    Png,
    /// Binary P6, maxval 255.
    Ppm,
}

impl ImageFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Ppm => "ppm",
        }
    }
}

impl FromStr for ImageFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(ImageFormat::Png),
            "ppm" => Ok(ImageFormat::Ppm),
            other => Err(Error::param(format!("unknown image format '{other}'"))),
        }
    }
}

pub fn encode_image(fb: &Framebuffer, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::Ppm => {
            let mut out = format!("P6\n{} {}\n255\n", fb.width, fb.height).into_bytes();
            out.extend_from_slice(&fb.pixels);
            out
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            {
                let mut enc = png::Encoder::new(&mut out, fb.width, fb.height);
                enc.set_color(png::ColorType::Rgb);
                enc.set_depth(png::BitDepth::Eight);
                let mut writer = enc.write_header().expect("png header to memory");
                writer.write_image_data(&fb.pixels).expect("png data to memory");
            }
            out
        }
    }
}

/// Decodes PNG (8-bit RGB) or binary PPM, detected from the magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<Framebuffer> {
    if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else if bytes.starts_with(b"\x89PNG") {
        let dec = png::Decoder::new(std::io::Cursor::new(bytes));
        let mut reader = dec.read_info().map_err(|e| Error::parse("png", e.to_string()))?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader.next_frame(&mut buf).map_err(|e| Error::parse("png", e.to_string()))?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(Error::parse("png", "only 8-bit RGB images are supported"));
        }
        buf.truncate(info.buffer_size());
        Framebuffer::from_raw(info.width, info.height, buf)
    } else {
        Err(Error::parse("image", "unrecognized image format"))
    }
}

fn decode_ppm(bytes: &[u8]) -> Result<Framebuffer> {
    // header: magic, width, height, maxval, separated by whitespace; comments skipped
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse("ppm", "truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or(""));
    }
    pos += 1; // single whitespace before raster
    let num = |i: usize| {
        fields[i].parse::<u32>().map_err(|_| Error::parse("ppm", format!("bad header field '{}'", fields[i])))
    };
    let (w, h, maxval) = (num(1)?, num(2)?, num(3)?);
    if maxval != 255 {
        return Err(Error::parse("ppm", "only maxval 255 is supported"));
    }
    let raster = bytes.get(pos..).ok_or_else(|| Error::parse("ppm", "missing raster"))?;
    Framebuffer::from_raw(w, h, raster.to_vec())
}

/// `dir/frame_000042.png`
pub fn frame_path(dir: &Path, index: u64, format: ImageFormat) -> PathBuf {
    dir.join(format!("frame_{index:06}.{}", format.extension()))
}

pub fn write_image(path: &Path, fb: &Framebuffer, format: ImageFormat) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(&encode_image(fb, format)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
