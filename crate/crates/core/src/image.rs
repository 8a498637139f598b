//! Grayscale grids, binary edge maps and their file formats.
//!
//! Images are read from 8-bit PNG or PGM (ASCII P2 or binary P5); the
//! extension selects the encoder on write.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major grayscale image with `f64` samples (8-bit scale for loaded files).
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: f64) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Validation(format!(
                "{} samples for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Binary edge labels over an image grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    /// Like [`get`](Self::get) but false outside the grid.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&e| e).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&e| e)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Whether any edge pixel lies within Chebyshev distance `radius` of `(x, y)`.
    pub fn near_edge(&self, x: i64, y: i64, radius: i64) -> bool {
        (-radius..=radius).any(|dy| (-radius..=radius).any(|dx| self.get_signed(x + dx, y + dy)))
    }

    /// Pixels where the edge map is set, in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&e| if e { 255.0 } else { 0.0 }).collect(),
        }
    }

    /// Pixels with intensity ≥ 128 become edges.
    pub fn from_image(image: &GrayImage) -> Self {
        Self {
            width: image.width,
            height: image.height,
            data: image.data.iter().map(|&v| v >= 128.0).collect(),
        }
    }
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.into(),
        message: e.to_string(),
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    Ok(GrayImage {
        width: w as usize,
        height: h as usize,
        data: luma.as_raw().iter().map(|&v| v as f64).collect(),
    })
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Writes an 8-bit image; `.pgm` paths produce ASCII P2, everything else PNG.
pub fn save_gray(path: &Path, image: &GrayImage) -> Result<()> {
    let bytes: Vec<u8> = image.data.iter().map(|&v| to_u8(v)).collect();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        return save_pgm_ascii(path, image.width, image.height, &bytes);
    }
    let buf = image::GrayImage::from_raw(image.width as u32, image.height as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| Error::Image {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Writes an RGB image as PNG.
pub fn save_rgb(path: &Path, width: usize, height: usize, rgb: Vec<u8>) -> Result<()> {
    let buf = image::RgbImage::from_raw(width as u32, height as u32, rgb)
        .ok_or_else(|| Error::Validation("rgb buffer length mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| Error::Image {
        path: path.into(),
        message: e.to_string(),
    })
}

fn save_pgm_ascii(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in bytes.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
