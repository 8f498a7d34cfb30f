// SPDX-License-Identifier: Apache-2.0

//! Row-major rasters and their PNG interchange format.
//!
//! RGB images are 8-bit PNG. Depth images and label maps are 16-bit grayscale
//! PNG holding millimeters and class ids respectively; 8-bit grayscale is
//! accepted on decode and read as raw values, never rescaled.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::taxonomy::ClassTaxonomy;

fn check_dims(width: u32, height: u32, len: usize, what: &str) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid_input(format!("{what} has zero dimension {width}x{height}")));
    }
    let expected = width as usize * height as usize;
    if len != expected {
        return Err(Error::invalid_input(format!(
            "{what} {width}x{height} needs {expected} values, got {len}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len(), "rgb image")?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let w = self.width;
        self.pixels[(y * w + x) as usize] = rgb;
    }

    /// Copies the `w`x`h` window at (`x`, `y`). The window must lie inside
    /// the image and be non-empty.
    pub fn sub_image(&self, x: u32, y: u32, w: u32, h: u32) -> Result<RgbImage> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::invalid_input(format!(
                "window ({x},{y},{w},{h}) outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(w as usize * h as usize);
        for row in y..y + h {
            let start = (row * self.width + x) as usize;
            pixels.extend_from_slice(&self.pixels[start..start + w as usize]);
        }
        RgbImage::new(w, h, pixels)
    }

    /// Hex SHA-256 over dimensions and pixel bytes.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.width.to_le_bytes());
        hasher.update(self.height.to_le_bytes());
        hasher.update(self.pixels.as_flattened());
        hex::encode(hasher.finalize())
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
            ImageBuffer::from_raw(self.width, self.height, self.pixels.as_flattened().to_vec())
                .expect("buffer length checked at construction");
        encode_png(DynamicImage::ImageRgb8(buf))
    }

    /// Decodes any format the `image` crate reads (PNG, JPEG) into 8-bit RGB.
    pub fn from_encoded(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes)?.to_rgb8();
        let (w, h) = img.dimensions();
        let pixels = img.pixels().map(|p| p.0).collect();
        RgbImage::new(w, h, pixels)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_encoded(&std::fs::read(path)?)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }
}

/// Depth in millimeters; 0 means no reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    depth: Vec<u16>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, depth: Vec<u16>) -> Result<Self> {
        check_dims(width, height, depth.len(), "depth image")?;
        Ok(Self { width, height, depth })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u16] {
        &self.depth
    }

    pub fn at(&self, x: u32, y: u32) -> u16 {
        self.depth[(y * self.width + x) as usize]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        encode_gray16(self.width, self.height, &self.depth)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self> {
        let (w, h, values) = decode_gray16(bytes)?;
        DepthImage::new(w, h, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_png(&std::fs::read(path)?)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }
}

/// Per-pixel class ids emitted by a segmenter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<u16>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u16>) -> Result<Self> {
        check_dims(width, height, labels.len(), "label map")?;
        Ok(Self { width, height, labels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn at(&self, x: u32, y: u32) -> u16 {
        self.labels[(y * self.width + x) as usize]
    }

    /// Every label must be declared by `taxonomy`.
    pub fn validate(&self, taxonomy: &ClassTaxonomy) -> Result<()> {
        match self.labels.iter().find(|&&id| !taxonomy.contains(id)) {
            Some(id) => Err(Error::invalid_input(format!("label {id} not in taxonomy"))),
            None => Ok(()),
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        encode_gray16(self.width, self.height, &self.labels)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self> {
        let (w, h, values) = decode_gray16(bytes)?;
        LabelMap::new(w, h, values)
    }
}

fn encode_png(img: DynamicImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

fn encode_gray16(width: u32, height: u32, values: &[u16]) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width, height, values.to_vec()).expect("length checked");
    encode_png(DynamicImage::ImageLuma16(buf))
}

fn decode_gray16(bytes: &[u8]) -> Result<(u32, u32, Vec<u16>)> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
    let (w, h) = (img.width(), img.height());
    let values = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        other => {
            return Err(Error::invalid_input(format!(
                "expected grayscale PNG, got {:?}",
                other.color()
            )))
        }
    };
    Ok((w, h, values))
}
