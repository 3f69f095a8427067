//! Raster plumbing around the inpainting call: resize to the working canvas,
//! cut the mask rectangle, and paste generated content back without touching
//! anything outside it.

use std::io::Cursor;

use image::imageops::{self, FilterType};
use image::{GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Rect};

/// Side length of the square canvas the generator works on.
pub const CANVAS_SIDE: u32 = 512;

/// Fill color for the region handed to the generator.
pub const CUT_FILL: [u8; 3] = [128, 128, 128];

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        let expected = 3 * width as usize * height as usize;
        if width == 0 || height == 0 || pixels.len() != expected {
            return Err(Error::InvalidBuffer(format!(
                "{width}x{height} RGB image needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        let n = width as usize * height as usize;
        Self::new(width, height, rgb.repeat(n))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        3 * (y as usize * self.width as usize + x as usize)
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.offset(x, y);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn fill_rect(&mut self, rect: &Rect, rgb: [u8; 3]) {
        for y in rect.y..rect.bottom() {
            for x in rect.x..rect.right() {
                self.set_pixel(x, y, rgb);
            }
        }
    }

    pub fn crop(&self, rect: &Rect) -> Result<Self> {
        check_rect(rect, self.width, self.height)?;
        let mut pixels = Vec::with_capacity(3 * rect.area() as usize);
        for y in rect.y..rect.bottom() {
            let start = self.offset(rect.x, y);
            pixels.extend_from_slice(&self.pixels[start..start + 3 * rect.w as usize]);
        }
        Self::new(rect.w, rect.h, pixels)
    }

    pub fn from_rgb_image(img: RgbImage) -> Self {
        let (width, height) = img.dimensions();
        Self {
            width,
            height,
            pixels: img.into_raw(),
        }
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length checked at construction")
    }
}

/// Single-channel mask handed to the generator: 255 marks pixels to inpaint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskRaster {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl MaskRaster {
    pub fn new(width: u32, height: u32, values: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width as usize * height as usize {
            return Err(Error::InvalidBuffer(format!(
                "{width}x{height} mask raster with {} values",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v != 0 && v != 255) {
            return Err(Error::InvalidBuffer(format!(
                "mask raster values must be 0 or 255, found {v}"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_rect(width: u32, height: u32, rect: &Rect) -> Result<Self> {
        check_rect(rect, width, height)?;
        let mut values = vec![0u8; width as usize * height as usize];
        for y in rect.y..rect.bottom() {
            let row = y as usize * width as usize;
            values[row + rect.x as usize..row + rect.right() as usize].fill(255);
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn is_fill(&self, x: u32, y: u32) -> bool {
        self.values[y as usize * self.width as usize + x as usize] == 255
    }

    /// Bounding rectangle of the 255-region, if any.
    pub fn fill_bounds(&self) -> Option<Rect> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.is_fill(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != u32::MAX).then(|| Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_raw(self.width, self.height, self.values.clone())
            .expect("buffer length checked at construction")
    }
}

fn check_rect(rect: &Rect, width: u32, height: u32) -> Result<()> {
    if rect.is_empty() {
        return Err(Error::DegenerateRegion(format!("{rect:?} has zero area")));
    }
    if !rect.fits_within(width, height) {
        return Err(Error::InvalidBuffer(format!(
            "{rect:?} exceeds {width}x{height} image"
        )));
    }
    Ok(())
}

/// Bilinear resample to `side × side`. Same-size input is returned unchanged.
pub fn resize_canvas(image: &ImageBuffer, side: u32) -> ImageBuffer {
    assert!(side >= 1, "canvas side must be positive");
    if image.width == side && image.height == side {
        return image.clone();
    }
    let resized = imageops::resize(&image.to_rgb_image(), side, side, FilterType::Triangle);
    ImageBuffer::from_rgb_image(resized)
}

/// Nearest-neighbor resample of a ground-truth mask, keeping it binary.
pub fn resize_mask(mask: &BinaryMask, side: u32) -> BinaryMask {
    assert!(side >= 1, "canvas side must be positive");
    if mask.width() == side && mask.height() == side {
        return mask.clone();
    }
    let gray = GrayImage::from_raw(mask.width(), mask.height(), mask.to_luma())
        .expect("mask dimensions are consistent");
    let resized = imageops::resize(&gray, side, side, FilterType::Nearest);
    BinaryMask::from_luma(side, side, resized.as_raw()).expect("resized mask is well formed")
}

/// Maps a rect from a `from_w × from_h` image onto the `side × side` canvas,
/// rounding each coordinate half-up.
pub fn map_rect(rect: &Rect, from_w: u32, from_h: u32, side: u32) -> Rect {
    let scale = |v: u32, from: u32| -> u32 {
        // floor(v * side / from + 1/2) in exact integer arithmetic.
        ((2 * u64::from(v) * u64::from(side) + u64::from(from)) / (2 * u64::from(from))) as u32
    };
    let x = scale(rect.x, from_w).min(side);
    let y = scale(rect.y, from_h).min(side);
    Rect::new(
        x,
        y,
        scale(rect.w, from_w).min(side - x),
        scale(rect.h, from_h).min(side - y),
    )
}

/// Paints `mask_rect` mid-gray and returns the raster marking it.
pub fn cut(image: &ImageBuffer, mask_rect: &Rect) -> Result<(ImageBuffer, MaskRaster)> {
    check_rect(mask_rect, image.width, image.height)?;
    let mut masked = image.clone();
    masked.fill_rect(mask_rect, CUT_FILL);
    let raster = MaskRaster::from_rect(image.width, image.height, mask_rect)?;
    Ok((masked, raster))
}

/// Generated pixels inside `mask_rect`, source pixels everywhere else.
pub fn paste_back(
    source: &ImageBuffer,
    generated: &ImageBuffer,
    mask_rect: &Rect,
) -> Result<ImageBuffer> {
    if source.dims() != generated.dims() {
        return Err(Error::DimensionMismatch {
            expected: source.dims(),
            actual: generated.dims(),
        });
    }
    check_rect(mask_rect, source.width, source.height)?;
    let mut out = source.clone();
    let span = 3 * mask_rect.w as usize;
    for y in mask_rect.y..mask_rect.bottom() {
        let start = source.offset(mask_rect.x, y);
        out.pixels[start..start + span].copy_from_slice(&generated.pixels[start..start + span]);
    }
    Ok(out)
}

pub fn encode_png(image: &ImageBuffer) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    image.to_rgb_image().write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

pub fn encode_png_gray(width: u32, height: u32, values: &[u8]) -> Result<Vec<u8>> {
    let gray = GrayImage::from_raw(width, height, values.to_vec())
        .ok_or_else(|| Error::InvalidBuffer(format!("{width}x{height} gray raster")))?;
    let mut buf = Cursor::new(Vec::new());
    gray.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

/// Decodes any enabled format to RGB.
pub fn decode_rgb(bytes: &[u8]) -> Result<ImageBuffer> {
    Ok(ImageBuffer::from_rgb_image(
        image::load_from_memory(bytes)?.to_rgb8(),
    ))
}

/// Decodes any enabled format to 8-bit grayscale; returns `(width, height, values)`.
pub fn decode_gray(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>)> {
    let gray = image::load_from_memory(bytes)?.to_luma8();
    let (w, h) = gray.dimensions();
    Ok((w, h, gray.into_raw()))
}
