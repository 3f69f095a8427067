//! Deterministic in-process stand-ins for the generator and discriminator.

use std::sync::Mutex;

use super::{DiscriminatorBackend, GeneratorBackend, InpaintRequest};
use crate::compositor::ImageBuffer;
use crate::error::BackendError;
use crate::seed::{fnv1a64, mix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MockGeneratorMode {
    /// Paints a flat ellipse inscribed in the mask's bounding rectangle.
    #[default]
    FlatEllipse,
    /// Returns the masked input unchanged.
    Passthrough,
}

#[derive(Debug, Clone, Default)]
pub struct MockGenerator {
    pub mode: MockGeneratorMode,
}

impl MockGenerator {
    pub fn new(mode: MockGeneratorMode) -> Self {
        Self { mode }
    }

    /// Fill color for `(prompt, seed)`. Every channel lies in `[0, 63]` or
    /// `[192, 255]`, at least 64 away from the mid-gray cut fill.
    pub fn fill_color(prompt: &str, seed: u64) -> [u8; 3] {
        let h = mix64(fnv1a64(prompt.as_bytes()) ^ mix64(seed));
        let spread = |b: u8| if b < 128 { b / 2 } else { 192 + (b - 128) / 2 };
        [
            spread(h as u8),
            spread((h >> 8) as u8),
            spread((h >> 16) as u8),
        ]
    }
}

impl GeneratorBackend for MockGenerator {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<ImageBuffer, BackendError> {
        if (req.raster.width(), req.raster.height()) != req.masked.dims() {
            return Err(BackendError::Protocol(format!(
                "mask {}x{} does not match image {:?}",
                req.raster.width(),
                req.raster.height(),
                req.masked.dims()
            )));
        }
        let mut out = req.masked.clone();
        if self.mode == MockGeneratorMode::Passthrough {
            return Ok(out);
        }
        let Some(bounds) = req.raster.fill_bounds() else {
            return Ok(out);
        };
        let color = Self::fill_color(req.prompt, req.seed);
        let rx = f64::from(bounds.w) / 2.0;
        let ry = f64::from(bounds.h) / 2.0;
        let cx = f64::from(bounds.x) + rx;
        let cy = f64::from(bounds.y) + ry;
        for y in bounds.y..bounds.bottom() {
            for x in bounds.x..bounds.right() {
                let dx = (f64::from(x) + 0.5 - cx) / rx;
                let dy = (f64::from(y) + 0.5 - cy) / ry;
                if dx * dx + dy * dy <= 1.0 && req.raster.is_fill(x, y) {
                    out.set_pixel(x, y, color);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreMode {
    /// Scores consumed one per call, in order.
    Scripted(Vec<f64>),
    Constant(f64),
}

/// Mock discriminator. The scripted cursor is shared behind a mutex, so a
/// single instance can be handed to several workers.
#[derive(Debug)]
pub struct MockDiscriminator {
    mode: ScoreMode,
    cursor: Mutex<usize>,
}

impl MockDiscriminator {
    pub fn new(mode: ScoreMode) -> Self {
        Self {
            mode,
            cursor: Mutex::new(0),
        }
    }

    pub fn constant(score: f64) -> Self {
        Self::new(ScoreMode::Constant(score))
    }

    pub fn scripted(scores: impl Into<Vec<f64>>) -> Self {
        Self::new(ScoreMode::Scripted(scores.into()))
    }

    /// Number of scores handed out so far.
    pub fn calls(&self) -> usize {
        *self.cursor.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl DiscriminatorBackend for MockDiscriminator {
    fn score(&self, _image: &ImageBuffer, _prompt: &str) -> Result<f64, BackendError> {
        let mut cursor = self.cursor.lock().unwrap_or_else(|e| e.into_inner());
        let score = match &self.mode {
            ScoreMode::Constant(s) => *s,
            ScoreMode::Scripted(seq) => *seq.get(*cursor).ok_or(BackendError::ScriptExhausted)?,
        };
        *cursor += 1;
        Ok(score)
    }
}
