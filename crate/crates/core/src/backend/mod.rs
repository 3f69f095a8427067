//! Generator and discriminator interfaces.
//!
//! Both are frozen, stateless models as far as the pipeline is concerned.
//! Implementations must be shareable across worker threads.

use std::sync::Arc;

use crate::compositor::{ImageBuffer, MaskRaster};
use crate::error::BackendError;

pub mod mock;

pub use mock::{MockDiscriminator, MockGenerator, MockGeneratorMode, ScoreMode};

/// Optional sampler knobs forwarded to the generator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InpaintOptions {
    pub steps: Option<u32>,
    pub guidance: Option<f32>,
}

#[derive(Debug, Clone, Copy)]
pub struct InpaintRequest<'a> {
    pub masked: &'a ImageBuffer,
    pub raster: &'a MaskRaster,
    pub prompt: &'a str,
    pub seed: u64,
    pub options: InpaintOptions,
}

pub trait GeneratorBackend: Send + Sync {
    /// Fills the 255-region of `req.raster`. The result must have the same
    /// dimensions as `req.masked`.
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<ImageBuffer, BackendError>;
}

pub trait DiscriminatorBackend: Send + Sync {
    /// Probability in `[0, 1]` that `image` depicts `prompt`.
    fn score(&self, image: &ImageBuffer, prompt: &str) -> Result<f64, BackendError>;
}

impl<T: GeneratorBackend + ?Sized> GeneratorBackend for &T {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<ImageBuffer, BackendError> {
        (**self).inpaint(req)
    }
}

impl<T: GeneratorBackend + ?Sized> GeneratorBackend for Box<T> {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<ImageBuffer, BackendError> {
        (**self).inpaint(req)
    }
}

impl<T: GeneratorBackend + ?Sized> GeneratorBackend for Arc<T> {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<ImageBuffer, BackendError> {
        (**self).inpaint(req)
    }
}

impl<T: DiscriminatorBackend + ?Sized> DiscriminatorBackend for &T {
    fn score(&self, image: &ImageBuffer, prompt: &str) -> Result<f64, BackendError> {
        (**self).score(image, prompt)
    }
}

impl<T: DiscriminatorBackend + ?Sized> DiscriminatorBackend for Box<T> {
    fn score(&self, image: &ImageBuffer, prompt: &str) -> Result<f64, BackendError> {
        (**self).score(image, prompt)
    }
}

impl<T: DiscriminatorBackend + ?Sized> DiscriminatorBackend for Arc<T> {
    fn score(&self, image: &ImageBuffer, prompt: &str) -> Result<f64, BackendError> {
        (**self).score(image, prompt)
    }
}
