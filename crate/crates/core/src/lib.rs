//! Core building blocks for synthesizing salient objects into the background
//! of camouflaged-object-detection images without invalidating their labels.
//!
//! The crate is split along the data flow of a single synthesis:
//!
//! - [`geometry`]: tight bounding box of the ground truth, nine-region grid,
//!   and the seeded mask-placement procedure.
//! - [`compositor`]: raster helpers (resize, cut, paste back, PNG codec).
//! - [`backend`]: generator / discriminator traits and deterministic mocks.
//! - [`orchestrator`]: prompt selection and the generate, score, retry loop.
//! - [`metrics`]: MAE, max F-measure, S-measure, max E-measure and
//!   Inception Score.
//!
//! Everything here is a pure function of its inputs, so the crate compiles
//! for `wasm32-unknown-unknown` as well as native targets.

pub mod backend;
pub mod compositor;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod orchestrator;
pub mod seed;

pub use backend::{DiscriminatorBackend, GeneratorBackend, InpaintRequest};
pub use compositor::{ImageBuffer, MaskRaster};
pub use error::{BackendError, Error, Result};
pub use geometry::{BinaryMask, BoundingBox, MaskGenConfig, MaskPlacement, Rect, RegionGrid};
pub use metrics::{GrayMap, MetricReport, ProbVector};
pub use orchestrator::{
    OrchestratorConfig, PromptSource, SkipReason, SynthesisCase, SynthesisOutcome, SynthesisStatus,
};
