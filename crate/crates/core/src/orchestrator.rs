//! The per-image generate, score, retry loop.
//!
//! Attempts within one image are strictly sequential: attempt `k` uses seed
//! `base_seed + (k - 1)`, and the first attempt whose discriminator score
//! reaches the threshold is composited into the source. Backend failures are
//! reported as `Skipped`, never as `Rejected`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::backend::{DiscriminatorBackend, GeneratorBackend, InpaintOptions, InpaintRequest};
use crate::compositor::{cut, paste_back, ImageBuffer};
use crate::error::{BackendError, Error, Result};
use crate::geometry::{BinaryMask, MaskPlacement};
use crate::seed::item_seed;

/// Where the text prompt for an image comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PromptSource {
    /// Class token parsed from a COD10K filename; other names are an error.
    Labeled,
    /// Uniform draw from `labels`, seeded per filename.
    Sampled { labels: Vec<String>, seed: u64 },
    /// `Labeled` for COD10K filenames, `Sampled` for everything else.
    Auto { labels: Vec<String>, seed: u64 },
}

/// Class token of a COD10K filename such as
/// `COD10K-CAM-1-Aquatic-1-BatFish-2.jpg` (the sixth hyphen field).
pub fn parse_cod10k_class(filename: &str) -> Option<&str> {
    let name = filename.rsplit(['/', '\\']).next().unwrap_or(filename);
    let stem = name.rsplit_once('.').map_or(name, |(stem, _)| stem);
    let fields: Vec<&str> = stem.split('-').collect();
    match fields.as_slice() {
        ["COD10K", _, _, _, _, class, _] if !class.is_empty() => Some(class),
        _ => None,
    }
}

fn sample_label(labels: &[String], seed: u64, filename: &str) -> Result<String> {
    if labels.is_empty() {
        return Err(Error::InvalidConfig("label list is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed(seed, filename));
    let index = rng.random_range(0..labels.len() as u32) as usize;
    Ok(labels[index].clone())
}

pub fn prompt_for(source: &PromptSource, filename: &str) -> Result<String> {
    match source {
        PromptSource::Labeled => parse_cod10k_class(filename)
            .map(str::to_owned)
            .ok_or_else(|| Error::UnparsableFilename(filename.to_owned())),
        PromptSource::Sampled { labels, seed } => sample_label(labels, *seed, filename),
        PromptSource::Auto { labels, seed } => match parse_cod10k_class(filename) {
            Some(class) => Ok(class.to_owned()),
            None => sample_label(labels, *seed, filename),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrchestratorConfig {
    pub accept_threshold: f64,
    pub max_attempts: u32,
    /// Seed of the first attempt; attempt `k` uses `base_seed + k - 1`.
    pub base_seed: u64,
    pub options: InpaintOptions,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            accept_threshold: 0.5,
            max_attempts: 8,
            base_seed: 0,
            options: InpaintOptions::default(),
        }
    }
}

impl OrchestratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.accept_threshold) {
            return Err(Error::InvalidConfig(format!(
                "accept_threshold must be in [0, 1], got {}",
                self.accept_threshold
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig(
                "max_attempts must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn seed_for_attempt(&self, attempt: u32) -> u64 {
        self.base_seed
            .wrapping_add(u64::from(attempt.saturating_sub(1)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisCase {
    pub source: ImageBuffer,
    pub gt: BinaryMask,
    pub placement: MaskPlacement,
    pub prompt: String,
}

impl SynthesisCase {
    pub fn validate(&self) -> Result<()> {
        let dims = self.source.dims();
        if (self.gt.width(), self.gt.height()) != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: (self.gt.width(), self.gt.height()),
            });
        }
        let rect = self.placement.mask_rect;
        if rect.is_empty() || !rect.fits_within(dims.0, dims.1) {
            return Err(Error::InvalidConfig(format!(
                "mask rect {rect:?} invalid for {}x{} image",
                dims.0, dims.1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SkipReason {
    NoForeground,
    NoEligibleRegion,
    /// Generator or discriminator unreachable.
    Backend,
    /// Backend answered with an invalid response.
    Protocol,
    UnparsableFilename,
    /// Source image or mask could not be read.
    Decode,
}

impl SkipReason {
    pub const ALL: [SkipReason; 6] = [
        SkipReason::NoForeground,
        SkipReason::NoEligibleRegion,
        SkipReason::Backend,
        SkipReason::Protocol,
        SkipReason::UnparsableFilename,
        SkipReason::Decode,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::NoForeground => "NoForeground",
            SkipReason::NoEligibleRegion => "NoEligibleRegion",
            SkipReason::Backend => "Backend",
            SkipReason::Protocol => "Protocol",
            SkipReason::UnparsableFilename => "UnparsableFilename",
            SkipReason::Decode => "Decode",
        }
    }

    /// Reason for an error raised while preparing or running one image.
    pub fn from_error(err: &Error) -> Self {
        match err {
            Error::NoForeground => SkipReason::NoForeground,
            Error::NoEligibleRegion | Error::DegenerateRegion(_) => SkipReason::NoEligibleRegion,
            Error::UnparsableFilename(_) => SkipReason::UnparsableFilename,
            Error::Backend(e) => Self::from_backend(e),
            _ => SkipReason::Decode,
        }
    }

    pub fn from_backend(err: &BackendError) -> Self {
        match err {
            BackendError::Protocol(_) => SkipReason::Protocol,
            BackendError::Unavailable(_) | BackendError::ScriptExhausted => SkipReason::Backend,
        }
    }

    /// Whether the failure came from the model boundary rather than the data.
    pub fn is_backend_failure(&self) -> bool {
        matches!(self, SkipReason::Backend | SkipReason::Protocol)
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SkipReason {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SkipReason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown skip reason {s:?}"))
    }
}

/// Final state of one image. Serialized as `Accepted`, `Rejected` or
/// `Skipped(<reason>)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthesisStatus {
    Accepted,
    Rejected,
    Skipped(SkipReason),
}

impl fmt::Display for SynthesisStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisStatus::Accepted => f.write_str("Accepted"),
            SynthesisStatus::Rejected => f.write_str("Rejected"),
            SynthesisStatus::Skipped(r) => write!(f, "Skipped({r})"),
        }
    }
}

impl FromStr for SynthesisStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Accepted" => Ok(SynthesisStatus::Accepted),
            "Rejected" => Ok(SynthesisStatus::Rejected),
            _ => s
                .strip_prefix("Skipped(")
                .and_then(|rest| rest.strip_suffix(')'))
                .ok_or_else(|| format!("unknown status {s:?}"))?
                .parse()
                .map(SynthesisStatus::Skipped),
        }
    }
}

impl Serialize for SynthesisStatus {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SynthesisStatus {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOutcome {
    pub status: SynthesisStatus,
    pub attempts: u32,
    pub final_seed: u64,
    /// Last discriminator score, if any attempt got that far.
    pub final_score: Option<f64>,
    pub prompt: String,
    pub placement: MaskPlacement,
}

/// Runs the retry loop for one image.
///
/// The returned image equals `case.source` outside the mask rect for every
/// status; for anything but `Accepted` it is `case.source` itself.
pub fn synthesize_one<G, D>(
    case: &SynthesisCase,
    generator: &G,
    discriminator: &D,
    cfg: &OrchestratorConfig,
) -> Result<(ImageBuffer, SynthesisOutcome)>
where
    G: GeneratorBackend + ?Sized,
    D: DiscriminatorBackend + ?Sized,
{
    cfg.validate()?;
    case.validate()?;
    let rect = case.placement.mask_rect;
    let (masked, raster) = cut(&case.source, &rect)?;

    let outcome = |status, attempts, final_score| SynthesisOutcome {
        status,
        attempts,
        final_seed: cfg.seed_for_attempt(attempts),
        final_score,
        prompt: case.prompt.clone(),
        placement: case.placement,
    };
    let skipped = |err: &BackendError, attempts, score| {
        (
            case.source.clone(),
            outcome(
                SynthesisStatus::Skipped(SkipReason::from_backend(err)),
                attempts,
                score,
            ),
        )
    };

    let mut last_score = None;
    for attempt in 1..=cfg.max_attempts {
        let request = InpaintRequest {
            masked: &masked,
            raster: &raster,
            prompt: &case.prompt,
            seed: cfg.seed_for_attempt(attempt),
            options: cfg.options,
        };
        let generated = match generator.inpaint(&request) {
            Ok(img) if img.dims() == case.source.dims() => img,
            Ok(img) => {
                let err = BackendError::Protocol(format!(
                    "generator returned {:?}, expected {:?}",
                    img.dims(),
                    case.source.dims()
                ));
                return Ok(skipped(&err, attempt, last_score));
            }
            Err(err) => return Ok(skipped(&err, attempt, last_score)),
        };

        let crop = generated.crop(&rect)?;
        let score = match discriminator.score(&crop, &case.prompt) {
            Ok(s) if (0.0..=1.0).contains(&s) => s,
            Ok(s) => {
                let err = BackendError::Protocol(format!("score {s} outside [0, 1]"));
                return Ok(skipped(&err, attempt, last_score));
            }
            Err(err) => return Ok(skipped(&err, attempt, last_score)),
        };
        last_score = Some(score);

        if score >= cfg.accept_threshold {
            let composed = paste_back(&case.source, &generated, &rect)?;
            return Ok((
                composed,
                outcome(SynthesisStatus::Accepted, attempt, Some(score)),
            ));
        }
    }

    Ok((
        case.source.clone(),
        outcome(SynthesisStatus::Rejected, cfg.max_attempts, last_score),
    ))
}
