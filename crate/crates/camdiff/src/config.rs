//! Run configuration.
//!
//! Values come from, in increasing precedence: built-in defaults, the TOML
//! file given with `--config`, the `CAMDIFF_BACKEND_URL` environment variable
//! (backend url only), and command-line flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use camdiff_core::backend::InpaintOptions;
use camdiff_core::compositor::CANVAS_SIDE;
use camdiff_core::{MaskGenConfig, OrchestratorConfig};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::http::HttpBackendConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub mask: MaskSection,
    pub orchestrator: OrchestratorSection,
    pub backend: BackendSection,
    pub runtime: RuntimeSection,
    pub paths: PathsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_mask: f64,
}

impl Default for MaskSection {
    fn default() -> Self {
        let d = MaskGenConfig::default();
        Self {
            ratio_min: d.ratio_min,
            ratio_max: d.ratio_max,
            ratio_mask: d.ratio_mask,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrchestratorSection {
    pub accept_threshold: f64,
    pub max_attempts: u32,
    pub seed: u64,
    pub steps: Option<u32>,
    pub guidance: Option<f32>,
}

impl Default for OrchestratorSection {
    fn default() -> Self {
        let d = OrchestratorConfig::default();
        Self {
            accept_threshold: d.accept_threshold,
            max_attempts: d.max_attempts,
            seed: 0,
            steps: None,
            guidance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub url: Option<String>,
    pub mock: bool,
    /// Constant score returned by the mock discriminator.
    pub mock_score: f64,
    pub timeout_secs: u64,
    pub transport_retries: u32,
    pub backoff_ms: u64,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            url: None,
            mock: false,
            mock_score: 1.0,
            timeout_secs: 120,
            transport_retries: 2,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeSection {
    /// Worker threads; logical CPU count when unset.
    pub workers: Option<usize>,
    pub canvas_side: u32,
}

impl Default for RuntimeSection {
    fn default() -> Self {
        Self {
            workers: None,
            canvas_side: CANVAS_SIDE,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Label list for prompt sampling; the bundled COD10K classes when unset.
    pub labels: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl AppConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: AppConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
        Self::from_toml(&text).map_err(|e| match e {
            PipelineError::Config(msg) => {
                PipelineError::Config(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.mask_config(0).validate()?;
        self.orchestrator_config(0).validate()?;
        if !(0.0..=1.0).contains(&self.backend.mock_score) {
            return Err(PipelineError::Config(format!(
                "backend.mock_score must be in [0, 1], got {}",
                self.backend.mock_score
            )));
        }
        if self.backend.timeout_secs == 0 {
            return Err(PipelineError::Config(
                "backend.timeout_secs must be positive".into(),
            ));
        }
        if self.runtime.canvas_side == 0 {
            return Err(PipelineError::Config(
                "runtime.canvas_side must be positive".into(),
            ));
        }
        if self.runtime.workers == Some(0) {
            return Err(PipelineError::Config(
                "runtime.workers must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn mask_config(&self, rng_seed: u64) -> MaskGenConfig {
        MaskGenConfig {
            ratio_min: self.mask.ratio_min,
            ratio_max: self.mask.ratio_max,
            ratio_mask: self.mask.ratio_mask,
            rng_seed,
        }
    }

    pub fn orchestrator_config(&self, base_seed: u64) -> OrchestratorConfig {
        OrchestratorConfig {
            accept_threshold: self.orchestrator.accept_threshold,
            max_attempts: self.orchestrator.max_attempts,
            base_seed,
            options: InpaintOptions {
                steps: self.orchestrator.steps,
                guidance: self.orchestrator.guidance,
            },
        }
    }

    pub fn http_config(&self, url: &str) -> Result<HttpBackendConfig> {
        let mut cfg = HttpBackendConfig::new(url)?;
        cfg.request_timeout = Duration::from_secs(self.backend.timeout_secs);
        cfg.transport_retries = self.backend.transport_retries;
        cfg.backoff = Duration::from_millis(self.backend.backoff_ms);
        Ok(cfg)
    }

    pub fn workers(&self) -> usize {
        self.runtime.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(usize::from)
                .unwrap_or(1)
        })
    }
}

/// Every config key with its default, for `--help`.
pub fn describe_keys() -> String {
    let d = AppConfig::default();
    let rows = [
        (
            "mask.ratio_min",
            d.mask.ratio_min.to_string(),
            "min region area / image area (strict)",
        ),
        (
            "mask.ratio_max",
            d.mask.ratio_max.to_string(),
            "region area / image area where mask growth stops",
        ),
        (
            "mask.ratio_mask",
            d.mask.ratio_mask.to_string(),
            "mask area / (capped) region area",
        ),
        (
            "orchestrator.accept_threshold",
            d.orchestrator.accept_threshold.to_string(),
            "minimum discriminator score to accept",
        ),
        (
            "orchestrator.max_attempts",
            d.orchestrator.max_attempts.to_string(),
            "generator seeds tried per image",
        ),
        (
            "orchestrator.seed",
            d.orchestrator.seed.to_string(),
            "global seed",
        ),
        (
            "orchestrator.steps",
            "unset".into(),
            "sampler steps forwarded to the generator",
        ),
        (
            "orchestrator.guidance",
            "unset".into(),
            "guidance scale forwarded to the generator",
        ),
        ("backend.url", "unset".into(), "model service base url"),
        (
            "backend.mock",
            d.backend.mock.to_string(),
            "use in-process mock backends",
        ),
        (
            "backend.mock_score",
            d.backend.mock_score.to_string(),
            "constant mock discriminator score",
        ),
        (
            "backend.timeout_secs",
            d.backend.timeout_secs.to_string(),
            "per-request timeout",
        ),
        (
            "backend.transport_retries",
            d.backend.transport_retries.to_string(),
            "retries after a transport failure",
        ),
        (
            "backend.backoff_ms",
            d.backend.backoff_ms.to_string(),
            "first retry delay, doubling",
        ),
        ("runtime.workers", "CPU count".into(), "parallel images"),
        (
            "runtime.canvas_side",
            d.runtime.canvas_side.to_string(),
            "working resolution (square)",
        ),
        (
            "paths.labels",
            "bundled COD10K classes".into(),
            "prompt label list, one per line",
        ),
        ("paths.output", "unset".into(), "output dataset root"),
    ];
    let mut out = String::from("Config keys (TOML sections; flags override file values):\n");
    for (key, default, help) in rows {
        out.push_str(&format!("  {key:<31} {default:<24} {help}\n"));
    }
    out
}
