//! HTTP client for the model service.
//!
//! Endpoints (JSON bodies, images as base64-encoded PNG):
//!
//! - `POST /v1/inpaint`: `{image, mask, prompt, seed, steps?, guidance?}` → `{image}`
//! - `POST /v1/score`: `{image, prompt}` → `{score}` with `score` in `[0, 1]`
//! - `GET /v1/health`: → `{status, generator, discriminator}`
//!
//! Errors come back as non-2xx responses carrying `{"error": "..."}`.
//! Connection failures, timeouts and 5xx/408/429 responses are retried with
//! doubling backoff; every retry repeats the same request (same seed).
//! Other non-2xx statuses and malformed bodies are protocol errors.

use std::thread;
use std::time::Duration;

use camdiff_core::backend::{DiscriminatorBackend, GeneratorBackend, InpaintRequest};
use camdiff_core::{BackendError, ImageBuffer};
use reqwest::blocking::Client;
use reqwest::{StatusCode, Url};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{PipelineError, Result};

pub mod wire {
    //! Request and response bodies shared by the client and any server.

    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use camdiff_core::compositor::{decode_rgb, encode_png, encode_png_gray};
    use camdiff_core::{BackendError, ImageBuffer, MaskRaster};
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct InpaintRequest {
        pub image: String,
        pub mask: String,
        pub prompt: String,
        pub seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub steps: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub guidance: Option<f32>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct InpaintResponse {
        pub image: String,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ScoreRequest {
        pub image: String,
        pub prompt: String,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ScoreResponse {
        pub score: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct HealthResponse {
        pub status: String,
        pub generator: String,
        pub discriminator: String,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ErrorResponse {
        pub error: String,
    }

    pub fn encode_image(image: &ImageBuffer) -> Result<String, BackendError> {
        let png = encode_png(image).map_err(|e| BackendError::Protocol(e.to_string()))?;
        Ok(STANDARD.encode(png))
    }

    pub fn encode_mask(mask: &MaskRaster) -> Result<String, BackendError> {
        let png = encode_png_gray(mask.width(), mask.height(), mask.values())
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
        Ok(STANDARD.encode(png))
    }

    pub fn decode_image(data: &str) -> Result<ImageBuffer, BackendError> {
        let bytes = STANDARD
            .decode(data)
            .map_err(|e| BackendError::Protocol(format!("invalid base64 image: {e}")))?;
        decode_rgb(&bytes).map_err(|e| BackendError::Protocol(format!("invalid PNG image: {e}")))
    }

    /// Decodes a base64 PNG mask into a `(width, height, values)` raster.
    pub fn decode_mask(data: &str) -> Result<MaskRaster, BackendError> {
        let bytes = STANDARD
            .decode(data)
            .map_err(|e| BackendError::Protocol(format!("invalid base64 mask: {e}")))?;
        let (w, h, values) = camdiff_core::compositor::decode_gray(&bytes)
            .map_err(|e| BackendError::Protocol(format!("invalid PNG mask: {e}")))?;
        MaskRaster::new(w, h, values).map_err(|e| BackendError::Protocol(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub base_url: Url,
    pub request_timeout: Duration,
    pub transport_retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff: Duration,
}

impl HttpBackendConfig {
    pub fn new(base_url: &str) -> Result<Self> {
        let mut base_url = Url::parse(base_url)
            .map_err(|e| PipelineError::Config(format!("invalid backend url {base_url:?}: {e}")))?;
        if !base_url.path().ends_with('/') {
            let path = format!("{}/", base_url.path());
            base_url.set_path(&path);
        }
        Ok(Self {
            base_url,
            request_timeout: Duration::from_secs(120),
            transport_retries: 2,
            backoff: Duration::from_millis(500),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.request_timeout.is_zero() {
            return Err(PipelineError::Config(
                "request timeout must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One client serving as both generator and discriminator. Cheap to share
/// across threads.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    cfg: HttpBackendConfig,
    client: Client,
}

impl HttpBackend {
    pub fn new(cfg: HttpBackendConfig) -> Result<Self> {
        cfg.validate()?;
        let client = Client::builder()
            .timeout(cfg.request_timeout)
            .build()
            .map_err(|e| PipelineError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { cfg, client })
    }

    pub fn config(&self) -> &HttpBackendConfig {
        &self.cfg
    }

    fn url(&self, path: &str) -> std::result::Result<Url, BackendError> {
        self.cfg
            .base_url
            .join(path)
            .map_err(|e| BackendError::Protocol(format!("bad endpoint {path}: {e}")))
    }

    fn call<T: DeserializeOwned>(
        &self,
        path: &str,
        body: Option<&impl Serialize>,
    ) -> std::result::Result<T, BackendError> {
        let url = self.url(path)?;
        let mut delay = self.cfg.backoff;
        let mut last = BackendError::Unavailable("no attempt made".into());

        for attempt in 0..=self.cfg.transport_retries {
            if attempt > 0 {
                log::debug!("retrying {url} in {delay:?} ({last})");
                thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
            let request = match body {
                Some(b) => self.client.post(url.clone()).json(b),
                None => self.client.get(url.clone()),
            };
            let response = match request.send() {
                Ok(r) => r,
                Err(e) => {
                    last = BackendError::Unavailable(format!("{url}: {e}"));
                    continue;
                }
            };
            let status = response.status();
            let text = match response.text() {
                Ok(t) => t,
                Err(e) => {
                    last = BackendError::Unavailable(format!("{url}: reading body: {e}"));
                    continue;
                }
            };
            if status.is_success() {
                return serde_json::from_str(&text).map_err(|e| {
                    BackendError::Protocol(format!("{url}: malformed response: {e}"))
                });
            }
            let message = serde_json::from_str::<wire::ErrorResponse>(&text)
                .map(|e| e.error)
                .unwrap_or(text);
            let err = format!("{url}: {status}: {message}");
            if is_retryable(status) {
                last = BackendError::Unavailable(err);
            } else {
                return Err(BackendError::Protocol(err));
            }
        }
        Err(last)
    }

    pub fn health(&self) -> std::result::Result<wire::HealthResponse, BackendError> {
        let health: wire::HealthResponse = self.call("v1/health", None::<&()>)?;
        if health.status != "ok" {
            return Err(BackendError::Unavailable(format!(
                "service reports status {:?}",
                health.status
            )));
        }
        Ok(health)
    }
}

fn is_retryable(status: StatusCode) -> bool {
    status.is_server_error()
        || status == StatusCode::REQUEST_TIMEOUT
        || status == StatusCode::TOO_MANY_REQUESTS
}

impl GeneratorBackend for HttpBackend {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> std::result::Result<ImageBuffer, BackendError> {
        let body = wire::InpaintRequest {
            image: wire::encode_image(req.masked)?,
            mask: wire::encode_mask(req.raster)?,
            prompt: req.prompt.to_owned(),
            seed: req.seed,
            steps: req.options.steps,
            guidance: req.options.guidance,
        };
        let resp: wire::InpaintResponse = self.call("v1/inpaint", Some(&body))?;
        let image = wire::decode_image(&resp.image)?;
        if image.dims() != req.masked.dims() {
            return Err(BackendError::Protocol(format!(
                "inpaint returned {:?}, requested {:?}",
                image.dims(),
                req.masked.dims()
            )));
        }
        Ok(image)
    }
}

impl DiscriminatorBackend for HttpBackend {
    fn score(&self, image: &ImageBuffer, prompt: &str) -> std::result::Result<f64, BackendError> {
        let body = wire::ScoreRequest {
            image: wire::encode_image(image)?,
            prompt: prompt.to_owned(),
        };
        let resp: wire::ScoreResponse = self.call("v1/score", Some(&body))?;
        if !(0.0..=1.0).contains(&resp.score) {
            return Err(BackendError::Protocol(format!(
                "score {} outside [0, 1]",
                resp.score
            )));
        }
        Ok(resp.score)
    }
}
