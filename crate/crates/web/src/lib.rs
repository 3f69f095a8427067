//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations, each with a plain Rust twin so they can be tested
//! natively: mask placement for a bounding box, a mock synthesis of a toy
//! scene, and the four saliency metrics on two 8-bit maps.

use camdiff_core::backend::mock::{MockDiscriminator, MockGenerator};
use camdiff_core::geometry::{partition, select_mask_seeded};
use camdiff_core::metrics::score_pair;
use camdiff_core::orchestrator::synthesize_one;
use camdiff_core::{
    BinaryMask, BoundingBox, GrayMap, ImageBuffer, MaskGenConfig, MaskPlacement,
    OrchestratorConfig, Rect, SynthesisCase,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct PlacementView {
    pub regions: Vec<Rect>,
    pub placement: MaskPlacement,
}

fn bbox(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> BoundingBox {
    BoundingBox {
        x_min,
        y_min,
        x_max,
        y_max,
    }
}

pub fn placement_for(
    width: u32,
    height: u32,
    b: BoundingBox,
    cfg: &MaskGenConfig,
) -> Result<PlacementView, camdiff_core::Error> {
    let grid = partition(width, height, &b)?;
    let placement = select_mask_seeded(&grid, cfg)?;
    Ok(PlacementView {
        regions: grid.regions().to_vec(),
        placement,
    })
}

/// Toy camouflage scene: a striped background with an ellipse object in the
/// box, tinted close to the background.
pub fn toy_scene(width: u32, height: u32, b: BoundingBox) -> (ImageBuffer, BinaryMask) {
    let r = b.to_rect();
    let (cx, cy) = (
        f64::from(r.x) + f64::from(r.w) / 2.0,
        f64::from(r.y) + f64::from(r.h) / 2.0,
    );
    let (rx, ry) = (f64::from(r.w) / 2.0, f64::from(r.h) / 2.0);
    let inside = |x: u32, y: u32| {
        let dx = (f64::from(x) + 0.5 - cx) / rx;
        let dy = (f64::from(y) + 0.5 - cy) / ry;
        dx * dx + dy * dy <= 1.0
    };
    // Pinning two opposite corners makes the tight bbox exactly `b`.
    let corners = [(b.x_min, b.y_min), (b.x_max, b.y_max)];
    let gt = BinaryMask::from_fn(width, height, |x, y| {
        inside(x, y) || corners.contains(&(x, y))
    })
    .expect("dims are positive");
    let mut image = ImageBuffer::filled(width, height, [0, 0, 0]).expect("dims are positive");
    for y in 0..height {
        for x in 0..width {
            let stripe = ((x + y) / 6) % 2 == 0;
            let base = if stripe { [96, 120, 70] } else { [110, 98, 64] };
            let px = if gt.get(x, y) {
                [base[0] + 12, base[1] + 6, base[2]]
            } else {
                base
            };
            image.set_pixel(x, y, px);
        }
    }
    (image, gt)
}

/// Runs one mock synthesis on the toy scene and returns RGBA pixels.
pub fn mock_synthesis(
    width: u32,
    height: u32,
    b: BoundingBox,
    cfg: &MaskGenConfig,
    prompt: &str,
) -> Result<(Vec<u8>, MaskPlacement), camdiff_core::Error> {
    let (source, gt) = toy_scene(width, height, b);
    let view = placement_for(width, height, b, cfg)?;
    let case = SynthesisCase {
        source,
        gt,
        placement: view.placement,
        prompt: prompt.to_owned(),
    };
    let orch = OrchestratorConfig {
        base_seed: cfg.rng_seed,
        ..OrchestratorConfig::default()
    };
    let (image, _) = synthesize_one(
        &case,
        &MockGenerator::default(),
        &MockDiscriminator::constant(1.0),
        &orch,
    )?;
    let rgba = image
        .as_bytes()
        .chunks_exact(3)
        .flat_map(|p| [p[0], p[1], p[2], 255])
        .collect();
    Ok((rgba, view.placement))
}

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn mask_cfg(seed: u32, ratio_min: f64, ratio_max: f64, ratio_mask: f64) -> MaskGenConfig {
    MaskGenConfig {
        ratio_min,
        ratio_max,
        ratio_mask,
        rng_seed: u64::from(seed),
    }
}

/// JSON `{regions: [Rect; 9], placement}` for an image and inclusive bbox.
#[wasm_bindgen(js_name = placeMask)]
#[allow(clippy::too_many_arguments)]
pub fn place_mask(
    width: u32,
    height: u32,
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
    seed: u32,
    ratio_min: f64,
    ratio_max: f64,
    ratio_mask: f64,
) -> Result<String, JsError> {
    let cfg = mask_cfg(seed, ratio_min, ratio_max, ratio_mask);
    let view =
        placement_for(width, height, bbox(x_min, y_min, x_max, y_max), &cfg).map_err(js_err)?;
    serde_json::to_string(&view).map_err(js_err)
}

/// RGBA pixels of the toy scene after one accepted mock synthesis.
#[wasm_bindgen(js_name = synthesizeScene)]
#[allow(clippy::too_many_arguments)]
pub fn synthesize_scene(
    width: u32,
    height: u32,
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
    seed: u32,
    ratio_min: f64,
    ratio_max: f64,
    ratio_mask: f64,
    prompt: &str,
) -> Result<Vec<u8>, JsError> {
    let cfg = mask_cfg(seed, ratio_min, ratio_max, ratio_mask);
    mock_synthesis(
        width,
        height,
        bbox(x_min, y_min, x_max, y_max),
        &cfg,
        prompt,
    )
    .map(|(rgba, _)| rgba)
    .map_err(js_err)
}

/// JSON `{mae, f_max, s_measure, e_max}` for an 8-bit prediction and GT
/// (GT binarized at 128).
#[wasm_bindgen(js_name = scoreMaps)]
pub fn score_maps(width: u32, height: u32, pred: &[u8], gt: &[u8]) -> Result<String, JsError> {
    let pred = GrayMap::from_u8(width, height, pred).map_err(js_err)?;
    let gt = BinaryMask::from_luma(width, height, gt).map_err(js_err)?;
    let scores = score_pair(&pred, &gt).map_err(js_err)?;
    serde_json::to_string(&scores).map_err(js_err)
}
