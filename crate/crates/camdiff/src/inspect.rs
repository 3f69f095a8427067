//! Mask placement for a single image, as the pipeline would choose it, with
//! an optional overlay for eyeballing the grid.

use std::path::Path;

use camdiff_core::compositor::encode_png;
use camdiff_core::geometry::{mask_rng, partition, select_mask, tight_bbox};
use camdiff_core::seed::item_seed;
use camdiff_core::{BoundingBox, ImageBuffer, MaskPlacement, Rect, RegionGrid};

use crate::config::AppConfig;
use crate::dataset::load_pair;
use crate::error::{PipelineError, Result};

const GRID_COLOR: [u8; 3] = [255, 214, 0];
const BBOX_COLOR: [u8; 3] = [230, 30, 30];
const MASK_COLOR: [u8; 3] = [20, 200, 60];

#[derive(Debug, Clone)]
pub struct Inspection {
    pub canvas: ImageBuffer,
    pub bbox: BoundingBox,
    pub grid: RegionGrid,
    pub placement: MaskPlacement,
}

/// Runs bbox, partition and mask selection on the canvas-sized pair, seeded
/// from the image's file name exactly like a synthesis run.
pub fn inspect(image: &Path, gt: &Path, config: &AppConfig) -> Result<Inspection> {
    let side = config.runtime.canvas_side;
    let (canvas, mask) = load_pair(image, gt, side)?;
    let name = image
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let seed = item_seed(config.orchestrator.seed, &name);
    let bbox = tight_bbox(&mask)?;
    let grid = partition(mask.width(), mask.height(), &bbox)?;
    let cfg = config.mask_config(seed);
    let placement = select_mask(&grid, &cfg, &mut mask_rng(cfg.rng_seed))?;
    Ok(Inspection {
        canvas,
        bbox,
        grid,
        placement,
    })
}

fn outline(image: &mut ImageBuffer, rect: &Rect, rgb: [u8; 3]) {
    if rect.is_empty() {
        return;
    }
    let (x1, y1) = (rect.right() - 1, rect.bottom() - 1);
    for x in rect.x..=x1 {
        image.set_pixel(x, rect.y, rgb);
        image.set_pixel(x, y1, rgb);
    }
    for y in rect.y..=y1 {
        image.set_pixel(rect.x, y, rgb);
        image.set_pixel(x1, y, rgb);
    }
}

impl Inspection {
    /// Canvas with the nine regions, the bbox and the mask rect outlined.
    pub fn overlay(&self) -> ImageBuffer {
        let mut out = self.canvas.clone();
        for region in self.grid.regions() {
            outline(&mut out, region, GRID_COLOR);
        }
        outline(&mut out, &self.bbox.to_rect(), BBOX_COLOR);
        outline(&mut out, &self.placement.mask_rect, MASK_COLOR);
        out
    }

    pub fn write_overlay(&self, path: &Path) -> Result<()> {
        let bytes = encode_png(&self.overlay())?;
        std::fs::write(path, bytes).map_err(|source| PipelineError::OutputUnwritable {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn describe(&self) -> String {
        let b = &self.bbox;
        let p = &self.placement;
        let r = &p.region_rect;
        let m = &p.mask_rect;
        format!(
            "bbox x={}..{} y={}..{}\nregion {} at ({}, {}) {}x{} area {}\nmask at ({}, {}) {}x{} area {}",
            b.x_min, b.x_max, b.y_min, b.y_max,
            p.region_index, r.x, r.y, r.w, r.h, p.region_area,
            m.x, m.y, m.w, m.h, p.mask_area
        )
    }
}
