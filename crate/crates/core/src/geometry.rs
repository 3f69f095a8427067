//! Ground-truth geometry and inpainting-mask placement.
//!
//! The camouflaged object is enclosed in its tight bounding box. The four box
//! edges, extended across the image, cut it into a 3×3 grid numbered 1..9 in
//! row-major order; region 5 is the box itself and is never touched. One of the
//! remaining eight regions is picked with a seeded shuffle and a centered
//! sub-rectangle of it becomes the inpainting mask.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Region indices eligible for inpainting, in their fixed pre-shuffle order.
pub const CANDIDATE_REGIONS: [u8; 8] = [1, 2, 3, 4, 6, 7, 8, 9];

/// Index of the region holding the camouflaged object.
pub const CENTER_REGION: u8 = 5;

/// Binary ground-truth label; `true` marks camouflaged foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidBuffer(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::InvalidBuffer(format!(
                "mask has {} bits, expected {expected}",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    /// Binarizes an 8-bit grayscale raster at `>= 128`.
    pub fn from_luma(width: u32, height: u32, values: &[u8]) -> Result<Self> {
        Self::new(width, height, values.iter().map(|&v| v >= 128).collect())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Grayscale rendering, 255 for foreground and 0 for background.
    pub fn to_luma(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

/// Axis-aligned rectangle in pixel units; zero extent is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    /// Exclusive right edge.
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height)
    }
}

/// Inclusive pixel bounds of the ground-truth foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    pub fn to_rect(&self) -> Rect {
        Rect::new(
            self.x_min,
            self.y_min,
            self.x_max - self.x_min + 1,
            self.y_max - self.y_min + 1,
        )
    }

    pub fn is_valid_for(&self, width: u32, height: u32) -> bool {
        self.x_min <= self.x_max
            && self.y_min <= self.y_max
            && self.x_max < width
            && self.y_max < height
    }
}

/// Minimal axis-aligned box containing every foreground bit.
pub fn tight_bbox(gt: &BinaryMask) -> Result<BoundingBox> {
    let mut bbox: Option<BoundingBox> = None;
    for y in 0..gt.height {
        let row = &gt.bits[y as usize * gt.width as usize..(y as usize + 1) * gt.width as usize];
        let Some(first) = row.iter().position(|&b| b) else {
            continue;
        };
        let last = row.iter().rposition(|&b| b).unwrap_or(first);
        let (first, last) = (first as u32, last as u32);
        bbox = Some(match bbox {
            None => BoundingBox {
                x_min: first,
                y_min: y,
                x_max: last,
                y_max: y,
            },
            Some(b) => BoundingBox {
                x_min: b.x_min.min(first),
                y_min: b.y_min,
                x_max: b.x_max.max(last),
                y_max: y,
            },
        });
    }
    bbox.ok_or(Error::NoForeground)
}

/// The 3×3 tiling induced by a bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub image_width: u32,
    pub image_height: u32,
    regions: [Rect; 9],
}

impl RegionGrid {
    /// Region by its 1-based index (1 = top-left, 5 = center, 9 = bottom-right).
    pub fn region(&self, index: u8) -> Rect {
        assert!(
            (1..=9).contains(&index),
            "region index {index} out of 1..=9"
        );
        self.regions[usize::from(index - 1)]
    }

    pub fn regions(&self) -> &[Rect; 9] {
        &self.regions
    }

    pub fn total_area(&self) -> u64 {
        u64::from(self.image_width) * u64::from(self.image_height)
    }
}

/// Splits the image along the four bounding-box edges.
///
/// Columns are `[0, x_min)`, `[x_min, x_max + 1)` and `[x_max + 1, width)`;
/// rows follow the same rule.
pub fn partition(width: u32, height: u32, bbox: &BoundingBox) -> Result<RegionGrid> {
    if !bbox.is_valid_for(width, height) {
        return Err(Error::InvalidConfig(format!(
            "bounding box {bbox:?} does not fit a {width}x{height} image"
        )));
    }
    let cols = [
        (0, bbox.x_min),
        (bbox.x_min, bbox.x_max + 1 - bbox.x_min),
        (bbox.x_max + 1, width - bbox.x_max - 1),
    ];
    let rows = [
        (0, bbox.y_min),
        (bbox.y_min, bbox.y_max + 1 - bbox.y_min),
        (bbox.y_max + 1, height - bbox.y_max - 1),
    ];
    let mut regions = [Rect::default(); 9];
    for (r, &(y, h)) in rows.iter().enumerate() {
        for (c, &(x, w)) in cols.iter().enumerate() {
            regions[r * 3 + c] = Rect::new(x, y, w, h);
        }
    }
    Ok(RegionGrid {
        image_width: width,
        image_height: height,
        regions,
    })
}

/// Mask-generation hyperparameters. Ratios are fractions of the total image
/// area except `ratio_mask`, which is the fraction of the (capped) region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskGenConfig {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_mask: f64,
    pub rng_seed: u64,
}

impl Default for MaskGenConfig {
    fn default() -> Self {
        Self {
            ratio_min: 0.0625,
            ratio_max: 0.25,
            ratio_mask: 0.75,
            rng_seed: 0,
        }
    }
}

impl MaskGenConfig {
    pub fn validate(&self) -> Result<()> {
        let Self {
            ratio_min,
            ratio_max,
            ratio_mask,
            ..
        } = *self;
        if !(ratio_min > 0.0 && ratio_min < ratio_max && ratio_max <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "expected 0 < ratio_min < ratio_max <= 1, got ratio_min={ratio_min}, ratio_max={ratio_max}"
            )));
        }
        if !(ratio_mask > 0.0 && ratio_mask <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "expected 0 < ratio_mask <= 1, got {ratio_mask}"
            )));
        }
        Ok(())
    }

    /// Regions must be strictly larger than this many pixels to be eligible.
    pub fn min_region_area(&self, total_area: u64) -> u64 {
        (self.ratio_min * total_area as f64).round() as u64
    }

    /// Region area beyond which the mask stops growing.
    pub fn max_region_area(&self, total_area: u64) -> u64 {
        (self.ratio_max * total_area as f64).round() as u64
    }

    /// Target mask area for a region of `region_area` pixels.
    pub fn target_mask_area(&self, region_area: u64, total_area: u64) -> u64 {
        let capped = region_area.min(self.max_region_area(total_area));
        (self.ratio_mask * capped as f64).round() as u64
    }
}

/// The chosen region and the centered rectangle to inpaint inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPlacement {
    pub region_index: u8,
    pub region_rect: Rect,
    pub mask_rect: Rect,
    pub region_area: u64,
    pub mask_area: u64,
}

/// Deterministic random stream for mask placement.
pub fn mask_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fisher–Yates shuffle drawing `u32` indices so the permutation is the same on
/// 32- and 64-bit targets.
pub fn shuffle_candidates<R: Rng + ?Sized>(rng: &mut R) -> [u8; 8] {
    let mut order = CANDIDATE_REGIONS;
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i as u32) as usize;
        order.swap(i, j);
    }
    order
}

/// Picks the inpainting mask: shuffle the eight candidates, take the first
/// region strictly larger than the minimum area, and center a mask covering
/// `ratio_mask` of `min(region_area, ratio_max * total_area)`.
pub fn select_mask<R: Rng + ?Sized>(
    grid: &RegionGrid,
    cfg: &MaskGenConfig,
    rng: &mut R,
) -> Result<MaskPlacement> {
    cfg.validate()?;
    let total = grid.total_area();
    let min_area = cfg.min_region_area(total);

    for index in shuffle_candidates(rng) {
        let region = grid.region(index);
        let region_area = region.area();
        if region_area <= min_area {
            continue;
        }
        let target = cfg.target_mask_area(region_area, total);
        let mask_rect = centered_rect(&region, target)?;
        return Ok(MaskPlacement {
            region_index: index,
            region_rect: region,
            mask_rect,
            region_area,
            mask_area: mask_rect.area(),
        });
    }
    Err(Error::NoEligibleRegion)
}

/// [`select_mask`] driven by `cfg.rng_seed`.
pub fn select_mask_seeded(grid: &RegionGrid, cfg: &MaskGenConfig) -> Result<MaskPlacement> {
    select_mask(grid, cfg, &mut mask_rng(cfg.rng_seed))
}

/// Centered sub-rectangle of `region` with roughly `target_area` pixels and
/// the region's aspect ratio.
///
/// The shorter side is scaled by `sqrt(target / area)` and rounded; the longer
/// side is then sized as `round(target / short)`. Rounding only the short side
/// keeps the area error below `1 / (2 * long side)`, i.e. under 2% whenever the
/// scaled region is at least 26 px on its long side. Offsets are floored.
pub fn centered_rect(region: &Rect, target_area: u64) -> Result<Rect> {
    let area = region.area();
    if area == 0 {
        return Err(Error::DegenerateRegion(format!(
            "region {region:?} has zero area"
        )));
    }
    if target_area == 0 || target_area > area {
        return Err(Error::DegenerateRegion(format!(
            "target area {target_area} outside (0, {area}]"
        )));
    }
    if target_area == area {
        return Ok(*region);
    }

    let scale = (target_area as f64 / area as f64).sqrt();
    let fit = |short: u32, long: u32| -> Option<(u32, u32)> {
        let short_new = ((f64::from(short) * scale).round() as u32).min(short);
        if short_new == 0 {
            return None;
        }
        let long_new = ((target_area as f64 / f64::from(short_new)).round() as u32).min(long);
        (long_new > 0).then_some((short_new, long_new))
    };
    let (w, h) = if region.w <= region.h {
        fit(region.w, region.h)
    } else {
        fit(region.h, region.w).map(|(h, w)| (w, h))
    }
    .ok_or_else(|| {
        Error::DegenerateRegion(format!(
            "target area {target_area} rounds to an empty rect in {region:?}"
        ))
    })?;

    Ok(Rect::new(
        region.x + (region.w - w) / 2,
        region.y + (region.h - h) / 2,
        w,
        h,
    ))
}
