//! Prediction-map metrics used for camouflaged / salient object detection,
//! plus the Inception Score over classifier outputs.
//!
//! Max-over-threshold metrics use the 256 thresholds `k / 255`, binarizing
//! with `value >= threshold`. Per-pixel values are bucketed once into a
//! 256-bin histogram so each threshold costs O(1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BinaryMask;

/// Number of binarization thresholds.
pub const THRESHOLDS: usize = 256;

/// Default F-measure weight.
pub const BETA2: f64 = 0.3;

/// Default object/region balance of the S-measure.
pub const S_ALPHA: f64 = 0.5;

const EPS: f64 = f64::EPSILON;

/// Row-major prediction map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width as usize * height as usize {
            return Err(Error::InvalidBuffer(format!(
                "{width}x{height} map with {} values",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidBuffer(format!(
                "map value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// 8-bit map scaled by `1 / 255`.
    pub fn from_u8(width: u32, height: u32, values: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            values.iter().map(|&v| f64::from(v) / 255.0).collect(),
        )
    }

    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            values: mask
                .bits()
                .iter()
                .map(|&b| f64::from(u8::from(b)))
                .collect(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_dims(pred: &GrayMap, gt: &BinaryMask) -> Result<()> {
    if (pred.width, pred.height) != (gt.width(), gt.height()) {
        return Err(Error::DimensionMismatch {
            expected: (gt.width(), gt.height()),
            actual: (pred.width, pred.height),
        });
    }
    Ok(())
}

/// Threshold value for level `k`.
#[inline]
pub fn threshold(k: usize) -> f64 {
    k as f64 / 255.0
}

/// Largest `k` with `v >= k / 255`.
#[inline]
fn level(v: f64) -> usize {
    let mut k = ((v * 255.0).floor().max(0.0) as usize).min(THRESHOLDS - 1);
    while k + 1 < THRESHOLDS && v >= threshold(k + 1) {
        k += 1;
    }
    while k > 0 && v < threshold(k) {
        k -= 1;
    }
    k
}

/// Cumulative counts: `tp[k]` / `fp[k]` are the foreground / background GT
/// pixels predicted positive at threshold `k`.
struct ThresholdCounts {
    tp: [u64; THRESHOLDS],
    fp: [u64; THRESHOLDS],
    gt_fg: u64,
    total: u64,
}

impl ThresholdCounts {
    fn new(pred: &GrayMap, gt: &BinaryMask) -> Self {
        let mut fg_hist = [0u64; THRESHOLDS];
        let mut bg_hist = [0u64; THRESHOLDS];
        for (&v, &g) in pred.values.iter().zip(gt.bits()) {
            let k = level(v);
            if g {
                fg_hist[k] += 1;
            } else {
                bg_hist[k] += 1;
            }
        }
        let mut tp = [0u64; THRESHOLDS];
        let mut fp = [0u64; THRESHOLDS];
        let (mut acc_fg, mut acc_bg) = (0, 0);
        for k in (0..THRESHOLDS).rev() {
            acc_fg += fg_hist[k];
            acc_bg += bg_hist[k];
            tp[k] = acc_fg;
            fp[k] = acc_bg;
        }
        Self {
            tp,
            fp,
            gt_fg: acc_fg,
            total: acc_fg + acc_bg,
        }
    }
}

/// Mean absolute error between `pred` and the `{0, 1}` ground truth.
pub fn mae(pred: &GrayMap, gt: &BinaryMask) -> Result<f64> {
    check_dims(pred, gt)?;
    let sum: f64 = pred
        .values
        .iter()
        .zip(gt.bits())
        .map(|(&p, &g)| (p - f64::from(u8::from(g))).abs())
        .sum();
    Ok(sum / pred.values.len() as f64)
}

/// Maximum F-measure over the 256 thresholds.
pub fn f_measure_max(pred: &GrayMap, gt: &BinaryMask, beta2: f64) -> Result<f64> {
    check_dims(pred, gt)?;
    let counts = ThresholdCounts::new(pred, gt);
    if counts.gt_fg == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let gt_fg = counts.gt_fg as f64;
    let best = (0..THRESHOLDS)
        .map(|k| {
            let tp = counts.tp[k] as f64;
            let positives = tp + counts.fp[k] as f64;
            let precision = if positives > 0.0 { tp / positives } else { 0.0 };
            let recall = tp / gt_fg;
            let denom = beta2 * precision + recall;
            if denom > 0.0 {
                (1.0 + beta2) * precision * recall / denom
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(best.clamp(0.0, 1.0))
}

/// Maximum enhanced-alignment measure over the 256 thresholds.
pub fn e_measure_max(pred: &GrayMap, gt: &BinaryMask) -> Result<f64> {
    check_dims(pred, gt)?;
    let counts = ThresholdCounts::new(pred, gt);
    let n = counts.total as f64;
    let gt_fg = counts.gt_fg as f64;
    let gt_mean = gt_fg / n;

    let best = (0..THRESHOLDS)
        .map(|k| {
            let fg_fg = counts.tp[k] as f64;
            let fg_bg = counts.fp[k] as f64;
            let pred_fg = fg_fg + fg_bg;
            let sum = if counts.gt_fg == 0 {
                n - pred_fg
            } else if counts.gt_fg == counts.total {
                pred_fg
            } else {
                let bg_fg = gt_fg - fg_fg;
                let bg_bg = n - pred_fg - bg_fg;
                let pred_mean = pred_fg / n;
                let (p1, p0) = (1.0 - pred_mean, -pred_mean);
                let (g1, g0) = (1.0 - gt_mean, -gt_mean);
                fg_fg * enhanced(p1, g1)
                    + fg_bg * enhanced(p1, g0)
                    + bg_fg * enhanced(p0, g1)
                    + bg_bg * enhanced(p0, g0)
            };
            sum / n
        })
        .fold(0.0, f64::max);
    Ok(best.clamp(0.0, 1.0))
}

/// Quadratic enhancement of the alignment between two bias-centered values.
#[inline]
fn enhanced(pred_centered: f64, gt_centered: f64) -> f64 {
    let align = 2.0 * pred_centered * gt_centered
        / (pred_centered * pred_centered + gt_centered * gt_centered + EPS);
    (align + 1.0) * (align + 1.0) / 4.0
}

/// Structure measure: `alpha * object + (1 - alpha) * region`, clamped to
/// `[0, 1]`. All-background GT scores `1 - mean(pred)`; all-foreground GT
/// scores `mean(pred)`.
pub fn s_measure(pred: &GrayMap, gt: &BinaryMask, alpha: f64) -> Result<f64> {
    check_dims(pred, gt)?;
    let n = pred.values.len() as f64;
    let fg = gt.foreground_count();
    let pred_mean = pred.values.iter().sum::<f64>() / n;
    let score = if fg == 0 {
        1.0 - pred_mean
    } else if fg == pred.values.len() {
        pred_mean
    } else {
        alpha * object_similarity(pred, gt) + (1.0 - alpha) * region_similarity(pred, gt)
    };
    Ok(score.clamp(0.0, 1.0))
}

/// Running mean and squared deviation over a stream of values.
#[derive(Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Sample standard deviation, 0 for fewer than two values.
    fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

fn object_similarity(pred: &GrayMap, gt: &BinaryMask) -> f64 {
    let mut fg = Moments::default();
    let mut bg = Moments::default();
    for (&p, &g) in pred.values.iter().zip(gt.bits()) {
        if g {
            fg.push(p);
        } else {
            bg.push(1.0 - p);
        }
    }
    let score = |m: &Moments| 2.0 * m.mean / (m.mean * m.mean + 1.0 + m.std() + EPS);
    let u = fg.count as f64 / (fg.count + bg.count) as f64;
    u * score(&fg) + (1.0 - u) * score(&bg)
}

/// Split point about the GT centroid: `round_half_even(mean index) + 1` per axis.
fn centroid_split(gt: &BinaryMask) -> (u32, u32) {
    let (mut sx, mut sy, mut count) = (0u64, 0u64, 0u64);
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            if gt.get(x, y) {
                sx += u64::from(x);
                sy += u64::from(y);
                count += 1;
            }
        }
    }
    if count == 0 {
        return (
            (f64::from(gt.width()) / 2.0).round_ties_even() as u32 + 1,
            (f64::from(gt.height()) / 2.0).round_ties_even() as u32 + 1,
        );
    }
    let cx = (sx as f64 / count as f64).round_ties_even() as u32 + 1;
    let cy = (sy as f64 / count as f64).round_ties_even() as u32 + 1;
    (cx.min(gt.width()), cy.min(gt.height()))
}

fn region_similarity(pred: &GrayMap, gt: &BinaryMask) -> f64 {
    let (w, h) = (gt.width(), gt.height());
    let (cx, cy) = centroid_split(gt);
    let area = f64::from(w) * f64::from(h);
    let blocks = [
        (0, cx, 0, cy),
        (cx, w, 0, cy),
        (0, cx, cy, h),
        (cx, w, cy, h),
    ];
    let w1 = f64::from(cx) * f64::from(cy) / area;
    let w2 = f64::from(cy) * f64::from(w - cx) / area;
    let w3 = f64::from(h - cy) * f64::from(cx) / area;
    let weights = [w1, w2, w3, 1.0 - w1 - w2 - w3];

    blocks
        .iter()
        .zip(weights)
        .map(|(&(x0, x1, y0, y1), weight)| {
            if x0 == x1 || y0 == y1 {
                0.0
            } else {
                weight * block_ssim(pred, gt, x0, x1, y0, y1)
            }
        })
        .sum()
}

fn block_ssim(pred: &GrayMap, gt: &BinaryMask, x0: u32, x1: u32, y0: u32, y1: u32) -> f64 {
    let stride = pred.width as usize;
    let index = |x: u32, y: u32| y as usize * stride + x as usize;
    let n = f64::from(x1 - x0) * f64::from(y1 - y0);

    let (mut sp, mut sg) = (0.0, 0.0);
    for y in y0..y1 {
        for x in x0..x1 {
            sp += pred.values[index(x, y)];
            sg += f64::from(u8::from(gt.bits()[index(x, y)]));
        }
    }
    let (mp, mg) = (sp / n, sg / n);

    let (mut vp, mut vg, mut cov) = (0.0, 0.0, 0.0);
    for y in y0..y1 {
        for x in x0..x1 {
            let dp = pred.values[index(x, y)] - mp;
            let dg = f64::from(u8::from(gt.bits()[index(x, y)])) - mg;
            vp += dp * dp;
            vg += dg * dg;
            cov += dp * dg;
        }
    }
    let dof = (n - 1.0).max(1.0);
    let (vp, vg, cov) = (vp / dof, vg / dof, cov / dof);

    let num = 4.0 * mp * mg * cov;
    let den = (mp * mp + mg * mg) * (vp + vg);
    if num != 0.0 {
        num / (den + EPS)
    } else if den == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// One class-probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidBuffer(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidBuffer(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `exp(E_x[KL(p(y|x) || p(y))])` averaged over `splits` equal chunks; any
/// remainder after splitting is dropped.
pub fn inception_score(probs: &[ProbVector], splits: usize) -> Result<f64> {
    let first = probs.first().ok_or(Error::EmptyInput)?;
    let classes = first.len();
    if let Some(v) = probs.iter().find(|v| v.len() != classes) {
        return Err(Error::InconsistentClassCount {
            expected: classes,
            actual: v.len(),
        });
    }
    let splits = splits.max(1);
    let chunk = probs.len() / splits;
    if chunk == 0 {
        return Err(Error::EmptyInput);
    }

    let mut total = 0.0;
    for part in probs.chunks_exact(chunk).take(splits) {
        let mut marginal = vec![0.0; classes];
        for v in part {
            for (m, p) in marginal.iter_mut().zip(v.as_slice()) {
                *m += p;
            }
        }
        marginal.iter_mut().for_each(|m| *m /= part.len() as f64);

        let mean_kl = part
            .iter()
            .map(|v| {
                v.as_slice()
                    .iter()
                    .zip(&marginal)
                    .filter(|(&p, _)| p > 0.0)
                    .map(|(&p, &m)| p * (p / m).ln())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / part.len() as f64;
        total += mean_kl.exp();
    }
    Ok(total / splits as f64)
}

/// Scores of one prediction/GT pair. `f_max` is `None` for an empty GT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub mae: f64,
    pub f_max: Option<f64>,
    pub s_measure: f64,
    pub e_max: f64,
}

pub fn score_pair(pred: &GrayMap, gt: &BinaryMask) -> Result<PairScores> {
    Ok(PairScores {
        mae: mae(pred, gt)?,
        f_max: match f_measure_max(pred, gt, BETA2) {
            Ok(f) => Some(f),
            Err(Error::EmptyGroundTruth) => None,
            Err(e) => return Err(e),
        },
        s_measure: s_measure(pred, gt, S_ALPHA)?,
        e_max: e_measure_max(pred, gt)?,
    })
}

/// Dataset-level means of per-image scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub f_max: f64,
    pub s_measure: f64,
    pub e_max: f64,
    pub count: usize,
    /// Images left out of `f_max` because their GT was empty.
    pub f_excluded: usize,
}

/// Kahan-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Ordered reduction of [`PairScores`] into a [`MetricReport`].
#[derive(Debug, Clone, Default)]
pub struct MetricAccumulator {
    mae: KahanSum,
    f_max: KahanSum,
    s_measure: KahanSum,
    e_max: KahanSum,
    count: usize,
    f_count: usize,
}

impl MetricAccumulator {
    pub fn push(&mut self, s: &PairScores) {
        self.mae.add(s.mae);
        self.s_measure.add(s.s_measure);
        self.e_max.add(s.e_max);
        if let Some(f) = s.f_max {
            self.f_max.add(f);
            self.f_count += 1;
        }
        self.count += 1;
    }

    pub fn finish(&self) -> Result<MetricReport> {
        if self.count == 0 {
            return Err(Error::EmptyInput);
        }
        let n = self.count as f64;
        Ok(MetricReport {
            mae: self.mae.sum / n,
            f_max: if self.f_count == 0 {
                0.0
            } else {
                self.f_max.sum / self.f_count as f64
            },
            s_measure: self.s_measure.sum / n,
            e_max: self.e_max.sum / n,
            count: self.count,
            f_excluded: self.count - self.f_count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half_gt(w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, _| x < w / 2).unwrap()
    }

    fn constant(w: u32, h: u32, v: f64) -> GrayMap {
        GrayMap::new(w, h, vec![v; (w * h) as usize]).unwrap()
    }

    fn inverted(gt: &BinaryMask) -> GrayMap {
        GrayMap::new(
            gt.width(),
            gt.height(),
            gt.bits()
                .iter()
                .map(|&b| if b { 0.0 } else { 1.0 })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn level_matches_threshold_comparison() {
        for k in 0..THRESHOLDS {
            assert_eq!(level(threshold(k)), k);
        }
        for i in 0..=10_000 {
            let v = f64::from(i) / 10_000.0;
            let expected = (0..THRESHOLDS)
                .filter(|&k| v >= threshold(k))
                .max()
                .unwrap();
            assert_eq!(level(v), expected, "v = {v}");
        }
    }

    #[test]
    fn map_rejects_out_of_range() {
        assert!(GrayMap::new(1, 1, vec![1.5]).is_err());
        assert!(GrayMap::new(1, 1, vec![f64::NAN]).is_err());
        assert!(GrayMap::new(2, 1, vec![0.5]).is_err());
    }

    #[test]
    fn mae_fixtures() {
        let gt = half_gt(8, 6);
        assert_eq!(mae(&GrayMap::from_mask(&gt), &gt).unwrap(), 0.0);
        assert_eq!(mae(&inverted(&gt), &gt).unwrap(), 1.0);
        assert_eq!(mae(&constant(8, 6, 0.5), &gt).unwrap(), 0.5);
    }

    #[test]
    fn dimension_mismatch() {
        let gt = half_gt(8, 6);
        let pred = constant(6, 8, 0.5);
        assert!(matches!(
            mae(&pred, &gt),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(f_measure_max(&pred, &gt, BETA2).is_err());
        assert!(s_measure(&pred, &gt, S_ALPHA).is_err());
        assert!(e_measure_max(&pred, &gt).is_err());
    }

    #[test]
    fn f_measure_fixtures() {
        let gt = half_gt(16, 16);
        assert!((f_measure_max(&GrayMap::from_mask(&gt), &gt, BETA2).unwrap() - 1.0).abs() < 1e-12);
        let f = f_measure_max(&constant(16, 16, 1.0), &gt, BETA2).unwrap();
        assert!((f - 1.3 * 0.5 / (0.3 * 0.5 + 1.0)).abs() < 1e-12);
        let empty = BinaryMask::new(4, 4, vec![false; 16]).unwrap();
        assert!(matches!(
            f_measure_max(&constant(4, 4, 0.2), &empty, BETA2),
            Err(Error::EmptyGroundTruth)
        ));
    }

    #[test]
    fn all_zero_prediction_still_fires_at_threshold_zero() {
        // At t = 0 every pixel is predicted positive: P = 1/2, R = 1.
        let gt = half_gt(16, 16);
        let f = f_measure_max(&constant(16, 16, 0.0), &gt, BETA2).unwrap();
        assert!((f - 1.3 * 0.5 / (0.3 * 0.5 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn s_measure_fixtures() {
        let gt = half_gt(16, 16);
        assert!((s_measure(&GrayMap::from_mask(&gt), &gt, S_ALPHA).unwrap() - 1.0).abs() < 1e-6);
        let empty = BinaryMask::new(4, 4, vec![false; 16]).unwrap();
        assert_eq!(
            s_measure(&constant(4, 4, 0.0), &empty, S_ALPHA).unwrap(),
            1.0
        );
        assert!((s_measure(&constant(4, 4, 0.25), &empty, S_ALPHA).unwrap() - 0.75).abs() < 1e-12);
        let full = BinaryMask::new(4, 4, vec![true; 16]).unwrap();
        assert!((s_measure(&constant(4, 4, 0.25), &full, S_ALPHA).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn e_measure_fixtures() {
        let gt = BinaryMask::from_fn(16, 16, |x, y| x < 5 && y < 9).unwrap();
        assert!((e_measure_max(&GrayMap::from_mask(&gt), &gt).unwrap() - 1.0).abs() < 1e-6);
        let empty = BinaryMask::new(4, 4, vec![false; 16]).unwrap();
        assert!((e_measure_max(&constant(4, 4, 0.0), &empty).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_prediction_scores_low() {
        let gt = half_gt(16, 16);
        let inv = inverted(&gt);
        assert!(e_measure_max(&inv, &gt).unwrap() < 0.6);
        assert!(s_measure(&inv, &gt, S_ALPHA).unwrap() < 0.1);
    }

    #[test]
    fn inception_score_fixtures() {
        for n in [2usize, 10, 69] {
            let uniform: Vec<ProbVector> = (0..3 * n)
                .map(|_| ProbVector::new(vec![1.0 / n as f64; n]).unwrap())
                .collect();
            assert!((inception_score(&uniform, 1).unwrap() - 1.0).abs() < 1e-9);

            let one_hot: Vec<ProbVector> = (0..2 * n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i % n] = 1.0;
                    ProbVector::new(v).unwrap()
                })
                .collect();
            assert!((inception_score(&one_hot, 1).unwrap() - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn inception_score_two_class_hand_computed() {
        let probs: Vec<ProbVector> = [[0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9]]
            .iter()
            .map(|p| ProbVector::new(p.to_vec()).unwrap())
            .collect();
        // KL((.9,.1) || (.5,.5)) = .9 ln 1.8 + .1 ln .2, same for the mirror.
        let kl = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((inception_score(&probs, 1).unwrap() - kl.exp()).abs() < 1e-12);
        // Two splits of identical halves: the marginal of each split is the
        // vector itself, so each split scores 1.
        assert!((inception_score(&probs, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inception_score_errors() {
        assert!(matches!(inception_score(&[], 1), Err(Error::EmptyInput)));
        let probs = vec![
            ProbVector::new(vec![0.5, 0.5]).unwrap(),
            ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
        ];
        assert!(matches!(
            inception_score(&probs, 1),
            Err(Error::InconsistentClassCount { .. })
        ));
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn accumulator_excludes_empty_gt_from_f() {
        let mut acc = MetricAccumulator::default();
        acc.push(&PairScores {
            mae: 0.1,
            f_max: Some(0.8),
            s_measure: 0.9,
            e_max: 0.7,
        });
        acc.push(&PairScores {
            mae: 0.3,
            f_max: None,
            s_measure: 0.5,
            e_max: 0.9,
        });
        let r = acc.finish().unwrap();
        assert_eq!((r.count, r.f_excluded), (2, 1));
        assert!((r.mae - 0.2).abs() < 1e-12);
        assert!((r.f_max - 0.8).abs() < 1e-12);
        assert!(MetricAccumulator::default().finish().is_err());
    }

    fn transpose_map(m: &GrayMap) -> GrayMap {
        let (w, h) = (m.width(), m.height());
        let values = (0..w)
            .flat_map(|x| (0..h).map(move |y| (x, y)))
            .map(|(x, y)| m.values()[(y * w + x) as usize])
            .collect();
        GrayMap::new(h, w, values).unwrap()
    }

    fn transpose_mask(m: &BinaryMask) -> BinaryMask {
        BinaryMask::from_fn(m.height(), m.width(), |x, y| m.get(y, x)).unwrap()
    }

    fn arb_pair() -> impl Strategy<Value = (GrayMap, BinaryMask)> {
        (1u32..20, 1u32..20).prop_flat_map(|(w, h)| {
            let n = (w * h) as usize;
            (
                proptest::collection::vec(0u8..=255, n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(p, g)| {
                    (
                        GrayMap::from_u8(w, h, &p).unwrap(),
                        BinaryMask::new(w, h, g).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn metrics_in_unit_interval((pred, gt) in arb_pair()) {
            let s = score_pair(&pred, &gt).unwrap();
            for v in [s.mae, s.s_measure, s.e_max, s.f_max.unwrap_or(0.0)] {
                prop_assert!((0.0..=1.0).contains(&v), "{:?}", s);
            }
        }

        #[test]
        fn metrics_invariant_under_transpose((pred, gt) in arb_pair()) {
            let a = score_pair(&pred, &gt).unwrap();
            let b = score_pair(&transpose_map(&pred), &transpose_mask(&gt)).unwrap();
            prop_assert!((a.mae - b.mae).abs() < 1e-12);
            prop_assert!((a.s_measure - b.s_measure).abs() < 1e-9);
            prop_assert!((a.e_max - b.e_max).abs() < 1e-12);
            prop_assert_eq!(a.f_max.is_some(), b.f_max.is_some());
            if let (Some(x), Some(y)) = (a.f_max, b.f_max) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn binary_maps_keep_f_and_e_under_affine_rescale((_, gt) in arb_pair(), bits in proptest::collection::vec(any::<bool>(), 400)) {
            let n = (gt.width() * gt.height()) as usize;
            let binary: Vec<f64> = bits.iter().cycle().take(n).map(|&b| f64::from(u8::from(b))).collect();
            let pred = GrayMap::new(gt.width(), gt.height(), binary.clone()).unwrap();
            let shifted = GrayMap::new(
                gt.width(),
                gt.height(),
                binary.iter().map(|v| 0.5 + 0.5 * v).collect(),
            )
            .unwrap();
            // Both maps binarize to the same foreground above t = 0.5 and to all
            // ones below; the maxima coincide.
            prop_assert!((e_measure_max(&pred, &gt).unwrap() - e_measure_max(&shifted, &gt).unwrap()).abs() < 1e-12);
            if gt.foreground_count() > 0 {
                prop_assert!((f_measure_max(&pred, &gt, BETA2).unwrap() - f_measure_max(&shifted, &gt, BETA2).unwrap()).abs() < 1e-12);
            }
        }

        #[test]
        fn inception_score_at_least_one(raw in proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 5), 1..20)) {
            let probs: Vec<ProbVector> = raw
                .iter()
                .map(|v| {
                    let s: f64 = v.iter().sum();
                    ProbVector::new(v.iter().map(|p| p / s).collect()).unwrap()
                })
                .collect();
            prop_assert!(inception_score(&probs, 1).unwrap() >= 1.0 - 1e-12);
        }
    }
}
