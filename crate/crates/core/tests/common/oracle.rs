//! Slow, literal reference implementations used to cross-check the library.
//!
//! Everything here works on plain `Vec`s with per-pixel loops and recomputes
//! from scratch at every threshold. Nothing is shared with the library code
//! beyond the random stream used for the region shuffle.
#![allow(dead_code)]

use camdiff_core::geometry::mask_rng;
use rand::Rng;

pub const EPS: f64 = f64::EPSILON;

/// Oracle mask placement: `(region index, region (x, y, w, h), mask (x, y, w, h))`,
/// or `None` when there is no foreground or no eligible region.
pub type Placement = (u8, [u32; 4], [u32; 4]);

pub fn bbox(w: usize, h: usize, gt: &[bool]) -> Option<[u32; 4]> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if gt[y * w + x] {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    any.then_some([x0 as u32, y0 as u32, x1 as u32, y1 as u32])
}

/// The nine regions for an inclusive bbox, row-major.
pub fn regions(w: u32, h: u32, b: [u32; 4]) -> [[u32; 4]; 9] {
    let xs = [0, b[0], b[2] + 1, w];
    let ys = [0, b[1], b[3] + 1, h];
    let mut out = [[0; 4]; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[r * 3 + c] = [xs[c], ys[r], xs[c + 1] - xs[c], ys[r + 1] - ys[r]];
        }
    }
    out
}

pub fn shuffled(seed: u64) -> Vec<u8> {
    let mut rng = mask_rng(seed);
    let mut order = vec![1u8, 2, 3, 4, 6, 7, 8, 9];
    let mut i = order.len() - 1;
    while i >= 1 {
        let j = rng.random_range(0..=i as u32) as usize;
        order.swap(i, j);
        i -= 1;
    }
    order
}

/// Centered rectangle: scale the short side by `sqrt(target / area)`, round,
/// then make the long side `round(target / short)`.
pub fn centered(region: [u32; 4], target: u64) -> [u32; 4] {
    let [x, y, w, h] = region;
    let area = u64::from(w) * u64::from(h);
    if target == area {
        return region;
    }
    let s = (target as f64 / area as f64).sqrt();
    let (mw, mh);
    if w <= h {
        mw = ((w as f64 * s).round() as u32).min(w);
        mh = ((target as f64 / mw as f64).round() as u32).min(h);
    } else {
        mh = ((h as f64 * s).round() as u32).min(h);
        mw = ((target as f64 / mh as f64).round() as u32).min(w);
    }
    [x + (w - mw) / 2, y + (h - mh) / 2, mw, mh]
}

pub fn place(
    w: u32,
    h: u32,
    gt: &[bool],
    seed: u64,
    ratio_min: f64,
    ratio_max: f64,
    ratio_mask: f64,
) -> Option<Placement> {
    let b = bbox(w as usize, h as usize, gt)?;
    place_in(w, h, b, seed, ratio_min, ratio_max, ratio_mask)
}

/// [`place`] for a known inclusive bbox `[x_min, y_min, x_max, y_max]`.
pub fn place_in(
    w: u32,
    h: u32,
    b: [u32; 4],
    seed: u64,
    ratio_min: f64,
    ratio_max: f64,
    ratio_mask: f64,
) -> Option<Placement> {
    let regions = regions(w, h, b);
    let total = f64::from(w) * f64::from(h);
    let min_area = (ratio_min * total).round() as u64;
    let max_area = (ratio_max * total).round() as u64;
    for index in shuffled(seed) {
        let r = regions[usize::from(index) - 1];
        let area = u64::from(r[2]) * u64::from(r[3]);
        if area > min_area {
            let target = (ratio_mask * area.min(max_area) as f64).round() as u64;
            return Some((index, r, centered(r, target)));
        }
    }
    None
}

fn binarize(pred: &[f64], t: f64) -> Vec<bool> {
    pred.iter().map(|&p| p >= t).collect()
}

pub fn mae(pred: &[f64], gt: &[bool]) -> f64 {
    let mut s = 0.0;
    for i in 0..pred.len() {
        s += (pred[i] - if gt[i] { 1.0 } else { 0.0 }).abs();
    }
    s / pred.len() as f64
}

pub fn f_max(pred: &[f64], gt: &[bool], beta2: f64) -> Option<f64> {
    if !gt.iter().any(|&g| g) {
        return None;
    }
    let mut best = 0.0f64;
    for k in 0..256 {
        let bin = binarize(pred, k as f64 / 255.0);
        let (mut tp, mut fp, mut fneg) = (0.0, 0.0, 0.0);
        for i in 0..gt.len() {
            match (bin[i], gt[i]) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fneg += 1.0,
                _ => {}
            }
        }
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = tp / (tp + fneg);
        let f = if beta2 * p + r > 0.0 {
            (1.0 + beta2) * p * r / (beta2 * p + r)
        } else {
            0.0
        };
        best = best.max(f);
    }
    Some(best)
}

/// Max over thresholds of the mean enhanced-alignment matrix.
pub fn e_max(pred: &[f64], gt: &[bool]) -> f64 {
    let n = gt.len() as f64;
    let g: Vec<f64> = gt.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let g_mean = g.iter().sum::<f64>() / n;
    let mut best = 0.0f64;
    for k in 0..256 {
        let bin: Vec<f64> = binarize(pred, k as f64 / 255.0)
            .into_iter()
            .map(|b| if b { 1.0 } else { 0.0 })
            .collect();
        let p_mean = bin.iter().sum::<f64>() / n;
        let mut sum = 0.0;
        for i in 0..gt.len() {
            let v = if g_mean == 0.0 {
                1.0 - bin[i]
            } else if g_mean == 1.0 {
                bin[i]
            } else {
                let a = bin[i] - p_mean;
                let b = g[i] - g_mean;
                let align = 2.0 * a * b / (a * a + b * b + EPS);
                (align + 1.0).powi(2) / 4.0
            };
            sum += v;
        }
        best = best.max(sum / n);
    }
    best
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_ddof1(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn s_object(values: &[f64]) -> f64 {
    let m = mean(values);
    2.0 * m / (m * m + 1.0 + std_ddof1(values) + EPS)
}

fn ssim(p: &[f64], g: &[f64]) -> f64 {
    let n = p.len() as f64;
    let (x, y) = (mean(p), mean(g));
    let dof = (n - 1.0).max(1.0);
    let sx = p.iter().map(|v| (v - x).powi(2)).sum::<f64>() / dof;
    let sy = g.iter().map(|v| (v - y).powi(2)).sum::<f64>() / dof;
    let sxy = p.iter().zip(g).map(|(a, b)| (a - x) * (b - y)).sum::<f64>() / dof;
    let alpha = 4.0 * x * y * sxy;
    let beta = (x * x + y * y) * (sx + sy);
    if alpha != 0.0 {
        alpha / (beta + EPS)
    } else if beta == 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn s_measure(w: usize, h: usize, pred: &[f64], gt: &[bool], alpha: f64) -> f64 {
    let g: Vec<f64> = gt.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let y_mean = mean(&g);
    let sm = if y_mean == 0.0 {
        1.0 - mean(pred)
    } else if y_mean == 1.0 {
        mean(pred)
    } else {
        let fg: Vec<f64> = (0..pred.len())
            .filter(|&i| gt[i])
            .map(|i| pred[i])
            .collect();
        let bg: Vec<f64> = (0..pred.len())
            .filter(|&i| !gt[i])
            .map(|i| 1.0 - pred[i])
            .collect();
        let object = y_mean * s_object(&fg) + (1.0 - y_mean) * s_object(&bg);

        let (mut sx, mut sy, mut c) = (0.0, 0.0, 0.0);
        for yy in 0..h {
            for xx in 0..w {
                if gt[yy * w + xx] {
                    sx += xx as f64;
                    sy += yy as f64;
                    c += 1.0;
                }
            }
        }
        let cx = (((sx / c).round_ties_even() as usize) + 1).min(w);
        let cy = (((sy / c).round_ties_even() as usize) + 1).min(h);
        let area = (w * h) as f64;
        let block = |x0: usize, x1: usize, y0: usize, y1: usize| {
            let mut p = Vec::new();
            let mut q = Vec::new();
            for yy in y0..y1 {
                for xx in x0..x1 {
                    p.push(pred[yy * w + xx]);
                    q.push(g[yy * w + xx]);
                }
            }
            if p.is_empty() {
                0.0
            } else {
                ssim(&p, &q)
            }
        };
        let w1 = (cx * cy) as f64 / area;
        let w2 = (cy * (w - cx)) as f64 / area;
        let w3 = ((h - cy) * cx) as f64 / area;
        let w4 = 1.0 - w1 - w2 - w3;
        let region = w1 * block(0, cx, 0, cy)
            + w2 * block(cx, w, 0, cy)
            + w3 * block(0, cx, cy, h)
            + w4 * block(cx, w, cy, h);
        alpha * object + (1.0 - alpha) * region
    };
    sm.clamp(0.0, 1.0)
}

/// Inception Score over equal splits, remainder dropped.
pub fn inception_score(probs: &[Vec<f64>], splits: usize) -> f64 {
    let chunk = probs.len() / splits;
    let mut total = 0.0;
    for s in 0..splits {
        let part = &probs[s * chunk..(s + 1) * chunk];
        let classes = part[0].len();
        let mut marg = vec![0.0; classes];
        for p in part {
            for c in 0..classes {
                marg[c] += p[c] / part.len() as f64;
            }
        }
        let mut kl = 0.0;
        for p in part {
            for c in 0..classes {
                if p[c] > 0.0 {
                    kl += p[c] * (p[c] / marg[c]).ln();
                }
            }
        }
        total += (kl / part.len() as f64).exp();
    }
    total / splits as f64
}
