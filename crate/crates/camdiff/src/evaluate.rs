//! Scoring a directory of prediction maps against ground truth, and the
//! Inception Score over stored classifier outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use camdiff_core::compositor::decode_gray;
use camdiff_core::metrics::{score_pair, MetricAccumulator, PairScores};
use camdiff_core::{BinaryMask, GrayMap, MetricReport, ProbVector};
use image::imageops::{self, FilterType};
use image::GrayImage;
use rayon::prelude::*;

use crate::error::{PipelineError, Result};

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: MetricReport,
    /// Per-image scores in file-name order.
    pub per_image: Vec<(String, PairScores)>,
    /// Predictions with no ground truth of the same stem.
    pub unpaired: Vec<PathBuf>,
}

fn png_stems(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(PipelineError::io(dir))? {
        let path = entry.map_err(PipelineError::io(dir))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if path.is_file() && is_png {
            if let Some(stem) = path.file_stem() {
                out.push((stem.to_string_lossy().into_owned(), path));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Loads a GT mask (binarized at 128) and a prediction map. Predictions of a
/// different size are bilinearly resized to the GT.
pub fn load_scoring_pair(pred: &Path, gt: &Path) -> Result<(GrayMap, BinaryMask)> {
    let (gw, gh, gt_values) = decode_gray(&fs::read(gt).map_err(PipelineError::io(gt))?)?;
    let (pw, ph, mut pred_values) = decode_gray(&fs::read(pred).map_err(PipelineError::io(pred))?)?;
    if (pw, ph) != (gw, gh) {
        let img = GrayImage::from_raw(pw, ph, pred_values).expect("decoded dims are consistent");
        pred_values = imageops::resize(&img, gw, gh, FilterType::Triangle).into_raw();
    }
    Ok((
        GrayMap::from_u8(gw, gh, &pred_values)?,
        BinaryMask::from_luma(gw, gh, &gt_values)?,
    ))
}

/// Scores every prediction whose stem has a GT partner.
pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path, workers: usize) -> Result<Evaluation> {
    for dir in [pred_dir, gt_dir] {
        if !dir.is_dir() {
            return Err(PipelineError::RootMissing(dir.to_path_buf()));
        }
    }
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    for (stem, pred) in png_stems(pred_dir)? {
        let gt = gt_dir.join(format!("{stem}.png"));
        if gt.is_file() {
            pairs.push((stem, pred, gt));
        } else {
            unpaired.push(pred);
        }
    }
    if pairs.is_empty() {
        return Err(PipelineError::EmptyDataset(pred_dir.to_path_buf()));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;
    let scored: Vec<Result<(String, PairScores)>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(stem, pred, gt)| {
                let (pred, gt) = load_scoring_pair(pred, gt)?;
                Ok((stem.clone(), score_pair(&pred, &gt)?))
            })
            .collect()
    });

    let mut acc = MetricAccumulator::default();
    let mut per_image = Vec::with_capacity(scored.len());
    for item in scored {
        let (stem, scores) = item?;
        acc.push(&scores);
        per_image.push((stem, scores));
    }
    Ok(Evaluation {
        report: acc.finish()?,
        per_image,
        unpaired,
    })
}

/// One-line report, four decimals per metric.
pub fn format_report(label: &str, report: &MetricReport) -> String {
    format!(
        "dataset={label} images={} mae={:.4} f_max={:.4} s_measure={:.4} e_max={:.4}",
        report.count, report.mae, report.f_max, report.s_measure, report.e_max
    )
}

/// Metric-per-row table: `Metric,<label>` then the M, F_m, S_m and E_m rows.
pub fn format_table(label: &str, report: &MetricReport) -> String {
    let mut out = format!("Metric,{label}\n");
    for (name, value) in [
        ("M", report.mae),
        ("F_m", report.f_max),
        ("S_m", report.s_measure),
        ("E_m", report.e_max),
    ] {
        let _ = writeln!(out, "{name},{value:.4}");
    }
    out
}

/// Reads one JSON array of class probabilities per line.
pub fn read_prob_vectors(path: &Path) -> Result<Vec<ProbVector>> {
    let text = fs::read_to_string(path).map_err(PipelineError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let probs: Vec<f64> =
            serde_json::from_str(line).map_err(|e| PipelineError::MalformedManifest {
                line: i + 1,
                message: e.to_string(),
            })?;
        out.push(
            ProbVector::new(probs).map_err(|e| PipelineError::MalformedManifest {
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(out)
}
