//! Dataset scanning, the parallel synthesis run, and its manifest.
//!
//! Input layout is `<root>/Imgs/*.{jpg,png}` with ground truth in
//! `<root>/GT/<stem>.png`. The output mirrors it at canvas resolution:
//! `<out>/Imgs/<stem>.png` and `<out>/GT/<stem>.png`, plus
//! `<out>/manifest.jsonl` with one record per scanned pair.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use camdiff_core::backend::{DiscriminatorBackend, GeneratorBackend};
use camdiff_core::compositor::{decode_gray, decode_rgb, encode_png, encode_png_gray};
use camdiff_core::compositor::{resize_canvas, resize_mask};
use camdiff_core::geometry::{partition, select_mask, tight_bbox};
use camdiff_core::orchestrator::{prompt_for, synthesize_one};
use camdiff_core::seed::{item_seed, mix64};
use camdiff_core::{
    BinaryMask, ImageBuffer, PromptSource, Rect, SkipReason, SynthesisCase, SynthesisStatus,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::error::{PipelineError, Result};

pub const IMAGE_DIR: &str = "Imgs";
pub const GT_DIR: &str = "GT";
pub const MANIFEST_NAME: &str = "manifest.jsonl";

const IMAGE_EXTENSIONS: [&str; 3] = ["jpg", "jpeg", "png"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetLayout {
    pub root: PathBuf,
    pub image_dir: String,
    pub gt_dir: String,
}

impl DatasetLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            image_dir: IMAGE_DIR.into(),
            gt_dir: GT_DIR.into(),
        }
    }

    pub fn images(&self) -> PathBuf {
        self.root.join(&self.image_dir)
    }

    pub fn gts(&self) -> PathBuf {
        self.root.join(&self.gt_dir)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePair {
    pub stem: String,
    pub image: PathBuf,
    pub gt: PathBuf,
}

impl SamplePair {
    pub fn file_name(&self) -> String {
        self.image
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.stem.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanResult {
    /// Pairs ordered by image file name.
    pub pairs: Vec<SamplePair>,
    /// Images with no GT partner, or whose stem was already taken.
    pub unpaired: Vec<PathBuf>,
}

fn has_extension(path: &Path, allowed: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| allowed.iter().any(|a| a.eq_ignore_ascii_case(e)))
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(PipelineError::io(dir))? {
        let path = entry.map_err(PipelineError::io(dir))?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Pairs every image with `<gt_dir>/<stem>.png`.
pub fn scan(layout: &DatasetLayout) -> Result<ScanResult> {
    let images = layout.images();
    if !layout.root.is_dir() || !images.is_dir() {
        return Err(PipelineError::RootMissing(images));
    }
    let gts = layout.gts();
    let mut result = ScanResult::default();
    let mut seen = std::collections::HashSet::new();

    for image in sorted_files(&images)? {
        if !has_extension(&image, &IMAGE_EXTENSIONS) {
            continue;
        }
        let Some(stem) = image.file_stem().map(|s| s.to_string_lossy().into_owned()) else {
            continue;
        };
        let gt = gts.join(format!("{stem}.png"));
        if gt.is_file() && seen.insert(stem.clone()) {
            result.pairs.push(SamplePair { stem, image, gt });
        } else {
            result.unpaired.push(image);
        }
    }
    if result.pairs.is_empty() {
        return Err(PipelineError::EmptyDataset(layout.root.clone()));
    }
    Ok(result)
}

/// One line of the manifest. Paths are relative to the input root
/// (`source_path`) or the output root (`output_path`, `gt_path`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub source_path: String,
    pub status: SynthesisStatus,
    pub region_index: Option<u8>,
    /// `(x, y, w, h)` on the working canvas.
    pub mask_rect: Option<Rect>,
    pub prompt: Option<String>,
    pub base_seed: u64,
    pub attempts: u32,
    pub final_seed: Option<u64>,
    pub final_score: Option<f64>,
    pub output_path: Option<String>,
    pub gt_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub total: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub skipped: BTreeMap<String, u64>,
    pub acceptance_rate: f64,
    /// Attempt count → number of images, over images that reached the generator.
    pub attempts_histogram: BTreeMap<u32, u64>,
}

impl RunStats {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a ManifestRecord>) -> Self {
        let mut stats = RunStats::default();
        for r in records {
            stats.total += 1;
            match r.status {
                SynthesisStatus::Accepted => stats.accepted += 1,
                SynthesisStatus::Rejected => stats.rejected += 1,
                SynthesisStatus::Skipped(reason) => {
                    *stats.skipped.entry(reason.to_string()).or_default() += 1
                }
            }
            if r.attempts > 0 {
                *stats.attempts_histogram.entry(r.attempts).or_default() += 1;
            }
        }
        if stats.total > 0 {
            stats.acceptance_rate = stats.accepted as f64 / stats.total as f64;
        }
        stats
    }

    pub fn skipped_total(&self) -> u64 {
        self.skipped.values().sum()
    }

    pub fn skipped_for(&self, reason: SkipReason) -> u64 {
        self.skipped.get(reason.as_str()).copied().unwrap_or(0)
    }

    /// Images skipped because a backend failed or misbehaved.
    pub fn backend_failures(&self) -> u64 {
        SkipReason::ALL
            .iter()
            .filter(|r| r.is_backend_failure())
            .map(|&r| self.skipped_for(r))
            .sum()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "accepted {}/{}, rejected {}, skipped {}",
            self.accepted,
            self.total,
            self.rejected,
            self.skipped_total()
        );
        for (reason, n) in &self.skipped {
            s.push_str(&format!(", {reason} {n}"));
        }
        s
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let file = File::open(path).map_err(PipelineError::io(path))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(PipelineError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| PipelineError::MalformedManifest {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Recomputes run statistics from a manifest file.
pub fn stats(manifest: &Path) -> Result<RunStats> {
    let records = read_manifest(manifest)?;
    if records.is_empty() {
        return Err(PipelineError::EmptyDataset(manifest.to_path_buf()));
    }
    Ok(RunStats::from_records(&records))
}

/// Everything a run needs besides the dataset itself.
pub struct PipelineSettings {
    pub config: AppConfig,
    pub labels: Vec<String>,
    pub output: PathBuf,
    pub manifest: Option<PathBuf>,
}

impl PipelineSettings {
    pub fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| self.output.join(MANIFEST_NAME))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub stats: RunStats,
    pub manifest: PathBuf,
    pub unpaired: Vec<PathBuf>,
}

/// Base seed of the generator for an image; independent of the mask stream.
pub fn generator_seed(image_seed: u64) -> u64 {
    mix64(image_seed ^ 0x9e37_79b9_7f4a_7c15)
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

struct Job<'a> {
    layout: &'a DatasetLayout,
    settings: &'a PipelineSettings,
    prompts: PromptSource,
    generator: &'a dyn GeneratorBackend,
    discriminator: &'a dyn DiscriminatorBackend,
}

/// Reads an image and its GT and brings both to the working canvas.
pub fn load_pair(image: &Path, gt: &Path, side: u32) -> Result<(ImageBuffer, BinaryMask)> {
    let source = decode_rgb(&fs::read(image).map_err(PipelineError::io(image))?)?;
    let (w, h, values) = decode_gray(&fs::read(gt).map_err(PipelineError::io(gt))?)?;
    if (w, h) != source.dims() {
        return Err(camdiff_core::Error::DimensionMismatch {
            expected: source.dims(),
            actual: (w, h),
        }
        .into());
    }
    let mask = BinaryMask::from_luma(w, h, &values)?;
    Ok((resize_canvas(&source, side), resize_mask(&mask, side)))
}

impl Job<'_> {
    fn write(&self, relative_path: &str, bytes: &[u8]) -> Result<()> {
        let path = self.settings.output.join(relative_path);
        fs::write(&path, bytes).map_err(|source| PipelineError::OutputUnwritable { path, source })
    }

    /// Processes one pair. Per-image problems become `Skipped` records; only
    /// output failures are returned as errors.
    fn run(&self, pair: &SamplePair) -> Result<ManifestRecord> {
        let cfg = &self.settings.config;
        let name = pair.file_name();
        let image_seed = item_seed(cfg.orchestrator.seed, &name);
        let base_seed = generator_seed(image_seed);

        let mut record = ManifestRecord {
            source_path: relative(&pair.image, &self.layout.root),
            status: SynthesisStatus::Skipped(SkipReason::Decode),
            region_index: None,
            mask_rect: None,
            prompt: None,
            base_seed,
            attempts: 0,
            final_seed: None,
            final_score: None,
            output_path: None,
            gt_path: None,
            detail: None,
        };
        let skip = |mut record: ManifestRecord, err: &camdiff_core::Error| {
            record.status = SynthesisStatus::Skipped(SkipReason::from_error(err));
            record.detail = Some(err.to_string());
            record
        };

        let (source, gt) = match load_pair(&pair.image, &pair.gt, cfg.runtime.canvas_side) {
            Ok(loaded) => loaded,
            Err(PipelineError::Core(e)) => return Ok(skip(record, &e)),
            Err(e) => {
                record.detail = Some(e.to_string());
                return Ok(record);
            }
        };

        let gt_path = format!("{GT_DIR}/{}.png", pair.stem);
        self.write(
            &gt_path,
            &encode_png_gray(gt.width(), gt.height(), &gt.to_luma())?,
        )?;
        record.gt_path = Some(gt_path);
        let output_path = format!("{IMAGE_DIR}/{}.png", pair.stem);

        let prepared = prompt_for(&self.prompts, &name).and_then(|prompt| {
            let bbox = tight_bbox(&gt)?;
            let grid = partition(gt.width(), gt.height(), &bbox)?;
            let mask_cfg = cfg.mask_config(image_seed);
            let placement = select_mask(
                &grid,
                &mask_cfg,
                &mut camdiff_core::geometry::mask_rng(mask_cfg.rng_seed),
            )?;
            Ok((prompt, placement))
        });
        let (prompt, placement) = match prepared {
            Ok(p) => p,
            Err(e) => {
                self.write(&output_path, &encode_png(&source)?)?;
                record.output_path = Some(output_path);
                return Ok(skip(record, &e));
            }
        };
        record.prompt = Some(prompt.clone());
        record.region_index = Some(placement.region_index);
        record.mask_rect = Some(placement.mask_rect);

        let case = SynthesisCase {
            source,
            gt,
            placement,
            prompt,
        };
        let orch = cfg.orchestrator_config(base_seed);
        let (image, outcome) =
            match synthesize_one(&case, self.generator, self.discriminator, &orch) {
                Ok(done) => done,
                Err(e) => {
                    self.write(&output_path, &encode_png(&case.source)?)?;
                    record.output_path = Some(output_path);
                    return Ok(skip(record, &e));
                }
            };
        self.write(&output_path, &encode_png(&image)?)?;
        record.output_path = Some(output_path);
        record.status = outcome.status;
        record.attempts = outcome.attempts;
        record.final_seed = Some(outcome.final_seed);
        record.final_score = outcome.final_score;
        Ok(record)
    }
}

/// Runs the synthesis loop over every scanned pair on `workers` threads.
///
/// Records are written as soon as all earlier pairs are done, so the manifest
/// is always in scan order and identical across worker counts.
pub fn run_pipeline(
    layout: &DatasetLayout,
    generator: &dyn GeneratorBackend,
    discriminator: &dyn DiscriminatorBackend,
    settings: &PipelineSettings,
    workers: usize,
) -> Result<RunReport> {
    settings.config.validate()?;
    let scanned = scan(layout)?;
    for dir in [IMAGE_DIR, GT_DIR] {
        let path = settings.output.join(dir);
        fs::create_dir_all(&path)
            .map_err(|source| PipelineError::OutputUnwritable { path, source })?;
    }
    let manifest_path = settings.manifest_path();
    if let Some(parent) = manifest_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| PipelineError::OutputUnwritable {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let manifest =
        File::create(&manifest_path).map_err(|source| PipelineError::OutputUnwritable {
            path: manifest_path.clone(),
            source,
        })?;

    let job = Job {
        layout,
        settings,
        prompts: PromptSource::Auto {
            labels: settings.labels.clone(),
            seed: settings.config.orchestrator.seed,
        },
        generator,
        discriminator,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;

    let (tx, rx) = mpsc::channel::<(usize, ManifestRecord)>();
    let (written, failures) = std::thread::scope(|scope| {
        let writer = scope.spawn(move || write_in_order(manifest, &manifest_path, rx));
        let failures: Vec<PipelineError> = pool.install(|| {
            scanned
                .pairs
                .par_iter()
                .enumerate()
                .filter_map(|(i, pair)| match job.run(pair) {
                    Ok(record) => {
                        // The writer only disappears after an I/O error, which it reports.
                        let _ = tx.send((i, record));
                        None
                    }
                    Err(e) => Some(e),
                })
                .collect()
        });
        drop(tx);
        (writer.join().expect("manifest writer panicked"), failures)
    });
    if let Some(err) = failures.into_iter().next() {
        return Err(err);
    }
    let records = written?;
    Ok(RunReport {
        stats: RunStats::from_records(&records),
        manifest: settings.manifest_path(),
        unpaired: scanned.unpaired,
    })
}

fn write_in_order(
    file: File,
    path: &Path,
    rx: mpsc::Receiver<(usize, ManifestRecord)>,
) -> Result<Vec<ManifestRecord>> {
    let unwritable = |source| PipelineError::OutputUnwritable {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(file);
    let mut pending = BTreeMap::new();
    let mut records = Vec::new();
    for (index, record) in rx {
        pending.insert(index, record);
        while let Some(record) = pending.remove(&records.len()) {
            let line = serde_json::to_string(&record).expect("manifest records serialize");
            writeln!(out, "{line}").map_err(unwritable)?;
            records.push(record);
        }
    }
    out.flush().map_err(unwritable)?;
    // Anything left had a gap before it, i.e. a pair that failed fatally.
    records.extend(pending.into_values());
    Ok(records)
}
