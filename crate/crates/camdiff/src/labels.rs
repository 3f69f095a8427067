//! Class names used as prompts when a filename carries no label.

use std::path::Path;

use crate::error::{PipelineError, Result};

/// The 69 camouflaged-object classes of COD10K, one per line.
pub const COD10K_CLASSES: &str = include_str!("../assets/cod10k_classes.txt");

pub fn parse_labels(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

pub fn default_labels() -> Vec<String> {
    parse_labels(COD10K_CLASSES)
}

pub fn load_labels(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
    let labels = parse_labels(&text);
    if labels.is_empty() {
        return Err(PipelineError::Config(format!(
            "label list {} is empty",
            path.display()
        )));
    }
    Ok(labels)
}
