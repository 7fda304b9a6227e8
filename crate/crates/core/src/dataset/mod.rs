//! Class-per-directory corpora, deterministic stratified splits, image
//! preprocessing and label auditing.

mod audit;
mod augment;
mod manifest;
mod split;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;

pub use audit::{audit_features, audit_labels, AuditFlag};
pub use augment::{augment, AugmentPolicy, Augmentation};
pub use manifest::{read_manifest, write_manifest};
pub use split::{split, SplitRatios};

/// Default side length images are resized to before extraction.
pub const DEFAULT_SIDE: u32 = 400;

const IMAGE_EXTENSIONS: [&str; 4] = ["jpg", "jpeg", "png", "bmp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Unassigned,
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Unassigned => "unassigned",
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "" | "unassigned" => Ok(Split::Unassigned),
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Format(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRef {
    pub path: PathBuf,
    pub class_id: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub samples: Vec<SampleRef>,
    pub class_names: Vec<String>,
    pub seed: u64,
    /// Files that looked like images but could not be decoded.
    pub skipped: Vec<PathBuf>,
}

impl LabeledDataset {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.class_id).collect()
    }

    pub fn indices_of(&self, split: Split) -> Vec<usize> {
        self.samples.iter().enumerate().filter(|(_, s)| s.split == split).map(|(i, _)| i).collect()
    }
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn decodable(path: &Path) -> bool {
    image::ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .ok()
        .and_then(|r| r.into_dimensions().ok())
        .is_some_and(|(w, h)| w > 0 && h > 0)
}

/// One class per subdirectory of `root`, classes and files in lexicographic
/// order. Files whose header cannot be decoded are listed in `skipped`.
pub fn scan_directory(root: &Path) -> Result<LabeledDataset> {
    if !root.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", root.display())));
    }
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if class_dirs.is_empty() {
        return Err(Error::Config(format!("{} has no class subdirectories", root.display())));
    }
    let mut samples = Vec::new();
    let mut class_names = Vec::with_capacity(class_dirs.len());
    let mut skipped = Vec::new();
    for (class_id, dir) in class_dirs.iter().enumerate() {
        let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let before = samples.len();
        for path in sorted_entries(dir)?.into_iter().filter(|p| p.is_file() && is_image_file(p)) {
            if decodable(&path) {
                samples.push(SampleRef { path, class_id, split: Split::Unassigned });
            } else {
                skipped.push(path);
            }
        }
        if samples.len() == before {
            return Err(Error::Config(format!("class directory {name:?} holds no decodable images")));
        }
        class_names.push(name);
    }
    Ok(LabeledDataset { samples, class_names, seed: 0, skipped })
}

/// Decode and bilinearly resample to `side`×`side`. Grayscale and
/// palette inputs come back as RGB.
pub fn load_and_resize(sample: &SampleRef, side: u32) -> Result<ImageBuffer> {
    let img = ImageBuffer::open(&sample.path)?;
    Ok(img.resize_bilinear(side, side))
}
