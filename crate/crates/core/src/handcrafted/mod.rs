//! The nine handcrafted descriptor blocks and their 1305-value layout.
//!
//! Every extractor takes an image and a same-sized foreground mask. Blocks
//! that cannot be computed on an image (too few foreground pixels, no
//! keypoints) are emitted as zero vectors with `flagged` set by
//! [`extract_all`], so corpus extraction never stops on one bad image.

mod color;
mod gist;
mod orb;
mod orb_pattern;
mod shape;
mod sift;
mod texture;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use color::{extract_color_basic, extract_color_hist};
pub use gist::{extract_gist, gabor_kernel, GaborKernel};
pub use orb::{extract_orb, orb_keypoints, OrbKeypoint};
pub use shape::{convex_hull_area, extract_contour, extract_hu, hu_moments, largest_component, trace_perimeter};
pub use sift::{extract_sift, sift_descriptors, SiftKeypoint};
pub use texture::{extract_glcm, extract_lbp, glcm_matrix, lbp_code, lbp_class};

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::segmentation::Mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    ColorBasic,
    ColorHist,
    Contour,
    Hu,
    Glcm,
    Lbp,
    Orb,
    Sift,
    Gist,
}

impl BlockKind {
    pub const ALL: [BlockKind; 9] = [
        BlockKind::ColorBasic,
        BlockKind::ColorHist,
        BlockKind::Contour,
        BlockKind::Hu,
        BlockKind::Glcm,
        BlockKind::Lbp,
        BlockKind::Orb,
        BlockKind::Sift,
        BlockKind::Gist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BlockKind::ColorBasic => "color_basic",
            BlockKind::ColorHist => "color_hist",
            BlockKind::Contour => "contour",
            BlockKind::Hu => "hu",
            BlockKind::Glcm => "glcm",
            BlockKind::Lbp => "lbp",
            BlockKind::Orb => "orb",
            BlockKind::Sift => "sift",
            BlockKind::Gist => "gist",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            BlockKind::ColorBasic => 15,
            BlockKind::ColorHist => 1024,
            BlockKind::Contour => 5,
            BlockKind::Hu => 7,
            BlockKind::Glcm => 20,
            BlockKind::Lbp => 10,
            BlockKind::Orb => 32,
            BlockKind::Sift => 128,
            BlockKind::Gist => 64,
        }
    }

    /// Start of this block in the flat vector.
    pub fn offset(self) -> usize {
        BlockKind::ALL.iter().take_while(|&&k| k != self).map(|k| k.dim()).sum()
    }

    pub fn parse(s: &str) -> Option<BlockKind> {
        BlockKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn extract(self, img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
        match self {
            BlockKind::ColorBasic => extract_color_basic(img, mask),
            BlockKind::ColorHist => extract_color_hist(img, mask),
            BlockKind::Contour => extract_contour(img, mask),
            BlockKind::Hu => extract_hu(img, mask),
            BlockKind::Glcm => extract_glcm(img, mask),
            BlockKind::Lbp => extract_lbp(img, mask),
            BlockKind::Orb => extract_orb(img, mask),
            BlockKind::Sift => extract_sift(img, mask),
            BlockKind::Gist => extract_gist(img, mask),
        }
    }
}

pub const HANDCRAFTED_DIM: usize = 1305;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBlock {
    pub kind: BlockKind,
    pub values: Vec<f64>,
    /// Zero block standing in for an input the extractor could not describe.
    #[serde(default)]
    pub flagged: bool,
}

impl FeatureBlock {
    pub fn new(kind: BlockKind, values: Vec<f64>) -> Self {
        Self { kind, values, flagged: false }
    }

    pub fn zeros(kind: BlockKind) -> Self {
        Self { kind, values: vec![0.0; kind.dim()], flagged: true }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandcraftedVector {
    pub blocks: Vec<FeatureBlock>,
    pub flat: Vec<f64>,
}

impl HandcraftedVector {
    pub fn flagged(&self) -> Vec<BlockKind> {
        self.blocks.iter().filter(|b| b.flagged).map(|b| b.kind).collect()
    }
}

/// Concatenate the nine blocks in canonical order.
pub fn assemble(blocks: Vec<FeatureBlock>) -> Result<HandcraftedVector> {
    let mut slots: Vec<Option<FeatureBlock>> = vec![None; 9];
    for b in blocks {
        let i = BlockKind::ALL.iter().position(|&k| k == b.kind).expect("canonical kind");
        if slots[i].is_some() {
            return Err(Error::Layout(format!("duplicate block {}", b.name())));
        }
        if b.dim() != b.kind.dim() {
            return Err(Error::Layout(b.name().to_string()));
        }
        if b.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Layout(format!("{} has non-finite values", b.name())));
        }
        slots[i] = Some(b);
    }
    let missing: Vec<&str> =
        BlockKind::ALL.iter().zip(&slots).filter(|(_, s)| s.is_none()).map(|(k, _)| k.name()).collect();
    if !missing.is_empty() {
        return Err(Error::Layout(format!("missing {}", missing.join(", "))));
    }
    let blocks: Vec<FeatureBlock> = slots.into_iter().map(Option::unwrap).collect();
    let flat = blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
    Ok(HandcraftedVector { blocks, flat })
}

/// All nine blocks; degenerate inputs become flagged zero blocks.
pub fn extract_all(img: &ImageBuffer, mask: &Mask) -> Result<HandcraftedVector> {
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::Validation(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width(),
            mask.height(),
            img.width(),
            img.height()
        )));
    }
    let blocks = BlockKind::ALL
        .par_iter()
        .map(|k| match k.extract(img, mask) {
            Ok(b) => Ok(b),
            Err(Error::DegenerateInput(_)) => Ok(FeatureBlock::zeros(*k)),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(blocks)
}

/// Foreground pixel positions, row-major.
pub(crate) fn foreground(mask: &Mask) -> impl Iterator<Item = (u32, u32)> + '_ {
    let w = mask.width();
    mask.values().iter().enumerate().filter(|(_, &v)| v != 0).map(move |(i, _)| (i as u32 % w, i as u32 / w))
}

pub(crate) fn check_mask(img: &ImageBuffer, mask: &Mask) -> Result<()> {
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::Validation("mask and image sizes differ".into()));
    }
    Ok(())
}
