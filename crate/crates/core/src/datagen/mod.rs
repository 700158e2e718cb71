//! Synthetic training data: molecule samples with group boxes and anchors,
//! reaction-diagram layouts in three archetypes, COCO-style annotation files
//! and SVG renderings.

mod dataset;
mod draw;
mod molecule;
mod reaction;
mod svg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coco::{normalize_box, normalize_point, Category, CocoAnnotation};
use crate::geometry::{BBox, Point};

pub use dataset::{
    parse_entry, parse_source, plan, write_dataset, DatasetSummary, GenerateConfig, Generator, Job, ManifestRecord, SourceEntry, SourceSet,
};
pub use draw::Primitive;
pub use molecule::gen_molecule_sample;
pub use reaction::gen_reaction_layout;
pub use svg::render_svg;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("cannot read structure {smiles:?}: {reason}")]
    Structure { smiles: String, reason: String },
    #[error("2D layout of {0:?} has overlapping atoms")]
    Layout(String),
    #[error("layout needs {width}x{height} px, more than the {max} px canvas limit")]
    Unplaceable { width: u32, height: u32, max: u32 },
    #[error("reaction needs at least one reactant and one product")]
    EmptyReaction,
    #[error("invalid mix {0:?}: need three non-negative weights summing to 1")]
    Mix(String),
    #[error("source line {line}: {reason}")]
    Source { line: usize, reason: String },
    #[error("{0}")]
    Decompose(String),
    #[error("writing {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Largest canvas side, in pixels.
pub const MAX_CANVAS: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Archetype {
    Linear,
    MultiLine,
    TreeGraph,
}

impl Archetype {
    pub const ALL: [Archetype; 3] = [Archetype::Linear, Archetype::MultiLine, Archetype::TreeGraph];

    pub fn name(self) -> &'static str {
        match self {
            Archetype::Linear => "Linear",
            Archetype::MultiLine => "MultiLine",
            Archetype::TreeGraph => "TreeGraph",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rendering presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Style {
    /// Thin strokes, sans-serif labels with hydrogens.
    Classic,
    /// Heavy strokes, bold labels with hydrogens.
    Bold,
    /// Hairline strokes, serif labels without hydrogen counts.
    Minimal,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::Classic, Style::Bold, Style::Minimal];

    pub fn name(self) -> &'static str {
        match self {
            Style::Classic => "Classic",
            Style::Bold => "Bold",
            Style::Minimal => "Minimal",
        }
    }

    /// Stroke width as a fraction of the bond length.
    pub fn stroke(self) -> f64 {
        match self {
            Style::Classic => 0.06,
            Style::Bold => 0.1,
            Style::Minimal => 0.04,
        }
    }

    pub fn font_family(self) -> &'static str {
        match self {
            Style::Classic | Style::Bold => "Helvetica, Arial, sans-serif",
            Style::Minimal => "Times New Roman, serif",
        }
    }

    pub fn font_weight(self) -> &'static str {
        match self {
            Style::Bold => "bold",
            _ => "normal",
        }
    }

    pub fn shows_hydrogens(self) -> bool {
        self != Style::Minimal
    }
}

/// Archetype probabilities, in [`Archetype::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mix(pub [f64; 3]);

impl Default for Mix {
    fn default() -> Self {
        Mix([0.70, 0.15, 0.15])
    }
}

impl Mix {
    pub fn new(weights: [f64; 3]) -> Result<Mix, DatagenError> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-6 {
            return Err(DatagenError::Mix(format!("{},{},{}", weights[0], weights[1], weights[2])));
        }
        Ok(Mix(weights))
    }

    /// Archetype of sample `index`.
    ///
    /// Uses the golden-ratio sequence shifted by the base seed, so every
    /// sample depends only on (seed, index) while counts over any prefix of
    /// n samples stay within a few units of n × probability.
    pub fn archetype(&self, base_seed: u64, index: u64) -> Archetype {
        const PHI: f64 = 0.618_033_988_749_894_9;
        let shift = (splitmix(base_seed) >> 11) as f64 / (1u64 << 53) as f64;
        let u = (index as f64 * PHI + shift).fract();
        let mut acc = 0.0;
        for (k, w) in self.0.iter().enumerate() {
            acc += w;
            if *w > 0.0 && u < acc {
                return Archetype::ALL[k];
            }
        }
        let last = (0..3).rev().find(|&k| self.0[k] > 0.0).unwrap_or(0);
        Archetype::ALL[last]
    }
}

impl FromStr for Mix {
    type Err = DatagenError;

    fn from_str(s: &str) -> Result<Mix, DatagenError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| DatagenError::Mix(s.to_string()))?;
        let [a, b, c] = parts[..] else {
            return Err(DatagenError::Mix(s.to_string()));
        };
        Mix::new([a, b, c])
    }
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `index` in a batch.
pub fn sample_seed(base_seed: u64, index: u64) -> u64 {
    base_seed ^ index
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub width: u32,
    pub height: u32,
    pub file_name: String,
}

/// One annotation in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleAnnotation {
    pub category: Category,
    pub bbox: BBox,
    /// Anchors only; stored with visibility 2.
    pub keypoint: Option<Point>,
    /// Anchors only: index of the owning FunctionalGroup annotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
}

impl SampleAnnotation {
    pub fn boxed(category: Category, bbox: BBox) -> SampleAnnotation {
        SampleAnnotation {
            category,
            bbox,
            keypoint: None,
            parent: None,
        }
    }

    /// Zero-area anchor annotation at `p` owned by annotation `parent`.
    pub fn anchor(p: Point, parent: usize) -> SampleAnnotation {
        SampleAnnotation {
            category: Category::Anchor,
            bbox: BBox::new_unchecked(p.x, p.y, p.x, p.y),
            keypoint: Some(p),
            parent: Some(parent),
        }
    }

    pub fn to_coco(&self, id: u64, image_id: u64) -> CocoAnnotation {
        CocoAnnotation {
            id,
            image_id,
            category_id: self.category.id(),
            bbox: self.bbox.to_xywh(),
            keypoints: self.keypoint.map(|p| [p.x, p.y, 2.0]),
        }
    }

    /// The same annotation in the 0–1000 frame of a `width` × `height` image.
    pub fn normalized(&self, width: u32, height: u32) -> SampleAnnotation {
        SampleAnnotation {
            category: self.category,
            bbox: normalize_box(self.bbox, width, height),
            keypoint: self.keypoint.map(|p| normalize_point(p, width, height)),
            parent: self.parent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Molecule,
    Reaction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: SampleKind,
    /// Input SMILES, or reaction SMILES for reaction samples.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archetype: Option<Archetype>,
    pub seed: u64,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSample {
    pub image: ImageSpec,
    pub annotations: Vec<SampleAnnotation>,
    pub provenance: Provenance,
    pub drawing: Vec<Primitive>,
}

impl DatasetSample {
    /// A sample with nothing drawn.
    pub fn blank(width: u32, height: u32, provenance: Provenance) -> DatasetSample {
        DatasetSample {
            image: ImageSpec {
                width,
                height,
                file_name: String::new(),
            },
            annotations: Vec::new(),
            provenance,
            drawing: Vec::new(),
        }
    }

    pub fn count(&self, category: Category) -> usize {
        self.annotations.iter().filter(|a| a.category == category).count()
    }

    pub fn of(&self, category: Category) -> impl Iterator<Item = &SampleAnnotation> {
        self.annotations.iter().filter(move |a| a.category == category)
    }
}

/// How far two boxes interpenetrate: the smaller side of their intersection,
/// zero when they are disjoint.
pub fn overlap_depth(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let iy = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    ix.min(iy)
}
