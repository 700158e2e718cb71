//! Reaction-diagram layouts: grouping elements into reactions, crop regions,
//! and assembling reaction records.

mod assemble;
mod ingest;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BBox, CANVAS_SIZE};

pub use assemble::{assemble_reactions, split_conditions, ReactionRecord, SolventLexicon, Structure, UNRECOGNIZED};
pub use ingest::{elements_from_coco, parse_elements};

#[derive(Debug, Error, PartialEq)]
pub enum ReactionError {
    #[error("element {index}: reaction_id must be >= 1")]
    ZeroReactionId { index: usize },
    #[error("element {index}: unknown role {role:?}")]
    UnknownRole { index: usize, role: String },
    #[error("element {index}: {source}")]
    Box {
        index: usize,
        source: crate::geometry::BoxError,
    },
    #[error("image {0} not found in annotation file")]
    MissingImage(u64),
    #[error("layout document: {0}")]
    Json(String),
}

/// The five diagram roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Reactant,
    Product,
    Condition,
    Arrow,
    Plus,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Reactant, Role::Product, Role::Condition, Role::Arrow, Role::Plus];

    pub fn name(self) -> &'static str {
        match self {
            Role::Reactant => "Reactant",
            Role::Product => "Product",
            Role::Condition => "Condition",
            Role::Arrow => "Arrow",
            Role::Plus => "Plus",
        }
    }

    /// Accepts singular and plural spellings, case-insensitively.
    pub fn parse(text: &str) -> Option<Role> {
        let t = text.trim().to_ascii_lowercase();
        Role::ALL.into_iter().find(|r| {
            let name = r.name().to_ascii_lowercase();
            t == name || t.strip_suffix('s') == Some(name.as_str())
        })
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramElement {
    pub reaction_id: u32,
    pub role: Role,
    pub bbox: BBox,
}

/// Element indices of one reaction, each role list in reading order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReactionGroup {
    pub reaction_id: u32,
    pub reactants: Vec<usize>,
    pub products: Vec<usize>,
    pub conditions: Vec<usize>,
    pub arrows: Vec<usize>,
    pub plus: Vec<usize>,
}

impl ReactionGroup {
    pub fn role(&self, role: Role) -> &[usize] {
        match role {
            Role::Reactant => &self.reactants,
            Role::Product => &self.products,
            Role::Condition => &self.conditions,
            Role::Arrow => &self.arrows,
            Role::Plus => &self.plus,
        }
    }

    fn role_mut(&mut self, role: Role) -> &mut Vec<usize> {
        match role {
            Role::Reactant => &mut self.reactants,
            Role::Product => &mut self.products,
            Role::Condition => &mut self.conditions,
            Role::Arrow => &mut self.arrows,
            Role::Plus => &mut self.plus,
        }
    }

    pub fn len(&self) -> usize {
        Role::ALL.iter().map(|&r| self.role(r).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub elements: Vec<DiagramElement>,
    pub reactions: Vec<ReactionGroup>,
    pub warnings: Vec<String>,
}

/// Row index per element: y-centers sorted and split wherever the gap exceeds
/// 1.5 × the median box height.
pub fn row_bands(boxes: &[BBox]) -> Vec<usize> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let mut heights: Vec<f64> = boxes.iter().map(|b| b.height()).collect();
    heights.sort_by(f64::total_cmp);
    let mid = heights.len() / 2;
    let median = if heights.len() % 2 == 0 {
        (heights[mid - 1] + heights[mid]) / 2.0
    } else {
        heights[mid]
    };
    let gap = 1.5 * median;
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[a].center().y.total_cmp(&boxes[b].center().y).then(a.cmp(&b)));
    let mut band = vec![0; boxes.len()];
    let mut current = 0;
    for w in 0..order.len() {
        if w > 0 && boxes[order[w]].center().y - boxes[order[w - 1]].center().y > gap {
            current += 1;
        }
        band[order[w]] = current;
    }
    band
}

/// Sorts element indices into reading order: row band, then center x, then
/// center y, then index.
pub fn reading_order(boxes: &[BBox]) -> Vec<usize> {
    let band = row_bands(boxes);
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (boxes[a].center(), boxes[b].center());
        band[a]
            .cmp(&band[b])
            .then(ca.x.total_cmp(&cb.x))
            .then(ca.y.total_cmp(&cb.y))
            .then(a.cmp(&b))
    });
    order
}

/// Buckets elements by reaction id and orders every role list.
///
/// An element listed under several reaction ids lands in each of them. A
/// reaction with an arrow but no reactant only produces a warning.
pub fn parse_layout(elements: &[DiagramElement]) -> Layout {
    let boxes: Vec<BBox> = elements.iter().map(|e| e.bbox).collect();
    let mut groups: BTreeMap<u32, ReactionGroup> = BTreeMap::new();
    for i in reading_order(&boxes) {
        let e = &elements[i];
        let g = groups.entry(e.reaction_id).or_insert_with(|| ReactionGroup {
            reaction_id: e.reaction_id,
            ..ReactionGroup::default()
        });
        g.role_mut(e.role).push(i);
    }
    let mut warnings = Vec::new();
    for g in groups.values() {
        if !g.arrows.is_empty() && g.reactants.is_empty() {
            warnings.push(format!("reaction {} has an arrow but no reactant", g.reaction_id));
        }
        if g.arrows.is_empty() {
            warnings.push(format!("reaction {} has no arrow", g.reaction_id));
        }
    }
    Layout {
        elements: elements.to_vec(),
        reactions: groups.into_values().collect(),
        warnings,
    }
}

/// Integer pixel rectangle, `x2`/`y2` exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }
}

fn crop_axis(lo: f64, hi: f64, size: u32) -> (u32, u32) {
    let s = f64::from(size) / CANVAS_SIZE;
    let max = f64::from(size);
    let a = (lo * s).floor().clamp(0.0, max) as u32;
    let b = (hi * s).ceil().clamp(0.0, max) as u32;
    if b > a {
        (a, b)
    } else if a < size {
        (a, a + 1)
    } else {
        (size.saturating_sub(1), size)
    }
}

/// De-normalizes a 0–1000 box into pixels of a `width` × `height` canvas,
/// rounding outward and clamping. The result is at least one pixel wide and
/// high whenever the canvas is.
pub fn crop(bbox: &BBox, width: u32, height: u32) -> PixelRect {
    let (x1, x2) = crop_axis(bbox.x1.min(bbox.x2), bbox.x1.max(bbox.x2), width);
    let (y1, y2) = crop_axis(bbox.y1.min(bbox.y2), bbox.y1.max(bbox.y2), height);
    PixelRect { x1, y1, x2, y2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(id: u32, role: Role, b: [f64; 4]) -> DiagramElement {
        DiagramElement {
            reaction_id: id,
            role,
            bbox: BBox::from(b),
        }
    }

    #[test]
    fn crop_examples() {
        let full = BBox::new_unchecked(0.0, 0.0, 1000.0, 1000.0);
        assert_eq!(crop(&full, 438, 149), PixelRect { x1: 0, y1: 0, x2: 438, y2: 149 });
        let q = BBox::new_unchecked(500.0, 500.0, 1000.0, 1000.0);
        assert_eq!(crop(&q, 200, 100), PixelRect { x1: 100, y1: 50, x2: 200, y2: 100 });
        let tiny = crop(&BBox::new_unchecked(0.0, 0.0, 1.0, 1.0), 10, 10);
        assert!(tiny.width() >= 1 && tiny.height() >= 1);
        let edge = crop(&BBox::new_unchecked(1000.0, 1000.0, 1000.0, 1000.0), 10, 10);
        assert_eq!(edge, PixelRect { x1: 9, y1: 9, x2: 10, y2: 10 });
    }

    #[test]
    fn empty_layout() {
        let l = parse_layout(&[]);
        assert!(l.reactions.is_empty());
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn chain_shares_intermediate() {
        let a = [10.0, 400.0, 150.0, 600.0];
        let b = [400.0, 400.0, 550.0, 600.0];
        let c = [800.0, 400.0, 950.0, 600.0];
        let els = vec![
            el(1, Role::Reactant, a),
            el(1, Role::Arrow, [200.0, 480.0, 350.0, 520.0]),
            el(1, Role::Product, b),
            el(2, Role::Reactant, b),
            el(2, Role::Arrow, [600.0, 480.0, 750.0, 520.0]),
            el(2, Role::Product, c),
        ];
        let l = parse_layout(&els);
        assert_eq!(l.reactions.len(), 2);
        assert_eq!(l.elements[l.reactions[0].products[0]].bbox, BBox::from(b));
        assert_eq!(l.elements[l.reactions[1].reactants[0]].bbox, BBox::from(b));
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn arrow_without_reactant_warns() {
        let els = vec![
            el(1, Role::Arrow, [200.0, 480.0, 350.0, 520.0]),
            el(1, Role::Product, [400.0, 400.0, 550.0, 600.0]),
        ];
        let l = parse_layout(&els);
        assert_eq!(l.reactions.len(), 1);
        assert_eq!(l.warnings.len(), 1);
    }

    #[test]
    fn rows_read_before_columns() {
        let els = vec![
            el(1, Role::Reactant, [600.0, 100.0, 800.0, 200.0]),
            el(1, Role::Reactant, [100.0, 500.0, 300.0, 600.0]),
            el(1, Role::Reactant, [100.0, 110.0, 300.0, 210.0]),
        ];
        let l = parse_layout(&els);
        assert_eq!(l.reactions[0].reactants, vec![2, 0, 1]);
    }

    #[test]
    fn role_names() {
        assert_eq!(Role::parse("Reactants"), Some(Role::Reactant));
        assert_eq!(Role::parse("condition"), Some(Role::Condition));
        assert_eq!(Role::parse("Conditions"), Some(Role::Condition));
        assert_eq!(Role::parse("Plus"), Some(Role::Plus));
        assert_eq!(Role::parse("Bond"), None);
    }
}
