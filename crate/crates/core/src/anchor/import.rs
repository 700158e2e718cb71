use crate::coco::{Category, CocoDataset};
use crate::geometry::BBox;
use crate::molgraph::BondOrder;

use super::{AnchorSet, GroupAnchors, HybridBond, HybridError, HybridGraph, SuperNode};

/// Gap between two boxes; zero when they touch or overlap.
fn box_gap(a: &BBox, b: &BBox) -> f64 {
    let dx = (b.x1 - a.x2).max(a.x1 - b.x2).max(0.0);
    let dy = (b.y1 - a.y2).max(a.y1 - b.y2).max(0.0);
    dx.hypot(dy)
}

/// Builds a hybrid graph from the molecule-level annotations of one image.
///
/// FunctionalGroup boxes become super-nodes labeled `FunctionalGroup` (the
/// annotation format carries no group class), each Bond box connects the two
/// nearest super-node boxes, and each Anchor keypoint joins the super-node
/// whose box contains it (the smallest such box, else the nearest).
/// Coordinates stay in image pixels.
pub fn hybrid_from_coco(dataset: &CocoDataset, image_id: u64) -> Result<(HybridGraph, AnchorSet), HybridError> {
    let mut hybrid = HybridGraph::default();
    let mut anchors = AnchorSet::default();
    let annotations = dataset.annotations_for(image_id);
    for a in annotations.iter().filter(|a| a.category() == Some(Category::FunctionalGroup)) {
        let id = format!("FG_{}", hybrid.supernodes.len() + 1);
        hybrid.supernodes.push(SuperNode {
            id: id.clone(),
            label: Category::FunctionalGroup.name().to_string(),
            bbox: a.rect(),
            elements: Vec::new(),
            heteroatoms: Vec::new(),
        });
        anchors.groups.push(GroupAnchors { id, anchors: Vec::new() });
    }
    for a in annotations.iter().filter(|a| a.category() == Some(Category::Bond)) {
        let rect = a.rect();
        let mut ranked: Vec<(f64, f64, usize)> = hybrid
            .supernodes
            .iter()
            .enumerate()
            .map(|(i, s)| (box_gap(&rect, &s.bbox), rect.center().distance(s.bbox.center()), i))
            .collect();
        ranked.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        if ranked.len() < 2 {
            return Err(HybridError::Json(format!(
                "bond annotation {} needs two functional-group boxes",
                a.id
            )));
        }
        let (u, v) = (ranked[0].2.min(ranked[1].2), ranked[0].2.max(ranked[1].2));
        hybrid.bonds.push(HybridBond {
            source: hybrid.supernodes[u].id.clone(),
            target: hybrid.supernodes[v].id.clone(),
            order: BondOrder::Single,
        });
    }
    for a in annotations.iter().filter(|a| a.category() == Some(Category::Anchor)) {
        let Some(p) = a.keypoint().or_else(|| Some(a.rect().center())) else {
            continue;
        };
        let owner = hybrid
            .supernodes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.bbox.contains(p, 0.0))
            .min_by(|x, y| x.1.bbox.area().partial_cmp(&y.1.bbox.area()).expect("finite"))
            .or_else(|| {
                hybrid
                    .supernodes
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.bbox.distance_to(p).partial_cmp(&y.1.bbox.distance_to(p)).expect("finite"))
            })
            .map(|(i, _)| i)
            .ok_or_else(|| HybridError::UnknownAnchorGroup(format!("anchor annotation {}", a.id)))?;
        anchors.groups[owner].anchors.push(p);
    }
    Ok((hybrid, anchors))
}
