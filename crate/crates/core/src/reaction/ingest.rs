use serde_json::Value;

use crate::coco::{normalize_box, Category, CocoDataset};
use crate::geometry::BBox;

use super::{row_bands, DiagramElement, ReactionError, Role};

/// Parses the layout-parsing answer: a JSON array of
/// `{"reaction_id", "role", "bbox": [x1, y1, x2, y2]}` records, optionally
/// wrapped in an object under `"elements"` or `"reactions"`.
pub fn parse_elements(text: &str) -> Result<Vec<DiagramElement>, ReactionError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ReactionError::Json(e.to_string()))?;
    let items = match &value {
        Value::Array(items) => items,
        Value::Object(map) => match map.get("elements").or_else(|| map.get("reactions")) {
            Some(Value::Array(items)) => items,
            _ => return Err(ReactionError::Json("expected an element array".into())),
        },
        _ => return Err(ReactionError::Json("expected an element array".into())),
    };
    items
        .iter()
        .enumerate()
        .map(|(index, item)| {
            let reaction_id = item
                .get("reaction_id")
                .and_then(Value::as_u64)
                .ok_or_else(|| ReactionError::Json(format!("element {index}: missing reaction_id")))?;
            if reaction_id == 0 {
                return Err(ReactionError::ZeroReactionId { index });
            }
            let role_text = item
                .get("role")
                .and_then(Value::as_str)
                .ok_or_else(|| ReactionError::Json(format!("element {index}: missing role")))?;
            let role = Role::parse(role_text).ok_or_else(|| ReactionError::UnknownRole {
                index,
                role: role_text.to_string(),
            })?;
            let coords: Vec<f64> = item
                .get("bbox")
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(Value::as_f64).collect())
                .unwrap_or_default();
            let [x1, y1, x2, y2] = coords[..] else {
                return Err(ReactionError::Json(format!("element {index}: bbox needs four numbers")));
            };
            let bbox = BBox::new(x1, y1, x2, y2).map_err(|source| ReactionError::Box { index, source })?;
            Ok(DiagramElement {
                reaction_id: reaction_id as u32,
                role,
                bbox,
            })
        })
        .collect()
}

fn gap(a: &BBox, b: &BBox) -> f64 {
    let dx = (b.x1 - a.x2).max(a.x1 - b.x2).max(0.0);
    let dy = (b.y1 - a.y2).max(a.y1 - b.y2).max(0.0);
    dx.hypot(dy)
}

fn nearest<'a>(target: &BBox, arrows: impl Iterator<Item = (usize, &'a BBox)>) -> Option<usize> {
    arrows
        .map(|(k, a)| (gap(target, a), target.center().distance(a.center()), k))
        .min_by(|x, y| x.partial_cmp(y).expect("finite"))
        .map(|t| t.2)
}

/// Converts the diagram annotations of one COCO image into layout elements in
/// the 0–1000 frame.
///
/// Every arrow starts its own reaction, numbered in reading order. Reactants
/// join the nearest arrow to their right and products the nearest arrow to
/// their left, falling back to the nearest arrow anywhere. An arrow left
/// without reactants (or products) borrows the closest molecule on its left
/// (or right) in the same row, which is how intermediates of a chain end up in
/// two reactions. Plus signs and conditions join the nearest arrow.
pub fn elements_from_coco(dataset: &CocoDataset, image_id: u64) -> Result<Vec<DiagramElement>, ReactionError> {
    let image = dataset.image(image_id).ok_or(ReactionError::MissingImage(image_id))?;
    let items: Vec<(Role, BBox)> = dataset
        .annotations_for(image_id)
        .into_iter()
        .filter_map(|a| {
            let role = match a.category()? {
                Category::Arrow => Role::Arrow,
                Category::Conditions => Role::Condition,
                Category::Plus => Role::Plus,
                Category::Products => Role::Product,
                Category::Reactants => Role::Reactant,
                _ => return None,
            };
            Some((role, normalize_box(a.rect(), image.width, image.height)))
        })
        .collect();
    let boxes: Vec<BBox> = items.iter().map(|i| i.1).collect();
    let order = super::reading_order(&boxes);
    let arrows: Vec<usize> = order.iter().copied().filter(|&i| items[i].0 == Role::Arrow).collect();
    if arrows.is_empty() {
        return Ok(items
            .into_iter()
            .map(|(role, bbox)| DiagramElement {
                reaction_id: 1,
                role,
                bbox,
            })
            .collect());
    }
    let band = row_bands(&boxes);
    let arrow_boxes = || arrows.iter().enumerate().map(|(k, &i)| (k, &boxes[i]));
    let mut out = Vec::new();
    let mut has = vec![(false, false); arrows.len()];
    for (i, &(role, bbox)) in items.iter().enumerate() {
        let cx = bbox.center().x;
        let k = match role {
            Role::Arrow => arrows.iter().position(|&a| a == i),
            Role::Reactant => nearest(&bbox, arrow_boxes().filter(|(_, a)| a.center().x > cx))
                .or_else(|| nearest(&bbox, arrow_boxes())),
            Role::Product => nearest(&bbox, arrow_boxes().filter(|(_, a)| a.center().x < cx))
                .or_else(|| nearest(&bbox, arrow_boxes())),
            Role::Plus | Role::Condition => nearest(&bbox, arrow_boxes()),
        }
        .expect("at least one arrow");
        match role {
            Role::Reactant => has[k].0 = true,
            Role::Product => has[k].1 = true,
            _ => {}
        }
        out.push((k, role, bbox));
    }
    for (k, &a) in arrows.iter().enumerate() {
        let ax = boxes[a].center().x;
        let same_row = |i: usize| band[i] == band[a] && matches!(items[i].0, Role::Reactant | Role::Product);
        let blocked = |i: usize, lo: f64, hi: f64| {
            arrows.iter().any(|&b| b != a && band[b] == band[a] && (lo..hi).contains(&boxes[b].center().x))
                || !(lo..hi).contains(&boxes[i].center().x)
        };
        if !has[k].0 {
            let left = (0..items.len())
                .filter(|&i| same_row(i) && boxes[i].center().x < ax)
                .filter(|&i| !blocked(i, boxes[i].center().x, ax))
                .max_by(|&x, &y| boxes[x].center().x.total_cmp(&boxes[y].center().x));
            if let Some(i) = left {
                out.push((k, Role::Reactant, boxes[i]));
            }
        }
        if !has[k].1 {
            let right = (0..items.len())
                .filter(|&i| same_row(i) && boxes[i].center().x > ax)
                .filter(|&i| !blocked(i, ax, boxes[i].center().x + 1e-9))
                .min_by(|&x, &y| boxes[x].center().x.total_cmp(&boxes[y].center().x));
            if let Some(i) = right {
                out.push((k, Role::Product, boxes[i]));
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|(k, role, bbox)| DiagramElement {
            reaction_id: k as u32 + 1,
            role,
            bbox,
        })
        .collect())
}
