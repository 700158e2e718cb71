//! Directional Vector Matching: orienting group templates from anchors and
//! rebuilding the full molecular graph from a hybrid graph.

mod orient;
mod reconstruct;

use serde::Serialize;
use thiserror::Error;

use crate::fgdict::FunctionalGroupTemplate;
use crate::geometry::{label_half_extents, padded_extent_box, BBox, Point};
use crate::molgraph::Diagnostic;

pub use orient::{orient_group, GroupObservation, Orientation};
pub use reconstruct::{reconstruct, GroupReport, Reconstruction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DvmError {
    #[error("anchor ({x}, {y}) sits at the box center; direction undefined")]
    DegenerateDirection { x: f64, y: f64 },
    #[error("group {group} has {anchors} anchors but only {candidates} attachment candidates")]
    Arity {
        group: String,
        anchors: usize,
        candidates: usize,
    },
    #[error("group label '{0}' is not in the dictionary")]
    UnknownGroup(String),
    #[error("bond references unknown node '{0}'")]
    MissingNode(String),
    #[error("residual atom {id} has unreadable symbol '{symbol}'")]
    BadAtomSymbol { id: String, symbol: String },
    #[error("structure error at {node}: {message}")]
    Structural { node: String, message: String },
    #[error("reconstructed graph fails sanitize: {0}")]
    Sanitize(Diagnostic),
}

/// Direction of an anchor from the center of its group box.
pub fn anchor_direction(anchor: Point, bbox: BBox) -> Result<Point, DvmError> {
    let v = anchor - bbox.center();
    if v.norm() < 1e-12 {
        return Err(DvmError::DegenerateDirection { x: anchor.x, y: anchor.y });
    }
    Ok(v)
}

/// Anchor `anchor` bound to attachment candidate slot `slot` (an index into
/// the template's candidate list).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssignmentEntry {
    pub anchor: usize,
    pub slot: usize,
    pub cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorAssignment {
    pub entries: Vec<AssignmentEntry>,
    /// True when independent per-anchor argmax would have chosen differently
    /// (a collision on a symmetric template, or a non-optimal total).
    pub argmax_differs: bool,
}

impl AnchorAssignment {
    pub fn slots(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.slot).collect()
    }

    pub fn total_cosine(&self) -> f64 {
        self.entries.iter().map(|e| e.cosine).sum()
    }
}

pub(crate) fn cosine(a: Point, b: Point) -> f64 {
    let d = a.norm() * b.norm();
    if d < 1e-15 {
        return 0.0;
    }
    (a.dot(b) / d).clamp(-1.0, 1.0)
}

/// Visits every injective map from `k` items into `n` slots in lexicographic order.
pub(crate) fn for_each_injection(k: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for s in 0..n {
            if !used[s] {
                used[s] = true;
                cur.push(s);
                rec(k, n, cur, used, visit);
                cur.pop();
                used[s] = false;
            }
        }
    }
    if k <= n {
        rec(k, n, &mut Vec::with_capacity(k), &mut vec![false; n], &mut visit);
    }
}

const EXHAUSTIVE_LIMIT: usize = 8;
const TIE_TOLERANCE: f64 = 1e-9;

/// 0 when every anchor sits at the same angular offset from its slot, up to
/// 1 when the offsets cancel out.
fn rotation_spread(directions: &[Point], template: &FunctionalGroupTemplate, slots: &[usize]) -> f64 {
    if slots.is_empty() {
        return 0.0;
    }
    let (mut c, mut s) = (0.0, 0.0);
    for (j, &slot) in slots.iter().enumerate() {
        let offset = directions[j].angle() - template.direction_vectors[slot].angle();
        c += offset.cos();
        s += offset.sin();
    }
    1.0 - c.hypot(s) / slots.len() as f64
}

/// Injective anchor-to-candidate assignment maximizing the summed cosine
/// between each anchor direction and the template direction vectors.
///
/// Exhaustive for up to eight candidates, greedy with pairwise-swap repair
/// beyond. Among equal totals the assignment whose anchors agree best on a
/// single rotation of the template wins (an anchor halfway between two
/// candidates would otherwise pick either side independently), then the
/// lexicographically smallest slot sequence.
pub fn match_anchors(directions: &[Point], template: &FunctionalGroupTemplate) -> Result<AnchorAssignment, DvmError> {
    let n = template.direction_vectors.len();
    let k = directions.len();
    if k > n {
        return Err(DvmError::Arity {
            group: template.name.clone(),
            anchors: k,
            candidates: n,
        });
    }
    for d in directions {
        if d.norm() < 1e-12 {
            return Err(DvmError::DegenerateDirection { x: d.x, y: d.y });
        }
    }
    let score = |j: usize, s: usize| cosine(directions[j], template.direction_vectors[s]);
    let best: Vec<usize> = if n <= EXHAUSTIVE_LIMIT {
        let total = |slots: &[usize]| -> f64 { slots.iter().enumerate().map(|(j, &s)| score(j, s)).sum() };
        let mut top = f64::NEG_INFINITY;
        for_each_injection(k, n, |slots| top = top.max(total(slots)));
        let mut best: Option<(f64, Vec<usize>)> = None;
        for_each_injection(k, n, |slots| {
            if total(slots) < top - TIE_TOLERANCE {
                return;
            }
            let spread = rotation_spread(directions, template, slots);
            if best.as_ref().is_none_or(|(b, _)| spread < b - TIE_TOLERANCE) {
                best = Some((spread, slots.to_vec()));
            }
        });
        best.map(|(_, s)| s).unwrap_or_default()
    } else {
        greedy_with_repair(k, n, &score)
    };
    let argmax: Vec<usize> = (0..k)
        .map(|j| {
            (0..n)
                .max_by(|&a, &b| score(j, a).partial_cmp(&score(j, b)).expect("finite").then(b.cmp(&a)))
                .expect("candidates")
        })
        .collect();
    Ok(AnchorAssignment {
        entries: best
            .iter()
            .enumerate()
            .map(|(j, &s)| AssignmentEntry {
                anchor: j,
                slot: s,
                cosine: score(j, s),
            })
            .collect(),
        argmax_differs: argmax != best,
    })
}

fn greedy_with_repair(k: usize, n: usize, score: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut pairs: Vec<(usize, usize)> = (0..k).flat_map(|j| (0..n).map(move |s| (j, s))).collect();
    pairs.sort_by(|a, b| score(b.0, b.1).partial_cmp(&score(a.0, a.1)).expect("finite").then(a.cmp(b)));
    let mut slot = vec![usize::MAX; k];
    let mut used = vec![false; n];
    for (j, s) in pairs {
        if slot[j] == usize::MAX && !used[s] {
            slot[j] = s;
            used[s] = true;
        }
    }
    loop {
        let mut improved = false;
        for a in 0..k {
            for b in a + 1..k {
                let now = score(a, slot[a]) + score(b, slot[b]);
                let swapped = score(a, slot[b]) + score(b, slot[a]);
                if swapped > now + 1e-12 {
                    slot.swap(a, b);
                    improved = true;
                }
            }
            for s in 0..n {
                if !used[s] && score(a, s) > score(a, slot[a]) + 1e-12 {
                    used[slot[a]] = false;
                    used[s] = true;
                    slot[a] = s;
                    improved = true;
                }
            }
        }
        if !improved {
            return slot;
        }
    }
}

/// Template atoms placed in the image frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedGroup {
    /// Position of every core atom.
    pub coords: Vec<Point>,
    /// Core atom index bound to each anchor.
    pub attachment_atoms: Vec<usize>,
    pub rotation: f64,
    pub scale: f64,
}

/// Places the template in `bbox` following an assignment.
///
/// `directions` are the anchor directions the assignment was computed from.
/// With two or more anchors rotation and scale come from a least-squares fit
/// of the assigned template vectors onto the directions; one anchor fixes the
/// rotation only; without anchors the template keeps its canonical
/// orientation. Scale otherwise follows the box diagonal.
pub fn instantiate_group(
    template: &FunctionalGroupTemplate,
    assignment: &AnchorAssignment,
    directions: &[Point],
    bbox: BBox,
) -> PlacedGroup {
    let coords = &template.canonical_coords;
    let core = template.core_graph();
    let extents: Vec<(f64, f64)> = (0..template.core_len)
        .map(|i| label_half_extents(crate::anchor::depiction_label(&core, i).as_deref()))
        .collect();
    let natural = padded_extent_box(coords, &extents).map_or(1.0, |b| b.diagonal());
    let box_scale = bbox.diagonal() / natural.max(1e-9);
    let pairs: Vec<(Point, Point)> = assignment
        .entries
        .iter()
        .map(|e| (coords[template.attachment_candidates[e.slot]], directions[e.anchor]))
        .collect();
    let (rotation, scale) = match pairs.len() {
        0 => (0.0, box_scale),
        1 => {
            let (t, v) = pairs[0];
            if t.norm() < 1e-12 {
                (0.0, box_scale)
            } else {
                (v.angle() - t.angle(), box_scale)
            }
        }
        _ => {
            // z = Σ v·conj(t) / Σ|t|² as complex numbers.
            let (mut re, mut im, mut norm) = (0.0, 0.0, 0.0);
            for (t, v) in &pairs {
                re += v.x * t.x + v.y * t.y;
                im += v.y * t.x - v.x * t.y;
                norm += t.dot(*t);
            }
            if norm < 1e-12 {
                (0.0, box_scale)
            } else {
                (im.atan2(re), re.hypot(im) / norm)
            }
        }
    };
    let center = bbox.center();
    PlacedGroup {
        coords: coords.iter().map(|&t| center + t.rotated(rotation) * scale).collect(),
        attachment_atoms: assignment
            .entries
            .iter()
            .map(|e| template.attachment_candidates[e.slot])
            .collect(),
        rotation,
        scale,
    }
}
