use std::f64::consts::PI;

use serde::Serialize;

use crate::fgdict::FunctionalGroupTemplate;
use crate::geometry::{atom_label, label_half_extents, padded_extent_box, BBox, Point};
use crate::molgraph::rings::ring_bonds;
use crate::molgraph::Element;

use super::{cosine, for_each_injection, DvmError};

/// What the hybrid graph says about one super-node.
#[derive(Debug, Clone, Copy)]
pub struct GroupObservation<'a> {
    pub bbox: BBox,
    pub anchors: &'a [Point],
    /// External bond valence carried by each anchor.
    pub anchor_valence: &'a [u32],
    /// Element per core atom for templates with alternatives; empty otherwise.
    pub elements: &'a [Element],
    /// Ring heteroatom positions in template order; empty when unknown.
    pub heteroatoms: &'a [Point],
    /// Drawn bond length, when the surrounding bonds reveal it.
    pub bond_length: Option<f64>,
}

impl<'a> GroupObservation<'a> {
    pub fn new(bbox: BBox, anchors: &'a [Point], anchor_valence: &'a [u32]) -> GroupObservation<'a> {
        GroupObservation {
            bbox,
            anchors,
            anchor_valence,
            elements: &[],
            heteroatoms: &[],
            bond_length: None,
        }
    }
}

/// Best placement of a template onto the anchors and box of one super-node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orientation {
    /// Candidate slot bound to each anchor.
    pub slots: Vec<usize>,
    /// True when the template had to be mirrored relative to its drawn handedness.
    pub reflected: bool,
    pub rotation: f64,
    pub scale: f64,
    /// Core atom positions on the canvas.
    pub coords: Vec<Point>,
    /// Cosine between each anchor direction and its placed candidate direction.
    pub cosines: Vec<f64>,
    /// Fit residual, in squared template units.
    pub residual: f64,
}

struct Frame<'a> {
    template: &'a FunctionalGroupTemplate,
    shape: &'a [Point],
    obs: &'a GroupObservation<'a>,
    hetero: &'a [usize],
    extents: Vec<(f64, f64)>,
    mirror: bool,
}

struct Fit {
    cost: f64,
    rotation: f64,
    scale: f64,
    coords: Vec<Point>,
}

impl Frame<'_> {
    /// Template point in the canvas orientation (y down), optionally mirrored.
    fn base(&self, p: Point) -> Point {
        if self.mirror {
            p
        } else {
            Point::new(p.x, -p.y)
        }
    }

    fn evaluate(&self, slots: &[usize], theta: f64) -> Fit {
        let t = self.template;
        let obs = self.obs;
        let rotated: Vec<Point> = self.shape.iter().map(|&p| self.base(p).rotated(theta)).collect();
        let unit_box = padded_extent_box(&rotated, &self.extents).expect("non-empty core");
        let scale = obs
            .bond_length
            .unwrap_or_else(|| obs.bbox.diagonal() / unit_box.diagonal().max(1e-9));
        let picked: Vec<Point> = slots.iter().map(|&s| rotated[t.attachment_candidates[s]] * scale).collect();
        let shift = if slots.is_empty() {
            obs.bbox.center() - unit_box.center() * scale
        } else {
            Point::centroid(obs.anchors) - Point::centroid(&picked)
        };
        let coords: Vec<Point> = rotated.iter().map(|&p| p * scale + shift).collect();
        let mut position: f64 = slots
            .iter()
            .zip(obs.anchors)
            .map(|(&s, &a)| {
                let d = coords[t.attachment_candidates[s]] - a;
                d.dot(d)
            })
            .sum();
        for (&i, &h) in self.hetero.iter().zip(obs.heteroatoms) {
            let d = coords[i] - h;
            position += d.dot(d);
        }
        let scaled: Vec<(f64, f64)> = self.extents.iter().map(|&(w, h)| (w * scale, h * scale)).collect();
        let placed = padded_extent_box(&coords, &scaled).expect("non-empty core");
        let corners = [
            placed.x1 - obs.bbox.x1,
            placed.y1 - obs.bbox.y1,
            placed.x2 - obs.bbox.x2,
            placed.y2 - obs.bbox.y2,
        ];
        let box_residual: f64 = corners.iter().map(|d| d * d).sum();
        let s2 = (scale * scale).max(1e-12);
        Fit {
            cost: (position + BOX_WEIGHT * box_residual) / s2,
            rotation: theta,
            scale,
            coords,
        }
    }

    /// Closed-form rotation aligning the chosen candidates with the anchors.
    fn procrustes(&self, slots: &[usize]) -> f64 {
        let t = self.template;
        let picked: Vec<Point> = slots
            .iter()
            .map(|&s| self.base(self.shape[t.attachment_candidates[s]]))
            .collect();
        let anchors = self.obs.anchors;
        let (pc, ac) = (Point::centroid(&picked), Point::centroid(anchors));
        let (mut re, mut im) = (0.0, 0.0);
        for (p, a) in picked.iter().zip(anchors) {
            let (p, a) = (*p - pc, *a - ac);
            re += a.x * p.x + a.y * p.y;
            im += a.y * p.x - a.x * p.y;
        }
        im.atan2(re)
    }

    fn best_rotation(&self, slots: &[usize]) -> Fit {
        let start = if slots.len() >= 2 {
            let theta = self.procrustes(slots);
            let mut best = self.evaluate(slots, theta);
            for step in 1..=20 {
                for sign in [-1.0, 1.0] {
                    let f = self.evaluate(slots, theta + sign * f64::from(step) * PI / 360.0);
                    if f.cost < best.cost - 1e-12 {
                        best = f;
                    }
                }
            }
            best
        } else {
            let mut best = self.evaluate(slots, 0.0);
            for deg in 1..360 {
                let f = self.evaluate(slots, f64::from(deg).to_radians());
                if f.cost < best.cost - 1e-12 {
                    best = f;
                }
            }
            best
        };
        self.refine(slots, start)
    }

    /// Golden-section search within one grid step of the current best.
    fn refine(&self, slots: &[usize], fit: Fit) -> Fit {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (fit.rotation - PI / 180.0, fit.rotation + PI / 180.0);
        for _ in 0..30 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if self.evaluate(slots, m1).cost < self.evaluate(slots, m2).cost {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let candidate = self.evaluate(slots, (lo + hi) / 2.0);
        if candidate.cost < fit.cost {
            candidate
        } else {
            fit
        }
    }
}

/// Box corners are a weaker cue than anchor positions: labels and chain
/// conformations move them.
const BOX_WEIGHT: f64 = 0.25;

const MAX_CONFORMERS: usize = 16;

/// The canonical layout plus every variant obtained by mirroring one side of
/// an acyclic core bond across the bond axis.
pub(crate) fn conformers(template: &FunctionalGroupTemplate) -> Vec<Vec<Point>> {
    let core = template.core_graph();
    let n = template.core_len;
    let adjacency = core.adjacency();
    let in_ring = ring_bonds(&core);
    let pivots: Vec<(usize, usize, Vec<usize>)> = core
        .bonds()
        .iter()
        .enumerate()
        .filter(|(bi, b)| !in_ring[*bi] && adjacency[b.a].len() > 1 && adjacency[b.b].len() > 1)
        .map(|(bi, b)| {
            let mut side = vec![b.b];
            let mut stack = vec![b.b];
            while let Some(v) = stack.pop() {
                for &(w, via) in &adjacency[v] {
                    if via != bi && !side.contains(&w) {
                        side.push(w);
                        stack.push(w);
                    }
                }
            }
            (b.a, b.b, side)
        })
        .collect();
    let mut out: Vec<Vec<Point>> = vec![template.canonical_coords.clone()];
    let combos = 1usize << pivots.len().min(4);
    for mask in 1..combos {
        let mut coords = template.canonical_coords.clone();
        for (k, (a, b, side)) in pivots.iter().enumerate() {
            if mask & (1 << k) == 0 {
                continue;
            }
            let (p, q) = (coords[*a], coords[*b]);
            let Some(axis) = (q - p).normalized() else { continue };
            for &v in side {
                let r = coords[v] - p;
                let along = axis * r.dot(axis);
                coords[v] = p + along * 2.0 - r;
            }
        }
        let centroid = Point::centroid(&coords);
        let coords: Vec<Point> = coords.iter().map(|&c| c - centroid).collect();
        let duplicate = out
            .iter()
            .any(|o| o.iter().zip(&coords).all(|(x, y)| x.distance(*y) < 1e-6));
        if !duplicate {
            out.push(coords);
        }
        if out.len() >= MAX_CONFORMERS {
            break;
        }
    }
    debug_assert!(out.iter().all(|c| c.len() == n));
    out
}

fn core_extents(
    template: &FunctionalGroupTemplate,
    slots: &[usize],
    anchor_valence: &[u32],
    elements: &[Element],
) -> Vec<(f64, f64)> {
    (0..template.core_len)
        .map(|i| {
            let pattern = &template.atoms[i];
            let element = elements
                .get(i)
                .copied()
                .or_else(|| pattern.element.representative())
                .unwrap_or(Element::C);
            let external: u32 = slots
                .iter()
                .zip(anchor_valence)
                .filter(|(&s, _)| template.attachment_candidates[s] == i)
                .map(|(_, &v)| v)
                .sum();
            let h = u32::from(template.budgets[i]).saturating_sub(external) as u8;
            let label = atom_label(element.symbol(), h, pattern.charge, element == Element::C);
            label_half_extents(label.as_deref())
        })
        .collect()
}

/// Whether binding anchors to `slots` respects each candidate's external valence range.
pub(crate) fn feasible(template: &FunctionalGroupTemplate, slots: &[usize], anchor_valence: &[u32]) -> bool {
    for (slot, &c) in template.attachment_candidates.iter().enumerate() {
        let ext = slots
            .iter()
            .position(|&s| s == slot)
            .map_or(0, |j| anchor_valence.get(j).copied().unwrap_or(1));
        let lo = u32::from(template.min_external[c]);
        let hi = u32::from(template.max_external(c));
        if ext < lo || ext > hi {
            return false;
        }
        if let Some(h) = template.atoms[c].hydrogens {
            if u32::from(template.budgets[c]) - ext != u32::from(h) {
                return false;
            }
        }
    }
    true
}

/// Fits the template to a super-node by searching candidate assignments,
/// chain conformations, mirror image and rotation.
///
/// The placed template must put the assigned candidates on the anchors and
/// reproduce the group box (labels included). Scale comes from the drawn bond
/// length when known, else from the box diagonal. Assignments that violate
/// an anchor's external valence are skipped unless nothing else remains.
/// Ties go to the canonical conformation, the unmirrored template and then
/// the smallest slot sequence.
pub fn orient_group(template: &FunctionalGroupTemplate, obs: &GroupObservation) -> Result<Orientation, DvmError> {
    let n = template.attachment_candidates.len();
    let k = obs.anchors.len();
    if k > n {
        return Err(DvmError::Arity {
            group: template.name.clone(),
            anchors: k,
            candidates: n,
        });
    }
    let mut options: Vec<Vec<usize>> = Vec::new();
    for_each_injection(k, n, |s| options.push(s.to_vec()));
    let valid: Vec<Vec<usize>> = options
        .iter()
        .filter(|s| feasible(template, s, obs.anchor_valence))
        .cloned()
        .collect();
    if !valid.is_empty() {
        options = valid;
    }
    let hetero = if obs.heteroatoms.is_empty() {
        Vec::new()
    } else {
        template.ring_heteroatoms()
    };
    let shapes = if k == 0 {
        vec![template.canonical_coords.clone()]
    } else {
        conformers(template)
    };
    let mut best: Option<(f64, bool, Vec<usize>, Fit)> = None;
    for shape in &shapes {
        for mirror in [false, true] {
            for slots in &options {
                let frame = Frame {
                    template,
                    shape,
                    obs,
                    hetero: &hetero,
                    extents: core_extents(template, slots, obs.anchor_valence, obs.elements),
                    mirror,
                };
                let fit = frame.best_rotation(slots);
                let tol = 1e-6 * (1.0 + fit.cost);
                if best.as_ref().is_none_or(|(c, ..)| fit.cost < c - tol) {
                    best = Some((fit.cost, mirror, slots.clone(), fit));
                }
            }
        }
    }
    let (residual, reflected, slots, fit) = best.expect("at least one injection");
    let center = obs.bbox.center();
    let cosines = slots
        .iter()
        .zip(obs.anchors)
        .map(|(&s, &a)| cosine(a - center, fit.coords[template.attachment_candidates[s]] - center))
        .collect();
    Ok(Orientation {
        slots,
        reflected,
        rotation: fit.rotation,
        scale: fit.scale,
        coords: fit.coords,
        cosines,
        residual,
    })
}
