use serde::{Deserialize, Serialize};

use crate::anchor::depiction_label;
use crate::geometry::{atom_label, BBox, Point};
use crate::molgraph::rings::sssr;
use crate::molgraph::{BondOrder, Element, MolecularGraph};

use super::Style;

/// Vector drawing element in image pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    Line { from: Point, to: Point, width: f64, dashed: bool },
    Polyline { points: Vec<Point>, width: f64 },
    Polygon { points: Vec<Point> },
    /// Centered on `at`.
    Text { at: Point, text: String, size: f64 },
}

/// Average glyph advance as a fraction of the font size.
pub const GLYPH_ASPECT: f64 = 0.6;

/// Box covering `text` drawn centered on `at`.
pub fn text_box(at: Point, text: &str, size: f64) -> BBox {
    let hw = GLYPH_ASPECT * size * text.chars().count().max(1) as f64 / 2.0;
    let hh = size / 2.0;
    BBox::new_unchecked(at.x - hw, at.y - hh, at.x + hw, at.y + hh)
}

fn points_box(points: &[Point], pad: f64) -> BBox {
    let mut b = BBox::new_unchecked(points[0].x, points[0].y, points[0].x, points[0].y);
    for p in &points[1..] {
        b = b.union(&BBox::new_unchecked(p.x, p.y, p.x, p.y));
    }
    b.padded(pad)
}

impl Primitive {
    pub fn translated(&self, d: Point) -> Primitive {
        match self {
            Primitive::Line { from, to, width, dashed } => Primitive::Line {
                from: *from + d,
                to: *to + d,
                width: *width,
                dashed: *dashed,
            },
            Primitive::Polyline { points, width } => Primitive::Polyline {
                points: points.iter().map(|&p| p + d).collect(),
                width: *width,
            },
            Primitive::Polygon { points } => Primitive::Polygon {
                points: points.iter().map(|&p| p + d).collect(),
            },
            Primitive::Text { at, text, size } => Primitive::Text {
                at: *at + d,
                text: text.clone(),
                size: *size,
            },
        }
    }

    /// Extent including half the stroke width.
    pub fn bounds(&self) -> BBox {
        match self {
            Primitive::Line { from, to, width, .. } => points_box(&[*from, *to], width / 2.0),
            Primitive::Polyline { points, width } => points_box(points, width / 2.0),
            Primitive::Polygon { points } => points_box(points, 0.0),
            Primitive::Text { at, text, size } => text_box(*at, text, *size),
        }
    }
}

pub fn bounds_of(drawing: &[Primitive]) -> Option<BBox> {
    drawing.iter().map(Primitive::bounds).reduce(|a, b| a.union(&b))
}

/// Label shown for atom `i` under `style`, or `None` for a bare vertex.
pub fn style_label(graph: &MolecularGraph, i: usize, style: Style) -> Option<String> {
    if style.shows_hydrogens() {
        depiction_label(graph, i)
    } else {
        let a = graph.atom(i);
        atom_label(a.element.symbol(), 0, a.formal_charge, a.element == Element::C)
    }
}

/// Font size of atom labels for a given bond length in pixels.
pub fn label_size(bond_px: f64) -> f64 {
    0.5 * bond_px
}

/// Distance from a label center to where a ray in direction `u` leaves the
/// label rectangle.
fn exit_distance(u: Point, hw: f64, hh: f64) -> f64 {
    let tx = if u.x.abs() > 1e-12 { hw / u.x.abs() } else { f64::INFINITY };
    let ty = if u.y.abs() > 1e-12 { hh / u.y.abs() } else { f64::INFINITY };
    tx.min(ty)
}

/// Draws a molecule whose atoms sit at `pos` (pixels).
pub fn draw_molecule(graph: &MolecularGraph, pos: &[Point], bond_px: f64, style: Style) -> Vec<Primitive> {
    let size = label_size(bond_px);
    let width = style.stroke() * bond_px;
    let labels: Vec<Option<String>> = (0..graph.atom_count()).map(|i| style_label(graph, i, style)).collect();
    let half: Vec<(f64, f64)> = labels
        .iter()
        .map(|l| match l {
            Some(t) => {
                let b = text_box(Point::ORIGIN, t, size);
                (b.x2 + 0.08 * bond_px, b.y2 + 0.08 * bond_px)
            }
            None => (0.0, 0.0),
        })
        .collect();
    let rings = sssr(graph);
    let ring_center = |a: usize, b: usize| {
        rings
            .iter()
            .filter(|r| r.contains(&a) && r.contains(&b))
            .min_by_key(|r| r.len())
            .map(|r| Point::centroid(&r.iter().map(|&k| pos[k]).collect::<Vec<_>>()))
    };
    let mut out = Vec::new();
    for bond in graph.bonds() {
        let (a, b) = (pos[bond.a], pos[bond.b]);
        let Some(u) = (b - a).normalized() else {
            continue;
        };
        let len = (b - a).norm();
        let start = a + u * exit_distance(u, half[bond.a].0, half[bond.a].1).min(len * 0.45);
        let end = b - u * exit_distance(u, half[bond.b].0, half[bond.b].1).min(len * 0.45);
        let normal = Point::new(-u.y, u.x);
        let line = |off: f64, shrink: f64, dashed: bool| Primitive::Line {
            from: start + normal * off + u * shrink,
            to: end + normal * off - u * shrink,
            width,
            dashed,
        };
        let inner_side = || {
            let mid = (a + b) * 0.5;
            match ring_center(bond.a, bond.b) {
                Some(c) if normal.dot(c - mid) < 0.0 => -1.0,
                _ => 1.0,
            }
        };
        match bond.order {
            BondOrder::Single => out.push(line(0.0, 0.0, false)),
            BondOrder::Dash => out.push(line(0.0, 0.0, true)),
            BondOrder::Wedge => {
                let w = 0.1 * bond_px;
                out.push(Primitive::Polygon {
                    points: vec![start, end + normal * w, end - normal * w],
                });
            }
            BondOrder::Double => {
                if ring_center(bond.a, bond.b).is_some() {
                    out.push(line(0.0, 0.0, false));
                    out.push(line(inner_side() * 0.18 * bond_px, 0.12 * len, false));
                } else {
                    out.push(line(0.09 * bond_px, 0.0, false));
                    out.push(line(-0.09 * bond_px, 0.0, false));
                }
            }
            BondOrder::Triple => {
                out.push(line(0.0, 0.0, false));
                out.push(line(0.14 * bond_px, 0.0, false));
                out.push(line(-0.14 * bond_px, 0.0, false));
            }
            BondOrder::Aromatic => {
                out.push(line(0.0, 0.0, false));
                out.push(line(inner_side() * 0.18 * bond_px, 0.12 * len, true));
            }
        }
    }
    for (i, label) in labels.into_iter().enumerate() {
        if let Some(text) = label {
            out.push(Primitive::Text { at: pos[i], text, size });
        }
    }
    out
}

/// A drawn structure with its own origin at the top-left of its extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub drawing: Vec<Primitive>,
    pub width: f64,
    pub height: f64,
}

impl Piece {
    pub fn placed(&self, origin: Point) -> Vec<Primitive> {
        self.drawing.iter().map(|p| p.translated(origin)).collect()
    }
}

/// Draws a molecule with depiction coordinates (y up, unit bonds) at
/// `bond_px` pixels per bond, padded by `pad` pixels.
pub fn structure_piece(graph: &MolecularGraph, bond_px: f64, style: Style, pad: f64) -> Piece {
    let pos: Vec<Point> = (0..graph.atom_count())
        .map(|i| {
            let c = graph.atom(i).coord_2d.unwrap_or_default();
            Point::new(c.x * bond_px, -c.y * bond_px)
        })
        .collect();
    let drawing = draw_molecule(graph, &pos, bond_px, style);
    let bounds = bounds_of(&drawing)
        .or_else(|| pos.first().map(|p| BBox::new_unchecked(p.x, p.y, p.x, p.y)))
        .unwrap_or(BBox::new_unchecked(0.0, 0.0, 0.0, 0.0))
        .padded(pad);
    let shift = Point::new(-bounds.x1, -bounds.y1);
    Piece {
        drawing: drawing.iter().map(|p| p.translated(shift)).collect(),
        width: bounds.width(),
        height: bounds.height(),
    }
}
