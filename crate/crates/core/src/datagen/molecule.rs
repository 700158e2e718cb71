use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anchor::anchor_layout;
use crate::coco::Category;
use crate::fgdict::{decompose, Dictionary};
use crate::geometry::{padded_extent_box, BBox, Point};
use crate::molgraph::{canonical_smiles, generate_2d_coords, MolecularGraph};

use super::draw::draw_molecule;
use super::{DatagenError, DatasetSample, ImageSpec, Provenance, SampleAnnotation, SampleKind, Style, MAX_CANVAS};

/// Blank border around a molecule image, in pixels.
const MARGIN_PX: f64 = 8.0;

fn rotated(graph: &MolecularGraph, angle: f64) -> MolecularGraph {
    let mut g = graph.clone();
    for i in 0..g.atom_count() {
        if let Some(p) = g.atom(i).coord_2d {
            g.set_coord(i, p.rotated(angle));
        }
    }
    g
}

/// Molecule-anchor sample: FunctionalGroup boxes, Bond boxes for bonds that
/// touch a group, and Anchor keypoints, all in image pixels.
///
/// Coordinates come from the graph when present, otherwise from the 2D
/// layout. The seed picks the style, bond length and a rotation of the
/// drawing.
pub fn gen_molecule_sample(graph: &MolecularGraph, dictionary: &Dictionary, seed: u64) -> Result<DatasetSample, DatagenError> {
    let source = canonical_smiles(graph).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let style = Style::ALL[rng.random_range(0..Style::ALL.len())];
    let bond_px: f64 = rng.random_range(18.0..26.0);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let laid = if graph.has_coords() {
        graph.clone()
    } else {
        let report = generate_2d_coords(graph);
        if report.overlap {
            return Err(DatagenError::Layout(source));
        }
        report.graph
    };
    let drawn = rotated(&laid, angle);
    let decomposition = decompose(&drawn, dictionary).map_err(|e| DatagenError::Decompose(e.to_string()))?;
    let layout = anchor_layout(&drawn, &decomposition, dictionary).map_err(|e| DatagenError::Decompose(e.to_string()))?;
    let provenance = Provenance {
        kind: SampleKind::Molecule,
        source,
        archetype: None,
        seed,
        style,
    };
    if drawn.atom_count() == 0 {
        return Ok(DatasetSample::blank(1, 1, provenance));
    }

    let f = bond_px / layout.mapping.scale;
    let mut region = padded_extent_box(&layout.canvas, &layout.extents).expect("non-empty molecule");
    for s in &layout.hybrid.supernodes {
        region = region.union(&s.bbox);
    }
    let region = region.padded(MARGIN_PX / f);
    let px = |p: Point| Point::new((p.x - region.x1) * f, (p.y - region.y1) * f);
    let px_box = |b: &BBox| {
        let (a, c) = (px(Point::new(b.x1, b.y1)), px(Point::new(b.x2, b.y2)));
        BBox::new_unchecked(a.x, a.y, c.x, c.y)
    };
    let width = (region.width() * f).ceil() as u32;
    let height = (region.height() * f).ceil() as u32;
    if width > MAX_CANVAS || height > MAX_CANVAS {
        return Err(DatagenError::Unplaceable {
            width,
            height,
            max: MAX_CANVAS,
        });
    }

    let mut annotations: Vec<SampleAnnotation> = layout
        .hybrid
        .supernodes
        .iter()
        .map(|s| SampleAnnotation::boxed(Category::FunctionalGroup, px_box(&s.bbox)))
        .collect();
    let pad = (0.15 + style.stroke()) * bond_px;
    for (hb, &bi) in layout.hybrid.bonds.iter().zip(&layout.bond_source) {
        if !(hb.source.starts_with("FG_") || hb.target.starts_with("FG_")) {
            continue;
        }
        let bond = &drawn.bonds()[bi];
        let (a, b) = (px(layout.canvas[bond.a]), px(layout.canvas[bond.b]));
        let rect = BBox::new_unchecked(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y)).padded(pad);
        annotations.push(SampleAnnotation::boxed(Category::Bond, rect));
    }
    for group in &layout.anchors.groups {
        let parent = layout
            .hybrid
            .supernodes
            .iter()
            .position(|s| s.id == group.id)
            .expect("anchor group has a super-node");
        for &p in &group.anchors {
            let q = px(p);
            annotations.push(SampleAnnotation::anchor(Point::new(q.x.round(), q.y.round()), parent));
        }
    }
    let positions: Vec<Point> = layout.canvas.iter().map(|&p| px(p)).collect();
    Ok(DatasetSample {
        image: ImageSpec {
            width,
            height,
            file_name: String::new(),
        },
        annotations,
        provenance,
        drawing: draw_molecule(&drawn, &positions, bond_px, style),
    })
}
