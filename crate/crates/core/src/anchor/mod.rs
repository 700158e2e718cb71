//! Visual anchors and the hybrid-granularity graph exchanged with a recognizer.

mod hybrid;
mod import;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fgdict::{Decomposition, Dictionary, ElementPattern};
use crate::geometry::{atom_label, label_half_extents, padded_extent_box, BBox, CanvasMapping, Point};
use crate::molgraph::{atom_token, Atom, BondOrder, Element, MolecularGraph};

pub use hybrid::{parse_hybrid, serialize_hybrid, HybridError};
pub use import::hybrid_from_coco;

/// A functional-group node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperNode {
    pub id: String,
    pub label: String,
    pub bbox: BBox,
    /// Element symbol per template core atom; present only for groups whose
    /// pattern allows alternative elements (halides).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<String>,
    /// Canvas positions of ring heteroatoms, in template core order; present
    /// only for heteroaromatic ring groups.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heteroatoms: Vec<[f64; 2]>,
}

/// A residual atom node. `symbol` is the SMILES atom token without brackets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridAtom {
    pub id: String,
    pub symbol: String,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridBond {
    pub source: String,
    pub target: String,
    #[serde(rename = "type")]
    pub order: BondOrder,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HybridGraph {
    pub supernodes: Vec<SuperNode>,
    pub atoms: Vec<HybridAtom>,
    pub bonds: Vec<HybridBond>,
}

impl HybridGraph {
    pub fn supernode(&self, id: &str) -> Option<&SuperNode> {
        self.supernodes.iter().find(|s| s.id == id)
    }

    pub fn atom(&self, id: &str) -> Option<&HybridAtom> {
        self.atoms.iter().find(|a| a.id == id)
    }

    /// Box of any node.
    pub fn node_box(&self, id: &str) -> Option<BBox> {
        self.supernode(id)
            .map(|s| s.bbox)
            .or_else(|| self.atom(id).map(|a| a.bbox))
    }

    /// Distinct nodes bonded to `id`.
    pub fn neighbors(&self, id: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for b in &self.bonds {
            let other = if b.source == id {
                b.target.as_str()
            } else if b.target == id {
                b.source.as_str()
            } else {
                continue;
            };
            if !out.contains(&other) {
                out.push(other);
            }
        }
        out
    }
}

/// Anchor keypoints of one super-node, in the 0–1000 molecule frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupAnchors {
    pub id: String,
    pub anchors: Vec<Point>,
}

/// Anchors for every super-node, in super-node order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchorSet {
    pub groups: Vec<GroupAnchors>,
}

impl AnchorSet {
    /// Keypoints of a super-node; empty when it has none.
    pub fn get(&self, id: &str) -> &[Point] {
        self.groups
            .iter()
            .find(|g| g.id == id)
            .map_or(&[], |g| g.anchors.as_slice())
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.anchors.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnchorError {
    #[error("atom {0} has no 2D coordinates")]
    MissingCoordinates(usize),
    #[error("decomposition does not partition the {0} atoms of the graph")]
    InvalidDecomposition(usize),
    #[error("group '{0}' is not in the dictionary")]
    UnknownGroup(String),
}

/// Everything derived while placing a decomposed molecule on the canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorLayout {
    pub hybrid: HybridGraph,
    pub anchors: AnchorSet,
    pub mapping: CanvasMapping,
    /// Canvas position of every graph atom.
    pub canvas: Vec<Point>,
    /// Hybrid node id owning every graph atom.
    pub node_of_atom: Vec<String>,
    /// Half-extents of every atom's drawn label on the canvas.
    pub extents: Vec<(f64, f64)>,
    /// Graph bond index behind each hybrid bond.
    pub bond_source: Vec<usize>,
}

/// Label drawn for a graph atom.
pub fn depiction_label(graph: &MolecularGraph, i: usize) -> Option<String> {
    let a = graph.atom(i);
    atom_label(a.element.symbol(), a.total_h(), a.formal_charge, a.element == Element::C)
}

/// Maps the molecule onto the canvas and derives the hybrid graph and anchors.
pub fn anchor_layout(
    graph: &MolecularGraph,
    decomposition: &Decomposition,
    dictionary: &Dictionary,
) -> Result<AnchorLayout, AnchorError> {
    let n = graph.atom_count();
    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        coords.push(graph.atom(i).coord_2d.ok_or(AnchorError::MissingCoordinates(i))?);
    }
    if !decomposition.is_partition(n) {
        return Err(AnchorError::InvalidDecomposition(n));
    }
    let unit_extents: Vec<(f64, f64)> = (0..n)
        .map(|i| label_half_extents(depiction_label(graph, i).as_deref()))
        .collect();
    let extent = padded_extent_box(&coords, &unit_extents).unwrap_or(BBox::new_unchecked(-1.0, -1.0, 1.0, 1.0));
    let mapping = CanvasMapping::fit(extent);
    let canvas: Vec<Point> = coords.iter().map(|&p| mapping.map(p)).collect();
    let extents: Vec<(f64, f64)> = unit_extents
        .iter()
        .map(|&(w, h)| (w * mapping.scale, h * mapping.scale))
        .collect();
    let box_of = |atoms: &[usize]| {
        let pts: Vec<Point> = atoms.iter().map(|&i| canvas[i]).collect();
        let ext: Vec<(f64, f64)> = atoms.iter().map(|&i| extents[i]).collect();
        padded_extent_box(&pts, &ext).expect("non-empty node")
    };

    let mut node_of_atom = vec![String::new(); n];
    let mut hybrid = HybridGraph::default();
    for g in &decomposition.groups {
        let template = dictionary
            .get(&g.name)
            .ok_or_else(|| AnchorError::UnknownGroup(g.name.clone()))?;
        let id = format!("FG_{}", g.id);
        for &a in &g.atoms {
            node_of_atom[a] = id.clone();
        }
        let has_alternatives = template.atoms[..template.core_len]
            .iter()
            .any(|p| matches!(p.element, ElementPattern::OneOf(_)));
        let elements = if has_alternatives {
            g.core.iter().map(|&a| graph.atom(a).element.symbol().to_string()).collect()
        } else {
            Vec::new()
        };
        let heteroatoms = template
            .ring_heteroatoms()
            .into_iter()
            .map(|i| {
                let p = canvas[g.core[i]];
                [p.x, p.y]
            })
            .collect();
        hybrid.supernodes.push(SuperNode {
            id,
            label: g.name.clone(),
            bbox: box_of(&g.atoms),
            elements,
            heteroatoms,
        });
    }
    for (k, &a) in decomposition.residual.iter().enumerate() {
        let id = format!("A_{}", k + 1);
        node_of_atom[a] = id.clone();
        let token = atom_token(graph, a);
        hybrid.atoms.push(HybridAtom {
            id,
            symbol: token.trim_start_matches('[').trim_end_matches(']').to_string(),
            bbox: box_of(&[a]),
        });
    }

    let mut bond_source = Vec::new();
    let mut inside: Vec<Vec<usize>> = vec![Vec::new(); decomposition.groups.len()];
    let owner = decomposition.owner(n);
    for (bi, b) in graph.bonds().iter().enumerate() {
        if node_of_atom[b.a] == node_of_atom[b.b] {
            continue;
        }
        for end in [b.a, b.b] {
            if let Some(gi) = owner[end] {
                if !inside[gi].contains(&end) {
                    inside[gi].push(end);
                }
            }
        }
        hybrid.bonds.push(HybridBond {
            source: node_of_atom[b.a].clone(),
            target: node_of_atom[b.b].clone(),
            order: b.order,
        });
        bond_source.push(bi);
    }
    let anchors = AnchorSet {
        groups: decomposition
            .groups
            .iter()
            .zip(&inside)
            .map(|(g, ins)| {
                let mut atoms: Vec<usize> = ins.clone();
                atoms.sort_by_key(|a| g.core.iter().position(|c| c == a));
                GroupAnchors {
                    id: format!("FG_{}", g.id),
                    anchors: atoms.iter().map(|&a| canvas[a]).collect(),
                }
            })
            .collect(),
    };
    Ok(AnchorLayout {
        hybrid,
        anchors,
        mapping,
        canvas,
        node_of_atom,
        extents,
        bond_source,
    })
}

/// Hybrid graph and anchors of a decomposed molecule with 2D coordinates.
///
/// Each bond crossing a node boundary becomes a hybrid bond; the endpoints
/// inside a group become its anchors (one per distinct atom). Boxes are the
/// labeled atom extents on the canvas, padded by 4% of their diagonal.
pub fn compute_anchors(
    graph: &MolecularGraph,
    decomposition: &Decomposition,
    dictionary: &Dictionary,
) -> Result<(HybridGraph, AnchorSet), AnchorError> {
    let layout = anchor_layout(graph, decomposition, dictionary)?;
    Ok((layout.hybrid, layout.anchors))
}

/// Parses a residual atom symbol such as `C`, `c`, `nH`, `N+`, `O-` or `NH4+`.
///
/// A bare organic-subset symbol leaves hydrogens to sanitize; anything with
/// an explicit hydrogen count or charge fixes the count.
pub fn parse_atom_label(label: &str) -> Option<Atom> {
    let text = label.trim().trim_start_matches('[').trim_end_matches(']');
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return None;
    }
    let aromatic = bytes[0].is_ascii_lowercase();
    let mut symbol_len = 1;
    let two_letter = |s: &str| {
        if aromatic {
            matches!(s, "se" | "as" | "te")
        } else {
            Element::from_symbol(s).is_some()
        }
    };
    if bytes.len() >= 2 && bytes[1].is_ascii_lowercase() && two_letter(&text[..2]) {
        symbol_len = 2;
    }
    let raw_symbol = &text[..symbol_len];
    let symbol = if aromatic {
        let mut s = raw_symbol.to_string();
        s[..1].make_ascii_uppercase();
        s
    } else {
        raw_symbol.to_string()
    };
    let element = Element::from_symbol(&symbol)?;
    if aromatic && !element.can_be_aromatic() {
        return None;
    }
    let mut rest = &text[symbol_len..];
    let mut hydrogens: Option<u8> = None;
    if let Some(r) = rest.strip_prefix('H') {
        let digits = r.chars().take_while(|c| c.is_ascii_digit()).count();
        hydrogens = Some(if digits == 0 { 1 } else { r[..digits].parse().ok()? });
        rest = &r[digits..];
    }
    let mut charge: i8 = 0;
    if !rest.is_empty() {
        let sign: i8 = match rest.as_bytes()[0] {
            b'+' => 1,
            b'-' => -1,
            _ => return None,
        };
        let tail = &rest[1..];
        let magnitude: i8 = if tail.is_empty() {
            1
        } else if tail.bytes().all(|c| c == rest.as_bytes()[0]) {
            tail.len() as i8 + 1
        } else {
            tail.parse().ok()?
        };
        charge = sign * magnitude;
    }
    let mut atom = Atom::new(element).with_charge(charge);
    atom.is_aromatic = aromatic;
    let bare = hydrogens.is_none() && charge == 0 && element.is_organic_subset();
    if !bare {
        atom = atom.with_hydrogens(hydrogens.unwrap_or(0));
    }
    Some(atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgdict::decompose;
    use crate::molgraph::{generate_2d_coords, parse_smiles, sanitize};

    fn prepared(s: &str) -> (MolecularGraph, Decomposition) {
        let g = generate_2d_coords(&sanitize(&parse_smiles(s).unwrap()).unwrap()).graph;
        let d = decompose(&g, &Dictionary::shipped()).unwrap();
        (g, d)
    }

    #[test]
    fn ethanol_hydroxyl() {
        let (g, d) = prepared("CCO");
        let (h, a) = compute_anchors(&g, &d, &Dictionary::shipped()).unwrap();
        assert_eq!(h.supernodes.len(), 1);
        assert_eq!(h.supernodes[0].label, "Alcohol/Hydroxyl");
        assert_eq!(h.atoms.len(), 2);
        assert_eq!(h.bonds.len(), 2);
        assert_eq!(a.total(), 1);
        let layout = anchor_layout(&g, &d, &Dictionary::shipped()).unwrap();
        assert_eq!(a.get("FG_1")[0], layout.canvas[2]);
        assert!(h.supernodes[0].bbox.contains(a.get("FG_1")[0], 0.0));
    }

    #[test]
    fn para_linker_has_two_opposite_anchors() {
        let (g, d) = prepared("Cc1ccc(C)cc1");
        let (h, a) = compute_anchors(&g, &d, &Dictionary::shipped()).unwrap();
        assert_eq!(h.supernodes[0].label, "Aryl");
        let pts = a.get("FG_1");
        assert_eq!(pts.len(), 2);
        let c = h.supernodes[0].bbox.center();
        let (u, v) = (pts[0] - c, pts[1] - c);
        assert!((u.dot(v) / (u.norm() * v.norm()) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_group_molecule_has_no_anchors() {
        let (g, d) = prepared("c1ccccc1");
        let (h, a) = compute_anchors(&g, &d, &Dictionary::shipped()).unwrap();
        assert_eq!(h.supernodes.len(), 1);
        assert!(h.bonds.is_empty() && h.atoms.is_empty());
        assert_eq!(a.total(), 0);
    }

    #[test]
    fn boxes_stay_on_canvas() {
        let (g, d) = prepared("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1");
        let (h, a) = compute_anchors(&g, &d, &Dictionary::shipped()).unwrap();
        for s in &h.supernodes {
            s.bbox.validate().unwrap();
            for p in a.get(&s.id) {
                assert!(s.bbox.contains(*p, 0.0));
            }
        }
        for at in &h.atoms {
            at.bbox.validate().unwrap();
        }
        let halide = h.supernodes.iter().find(|s| s.label == "Aryl Halide").unwrap();
        assert_eq!(halide.elements, vec!["Br"]);
    }

    #[test]
    fn missing_coordinates() {
        let g = sanitize(&parse_smiles("CCO").unwrap()).unwrap();
        let d = decompose(&g, &Dictionary::shipped()).unwrap();
        assert_eq!(
            compute_anchors(&g, &d, &Dictionary::shipped()),
            Err(AnchorError::MissingCoordinates(0))
        );
    }

    #[test]
    fn atom_labels() {
        let c = parse_atom_label("C").unwrap();
        assert_eq!((c.element, c.no_implicit), (Element::C, false));
        let nh = parse_atom_label("nH").unwrap();
        assert!(nh.is_aromatic && nh.no_implicit && nh.explicit_h == 1);
        let nh4 = parse_atom_label("[NH4+]").unwrap();
        assert_eq!((nh4.explicit_h, nh4.formal_charge), (4, 1));
        assert_eq!(parse_atom_label("O-").unwrap().formal_charge, -1);
        assert_eq!(parse_atom_label("Fe+2").unwrap().formal_charge, 2);
        assert_eq!(parse_atom_label("O--").unwrap().formal_charge, -2);
        assert_eq!(parse_atom_label("Cl").unwrap().element, Element::CL);
        assert!(parse_atom_label("Xx").is_none());
        assert!(parse_atom_label("").is_none());
        assert!(parse_atom_label("C*").is_none());
    }
}
