use std::collections::HashMap;

use serde::Serialize;

use crate::anchor::{parse_atom_label, AnchorSet, HybridGraph};
use crate::fgdict::{Dictionary, FunctionalGroupTemplate};
use crate::geometry::Point;
use crate::molgraph::{sanitize, Atom, Element, MolecularGraph};

use super::{orient_group, DvmError, GroupObservation};

/// How one super-node was expanded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub id: String,
    pub label: String,
    /// Graph atom index of every template core atom.
    pub atoms: Vec<usize>,
    /// Template core atom bound to each anchor.
    pub attachment_atoms: Vec<usize>,
    pub reflected: bool,
    pub cosines: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub graph: MolecularGraph,
    pub groups: Vec<GroupReport>,
}

#[derive(Clone, Copy)]
enum Node {
    Group(usize),
    Atom(usize),
}

struct GroupInput<'a> {
    template: &'a FunctionalGroupTemplate,
    anchors: Vec<Point>,
    elements: Vec<Element>,
}

/// Rebuilds the full molecular graph from a hybrid graph and its anchors.
///
/// Each bond touching a super-node is bound to one of its anchors (the anchor
/// nearest the partner, with every anchor kept in use), anchors are matched
/// to template attachment atoms by orienting the template, and hydrogens
/// fill each core atom up to its budget.
pub fn reconstruct(hybrid: &HybridGraph, anchors: &AnchorSet, dictionary: &Dictionary) -> Result<Reconstruction, DvmError> {
    let mut index: HashMap<&str, Node> = HashMap::new();
    let mut groups = Vec::with_capacity(hybrid.supernodes.len());
    for (i, s) in hybrid.supernodes.iter().enumerate() {
        let template = dictionary.get(&s.label).ok_or_else(|| DvmError::UnknownGroup(s.label.clone()))?;
        let elements = if s.elements.is_empty() {
            Vec::new()
        } else {
            if s.elements.len() != template.core_len {
                return Err(DvmError::Structural {
                    node: s.id.clone(),
                    message: format!("{} element symbols for {} core atoms", s.elements.len(), template.core_len),
                });
            }
            s.elements
                .iter()
                .zip(&template.atoms)
                .map(|(sym, pattern)| {
                    Element::from_symbol(sym)
                        .filter(|e| pattern.element.matches(*e))
                        .ok_or_else(|| DvmError::Structural {
                            node: s.id.clone(),
                            message: format!("element '{sym}' not allowed by {}", template.name),
                        })
                })
                .collect::<Result<_, _>>()?
        };
        index.insert(&s.id, Node::Group(i));
        groups.push(GroupInput {
            template,
            anchors: anchors.get(&s.id).to_vec(),
            elements,
        });
    }
    let mut residual = Vec::with_capacity(hybrid.atoms.len());
    for (i, a) in hybrid.atoms.iter().enumerate() {
        let atom = parse_atom_label(&a.symbol).ok_or_else(|| DvmError::BadAtomSymbol {
            id: a.id.clone(),
            symbol: a.symbol.clone(),
        })?;
        index.insert(&a.id, Node::Atom(i));
        residual.push(atom);
    }
    let ends: Vec<(Node, Node)> = hybrid
        .bonds
        .iter()
        .map(|b| {
            let get = |id: &str| index.get(id).copied().ok_or_else(|| DvmError::MissingNode(id.to_string()));
            Ok((get(&b.source)?, get(&b.target)?))
        })
        .collect::<Result<_, DvmError>>()?;

    // bound[b] = anchor index on the source and target side of bond b
    let mut bound: Vec<[Option<usize>; 2]> = vec![[None, None]; ends.len()];
    let mut used: Vec<Vec<usize>> = groups.iter().map(|g| vec![0; g.anchors.len()]).collect();

    // FG-FG bonds: repeatedly take the mutually closest anchor pair, fresh anchors first.
    let mut pending: Vec<usize> = (0..ends.len())
        .filter(|&bi| matches!(ends[bi], (Node::Group(_), Node::Group(_))))
        .collect();
    while !pending.is_empty() {
        let mut best: Option<(usize, f64, usize, usize, usize)> = None;
        for (pi, &bi) in pending.iter().enumerate() {
            let (Node::Group(ga), Node::Group(gb)) = ends[bi] else { unreachable!() };
            for (i, &p) in groups[ga].anchors.iter().enumerate() {
                for (j, &q) in groups[gb].anchors.iter().enumerate() {
                    let reused = usize::from(used[ga][i] > 0) + usize::from(used[gb][j] > 0);
                    let d = p.distance(q);
                    if best.is_none_or(|(r, bd, ..)| (reused, d) < (r, bd)) {
                        best = Some((reused, d, pi, i, j));
                    }
                }
            }
        }
        let Some((_, _, pi, i, j)) = best else { break };
        let bi = pending.remove(pi);
        let (Node::Group(ga), Node::Group(gb)) = ends[bi] else { unreachable!() };
        bound[bi] = [Some(i), Some(j)];
        used[ga][i] += 1;
        used[gb][j] += 1;
    }

    // FG-atom bonds: nearest anchor to the atom, then keep every anchor in use.
    for (gi, group) in groups.iter().enumerate() {
        let node = &hybrid.supernodes[gi].id;
        let incident: Vec<(usize, usize, Point)> = ends
            .iter()
            .enumerate()
            .filter_map(|(bi, &(s, t))| match (s, t) {
                (Node::Group(g), Node::Atom(a)) if g == gi => Some((bi, 0, hybrid.atoms[a].bbox.center())),
                (Node::Atom(a), Node::Group(g)) if g == gi => Some((bi, 1, hybrid.atoms[a].bbox.center())),
                _ => None,
            })
            .collect();
        let group_bonds = ends
            .iter()
            .filter(|(s, t)| matches!(s, Node::Group(g) if *g == gi) || matches!(t, Node::Group(g) if *g == gi))
            .count();
        if group.anchors.is_empty() {
            if group_bonds == 0 || group.template.attachment_candidates.len() == 1 {
                continue;
            }
            return Err(DvmError::Structural {
                node: node.clone(),
                message: format!("{group_bonds} bonds but no anchors"),
            });
        }
        let cost = |e: usize, j: usize| group.anchors[j].distance(incident[e].2);
        let mut choice: Vec<usize> = (0..incident.len())
            .map(|e| {
                (0..group.anchors.len())
                    .min_by(|&a, &b| cost(e, a).partial_cmp(&cost(e, b)).expect("finite"))
                    .expect("anchors")
            })
            .collect();
        loop {
            let mut counts = used[gi].clone();
            for &c in &choice {
                counts[c] += 1;
            }
            let Some(j) = (0..group.anchors.len()).find(|&j| counts[j] == 0) else { break };
            let spare = (0..incident.len())
                .filter(|&e| counts[choice[e]] > 1)
                .min_by(|&a, &b| {
                    (cost(a, j) - cost(a, choice[a]))
                        .partial_cmp(&(cost(b, j) - cost(b, choice[b])))
                        .expect("finite")
                });
            match spare {
                Some(e) => choice[e] = j,
                None => {
                    return Err(DvmError::Structural {
                        node: node.clone(),
                        message: format!("{} anchors but {} bonds", group.anchors.len(), group_bonds),
                    })
                }
            }
        }
        for (e, &(bi, side, _)) in incident.iter().enumerate() {
            bound[bi][side] = Some(choice[e]);
        }
    }

    let bond_length = drawn_bond_length(hybrid, &groups, &ends, &bound);

    let mut graph = MolecularGraph::new();
    let mut reports = Vec::with_capacity(groups.len());
    let mut group_atoms: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
    let mut anchor_atom: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
    for (gi, group) in groups.iter().enumerate() {
        let t = group.template;
        let s = &hybrid.supernodes[gi];
        let mut valence = vec![0u32; group.anchors.len().max(1)];
        let mut single_external = 0u32;
        for (bi, &(a, b)) in ends.iter().enumerate() {
            let order = u32::from(hybrid.bonds[bi].order.valence());
            for (side, node) in [a, b].into_iter().enumerate() {
                if matches!(node, Node::Group(g) if g == gi) {
                    match bound[bi][side] {
                        Some(j) => valence[j] += order,
                        None => single_external += order,
                    }
                }
            }
        }
        let heteroatoms: Vec<Point> = s.heteroatoms.iter().map(|p| Point::new(p[0], p[1])).collect();
        let mut obs = GroupObservation {
            bbox: s.bbox,
            anchors: &[],
            anchor_valence: &[],
            elements: &group.elements,
            heteroatoms: &heteroatoms,
            bond_length,
        };
        let (slots, reflected, cosines, residual, coords) = if group.anchors.is_empty() {
            let o = orient_group(t, &obs)?;
            let slots = if single_external > 0 { vec![0] } else { Vec::new() };
            valence[0] = single_external;
            (slots, o.reflected, Vec::new(), o.residual, o.coords)
        } else {
            obs.anchors = &group.anchors;
            obs.anchor_valence = &valence;
            let o = orient_group(t, &obs)?;
            (o.slots, o.reflected, o.cosines, o.residual, o.coords)
        };
        let bound_atoms: Vec<usize> = slots.iter().map(|&sl| t.attachment_candidates[sl]).collect();
        let base = graph.atom_count();
        for i in 0..t.core_len {
            let pattern = &t.atoms[i];
            let element = group
                .elements
                .get(i)
                .copied()
                .or_else(|| pattern.element.representative())
                .unwrap_or(Element::C);
            let external: u32 = bound_atoms
                .iter()
                .zip(&valence)
                .filter(|(&c, _)| c == i)
                .map(|(_, &v)| v)
                .sum();
            let h = u32::from(t.budgets[i]).saturating_sub(external) as u8;
            let mut atom = Atom::new(element).with_charge(pattern.charge).with_hydrogens(h);
            atom.is_aromatic = pattern.aromatic == Some(true);
            atom.coord_2d = coords.get(i).copied();
            graph.add_atom(atom).map_err(|e| DvmError::Structural {
                node: s.id.clone(),
                message: e.to_string(),
            })?;
        }
        for b in t.core_bonds() {
            graph
                .add_bond(base + b.a, base + b.b, b.order.expect("core bond order"))
                .map_err(|e| DvmError::Structural {
                    node: s.id.clone(),
                    message: e.to_string(),
                })?;
        }
        group_atoms.push((base..base + t.core_len).collect());
        anchor_atom.push(bound_atoms.iter().map(|&c| base + c).collect());
        reports.push(GroupReport {
            id: s.id.clone(),
            label: s.label.clone(),
            atoms: (base..base + t.core_len).collect(),
            attachment_atoms: bound_atoms,
            reflected,
            cosines,
            residual,
        });
    }
    let mut residual_index = Vec::with_capacity(residual.len());
    for (i, mut atom) in residual.into_iter().enumerate() {
        atom.coord_2d = Some(hybrid.atoms[i].bbox.center());
        residual_index.push(graph.add_atom(atom).map_err(|e| DvmError::Structural {
            node: hybrid.atoms[i].id.clone(),
            message: e.to_string(),
        })?);
    }
    for (bi, &(a, b)) in ends.iter().enumerate() {
        let resolve = |node: Node, side: usize| match node {
            Node::Atom(i) => residual_index[i],
            Node::Group(g) => match bound[bi][side] {
                Some(j) => anchor_atom[g][j],
                None => anchor_atom[g].first().copied().unwrap_or(group_atoms[g][0]),
            },
        };
        let (u, v) = (resolve(a, 0), resolve(b, 1));
        let hb = &hybrid.bonds[bi];
        graph.add_bond(u, v, hb.order).map_err(|e| DvmError::Structural {
            node: format!("{}-{}", hb.source, hb.target),
            message: e.to_string(),
        })?;
    }
    let graph = sanitize(&graph).map_err(DvmError::Sanitize)?;
    Ok(Reconstruction { graph, groups: reports })
}

/// Median length of the bonds whose two ends are pinned to points: residual
/// atom box centers and bound anchors.
fn drawn_bond_length(
    hybrid: &HybridGraph,
    groups: &[GroupInput],
    ends: &[(Node, Node)],
    bound: &[[Option<usize>; 2]],
) -> Option<f64> {
    let mut samples: Vec<f64> = ends
        .iter()
        .zip(bound)
        .filter_map(|(&(a, b), sides)| {
            let point = |node: Node, side: usize| match node {
                Node::Atom(i) => Some(hybrid.atoms[i].bbox.center()),
                Node::Group(g) => sides[side].map(|j| groups[g].anchors[j]),
            };
            Some(point(a, 0)?.distance(point(b, 1)?))
        })
        .filter(|d| *d > 1e-9)
        .collect();
    if samples.is_empty() {
        return None;
    }
    samples.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    Some(samples[samples.len() / 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchor::{compute_anchors, HybridBond, SuperNode};
    use crate::fgdict::decompose;
    use crate::geometry::BBox;
    use crate::molgraph::{canonical_smiles, generate_2d_coords, parse_smiles, BondOrder};

    fn round_trip(smiles: &str) -> String {
        let dict = Dictionary::shipped();
        let g = generate_2d_coords(&sanitize(&parse_smiles(smiles).unwrap()).unwrap()).graph;
        let d = decompose(&g, &dict).unwrap();
        let (h, a) = compute_anchors(&g, &d, &dict).unwrap();
        let r = reconstruct(&h, &a, &dict).unwrap();
        canonical_smiles(&r.graph).unwrap()
    }

    fn canon(smiles: &str) -> String {
        canonical_smiles(&sanitize(&parse_smiles(smiles).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn ethanol() {
        assert_eq!(round_trip("CCO"), "CCO");
    }

    #[test]
    fn round_trips() {
        for s in [
            "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1",
            "OB(O)c1ccccc1",
            "CC(=O)Nc1ccc(O)cc1",
            "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
            "c1ccccc1",
            "C",
            "O=[N+]([O-])c1ccccc1",
            "CN1CCC[C@H]1c1cccnc1",
            "NCC(=O)O",
        ] {
            assert_eq!(round_trip(s), canon(s), "{s}");
        }
    }

    #[test]
    fn single_candidate_without_anchor() {
        let dict = Dictionary::shipped();
        let hybrid = HybridGraph {
            supernodes: vec![SuperNode {
                id: "FG_1".into(),
                label: "Alcohol/Hydroxyl".into(),
                bbox: BBox::new(500.0, 400.0, 560.0, 460.0).unwrap(),
                elements: vec![],
                heteroatoms: vec![],
            }],
            atoms: vec![crate::anchor::HybridAtom {
                id: "A_1".into(),
                symbol: "C".into(),
                bbox: BBox::new(400.0, 400.0, 420.0, 420.0).unwrap(),
            }],
            bonds: vec![HybridBond {
                source: "A_1".into(),
                target: "FG_1".into(),
                order: BondOrder::Single,
            }],
        };
        let r = reconstruct(&hybrid, &AnchorSet::default(), &dict).unwrap();
        assert_eq!(canonical_smiles(&r.graph).unwrap(), "CO");
    }

    #[test]
    fn errors() {
        let dict = Dictionary::shipped();
        let mut hybrid = HybridGraph {
            supernodes: vec![SuperNode {
                id: "FG_1".into(),
                label: "Nonsense".into(),
                bbox: BBox::new(0.0, 0.0, 10.0, 10.0).unwrap(),
                elements: vec![],
                heteroatoms: vec![],
            }],
            ..Default::default()
        };
        assert_eq!(
            reconstruct(&hybrid, &AnchorSet::default(), &dict),
            Err(DvmError::UnknownGroup("Nonsense".into()))
        );
        hybrid.supernodes.clear();
        hybrid.bonds.push(HybridBond {
            source: "A_9".into(),
            target: "A_1".into(),
            order: BondOrder::Single,
        });
        assert_eq!(
            reconstruct(&hybrid, &AnchorSet::default(), &dict),
            Err(DvmError::MissingNode("A_9".into()))
        );
    }

    #[test]
    fn overfull_atom_fails_sanitize() {
        let dict = Dictionary::shipped();
        let b = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let atom = |id: &str, sym: &str| crate::anchor::HybridAtom {
            id: id.into(),
            symbol: sym.into(),
            bbox: b,
        };
        let bond = |s: &str, t: &str| HybridBond {
            source: s.into(),
            target: t.into(),
            order: BondOrder::Double,
        };
        let hybrid = HybridGraph {
            supernodes: vec![],
            atoms: vec![atom("A_1", "O"), atom("A_2", "O"), atom("A_3", "O")],
            bonds: vec![bond("A_1", "A_2"), bond("A_2", "A_3")],
        };
        assert!(matches!(
            reconstruct(&hybrid, &AnchorSet::default(), &dict),
            Err(DvmError::Sanitize(_))
        ));
    }
}
