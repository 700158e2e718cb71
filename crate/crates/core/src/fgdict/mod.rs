//! Functional-group templates and the priority-driven greedy decomposition.

mod decompose;
mod matcher;
mod pattern;

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::Point;
use crate::molgraph::{generate_2d_coords, Atom, Element, MolecularGraph};

pub use decompose::{decompose, Decomposition, GroupInstance};
pub use matcher::{match_embeddings, match_template, TemplateMatch};
pub use pattern::{parse_fragments, ElementPattern, FragmentDef, PatternAtom, PatternBond};

/// Shipped priority list, one group name per line, highest priority first.
pub const DEFAULT_PRIORITY_LIST: &str = include_str!("../../data/priority_list.txt");
/// Shipped pattern definitions for every group of the default list.
pub const DEFAULT_FRAGMENTS: &str = include_str!("../../data/fragments.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DictError {
    #[error("fragment file line {line}: {message}")]
    Fragment { line: usize, message: String },
    #[error("no pattern definition for group '{0}'")]
    MissingPattern(String),
    #[error("group '{0}' listed twice")]
    DuplicateName(String),
    #[error("graph must be sanitized before matching")]
    NotSanitized,
}

/// A named pattern with its priority and canonical geometry.
///
/// Pattern atoms `0..core_len` form the group itself; the rest are context
/// atoms that must be present next to the group but are not part of it.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalGroupTemplate {
    pub name: String,
    pub priority_rank: usize,
    pub atoms: Vec<PatternAtom>,
    pub bonds: Vec<PatternBond>,
    pub core_len: usize,
    /// Core atom indices allowed to bond outside the group.
    pub attachment_candidates: Vec<usize>,
    /// Hydrogens plus external bond valence carried by each core atom.
    pub budgets: Vec<u8>,
    /// Minimum external valence of each core atom (bonds to context atoms).
    pub min_external: Vec<u8>,
    /// Layout of the core atoms, centered at their centroid.
    pub canonical_coords: Vec<Point>,
    /// Unit vectors from the centroid to each attachment candidate.
    pub direction_vectors: Vec<Point>,
}

impl FunctionalGroupTemplate {
    fn from_def(def: FragmentDef, rank: usize) -> FunctionalGroupTemplate {
        let core_len = def.atoms.iter().filter(|a| !a.context).count();
        let core_bonds: Vec<&PatternBond> = def.bonds.iter().filter(|b| b.a < core_len && b.b < core_len).collect();
        let budgets: Vec<u8> = (0..core_len)
            .map(|i| {
                let atom = &def.atoms[i];
                atom.budget.unwrap_or_else(|| {
                    let internal: u32 = core_bonds
                        .iter()
                        .filter(|b| b.a == i || b.b == i)
                        .map(|b| u32::from(b.order.expect("core order").valence()))
                        .sum();
                    standalone_h(atom, internal)
                })
            })
            .collect();
        let min_external: Vec<u8> = (0..core_len)
            .map(|i| {
                def.bonds
                    .iter()
                    .filter(|b| (b.a == i && b.b >= core_len) || (b.b == i && b.a >= core_len))
                    .map(|b| b.order.map_or(1, |o| o.valence()))
                    .sum()
            })
            .collect();
        let fragment = core_fragment(&def.atoms[..core_len], &core_bonds);
        let laid = generate_2d_coords(&fragment).graph;
        let raw: Vec<Point> = (0..core_len).map(|i| laid.atom(i).coord_2d.unwrap_or_default()).collect();
        let center = Point::centroid(&raw);
        let canonical_coords: Vec<Point> = raw.iter().map(|&p| p - center).collect();
        let direction_vectors = def
            .attach
            .iter()
            .map(|&i| canonical_coords[i].normalized().unwrap_or(Point::new(1.0, 0.0)))
            .collect();
        FunctionalGroupTemplate {
            name: def.name,
            priority_rank: rank,
            atoms: def.atoms,
            bonds: def.bonds,
            core_len,
            attachment_candidates: def.attach,
            budgets,
            min_external,
            canonical_coords,
            direction_vectors,
        }
    }

    /// Largest external valence core atom `i` can take.
    pub fn max_external(&self, i: usize) -> u8 {
        self.budgets[i].saturating_sub(self.atoms[i].hydrogens.unwrap_or(0))
    }

    /// Core atoms as a standalone graph; alternative elements take the first choice.
    pub fn core_graph(&self) -> MolecularGraph {
        let bonds: Vec<&PatternBond> = self.core_bonds().collect();
        core_fragment(&self.atoms[..self.core_len], &bonds)
    }

    pub fn core_bonds(&self) -> impl Iterator<Item = &PatternBond> {
        self.bonds.iter().filter(|b| b.a < self.core_len && b.b < self.core_len)
    }

    /// Core atoms other than carbon that sit on a core ring, in core order.
    pub fn ring_heteroatoms(&self) -> Vec<usize> {
        let core = self.core_graph();
        let in_ring = crate::molgraph::rings::ring_atoms(&core);
        (0..self.core_len)
            .filter(|&i| in_ring[i] && core.atom(i).element != Element::C)
            .collect()
    }

    /// Position of core atom `i` in the attachment candidate list.
    pub fn candidate_slot(&self, i: usize) -> Option<usize> {
        self.attachment_candidates.iter().position(|&c| c == i)
    }
}

fn standalone_h(atom: &PatternAtom, internal: u32) -> u8 {
    let Some(element) = atom.element.representative() else {
        return 0;
    };
    let aromatic = atom.aromatic == Some(true);
    if atom.charge == 0 {
        return crate::molgraph::bare_implicit_h(element, aromatic, internal);
    }
    let used = internal + u32::from(aromatic);
    element
        .charged_valences(atom.charge)
        .and_then(|vals| vals.iter().map(|&v| u32::from(v)).find(|&v| v >= used))
        .map_or(0, |v| (v - used) as u8)
}

fn core_fragment(atoms: &[PatternAtom], bonds: &[&PatternBond]) -> MolecularGraph {
    let mut g = MolecularGraph::new();
    for a in atoms {
        let mut atom = Atom::new(a.element.representative().unwrap_or(Element::C)).with_charge(a.charge);
        atom.is_aromatic = a.aromatic == Some(true);
        g.add_atom(atom).expect("pattern charge in range");
    }
    for b in bonds {
        g.add_bond(b.a, b.b, b.order.expect("core order")).expect("validated pattern bond");
    }
    g
}

/// Templates in priority order, immutable after loading.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dictionary {
    templates: Vec<FunctionalGroupTemplate>,
    index: HashMap<String, usize>,
}

impl Dictionary {
    /// The shipped 66-group dictionary.
    pub fn shipped() -> Dictionary {
        load_priority_list(DEFAULT_PRIORITY_LIST).expect("shipped dictionary is valid")
    }

    pub fn templates(&self) -> &[FunctionalGroupTemplate] {
        &self.templates
    }

    pub fn get(&self, name: &str) -> Option<&FunctionalGroupTemplate> {
        self.index.get(name).map(|&i| &self.templates[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Loads a priority list against the shipped fragment definitions.
pub fn load_priority_list(document: &str) -> Result<Dictionary, DictError> {
    load_priority_list_with(document, DEFAULT_FRAGMENTS)
}

/// Loads a priority list against the given fragment definitions.
///
/// Blank lines are skipped; rank is the 1-based position among the names.
pub fn load_priority_list_with(document: &str, fragments: &str) -> Result<Dictionary, DictError> {
    let mut defs: HashMap<String, FragmentDef> =
        parse_fragments(fragments)?.into_iter().map(|d| (d.name.clone(), d)).collect();
    let mut dict = Dictionary::default();
    for name in document.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if dict.index.contains_key(name) {
            return Err(DictError::DuplicateName(name.to_string()));
        }
        let def = defs.remove(name).ok_or_else(|| DictError::MissingPattern(name.to_string()))?;
        let rank = dict.templates.len() + 1;
        dict.index.insert(name.to_string(), dict.templates.len());
        dict.templates.push(FunctionalGroupTemplate::from_def(def, rank));
    }
    Ok(dict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_list_has_66_groups() {
        let d = Dictionary::shipped();
        assert_eq!(d.len(), 66);
        assert_eq!(d.templates()[0].name, "Quaternary Ammonium");
        assert_eq!(d.templates()[15].name, "Carboxylic Acid");
        assert_eq!(d.templates()[15].priority_rank, 16);
        assert_eq!(d.templates()[65].name, "Halo");
    }

    #[test]
    fn template_invariants() {
        for t in Dictionary::shipped().templates() {
            assert!(!t.attachment_candidates.is_empty(), "{}", t.name);
            assert_eq!(t.direction_vectors.len(), t.attachment_candidates.len());
            for v in &t.direction_vectors {
                assert!((v.norm() - 1.0).abs() < 1e-9, "{}", t.name);
            }
            let c = Point::centroid(&t.canonical_coords);
            assert!(c.norm() < 1e-9, "{}", t.name);
            for i in 0..t.core_len {
                assert!(t.min_external[i] <= t.max_external(i), "{} atom {i}", t.name);
                if t.candidate_slot(i).is_none() {
                    assert_eq!(t.max_external(i), 0, "{} atom {i} cannot attach", t.name);
                }
            }
        }
    }

    #[test]
    fn budgets() {
        let d = Dictionary::shipped();
        assert_eq!(d.get("Quaternary Ammonium").unwrap().budgets, vec![4]);
        assert_eq!(d.get("Carboxylic Acid").unwrap().budgets, vec![1, 0, 1]);
        assert_eq!(d.get("Aryl").unwrap().budgets, vec![1; 6]);
        assert_eq!(d.get("Pyridyl").unwrap().budgets, vec![0, 1, 1, 1, 1, 1]);
        assert_eq!(d.get("Nitro").unwrap().budgets, vec![1, 0, 0]);
        assert_eq!(d.get("Primary Amine").unwrap().min_external, vec![1]);
    }

    #[test]
    fn empty_document_gives_empty_dictionary() {
        assert!(load_priority_list("").unwrap().is_empty());
    }

    #[test]
    fn load_errors() {
        assert_eq!(load_priority_list("Aryl\nAryl"), Err(DictError::DuplicateName("Aryl".into())));
        assert_eq!(load_priority_list("Aryl\nUnobtainium"), Err(DictError::MissingPattern("Unobtainium".into())));
    }
}
