//! Molecular graphs: atoms, bonds, parsing, sanitization, canonical SMILES
//! and 2D depiction coordinates.

mod canon;
mod element;
mod layout;
mod molfile;
pub mod rings;
mod sanitize;
mod smiles;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

pub use canon::{canonical_ranks, canonical_smiles};
pub use element::Element;
pub use layout::{generate_2d_coords, LayoutReport};
pub use molfile::{parse_molfile, split_sdf};
pub use sanitize::{sanitize, valence_unchecked, Diagnostic, Violation};
pub use smiles::parse_smiles;
pub(crate) use canon::atom_token;
pub(crate) use sanitize::bare_implicit_h;

pub const MAX_ABS_CHARGE: i8 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MolError {
    #[error("SMILES parse error at offset {offset}: {message}")]
    Smiles { offset: usize, message: String },
    #[error("MOL parse error on line {line}: {message}")]
    Molfile { line: usize, message: String },
    #[error("unknown element symbol '{0}'")]
    UnknownElement(String),
    #[error("atom index {0} out of range")]
    AtomOutOfRange(usize),
    #[error("bond from atom {0} to itself")]
    SelfBond(usize),
    #[error("atoms {0} and {1} are already bonded")]
    DuplicateBond(usize, usize),
    #[error("formal charge {0} outside [-4, 4]")]
    ChargeOutOfRange(i8),
    #[error("graph must be sanitized first")]
    NotSanitized,
    #[error("sanitize failed: {0}")]
    Sanitize(Diagnostic),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
    Wedge,
    Dash,
}

impl BondOrder {
    /// Contribution to the valence of each endpoint.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            _ => 1,
        }
    }

    /// Wedge and dash collapse to single; used wherever stereo is ignored.
    pub fn unstereo(self) -> BondOrder {
        match self {
            BondOrder::Wedge | BondOrder::Dash => BondOrder::Single,
            o => o,
        }
    }

    pub fn parse(label: &str) -> Option<BondOrder> {
        Some(match label.to_ascii_uppercase().as_str() {
            "SINGLE" | "1" | "-" => BondOrder::Single,
            "DOUBLE" | "2" | "=" => BondOrder::Double,
            "TRIPLE" | "3" | "#" => BondOrder::Triple,
            "AROMATIC" | "4" | ":" => BondOrder::Aromatic,
            "WEDGE" => BondOrder::Wedge,
            "DASH" | "HASH" => BondOrder::Dash,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            BondOrder::Single => "SINGLE",
            BondOrder::Double => "DOUBLE",
            BondOrder::Triple => "TRIPLE",
            BondOrder::Aromatic => "AROMATIC",
            BondOrder::Wedge => "WEDGE",
            BondOrder::Dash => "DASH",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    /// Hydrogens stated explicitly in the input (bracket atoms, MOL H atoms).
    pub explicit_h: u8,
    /// Hydrogens added by sanitize; `None` until then.
    pub implicit_h: Option<u8>,
    /// Bracket atoms never receive implicit hydrogens.
    pub no_implicit: bool,
    pub is_aromatic: bool,
    pub coord_2d: Option<Point>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            formal_charge: 0,
            explicit_h: 0,
            implicit_h: None,
            no_implicit: false,
            is_aromatic: false,
            coord_2d: None,
        }
    }

    pub fn aromatic(mut self) -> Atom {
        self.is_aromatic = true;
        self
    }

    pub fn with_charge(mut self, charge: i8) -> Atom {
        self.formal_charge = charge;
        self
    }

    /// Fixes the hydrogen count and disables implicit hydrogens.
    pub fn with_hydrogens(mut self, h: u8) -> Atom {
        self.explicit_h = h;
        self.no_implicit = true;
        self
    }

    pub fn total_h(&self) -> u8 {
        self.explicit_h + self.implicit_h.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, atom: usize) -> bool {
        self.a == atom || self.b == atom
    }
}

/// Atoms plus bonds. Indices are dense from 0; any structural edit clears
/// the sanitized flag.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    #[serde(skip)]
    sanitized: bool,
}

impl MolecularGraph {
    pub fn new() -> MolecularGraph {
        MolecularGraph::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_sanitized(&self) -> bool {
        self.sanitized
    }

    pub(crate) fn mark_sanitized(&mut self) {
        self.sanitized = true;
    }

    pub fn add_atom(&mut self, atom: Atom) -> Result<usize, MolError> {
        if atom.formal_charge.abs() > MAX_ABS_CHARGE {
            return Err(MolError::ChargeOutOfRange(atom.formal_charge));
        }
        self.sanitized = false;
        self.atoms.push(atom);
        Ok(self.atoms.len() - 1)
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, MolError> {
        for i in [a, b] {
            if i >= self.atoms.len() {
                return Err(MolError::AtomOutOfRange(i));
            }
        }
        if a == b {
            return Err(MolError::SelfBond(a));
        }
        if self.bond_between(a, b).is_some() {
            return Err(MolError::DuplicateBond(a.min(b), a.max(b)));
        }
        self.sanitized = false;
        self.bonds.push(Bond { a, b, order });
        Ok(self.bonds.len() - 1)
    }

    /// Mutable atom access; clears the sanitized flag.
    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        self.sanitized = false;
        &mut self.atoms[i]
    }

    pub(crate) fn atoms_mut_keep_state(&mut self) -> &mut [Atom] {
        &mut self.atoms
    }

    pub(crate) fn set_bond_order(&mut self, bond: usize, order: BondOrder) {
        self.sanitized = false;
        self.bonds[bond].order = order;
    }

    /// Sets a depiction coordinate; coordinates do not affect sanitization.
    pub fn set_coord(&mut self, i: usize, p: Point) {
        self.atoms[i].coord_2d = Some(p);
    }

    pub fn clear_coords(&mut self) {
        for a in &mut self.atoms {
            a.coord_2d = None;
        }
    }

    pub fn has_coords(&self) -> bool {
        self.atoms.iter().all(|a| a.coord_2d.is_some())
    }

    pub fn coords(&self) -> Option<Vec<Point>> {
        self.atoms.iter().map(|a| a.coord_2d).collect()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.bonds
            .iter()
            .position(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
    }

    /// Per atom: list of (neighbor, bond index), in bond order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (i, b) in self.bonds.iter().enumerate() {
            adj[b.a].push((b.b, i));
            adj[b.b].push((b.a, i));
        }
        adj
    }

    pub fn degree(&self, i: usize) -> usize {
        self.bonds.iter().filter(|b| b.touches(i)).count()
    }

    /// Sum of bond valence contributions at an atom.
    pub fn bond_valence(&self, i: usize) -> u32 {
        self.bonds
            .iter()
            .filter(|b| b.touches(i))
            .map(|b| u32::from(b.order.valence()))
            .sum()
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut k = 0;
            while k < comp.len() {
                for &(n, _) in &adj[comp[k]] {
                    if !seen[n] {
                        seen[n] = true;
                        comp.push(n);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Graph with atoms reordered so that new index `i` holds old atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> MolecularGraph {
        assert_eq!(order.len(), self.atoms.len(), "permutation length");
        let mut inverse = vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let atoms = order.iter().map(|&old| self.atoms[old].clone()).collect();
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: inverse[b.a],
                b: inverse[b.b],
                order: b.order,
            })
            .collect();
        bonds.sort_by_key(|b| (b.a.min(b.b), b.a.max(b.b)));
        MolecularGraph {
            atoms,
            bonds,
            sanitized: self.sanitized,
        }
    }

    /// Induced subgraph on the given atoms (in that order) and the bonds among them.
    pub fn subgraph(&self, atoms: &[usize]) -> MolecularGraph {
        let mut index = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in atoms.iter().enumerate() {
            index[old] = new;
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| index[b.a] != usize::MAX && index[b.b] != usize::MAX)
            .map(|b| Bond {
                a: index[b.a],
                b: index[b.b],
                order: b.order,
            })
            .collect();
        MolecularGraph {
            atoms: atoms.iter().map(|&i| self.atoms[i].clone()).collect(),
            bonds,
            sanitized: false,
        }
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_invariants_enforced() {
        let mut g = MolecularGraph::new();
        let a = g.add_atom(Atom::new(Element::C)).unwrap();
        let b = g.add_atom(Atom::new(Element::O)).unwrap();
        assert_eq!(g.add_bond(a, a, BondOrder::Single), Err(MolError::SelfBond(0)));
        g.add_bond(a, b, BondOrder::Single).unwrap();
        assert_eq!(
            g.add_bond(b, a, BondOrder::Double),
            Err(MolError::DuplicateBond(0, 1))
        );
        assert_eq!(g.add_bond(0, 5, BondOrder::Single), Err(MolError::AtomOutOfRange(5)));
        assert!(g.add_atom(Atom::new(Element::C).with_charge(5)).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let g = parse_smiles("CC(=O)O").unwrap();
        let p = g.permuted(&[3, 1, 0, 2]);
        assert_eq!(p.atom(0).element, Element::O);
        assert_eq!(p.bond_count(), 3);
        let back = p.permuted(&[2, 1, 3, 0]);
        assert_eq!(back.atoms(), g.atoms());
    }

    #[test]
    fn stereo_bonds_count_as_single() {
        assert_eq!(BondOrder::Wedge.valence(), 1);
        assert_eq!(BondOrder::Dash.unstereo(), BondOrder::Single);
        assert_eq!(BondOrder::parse("double"), Some(BondOrder::Double));
    }
}
