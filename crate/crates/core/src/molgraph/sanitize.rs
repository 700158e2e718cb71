use std::fmt;

use serde::{Deserialize, Serialize};

use super::rings::{bridges, sssr};
use super::{BondOrder, Element, MolError, MolecularGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ValenceOverflow {
        atom: usize,
        element: Element,
        charge: i8,
        valence: u32,
        allowed: Vec<u8>,
    },
    AromaticBondOutsideRing {
        bond: usize,
        a: usize,
        b: usize,
    },
    AromaticAtomWithoutAromaticBond {
        atom: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ValenceOverflow {
                atom,
                element,
                charge,
                valence,
                allowed,
            } => write!(
                f,
                "atom {atom} ({element}, charge {charge}) has valence {valence}, allowed {allowed:?}"
            ),
            Violation::AromaticBondOutsideRing { bond, a, b } => {
                write!(f, "aromatic bond {bond} ({a}-{b}) is not on an all-aromatic cycle")
            }
            Violation::AromaticAtomWithoutAromaticBond { atom } => {
                write!(f, "aromatic atom {atom} has no aromatic ring bond")
            }
        }
    }
}

/// Every problem sanitize found, in atom/bond order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub violations: Vec<Violation>,
}

impl Diagnostic {
    /// Atom indices named by any violation.
    pub fn atoms(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .violations
            .iter()
            .flat_map(|v| match v {
                Violation::ValenceOverflow { atom, .. } => vec![*atom],
                Violation::AromaticBondOutsideRing { a, b, .. } => vec![*a, *b],
                Violation::AromaticAtomWithoutAromaticBond { atom } => vec![*atom],
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl From<Diagnostic> for MolError {
    fn from(d: Diagnostic) -> MolError {
        MolError::Sanitize(d)
    }
}

/// Hydrogens a bare (unbracketed, uncharged) atom receives from its bonds.
///
/// Aromatic atoms count one extra unit of valence for the delocalized bond
/// and only use their lowest valence state.
pub(crate) fn bare_implicit_h(element: Element, aromatic: bool, bond_valence: u32) -> u8 {
    let Some(valences) = element.default_valences() else {
        return 0;
    };
    if aromatic {
        let used = bond_valence + 1;
        let lowest = u32::from(valences[0]);
        return lowest.saturating_sub(used) as u8;
    }
    valences
        .iter()
        .map(|&v| u32::from(v))
        .find(|&v| v >= bond_valence)
        .map_or(0, |v| (v - bond_valence) as u8)
}

fn implicit_h(graph: &MolecularGraph, i: usize) -> u8 {
    let atom = graph.atom(i);
    if atom.no_implicit {
        return 0;
    }
    let used = graph.bond_valence(i) + u32::from(atom.explicit_h);
    if atom.formal_charge == 0 {
        return bare_implicit_h(atom.element, atom.is_aromatic, used);
    }
    let Some(valences) = atom.element.charged_valences(atom.formal_charge) else {
        return 0;
    };
    let used = used + u32::from(atom.is_aromatic);
    valences
        .iter()
        .map(|&v| u32::from(v))
        .find(|&v| v >= used)
        .map_or(0, |v| (v - used) as u8)
}

/// Atoms whose element is outside the checked valence table.
pub fn valence_unchecked(graph: &MolecularGraph) -> Vec<usize> {
    (0..graph.atom_count())
        .filter(|&i| graph.atom(i).element.default_valences().is_none())
        .collect()
}

/// Finalizes implicit hydrogens, perceives aromaticity of Kekulé rings and
/// validates valences and aromatic bonds.
///
/// Hydrogen counts already present are kept, so sanitizing twice is a no-op.
pub fn sanitize(graph: &MolecularGraph) -> Result<MolecularGraph, Diagnostic> {
    let mut g = graph.clone();
    let counts: Vec<Option<u8>> = (0..g.atom_count())
        .map(|i| {
            let a = g.atom(i);
            Some(a.implicit_h.unwrap_or_else(|| implicit_h(&g, i)))
        })
        .collect();
    for (atom, h) in g.atoms_mut_keep_state().iter_mut().zip(counts) {
        atom.implicit_h = h;
    }

    perceive_aromaticity(&mut g);

    let mut violations = Vec::new();
    for i in 0..g.atom_count() {
        let atom = g.atom(i);
        let Some(allowed) = atom.element.charged_valences(atom.formal_charge) else {
            continue;
        };
        let valence = g.bond_valence(i) + u32::from(atom.total_h());
        let max = allowed.iter().copied().max().map_or(0, u32::from);
        if allowed.is_empty() || valence > max {
            violations.push(Violation::ValenceOverflow {
                atom: i,
                element: atom.element,
                charge: atom.formal_charge,
                valence,
                allowed,
            });
        }
    }

    // Aromatic bonds must sit on cycles of aromatic bonds between aromatic atoms.
    let aromatic_bonds: Vec<usize> = (0..g.bond_count())
        .filter(|&b| g.bonds()[b].order == BondOrder::Aromatic)
        .collect();
    let mut sub = MolecularGraph::new();
    for a in g.atoms() {
        sub.add_atom(super::Atom::new(a.element)).expect("copy");
    }
    let mut sub_bond_of = Vec::new();
    for &b in &aromatic_bonds {
        let bond = g.bonds()[b];
        if g.atom(bond.a).is_aromatic && g.atom(bond.b).is_aromatic {
            sub.add_bond(bond.a, bond.b, BondOrder::Single).expect("copy");
            sub_bond_of.push(b);
        } else {
            violations.push(Violation::AromaticBondOutsideRing {
                bond: b,
                a: bond.a,
                b: bond.b,
            });
        }
    }
    for (k, is_bridge) in bridges(&sub).into_iter().enumerate() {
        if is_bridge {
            let b = sub_bond_of[k];
            let bond = g.bonds()[b];
            violations.push(Violation::AromaticBondOutsideRing {
                bond: b,
                a: bond.a,
                b: bond.b,
            });
        }
    }
    let mut has_aromatic_bond = vec![false; g.atom_count()];
    for &b in &aromatic_bonds {
        has_aromatic_bond[g.bonds()[b].a] = true;
        has_aromatic_bond[g.bonds()[b].b] = true;
    }
    for (i, atom) in g.atoms().iter().enumerate() {
        if atom.is_aromatic && !has_aromatic_bond[i] {
            violations.push(Violation::AromaticAtomWithoutAromaticBond { atom: i });
        }
    }

    if violations.is_empty() {
        g.mark_sanitized();
        Ok(g)
    } else {
        violations.sort_by_key(|v| match v {
            Violation::ValenceOverflow { atom, .. } => (0, *atom),
            Violation::AromaticAtomWithoutAromaticBond { atom } => (1, *atom),
            Violation::AromaticBondOutsideRing { bond, .. } => (2, *bond),
        });
        violations.dedup();
        Err(Diagnostic { violations })
    }
}

/// Marks 5- and 6-membered Kekulé rings with 4n+2 pi electrons as aromatic,
/// repeating until fused systems stop changing.
fn perceive_aromaticity(g: &mut MolecularGraph) {
    if !g.bonds().iter().any(|b| b.order == BondOrder::Double) {
        return;
    }
    let rings: Vec<Vec<usize>> = sssr(g)
        .into_iter()
        .filter(|r| (5..=6).contains(&r.len()))
        .collect();
    loop {
        let mut changed = false;
        for ring in &rings {
            let ring_bonds: Vec<usize> = (0..ring.len())
                .map(|k| {
                    g.bond_between(ring[k], ring[(k + 1) % ring.len()])
                        .expect("ring bond")
                })
                .collect();
            if ring_bonds
                .iter()
                .all(|&b| g.bonds()[b].order == BondOrder::Aromatic)
            {
                continue;
            }
            let Some(electrons) = ring_pi_electrons(g, ring, &ring_bonds) else {
                continue;
            };
            if electrons >= 2 && (electrons - 2) % 4 == 0 {
                for &a in ring {
                    g.atoms_mut_keep_state()[a].is_aromatic = true;
                }
                for &b in &ring_bonds {
                    g.set_bond_order(b, BondOrder::Aromatic);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn ring_pi_electrons(g: &MolecularGraph, ring: &[usize], ring_bonds: &[usize]) -> Option<u32> {
    let n = ring.len();
    let mut total = 0;
    for k in 0..n {
        let atom_idx = ring[k];
        let atom = g.atom(atom_idx);
        if !atom.element.can_be_aromatic() {
            return None;
        }
        let own = [ring_bonds[k], ring_bonds[(k + n - 1) % n]];
        let in_ring_double = own
            .iter()
            .any(|&b| g.bonds()[b].order == BondOrder::Double);
        let exo_double = g
            .bonds()
            .iter()
            .enumerate()
            .find(|(bi, b)| {
                b.touches(atom_idx) && !own.contains(bi) && b.order == BondOrder::Double
            })
            .map(|(_, b)| b.other(atom_idx));
        let degree = g.degree(atom_idx) + usize::from(atom.total_h());
        let e = atom.element;
        let charge = atom.formal_charge;
        let electrons = if in_ring_double {
            1
        } else if let Some(partner) = exo_double {
            let p = g.atom(partner);
            if p.is_aromatic {
                1
            } else if e == Element::C && matches!(p.element, Element::O | Element::N | Element::S)
            {
                0
            } else {
                return None;
            }
        } else if atom.is_aromatic {
            match e {
                Element::C if charge == -1 => 2,
                Element::C => 1,
                Element::N | Element::P if charge == 0 && (atom.total_h() > 0 || degree == 3) => 2,
                Element::N | Element::P => 1,
                Element::B => 0,
                _ => 2,
            }
        } else {
            match (e, charge) {
                (Element::C, -1) => 2,
                (Element::C, 1) => 0,
                (Element::N | Element::P, 0) if degree <= 3 => 2,
                (Element::O | Element::S, 0) => 2,
                (Element::B, 0) if degree <= 3 => 0,
                _ => return None,
            }
        };
        total += electrons;
    }
    Some(total)
}
