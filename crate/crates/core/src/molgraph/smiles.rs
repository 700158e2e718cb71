use super::rings::bridges;
use super::{Atom, BondOrder, Element, MolError, MolecularGraph};

/// Parses a SMILES string.
///
/// Supports the organic subset, bracket atoms (isotope and chirality are read
/// and dropped), branches, ring closures (`1`–`9`, `%nn`), dot-disconnected
/// components and the bond symbols `- = # : / \`. Hydrogen counts are left for
/// [`sanitize`](super::sanitize) to finalize.
pub fn parse_smiles(text: &str) -> Result<MolecularGraph, MolError> {
    Parser::new(text).run()
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    graph: MolecularGraph,
    /// Bonds created without an explicit symbol, eligible for aromatic demotion.
    implicit_aromatic: Vec<usize>,
    hydrogens: Vec<usize>,
}

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
    offset: usize,
}

fn err(offset: usize, message: impl Into<String>) -> MolError {
    MolError::Smiles {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            graph: MolecularGraph::new(),
            implicit_aromatic: Vec::new(),
            hydrogens: Vec::new(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn run(mut self) -> Result<MolecularGraph, MolError> {
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(Option<usize>, usize)> = Vec::new();
        let mut pending: Option<(BondOrder, usize)> = None;
        let mut rings: Vec<Option<OpenRing>> = (0..100).map(|_| None).collect();
        let mut open_rings = 0usize;

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(err(start, "branch opened before any atom"));
                    }
                    if pending.is_some() {
                        return Err(err(start, "bond symbol before '('"));
                    }
                    branches.push((prev, start));
                    self.pos += 1;
                }
                b')' => {
                    let Some((atom, _)) = branches.pop() else {
                        return Err(err(start, "unmatched ')'"));
                    };
                    if pending.is_some() {
                        return Err(err(start, "dangling bond before ')'"));
                    }
                    prev = atom;
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(err(start, "bond symbol before '.'"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return Err(err(start, "two consecutive bond symbols"));
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    pending = Some((order, start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return Err(err(start, "ring closure before any atom"));
                    };
                    let digit = self.ring_number()?;
                    let order = pending.take().map(|(o, _)| o);
                    match rings[digit].take() {
                        None => {
                            rings[digit] = Some(OpenRing {
                                atom,
                                order,
                                offset: start,
                            });
                            open_rings += 1;
                        }
                        Some(open) => {
                            open_rings -= 1;
                            let order = match (open.order, order) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(err(start, "conflicting ring-closure bond orders"))
                                }
                                (Some(a), _) | (None, Some(a)) => Some(a),
                                (None, None) => None,
                            };
                            self.connect(open.atom, atom, order, start)?;
                        }
                    }
                }
                _ => {
                    let atom = if c == b'[' {
                        self.bracket_atom()?
                    } else {
                        self.organic_atom()?
                    };
                    if let Some(p) = prev {
                        let order = pending.take().map(|(o, _)| o);
                        self.connect(p, atom, order, start)?;
                    } else if let Some((_, offset)) = pending {
                        return Err(err(offset, "bond symbol without a preceding atom"));
                    }
                    prev = Some(atom);
                }
            }
        }

        if let Some((_, offset)) = pending {
            return Err(err(offset, "dangling bond at end of input"));
        }
        if let Some((_, offset)) = branches.pop() {
            return Err(err(offset, "unmatched '('"));
        }
        if open_rings > 0 {
            let offset = rings.iter().flatten().map(|r| r.offset).min().unwrap_or(0);
            return Err(err(offset, "unclosed ring-closure digit"));
        }

        self.demote_bridging_aromatic_bonds();
        Ok(fold_hydrogens(self.graph, &self.hydrogens))
    }

    fn ring_number(&mut self) -> Result<usize, MolError> {
        let start = self.pos;
        if self.bytes[self.pos] == b'%' {
            let digits = self.bytes.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(usize::from(d[0] - b'0') * 10 + usize::from(d[1] - b'0'))
                }
                _ => Err(err(start, "'%' must be followed by two digits")),
            }
        } else {
            self.pos += 1;
            Ok(usize::from(self.bytes[start] - b'0'))
        }
    }

    fn connect(
        &mut self,
        a: usize,
        b: usize,
        order: Option<BondOrder>,
        offset: usize,
    ) -> Result<(), MolError> {
        let implicit = order.is_none();
        let order = order.unwrap_or_else(|| {
            if self.graph.atom(a).is_aromatic && self.graph.atom(b).is_aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            }
        });
        let idx = self.graph.add_bond(a, b, order).map_err(|e| match e {
            MolError::SelfBond(_) => err(offset, "ring closure bonds an atom to itself"),
            MolError::DuplicateBond(..) => err(offset, "duplicate bond between the same atoms"),
            other => other,
        })?;
        if implicit && order == BondOrder::Aromatic {
            self.implicit_aromatic.push(idx);
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<usize, MolError> {
        let start = self.pos;
        let rest = &self.bytes[self.pos..];
        let (symbol, aromatic, len) = match rest {
            [b'C', b'l', ..] => ("Cl", false, 2),
            [b'B', b'r', ..] => ("Br", false, 2),
            [c @ (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I'), ..] => {
                (std::str::from_utf8(std::slice::from_ref(c)).unwrap(), false, 1)
            }
            [c @ (b'b' | b'c' | b'n' | b'o' | b'p' | b's'), ..] => {
                (std::str::from_utf8(std::slice::from_ref(c)).unwrap(), true, 1)
            }
            [b'*', ..] => return Err(err(start, "wildcard atom '*' is not supported")),
            _ => {
                return Err(err(
                    start,
                    format!("unexpected character '{}'", rest[0] as char),
                ))
            }
        };
        self.pos += len;
        let upper = symbol.to_ascii_uppercase();
        let element = Element::from_symbol(if aromatic { &upper } else { symbol })
            .ok_or_else(|| MolError::UnknownElement(symbol.to_string()))?;
        let mut atom = Atom::new(element);
        atom.is_aromatic = aromatic;
        self.graph.add_atom(atom)
    }

    fn bracket_atom(&mut self) -> Result<usize, MolError> {
        let open = self.pos;
        let close = self.bytes[open..]
            .iter()
            .position(|&c| c == b']')
            .map(|p| open + p)
            .ok_or_else(|| err(open, "unclosed '['"))?;
        let body = &self.bytes[open + 1..close];
        let mut i = 0;
        let at = |i: usize| body.get(i).copied();
        while at(i).is_some_and(|c| c.is_ascii_digit()) {
            i += 1;
        }
        let sym_start = i;
        let (element, aromatic) = match at(i) {
            Some(c) if c.is_ascii_uppercase() => {
                i += 1;
                let two = at(i)
                    .filter(u8::is_ascii_lowercase)
                    .map(|l| format!("{}{}", c as char, l as char))
                    .filter(|s| Element::from_symbol(s).is_some());
                match two {
                    Some(s) => {
                        i += 1;
                        (Element::from_symbol(&s).unwrap(), false)
                    }
                    None => {
                        let s = (c as char).to_string();
                        let e = Element::from_symbol(&s).ok_or(MolError::UnknownElement(s))?;
                        (e, false)
                    }
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let two = match (c, at(i + 1)) {
                    (b's', Some(b'e')) => Some("Se"),
                    (b'a', Some(b's')) => Some("As"),
                    _ => None,
                };
                if let Some(s) = two {
                    i += 2;
                    (Element::from_symbol(s).unwrap(), true)
                } else {
                    i += 1;
                    let s = (c as char).to_ascii_uppercase().to_string();
                    match Element::from_symbol(&s) {
                        Some(e) if e.can_be_aromatic() => (e, true),
                        _ => return Err(MolError::UnknownElement((c as char).to_string())),
                    }
                }
            }
            Some(b'*') => return Err(err(open + 1 + i, "wildcard atom '*' is not supported")),
            _ => return Err(err(open + 1 + sym_start, "bracket atom without element symbol")),
        };
        while at(i) == Some(b'@') {
            i += 1;
        }
        if i > 0 && body[i - 1] == b'@' {
            let class = body.get(i..i + 2);
            if matches!(class, Some(b"TH" | b"AL" | b"SP" | b"TB" | b"OH")) {
                i += 2;
                while at(i).is_some_and(|c| c.is_ascii_digit()) {
                    i += 1;
                }
            }
        }
        let mut hydrogens = 0u8;
        if at(i) == Some(b'H') {
            i += 1;
            hydrogens = 1;
            if let Some(d) = at(i).filter(u8::is_ascii_digit) {
                hydrogens = d - b'0';
                i += 1;
            }
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = at(i) {
            let unit = if sign == b'+' { 1 } else { -1 };
            i += 1;
            charge = unit;
            if let Some(d) = at(i).filter(u8::is_ascii_digit) {
                charge = unit * i32::from(d - b'0');
                i += 1;
            } else {
                while at(i) == Some(sign) {
                    charge += unit;
                    i += 1;
                }
            }
        }
        if at(i) == Some(b':') {
            i += 1;
            while at(i).is_some_and(|c| c.is_ascii_digit()) {
                i += 1;
            }
        }
        if i != body.len() {
            return Err(err(open + 1 + i, "unexpected character in bracket atom"));
        }
        let charge = i8::try_from(charge).map_err(|_| err(open, "charge out of range"))?;
        self.pos = close + 1;
        let mut atom = Atom::new(element).with_charge(charge).with_hydrogens(hydrogens);
        atom.is_aromatic = aromatic;
        let idx = self
            .graph
            .add_atom(atom)
            .map_err(|e| err(open, e.to_string()))?;
        if element == Element::H && charge == 0 && hydrogens == 0 {
            self.hydrogens.push(idx);
        }
        Ok(idx)
    }

    /// An unmarked bond between aromatic atoms that is not part of any ring
    /// (the link in `c1ccccc1c1ccccc1`) is single.
    fn demote_bridging_aromatic_bonds(&mut self) {
        if self.implicit_aromatic.is_empty() {
            return;
        }
        let bridge = bridges(&self.graph);
        for &b in &self.implicit_aromatic {
            if bridge[b] {
                self.graph.set_bond_order(b, BondOrder::Single);
            }
        }
    }
}

/// Removes neutral hydrogen atoms with a single heavy neighbor, counting them
/// as explicit hydrogens on that neighbor instead.
pub(crate) fn fold_hydrogens(graph: MolecularGraph, candidates: &[usize]) -> MolecularGraph {
    let adj = graph.adjacency();
    let removable: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&h| {
            adj[h].len() == 1 && {
                let (n, b) = adj[h][0];
                graph.atom(n).element != Element::H && graph.bonds()[b].order.valence() == 1
            }
        })
        .collect();
    if removable.is_empty() {
        return graph;
    }
    let mut drop = vec![false; graph.atom_count()];
    let mut extra_h = vec![0u8; graph.atom_count()];
    for &h in &removable {
        drop[h] = true;
        extra_h[adj[h][0].0] += 1;
    }
    let keep: Vec<usize> = (0..graph.atom_count()).filter(|&i| !drop[i]).collect();
    let mut out = graph.subgraph(&keep);
    for (new, &old) in keep.iter().enumerate() {
        if extra_h[old] > 0 {
            out.atom_mut(new).explicit_h += extra_h[old];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elements(g: &MolecularGraph) -> Vec<&'static str> {
        g.atoms().iter().map(|a| a.element.symbol()).collect()
    }

    #[test]
    fn simple_chain() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(elements(&g), ["C", "C", "O"]);
        assert_eq!(g.bond_count(), 2);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Single));
    }

    #[test]
    fn kekule_ring() {
        let g = parse_smiles("C1=CC=CC=C1").unwrap();
        assert_eq!(g.atom_count(), 6);
        let doubles = g.bonds().iter().filter(|b| b.order == BondOrder::Double).count();
        assert_eq!(doubles, 3);
        assert_eq!(g.bond_count(), 6);
    }

    #[test]
    fn biphenyl_bromide_ester() {
        let g = parse_smiles("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1").unwrap();
        assert_eq!(g.atom_count(), 17);
        assert_eq!(g.atoms().iter().filter(|a| a.element == Element::BR).count(), 1);
        let aromatic = g.bonds().iter().filter(|b| b.order == BondOrder::Aromatic).count();
        assert_eq!(aromatic, 12);
    }

    #[test]
    fn implicit_link_between_rings_is_single() {
        let g = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let singles = g.bonds().iter().filter(|b| b.order == BondOrder::Single).count();
        assert_eq!(singles, 1);
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("[NH4+].[O-]C(=O)C").unwrap();
        assert_eq!(g.atom(0).formal_charge, 1);
        assert_eq!(g.atom(0).explicit_h, 4);
        assert!(g.atom(0).no_implicit);
        assert_eq!(g.atom(1).formal_charge, -1);
        let g = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(g.atom(3).explicit_h, 1);
        assert!(g.atom(3).is_aromatic);
        let g = parse_smiles("[13CH3][C@@H](O)[Fe+2]").unwrap();
        assert_eq!(g.atom(0).explicit_h, 3);
        assert_eq!(g.atom(3).formal_charge, 2);
        assert_eq!(g.atom(3).element.symbol(), "Fe");
    }

    #[test]
    fn explicit_hydrogen_atoms_fold() {
        let g = parse_smiles("[H]OC([H])([H])[H]").unwrap();
        assert_eq!(elements(&g), ["O", "C"]);
        assert_eq!(g.atom(0).explicit_h, 1);
        assert_eq!(g.atom(1).explicit_h, 3);
        let g = parse_smiles("[H][H]").unwrap();
        assert_eq!(g.atom_count(), 2);
    }

    #[test]
    fn percent_ring_closures() {
        let g = parse_smiles("C%12CC%12").unwrap();
        assert_eq!(g.bond_count(), 3);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse_smiles("C1CC").unwrap_err(),
            MolError::Smiles {
                offset: 1,
                message: "unclosed ring-closure digit".into()
            }
        );
        match parse_smiles("CC(C").unwrap_err() {
            MolError::Smiles { offset, .. } => assert_eq!(offset, 2),
            e => panic!("{e}"),
        }
        match parse_smiles("CC)C").unwrap_err() {
            MolError::Smiles { offset, .. } => assert_eq!(offset, 2),
            e => panic!("{e}"),
        }
        assert!(parse_smiles("C=").is_err());
        assert!(parse_smiles("[Xx]").is_err());
        assert!(parse_smiles("C1C1").is_err());
    }

    #[test]
    fn empty_string_is_empty_graph() {
        assert!(parse_smiles("").unwrap().is_empty());
    }
}
