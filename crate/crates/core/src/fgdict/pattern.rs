use crate::molgraph::{BondOrder, Element};

use super::DictError;

/// Element test of a pattern atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementPattern {
    Any,
    Is(Element),
    OneOf(Vec<Element>),
}

impl ElementPattern {
    pub fn matches(&self, element: Element) -> bool {
        match self {
            ElementPattern::Any => true,
            ElementPattern::Is(e) => *e == element,
            ElementPattern::OneOf(list) => list.contains(&element),
        }
    }

    /// Representative element used for layout and budget computation.
    pub fn representative(&self) -> Option<Element> {
        match self {
            ElementPattern::Any => None,
            ElementPattern::Is(e) => Some(*e),
            ElementPattern::OneOf(list) => list.first().copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAtom {
    pub element: ElementPattern,
    /// `None` accepts either aromaticity.
    pub aromatic: Option<bool>,
    pub hydrogens: Option<u8>,
    pub charge: i8,
    pub budget: Option<u8>,
    pub context: bool,
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternBond {
    pub a: usize,
    pub b: usize,
    /// `None` accepts any order.
    pub order: Option<BondOrder>,
    pub ring: bool,
}

/// One `group` block of the fragment file, with atom ids made 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentDef {
    pub name: String,
    pub atoms: Vec<PatternAtom>,
    pub bonds: Vec<PatternBond>,
    pub attach: Vec<usize>,
}

fn err(line: usize, message: impl Into<String>) -> DictError {
    DictError::Fragment {
        line,
        message: message.into(),
    }
}

fn parse_element(token: &str, line: usize) -> Result<(ElementPattern, Option<bool>), DictError> {
    if token == "*" {
        return Ok((ElementPattern::Any, None));
    }
    if let Some(z) = token.strip_prefix('#') {
        let z: u8 = z.parse().map_err(|_| err(line, format!("bad atomic number '{token}'")))?;
        let e = Element::from_atomic_number(z).ok_or_else(|| err(line, format!("bad atomic number '{token}'")))?;
        return Ok((ElementPattern::Is(e), None));
    }
    if token.contains('|') {
        let list = token
            .split('|')
            .map(|s| Element::from_symbol(s).ok_or_else(|| err(line, format!("unknown element '{s}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok((ElementPattern::OneOf(list), Some(false)));
    }
    let aromatic = token.starts_with(|c: char| c.is_ascii_lowercase());
    let symbol = if aromatic {
        let mut s = token.to_string();
        s[..1].make_ascii_uppercase();
        s
    } else {
        token.to_string()
    };
    let e = Element::from_symbol(&symbol).ok_or_else(|| err(line, format!("unknown element '{token}'")))?;
    Ok((ElementPattern::Is(e), Some(aromatic)))
}

fn parse_option<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T, DictError> {
    value
        .trim_start_matches('+')
        .parse()
        .map_err(|_| err(line, format!("bad value for {key}: '{value}'")))
}

/// Parses the fragment definition format. Lines starting with `;` are comments.
pub fn parse_fragments(text: &str) -> Result<Vec<FragmentDef>, DictError> {
    let mut defs = Vec::new();
    let mut current: Option<(FragmentDef, Vec<usize>, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with(';') {
            continue;
        }
        let (keyword, rest) = content.split_once(' ').unwrap_or((content, ""));
        let rest = rest.trim();
        match keyword {
            "group" => {
                if current.is_some() {
                    return Err(err(line, "group started before previous 'end'"));
                }
                if rest.is_empty() {
                    return Err(err(line, "group without a name"));
                }
                let def = FragmentDef {
                    name: rest.to_string(),
                    atoms: Vec::new(),
                    bonds: Vec::new(),
                    attach: Vec::new(),
                };
                current = Some((def, Vec::new(), line));
            }
            "end" => {
                let (def, _, start) = current.take().ok_or_else(|| err(line, "'end' outside a group"))?;
                defs.push(validate(def, start)?);
            }
            _ => {
                let (def, ids, _) = current.as_mut().ok_or_else(|| err(line, format!("'{keyword}' outside a group")))?;
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let local = |ids: &[usize], token: &str| -> Result<usize, DictError> {
                    let id: usize = token.parse().map_err(|_| err(line, format!("bad atom id '{token}'")))?;
                    ids.iter()
                        .position(|&x| x == id)
                        .ok_or_else(|| err(line, format!("undefined atom id {id}")))
                };
                match keyword {
                    "atom" => {
                        if fields.len() < 2 {
                            return Err(err(line, "atom needs an id and an element"));
                        }
                        let id: usize = fields[0].parse().map_err(|_| err(line, format!("bad atom id '{}'", fields[0])))?;
                        if ids.contains(&id) {
                            return Err(err(line, format!("duplicate atom id {id}")));
                        }
                        let (element, aromatic) = parse_element(fields[1], line)?;
                        let mut atom = PatternAtom {
                            element,
                            aromatic,
                            hydrogens: None,
                            charge: 0,
                            budget: None,
                            context: false,
                            saturated: false,
                        };
                        for opt in &fields[2..] {
                            match opt.split_once('=') {
                                Some(("h", v)) => atom.hydrogens = Some(parse_option(v, line, "h")?),
                                Some(("charge", v)) => atom.charge = parse_option(v, line, "charge")?,
                                Some(("b", v)) => atom.budget = Some(parse_option(v, line, "b")?),
                                None if *opt == "ctx" => atom.context = true,
                                None if *opt == "sat" => atom.saturated = true,
                                _ => return Err(err(line, format!("unknown atom option '{opt}'"))),
                            }
                        }
                        ids.push(id);
                        def.atoms.push(atom);
                    }
                    "bond" => {
                        if fields.len() < 3 {
                            return Err(err(line, "bond needs two atom ids and an order"));
                        }
                        let a = local(ids, fields[0])?;
                        let b = local(ids, fields[1])?;
                        if a == b {
                            return Err(err(line, "bond to itself"));
                        }
                        let order = match fields[2] {
                            "~" => None,
                            s => Some(BondOrder::parse(s).ok_or_else(|| err(line, format!("bad bond order '{s}'")))?),
                        };
                        let ring = match fields.get(3) {
                            None => false,
                            Some(&"ring") => true,
                            Some(other) => return Err(err(line, format!("unknown bond option '{other}'"))),
                        };
                        def.bonds.push(PatternBond { a, b, order, ring });
                    }
                    "attach" => {
                        for token in &fields {
                            let i = local(ids, token)?;
                            if !def.attach.contains(&i) {
                                def.attach.push(i);
                            }
                        }
                    }
                    other => return Err(err(line, format!("unknown keyword '{other}'"))),
                }
            }
        }
    }
    if let Some((_, _, start)) = current {
        return Err(err(start, "group not closed with 'end'"));
    }
    Ok(defs)
}

/// Moves core atoms ahead of context atoms and checks structural rules.
fn validate(def: FragmentDef, line: usize) -> Result<FragmentDef, DictError> {
    let n = def.atoms.len();
    if n == 0 {
        return Err(err(line, format!("group '{}' has no atoms", def.name)));
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| !def.atoms[i].context).collect();
    if order.is_empty() {
        return Err(err(line, format!("group '{}' has no core atoms", def.name)));
    }
    order.extend((0..n).filter(|&i| def.atoms[i].context));
    let mut new_index = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let atoms: Vec<PatternAtom> = order.iter().map(|&old| def.atoms[old].clone()).collect();
    for a in atoms.iter().filter(|a| !a.context) {
        if a.element == ElementPattern::Any || a.aromatic.is_none() {
            return Err(err(line, format!("group '{}': core atoms need a concrete element", def.name)));
        }
    }
    let bonds: Vec<PatternBond> = def
        .bonds
        .iter()
        .map(|b| PatternBond {
            a: new_index[b.a],
            b: new_index[b.b],
            ..*b
        })
        .collect();
    let core = atoms.iter().filter(|a| !a.context).count();
    for b in &bonds {
        if b.a >= core && b.b >= core {
            return Err(err(line, format!("group '{}': bond between two context atoms", def.name)));
        }
        if b.a < core && b.b < core && b.order.is_none() {
            return Err(err(line, format!("group '{}': core bonds need an explicit order", def.name)));
        }
    }
    let attach: Vec<usize> = def.attach.iter().map(|&i| new_index[i]).collect();
    if attach.is_empty() {
        return Err(err(line, format!("group '{}' has no attachment atoms", def.name)));
    }
    if attach.iter().any(|&i| i >= core) {
        return Err(err(line, format!("group '{}': context atoms cannot be attachment atoms", def.name)));
    }
    // Connectivity, so the matcher can grow embeddings bond by bond.
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for b in &bonds {
            for (x, y) in [(b.a, b.b), (b.b, b.a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(err(line, format!("group '{}' is not connected", def.name)));
    }
    Ok(FragmentDef {
        name: def.name,
        atoms,
        bonds,
        attach,
    })
}
