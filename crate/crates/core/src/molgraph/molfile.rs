use crate::geometry::Point;

use super::smiles::fold_hydrogens;
use super::{Atom, BondOrder, Element, MolError, MolecularGraph};

fn err(line: usize, message: impl Into<String>) -> MolError {
    MolError::Molfile {
        line,
        message: message.into(),
    }
}

/// Fixed-width field, trimmed; `None` when the line is too short.
fn field(line: &str, start: usize, len: usize) -> Option<&str> {
    let end = (start + len).min(line.len());
    line.get(start..end)
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

fn parse_counts(line: &str, line_no: usize) -> Result<(usize, usize), MolError> {
    let fixed = field(line, 0, 3)
        .zip(field(line, 3, 3))
        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
    if let Some(c) = fixed {
        return Ok(c);
    }
    let mut parts = line.split_whitespace();
    let a = parts.next().and_then(|s| s.parse().ok());
    let b = parts.next().and_then(|s| s.parse().ok());
    a.zip(b)
        .ok_or_else(|| err(line_no, format!("malformed counts line '{}'", line.trim_end())))
}

fn charge_code(code: i32) -> i8 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

/// Parses one MOL V2000 block.
///
/// Atom coordinates become depiction coordinates; hydrogen atoms are folded
/// into their heavy neighbor's hydrogen count. Bond types 1/2/3/4 map to
/// single/double/triple/aromatic and stereo flags 1/6 to wedge/dash.
pub fn parse_molfile(text: &str) -> Result<MolecularGraph, MolError> {
    let lines: Vec<&str> = text.lines().collect();
    let counts_line = lines
        .get(3)
        .ok_or_else(|| err(lines.len() + 1, "missing counts line"))?;
    if counts_line.contains("V3000") {
        return Err(err(4, "V3000 blocks are not supported"));
    }
    let (n_atoms, n_bonds) = parse_counts(counts_line, 4)?;
    if lines.len() < 4 + n_atoms + n_bonds {
        return Err(err(
            lines.len() + 1,
            format!("expected {n_atoms} atom and {n_bonds} bond lines"),
        ));
    }

    let mut graph = MolecularGraph::new();
    let mut hydrogens = Vec::new();
    for k in 0..n_atoms {
        let line_no = 5 + k;
        let line = lines[4 + k];
        let parsed = (|| {
            let x: f64 = field(line, 0, 10)?.parse().ok()?;
            let y: f64 = field(line, 10, 10)?.parse().ok()?;
            let sym = field(line, 31, 3)?;
            let chg: i32 = field(line, 36, 3).map_or(Some(0), |s| s.parse().ok())?;
            Some((x, y, sym.to_string(), chg))
        })()
        .or_else(|| {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let x = parts.first()?.parse().ok()?;
            let y = parts.get(1)?.parse().ok()?;
            let sym = parts.get(3)?.to_string();
            let chg = parts.get(5).map_or(Some(0), |s| s.parse().ok())?;
            Some((x, y, sym, chg))
        });
        let (x, y, sym, chg) = parsed.ok_or_else(|| err(line_no, "malformed atom line"))?;
        let element = Element::from_symbol(&sym)
            .ok_or_else(|| err(line_no, format!("unknown element symbol '{sym}'")))?;
        let mut atom = Atom::new(element).with_charge(charge_code(chg));
        atom.coord_2d = Some(Point::new(x, y));
        let idx = graph.add_atom(atom).map_err(|e| err(line_no, e.to_string()))?;
        if element == Element::H {
            hydrogens.push(idx);
        }
    }

    for k in 0..n_bonds {
        let line_no = 5 + n_atoms + k;
        let line = lines[4 + n_atoms + k];
        let parsed = (|| {
            let a: usize = field(line, 0, 3)?.parse().ok()?;
            let b: usize = field(line, 3, 3)?.parse().ok()?;
            let t: u32 = field(line, 6, 3)?.parse().ok()?;
            let s: u32 = field(line, 9, 3).map_or(Some(0), |s| s.parse().ok())?;
            Some((a, b, t, s))
        })()
        .or_else(|| {
            let p: Vec<u32> = line
                .split_whitespace()
                .take(4)
                .map(|s| s.parse().ok())
                .collect::<Option<_>>()?;
            Some((p[0] as usize, *p.get(1)? as usize, *p.get(2)?, *p.get(3).unwrap_or(&0)))
        });
        let (a, b, t, s) = parsed.ok_or_else(|| err(line_no, "malformed bond line"))?;
        if a == 0 || b == 0 || a > n_atoms || b > n_atoms {
            return Err(err(line_no, format!("bond references atom outside 1..={n_atoms}")));
        }
        let order = match (t, s) {
            (1, 1) => BondOrder::Wedge,
            (1, 6) => BondOrder::Dash,
            (1, _) => BondOrder::Single,
            (2, _) => BondOrder::Double,
            (3, _) => BondOrder::Triple,
            (4, _) => BondOrder::Aromatic,
            _ => return Err(err(line_no, format!("unsupported bond type {t}"))),
        };
        if order == BondOrder::Aromatic {
            graph.atom_mut(a - 1).is_aromatic = true;
            graph.atom_mut(b - 1).is_aromatic = true;
        }
        graph
            .add_bond(a - 1, b - 1, order)
            .map_err(|e| err(line_no, e.to_string()))?;
    }

    for (k, line) in lines.iter().enumerate().skip(4 + n_atoms + n_bonds) {
        if line.starts_with("M  END") {
            break;
        }
        if let Some(rest) = line.strip_prefix("M  CHG") {
            let nums: Vec<i32> = rest
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| err(k + 1, "malformed M  CHG line")))
                .collect::<Result<_, _>>()?;
            for pair in nums.get(1..).unwrap_or(&[]).chunks(2) {
                let [idx, chg] = pair else {
                    return Err(err(k + 1, "malformed M  CHG line"));
                };
                let idx = usize::try_from(*idx - 1)
                    .ok()
                    .filter(|&i| i < n_atoms)
                    .ok_or_else(|| err(k + 1, "charge on unknown atom"))?;
                let chg = i8::try_from(*chg)
                    .ok()
                    .filter(|c| c.abs() <= super::MAX_ABS_CHARGE)
                    .ok_or_else(|| err(k + 1, "charge out of range"))?;
                graph.atom_mut(idx).formal_charge = chg;
            }
        }
    }

    Ok(fold_hydrogens(graph, &hydrogens))
}

/// Splits an SD file into its MOL blocks.
pub fn split_sdf(text: &str) -> Vec<&str> {
    text.split("$$$$")
        .map(|b| b.trim_start_matches(['\r', '\n']))
        .filter(|b| !b.trim().is_empty())
        .collect()
}
