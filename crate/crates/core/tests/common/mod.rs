#![allow(dead_code)]

use std::path::PathBuf;

use chemanchor::{parse_smiles, sanitize, MolecularGraph};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

pub fn read_smiles(name: &str) -> Vec<String> {
    std::fs::read_to_string(data_path(name))
        .unwrap_or_else(|e| panic!("read {name}: {e}"))
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn mol(smiles: &str) -> MolecularGraph {
    let g = parse_smiles(smiles).unwrap_or_else(|e| panic!("{smiles}: {e}"));
    sanitize(&g).unwrap_or_else(|d| panic!("{smiles}: {d}"))
}

type Label = (u8, i8, u8, bool);

fn label(g: &MolecularGraph, i: usize) -> Label {
    let a = g.atom(i);
    (a.element.atomic_number(), a.formal_charge, a.total_h(), a.is_aromatic)
}

/// Plain backtracking isomorphism test on sanitized graphs: atoms must agree on
/// element, charge, hydrogen count and aromaticity, bonds on order.
pub fn isomorphic(a: &MolecularGraph, b: &MolecularGraph) -> bool {
    let n = a.atom_count();
    if n != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let mut la: Vec<Label> = (0..n).map(|i| label(a, i)).collect();
    let mut lb: Vec<Label> = (0..n).map(|i| label(b, i)).collect();
    let (sa, sb) = (la.clone(), lb.clone());
    la.sort();
    lb.sort();
    if la != lb {
        return false;
    }
    let order = |g: &MolecularGraph, x: usize, y: usize| g.bond_between(x, y).map(|k| g.bonds()[k].order.unstereo());
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        i: usize,
        n: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if i == n {
            return true;
        }
        for j in 0..n {
            if used[j] || !ok(i, j, map) {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if extend(i + 1, n, map, used, ok) {
                return true;
            }
            used[j] = false;
            map[i] = usize::MAX;
        }
        false
    }
    let ok = |i: usize, j: usize, map: &[usize]| {
        if sa[i] != sb[j] || a.degree(i) != b.degree(j) {
            return false;
        }
        (0..i).all(|p| order(a, p, i) == order(b, map[p], j))
    };
    extend(0, n, &mut map, &mut used, &ok)
}
