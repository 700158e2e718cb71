use super::sanitize::bare_implicit_h;
use super::{BondOrder, MolError, MolecularGraph};

fn bond_code(order: BondOrder) -> u8 {
    match order.unstereo() {
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
        _ => 1,
    }
}

/// Replaces each key by its dense rank among all keys.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("present"))
        .collect()
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().copied().max().map_or(0, |m| m + 1)
}

/// Canonical atom ranks: 0..n, a permutation independent of input atom order
/// up to graph automorphism.
///
/// Ranks start from (degree, atomic number, hydrogens, charge, aromaticity),
/// are refined by sorted neighbor (rank, bond order) lists until stable, and
/// remaining ties are broken on the lowest tied class, then refined again.
pub fn canonical_ranks(graph: &MolecularGraph) -> Vec<usize> {
    let n = graph.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let adj = graph.adjacency();
    let invariants: Vec<(usize, u8, u8, i8, bool)> = (0..n)
        .map(|i| {
            let a = graph.atom(i);
            (
                adj[i].len(),
                a.element.atomic_number(),
                a.total_h(),
                a.formal_charge,
                a.is_aromatic,
            )
        })
        .collect();
    let mut ranks = dense_ranks(&invariants);
    loop {
        ranks = refine(graph, &adj, ranks);
        if class_count(&ranks) == n {
            return ranks;
        }
        // Break the lowest tie: the first tied atom keeps the class rank,
        // every other atom of that class or above moves up by one.
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).expect("a tie exists");
        let chosen = (0..n).find(|&i| ranks[i] == tied).expect("member");
        for (i, r) in ranks.iter_mut().enumerate() {
            if *r > tied || (*r == tied && i != chosen) {
                *r += 1;
            }
        }
        ranks = dense_ranks(&ranks);
    }
}

fn refine(graph: &MolecularGraph, adj: &[Vec<(usize, usize)>], mut ranks: Vec<usize>) -> Vec<usize> {
    let mut classes = class_count(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..ranks.len())
            .map(|i| {
                let mut env: Vec<(usize, u8)> = adj[i]
                    .iter()
                    .map(|&(nb, b)| (ranks[nb], bond_code(graph.bonds()[b].order)))
                    .collect();
                env.sort_unstable();
                (ranks[i], env)
            })
            .collect();
        let next = dense_ranks(&keys);
        let next_classes = class_count(&next);
        if next_classes == classes {
            return next;
        }
        classes = next_classes;
        ranks = next;
    }
}

/// Canonical SMILES of a sanitized graph.
///
/// Aromatic systems are written in lowercase form, stereo is omitted and
/// disconnected components are sorted and joined by `.`.
pub fn canonical_smiles(graph: &MolecularGraph) -> Result<String, MolError> {
    if !graph.is_sanitized() {
        return Err(MolError::NotSanitized);
    }
    let ranks = canonical_ranks(graph);
    let adj = graph.adjacency();
    let mut parts: Vec<String> = graph
        .components()
        .iter()
        .map(|comp| {
            let start = *comp.iter().min_by_key(|&&i| ranks[i]).expect("non-empty");
            Writer::new(graph, &adj, &ranks).write(start)
        })
        .collect();
    parts.sort();
    Ok(parts.join("."))
}

struct Writer<'a> {
    graph: &'a MolecularGraph,
    adj: &'a [Vec<(usize, usize)>],
    ranks: &'a [usize],
    order: Vec<usize>,
    children: Vec<Vec<(usize, usize)>>,
    closures: Vec<Vec<(usize, usize)>>,
    digits: Vec<Option<usize>>,
    free: Vec<bool>,
    out: String,
}

impl<'a> Writer<'a> {
    fn new(graph: &'a MolecularGraph, adj: &'a [Vec<(usize, usize)>], ranks: &'a [usize]) -> Self {
        let n = graph.atom_count();
        Writer {
            graph,
            adj,
            ranks,
            order: vec![usize::MAX; n],
            children: vec![Vec::new(); n],
            closures: vec![Vec::new(); n],
            digits: vec![None; graph.bond_count()],
            free: vec![true; 100],
            out: String::new(),
        }
    }

    fn sorted_neighbors(&self, v: usize) -> Vec<(usize, usize)> {
        let mut nbs = self.adj[v].clone();
        nbs.sort_by_key(|&(nb, _)| self.ranks[nb]);
        nbs
    }

    fn write(mut self, start: usize) -> String {
        // Pass 1: DFS spanning tree; non-tree bonds become ring closures.
        let mut counter = 0;
        let mut stack = vec![(start, usize::MAX)];
        let mut tree_bond = vec![false; self.graph.bond_count()];
        while let Some((v, via)) = stack.pop() {
            if self.order[v] != usize::MAX {
                continue;
            }
            self.order[v] = counter;
            counter += 1;
            if via != usize::MAX {
                tree_bond[via] = true;
                let parent = self.graph.bonds()[via].other(v);
                self.children[parent].push((v, via));
            }
            for &(nb, b) in self.sorted_neighbors(v).iter().rev() {
                if self.order[nb] == usize::MAX {
                    stack.push((nb, b));
                }
            }
        }
        for (b, bond) in self.graph.bonds().iter().enumerate() {
            if !tree_bond[b] && self.order[bond.a] != usize::MAX {
                self.closures[bond.a].push((bond.b, b));
                self.closures[bond.b].push((bond.a, b));
            }
        }
        for v in 0..self.closures.len() {
            let ranks = self.ranks;
            self.closures[v].sort_by_key(|&(nb, _)| ranks[nb]);
        }
        self.emit(start);
        self.out
    }

    fn emit(&mut self, v: usize) {
        self.out.push_str(&self.atom_token(v));
        let closures = self.closures[v].clone();
        // Close rings opened earlier before opening new ones.
        for &(nb, b) in closures.iter().filter(|&&(nb, _)| self.order[nb] < self.order[v]) {
            let _ = nb;
            let d = self.digits[b].take().expect("ring opened");
            self.out.push_str(&ring_label(d));
            self.free[d] = true;
        }
        for &(nb, b) in closures.iter().filter(|&&(nb, _)| self.order[nb] > self.order[v]) {
            let _ = nb;
            let d = (1..100).find(|&d| self.free[d]).expect("ring digits exhausted");
            self.free[d] = false;
            self.digits[b] = Some(d);
            self.out.push_str(self.bond_symbol(b));
            self.out.push_str(&ring_label(d));
        }
        let children = self.children[v].clone();
        for (k, &(child, b)) in children.iter().enumerate() {
            let last = k + 1 == children.len();
            if !last {
                self.out.push('(');
            }
            self.out.push_str(self.bond_symbol(b));
            self.emit(child);
            if !last {
                self.out.push(')');
            }
        }
    }

    fn bond_symbol(&self, b: usize) -> &'static str {
        let bond = self.graph.bonds()[b];
        match bond.order.unstereo() {
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic => "",
            _ => {
                if self.graph.atom(bond.a).is_aromatic && self.graph.atom(bond.b).is_aromatic {
                    "-"
                } else {
                    ""
                }
            }
        }
    }

    fn atom_token(&self, v: usize) -> String {
        atom_token(self.graph, v)
    }
}

fn ring_label(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d}")
    }
}

pub(crate) fn atom_token(graph: &MolecularGraph, v: usize) -> String {
    let atom = graph.atom(v);
    let symbol = if atom.is_aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let h = atom.total_h();
    let bare_ok = atom.element.is_organic_subset()
        && atom.formal_charge == 0
        && (!atom.is_aromatic || matches!(symbol.as_str(), "b" | "c" | "n" | "o" | "p" | "s"))
        && bare_implicit_h(atom.element, atom.is_aromatic, graph.bond_valence(v)) == h;
    if bare_ok {
        return symbol;
    }
    let mut token = format!("[{symbol}");
    match h {
        0 => {}
        1 => token.push('H'),
        _ => token.push_str(&format!("H{h}")),
    }
    match atom.formal_charge {
        0 => {}
        1 => token.push('+'),
        -1 => token.push('-'),
        c if c > 0 => token.push_str(&format!("+{c}")),
        c => token.push_str(&format!("-{}", -c)),
    }
    token.push(']');
    token
}
