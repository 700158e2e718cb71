use std::collections::BTreeMap;

use crate::molgraph::rings::ring_bonds;
use crate::molgraph::{BondOrder, MolecularGraph};

use super::{DictError, FunctionalGroupTemplate, PatternAtom};

/// One embedding of a template: graph atom per core pattern atom, then per context atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TemplateMatch {
    pub core: Vec<usize>,
    pub context: Vec<usize>,
}

impl TemplateMatch {
    /// Sorted graph atoms of the group itself.
    pub fn atom_set(&self) -> Vec<usize> {
        let mut s = self.core.clone();
        s.sort_unstable();
        s
    }
}

/// Precomputed per-graph data shared by all templates.
pub(crate) struct Target<'a> {
    graph: &'a MolecularGraph,
    adj: Vec<Vec<(usize, usize)>>,
    ring: Vec<bool>,
}

impl<'a> Target<'a> {
    pub(crate) fn new(graph: &'a MolecularGraph) -> Target<'a> {
        Target {
            graph,
            adj: graph.adjacency(),
            ring: ring_bonds(graph),
        }
    }
}

struct Plan {
    /// Pattern atoms in search order; each after the first has a mapped parent.
    order: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    internal_valence: Vec<u32>,
    internal_multiple: Vec<usize>,
}

fn plan(t: &FunctionalGroupTemplate) -> Plan {
    let n = t.atoms.len();
    let mut order = vec![0];
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for (bi, b) in t.bonds.iter().enumerate() {
            let other = if b.a == v {
                b.b
            } else if b.b == v {
                b.a
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                parent[other] = Some((v, bi));
                order.push(other);
            }
        }
    }
    let mut internal_valence = vec![0; t.core_len];
    let mut internal_multiple = vec![0; t.core_len];
    for b in t.core_bonds() {
        let o = b.order.expect("core order");
        for i in [b.a, b.b] {
            internal_valence[i] += u32::from(o.valence());
            if o.unstereo() != BondOrder::Single {
                internal_multiple[i] += 1;
            }
        }
    }
    Plan {
        order,
        parent,
        internal_valence,
        internal_multiple,
    }
}

fn bond_ok(pattern: Option<BondOrder>, actual: BondOrder) -> bool {
    match pattern {
        None => true,
        Some(p) => p.unstereo() == actual.unstereo(),
    }
}

struct Search<'a, 'b> {
    target: &'b Target<'a>,
    t: &'b FunctionalGroupTemplate,
    plan: Plan,
    locked: &'b [bool],
    map: Vec<usize>,
    used: Vec<bool>,
    out: Vec<Vec<usize>>,
}

impl Search<'_, '_> {
    fn atom_ok(&self, p: usize, v: usize) -> bool {
        let pa: &PatternAtom = &self.t.atoms[p];
        let atom = self.target.graph.atom(v);
        if !pa.element.matches(atom.element) || atom.formal_charge != pa.charge {
            return false;
        }
        if pa.aromatic.is_some_and(|ar| ar != atom.is_aromatic) {
            return false;
        }
        if pa.hydrogens.is_some_and(|h| h != atom.total_h()) {
            return false;
        }
        if pa.context {
            return true;
        }
        if self.locked[v] {
            return false;
        }
        let g = self.target.graph;
        let bv = g.bond_valence(v);
        let internal = self.plan.internal_valence[p];
        if bv < internal {
            return false;
        }
        let ext = bv - internal;
        if u32::from(atom.total_h()) + ext != u32::from(self.t.budgets[p]) {
            return false;
        }
        if ext > 0 && self.t.candidate_slot(p).is_none() {
            return false;
        }
        if pa.saturated {
            let multiple = self.target.adj[v]
                .iter()
                .filter(|&&(_, b)| g.bonds()[b].order.unstereo() != BondOrder::Single)
                .count();
            if multiple != self.plan.internal_multiple[p] {
                return false;
            }
        }
        true
    }

    /// Bonds between pattern atom `p` (mapped to `v`) and already-mapped atoms.
    fn edges_ok(&self, p: usize, v: usize, depth: usize) -> bool {
        let g = self.target.graph;
        for &q in &self.plan.order[..depth] {
            let w = self.map[q];
            let pattern_bond = self.t.bonds.iter().find(|b| (b.a == p && b.b == q) || (b.a == q && b.b == p));
            let graph_bond = g.bond_between(v, w);
            match (pattern_bond, graph_bond) {
                (Some(pb), Some(gb)) => {
                    if !bond_ok(pb.order, g.bonds()[gb].order) || (pb.ring && !self.target.ring[gb]) {
                        return false;
                    }
                }
                (Some(_), None) => return false,
                (None, Some(_)) => {
                    if p < self.t.core_len && q < self.t.core_len {
                        return false;
                    }
                }
                (None, None) => {}
            }
        }
        true
    }

    fn run(&mut self, depth: usize) {
        if depth == self.plan.order.len() {
            self.out.push(self.map.clone());
            return;
        }
        let p = self.plan.order[depth];
        let candidates: Vec<usize> = match self.plan.parent[p] {
            None => (0..self.target.graph.atom_count()).collect(),
            Some((q, _)) => self.target.adj[self.map[q]].iter().map(|&(nb, _)| nb).collect(),
        };
        for v in candidates {
            if self.used[v] || !self.atom_ok(p, v) || !self.edges_ok(p, v, depth) {
                continue;
            }
            self.map[p] = v;
            self.used[v] = true;
            self.run(depth + 1);
            self.used[v] = false;
        }
    }
}

pub(crate) fn raw_embeddings(target: &Target<'_>, t: &FunctionalGroupTemplate, locked: &[bool]) -> Vec<Vec<usize>> {
    let n = target.graph.atom_count();
    let mut search = Search {
        target,
        t,
        plan: plan(t),
        locked,
        map: vec![usize::MAX; t.atoms.len()],
        used: vec![false; n],
        out: Vec::new(),
    };
    if n > 0 {
        search.run(0);
    }
    let mut out = search.out;
    out.sort();
    out
}

pub(crate) fn collapsed(target: &Target<'_>, t: &FunctionalGroupTemplate, locked: &[bool]) -> Vec<TemplateMatch> {
    let mut by_set: BTreeMap<Vec<usize>, TemplateMatch> = BTreeMap::new();
    for map in raw_embeddings(target, t, locked) {
        let m = TemplateMatch {
            core: map[..t.core_len].to_vec(),
            context: map[t.core_len..].to_vec(),
        };
        let key = m.atom_set();
        match by_set.get(&key) {
            Some(best) if *best <= m => {}
            _ => {
                by_set.insert(key, m);
            }
        }
    }
    let mut out: Vec<TemplateMatch> = by_set.into_values().collect();
    out.sort();
    out
}

fn locked_mask(graph: &MolecularGraph, locked: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; graph.atom_count()];
    for &i in locked {
        if i < mask.len() {
            mask[i] = true;
        }
    }
    mask
}

/// Every embedding of the template avoiding `locked` core atoms, sorted by
/// graph-index tuple (core atoms first, then context atoms).
pub fn match_embeddings(
    graph: &MolecularGraph,
    template: &FunctionalGroupTemplate,
    locked: &[usize],
) -> Result<Vec<Vec<usize>>, DictError> {
    if !graph.is_sanitized() {
        return Err(DictError::NotSanitized);
    }
    Ok(raw_embeddings(&Target::new(graph), template, &locked_mask(graph, locked)))
}

/// Embeddings collapsed to one per group atom set, keeping the smallest
/// core tuple, sorted by core tuple.
pub fn match_template(
    graph: &MolecularGraph,
    template: &FunctionalGroupTemplate,
    locked: &[usize],
) -> Result<Vec<TemplateMatch>, DictError> {
    if !graph.is_sanitized() {
        return Err(DictError::NotSanitized);
    }
    Ok(collapsed(&Target::new(graph), template, &locked_mask(graph, locked)))
}
