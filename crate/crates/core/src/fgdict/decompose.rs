use serde::{Deserialize, Serialize};

use crate::molgraph::{canonical_ranks, MolecularGraph};

use super::matcher::{collapsed, Target};
use super::{DictError, Dictionary};

/// One accepted group occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInstance {
    /// 1-based, in acceptance order.
    pub id: usize,
    pub name: String,
    pub priority_rank: usize,
    /// Sorted graph atoms of the group.
    pub atoms: Vec<usize>,
    /// Graph atom for each core pattern atom of the template.
    pub core: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Decomposition {
    pub groups: Vec<GroupInstance>,
    /// Sorted atoms outside every group.
    pub residual: Vec<usize>,
}

impl Decomposition {
    /// Index into `groups` for every atom, `None` for residual atoms.
    pub fn owner(&self, atom_count: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; atom_count];
        for (gi, g) in self.groups.iter().enumerate() {
            for &a in &g.atoms {
                owner[a] = Some(gi);
            }
        }
        owner
    }

    /// True when groups and residual atoms cover `0..atom_count` exactly once.
    pub fn is_partition(&self, atom_count: usize) -> bool {
        let mut seen = vec![0u32; atom_count];
        for &a in self.groups.iter().flat_map(|g| g.atoms.iter()).chain(&self.residual) {
            if a >= atom_count {
                return false;
            }
            seen[a] += 1;
        }
        seen.iter().all(|&c| c == 1)
    }
}

/// Greedy decomposition: templates in rank order, each accepting its
/// non-overlapping matches lowest canonical-rank tuple first.
///
/// Matching runs on the graph renumbered by canonical rank, so the result is
/// independent of input atom order up to symmetry.
pub fn decompose(graph: &MolecularGraph, dictionary: &Dictionary) -> Result<Decomposition, DictError> {
    if !graph.is_sanitized() {
        return Err(DictError::NotSanitized);
    }
    let n = graph.atom_count();
    let ranks = canonical_ranks(graph);
    let mut order = vec![0; n];
    for (i, &r) in ranks.iter().enumerate() {
        order[r] = i;
    }
    let canon = graph.permuted(&order);
    let target = Target::new(&canon);
    let mut locked = vec![false; n];
    let mut groups = Vec::new();
    for t in dictionary.templates() {
        for m in collapsed(&target, t, &locked) {
            if m.core.iter().any(|&a| locked[a]) {
                continue;
            }
            for &a in &m.core {
                locked[a] = true;
            }
            let core: Vec<usize> = m.core.iter().map(|&a| order[a]).collect();
            let mut atoms = core.clone();
            atoms.sort_unstable();
            groups.push(GroupInstance {
                id: groups.len() + 1,
                name: t.name.clone(),
                priority_rank: t.priority_rank,
                atoms,
                core,
            });
        }
    }
    let residual = {
        let mut r: Vec<usize> = (0..n).filter(|&c| !locked[c]).map(|c| order[c]).collect();
        r.sort_unstable();
        r
    };
    Ok(Decomposition { groups, residual })
}
