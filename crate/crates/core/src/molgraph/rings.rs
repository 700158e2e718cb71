//! Ring perception: bridges, ring membership and a smallest set of smallest rings.

use std::collections::VecDeque;

use super::MolecularGraph;

/// Per bond: true when removing it disconnects its component (not in any ring).
pub fn bridges(graph: &MolecularGraph) -> Vec<bool> {
    let n = graph.atom_count();
    let adj = graph.adjacency();
    let mut is_bridge = vec![false; graph.bond_count()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Iterative DFS: (vertex, parent bond, next neighbor cursor).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent_bond, ref mut cursor)) = stack.last_mut() {
            if *cursor < adj[v].len() {
                let (w, bond) = adj[v][*cursor];
                *cursor += 1;
                if bond == parent_bond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, bond, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[parent_bond] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Per bond: true when the bond lies on a cycle.
pub fn ring_bonds(graph: &MolecularGraph) -> Vec<bool> {
    bridges(graph).into_iter().map(|b| !b).collect()
}

/// Per atom: true when the atom lies on a cycle.
pub fn ring_atoms(graph: &MolecularGraph) -> Vec<bool> {
    let mut out = vec![false; graph.atom_count()];
    for (bond, in_ring) in graph.bonds().iter().zip(ring_bonds(graph)) {
        if in_ring {
            out[bond.a] = true;
            out[bond.b] = true;
        }
    }
    out
}

type BitSet = Vec<u64>;

fn bit_set(bits: &mut BitSet, i: usize) {
    bits[i / 64] ^= 1 << (i % 64);
}

fn is_zero(bits: &BitSet) -> bool {
    bits.iter().all(|&w| w == 0)
}

fn xor_into(dst: &mut BitSet, src: &BitSet) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn lowest_bit(bits: &BitSet) -> Option<usize> {
    bits.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Smallest set of smallest rings, each as an ordered atom cycle.
///
/// Candidates are Horton cycles (shortest path to both ends of an edge from a
/// root), reduced by GF(2) elimination over bond incidence vectors. Rings are
/// returned sorted by size, then by their sorted atom lists.
pub fn sssr(graph: &MolecularGraph) -> Vec<Vec<usize>> {
    let n = graph.atom_count();
    let m = graph.bond_count();
    let rank = (m + graph.components().len()).saturating_sub(n);
    if rank == 0 {
        return Vec::new();
    }
    let adj = graph.adjacency();
    let ring_bond = ring_bonds(graph);
    let words = m.div_ceil(64);

    let mut candidates: Vec<(usize, Vec<usize>, BitSet)> = Vec::new();
    for root in 0..n {
        if !adj[root].iter().any(|&(_, b)| ring_bond[b]) {
            continue;
        }
        // BFS tree restricted to ring bonds; parents chosen by lowest index.
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![(usize::MAX, usize::MAX); n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let mut next: Vec<(usize, usize)> =
                adj[v].iter().copied().filter(|&(_, b)| ring_bond[b]).collect();
            next.sort_unstable();
            for (w, b) in next {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = (v, b);
                    queue.push_back(w);
                }
            }
        }
        let path = |mut v: usize| {
            let mut atoms = vec![v];
            let mut bonds = Vec::new();
            while v != root {
                let (p, b) = parent[v];
                bonds.push(b);
                atoms.push(p);
                v = p;
            }
            (atoms, bonds)
        };
        for (bi, bond) in graph.bonds().iter().enumerate() {
            if !ring_bond[bi] || dist[bond.a] == usize::MAX || dist[bond.b] == usize::MAX {
                continue;
            }
            if parent[bond.a].1 == bi || parent[bond.b].1 == bi {
                continue;
            }
            let (pa, ba) = path(bond.a);
            let (pb, bb) = path(bond.b);
            // Paths must meet only at the root.
            let shared = pa.iter().filter(|x| pb.contains(x)).count();
            if shared != 1 {
                continue;
            }
            let mut bits = vec![0u64; words];
            for &b in ba.iter().chain(&bb) {
                bit_set(&mut bits, b);
            }
            bit_set(&mut bits, bi);
            let mut atoms: Vec<usize> = pa.into_iter().chain(pb).collect();
            atoms.sort_unstable();
            atoms.dedup();
            let size = ba.len() + bb.len() + 1;
            candidates.push((size, atoms, bits));
        }
    }
    // Fallback candidates: fundamental cycles of a spanning forest.
    candidates.extend(fundamental_cycles(graph, words));

    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    candidates.dedup_by(|a, b| a.2 == b.2);

    let mut basis: Vec<(usize, BitSet)> = Vec::new();
    let mut rings = Vec::new();
    for (_, _, bits) in candidates {
        let mut reduced = bits.clone();
        for (pivot, row) in &basis {
            if reduced[pivot / 64] >> (pivot % 64) & 1 == 1 {
                xor_into(&mut reduced, row);
            }
        }
        if is_zero(&reduced) {
            continue;
        }
        let pivot = lowest_bit(&reduced).expect("nonzero");
        for (_, row) in basis.iter_mut() {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                xor_into(row, &reduced);
            }
        }
        basis.push((pivot, reduced));
        rings.push(cycle_from_bits(graph, &bits));
        if rings.len() == rank {
            break;
        }
    }
    rings
}

fn fundamental_cycles(graph: &MolecularGraph, words: usize) -> Vec<(usize, Vec<usize>, BitSet)> {
    let n = graph.atom_count();
    let adj = graph.adjacency();
    let mut parent = vec![(usize::MAX, usize::MAX); n];
    let mut depth = vec![usize::MAX; n];
    let mut tree_bond = vec![false; graph.bond_count()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, b) in &adj[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = (v, b);
                    tree_bond[b] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut out = Vec::new();
    for (bi, bond) in graph.bonds().iter().enumerate() {
        if tree_bond[bi] {
            continue;
        }
        let mut bits = vec![0u64; words];
        bit_set(&mut bits, bi);
        let (mut x, mut y) = (bond.a, bond.b);
        while x != y {
            if depth[x] >= depth[y] {
                bit_set(&mut bits, parent[x].1);
                x = parent[x].0;
            } else {
                bit_set(&mut bits, parent[y].1);
                y = parent[y].0;
            }
        }
        let size = bits.iter().map(|w| w.count_ones() as usize).sum();
        let mut atoms = cycle_from_bits(graph, &bits);
        atoms.sort_unstable();
        out.push((size, atoms, bits));
    }
    out
}

/// Orders the atoms of a simple cycle given as a bond bit set, starting from
/// its lowest atom index.
fn cycle_from_bits(graph: &MolecularGraph, bits: &BitSet) -> Vec<usize> {
    let bonds: Vec<usize> = (0..graph.bond_count())
        .filter(|&b| bits[b / 64] >> (b % 64) & 1 == 1)
        .collect();
    let start = bonds
        .iter()
        .flat_map(|&b| [graph.bonds()[b].a, graph.bonds()[b].b])
        .min()
        .expect("cycle has bonds");
    let mut cycle = vec![start];
    let mut used = vec![false; bonds.len()];
    let mut current = start;
    loop {
        let next = bonds
            .iter()
            .enumerate()
            .filter(|(k, &b)| !used[*k] && graph.bonds()[b].touches(current))
            .map(|(k, &b)| (graph.bonds()[b].other(current), k))
            .min();
        let Some((atom, k)) = next else { break };
        used[k] = true;
        if atom == start {
            break;
        }
        cycle.push(atom);
        current = atom;
    }
    cycle
}

/// Groups rings that share at least one atom into ring systems.
pub fn ring_systems(rings: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut group: Vec<usize> = (0..rings.len()).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..rings.len() {
        for j in i + 1..rings.len() {
            if rings[i].iter().any(|a| rings[j].contains(a)) {
                let (ri, rj) = (find(&mut group, i), find(&mut group, j));
                group[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut systems: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; rings.len()];
    for i in 0..rings.len() {
        let root = find(&mut group, i);
        if index[root] == usize::MAX {
            index[root] = systems.len();
            systems.push(Vec::new());
        }
        systems[index[root]].push(i);
    }
    systems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn bridges_in_biphenyl() {
        let g = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(bridges(&g).iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn naphthalene_has_two_six_rings() {
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        let r = sssr(&g);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|c| c.len() == 6));
        assert_eq!(ring_systems(&r).len(), 1);
    }

    #[test]
    fn cycles_are_ordered_walks() {
        let g = parse_smiles("C1CC2CCC1CC2").unwrap();
        for ring in sssr(&g) {
            for k in 0..ring.len() {
                let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
                assert!(g.bond_between(a, b).is_some(), "{ring:?}");
            }
        }
    }

    #[test]
    fn spiro_and_cubane_rank() {
        let g = parse_smiles("C1CCC2(C1)CCCC2").unwrap();
        assert_eq!(sssr(&g).len(), 2);
        let cubane = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        let r = sssr(&cubane);
        assert_eq!(r.len(), 5);
        assert!(r.iter().all(|c| c.len() == 4));
    }

    #[test]
    fn acyclic_has_no_rings() {
        let g = parse_smiles("CC(C)CO").unwrap();
        assert!(sssr(&g).is_empty());
        assert!(ring_atoms(&g).iter().all(|&r| !r));
    }
}
