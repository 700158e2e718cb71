mod common;

use std::sync::OnceLock;

use chemanchor::fingerprint::{l1_score, morgan_fingerprint, tanimoto};
use chemanchor::molgraph::Atom;
use chemanchor::{canonical_smiles, generate_2d_coords, parse_smiles, sanitize, BondOrder, Element, MolecularGraph};
use common::{isomorphic, mol, read_smiles};
use proptest::prelude::*;

fn corpus() -> &'static [MolecularGraph] {
    static CORPUS: OnceLock<Vec<MolecularGraph>> = OnceLock::new();
    CORPUS.get_or_init(|| read_smiles("data/corpus.smi").iter().map(|s| mol(s)).collect())
}

fn corpus_molecule() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (0..corpus().len()).prop_flat_map(|i| {
        let n = corpus()[i].atom_count();
        (Just(i), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

/// Random connected molecules from C, N, O, S and Cl: a random tree plus
/// a few ring-closing bonds, some of them double. Only ones that sanitize
/// survive.
fn random_molecule() -> impl Strategy<Value = MolecularGraph> {
    (2usize..14)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::sample::select(vec![Element::C, Element::C, Element::C, Element::N, Element::O, Element::S, Element::CL]), n),
                prop::collection::vec((any::<prop::sample::Index>(), prop::bool::weighted(0.2)), n - 1),
                prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..3),
            )
        })
        .prop_filter_map("does not sanitize", |(elements, tree, closures)| {
            let mut g = MolecularGraph::new();
            for e in &elements {
                g.add_atom(Atom::new(*e)).ok()?;
            }
            for (i, (parent, double)) in tree.iter().enumerate() {
                let child = i + 1;
                let order = if *double { BondOrder::Double } else { BondOrder::Single };
                g.add_bond(parent.index(child), child, order).ok()?;
            }
            for (a, b) in closures {
                let (a, b) = (a.index(elements.len()), b.index(elements.len()));
                if a != b && g.bond_between(a, b).is_none() {
                    g.add_bond(a, b, BondOrder::Single).ok()?;
                }
            }
            sanitize(&g).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_form_ignores_atom_order((i, order) in corpus_molecule()) {
        let g = &corpus()[i];
        prop_assert_eq!(canonical_smiles(g).unwrap(), canonical_smiles(&g.permuted(&order)).unwrap());
    }

    #[test]
    fn canonical_form_is_idempotent((i, _) in corpus_molecule()) {
        let once = canonical_smiles(&corpus()[i]).unwrap();
        let twice = canonical_smiles(&mol(&once)).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn random_molecules_canonicalize_stably(g in random_molecule(), seed in any::<u64>()) {
        let n = g.atom_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left((seed as usize) % n);
        if seed & 1 == 1 {
            order.reverse();
        }
        let a = canonical_smiles(&g).unwrap();
        prop_assert_eq!(&a, &canonical_smiles(&g.permuted(&order)).unwrap());
        let reparsed = sanitize(&parse_smiles(&a).unwrap()).unwrap();
        prop_assert!(isomorphic(&g, &reparsed), "{} does not reparse to the same graph", a);
        prop_assert_eq!(&a, &canonical_smiles(&reparsed).unwrap());
    }

    #[test]
    fn smiles_round_trip_is_isomorphic((i, _) in corpus_molecule()) {
        let g = &corpus()[i];
        prop_assume!(g.heavy_atom_count() <= 12);
        let back = mol(&canonical_smiles(g).unwrap());
        prop_assert!(isomorphic(g, &back));
    }

    #[test]
    fn layout_is_deterministic((i, _) in corpus_molecule()) {
        let g = &corpus()[i];
        prop_assert_eq!(generate_2d_coords(g).graph.coords(), generate_2d_coords(g).graph.coords());
    }

    #[test]
    fn tanimoto_is_symmetric(a in 0..corpus().len(), b in 0..corpus().len()) {
        let fa = morgan_fingerprint(&corpus()[a], 2, 2048).unwrap();
        let fb = morgan_fingerprint(&corpus()[b], 2, 2048).unwrap();
        let ab = tanimoto(&fa, &fb).unwrap();
        prop_assert_eq!(ab, tanimoto(&fb, &fa).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn fingerprint_ignores_atom_order((i, order) in corpus_molecule()) {
        let g = &corpus()[i];
        prop_assert_eq!(
            morgan_fingerprint(g, 2, 2048).unwrap(),
            morgan_fingerprint(&g.permuted(&order), 2, 2048).unwrap()
        );
    }
}

#[test]
fn every_corpus_molecule_scores_itself_100() {
    for s in read_smiles("data/corpus.smi") {
        assert_eq!(l1_score(&s, &s).unwrap().score, 100, "{s}");
    }
}
