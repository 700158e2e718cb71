use std::hint::black_box;

use chemanchor::anchor::{compute_anchors, parse_hybrid, serialize_hybrid};
use chemanchor::datagen::{gen_molecule_sample, gen_reaction_layout, parse_source, Archetype};
use chemanchor::dvm::reconstruct;
use chemanchor::fgdict::{decompose, Dictionary};
use chemanchor::fingerprint::{l1_score, morgan_fingerprint};
use chemanchor::{canonical_smiles, generate_2d_coords, parse_smiles, sanitize, MolecularGraph};
use chemanchor_bench::{MOLECULES, SUZUKI};
use criterion::{criterion_group, criterion_main, Criterion};

fn graphs() -> Vec<MolecularGraph> {
    MOLECULES
        .iter()
        .map(|s| sanitize(&parse_smiles(s).unwrap()).unwrap())
        .collect()
}

fn molgraph(c: &mut Criterion) {
    let graphs = graphs();
    c.bench_function("parse_and_sanitize", |b| {
        b.iter(|| {
            for s in MOLECULES {
                black_box(sanitize(&parse_smiles(s).unwrap()).unwrap());
            }
        })
    });
    c.bench_function("canonical_smiles", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(canonical_smiles(g).unwrap());
            }
        })
    });
    c.bench_function("generate_2d_coords", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(generate_2d_coords(g));
            }
        })
    });
}

fn fingerprints(c: &mut Criterion) {
    let graphs = graphs();
    c.bench_function("morgan_fingerprint", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(morgan_fingerprint(g, 2, 2048).unwrap());
            }
        })
    });
    c.bench_function("l1_score", |b| b.iter(|| black_box(l1_score(MOLECULES[4], MOLECULES[4]).unwrap())));
}

fn groups(c: &mut Criterion) {
    let dict = Dictionary::shipped();
    let laid: Vec<MolecularGraph> = graphs().iter().map(|g| generate_2d_coords(g).graph).collect();
    c.bench_function("decompose", |b| {
        b.iter(|| {
            for g in &laid {
                black_box(decompose(g, &dict).unwrap());
            }
        })
    });
    let documents: Vec<String> = laid
        .iter()
        .map(|g| {
            let d = decompose(g, &dict).unwrap();
            let (h, a) = compute_anchors(g, &d, &dict).unwrap();
            serialize_hybrid(&h, &a)
        })
        .collect();
    c.bench_function("parse_and_reconstruct", |b| {
        b.iter(|| {
            for doc in &documents {
                let (h, a) = parse_hybrid(doc, &dict).unwrap();
                black_box(reconstruct(&h, &a, &dict).unwrap());
            }
        })
    });
}

fn datagen(c: &mut Criterion) {
    let dict = Dictionary::shipped();
    let g = &graphs()[4];
    c.bench_function("molecule_sample", |b| b.iter(|| black_box(gen_molecule_sample(g, &dict, 7).unwrap())));
    let record = parse_source(SUZUKI).unwrap().reactions.remove(0);
    for archetype in Archetype::ALL {
        c.bench_function(&format!("reaction_sample_{}", archetype.name()), |b| {
            b.iter(|| black_box(gen_reaction_layout(&record, archetype, 7).unwrap()))
        });
    }
}

criterion_group!(benches, molgraph, fingerprints, groups, datagen);
criterion_main!(benches);
