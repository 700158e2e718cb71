mod common;

use std::sync::OnceLock;

use chemanchor::coco::Category;
use chemanchor::datagen::{gen_molecule_sample, gen_reaction_layout, parse_source, render_svg, Archetype, DatasetSample, SourceSet};
use chemanchor::fgdict::Dictionary;
use chemanchor::{MolecularGraph, Point};
use common::{data_path, mol, read_smiles};
use proptest::prelude::*;

fn dict() -> &'static Dictionary {
    static DICT: OnceLock<Dictionary> = OnceLock::new();
    DICT.get_or_init(Dictionary::shipped)
}

fn molecules() -> &'static [MolecularGraph] {
    static MOLS: OnceLock<Vec<MolecularGraph>> = OnceLock::new();
    MOLS.get_or_init(|| read_smiles("data/small50.smi").iter().map(|s| mol(s)).collect())
}

fn sources() -> &'static SourceSet {
    static SRC: OnceLock<SourceSet> = OnceLock::new();
    SRC.get_or_init(|| parse_source(&std::fs::read_to_string(data_path("data/reactions.txt")).unwrap()).unwrap())
}

fn molecule_sample(i: usize, seed: u64) -> Option<DatasetSample> {
    gen_molecule_sample(&molecules()[i], dict(), seed).ok()
}

fn check_anchors(s: &DatasetSample) -> Result<(), TestCaseError> {
    for a in s.of(Category::Anchor) {
        let p = a.keypoint.expect("anchor keypoint");
        let parent = &s.annotations[a.parent.expect("anchor parent")];
        prop_assert_eq!(parent.category, Category::FunctionalGroup);
        prop_assert!(parent.bbox.contains(p, 1e-6), "{:?} outside {:?}", p, parent.bbox);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn molecule_samples_repeat(i in 0..50usize, seed in any::<u64>()) {
        let a = molecule_sample(i, seed);
        prop_assert_eq!(&a, &molecule_sample(i, seed));
        if let Some(a) = a {
            prop_assert_eq!(render_svg(&a), render_svg(&molecule_sample(i, seed).unwrap()));
        }
    }

    #[test]
    fn molecule_annotations_are_consistent(i in 0..50usize, seed in any::<u64>()) {
        let Some(s) = molecule_sample(i, seed) else { return Ok(()) };
        check_anchors(&s)?;
        let groups: Vec<_> = s.of(Category::FunctionalGroup).map(|a| a.bbox).collect();
        for b in s.of(Category::Bond) {
            prop_assert!(groups.iter().any(|g| g.intersects(&b.bbox, 1e-6)), "bond {:?} touches no group", b.bbox);
        }
    }

    #[test]
    fn reaction_samples_repeat(r in 0..14usize, k in 0..3usize, seed in any::<u64>()) {
        let record = &sources().reactions[r];
        let a = gen_reaction_layout(record, Archetype::ALL[k], seed).unwrap();
        let b = gen_reaction_layout(record, Archetype::ALL[k], seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.count(Category::Arrow) >= 1, true);
        prop_assert!(a.count(Category::Reactants) >= 1 && a.count(Category::Products) >= 1);
    }
}

/// Values of every `name="..."` attribute on `<tag` elements, one map per element.
fn elements<'a>(svg: &'a str, tag: &str) -> Vec<(&'a str, Option<&'a str>)> {
    let open = format!("<{tag} ");
    svg.lines()
        .filter_map(|l| l.trim().strip_prefix(open.as_str()))
        .map(|rest| {
            let body = rest.split_once('>').map(|(a, b)| (a, b.strip_suffix(&format!("</{tag}>")))).unwrap_or((rest, None));
            body
        })
        .collect()
}

fn attr(attrs: &str, name: &str) -> Option<String> {
    let key = format!(" {name}=\"");
    let start = format!(" {attrs}").find(&key)? + key.len() - 1;
    let rest = &attrs[start..];
    Some(rest[..rest.find('"')?].to_string())
}

fn num(attrs: &str, name: &str) -> f64 {
    attr(attrs, name).and_then(|v| v.parse().ok()).unwrap_or_else(|| panic!("{name} in {attrs}"))
}

#[test]
fn hydroxyl_label_sits_in_its_group_box() {
    let ethanol = mol("CCO");
    for seed in 0..40 {
        let s = gen_molecule_sample(&ethanol, dict(), seed).unwrap();
        let svg = render_svg(&s);
        let groups: Vec<_> = s.of(Category::FunctionalGroup).map(|a| a.bbox).collect();
        assert_eq!(groups.len(), 1, "seed {seed}");
        let labels: Vec<Point> = elements(&svg, "text")
            .into_iter()
            .filter(|(_, text)| text.is_some_and(|t| t.contains('O')))
            .map(|(a, _)| Point::new(num(a, "x"), num(a, "y")))
            .collect();
        assert_eq!(labels.len(), 1, "seed {seed}: {svg}");
        assert!(groups[0].contains(labels[0], 1e-6), "seed {seed}: {:?} outside {:?}", labels[0], groups[0]);
    }
}

#[test]
fn arrow_strokes_sit_in_arrow_boxes() {
    for (r, record) in sources().reactions.iter().enumerate() {
        for k in Archetype::ALL {
            for seed in 0..5 {
                let s = gen_reaction_layout(record, k, seed).unwrap();
                let arrows: Vec<_> = s.of(Category::Arrow).map(|a| a.bbox).collect();
                let svg = render_svg(&s);
                let lines = elements(&svg, "polyline");
                assert!(!lines.is_empty(), "reaction {r} {k} seed {seed}");
                for (a, _) in lines {
                    let pts: Vec<Point> = attr(a, "points")
                        .unwrap()
                        .split_whitespace()
                        .map(|xy| {
                            let (x, y) = xy.split_once(',').unwrap();
                            Point::new(x.parse().unwrap(), y.parse().unwrap())
                        })
                        .collect();
                    assert!(
                        arrows.iter().any(|b| pts.iter().all(|&p| b.contains(p, 0.01))),
                        "reaction {r} {k} seed {seed}: {pts:?} not inside {arrows:?}"
                    );
                }
            }
        }
    }
}
