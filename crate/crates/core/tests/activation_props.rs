use chemanchor::activation::{build_prompt, EntityNames, Source};
use proptest::prelude::*;

const MARK: &str = "(SMILES: [";

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        ".{0,40}",
        "[A-Za-z()\\[\\]:. ]{0,40}",
        Just(MARK.to_string()),
        Just(format!("x {MARK} y {MARK}")),
    ]
}

fn names() -> impl Strategy<Value = EntityNames> {
    prop_oneof![
        Just(EntityNames::unresolved()),
        (text(), prop::collection::vec(text(), 0..4)).prop_map(|(iupac, syn)| EntityNames::from_record(&iupac, &syn, Source::Cache)),
    ]
}

proptest! {
    #[test]
    fn prompt_carries_one_smiles_marker(n in names(), smiles in text(), suffix in text()) {
        let p = build_prompt(&n, &smiles, &suffix);
        prop_assert_eq!(p.matches(MARK).count(), 1);
        prop_assert!(p.starts_with("Image shows "));
        prop_assert_eq!(p, build_prompt(&n, &smiles, &suffix));
    }
}
