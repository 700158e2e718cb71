use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Layout, Role};

/// Placeholder entry for a structure the recognizer could not read.
pub const UNRECOGNIZED: &str = "<unrecognized>";

/// Recognition outcome for one reactant or product element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structure {
    Smiles(String),
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub reaction_id: u32,
    pub reactants: Vec<String>,
    pub products: Vec<String>,
    pub reagents: Vec<String>,
    pub solvents: Vec<String>,
    /// Positions holding [`UNRECOGNIZED`], e.g. `"reactants[1]"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unrecognized: Vec<String>,
}

impl ReactionRecord {
    /// At least one reactant and one product, none of them placeholders.
    pub fn is_complete(&self) -> bool {
        !self.reactants.is_empty() && !self.products.is_empty() && self.unrecognized.is_empty()
    }
}

/// Case-insensitive set of solvent names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolventLexicon {
    names: BTreeSet<String>,
}

const DEFAULT_SOLVENTS: &[&str] = &[
    "water", "H2O", "toluene", "THF", "tetrahydrofuran", "dioxane", "1,4-dioxane", "DMF", "DMSO", "MeOH",
    "methanol", "EtOH", "ethanol", "MeCN", "acetonitrile", "DCM", "CH2Cl2", "CHCl3", "EtOAc", "hexane",
    "Et2O", "ether", "acetone", "benzene", "DME", "NMP", "iPrOH",
];

impl Default for SolventLexicon {
    fn default() -> Self {
        SolventLexicon::new(DEFAULT_SOLVENTS.iter().copied())
    }
}

impl SolventLexicon {
    pub fn new<'a>(names: impl IntoIterator<Item = &'a str>) -> SolventLexicon {
        SolventLexicon {
            names: names.into_iter().map(|n| n.trim().to_lowercase()).filter(|n| !n.is_empty()).collect(),
        }
    }

    /// One name per line; blank lines and `#` comments skipped.
    pub fn from_text(text: &str) -> SolventLexicon {
        SolventLexicon::new(text.lines().map(str::trim).filter(|l| !l.starts_with('#')))
    }

    pub fn is_solvent(&self, name: &str) -> bool {
        self.names.contains(&name.trim().to_lowercase())
    }
}

/// Splits condition text into items at `,` `;` newlines and spaced ` / `,
/// leaving commas inside parentheses or between digits alone.
fn condition_items(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut items = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        let split = match c {
            '(' | '[' => {
                depth += 1;
                false
            }
            ')' | ']' => {
                depth -= 1;
                false
            }
            ',' => {
                depth <= 0
                    && !(prev.is_some_and(|p| p.is_ascii_digit()) && next.is_some_and(|n| n.is_ascii_digit()))
            }
            ';' | '\n' => true,
            '/' => prev.is_some_and(char::is_whitespace) && next.is_some_and(char::is_whitespace),
            _ => false,
        };
        if split {
            items.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    items.push(cur);
    items
        .into_iter()
        .map(|s| {
            let s = s.trim();
            match s.split_once(':') {
                Some((head, rest)) if head.chars().all(|c| c.is_ascii_alphabetic() || c == ' ') => rest.trim().to_string(),
                _ => s.to_string(),
            }
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Splits condition text into (reagents, solvents) by lexicon lookup.
pub fn split_conditions(text: &str, lexicon: &SolventLexicon) -> (Vec<String>, Vec<String>) {
    condition_items(text).into_iter().partition(|item| !lexicon.is_solvent(item))
}

/// Turns grouped layouts into reaction records. Reactants and products keep
/// layout order; a missing or failed structure becomes an [`UNRECOGNIZED`]
/// placeholder listed in `unrecognized`.
pub fn assemble_reactions(
    layout: &Layout,
    structures: &HashMap<usize, Structure>,
    condition_texts: &HashMap<usize, String>,
    lexicon: &SolventLexicon,
) -> Vec<ReactionRecord> {
    layout
        .reactions
        .iter()
        .map(|group| {
            let mut record = ReactionRecord {
                reaction_id: group.reaction_id,
                ..ReactionRecord::default()
            };
            for (role, field) in [(Role::Reactant, "reactants"), (Role::Product, "products")] {
                let mut list = Vec::new();
                for (k, idx) in group.role(role).iter().enumerate() {
                    match structures.get(idx) {
                        Some(Structure::Smiles(s)) => list.push(s.clone()),
                        _ => {
                            list.push(UNRECOGNIZED.to_string());
                            record.unrecognized.push(format!("{field}[{k}]"));
                        }
                    }
                }
                match role {
                    Role::Reactant => record.reactants = list,
                    _ => record.products = list,
                }
            }
            for idx in &group.conditions {
                if let Some(text) = condition_texts.get(idx) {
                    let (reagents, solvents) = split_conditions(text, lexicon);
                    record.reagents.extend(reagents);
                    record.solvents.extend(solvents);
                }
            }
            record
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::reaction::{parse_layout, DiagramElement};

    fn el(role: Role, x: f64) -> DiagramElement {
        DiagramElement {
            reaction_id: 1,
            role,
            bbox: BBox::new_unchecked(x, 400.0, x + 80.0, 600.0),
        }
    }

    #[test]
    fn lexicon_split() {
        let lex = SolventLexicon::default();
        let (r, s) = split_conditions("Pd(OAc)2, PPh3, TBAB / Toluene, H2O", &lex);
        assert_eq!(r, ["Pd(OAc)2", "PPh3", "TBAB"]);
        assert_eq!(s, ["Toluene", "H2O"]);
        let (r, s) = split_conditions("Pd/C, H2; solvents: 1,4-dioxane", &lex);
        assert_eq!(r, ["Pd/C", "H2"]);
        assert_eq!(s, ["1,4-dioxane"]);
        let custom = SolventLexicon::from_text("# mine\nsulfolane\n");
        assert!(custom.is_solvent("Sulfolane"));
        assert!(!custom.is_solvent("toluene"));
    }

    #[test]
    fn suzuki_record() {
        let els = vec![
            el(Role::Product, 800.0),
            el(Role::Reactant, 10.0),
            el(Role::Plus, 120.0),
            el(Role::Reactant, 200.0),
            el(Role::Arrow, 400.0),
            el(Role::Condition, 400.0),
        ];
        let layout = parse_layout(&els);
        let structures = HashMap::from([
            (1, Structure::Smiles("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1".into())),
            (3, Structure::Smiles("OB(O)c1ccccc1".into())),
            (0, Structure::Smiles("COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1".into())),
        ]);
        let conditions = HashMap::from([(5, "Pd(OAc)2, PPh3, TBAB / Toluene, H2O".to_string())]);
        let records = assemble_reactions(&layout, &structures, &conditions, &SolventLexicon::default());
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.reactants, ["COC(=O)c1ccc(-c2ccc(Br)cc2)cc1", "OB(O)c1ccccc1"]);
        assert_eq!(r.products, ["COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1"]);
        assert_eq!(r.reagents, ["Pd(OAc)2", "PPh3", "TBAB"]);
        assert_eq!(r.solvents, ["Toluene", "H2O"]);
        assert!(r.is_complete());
    }

    #[test]
    fn no_conditions_and_failures() {
        let els = vec![el(Role::Reactant, 10.0), el(Role::Arrow, 300.0), el(Role::Product, 600.0)];
        let layout = parse_layout(&els);
        let structures = HashMap::from([(0, Structure::Smiles("CCO".into())), (2, Structure::Failed)]);
        let records = assemble_reactions(&layout, &structures, &HashMap::new(), &SolventLexicon::default());
        let r = &records[0];
        assert!(r.reagents.is_empty() && r.solvents.is_empty());
        assert_eq!(r.products, [UNRECOGNIZED]);
        assert_eq!(r.unrecognized, ["products[0]"]);
        assert!(!r.is_complete());
    }
}
