//! Entity-name resolution for molecules and the name-first prompts built
//! from it.

mod pubchem;
mod resolver;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reaction::ReactionRecord;

pub use pubchem::{names_from_raw, PubChemClient, PUBCHEM_BASE};
pub use resolver::{load_fixtures, CacheEntry, Mode, Resolver, ResolverConfig, OFFLINE_ENV};

/// How many synonyms survive selection.
pub const MAX_SYNONYMS: usize = 3;

#[derive(Debug, Error)]
pub enum ActivationError {
    #[error("cannot parse SMILES {smiles:?}: {reason}")]
    Smiles { smiles: String, reason: String },
    #[error("cache {path}: {reason}")]
    Cache { path: String, reason: String },
    #[error("fixture file: {0}")]
    Fixture(String),
    #[error("request failed: {0}")]
    Network(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Live,
    Cache,
    Fixture,
    Unresolved,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Live => "live",
            Source::Cache => "cache",
            Source::Fixture => "fixture",
            Source::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityNames {
    pub iupac: String,
    pub common: Vec<String>,
    pub source: Source,
}

impl EntityNames {
    pub fn unresolved() -> EntityNames {
        EntityNames {
            iupac: String::new(),
            common: Vec::new(),
            source: Source::Unresolved,
        }
    }

    /// Applies synonym selection: case-insensitive de-duplication, entries
    /// differing from the IUPAC name first, at most [`MAX_SYNONYMS`] kept.
    pub fn from_record(iupac: &str, synonyms: &[String], source: Source) -> EntityNames {
        let iupac = iupac.trim().to_string();
        let mut seen = std::collections::HashSet::new();
        let mut unique: Vec<String> = synonyms
            .iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty() && seen.insert(s.to_lowercase()))
            .map(str::to_string)
            .collect();
        let key = iupac.to_lowercase();
        unique.sort_by_key(|s| s.to_lowercase() == key);
        unique.truncate(MAX_SYNONYMS);
        EntityNames {
            iupac,
            common: unique,
            source,
        }
    }

    pub fn is_resolved(&self) -> bool {
        !self.iupac.is_empty() || !self.common.is_empty()
    }

    pub fn with_source(mut self, source: Source) -> EntityNames {
        self.source = source;
        self
    }
}

const SMILES_MARK: &str = "(SMILES: [";

/// Builds `Image shows [<common>, <iupac>] (SMILES: [<smiles>]). <suffix>`.
///
/// Without names the bracketed name list is dropped. Any `(SMILES: [` inside
/// the names, the SMILES or the suffix is rewritten to `(SMILES [` so the marker occurs exactly once.
pub fn build_prompt(names: &EntityNames, smiles: &str, task_suffix: &str) -> String {
    let unmark = |t: &str| t.replace(SMILES_MARK, "(SMILES [");
    let mut listed: Vec<String> = names.common.iter().map(|n| unmark(n)).collect();
    if !names.iupac.is_empty() {
        listed.push(unmark(&names.iupac));
    }
    let mut out = String::from("Image shows ");
    if !listed.is_empty() {
        out.push('[');
        out.push_str(&listed.join(", "));
        out.push_str("] ");
    }
    out.push_str(SMILES_MARK);
    out.push_str(&unmark(smiles));
    out.push_str("]).");
    let suffix = unmark(task_suffix);
    if !suffix.is_empty() {
        out.push(' ');
        out.push_str(&suffix);
    }
    out
}

fn component(label: &str, smiles: &str, names: Option<&EntityNames>) -> String {
    let (synonyms, iupac) = match names {
        Some(n) => (n.common.join(", "), n.iupac.as_str()),
        None => (String::new(), ""),
    };
    format!("{label}: {smiles}, Synonyms: {synonyms}, IUPAC Name: {iupac}")
}

/// Supplementary-information text for a reaction: each reactant and product
/// with its synonyms and IUPAC name, then the reagents and solvents, joined
/// into one line with `", "`.
///
/// The first reactant is labeled `Reactant1` and later ones `Reagents<i>`;
/// products are `Product<i>`. Missing names leave the fields empty.
pub fn build_reaction_context(record: &ReactionRecord, names: &HashMap<String, EntityNames>) -> String {
    let mut parts = Vec::new();
    for (i, smiles) in record.reactants.iter().enumerate() {
        let label = if i == 0 { "Reactant1".to_string() } else { format!("Reagents{}", i + 1) };
        parts.push(component(&label, smiles, names.get(smiles)));
    }
    for (i, smiles) in record.products.iter().enumerate() {
        parts.push(component(&format!("Product{}", i + 1), smiles, names.get(smiles)));
    }
    parts.push(format!(
        "Reagents: {} ; solvents: {}",
        record.reagents.join(", "),
        record.solvents.join(", ")
    ));
    parts.join(", ")
}
