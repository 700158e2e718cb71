use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chemanchor::activation::{build_prompt, build_reaction_context, EntityNames, Mode, Resolver, ResolverConfig};
use chemanchor::datagen::{parse_entry, SourceEntry};
use rayon::prelude::*;
use serde_json::json;

use super::read_text;
use crate::manifest::{ItemStatus, Run, Tsv};
use crate::{Common, Outcome};

/// Molecule lines give one row with the prompt; reaction lines
/// (`reactants>agents>products`, optional tab and condition text) give one
/// row with the supplementary context block.
pub fn run(common: &Common, input: &Path, mode: Mode, cache_dir: Option<PathBuf>, task: &str) -> anyhow::Result<Outcome> {
    let text = read_text(input)?;
    let resolver = Resolver::new(ResolverConfig {
        mode,
        cache_dir: cache_dir.clone(),
        use_fixtures: true,
    })?;
    let config = json!({
        "mode": format!("{:?}", resolver.mode()).to_lowercase(),
        "cache_dir": cache_dir.map(|p| p.display().to_string()),
        "task": task,
    });
    let mut run = Run::start("resolve", common, &[input], config)?;

    let mut entries = Vec::new();
    for (k, line) in text.lines().enumerate() {
        match parse_entry(line) {
            Ok(Some(e)) => entries.push((k + 1, line, Ok(e))),
            Ok(None) => {}
            Err(e) => entries.push((k + 1, line, Err(e.to_string()))),
        }
    }
    let mut distinct: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (_, _, e) in &entries {
        let smiles: Vec<&String> = match e {
            Ok(SourceEntry::Molecule(m)) => vec![m],
            Ok(SourceEntry::Reaction(r)) => r.reactants.iter().chain(&r.products).collect(),
            Err(_) => Vec::new(),
        };
        for s in smiles {
            if seen.insert(s.clone()) {
                distinct.push(s.clone());
            }
        }
    }
    let resolved: HashMap<&str, Result<EntityNames, String>> = distinct
        .par_iter()
        .map(|s| (s.as_str(), resolver.resolve(s).map_err(|e| e.to_string())))
        .collect();

    let mut tsv = Tsv::create(
        run.output("resolve.tsv"),
        &["index", "input", "kind", "status", "source", "iupac", "synonyms", "text", "error"],
    )?;
    for (index, (line_no, line, entry)) in entries.into_iter().enumerate() {
        let label = format!("{}:{line_no}", input.display());
        let input_field = line.split('\t').next().unwrap_or_default().trim();
        let row = |kind: &str, names: Option<&EntityNames>, text: &str, error: &str| {
            let (source, iupac, synonyms) = match names {
                Some(n) => (format!("{:?}", n.source).to_lowercase(), n.iupac.clone(), n.common.join("; ")),
                None => Default::default(),
            };
            let status = if error.is_empty() { "ok" } else { "failed" };
            vec![
                index.to_string(),
                input_field.to_string(),
                kind.to_string(),
                status.to_string(),
                source,
                iupac,
                synonyms,
                text.to_string(),
                error.to_string(),
            ]
        };
        let error = match entry {
            Err(e) => {
                tsv.row(&row("", None, "", &e))?;
                Some(e)
            }
            Ok(SourceEntry::Molecule(m)) => match &resolved[m.as_str()] {
                Ok(names) => {
                    tsv.row(&row("molecule", Some(names), &build_prompt(names, &m, task), ""))?;
                    None
                }
                Err(e) => {
                    tsv.row(&row("molecule", None, "", e))?;
                    Some(e.clone())
                }
            },
            Ok(SourceEntry::Reaction(record)) => {
                let mut names = HashMap::new();
                let mut failure = None;
                for s in record.reactants.iter().chain(&record.products) {
                    match &resolved[s.as_str()] {
                        Ok(n) => {
                            names.insert(s.clone(), n.clone());
                        }
                        Err(e) => failure = failure.or(Some(e.clone())),
                    }
                }
                match failure {
                    None => {
                        tsv.row(&row("reaction", None, &build_reaction_context(&record, &names), ""))?;
                        None
                    }
                    Some(e) => {
                        tsv.row(&row("reaction", None, "", &e))?;
                        Some(e)
                    }
                }
            }
        };
        run.item(ItemStatus::new(index, label, error));
    }
    tsv.finish()?;
    run.set_config("lookups", json!(resolver.lookups()));
    run.set_config("distinct_inputs", json!(distinct.len()));
    if resolver.mode() == Mode::Live && resolver.network_failures() > 0 {
        eprintln!(
            "warning: {} lookup(s) could not reach the service; those names are unresolved unless cached",
            resolver.network_failures()
        );
    }
    if resolver.cache_errors() > 0 {
        eprintln!("warning: {} cache write(s) failed", resolver.cache_errors());
    }
    run.finish()
}
