use std::path::Path;

use anyhow::Context;
use chemanchor::anchor::{compute_anchors, serialize_hybrid};
use chemanchor::fgdict::{decompose, Dictionary};
use chemanchor::molgraph::{generate_2d_coords, parse_molfile, parse_smiles, sanitize, split_sdf};
use rayon::prelude::*;
use serde_json::json;

use super::{load_dictionary, read_text, CHUNK};
use crate::manifest::{ItemStatus, Run, Tsv};
use crate::{Common, Outcome};

enum Record {
    Smiles(String),
    Mol(String),
}

struct Item {
    label: String,
    record: Record,
}

fn is_molfile(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("mol" | "sdf" | "sd")
    )
}

fn read_items(path: &Path) -> anyhow::Result<Vec<Item>> {
    let text = read_text(path)?;
    let name = path.display();
    if is_molfile(path) {
        return Ok(split_sdf(&text)
            .into_iter()
            .enumerate()
            .map(|(k, block)| Item {
                label: format!("{name}#{}", k + 1),
                record: Record::Mol(block.to_string()),
            })
            .collect());
    }
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(k, l)| Item {
            label: format!("{name}:{}", k + 1),
            record: Record::Smiles(l.split_whitespace().next().unwrap_or_default().to_string()),
        })
        .collect())
}

struct Done {
    groups: Vec<String>,
    document: String,
}

fn process(record: &Record, dict: &Dictionary) -> Result<Done, String> {
    let graph = match record {
        Record::Smiles(s) => parse_smiles(s),
        Record::Mol(block) => parse_molfile(block),
    }
    .map_err(|e| e.to_string())?;
    let mut graph = sanitize(&graph).map_err(|d| d.to_string())?;
    if (0..graph.atom_count()).any(|i| graph.atom(i).coord_2d.is_none()) {
        graph = generate_2d_coords(&graph).graph;
    }
    let d = decompose(&graph, dict).map_err(|e| e.to_string())?;
    let (hybrid, anchors) = compute_anchors(&graph, &d, dict).map_err(|e| e.to_string())?;
    Ok(Done {
        groups: d.groups.iter().map(|g| g.name.clone()).collect(),
        document: serialize_hybrid(&hybrid, &anchors),
    })
}

pub fn run(common: &Common, inputs: &[std::path::PathBuf], priority_list: Option<&Path>) -> anyhow::Result<Outcome> {
    let dict = load_dictionary(priority_list)?;
    let mut items = Vec::new();
    for path in inputs {
        items.extend(read_items(path)?);
    }
    let paths: Vec<&Path> = inputs.iter().map(|p| p.as_path()).collect();
    let config = json!({
        "priority_list": priority_list.map(|p| p.display().to_string()),
        "groups": dict.len(),
    });
    let mut run = Run::start("decompose", common, &paths, config)?;
    let docs = run.output("hybrids");
    std::fs::create_dir_all(&docs).with_context(|| format!("creating {}", docs.display()))?;
    let mut tsv = Tsv::create(run.output("decompose.tsv"), &["index", "input", "status", "groups", "document", "error"])?;
    for (c, chunk) in items.chunks(CHUNK).enumerate() {
        let results: Vec<_> = chunk.par_iter().map(|item| process(&item.record, &dict)).collect();
        for (k, (item, result)) in chunk.iter().zip(results).enumerate() {
            let index = c * CHUNK + k;
            match result {
                Ok(done) => {
                    let name = format!("{index:06}.json");
                    let path = docs.join(&name);
                    std::fs::write(&path, done.document).with_context(|| format!("writing {}", path.display()))?;
                    let rel = format!("hybrids/{name}");
                    tsv.row(&[&index.to_string(), &item.label, "ok", &done.groups.join(","), &rel, ""])?;
                    run.item(ItemStatus::new(index, &item.label, None));
                }
                Err(e) => {
                    tsv.row(&[&index.to_string(), &item.label, "failed", "", "", &e])?;
                    run.item(ItemStatus::new(index, &item.label, Some(e)));
                }
            }
        }
    }
    tsv.finish()?;
    run.finish()
}
