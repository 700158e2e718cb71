use std::path::{Path, PathBuf};

use anyhow::Context;
use chemanchor::anchor::parse_hybrid;
use chemanchor::dvm::reconstruct;
use chemanchor::fgdict::Dictionary;
use chemanchor::molgraph::canonical_smiles;
use rayon::prelude::*;
use serde_json::json;

use super::{load_dictionary, read_text, CHUNK};
use crate::manifest::{ItemStatus, Run, Tsv};
use crate::{Common, Outcome};

fn expand(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn process(path: &Path, dict: &Dictionary) -> Result<(String, usize), String> {
    let text = read_text(path).map_err(|e| format!("{e:#}"))?;
    let (hybrid, anchors) = parse_hybrid(&text, dict).map_err(|e| e.to_string())?;
    let r = reconstruct(&hybrid, &anchors, dict).map_err(|e| e.to_string())?;
    let smiles = canonical_smiles(&r.graph).map_err(|e| e.to_string())?;
    Ok((smiles, r.groups.len()))
}

/// Writes `reconstruct.smi` with one line per document (empty for
/// failures, so it stays line-aligned) and `reconstruct.tsv` with details.
pub fn run(common: &Common, inputs: &[PathBuf], priority_list: Option<&Path>) -> anyhow::Result<Outcome> {
    let dict = load_dictionary(priority_list)?;
    let files = expand(inputs)?;
    let paths: Vec<&Path> = inputs.iter().map(|p| p.as_path()).collect();
    let config = json!({
        "priority_list": priority_list.map(|p| p.display().to_string()),
        "documents": files.len(),
    });
    let mut run = Run::start("reconstruct", common, &paths, config)?;
    let mut tsv = Tsv::create(run.output("reconstruct.tsv"), &["index", "input", "status", "smiles", "groups", "error"])?;
    let mut smi = Vec::new();
    for (c, chunk) in files.chunks(CHUNK).enumerate() {
        let results: Vec<_> = chunk.par_iter().map(|f| process(f, &dict)).collect();
        for (k, (file, result)) in chunk.iter().zip(results).enumerate() {
            let index = c * CHUNK + k;
            let label = file.display().to_string();
            match result {
                Ok((smiles, groups)) => {
                    tsv.row(&[&index.to_string(), &label, "ok", &smiles, &groups.to_string(), ""])?;
                    smi.push(smiles);
                    run.item(ItemStatus::new(index, label, None));
                }
                Err(e) => {
                    tsv.row(&[&index.to_string(), &label, "failed", "", "", &e])?;
                    smi.push(String::new());
                    run.item(ItemStatus::new(index, label, Some(e)));
                }
            }
        }
    }
    tsv.finish()?;
    let path = run.output("reconstruct.smi");
    let text: String = smi.iter().map(|s| format!("{s}\n")).collect();
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    run.finish()
}
