use std::path::Path;

use anyhow::Context;
use chemanchor::fgdict::{load_priority_list, Dictionary};

pub mod decompose;
pub mod eval;
pub mod generate;
pub mod reconstruct;
pub mod resolve;

/// Items processed in parallel per batch before results are written out.
pub const CHUNK: usize = 1024;

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_dictionary(path: Option<&Path>) -> anyhow::Result<Dictionary> {
    match path {
        None => Ok(Dictionary::shipped()),
        Some(p) => {
            let text = read_text(p).context("priority list")?;
            load_priority_list(&text).with_context(|| format!("loading priority list {}", p.display()))
        }
    }
}
