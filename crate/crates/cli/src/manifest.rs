use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

use crate::{Common, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemStatus {
    pub index: usize,
    pub input: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ItemStatus {
    pub fn new(index: usize, input: impl Into<String>, error: Option<String>) -> ItemStatus {
        ItemStatus {
            index,
            input: input.into(),
            status: if error.is_some() { Status::Failed } else { Status::Ok },
            error,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counts {
    pub total: usize,
    pub ok: usize,
    pub failed: usize,
}

/// `run.json`: what ran, on what, and how each item ended.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub counts: Counts,
    pub items: Vec<ItemStatus>,
    pub elapsed_ms: u128,
}

pub struct Run {
    manifest: RunManifest,
    out: PathBuf,
    started: Instant,
}

impl Run {
    pub fn start(command: &str, common: &Common, inputs: &[&Path], config: Value) -> anyhow::Result<Run> {
        std::fs::create_dir_all(&common.out)
            .with_context(|| format!("creating output directory {}", common.out.display()))?;
        Ok(Run {
            manifest: RunManifest {
                command: command.to_string(),
                config,
                inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
                outputs: Vec::new(),
                seed: common.seed,
                counts: Counts::default(),
                items: Vec::new(),
                elapsed_ms: 0,
            },
            out: common.out.clone(),
            started: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn output(&mut self, name: &str) -> PathBuf {
        let path = self.path(name);
        self.manifest.outputs.push(path.display().to_string());
        path
    }

    pub fn set_config(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.manifest.config {
            map.insert(key.to_string(), value);
        }
    }

    pub fn item(&mut self, item: ItemStatus) {
        self.manifest.counts.total += 1;
        match item.status {
            Status::Ok => self.manifest.counts.ok += 1,
            Status::Failed => self.manifest.counts.failed += 1,
        }
        self.manifest.items.push(item);
    }

    pub fn finish(mut self) -> anyhow::Result<Outcome> {
        self.manifest.elapsed_ms = self.started.elapsed().as_millis();
        let path = self.output("run.json");
        let text = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(Outcome {
            failures: self.manifest.counts.failed,
        })
    }
}

/// Tab-separated writer; tabs and line breaks inside fields become spaces.
pub struct Tsv {
    inner: BufWriter<File>,
    path: PathBuf,
}

impl Tsv {
    pub fn create(path: PathBuf, header: &[&str]) -> anyhow::Result<Tsv> {
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut tsv = Tsv {
            inner: BufWriter::new(file),
            path,
        };
        tsv.row(header)?;
        Ok(tsv)
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> anyhow::Result<()> {
        let line: Vec<String> = fields
            .iter()
            .map(|f| f.as_ref().replace(['\t', '\n', '\r'], " "))
            .collect();
        writeln!(self.inner, "{}", line.join("\t")).with_context(|| format!("writing {}", self.path.display()))
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.inner.flush().with_context(|| format!("writing {}", self.path.display()))
    }
}
