use std::path::Path;

use anyhow::Context;
use chemanchor::datagen::{parse_source, plan, write_dataset, GenerateConfig, Generator, Mix};
use chemanchor::fgdict::Dictionary;
use rayon::prelude::*;
use serde_json::json;

use super::read_text;
use crate::manifest::{ItemStatus, Run, Tsv};
use crate::{Common, Outcome};

pub fn run(common: &Common, source: &Path, count: usize, molecules: usize, mix: Mix) -> anyhow::Result<Outcome> {
    let sources = parse_source(&read_text(source)?).with_context(|| format!("parsing {}", source.display()))?;
    let config = GenerateConfig {
        count,
        molecules: Some(molecules),
        mix,
        seed: common.seed,
    };
    let jobs = plan(&sources, &config)?;
    let mut run = Run::start("generate", common, &[source], serde_json::to_value(&config)?)?;
    let dict = Dictionary::shipped();
    let generator = Generator::new(&sources, &dict);
    let results: Vec<_> = jobs.par_iter().map(|j| generator.run(j)).collect();
    let summary = write_dataset(&common.out, &sources, &config, &jobs, &results)?;
    for name in ["images", "annotations.json", "manifest.json"] {
        run.output(name);
    }
    let mut tsv = Tsv::create(run.output("generate.tsv"), &["index", "kind", "archetype", "status", "file", "error"])?;
    for (job, result) in jobs.iter().zip(&results) {
        let kind = format!("{:?}", job.kind).to_lowercase();
        let archetype = job.archetype.map(|a| a.name().to_string()).unwrap_or_default();
        let label = format!("{kind} {}", job.index);
        match result {
            Ok(sample) => {
                tsv.row(&[&job.index.to_string(), &kind, &archetype, "ok", &sample.image.file_name, ""])?;
                run.item(ItemStatus::new(job.index as usize, label, None));
            }
            Err(e) => {
                let e = e.to_string();
                tsv.row(&[&job.index.to_string(), &kind, &archetype, "failed", "", &e])?;
                run.item(ItemStatus::new(job.index as usize, label, Some(e)));
            }
        }
    }
    tsv.finish()?;
    run.set_config("summary", json!(summary));
    let counts: Vec<String> = summary.archetype_counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("wrote {} of {} samples ({})", summary.written, summary.planned, counts.join(", "));
    run.finish()
}
