use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::coco::{published_categories, CocoDataset, CocoImage};
use crate::fgdict::Dictionary;
use crate::molgraph::{parse_smiles, sanitize, MolecularGraph};
use crate::reaction::{split_conditions, ReactionRecord, SolventLexicon};

use super::molecule::gen_molecule_sample;
use super::reaction::{laid_out, reaction_sample_with};
use super::svg::render_svg;
use super::{sample_seed, Archetype, DatagenError, DatasetSample, Mix, SampleKind, Style};

/// Parsed generator input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceSet {
    pub reactions: Vec<ReactionRecord>,
    /// Molecule lines followed by reaction components not listed yet, in
    /// first-seen order without repeats.
    pub molecules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceEntry {
    Reaction(ReactionRecord),
    Molecule(String),
}

fn parse_line(line: &str, number: usize, lexicon: &SolventLexicon) -> Result<SourceEntry, DatagenError> {
    let (head, conditions) = match line.split_once('\t') {
        Some((h, c)) => (h.trim(), c.trim()),
        None => (line.trim(), ""),
    };
    if !head.contains('>') {
        let smiles = head.split_whitespace().next().unwrap_or_default();
        return Ok(SourceEntry::Molecule(smiles.to_string()));
    }
    let parts: Vec<&str> = head.split('>').collect();
    let [reactants, agents, products] = parts[..] else {
        return Err(DatagenError::Source {
            line: number,
            reason: "reaction needs the form reactants>agents>products".into(),
        });
    };
    let split = |s: &str| s.split('.').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect::<Vec<_>>();
    let (mut reagents, solvents) = split_conditions(conditions, lexicon);
    let mut agents = split(agents);
    agents.append(&mut reagents);
    let record = ReactionRecord {
        reaction_id: 1,
        reactants: split(reactants),
        products: split(products),
        reagents: agents,
        solvents,
        unrecognized: Vec::new(),
    };
    if record.reactants.is_empty() || record.products.is_empty() {
        return Err(DatagenError::Source {
            line: number,
            reason: "reaction needs at least one reactant and one product".into(),
        });
    }
    Ok(SourceEntry::Reaction(record))
}

/// Parses one source line; `None` for blank lines and comments.
pub fn parse_entry(line: &str) -> Result<Option<SourceEntry>, DatagenError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    parse_line(line, 1, &SolventLexicon::default()).map(Some)
}

/// Reads generator input, one item per line: a SMILES for a molecule, or
/// `reactants>agents>products` with an optional tab-separated condition
/// text such as `Pd(OAc)2, PPh3 / Toluene, H2O`. Blank lines and `#`
/// comments are skipped.
pub fn parse_source(text: &str) -> Result<SourceSet, DatagenError> {
    let lexicon = SolventLexicon::default();
    let mut set = SourceSet::default();
    let mut seen = HashSet::new();
    let mut components = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_line(line, k + 1, &lexicon)? {
            SourceEntry::Molecule(m) => {
                if seen.insert(m.clone()) {
                    set.molecules.push(m);
                }
            }
            SourceEntry::Reaction(r) => {
                components.extend(r.reactants.iter().chain(&r.products).cloned());
                set.reactions.push(r);
            }
        }
    }
    for m in components {
        if seen.insert(m.clone()) {
            set.molecules.push(m);
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    /// Reaction-layout samples.
    pub count: usize,
    /// Molecule samples; `None` gives one per source molecule.
    pub molecules: Option<usize>,
    pub mix: Mix,
    pub seed: u64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            count: 0,
            molecules: None,
            mix: Mix::default(),
            seed: 0,
        }
    }
}

/// One sample to generate. `index` is global across the batch and fixes the
/// seed and file name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub index: u64,
    pub kind: SampleKind,
    pub source: usize,
    pub archetype: Option<Archetype>,
    pub seed: u64,
}

impl Job {
    pub fn file_name(&self) -> String {
        match self.kind {
            SampleKind::Reaction => format!("images/reaction_{:06}.svg", self.index),
            SampleKind::Molecule => format!("images/molecule_{:06}.svg", self.index),
        }
    }
}

/// Reaction jobs first (cycling through the source reactions), then molecule
/// jobs.
pub fn plan(sources: &SourceSet, config: &GenerateConfig) -> Result<Vec<Job>, DatagenError> {
    if config.count > 0 && sources.reactions.is_empty() {
        return Err(DatagenError::Source {
            line: 0,
            reason: "reaction samples requested but the source has no reactions".into(),
        });
    }
    let molecules = config.molecules.unwrap_or(sources.molecules.len());
    if molecules > 0 && sources.molecules.is_empty() {
        return Err(DatagenError::Source {
            line: 0,
            reason: "molecule samples requested but the source has no molecules".into(),
        });
    }
    let mut jobs = Vec::with_capacity(config.count + molecules);
    for i in 0..config.count {
        let index = i as u64;
        jobs.push(Job {
            index,
            kind: SampleKind::Reaction,
            source: i % sources.reactions.len(),
            archetype: Some(config.mix.archetype(config.seed, index)),
            seed: sample_seed(config.seed, index),
        });
    }
    for j in 0..molecules {
        let index = (config.count + j) as u64;
        jobs.push(Job {
            index,
            kind: SampleKind::Molecule,
            source: j % sources.molecules.len(),
            archetype: None,
            seed: sample_seed(config.seed, index),
        });
    }
    Ok(jobs)
}

/// Runs jobs against one source set, sharing 2D layouts between samples.
/// Safe to call from several threads.
pub struct Generator<'a> {
    sources: &'a SourceSet,
    dictionary: &'a Dictionary,
    layouts: Mutex<HashMap<String, Result<MolecularGraph, String>>>,
}

impl<'a> Generator<'a> {
    pub fn new(sources: &'a SourceSet, dictionary: &'a Dictionary) -> Generator<'a> {
        Generator {
            sources,
            dictionary,
            layouts: Mutex::new(HashMap::new()),
        }
    }

    fn layout(&self, smiles: &str) -> Result<MolecularGraph, DatagenError> {
        if let Some(hit) = self.layouts.lock().unwrap_or_else(|e| e.into_inner()).get(smiles) {
            return hit.clone().map_err(|reason| DatagenError::Structure {
                smiles: smiles.to_string(),
                reason,
            });
        }
        let result = laid_out(smiles);
        let stored = result.as_ref().map(Clone::clone).map_err(|e| e.to_string());
        self.layouts
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(smiles.to_string(), stored);
        result
    }

    pub fn run(&self, job: &Job) -> Result<DatasetSample, DatagenError> {
        let mut sample = match job.kind {
            SampleKind::Reaction => reaction_sample_with(
                &self.sources.reactions[job.source],
                job.archetype.unwrap_or(Archetype::Linear),
                job.seed,
                &mut |s| self.layout(s),
            )?,
            SampleKind::Molecule => {
                let smiles = &self.sources.molecules[job.source];
                let err = |reason: String| DatagenError::Structure {
                    smiles: smiles.clone(),
                    reason,
                };
                let g = parse_smiles(smiles).map_err(|e| err(e.to_string()))?;
                let g = sanitize(&g).map_err(|d| err(d.to_string()))?;
                gen_molecule_sample(&g, self.dictionary, job.seed)?
            }
        };
        sample.image.file_name = job.file_name();
        Ok(sample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub index: u64,
    pub kind: SampleKind,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub archetype: Option<Archetype>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<Style>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub planned: usize,
    pub written: usize,
    pub skipped: usize,
    pub reaction_samples: usize,
    pub molecule_samples: usize,
    pub archetype_counts: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a GenerateConfig,
    summary: &'a DatasetSummary,
    samples: &'a [ManifestRecord],
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> DatagenError + '_ {
    move |e| DatagenError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Writes `images/*.svg`, `annotations.json` (COCO style, pixel coordinates)
/// and `manifest.json` under `dir`. `results` must line up with `jobs`;
/// failed jobs appear in the manifest as skipped with their reason.
pub fn write_dataset(
    dir: &Path,
    sources: &SourceSet,
    config: &GenerateConfig,
    jobs: &[Job],
    results: &[Result<DatasetSample, DatagenError>],
) -> Result<DatasetSummary, DatagenError> {
    let images = dir.join("images");
    std::fs::create_dir_all(&images).map_err(io_err(&images))?;
    let mut coco = CocoDataset {
        images: Vec::new(),
        categories: published_categories(),
        annotations: Vec::new(),
        relations: Vec::new(),
    };
    let mut summary = DatasetSummary {
        planned: jobs.len(),
        ..DatasetSummary::default()
    };
    for a in Archetype::ALL {
        summary.archetype_counts.insert(a.name().to_string(), 0);
    }
    let mut records = Vec::with_capacity(jobs.len());
    for (job, result) in jobs.iter().zip(results) {
        let source = match job.kind {
            SampleKind::Reaction => super::reaction::reaction_smiles(&sources.reactions[job.source]),
            SampleKind::Molecule => sources.molecules[job.source].clone(),
        };
        let mut record = ManifestRecord {
            index: job.index,
            kind: job.kind,
            source,
            archetype: job.archetype,
            seed: job.seed,
            style: None,
            status: "ok".into(),
            file_name: None,
            annotations: None,
            reason: None,
        };
        match result {
            Ok(sample) => {
                let path = dir.join(&sample.image.file_name);
                std::fs::write(&path, render_svg(sample)).map_err(io_err(&path))?;
                coco.images.push(CocoImage {
                    id: job.index,
                    width: sample.image.width,
                    height: sample.image.height,
                    file_name: Some(sample.image.file_name.clone()),
                });
                for a in &sample.annotations {
                    let id = coco.annotations.len() as u64;
                    coco.annotations.push(a.to_coco(id, job.index));
                }
                record.style = Some(sample.provenance.style);
                record.file_name = Some(sample.image.file_name.clone());
                record.annotations = Some(sample.annotations.len());
                summary.written += 1;
                match job.kind {
                    SampleKind::Reaction => {
                        summary.reaction_samples += 1;
                        if let Some(a) = job.archetype {
                            *summary.archetype_counts.entry(a.name().to_string()).or_default() += 1;
                        }
                    }
                    SampleKind::Molecule => summary.molecule_samples += 1,
                }
            }
            Err(e) => {
                record.status = "skipped".into();
                record.reason = Some(e.to_string());
                summary.skipped += 1;
            }
        }
        records.push(record);
    }
    let ann_path = dir.join("annotations.json");
    let text = serde_json::to_string(&coco).expect("annotations serialize");
    std::fs::write(&ann_path, text + "\n").map_err(io_err(&ann_path))?;
    let manifest_path = dir.join("manifest.json");
    let manifest = Manifest {
        config,
        summary: &summary,
        samples: &records,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, text + "\n").map_err(io_err(&manifest_path))?;
    Ok(summary)
}
