use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::pubchem::{names_from_raw, PubChemClient};
use super::{ActivationError, EntityNames, Source};
use crate::molgraph::{canonical_smiles, parse_smiles, sanitize};

/// Set to anything but `""` or `"0"` to force offline resolution.
pub const OFFLINE_ENV: &str = "CHEMANCHOR_OFFLINE";

const SHIPPED_FIXTURES: &str = include_str!("../../data/pubchem_fixtures.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Offline,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Ok(Mode::Live),
            "offline" => Ok(Mode::Offline),
            other => Err(format!("unknown mode {other:?} (expected live or offline)")),
        }
    }
}

/// One cached or fixture response, stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    /// Canonical SMILES the entry is keyed by.
    pub smiles: String,
    pub raw: Value,
    pub iupac: String,
    pub common: Vec<String>,
    /// Seconds since the Unix epoch.
    pub fetched_at: u64,
    /// Number of compound records the service returned.
    pub records: usize,
}

impl CacheEntry {
    fn from_raw(smiles: &str, raw: Value) -> Option<CacheEntry> {
        let (iupac, synonyms, records) = names_from_raw(&raw)?;
        let names = EntityNames::from_record(&iupac, &synonyms, Source::Live);
        let fetched_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Some(CacheEntry {
            smiles: smiles.to_string(),
            raw,
            iupac: names.iupac,
            common: names.common,
            fetched_at,
            records,
        })
    }

    pub fn names(&self, source: Source) -> EntityNames {
        EntityNames {
            iupac: self.iupac.clone(),
            common: self.common.clone(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolverConfig {
    pub mode: Mode,
    pub cache_dir: Option<PathBuf>,
    /// Consult the shipped fixture responses after the cache.
    pub use_fixtures: bool,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            mode: Mode::Offline,
            cache_dir: None,
            use_fixtures: true,
        }
    }
}

/// Resolves SMILES to entity names.
///
/// Lookups go memory, then the on-disk cache, then (live mode) the service,
/// then the shipped fixtures; anything left is unresolved. Every SMILES is
/// canonicalized first, so equal molecules share one answer. Cache entries
/// never expire.
pub struct Resolver {
    mode: Mode,
    cache_dir: Option<PathBuf>,
    fixtures: HashMap<String, CacheEntry>,
    memory: RwLock<HashMap<String, EntityNames>>,
    writer: Mutex<()>,
    client: Option<PubChemClient>,
    network_failures: AtomicUsize,
    cache_errors: AtomicUsize,
    lookups: AtomicUsize,
}

fn canonical(smiles: &str) -> Result<String, ActivationError> {
    let err = |reason: String| ActivationError::Smiles {
        smiles: smiles.to_string(),
        reason,
    };
    let g = parse_smiles(smiles).map_err(|e| err(e.to_string()))?;
    let g = sanitize(&g).map_err(|d| err(d.to_string()))?;
    canonical_smiles(&g).map_err(|e| err(e.to_string()))
}

/// Parses a fixture file: a JSON array of cache entries. Keys are
/// re-canonicalized so fixtures may be written with any SMILES spelling.
pub fn load_fixtures(text: &str) -> Result<HashMap<String, CacheEntry>, ActivationError> {
    let entries: Vec<CacheEntry> = serde_json::from_str(text).map_err(|e| ActivationError::Fixture(e.to_string()))?;
    entries
        .into_iter()
        .map(|mut e| {
            e.smiles = canonical(&e.smiles)?;
            Ok((e.smiles.clone(), e))
        })
        .collect()
}

fn offline_forced() -> bool {
    std::env::var(OFFLINE_ENV).is_ok_and(|v| !v.is_empty() && v != "0")
}

impl Resolver {
    pub fn new(config: ResolverConfig) -> Result<Resolver, ActivationError> {
        let mode = if offline_forced() { Mode::Offline } else { config.mode };
        let fixtures = if config.use_fixtures {
            load_fixtures(SHIPPED_FIXTURES)?
        } else {
            HashMap::new()
        };
        if let Some(dir) = &config.cache_dir {
            std::fs::create_dir_all(dir).map_err(|e| ActivationError::Cache {
                path: dir.display().to_string(),
                reason: e.to_string(),
            })?;
        }
        Ok(Resolver {
            mode,
            cache_dir: config.cache_dir,
            fixtures,
            memory: RwLock::new(HashMap::new()),
            writer: Mutex::new(()),
            client: (mode == Mode::Live).then(PubChemClient::default),
            network_failures: AtomicUsize::new(0),
            cache_errors: AtomicUsize::new(0),
            lookups: AtomicUsize::new(0),
        })
    }

    /// Offline resolver over the shipped fixtures only.
    pub fn offline() -> Resolver {
        Resolver::new(ResolverConfig::default()).expect("shipped fixtures parse")
    }

    /// Replaces the live client, e.g. to point at another endpoint.
    pub fn with_client(mut self, client: PubChemClient) -> Resolver {
        if self.mode == Mode::Live {
            self.client = Some(client);
        }
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Live requests that failed at the transport level so far.
    pub fn network_failures(&self) -> usize {
        self.network_failures.load(Ordering::Relaxed)
    }

    /// Fetched responses that could not be written to the cache.
    pub fn cache_errors(&self) -> usize {
        self.cache_errors.load(Ordering::Relaxed)
    }

    /// Resolutions that missed the in-memory table.
    pub fn lookups(&self) -> usize {
        self.lookups.load(Ordering::Relaxed)
    }

    fn cache_path(dir: &Path, canonical: &str) -> PathBuf {
        let digest = Sha256::digest(canonical.as_bytes());
        dir.join(format!("{}.json", hex::encode(digest)))
    }

    fn read_cache(&self, canonical: &str) -> Option<CacheEntry> {
        let path = Resolver::cache_path(self.cache_dir.as_ref()?, canonical);
        let text = std::fs::read_to_string(path).ok()?;
        serde_json::from_str::<CacheEntry>(&text).ok().filter(|e| e.smiles == canonical)
    }

    fn write_cache(&self, entry: &CacheEntry) -> Result<(), ActivationError> {
        let Some(dir) = &self.cache_dir else {
            return Ok(());
        };
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let path = Resolver::cache_path(dir, &entry.smiles);
        let tmp = path.with_extension("tmp");
        let io = |e: std::io::Error| ActivationError::Cache {
            path: path.display().to_string(),
            reason: e.to_string(),
        };
        let text = serde_json::to_string_pretty(entry).expect("cache entry serializes");
        std::fs::write(&tmp, text).map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)
    }

    /// Stores a fetched response in the cache as if it came from the service.
    pub fn insert_raw(&self, smiles: &str, raw: Value) -> Result<Option<EntityNames>, ActivationError> {
        let key = canonical(smiles)?;
        let Some(entry) = CacheEntry::from_raw(&key, raw) else {
            return Ok(None);
        };
        self.write_cache(&entry)?;
        Ok(Some(entry.names(Source::Cache)))
    }

    /// Resolves one SMILES. Only an unparseable SMILES is an error; network
    /// trouble and unknown compounds give unresolved names.
    pub fn resolve(&self, smiles: &str) -> Result<EntityNames, ActivationError> {
        let key = canonical(smiles)?;
        if let Some(hit) = self.memory.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(hit.clone());
        }
        self.lookups.fetch_add(1, Ordering::Relaxed);
        let names = self.lookup(&key);
        let mut memory = self.memory.write().unwrap_or_else(|e| e.into_inner());
        Ok(memory.entry(key).or_insert(names).clone())
    }

    fn lookup(&self, key: &str) -> EntityNames {
        if let Some(entry) = self.read_cache(key) {
            return entry.names(Source::Cache);
        }
        if let Some(client) = &self.client {
            match client.fetch(key) {
                Ok(Some(raw)) => {
                    if let Some(entry) = CacheEntry::from_raw(key, raw) {
                        if self.write_cache(&entry).is_err() {
                            self.cache_errors.fetch_add(1, Ordering::Relaxed);
                        }
                        return entry.names(Source::Live);
                    }
                }
                Ok(None) => {}
                Err(_) => {
                    self.network_failures.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        if let Some(entry) = self.fixtures.get(key) {
            return entry.names(Source::Fixture);
        }
        EntityNames::unresolved()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_consistent() {
        let fixtures = load_fixtures(SHIPPED_FIXTURES).unwrap();
        assert!(fixtures.len() >= 3);
        for entry in fixtures.values() {
            let (iupac, synonyms, _) = names_from_raw(&entry.raw).unwrap();
            let names = EntityNames::from_record(&iupac, &synonyms, Source::Fixture);
            assert_eq!(entry.names(Source::Fixture), names, "{}", entry.smiles);
        }
    }

    #[test]
    fn offline_examples() {
        let r = Resolver::offline();
        let b = r.resolve("OB(O)c1ccccc1").unwrap();
        assert_eq!(b.iupac, "phenylboronic acid");
        assert!(b.common.contains(&"Phenylboronic acid".to_string()));
        assert_eq!(b.source, Source::Fixture);
        let e = r.resolve("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1").unwrap();
        assert_eq!(e.iupac, "methyl 4-(4-bromophenyl)benzoate");
        let u = r.resolve("CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC").unwrap();
        assert_eq!(u, EntityNames::unresolved());
        assert!(r.resolve("C1CC").is_err());
    }

    #[test]
    fn equal_molecules_share_names() {
        let r = Resolver::offline();
        let a = r.resolve("OB(O)c1ccccc1").unwrap();
        let b = r.resolve("c1ccc(cc1)B(O)O").unwrap();
        assert_eq!(a, b);
        assert_eq!(r.lookups(), 1);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let config = ResolverConfig {
            mode: Mode::Offline,
            cache_dir: Some(dir.path().to_path_buf()),
            use_fixtures: false,
        };
        let raw = serde_json::json!({
            "properties": {"PropertyTable": {"Properties": [{"CID": 702, "IUPACName": "ethanol"}]}},
            "synonyms": {"InformationList": {"Information": [{"CID": 702, "Synonym": ["ethanol", "Ethyl alcohol"]}]}}
        });
        let first = Resolver::new(config.clone()).unwrap();
        assert_eq!(first.resolve("OCC").unwrap().source, Source::Unresolved);
        first.insert_raw("OCC", raw).unwrap();
        let second = Resolver::new(config).unwrap();
        let names = second.resolve("CCO").unwrap();
        assert_eq!(names.source, Source::Cache);
        assert_eq!(names.iupac, "ethanol");
        assert_eq!(names.common, ["Ethyl alcohol", "ethanol"]);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
