use std::sync::Mutex;
use std::thread::sleep;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::ActivationError;

pub const PUBCHEM_BASE: &str = "https://pubchem.ncbi.nlm.nih.gov/rest/pug";

/// Extracts (IUPAC name, synonyms, record count) from a stored response.
///
/// `raw` holds the property answer under `"properties"` and the synonym
/// answer under `"synonyms"`, both as returned by the service. Only the first
/// compound record is used; the synonym record with the same CID is preferred.
pub fn names_from_raw(raw: &Value) -> Option<(String, Vec<String>, usize)> {
    let props = raw.pointer("/properties/PropertyTable/Properties")?.as_array()?;
    let first = props.first()?;
    let iupac = first.get("IUPACName").and_then(Value::as_str).unwrap_or_default().to_string();
    let cid = first.get("CID").and_then(Value::as_u64);
    let infos = raw
        .pointer("/synonyms/InformationList/Information")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let info = infos
        .iter()
        .find(|i| cid.is_some() && i.get("CID").and_then(Value::as_u64) == cid)
        .or_else(|| infos.first());
    let synonyms = info
        .and_then(|i| i.get("Synonym"))
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
        .unwrap_or_default();
    Some((iupac, synonyms, props.len()))
}

/// Blocking client for the PubChem PUG REST interface.
///
/// Requests go through one lock, spaced at least `min_interval` apart
/// (5 per second by default); 429 and 503 answers are retried with
/// exponential backoff.
pub struct PubChemClient {
    agent: ureq::Agent,
    base: String,
    min_interval: Duration,
    max_retries: u32,
    last: Mutex<Option<Instant>>,
}

impl Default for PubChemClient {
    fn default() -> Self {
        PubChemClient::new(PUBCHEM_BASE)
    }
}

impl PubChemClient {
    pub fn new(base: &str) -> PubChemClient {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(20)))
            .http_status_as_error(false)
            .build()
            .into();
        PubChemClient {
            agent,
            base: base.trim_end_matches('/').to_string(),
            min_interval: Duration::from_millis(200),
            max_retries: 4,
            last: Mutex::new(None),
        }
    }

    /// Posts `smiles=<smiles>` to `<base>/compound/smiles/<path>`; `None`
    /// when the service knows no such compound.
    fn post(&self, path: &str, smiles: &str) -> Result<Option<Value>, ActivationError> {
        let url = format!("{}/compound/smiles/{path}", self.base);
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        let mut backoff = Duration::from_millis(500);
        for attempt in 0..=self.max_retries {
            if let Some(t) = *last {
                let since = t.elapsed();
                if since < self.min_interval {
                    sleep(self.min_interval - since);
                }
            }
            *last = Some(Instant::now());
            let mut resp = self
                .agent
                .post(&url)
                .send_form([("smiles", smiles)])
                .map_err(|e| ActivationError::Network(e.to_string()))?;
            let status = resp.status().as_u16();
            match status {
                200 => {
                    let body = resp
                        .body_mut()
                        .read_to_string()
                        .map_err(|e| ActivationError::Network(e.to_string()))?;
                    let value = serde_json::from_str(&body).map_err(|e| ActivationError::Network(e.to_string()))?;
                    return Ok(Some(value));
                }
                404 => return Ok(None),
                429 | 503 if attempt < self.max_retries => {
                    sleep(backoff);
                    backoff *= 2;
                }
                _ => return Err(ActivationError::Network(format!("{url}: HTTP {status}"))),
            }
        }
        Err(ActivationError::Network(format!("{url}: still throttled after retries")))
    }

    /// Fetches the IUPAC name and synonyms for one SMILES as a raw response
    /// object understood by [`names_from_raw`].
    pub fn fetch(&self, smiles: &str) -> Result<Option<Value>, ActivationError> {
        let Some(properties) = self.post("property/IUPACName/JSON", smiles)? else {
            return Ok(None);
        };
        let synonyms = self.post("synonyms/JSON", smiles)?.unwrap_or(Value::Null);
        Ok(Some(json!({ "properties": properties, "synonyms": synonyms })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_first_record() {
        let raw = json!({
            "properties": {"PropertyTable": {"Properties": [
                {"CID": 2, "IUPACName": "second"},
                {"CID": 1, "IUPACName": "first"}
            ]}},
            "synonyms": {"InformationList": {"Information": [
                {"CID": 1, "Synonym": ["one"]},
                {"CID": 2, "Synonym": ["two", "deux"]}
            ]}}
        });
        let (iupac, syn, n) = names_from_raw(&raw).unwrap();
        assert_eq!(iupac, "second");
        assert_eq!(syn, ["two", "deux"]);
        assert_eq!(n, 2);
        assert!(names_from_raw(&json!({})).is_none());
        let bare = json!({"properties": {"PropertyTable": {"Properties": [{"IUPACName": "x"}]}}, "synonyms": null});
        assert_eq!(names_from_raw(&bare).unwrap(), ("x".to_string(), vec![], 1));
    }
}
