//! Morgan circular fingerprints, Tanimoto similarity and the strict
//! exact-match recognition score.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::rings::ring_atoms;
use crate::molgraph::{parse_smiles, sanitize, BondOrder, MolecularGraph};

pub const DEFAULT_BITS: usize = 2048;
pub const DEFAULT_RADIUS: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FingerprintError {
    #[error("fingerprint lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("bit count {0} must be a power of two >= 64")]
    BadLength(usize),
    #[error("graph must be sanitized first")]
    NotSanitized,
    #[error("invalid hex fingerprint: {0}")]
    Hex(String),
    #[error("ground-truth SMILES '{smiles}' is invalid: {reason}")]
    InvalidGroundTruth { smiles: String, reason: String },
}

/// Fixed-length binary fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    n_bits: usize,
    pub radius: u32,
    /// Set when the source molecule had no atoms.
    pub empty_input: bool,
}

impl Fingerprint {
    pub fn zeros(n_bits: usize, radius: u32) -> Fingerprint {
        Fingerprint {
            words: vec![0; n_bits.div_ceil(64)],
            n_bits,
            radius,
            empty_input: false,
        }
    }

    /// Builds a fingerprint from explicit bit positions.
    pub fn from_bits(n_bits: usize, bits: &[usize]) -> Fingerprint {
        let mut fp = Fingerprint::zeros(n_bits, 0);
        for &b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.n_bits, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.n_bits).filter(|&b| self.get(b)).collect()
    }

    /// Lowercase hex, least significant word first, little-endian bytes.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        hex::encode(bytes)
    }

    pub fn from_hex(text: &str, radius: u32) -> Result<Fingerprint, FingerprintError> {
        let bytes = hex::decode(text).map_err(|e| FingerprintError::Hex(e.to_string()))?;
        if bytes.len() % 8 != 0 {
            return Err(FingerprintError::Hex("length is not a multiple of 16 digits".into()));
        }
        let words: Vec<u64> = bytes
            .chunks(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Fingerprint {
            n_bits: words.len() * 64,
            words,
            radius,
            empty_input: false,
        })
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// 64-bit finalizer (splitmix64).
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_seq(values: impl IntoIterator<Item = u64>) -> u64 {
    values
        .into_iter()
        .fold(0x51_7c_c1_b7_27_22_0a_95, |acc, v| mix(acc ^ mix(v)))
}

fn bond_code(order: BondOrder) -> u64 {
    match order.unstereo() {
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
        _ => 1,
    }
}

/// Morgan fingerprint of a sanitized graph.
///
/// Atom invariants are (atomic number, degree, formal charge, hydrogen count,
/// aromatic flag, ring membership). Each iteration hashes an atom's identifier
/// with the sorted (bond order, neighbor identifier) pairs; environments that
/// cover an identical bond set are emitted once.
pub fn morgan_fingerprint(
    graph: &MolecularGraph,
    radius: u32,
    n_bits: usize,
) -> Result<Fingerprint, FingerprintError> {
    if n_bits < 64 || !n_bits.is_power_of_two() {
        return Err(FingerprintError::BadLength(n_bits));
    }
    if !graph.is_sanitized() {
        return Err(FingerprintError::NotSanitized);
    }
    let mut fp = Fingerprint::zeros(n_bits, radius);
    let n = graph.atom_count();
    if n == 0 {
        fp.empty_input = true;
        return Ok(fp);
    }
    let adj = graph.adjacency();
    let in_ring = ring_atoms(graph);
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = graph.atom(i);
            hash_seq([
                u64::from(a.element.atomic_number()),
                adj[i].len() as u64,
                (i64::from(a.formal_charge) as u64),
                u64::from(a.total_h()),
                u64::from(a.is_aromatic),
                u64::from(in_ring[i]),
            ])
        })
        .collect();
    let words = graph.bond_count().div_ceil(64).max(1);
    let mut coverage: Vec<Vec<u64>> = vec![vec![0; words]; n];
    let mut seen: Vec<Vec<u64>> = Vec::new();
    for &id in &ids {
        fp.set((id % n_bits as u64) as usize);
    }
    for r in 1..=radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_cov = Vec::with_capacity(n);
        let mut round: Vec<(Vec<u64>, u64)> = Vec::new();
        for i in 0..n {
            let mut env: Vec<(u64, u64)> = adj[i]
                .iter()
                .map(|&(nb, b)| (bond_code(graph.bonds()[b].order), ids[nb]))
                .collect();
            env.sort_unstable();
            let id = hash_seq(
                [u64::from(r), ids[i]]
                    .into_iter()
                    .chain(env.iter().flat_map(|&(b, x)| [b, x])),
            );
            let mut cov = coverage[i].clone();
            for &(nb, b) in &adj[i] {
                cov[b / 64] |= 1 << (b % 64);
                for (c, o) in cov.iter_mut().zip(&coverage[nb]) {
                    *c |= o;
                }
            }
            next_ids.push(id);
            next_cov.push(cov.clone());
            if !adj[i].is_empty() {
                round.push((cov, id));
            }
        }
        // Among environments covering the same bonds keep the smallest id;
        // environments already emitted at a lower radius are skipped.
        round.sort();
        let mut k = 0;
        while k < round.len() {
            let cov = &round[k].0;
            if !seen.contains(cov) {
                fp.set((round[k].1 % n_bits as u64) as usize);
                seen.push(cov.clone());
            }
            while k < round.len() && round[k].0 == *cov {
                k += 1;
            }
        }
        ids = next_ids;
        coverage = next_cov;
    }
    Ok(fp)
}

/// |a ∧ b| / |a ∨ b|; two empty fingerprints are identical by convention.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.n_bits != b.n_bits {
        return Err(FingerprintError::LengthMismatch(a.n_bits, b.n_bits));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    Ok(if union == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(union)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreReason {
    Match,
    FingerprintMismatch,
    PredictionUnparseable,
    PredictionInvalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Score {
    /// Either 0 or 100.
    pub score: u8,
    pub tanimoto: Option<f64>,
    pub reason: ScoreReason,
}

fn fingerprint_of(smiles: &str) -> Result<Fingerprint, String> {
    let graph = parse_smiles(smiles).map_err(|e| e.to_string())?;
    let graph = sanitize(&graph).map_err(|d| d.to_string())?;
    morgan_fingerprint(&graph, DEFAULT_RADIUS, DEFAULT_BITS).map_err(|e| e.to_string())
}

/// Strict exact-match score: 100 when the fingerprints have Tanimoto 1.0,
/// otherwise 0. An invalid ground truth is a configuration error.
pub fn l1_score(pred: &str, gt: &str) -> Result<L1Score, FingerprintError> {
    let gt_fp = fingerprint_of(gt).map_err(|reason| FingerprintError::InvalidGroundTruth {
        smiles: gt.to_string(),
        reason,
    })?;
    let pred_graph = match parse_smiles(pred) {
        Ok(g) => g,
        Err(_) => {
            return Ok(L1Score {
                score: 0,
                tanimoto: None,
                reason: ScoreReason::PredictionUnparseable,
            })
        }
    };
    let Ok(pred_graph) = sanitize(&pred_graph) else {
        return Ok(L1Score {
            score: 0,
            tanimoto: None,
            reason: ScoreReason::PredictionInvalid,
        });
    };
    let pred_fp = morgan_fingerprint(&pred_graph, DEFAULT_RADIUS, DEFAULT_BITS)?;
    let t = tanimoto(&pred_fp, &gt_fp)?;
    let exact = t == 1.0;
    Ok(L1Score {
        score: if exact { 100 } else { 0 },
        tanimoto: Some(t),
        reason: if exact {
            ScoreReason::Match
        } else {
            ScoreReason::FingerprintMismatch
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(s: &str) -> Fingerprint {
        let g = sanitize(&parse_smiles(s).unwrap()).unwrap();
        morgan_fingerprint(&g, 2, 2048).unwrap()
    }

    #[test]
    fn methane_sets_one_bit() {
        for r in 0..4 {
            let g = sanitize(&parse_smiles("C").unwrap()).unwrap();
            assert_eq!(morgan_fingerprint(&g, r, 2048).unwrap().count_ones(), 1);
        }
    }

    #[test]
    fn benzene_orders_agree() {
        let a = fp("c1ccccc1");
        let g = sanitize(&parse_smiles("c1ccccc1").unwrap()).unwrap().permuted(&[3, 0, 5, 1, 4, 2]);
        assert_eq!(morgan_fingerprint(&g, 2, 2048).unwrap(), a);
        assert_eq!(fp("C1=CC=CC=C1"), a);
    }

    #[test]
    fn ethanol_differs_from_propane() {
        assert!(tanimoto(&fp("CCO"), &fp("CCC")).unwrap() < 1.0);
    }

    #[test]
    fn tanimoto_conventions() {
        let a = Fingerprint::from_bits(64, &[1, 2, 3]);
        let b = Fingerprint::from_bits(64, &[2, 3, 4]);
        let c = Fingerprint::from_bits(64, &[10]);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let e = Fingerprint::zeros(64, 2);
        assert_eq!(tanimoto(&e, &e).unwrap(), 1.0);
        assert_eq!(
            tanimoto(&a, &Fingerprint::zeros(128, 2)),
            Err(FingerprintError::LengthMismatch(64, 128))
        );
    }

    #[test]
    fn empty_graph_is_flagged() {
        let g = sanitize(&MolecularGraph::new()).unwrap();
        let f = morgan_fingerprint(&g, 2, 2048).unwrap();
        assert!(f.empty_input && f.is_empty());
    }

    #[test]
    fn bad_lengths_rejected() {
        let g = sanitize(&parse_smiles("C").unwrap()).unwrap();
        assert_eq!(morgan_fingerprint(&g, 2, 100), Err(FingerprintError::BadLength(100)));
        assert_eq!(morgan_fingerprint(&g, 2, 32), Err(FingerprintError::BadLength(32)));
    }

    #[test]
    fn hex_round_trip() {
        let a = fp("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1");
        assert_eq!(a.to_hex().len(), 512);
        assert_eq!(Fingerprint::from_hex(&a.to_hex(), 2).unwrap(), a);
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_score("CCO", "CCO").unwrap().score, 100);
        assert_eq!(l1_score("c1ccccc1", "C1=CC=CC=C1").unwrap().score, 100);
        assert_eq!(l1_score("CCO", "CCC").unwrap().score, 0);
        let bad = l1_score("C1CC", "CCO").unwrap();
        assert_eq!((bad.score, bad.reason), (0, ScoreReason::PredictionUnparseable));
        let invalid = l1_score("C(=C)(=C)(=C)=C", "CCO").unwrap();
        assert_eq!(invalid.reason, ScoreReason::PredictionInvalid);
        assert!(matches!(
            l1_score("CCO", "C1CC"),
            Err(FingerprintError::InvalidGroundTruth { .. })
        ));
    }
}
