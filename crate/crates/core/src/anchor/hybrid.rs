use std::collections::HashMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::fgdict::Dictionary;
use crate::geometry::{BBox, Point};
use crate::molgraph::BondOrder;

use super::{parse_atom_label, AnchorSet, GroupAnchors, HybridAtom, HybridBond, HybridGraph, SuperNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HybridError {
    #[error("invalid hybrid document: {0}")]
    Json(String),
    #[error("field '{field}' of {node}: {message}")]
    Field {
        node: String,
        field: &'static str,
        message: String,
    },
    #[error("unrecognized node id '{0}'")]
    BadId(String),
    #[error("node id '{0}' appears twice")]
    DuplicateId(String),
    #[error("bond references unknown node '{0}'")]
    UnknownId(String),
    #[error("bond connects '{0}' to itself")]
    SelfBond(String),
    #[error("label '{0}' is not in the group dictionary")]
    ClosedSet(String),
    #[error("anchors given for unknown super-node '{0}'")]
    UnknownAnchorGroup(String),
}

#[derive(Serialize)]
struct WireAnchors<'a> {
    id: &'a str,
    anchors: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct WireDocument<'a> {
    supernodes: &'a [SuperNode],
    atoms: &'a [HybridAtom],
    bonds: &'a [HybridBond],
    anchors: Vec<WireAnchors<'a>>,
}

/// Serializes nodes (super-nodes then atoms), bonds and anchors as JSON.
pub fn serialize_hybrid(hybrid: &HybridGraph, anchors: &AnchorSet) -> String {
    let doc = WireDocument {
        supernodes: &hybrid.supernodes,
        atoms: &hybrid.atoms,
        bonds: &hybrid.bonds,
        anchors: anchors
            .groups
            .iter()
            .map(|g| WireAnchors {
                id: &g.id,
                anchors: g.anchors.iter().map(|p| [p.x, p.y]).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("hybrid serializes");
    s.push('\n');
    s
}

/// Maps `fg_3`, `FG_3`, `fg3` to `FG_3`.
fn normalize_group_id(raw: &str) -> Option<String> {
    let lower = raw.to_ascii_lowercase();
    let digits = lower.strip_prefix("fg_").or_else(|| lower.strip_prefix("fg"))?;
    (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())).then(|| format!("FG_{digits}"))
}

/// Maps `atom_3`, `A_3`, `a3` to `A_3`.
fn normalize_atom_id(raw: &str) -> Option<String> {
    let lower = raw.to_ascii_lowercase();
    let digits = ["atom_", "atom", "a_", "a"]
        .iter()
        .find_map(|p| lower.strip_prefix(p))?;
    (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())).then(|| format!("A_{digits}"))
}

fn field_err(node: &str, field: &'static str, message: impl Into<String>) -> HybridError {
    HybridError::Field {
        node: node.to_string(),
        field,
        message: message.into(),
    }
}

fn get_str<'a>(obj: &'a Value, node: &str, names: &[&'static str]) -> Result<&'a str, HybridError> {
    for name in names {
        if let Some(v) = obj.get(name) {
            return v.as_str().ok_or_else(|| field_err(node, name, "expected a string"));
        }
    }
    Err(field_err(node, names[0], "missing"))
}

fn get_id(obj: &Value, what: &str) -> Result<String, HybridError> {
    match obj.get("id") {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        _ => Err(field_err(what, "id", "missing")),
    }
}

fn get_box(obj: &Value, node: &str) -> Result<BBox, HybridError> {
    let arr = obj
        .get("bbox")
        .and_then(Value::as_array)
        .ok_or_else(|| field_err(node, "bbox", "expected [x1, y1, x2, y2]"))?;
    let nums: Vec<f64> = arr.iter().filter_map(Value::as_f64).collect();
    if nums.len() != 4 || arr.len() != 4 {
        return Err(field_err(node, "bbox", "expected [x1, y1, x2, y2]"));
    }
    let b = BBox::new_unchecked(nums[0], nums[1], nums[2], nums[3]);
    b.validate().map_err(|e| field_err(node, "bbox", e.to_string()))?;
    Ok(b)
}

fn get_points(v: &Value, node: &str, field: &'static str) -> Result<Vec<Point>, HybridError> {
    let arr = v.as_array().ok_or_else(|| field_err(node, field, "expected a list of [x, y]"))?;
    arr.iter()
        .map(|p| match p.as_array().map(|xy| xy.iter().filter_map(Value::as_f64).collect::<Vec<_>>()) {
            Some(xy) if xy.len() == 2 => Ok(Point::new(xy[0], xy[1])),
            _ => Err(field_err(node, field, "expected a list of [x, y]")),
        })
        .collect()
}

fn list<'a>(doc: &'a Value, key: &'static str) -> Result<&'a [Value], HybridError> {
    match doc.get(key) {
        None | Some(Value::Null) => Ok(&[]),
        Some(Value::Array(a)) => Ok(a),
        Some(_) => Err(HybridError::Json(format!("'{key}' must be a list"))),
    }
}

/// Parses a hybrid document in this crate's serialization or the
/// recognizer's `supernodes`/`atoms`/`bonds` shape.
///
/// Recognizer ids (`fg_1`, `atom_1`) become `FG_1`, `A_1`. Anchors may come
/// from a top-level `anchors` list of `{id, anchors}` objects or from an
/// `anchors` field on each super-node.
pub fn parse_hybrid(document: &str, dictionary: &Dictionary) -> Result<(HybridGraph, AnchorSet), HybridError> {
    let doc: Value = serde_json::from_str(document).map_err(|e| HybridError::Json(e.to_string()))?;
    if !doc.is_object() {
        return Err(HybridError::Json("expected a JSON object".into()));
    }
    let mut ids: HashMap<String, String> = HashMap::new();
    let mut register = |raw: &str, normalized: String| -> Result<String, HybridError> {
        if ids.values().any(|v| *v == normalized) || ids.contains_key(raw) {
            return Err(HybridError::DuplicateId(raw.to_string()));
        }
        ids.insert(raw.to_string(), normalized.clone());
        Ok(normalized)
    };

    let mut hybrid = HybridGraph::default();
    let mut anchors = AnchorSet::default();
    for node in list(&doc, "supernodes")? {
        let raw = get_id(node, "supernode")?;
        let id = register(&raw, normalize_group_id(&raw).ok_or_else(|| HybridError::BadId(raw.clone()))?)?;
        let label = get_str(node, &raw, &["label", "class"])?.to_string();
        if !dictionary.contains(&label) {
            return Err(HybridError::ClosedSet(label));
        }
        let bbox = get_box(node, &raw)?;
        let elements = match node.get("elements") {
            None => Vec::new(),
            Some(v) => v
                .as_array()
                .and_then(|a| a.iter().map(|e| e.as_str().map(str::to_string)).collect::<Option<Vec<_>>>())
                .ok_or_else(|| field_err(&raw, "elements", "expected a list of element symbols"))?,
        };
        let heteroatoms = match node.get("heteroatoms") {
            None => Vec::new(),
            Some(v) => get_points(v, &raw, "heteroatoms")?.iter().map(|p| [p.x, p.y]).collect(),
        };
        if let Some(v) = node.get("anchors") {
            anchors.groups.push(GroupAnchors {
                id: id.clone(),
                anchors: get_points(v, &raw, "anchors")?,
            });
        }
        hybrid.supernodes.push(SuperNode {
            id,
            label,
            bbox,
            elements,
            heteroatoms,
        });
    }
    for node in list(&doc, "atoms")? {
        let raw = get_id(node, "atom")?;
        let id = register(&raw, normalize_atom_id(&raw).ok_or_else(|| HybridError::BadId(raw.clone()))?)?;
        let symbol = get_str(node, &raw, &["symbol", "label"])?.to_string();
        if parse_atom_label(&symbol).is_none() {
            return Err(field_err(&raw, "symbol", format!("unrecognized atom symbol '{symbol}'")));
        }
        let bbox = get_box(node, &raw)?;
        hybrid.atoms.push(HybridAtom { id, symbol, bbox });
    }
    let resolve = |raw: &str| -> Result<String, HybridError> {
        if let Some(id) = ids.get(raw) {
            return Ok(id.clone());
        }
        let normalized = normalize_group_id(raw).or_else(|| normalize_atom_id(raw));
        match normalized {
            Some(n) if ids.values().any(|v| *v == n) => Ok(n),
            _ => Err(HybridError::UnknownId(raw.to_string())),
        }
    };
    for (k, bond) in list(&doc, "bonds")?.iter().enumerate() {
        let name = format!("bond {}", k + 1);
        let source = resolve(get_str(bond, &name, &["source", "src"])?)?;
        let target = resolve(get_str(bond, &name, &["target", "dst"])?)?;
        if source == target {
            return Err(HybridError::SelfBond(source));
        }
        let label = get_str(bond, &name, &["type", "order"])?;
        let order = BondOrder::parse(label).ok_or_else(|| field_err(&name, "type", format!("unknown bond type '{label}'")))?;
        hybrid.bonds.push(HybridBond { source, target, order });
    }
    for entry in list(&doc, "anchors")? {
        let raw = get_id(entry, "anchor entry")?;
        let id = resolve(&raw).map_err(|_| HybridError::UnknownAnchorGroup(raw.clone()))?;
        if hybrid.supernode(&id).is_none() {
            return Err(HybridError::UnknownAnchorGroup(raw));
        }
        let points = get_points(entry.get("anchors").unwrap_or(&Value::Null), &raw, "anchors")?;
        match anchors.groups.iter_mut().find(|g| g.id == id) {
            Some(g) => g.anchors.extend(points),
            None => anchors.groups.push(GroupAnchors { id, anchors: points }),
        }
    }
    Ok((hybrid, anchors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_has_three_empty_sections() {
        let s = serialize_hybrid(&HybridGraph::default(), &AnchorSet::default());
        let v: Value = serde_json::from_str(&s).unwrap();
        for key in ["supernodes", "atoms", "bonds", "anchors"] {
            assert_eq!(v[key], Value::Array(vec![]), "{key}");
        }
        let (h, a) = parse_hybrid(&s, &Dictionary::shipped()).unwrap();
        assert_eq!(h, HybridGraph::default());
        assert_eq!(a, AnchorSet::default());
    }

    #[test]
    fn recognizer_ids_are_normalized() {
        let doc = r#"{"supernodes":[{"id":"fg_1","label":"Alcohol/Hydroxyl","bbox":[10,10,40,40]}],
            "atoms":[{"id":"atom_1","symbol":"C","bbox":[50,10,80,40]}],
            "bonds":[{"source":"fg_1","target":"atom_1","type":"SINGLE"}]}"#;
        let (h, a) = parse_hybrid(doc, &Dictionary::shipped()).unwrap();
        assert_eq!(h.supernodes[0].id, "FG_1");
        assert_eq!(h.atoms[0].id, "A_1");
        assert_eq!(
            h.bonds[0],
            HybridBond {
                source: "FG_1".into(),
                target: "A_1".into(),
                order: BondOrder::Single
            }
        );
        assert_eq!(a.total(), 0);
    }

    #[test]
    fn missing_bond_endpoint_is_named() {
        let doc = r#"{"atoms":[{"id":"atom_1","symbol":"C","bbox":[50,10,80,40]}],
            "bonds":[{"source":"atom_1","target":"atom_9","type":"SINGLE"}]}"#;
        let e = parse_hybrid(doc, &Dictionary::shipped()).unwrap_err();
        assert_eq!(e, HybridError::UnknownId("atom_9".into()));
        assert!(e.to_string().contains("atom_9"));
    }

    #[test]
    fn closed_set_enforced() {
        let doc = r#"{"supernodes":[{"id":"fg_1","label":"Unicorn","bbox":[10,10,40,40]}]}"#;
        assert_eq!(
            parse_hybrid(doc, &Dictionary::shipped()),
            Err(HybridError::ClosedSet("Unicorn".into()))
        );
    }

    #[test]
    fn inline_anchors_and_round_trip() {
        let doc = r#"{"supernodes":[{"id":"fg_2","label":"Aryl","bbox":[100,100,300,300],"anchors":[[120.5,200],[280,200]]}],
            "atoms":[{"id":"atom_1","symbol":"C","bbox":[10,180,60,220]},{"id":"atom_2","symbol":"O","bbox":[320,180,380,220]}],
            "bonds":[{"source":"atom_1","target":"fg_2","type":"SINGLE"},{"source":"fg_2","target":"atom_2","type":"SINGLE"}]}"#;
        let (h, a) = parse_hybrid(doc, &Dictionary::shipped()).unwrap();
        assert_eq!(a.get("FG_2"), &[Point::new(120.5, 200.0), Point::new(280.0, 200.0)]);
        let again = parse_hybrid(&serialize_hybrid(&h, &a), &Dictionary::shipped()).unwrap();
        assert_eq!(again, (h, a));
    }

    #[test]
    fn bad_boxes_and_ids() {
        let d = Dictionary::shipped();
        let degenerate = r#"{"atoms":[{"id":"atom_1","symbol":"C","bbox":[50,10,50,40]}]}"#;
        assert!(matches!(parse_hybrid(degenerate, &d), Err(HybridError::Field { field: "bbox", .. })));
        let dup = r#"{"atoms":[{"id":"atom_1","symbol":"C","bbox":[1,1,2,2]},{"id":"A_1","symbol":"C","bbox":[1,1,2,2]}]}"#;
        assert!(matches!(parse_hybrid(dup, &d), Err(HybridError::DuplicateId(_))));
        let bad = r#"{"atoms":[{"id":"x","symbol":"C","bbox":[1,1,2,2]}]}"#;
        assert_eq!(parse_hybrid(bad, &d), Err(HybridError::BadId("x".into())));
        assert!(matches!(parse_hybrid("[1]", &d), Err(HybridError::Json(_))));
    }
}
