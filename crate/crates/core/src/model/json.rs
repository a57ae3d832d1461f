//! Articulation JSON files.
//!
//! ```json
//! {
//!   "points": [[x, y, z], ...],
//!   "base_indices": [0, 1, ...],
//!   "parts": [{"id": 0, "label": 3, "point_indices": [...],
//!              "joint": {"type": "revolute", "axis": [0, 0, 1], "pivot": [0.3, -0.25, 0],
//!                        "center": 0.5, "span": 0.5}}],
//!   "tree": {"0": -1}
//! }
//! ```
//!
//! Tree keys are part ids; values are parent ids with `-1` for the root (integers or
//! numeric strings are both accepted on load). Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::{
    validate_model, ArticulatedModel, JointLimits, JointSpec, JointType, KinematicTree, Parent,
    PartId, PartSpec, Vec3,
};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    points: Vec<[f64; 3]>,
    base_indices: Vec<usize>,
    parts: Vec<PartFile>,
    #[serde(serialize_with = "serialize_tree")]
    tree: BTreeMap<String, ParentRef>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartFile {
    id: i64,
    label: usize,
    point_indices: Vec<usize>,
    joint: JointFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    #[serde(rename = "type")]
    jtype: JointType,
    axis: [f64; 3],
    pivot: [f64; 3],
    center: f64,
    span: f64,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum ParentRef {
    Int(i64),
    Str(String),
}

impl ParentRef {
    fn resolve(&self) -> Result<i64> {
        match self {
            ParentRef::Int(i) => Ok(*i),
            ParentRef::Str(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("tree: parent `{s}` is not an integer id"))),
        }
    }
}

// Emit tree entries in numeric rather than lexicographic key order.
fn serialize_tree<S: Serializer>(
    tree: &BTreeMap<String, ParentRef>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut entries: Vec<(i64, &String, &ParentRef)> = tree
        .iter()
        .map(|(k, v)| (k.parse().unwrap_or(i64::MAX), k, v))
        .collect();
    entries.sort_by_key(|e| e.0);
    let mut map = s.serialize_map(Some(entries.len()))?;
    for (_, k, v) in entries {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

fn to_vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn from_vec3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Parses a model without validating it.
pub fn model_from_json(text: &str) -> Result<ArticulatedModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut tree = KinematicTree::new();
    for (k, v) in &file.tree {
        let child: i64 = k
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("tree: key `{k}` is not an integer part id")))?;
        tree.parent
            .insert(PartId(child), Parent::from_raw(v.resolve()?));
    }
    let parts = file
        .parts
        .into_iter()
        .map(|p| PartSpec {
            id: PartId(p.id),
            label: p.label,
            point_indices: p.point_indices,
            joint: JointSpec {
                jtype: p.joint.jtype,
                axis: to_vec3(p.joint.axis),
                pivot: to_vec3(p.joint.pivot),
                limits: JointLimits::new(p.joint.center, p.joint.span),
            },
        })
        .collect();
    Ok(ArticulatedModel {
        points: file.points.into_iter().map(to_vec3).collect(),
        parts,
        tree,
        base_indices: file.base_indices,
    })
}

pub fn model_to_json(model: &ArticulatedModel) -> String {
    let file = ModelFile {
        points: model.points.iter().map(from_vec3).collect(),
        base_indices: model.base_indices.clone(),
        parts: model
            .parts
            .iter()
            .map(|p| PartFile {
                id: p.id.0,
                label: p.label,
                point_indices: p.point_indices.clone(),
                joint: JointFile {
                    jtype: p.joint.jtype,
                    axis: from_vec3(&p.joint.axis),
                    pivot: from_vec3(&p.joint.pivot),
                    center: p.joint.limits.center,
                    span: p.joint.limits.span,
                },
            })
            .collect(),
        tree: model
            .tree
            .parent
            .iter()
            .map(|(c, p)| (c.0.to_string(), ParentRef::Int(p.to_raw())))
            .collect(),
    };
    // Plain data with string keys; serialization cannot fail.
    serde_json::to_string_pretty(&file).expect("model serializes to JSON")
}

/// Loads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<ArticulatedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model = model_from_json(&text)
        .map_err(|e| Error::Parse(format!("{}: {}", path.display(), strip_prefix(e))))?;
    let violations = validate_model(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(Error::Invalid(violations))
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Parse(msg) => msg,
        other => other.to_string(),
    }
}

pub fn save_model(model: &ArticulatedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model) + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CABINET: &str = r#"{
      "points": [[0,0,0],[0.1,0,0],[0.2,0,0]],
      "base_indices": [0],
      "parts": [
        {"id": 0, "label": 1, "point_indices": [1],
         "joint": {"type": "revolute", "axis": [0,0,1], "pivot": [0,0,0], "center": 0.5, "span": 0.5}},
        {"id": 1, "label": 2, "point_indices": [2],
         "joint": {"type": "fixed", "axis": [0,0,0], "pivot": [0,0,0], "center": 0, "span": 0}}
      ],
      "tree": {"0": -1, "1": "0"}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let m = model_from_json(CABINET).unwrap();
        assert!(validate_model(&m).is_empty());
        assert_eq!(m.tree.parent_of(PartId(1)), Some(Parent::Part(PartId(0))));
        assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn missing_field_is_named() {
        let truncated = CABINET.replace(r#", "span": 0.5"#, "");
        let err = model_from_json(&truncated).unwrap_err().to_string();
        assert!(err.contains("missing field `span`"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn truncated_document_is_a_parse_error() {
        let err = model_from_json(&CABINET[..CABINET.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn unknown_keys_rejected() {
        let extra = CABINET.replacen(r#""base_indices""#, r#""colour": 1, "base_indices""#, 1);
        let err = model_from_json(&extra).unwrap_err().to_string();
        assert!(err.contains("unknown field `colour`"), "{err}");
    }

    #[test]
    fn tree_keys_serialize_numerically() {
        let mut m = model_from_json(CABINET).unwrap();
        m.tree.parent.insert(PartId(10), Parent::Root);
        m.tree.parent.insert(PartId(2), Parent::Root);
        let text = model_to_json(&m);
        let i2 = text.find(r#""2": -1"#).unwrap();
        let i10 = text.find(r#""10": -1"#).unwrap();
        assert!(i2 < i10);
    }
}
