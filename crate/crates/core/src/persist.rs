//! JSON model documents.
//!
//! A single sphere cover is stored as
//!
//! ```json
//! {"scheme": "rsc", "alpha": 1, "attributes": [...], "classes": [...],
//!  "attribute_subset": [...], "normalization": {"min": [...], "max": [...]},
//!  "spheres": [{"label": "A", "center": [...], "radius": 0.5,
//!               "member_count": 3, "border_index": 7}]}
//! ```
//!
//! with an unbounded radius written as `"inf"`. Ensembles wrap one such
//! document per member together with `scheme`, `L`, `alpha`, `kappa` and
//! `master_seed`. The constant majority predictor stores its label only.
//! Training indices inside each sphere are not kept.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::MinMax;
use crate::ensemble::{EnsembleModel, Scheme};
use crate::error::{Error, Result};
use crate::evaluation::{ModelKind, TrainedModel};
use crate::rsc::{Sphere, SphereCoverModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Radius {
    Finite(f64),
    Text(String),
}

impl Radius {
    fn from_f64(r: f64) -> Self {
        if r.is_infinite() {
            Radius::Text("inf".into())
        } else {
            Radius::Finite(r)
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            Radius::Finite(r) if *r > 0.0 => Ok(*r),
            Radius::Text(s) if s == "inf" => Ok(f64::INFINITY),
            other => Err(bad(format!("invalid radius {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereDoc {
    label: String,
    center: Vec<f64>,
    radius: Radius,
    member_count: usize,
    border_index: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverDoc {
    scheme: String,
    alpha: usize,
    attributes: Vec<String>,
    classes: Vec<String>,
    attribute_subset: Vec<usize>,
    normalization: Option<MinMax>,
    spheres: Vec<SphereDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleDoc {
    scheme: Scheme,
    #[serde(rename = "L")]
    l: usize,
    alpha: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<usize>,
    master_seed: u64,
    attributes: Vec<String>,
    classes: Vec<String>,
    members: Vec<CoverDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MajorityDoc {
    scheme: String,
    attributes: Vec<String>,
    classes: Vec<String>,
    label: String,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::SchemaMismatch(format!("model document: {}", msg.into()))
}

fn cover_doc(m: &SphereCoverModel, attributes: &[String]) -> CoverDoc {
    CoverDoc {
        scheme: "rsc".into(),
        alpha: m.alpha,
        attributes: attributes.to_vec(),
        classes: m.classes.clone(),
        attribute_subset: m.attribute_subset.clone(),
        normalization: m.normalization.clone(),
        spheres: m
            .spheres
            .iter()
            .map(|s| SphereDoc {
                label: m.classes[s.label].clone(),
                center: s.center.clone(),
                radius: Radius::from_f64(s.radius),
                member_count: s.member_count,
                border_index: s.border,
            })
            .collect(),
    }
}

fn check_classes(classes: &[String]) -> Result<()> {
    if classes.is_empty() || classes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("classes must be nonempty, sorted and distinct"));
    }
    Ok(())
}

fn class_index(classes: &[String], label: &str) -> Result<usize> {
    classes
        .binary_search_by(|c| c.as_str().cmp(label))
        .map_err(|_| bad(format!("label '{label}' is not a listed class")))
}

fn cover_from_doc(doc: CoverDoc) -> Result<SphereCoverModel> {
    if doc.scheme != "rsc" {
        return Err(bad(format!("expected scheme 'rsc', found '{}'", doc.scheme)));
    }
    check_classes(&doc.classes)?;
    let input_dim = doc.attributes.len();
    if doc.attribute_subset.iter().any(|&a| a >= input_dim) {
        return Err(bad("attribute_subset refers past the attribute list"));
    }
    if let Some(n) = &doc.normalization {
        if n.min.len() != input_dim || n.max.len() != input_dim {
            return Err(bad("normalization does not match the attribute list"));
        }
    }
    let dim = doc.attribute_subset.len();
    let spheres = doc
        .spheres
        .into_iter()
        .map(|s| {
            if s.center.len() != dim {
                return Err(bad(format!(
                    "sphere centre has {} values, expected {dim}",
                    s.center.len()
                )));
            }
            Ok(Sphere {
                label: class_index(&doc.classes, &s.label)?,
                center: s.center,
                radius: s.radius.to_f64()?,
                members: Vec::new(),
                member_count: s.member_count,
                border: s.border_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SphereCoverModel {
        alpha: doc.alpha,
        classes: doc.classes,
        input_dim,
        attribute_subset: doc.attribute_subset,
        normalization: doc.normalization,
        spheres,
    })
}

/// Serialises a fitted model as pretty JSON with a trailing newline.
pub fn to_json(model: &TrainedModel) -> Result<String> {
    let mut s = match &model.kind {
        ModelKind::Single(m) => serde_json::to_string_pretty(&cover_doc(m, &model.attributes))?,
        ModelKind::Ensemble(e) => serde_json::to_string_pretty(&EnsembleDoc {
            scheme: e.scheme,
            l: e.members.len(),
            alpha: e.alpha,
            kappa: e.kappa,
            master_seed: e.master_seed,
            attributes: model.attributes.clone(),
            classes: e.classes.clone(),
            members: e.members.iter().map(|m| cover_doc(m, &model.attributes)).collect(),
        })?,
        ModelKind::Majority { label } => serde_json::to_string_pretty(&MajorityDoc {
            scheme: "majority".into(),
            attributes: model.attributes.clone(),
            classes: model.classes.clone(),
            label: model.classes[*label].clone(),
        })?,
    };
    s.push('\n');
    Ok(s)
}

/// Parses any model document written by [`to_json`].
pub fn from_json(text: &str) -> Result<TrainedModel> {
    let value: Value = serde_json::from_str(text)?;
    let scheme = value
        .get("scheme")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing 'scheme'"))?
        .to_string();
    match scheme.as_str() {
        "rsc" => {
            let doc: CoverDoc = serde_json::from_value(value)?;
            let attributes = doc.attributes.clone();
            let model = cover_from_doc(doc)?;
            Ok(TrainedModel {
                attributes,
                classes: model.classes.clone(),
                kind: ModelKind::Single(model),
            })
        }
        "majority" => {
            let doc: MajorityDoc = serde_json::from_value(value)?;
            check_classes(&doc.classes)?;
            let label = class_index(&doc.classes, &doc.label)?;
            Ok(TrainedModel {
                attributes: doc.attributes,
                classes: doc.classes,
                kind: ModelKind::Majority { label },
            })
        }
        _ => {
            let doc: EnsembleDoc = serde_json::from_value(value)?;
            check_classes(&doc.classes)?;
            if doc.l != doc.members.len() || doc.l == 0 {
                return Err(bad(format!("L = {} but {} members", doc.l, doc.members.len())));
            }
            if (doc.scheme == Scheme::Arsse) != doc.kappa.is_some() {
                return Err(bad("kappa must be given exactly for arsse"));
            }
            let members = doc
                .members
                .into_iter()
                .map(|m| {
                    if m.attributes != doc.attributes || m.classes != doc.classes {
                        return Err(bad("member schema differs from the ensemble"));
                    }
                    let model = cover_from_doc(m)?;
                    if model.spheres.is_empty() {
                        return Err(bad("member without spheres"));
                    }
                    Ok(model)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrainedModel {
                attributes: doc.attributes,
                classes: doc.classes.clone(),
                kind: ModelKind::Ensemble(EnsembleModel {
                    scheme: doc.scheme,
                    alpha: doc.alpha,
                    kappa: doc.kappa,
                    master_seed: doc.master_seed,
                    members,
                    classes: doc.classes,
                }),
            })
        }
    }
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
