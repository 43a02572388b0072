use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcm::{ActivationVector, Concept, Fcm, FcmConfig, LinguisticScale};

/// One causal edge, weighted either numerically or by a linguistic term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// JSON layout of a cognitive map. Edges are applied on top of `weights`
/// (or of a zero matrix when `weights` is absent). `scale` extends and
/// overrides the default linguistic scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub concepts: Vec<Concept>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scale: BTreeMap<String, f64>,
    #[serde(default)]
    pub config: FcmConfig,
}

impl MapFile {
    pub fn scale(&self) -> Result<LinguisticScale> {
        let mut scale = LinguisticScale::default();
        for (term, &value) in &self.scale {
            scale.insert(term.clone(), value)?;
        }
        Ok(scale)
    }

    pub fn build(&self) -> Result<Fcm> {
        let n = self.concepts.len();
        let scale = self.scale()?;
        let mut weights = match &self.weights {
            Some(w) => w.clone(),
            None => vec![vec![0.0; n]; n],
        };
        if weights.len() != n || weights.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!(
                "weights must be a {n}x{n} matrix for {n} concepts, got {} rows of lengths {:?}",
                weights.len(),
                weights.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(Error::Validation(format!(
                    "edge {} -> {} references a concept outside 0..{n}",
                    e.from, e.to
                )));
            }
            let w = match (&e.term, e.weight) {
                (Some(term), None) => scale.resolve(term)?,
                (None, Some(w)) => w,
                _ => {
                    return Err(Error::Validation(format!(
                        "edge {} -> {} needs exactly one of \"term\" or \"weight\"",
                        e.from, e.to
                    )))
                }
            };
            weights[e.from][e.to] = w;
        }
        Fcm::build(self.concepts.clone(), &weights, self.config)
    }
}

pub fn parse_map(json: &str) -> Result<Fcm> {
    let file: MapFile = serde_json::from_str(json)?;
    file.build()
}

pub fn fcm_file_load(path: impl AsRef<Path>) -> Result<Fcm> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_map(&text).map_err(|e| e.in_file(path))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitFile {
    values: Vec<f64>,
}

/// Parses `{"values": [...]}`.
pub fn parse_activation(json: &str) -> Result<ActivationVector> {
    let f: InitFile = serde_json::from_str(json)?;
    ActivationVector::new(f.values)
}

pub fn load_activation(path: impl AsRef<Path>) -> Result<ActivationVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_activation(&text).map_err(|e| e.in_file(path))
}
