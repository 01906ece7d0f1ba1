use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EhhNetwork, IntermediateNode, Normalizer, SourceNode};
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

/// On-disk JSON layout of a network. Floats are written with the shortest
/// representation that parses back to the same bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub n: usize,
    pub normalization: Normalizer,
    #[serde(default)]
    pub q_offsets: Vec<Vec<f64>>,
    pub sources: Vec<SourceNode>,
    pub intermediates: Vec<[usize; 2]>,
    pub weights: Vec<f64>,
}

impl From<&EhhNetwork> for ModelDocument {
    fn from(net: &EhhNetwork) -> Self {
        Self {
            version: MODEL_VERSION,
            n: net.input_dim(),
            normalization: net.normalizer.clone(),
            q_offsets: net.offset_grid.clone(),
            sources: net.sources.clone(),
            intermediates: net.intermediates.iter().map(|c| c.parents).collect(),
            weights: net.weights.clone(),
        }
    }
}

impl TryFrom<ModelDocument> for EhhNetwork {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        if doc.version != MODEL_VERSION {
            return Err(Error::UnsupportedVersion(doc.version));
        }
        if doc.normalization.min.len() != doc.n || doc.normalization.max.len() != doc.n {
            return Err(Error::DimensionMismatch {
                expected: doc.n,
                found: doc.normalization.min.len().min(doc.normalization.max.len()),
            });
        }
        let inter = doc
            .intermediates
            .into_iter()
            .map(|[a, b]| IntermediateNode::new(a, b))
            .collect();
        Ok(EhhNetwork::new(doc.normalization, doc.sources, inter, doc.weights)?.with_offset_grid(doc.q_offsets))
    }
}

impl Serialize for EhhNetwork {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelDocument::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for EhhNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ModelDocument::deserialize(d)?;
        EhhNetwork::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl EhhNetwork {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
