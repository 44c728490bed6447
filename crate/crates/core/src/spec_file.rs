//! JSON kernel spec documents: `{"group": ..., "kernel": ..., "meta": ...}`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupModel;
use crate::kernels::KernelSpec;
use crate::schoenberg::BivariateSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpecFile {
    pub group: GroupModel,
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

/// A spatial kernel on a product of two spheres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateSpecFile {
    pub kernel: BivariateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

/// Every `kind` tag used by the spec documents.
const KNOWN_KINDS: &[&str] = &[
    // groups
    "real_line", "integers", "cyclic", "real_vector",
    // positive definite functions on groups
    "exp_decay", "gaussian", "cosine", "triangular", "constant", "character_mix",
    // kernels
    "tensor_product", "sum", "product", "scale", "expansion", "raw_form", "separable",
    // spatial factors and raw forms
    "ultraspherical", "monomial", "scaled_shift", "raw_spatial", "powered_exponential", "gneiting_exponential",
    // coefficients
    "parametric", "sampled",
];

/// Path of the first node whose `kind` tag is not recognized. Tagged enums
/// buffer their content, so the deserializer alone loses nested paths.
fn unknown_kind(value: &serde_json::Value, path: &str) -> Option<(String, String)> {
    match value {
        serde_json::Value::Object(map) => {
            if let Some(kind) = map.get("kind") {
                match kind.as_str() {
                    Some(k) if KNOWN_KINDS.contains(&k) => {}
                    _ => return Some((path.to_string(), format!("unknown kind {kind}"))),
                }
            }
            map.iter().find_map(|(key, v)| unknown_kind(v, &format!("{path}.{key}")))
        }
        serde_json::Value::Array(items) => {
            items.iter().enumerate().find_map(|(i, v)| unknown_kind(v, &format!("{path}[{i}]")))
        }
        _ => None,
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::invalid("$", e.to_string()))?;
    if let Some((path, message)) = unknown_kind(&value, "$") {
        return Err(Error::invalid(&path, message));
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { format!("$.{path}") };
        Error::invalid(&path, e.into_inner().to_string())
    })
}

impl KernelSpecFile {
    /// Parses and validates a spec document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: Self = parse_json(text)?;
        file.group.validate("$.group")?;
        file.kernel.validate(&file.group, "$.kernel")?;
        Ok(file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

impl BivariateSpecFile {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: Self = parse_json(text)?;
        file.kernel.validate("$.kernel")?;
        Ok(file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}
