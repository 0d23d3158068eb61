//! Versioned model files wrapping a fitted [`ClassifierModel`].

use std::path::Path;

use ptosis_core::classify::ClassifierModel;
use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};
use crate::fsio;

pub const MODEL_FORMAT: &str = "ptosis-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub model: ClassifierModel,
    pub training: TrainingInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    /// The `--model` choice that produced this file.
    pub method: String,
    pub data_sha256: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_validation: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

impl ModelFile {
    pub fn new(model: ClassifierModel, training: TrainingInfo) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model,
            training,
        }
    }

    pub fn parse(text: &str, origin: &str) -> ToolResult<Self> {
        let f: ModelFile = serde_json::from_str(text)
            .map_err(|e| ToolError::input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(ToolError::input(format!(
                "{origin}: expected {MODEL_FORMAT} version {MODEL_VERSION}, found {} version {}",
                f.format, f.version
            )));
        }
        check_shape(&f.model).map_err(|m| ToolError::input(format!("{origin}: {m}")))?;
        Ok(f)
    }

    pub fn load(path: &Path) -> ToolResult<Self> {
        Self::parse(&fsio::read_text(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialize");
        s.push('\n');
        s
    }
}

/// Internal consistency between a model's feature list and its parameters.
fn check_shape(model: &ClassifierModel) -> Result<(), String> {
    let n = model.features().len();
    let mut seen = model.features();
    seen.sort();
    seen.dedup();
    if seen.len() != n || n == 0 {
        return Err("model features must be non-empty and distinct".into());
    }
    match model {
        ClassifierModel::Threshold(_) => Ok(()),
        ClassifierModel::Tree { tree, .. } if tree.n_features != n => Err(format!(
            "tree expects {} features but lists {n}",
            tree.n_features
        )),
        ClassifierModel::Tree { tree, .. } => {
            let mut stack = vec![&tree.root];
            while let Some(node) = stack.pop() {
                if let ptosis_core::classify::Node::Split {
                    feature, left, right, ..
                } = node
                {
                    if *feature >= n {
                        return Err(format!("tree splits on feature {feature} of {n}"));
                    }
                    stack.push(left);
                    stack.push(right);
                }
            }
            Ok(())
        }
        ClassifierModel::Logistic { model, .. } => {
            let s = &model.standardization;
            if model.weights.len() != n || s.mean.len() != n || s.scale.len() != n {
                Err(format!("logistic parameters do not match its {n} features"))
            } else {
                Ok(())
            }
        }
    }
}
