//! Ptosis classifiers and the deep/clinical fusion logic.
//!
//! Feature vectors follow the fixed order `[p_deep, mrd1_mm, iris_ratio_pct]`
//! wherever a model uses all three; models trained on a subset record the
//! [`Feature`]s they consume.

mod fusion;
mod logistic;
mod threshold;
mod tree;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::clinical::ClinicalMeasurements;
use crate::error::{Error, Result};

pub use fusion::{
    fit_fusion_band, fuse, fuse_observation, DecisionPath, FusionOutcome, FusionPolicy,
    DEFAULT_T_HI, DEFAULT_T_LO,
};
pub use logistic::{
    fit_logistic, loss_and_gradient, sigmoid, LogisticConfig, LogisticFit, LogisticModel,
    Standardization,
};
pub use threshold::{fit_threshold, Direction, Objective, ThresholdClassifier, ThresholdFit};
pub use tree::{best_split, fit_tree, DecisionTree, Node, SplitChoice, TreeConfig};

/// Binary eye label; ptosis is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    NotPtosis,
    Ptosis,
}

impl Label {
    pub fn from_bool(ptosis: bool) -> Self {
        if ptosis {
            Label::Ptosis
        } else {
            Label::NotPtosis
        }
    }

    pub fn is_ptosis(self) -> bool {
        self == Label::Ptosis
    }

    /// 1 for ptosis, 0 otherwise.
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::NotPtosis),
            1 => Ok(Label::Ptosis),
            other => Err(Error::param(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

/// Named model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "p_deep")]
    PDeep,
    #[serde(rename = "mrd1_mm")]
    Mrd1Mm,
    #[serde(rename = "iris_ratio_pct")]
    IrisRatioPct,
}

impl Feature {
    /// All features in canonical order.
    pub const ALL: [Feature; 3] = [Feature::PDeep, Feature::Mrd1Mm, Feature::IrisRatioPct];
    /// The two clinical measurements.
    pub const CLINICAL: [Feature; 2] = [Feature::Mrd1Mm, Feature::IrisRatioPct];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PDeep => "p_deep",
            Feature::Mrd1Mm => "mrd1_mm",
            Feature::IrisRatioPct => "iris_ratio_pct",
        }
    }
}

/// Per-eye inputs available to a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub p_deep: Option<f64>,
    pub mrd1_mm: f64,
    pub iris_ratio_pct: f64,
}

impl Observation {
    pub fn from_measurements(m: &ClinicalMeasurements, p_deep: Option<f64>) -> Self {
        Self {
            p_deep,
            mrd1_mm: m.mrd1_mm,
            iris_ratio_pct: m.iris_ratio_pct,
        }
    }

    pub fn get(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::PDeep => self.p_deep,
            Feature::Mrd1Mm => Some(self.mrd1_mm),
            Feature::IrisRatioPct => Some(self.iris_ratio_pct),
        }
    }

    /// Values for `features`, or an error naming the first missing one.
    pub fn vector(&self, features: &[Feature]) -> Result<Vec<f64>> {
        features
            .iter()
            .map(|&f| {
                self.get(f)
                    .ok_or_else(|| Error::param(format!("observation lacks feature {}", f.name())))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }
}

pub(crate) fn check_samples(samples: &[LabeledSample]) -> Result<usize> {
    let Some(first) = samples.first() else {
        return Err(Error::DegenerateFit(String::from("no training samples")));
    };
    let dim = first.features.len();
    for (i, s) in samples.iter().enumerate() {
        if s.features.len() != dim {
            return Err(Error::param(format!(
                "sample {i} has {} features, expected {dim}",
                s.features.len()
            )));
        }
        if s.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!("sample {i} has a non-finite feature")));
        }
    }
    Ok(dim)
}

pub(crate) fn class_counts(samples: &[LabeledSample]) -> (usize, usize) {
    let pos = samples.iter().filter(|s| s.label.is_ptosis()).count();
    (pos, samples.len() - pos)
}

/// How classes are weighted while fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassWeighting {
    /// Every sample counts once.
    Uniform,
    /// Weights inverse to class frequency, so both classes carry equal mass.
    #[default]
    Balanced,
}

/// A label together with a score where larger means more likely ptosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

/// Any fitted per-eye model, tagged with the features it reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifierModel {
    Threshold(ThresholdClassifier),
    Tree {
        features: Vec<Feature>,
        tree: DecisionTree,
    },
    Logistic {
        features: Vec<Feature>,
        model: LogisticModel,
    },
}

impl ClassifierModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierModel::Threshold(_) => "threshold",
            ClassifierModel::Tree { .. } => "tree",
            ClassifierModel::Logistic { .. } => "logistic",
        }
    }

    pub fn features(&self) -> Vec<Feature> {
        match self {
            ClassifierModel::Threshold(t) => alloc::vec![t.feature],
            ClassifierModel::Tree { features, .. } | ClassifierModel::Logistic { features, .. } => {
                features.clone()
            }
        }
    }

    pub fn predict_vector(&self, x: &[f64]) -> Result<Prediction> {
        let expected = self.features().len();
        if x.len() != expected {
            return Err(Error::param(format!(
                "{} model expects {expected} features, got {}",
                self.kind(),
                x.len()
            )));
        }
        Ok(match self {
            ClassifierModel::Threshold(t) => Prediction {
                label: t.predict(x[0]),
                score: t.score(x[0]),
            },
            ClassifierModel::Tree { tree, .. } => {
                let (label, probability) = tree.predict(x);
                Prediction {
                    label,
                    score: probability,
                }
            }
            ClassifierModel::Logistic { model, .. } => {
                let p = model.predict_proba(x);
                Prediction {
                    label: Label::from_bool(p >= 0.5),
                    score: p,
                }
            }
        })
    }

    pub fn predict(&self, obs: &Observation) -> Result<Prediction> {
        self.predict_vector(&obs.vector(&self.features())?)
    }
}

/// Mean of per-model probabilities; ptosis iff the mean reaches 0.5.
pub fn ensemble_average(probs: &[f64]) -> Result<(f64, Label)> {
    if probs.is_empty() {
        return Err(Error::param("ensemble needs at least one probability"));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::param(format!("probability {p} outside [0, 1]")));
    }
    // sorted summation keeps the mean independent of input order
    let mut sorted = probs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / probs.len() as f64;
    Ok((mean, Label::from_bool(mean >= 0.5)))
}

/// Four-way face label built from the two per-eye predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceLabel {
    Both,
    LeftOnly,
    RightOnly,
    None,
}

impl FaceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceLabel::Both => "both",
            FaceLabel::LeftOnly => "left-only",
            FaceLabel::RightOnly => "right-only",
            FaceLabel::None => "none",
        }
    }
}

pub fn aggregate_face(left: Label, right: Label) -> FaceLabel {
    match (left, right) {
        (Label::Ptosis, Label::Ptosis) => FaceLabel::Both,
        (Label::Ptosis, Label::NotPtosis) => FaceLabel::LeftOnly,
        (Label::NotPtosis, Label::Ptosis) => FaceLabel::RightOnly,
        (Label::NotPtosis, Label::NotPtosis) => FaceLabel::None,
    }
}
