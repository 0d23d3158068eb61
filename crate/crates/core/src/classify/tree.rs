//! CART decision tree with (optionally class-weighted) Gini impurity.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_samples, class_counts, ClassWeighting, LabeledSample, Label};
use crate::error::Result;

/// Gains closer than this are treated as ties.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub weighting: ClassWeighting,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 3,
            min_leaf: 5,
            weighting: ClassWeighting::Balanced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum Node {
    Leaf {
        label: Label,
        /// Weighted share of ptosis samples that reached the leaf.
        probability: f64,
        samples: usize,
    },
    /// `x[feature] <= value` goes left.
    Split {
        feature: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
    pub n_features: usize,
    pub config: TreeConfig,
}

impl DecisionTree {
    /// Returns the leaf label and its ptosis probability.
    pub fn predict(&self, x: &[f64]) -> (Label, f64) {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf {
                    label, probability, ..
                } => return (*label, *probability),
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *value { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// `(feature, value)` of the root split, if the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match &self.root {
            Node::Split { feature, value, .. } => Some((*feature, *value)),
            Node::Leaf { .. } => None,
        }
    }
}

/// Chosen split and its impurity decrease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub value: f64,
    pub gain: f64,
}

/// Weighted Gini impurity `1 - p^2 - q^2`.
fn gini(wp: f64, wn: f64) -> f64 {
    let total = wp + wn;
    if total <= 0.0 {
        return 0.0;
    }
    let (p, q) = (wp / total, wn / total);
    1.0 - p * p - q * q
}

fn class_weights(samples: &[LabeledSample], weighting: ClassWeighting) -> (f64, f64) {
    let (pos, neg) = class_counts(samples);
    match weighting {
        ClassWeighting::Uniform => (1.0, 1.0),
        ClassWeighting::Balanced if pos > 0 && neg > 0 => {
            let n = samples.len() as f64;
            (n / (2.0 * pos as f64), n / (2.0 * neg as f64))
        }
        ClassWeighting::Balanced => (1.0, 1.0),
    }
}

/// Best Gini split of `samples` over all features and midpoints, honouring
/// `min_leaf`. Ties prefer the lower feature index, then the smaller value.
pub fn best_split(samples: &[LabeledSample], config: &TreeConfig) -> Option<SplitChoice> {
    let dim = samples.first()?.features.len();
    let weights = class_weights(samples, config.weighting);
    let idx: Vec<usize> = (0..samples.len()).collect();
    best_split_in(samples, &idx, dim, weights, config.min_leaf.max(1))
}

fn best_split_in(
    samples: &[LabeledSample],
    idx: &[usize],
    dim: usize,
    (w_pos, w_neg): (f64, f64),
    min_leaf: usize,
) -> Option<SplitChoice> {
    let weight = |i: usize| {
        if samples[i].label.is_ptosis() {
            (w_pos, 0.0)
        } else {
            (0.0, w_neg)
        }
    };
    let (tp, tn) = idx.iter().fold((0.0, 0.0), |(a, b), &i| {
        let (p, n) = weight(i);
        (a + p, b + n)
    });
    let total = tp + tn;
    let parent = gini(tp, tn);

    let mut best: Option<SplitChoice> = None;
    let mut order = idx.to_vec();
    for feature in 0..dim {
        order.sort_by(|&a, &b| samples[a].features[feature].total_cmp(&samples[b].features[feature]));
        let (mut lp, mut ln) = (0.0, 0.0);
        for k in 0..order.len() - 1 {
            let (p, n) = weight(order[k]);
            lp += p;
            ln += n;
            let here = samples[order[k]].features[feature];
            let next = samples[order[k + 1]].features[feature];
            if here == next {
                continue;
            }
            let left_count = k + 1;
            if left_count < min_leaf || order.len() - left_count < min_leaf {
                continue;
            }
            let (rp, rn) = (tp - lp, tn - ln);
            let child = ((lp + ln) * gini(lp, ln) + (rp + rn) * gini(rp, rn)) / total;
            let gain = parent - child;
            if gain > GAIN_EPS && best.is_none_or(|b| gain > b.gain + GAIN_EPS) {
                best = Some(SplitChoice {
                    feature,
                    value: here + (next - here) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

/// Fits a CART tree. Data too small or single-class yields a single leaf.
pub fn fit_tree(samples: &[LabeledSample], config: &TreeConfig) -> Result<DecisionTree> {
    let dim = check_samples(samples)?;
    let weights = class_weights(samples, config.weighting);
    let idx: Vec<usize> = (0..samples.len()).collect();
    let root = grow(samples, &idx, dim, weights, config, 0);
    Ok(DecisionTree {
        root,
        n_features: dim,
        config: *config,
    })
}

fn grow(
    samples: &[LabeledSample],
    idx: &[usize],
    dim: usize,
    weights: (f64, f64),
    config: &TreeConfig,
    depth: usize,
) -> Node {
    let pos = idx.iter().filter(|&&i| samples[i].label.is_ptosis()).count();
    let neg = idx.len() - pos;
    let leaf = || {
        let (wp, wn) = (pos as f64 * weights.0, neg as f64 * weights.1);
        let probability = if wp + wn > 0.0 { wp / (wp + wn) } else { 0.0 };
        Node::Leaf {
            label: Label::from_bool(probability >= 0.5),
            probability,
            samples: idx.len(),
        }
    };
    let min_leaf = config.min_leaf.max(1);
    if depth >= config.max_depth || pos == 0 || neg == 0 || idx.len() < 2 * min_leaf {
        return leaf();
    }
    let Some(split) = best_split_in(samples, idx, dim, weights, min_leaf) else {
        return leaf();
    };
    let (left, right): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| samples[i].features[split.feature] <= split.value);
    Node::Split {
        feature: split.feature,
        value: split.value,
        left: Box::new(grow(samples, &left, dim, weights, config, depth + 1)),
        right: Box::new(grow(samples, &right, dim, weights, config, depth + 1)),
    }
}
