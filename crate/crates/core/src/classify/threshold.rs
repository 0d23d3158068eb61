use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_samples, class_counts, Feature, LabeledSample, Label};
use crate::error::{Error, Result};

/// Which side of the threshold is called ptosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `x < threshold` is ptosis.
    PtosisBelow,
    /// `x > threshold` is ptosis.
    PtosisAbove,
}

/// What the sweep maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Fraction of samples classified correctly.
    Accuracy,
    /// Mean of the per-class recalls, i.e. accuracy with inverse-frequency weights.
    #[default]
    BalancedAccuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub threshold: f64,
    pub direction: Direction,
    /// Objective value in [0, 1].
    pub score: f64,
}

impl ThresholdFit {
    pub fn predict(&self, x: f64) -> Label {
        predict(self.threshold, self.direction, x)
    }
}

/// Single-feature rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClassifier {
    pub feature: Feature,
    #[serde(with = "extended_f64")]
    pub threshold: f64,
    pub direction: Direction,
}

impl ThresholdClassifier {
    pub fn from_fit(feature: Feature, fit: &ThresholdFit) -> Self {
        Self {
            feature,
            threshold: fit.threshold,
            direction: fit.direction,
        }
    }

    pub fn predict(&self, x: f64) -> Label {
        predict(self.threshold, self.direction, x)
    }

    /// Larger means more ptosis-like.
    pub fn score(&self, x: f64) -> f64 {
        match self.direction {
            Direction::PtosisBelow => -x,
            Direction::PtosisAbove => x,
        }
    }
}

/// Writes infinite thresholds as the strings `"inf"` / `"-inf"`, since common
/// text formats have no literal for them.
mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(alloc::string::String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(other) => Err(de::Error::custom(alloc::format!(
                "expected a number, \"inf\" or \"-inf\", got {other:?}"
            ))),
        }
    }
}

fn predict(threshold: f64, direction: Direction, x: f64) -> Label {
    Label::from_bool(match direction {
        Direction::PtosisBelow => x < threshold,
        Direction::PtosisAbove => x > threshold,
    })
}

/// Exhaustive threshold sweep over one feature column.
///
/// Candidates are `-inf`, the midpoints between consecutive distinct values,
/// and `+inf`, each tried in both directions. The best objective wins; ties go
/// to the smaller threshold, then to [`Direction::PtosisBelow`].
pub fn fit_threshold(
    samples: &[LabeledSample],
    feature_index: usize,
    objective: Objective,
) -> Result<ThresholdFit> {
    let dim = check_samples(samples)?;
    if feature_index >= dim {
        return Err(Error::param(alloc::format!(
            "feature index {feature_index} out of range for {dim} features"
        )));
    }
    let (pos, neg) = class_counts(samples);
    if samples.len() < 2 || pos == 0 || neg == 0 {
        return Err(Error::DegenerateFit(alloc::format!(
            "threshold fit needs both classes, got {pos} ptosis and {neg} not-ptosis"
        )));
    }

    let mut column: Vec<(f64, bool)> = samples
        .iter()
        .map(|s| (s.features[feature_index], s.label.is_ptosis()))
        .collect();
    column.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (p, n) = (pos as u128, neg as u128);
    // objective numerator for a confusion matrix; exact integer comparison
    let numerator = |tp: u128, tn: u128| -> u128 {
        match objective {
            Objective::Accuracy => tp + tn,
            Objective::BalancedAccuracy => tp * n + tn * p,
        }
    };
    let denominator = match objective {
        Objective::Accuracy => p + n,
        Objective::BalancedAccuracy => 2 * p * n,
    };

    let mut best: Option<(u128, f64, Direction)> = None;
    let mut consider = |t: f64, pos_below: u128, neg_below: u128| {
        let below = numerator(pos_below, n - neg_below);
        let above = numerator(p - pos_below, neg_below);
        for (score, dir) in [(below, Direction::PtosisBelow), (above, Direction::PtosisAbove)] {
            if best.is_none_or(|(b, _, _)| score > b) {
                best = Some((score, t, dir));
            }
        }
    };

    consider(f64::NEG_INFINITY, 0, 0);
    let (mut pos_below, mut neg_below) = (0u128, 0u128);
    let mut i = 0;
    while i < column.len() {
        let v = column[i].0;
        while i < column.len() && column[i].0 == v {
            if column[i].1 {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            i += 1;
        }
        if i < column.len() {
            let next = column[i].0;
            consider(v + (next - v) / 2.0, pos_below, neg_below);
        }
    }
    consider(f64::INFINITY, p, n);

    let (score, threshold, direction) = best.expect("at least the sentinels were scored");
    Ok(ThresholdFit {
        threshold,
        direction,
        score: score as f64 / denominator as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn samples(values: &[f64], labels: &[u8]) -> Vec<LabeledSample> {
        values
            .iter()
            .zip(labels)
            .map(|(&v, &l)| LabeledSample::new(vec![v], Label::from_u8(l).unwrap()))
            .collect()
    }

    #[test]
    fn separable_mrd1_example() {
        let data = samples(&[1.0, 1.5, 3.0, 4.0], &[1, 1, 0, 0]);
        for objective in [Objective::Accuracy, Objective::BalancedAccuracy] {
            let fit = fit_threshold(&data, 0, objective).unwrap();
            assert_eq!(fit.threshold, 2.25);
            assert_eq!(fit.direction, Direction::PtosisBelow);
            assert_eq!(fit.score, 1.0);
        }
    }

    #[test]
    fn interleaved_labels_reach_majority_rate() {
        // 1,0,1,0,1 along the axis: best achievable is 3/5
        let data = samples(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1, 0, 1, 0, 1]);
        let fit = fit_threshold(&data, 0, Objective::Accuracy).unwrap();
        assert!((fit.score - 0.6).abs() < 1e-15);
        // the -inf sentinel with "above" calls everything ptosis
        assert_eq!(fit.threshold, f64::NEG_INFINITY);
        assert_eq!(fit.direction, Direction::PtosisAbove);
    }

    #[test]
    fn single_class_is_degenerate() {
        let data = samples(&[1.0, 2.0], &[1, 1]);
        assert!(matches!(
            fit_threshold(&data, 0, Objective::Accuracy),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn above_direction_for_iris_ratio_like_feature() {
        // low iris ratio = ptosis is "below"; reversed labels pick "above"
        let data = samples(&[60.0, 70.0, 95.0, 100.0], &[0, 0, 1, 1]);
        let fit = fit_threshold(&data, 0, Objective::Accuracy).unwrap();
        assert_eq!(fit.direction, Direction::PtosisAbove);
        assert_eq!(fit.threshold, 82.5);
    }
}
