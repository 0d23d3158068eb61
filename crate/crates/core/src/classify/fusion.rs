//! Two-threshold combination of a deep-model probability with a
//! measurement-based model.

use alloc::format;

use serde::{Deserialize, Serialize};

use super::{ClassifierModel, Label, Observation};
use crate::clinical::ClinicalMeasurements;
use crate::error::{Error, Result};

pub const DEFAULT_T_LO: f64 = 0.34;
pub const DEFAULT_T_HI: f64 = 0.78;

/// Which model produced a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionPath {
    /// The deep probability was outside the deferred band.
    Deep,
    /// The probability fell in `[t_lo, t_hi]` and the deferred model decided.
    Deferred,
    /// No deep probability was available; the measurement model decided.
    ClinicalOnly,
}

/// Deep probabilities below `t_lo` or above `t_hi` are trusted; the closed
/// band between them is handed to `deferred`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionPolicy {
    pub t_lo: f64,
    pub t_hi: f64,
    pub deferred: ClassifierModel,
}

impl FusionPolicy {
    pub fn new(t_lo: f64, t_hi: f64, deferred: ClassifierModel) -> Result<Self> {
        if !(0.0 <= t_lo && t_lo <= t_hi && t_hi <= 1.0) {
            return Err(Error::param(format!(
                "fusion thresholds need 0 <= t_lo <= t_hi <= 1, got {t_lo} and {t_hi}"
            )));
        }
        Ok(Self {
            t_lo,
            t_hi,
            deferred,
        })
    }

    pub fn with_defaults(deferred: ClassifierModel) -> Self {
        Self {
            t_lo: DEFAULT_T_LO,
            t_hi: DEFAULT_T_HI,
            deferred,
        }
    }

    pub fn in_band(&self, p: f64) -> bool {
        self.t_lo <= p && p <= self.t_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionOutcome {
    pub label: Label,
    pub path: DecisionPath,
    /// The deep probability on the deep path, the deferred model's score otherwise.
    pub score: f64,
}

pub fn fuse(p_deep: f64, measurements: &ClinicalMeasurements, policy: &FusionPolicy) -> Result<FusionOutcome> {
    fuse_observation(&Observation::from_measurements(measurements, Some(p_deep)), policy)
}

/// Applies the policy. Without a deep probability the deferred model decides
/// on the clinical path.
pub fn fuse_observation(obs: &Observation, policy: &FusionPolicy) -> Result<FusionOutcome> {
    let Some(p) = obs.p_deep else {
        let pred = policy.deferred.predict(obs)?;
        return Ok(FusionOutcome {
            label: pred.label,
            path: DecisionPath::ClinicalOnly,
            score: pred.score,
        });
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("deep probability {p} outside [0, 1]")));
    }
    if p < policy.t_lo {
        return Ok(FusionOutcome {
            label: Label::NotPtosis,
            path: DecisionPath::Deep,
            score: p,
        });
    }
    if p > policy.t_hi {
        return Ok(FusionOutcome {
            label: Label::Ptosis,
            path: DecisionPath::Deep,
            score: p,
        });
    }
    let pred = policy.deferred.predict(obs)?;
    Ok(FusionOutcome {
        label: pred.label,
        path: DecisionPath::Deferred,
        score: pred.score,
    })
}

/// Narrowest band `[t_lo, t_hi]` outside of which thresholding the deep
/// probabilities makes no error on `(probs, labels)`: `t_lo` is the smallest
/// ptosis probability and `t_hi` the largest not-ptosis probability. When the
/// classes are already separated the band collapses to the midpoint of the gap.
pub fn fit_fusion_band(probs: &[f64], labels: &[Label]) -> Result<(f64, f64)> {
    if probs.len() != labels.len() {
        return Err(Error::param(format!(
            "{} probabilities but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::param(format!("probability {p} outside [0, 1]")));
    }
    let min_pos = probs
        .iter()
        .zip(labels)
        .filter(|(_, l)| l.is_ptosis())
        .map(|(p, _)| *p)
        .fold(f64::INFINITY, f64::min);
    let max_neg = probs
        .iter()
        .zip(labels)
        .filter(|(_, l)| !l.is_ptosis())
        .map(|(p, _)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    if !min_pos.is_finite() || !max_neg.is_finite() {
        return Err(Error::DegenerateFit("fusion band needs both classes".into()));
    }
    if min_pos <= max_neg {
        Ok((min_pos, max_neg))
    } else {
        let mid = (min_pos + max_neg) / 2.0;
        Ok((mid, mid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{Direction, Feature, ThresholdClassifier};
    use crate::geometry::Point2;
    use alloc::vec;

    fn policy() -> FusionPolicy {
        FusionPolicy::with_defaults(ClassifierModel::Threshold(ThresholdClassifier {
            feature: Feature::Mrd1Mm,
            threshold: 2.0,
            direction: Direction::PtosisBelow,
        }))
    }

    fn measurements(mrd1_mm: f64) -> ClinicalMeasurements {
        ClinicalMeasurements {
            mrd1_px: mrd1_mm * 10.0,
            mrd1_mm,
            iris_ratio_pct: 90.0,
            clr: Point2::new(0.0, 0.0),
            clr_found: true,
            mm_per_px: 0.1,
        }
    }

    #[test]
    fn deep_and_deferred_paths() {
        let p = policy();
        let m = measurements(1.0); // deferred model says ptosis
        let out = fuse(0.20, &m, &p).unwrap();
        assert_eq!((out.label, out.path), (Label::NotPtosis, DecisionPath::Deep));
        let out = fuse(0.90, &measurements(4.0), &p).unwrap();
        assert_eq!((out.label, out.path), (Label::Ptosis, DecisionPath::Deep));
        let out = fuse(0.50, &m, &p).unwrap();
        assert_eq!((out.label, out.path), (Label::Ptosis, DecisionPath::Deferred));
        for edge in [DEFAULT_T_LO, DEFAULT_T_HI] {
            assert_eq!(fuse(edge, &m, &p).unwrap().path, DecisionPath::Deferred);
        }
        assert!(fuse(1.5, &m, &p).is_err());
    }

    #[test]
    fn missing_probability_is_clinical_only() {
        let obs = Observation {
            p_deep: None,
            mrd1_mm: 1.0,
            iris_ratio_pct: 80.0,
        };
        let out = fuse_observation(&obs, &policy()).unwrap();
        assert_eq!((out.label, out.path), (Label::Ptosis, DecisionPath::ClinicalOnly));
    }

    #[test]
    fn thresholds_are_validated() {
        let model = policy().deferred;
        assert!(FusionPolicy::new(0.8, 0.3, model.clone()).is_err());
        assert!(FusionPolicy::new(-0.1, 0.3, model.clone()).is_err());
        assert!(FusionPolicy::new(0.3, 0.3, model).is_ok());
    }

    #[test]
    fn band_refit() {
        use Label::*;
        let probs = vec![0.1, 0.3, 0.45, 0.5, 0.7, 0.9];
        let labels = vec![NotPtosis, NotPtosis, Ptosis, NotPtosis, Ptosis, Ptosis];
        assert_eq!(fit_fusion_band(&probs, &labels).unwrap(), (0.45, 0.5));
        let sep = fit_fusion_band(&[0.1, 0.9], &[NotPtosis, Ptosis]).unwrap();
        assert_eq!(sep, (0.5, 0.5));
        assert!(fit_fusion_band(&[0.1], &[Ptosis]).is_err());
    }
}
