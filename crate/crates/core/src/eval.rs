//! Evaluation metrics and method-comparison tables.
//!
//! Rates are reported as percentages. A ratio whose denominator is zero is
//! absent (`None`) rather than zero.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(preds: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if preds.len() != truth.len() {
        return Err(Error::param(format!(
            "{} predictions but {} truth labels",
            preds.len(),
            truth.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::param("confusion matrix needs at least one sample"));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in preds.iter().zip(truth) {
        match (p.is_ptosis(), t.is_ptosis()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::param("metrics need a non-empty confusion matrix"));
    }
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(Metrics {
        accuracy: 100.0 * (cm.tp + cm.tn) as f64 / n as f64,
        precision,
        recall,
        f1,
    })
}

/// Pair-counting ROC AUC: `(concordant + ties / 2) / (P * N)`.
///
/// Sorting groups tied scores, so the count is exact and runs in
/// `O(n log n)`.
pub fn roc_auc(scores: &[f64], truth: &[Label]) -> Result<f64> {
    let (num, den) = roc_auc_counts(scores, truth)?;
    Ok(num as f64 / den as f64)
}

/// `(2 * concordant + tied, 2 * P * N)` as exact integers.
pub fn roc_auc_counts(scores: &[f64], truth: &[Label]) -> Result<(u128, u128)> {
    if scores.len() != truth.len() {
        return Err(Error::param(format!(
            "{} scores but {} truth labels",
            scores.len(),
            truth.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::param(format!("score {s} is not a number")));
    }
    let pos = truth.iter().filter(|l| l.is_ptosis()).count() as u128;
    let neg = truth.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc(format!(
            "need both classes, got {pos} positive and {neg} negative"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let (mut concordant, mut tied, mut neg_below) = (0u128, 0u128, 0u128);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut gp, mut gn) = (0u128, 0u128);
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]].is_ptosis() {
                gp += 1;
            } else {
                gn += 1;
            }
            i += 1;
        }
        concordant += gp * neg_below;
        tied += gp * gn;
        neg_below += gn;
    }
    Ok((2 * concordant + tied, 2 * pos * neg))
}

/// Predictions of one method over the evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutput {
    pub name: String,
    pub predictions: Vec<Label>,
    /// Ranking scores for AUC; absent when the method has none.
    pub scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub name: String,
    pub n: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub roc_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<MethodRow>,
}

pub fn evaluate_methods(truth: &[Label], methods: &[MethodOutput]) -> Result<ComparisonTable> {
    let mut rows = Vec::with_capacity(methods.len());
    for m in methods {
        let cm = confusion(&m.predictions, truth)
            .map_err(|e| Error::param(format!("method {}: {e}", m.name)))?;
        let roc_auc = match &m.scores {
            Some(s) => match roc_auc(s, truth) {
                Ok(a) => Some(a),
                Err(Error::UndefinedAuc(_)) => None,
                Err(e) => return Err(Error::param(format!("method {}: {e}", m.name))),
            },
            None => None,
        };
        rows.push(MethodRow {
            name: m.name.clone(),
            n: truth.len(),
            confusion: cm,
            metrics: metrics(&cm)?,
            roc_auc,
        });
    }
    Ok(ComparisonTable { rows })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| String::from("n/a"), |x| format!("{x:.1}"))
}

impl ComparisonTable {
    pub const HEADER: [&'static str; 7] =
        ["method", "n", "accuracy", "precision", "recall", "f1", "roc_auc"];

    fn cells(row: &MethodRow) -> [String; 7] {
        [
            row.name.clone(),
            format!("{}", row.n),
            cell(Some(row.metrics.accuracy)),
            cell(row.metrics.precision),
            cell(row.metrics.recall),
            cell(row.metrics.f1),
            cell(row.roc_auc.map(|a| 100.0 * a)),
        ]
    }

    /// Comma-separated, header first, percentages to one decimal.
    pub fn to_csv(&self) -> String {
        let mut out = Self::HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&Self::cells(row).join(","));
            out.push('\n');
        }
        out
    }

    /// Column-aligned plain text.
    pub fn to_text(&self) -> String {
        let mut table: Vec<[String; 7]> = Vec::with_capacity(self.rows.len() + 1);
        table.push(Self::HEADER.map(String::from));
        table.extend(self.rows.iter().map(Self::cells));
        let mut widths = [0usize; 7];
        for r in &table {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for r in &table {
            let mut line = String::new();
            for (i, (c, w)) in r.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(line, "{c:<w$}");
                } else {
                    let _ = write!(line, "  {c:>w$}");
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use Label::{NotPtosis as N, Ptosis as P};

    fn labels(bits: &[u8]) -> Vec<Label> {
        bits.iter().map(|&b| Label::from_u8(b).unwrap()).collect()
    }

    /// O(n^2) pair count, kept independent of the sorted sweep.
    fn brute_auc(scores: &[f64], truth: &[Label]) -> (u128, u128) {
        let (mut num, mut den) = (0u128, 0u128);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if truth[i].is_ptosis() && !truth[j].is_ptosis() {
                    den += 2;
                    if scores[i] > scores[j] {
                        num += 2;
                    } else if scores[i] == scores[j] {
                        num += 1;
                    }
                }
            }
        }
        (num, den)
    }

    #[test]
    fn confusion_examples() {
        let t = labels(&[1, 0, 1, 0]);
        assert_eq!(
            confusion(&t, &t).unwrap(),
            ConfusionMatrix {
                tp: 2,
                fp: 0,
                fn_: 0,
                tn: 2
            }
        );
        let cm = confusion(&[P; 5], &[N; 5]).unwrap();
        assert_eq!(cm.fp, 5);
        assert!(confusion(&[P], &[P, N]).is_err());
    }

    #[test]
    fn metric_examples() {
        let perfect = metrics(&ConfusionMatrix {
            tp: 50,
            fp: 0,
            fn_: 0,
            tn: 50,
        })
        .unwrap();
        assert_eq!(
            perfect,
            Metrics {
                accuracy: 100.0,
                precision: Some(100.0),
                recall: Some(100.0),
                f1: Some(100.0)
            }
        );
        let m = metrics(&ConfusionMatrix {
            tp: 44,
            fp: 1,
            fn_: 9,
            tn: 46,
        })
        .unwrap();
        assert!((m.accuracy - 90.0).abs() < 1e-12);
        assert!((m.precision.unwrap() - 97.777_777_777_777_78).abs() < 1e-9);
        assert!((m.recall.unwrap() - 83.018_867_924_528_3).abs() < 1e-9);
        let none = metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 2,
        })
        .unwrap();
        assert_eq!(none.precision, None);
        assert_eq!(none.f1, None);
        assert!(metrics(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0.9, 0.8, 0.3, 0.2], &labels(&[1, 1, 0, 0])).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.9, 0.2, 0.8, 0.3], &labels(&[1, 0, 0, 1])).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.4; 6], &labels(&[1, 0, 1, 0, 0, 1])).unwrap(), 0.5);
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[P, P]),
            Err(Error::UndefinedAuc(_))
        ));
    }

    #[test]
    fn table_rows_and_formats() {
        let truth = labels(&[1, 0, 1, 0]);
        let a = MethodOutput {
            name: "tree".into(),
            predictions: truth.clone(),
            scores: Some(vec![0.9, 0.1, 0.8, 0.2]),
        };
        let b = MethodOutput {
            name: "tree-copy".into(),
            ..a.clone()
        };
        let c = MethodOutput {
            name: "no-scores".into(),
            predictions: truth.clone(),
            scores: None,
        };
        let t = evaluate_methods(&truth, &[a, b, c]).unwrap();
        assert_eq!(t.rows[0].metrics, t.rows[1].metrics);
        assert_eq!(t.rows[0].roc_auc, t.rows[1].roc_auc);
        let csv = t.to_csv();
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "tree,4,100.0,100.0,100.0,100.0,100.0"
        );
        assert!(csv.lines().nth(3).unwrap().ends_with(",n/a"));
        let text = t.to_text();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("method"));

        let short = MethodOutput {
            name: "bad".into(),
            predictions: vec![P],
            scores: None,
        };
        assert!(evaluate_methods(&truth, &[short]).is_err());
    }

    proptest! {
        #[test]
        fn auc_matches_pair_count(
            data in proptest::collection::vec((0u8..10, any::<bool>()), 2..100)
        ) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| *s as f64 / 10.0).collect();
            let truth: Vec<Label> = data.iter().map(|(_, l)| Label::from_bool(*l)).collect();
            let both = truth.iter().any(|l| l.is_ptosis()) && truth.iter().any(|l| !l.is_ptosis());
            prop_assume!(both);
            prop_assert_eq!(roc_auc_counts(&scores, &truth).unwrap(), brute_auc(&scores, &truth));
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            data in proptest::collection::vec((-5.0f64..5.0, any::<bool>()), 2..60)
        ) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| *s).collect();
            let truth: Vec<Label> = data.iter().map(|(_, l)| Label::from_bool(*l)).collect();
            let both = truth.iter().any(|l| l.is_ptosis()) && truth.iter().any(|l| !l.is_ptosis());
            prop_assume!(both);
            let a = roc_auc(&scores, &truth).unwrap();
            let warped: Vec<f64> = scores.iter().map(|s| libm::exp(*s) * 3.0 + 1.0).collect();
            prop_assert_eq!(a, roc_auc(&warped, &truth).unwrap());
            let flipped_scores: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
            let flipped_truth: Vec<Label> = truth.iter().map(|l| Label::from_bool(!l.is_ptosis())).collect();
            prop_assert_eq!(a, roc_auc(&flipped_scores, &flipped_truth).unwrap());
        }

        #[test]
        fn metrics_are_permutation_invariant(
            data in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..50),
            rot in 0usize..50,
        ) {
            let preds: Vec<Label> = data.iter().map(|(p, _)| Label::from_bool(*p)).collect();
            let truth: Vec<Label> = data.iter().map(|(_, t)| Label::from_bool(*t)).collect();
            let cm = confusion(&preds, &truth).unwrap();
            prop_assert_eq!(cm.total(), data.len() as u64);
            let k = rot % data.len();
            let mut p2 = preds.clone();
            let mut t2 = truth.clone();
            p2.rotate_left(k);
            t2.rotate_left(k);
            p2.reverse();
            t2.reverse();
            prop_assert_eq!(cm, confusion(&p2, &t2).unwrap());
        }
    }
}
