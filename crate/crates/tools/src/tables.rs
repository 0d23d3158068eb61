//! CSV tables: features, ground truth and predictions.
//!
//! Labels are written `1` (ptosis) and `0`; absent optional values are empty
//! cells. Headers are checked exactly, so a reordered column is an error
//! rather than a silent mix-up.

use std::path::Path;

use ptosis_core::Label;

use crate::error::{ToolError, ToolResult};
use crate::fsio;

pub const FEATURE_HEADER: [&str; 4] = ["p_deep", "mrd1_mm", "iris_ratio_pct", "label"];
pub const TRUTH_HEADER: [&str; 5] = ["id", "mrd1_px", "mrd1_mm", "iris_ratio_pct", "label"];
pub const PREDICTION_HEADER: [&str; 3] = ["id", "prediction", "score"];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: Option<String>,
    pub p_deep: Option<f64>,
    pub mrd1_mm: f64,
    pub iris_ratio_pct: f64,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub id: String,
    pub mrd1_px: f64,
    pub mrd1_mm: f64,
    pub iris_ratio_pct: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub prediction: Label,
    pub score: Option<f64>,
    pub decision_path: Option<String>,
}

struct Table {
    origin: String,
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn parse(text: &str, origin: &str) -> ToolResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| ToolError::input(format!("{origin}:1: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                ToolError::input(format!("{origin}:{line}: {e}"))
            })?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record.iter().map(str::to_owned).collect()));
        }
        Ok(Self {
            origin: origin.to_owned(),
            header,
            rows,
        })
    }

    fn header_is(&self, expected: &[&str]) -> bool {
        self.header.len() == expected.len() && self.header.iter().zip(expected).all(|(a, b)| a == b)
    }

    fn bad_header(&self, expected: &str) -> ToolError {
        ToolError::input(format!(
            "{}:1: header must be `{expected}`, found `{}`",
            self.origin,
            self.header.join(",")
        ))
    }

    fn err(&self, line: u64, msg: impl std::fmt::Display) -> ToolError {
        ToolError::input(format!("{}:{line}: {msg}", self.origin))
    }

    fn number(&self, line: u64, column: &str, cell: &str) -> ToolResult<f64> {
        let v: f64 = cell
            .parse()
            .map_err(|_| self.err(line, format_args!("{column}: not a number: {cell:?}")))?;
        if !v.is_finite() {
            return Err(self.err(line, format_args!("{column}: non-finite value {cell:?}")));
        }
        Ok(v)
    }

    fn optional_number(&self, line: u64, column: &str, cell: &str) -> ToolResult<Option<f64>> {
        if cell.is_empty() {
            Ok(None)
        } else {
            self.number(line, column, cell).map(Some)
        }
    }

    fn label(&self, line: u64, column: &str, cell: &str) -> ToolResult<Label> {
        match cell {
            "1" => Ok(Label::Ptosis),
            "0" => Ok(Label::NotPtosis),
            other => Err(self.err(line, format_args!("{column}: expected 0 or 1, got {other:?}"))),
        }
    }
}

/// Header `p_deep,mrd1_mm,iris_ratio_pct,label`, optionally preceded by `id`.
/// `p_deep` and `label` cells may be empty.
pub fn parse_features(text: &str, origin: &str) -> ToolResult<Vec<FeatureRow>> {
    let t = Table::parse(text, origin)?;
    let with_id = t.header.first().map(String::as_str) == Some("id");
    let mut expected: Vec<&str> = FEATURE_HEADER.to_vec();
    if with_id {
        expected.insert(0, "id");
    }
    if !t.header_is(&expected) {
        return Err(t.bad_header(&FEATURE_HEADER.join(",")));
    }
    let off = with_id as usize;
    t.rows
        .iter()
        .map(|(line, cells)| {
            Ok(FeatureRow {
                id: with_id.then(|| cells[0].clone()),
                p_deep: t.optional_number(*line, "p_deep", &cells[off])?,
                mrd1_mm: t.number(*line, "mrd1_mm", &cells[off + 1])?,
                iris_ratio_pct: t.number(*line, "iris_ratio_pct", &cells[off + 2])?,
                label: if cells[off + 3].is_empty() {
                    None
                } else {
                    Some(t.label(*line, "label", &cells[off + 3])?)
                },
            })
        })
        .collect()
}

pub fn load_features(path: &Path) -> ToolResult<Vec<FeatureRow>> {
    let text = fsio::read_text(path)?;
    parse_features(&text, &path.display().to_string())
}

pub fn parse_truth(text: &str, origin: &str) -> ToolResult<Vec<TruthRow>> {
    let t = Table::parse(text, origin)?;
    if !t.header_is(&TRUTH_HEADER) {
        return Err(t.bad_header(&TRUTH_HEADER.join(",")));
    }
    t.rows
        .iter()
        .map(|(line, c)| {
            Ok(TruthRow {
                id: c[0].clone(),
                mrd1_px: t.number(*line, "mrd1_px", &c[1])?,
                mrd1_mm: t.number(*line, "mrd1_mm", &c[2])?,
                iris_ratio_pct: t.number(*line, "iris_ratio_pct", &c[3])?,
                label: t.label(*line, "label", &c[4])?,
            })
        })
        .collect()
}

pub fn load_truth(path: &Path) -> ToolResult<Vec<TruthRow>> {
    let text = fsio::read_text(path)?;
    parse_truth(&text, &path.display().to_string())
}

/// Header `id,prediction,score` with an optional trailing `decision_path`.
pub fn parse_predictions(text: &str, origin: &str) -> ToolResult<Vec<PredictionRow>> {
    let t = Table::parse(text, origin)?;
    let with_path = t.header_is(&["id", "prediction", "score", "decision_path"]);
    if !with_path && !t.header_is(&PREDICTION_HEADER) {
        return Err(t.bad_header("id,prediction,score[,decision_path]"));
    }
    t.rows
        .iter()
        .map(|(line, c)| {
            Ok(PredictionRow {
                id: c[0].clone(),
                prediction: t.label(*line, "prediction", &c[1])?,
                score: t.optional_number(*line, "score", &c[2])?,
                decision_path: with_path.then(|| c[3].clone()).filter(|s| !s.is_empty()),
            })
        })
        .collect()
}

pub fn load_predictions(path: &Path) -> ToolResult<Vec<PredictionRow>> {
    let text = fsio::read_text(path)?;
    parse_predictions(&text, &path.display().to_string())
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn lab(l: Label) -> String {
    l.as_u8().to_string()
}

/// Writes an `id` column when every row has one.
pub fn write_features(rows: &[FeatureRow]) -> Vec<u8> {
    let with_id = !rows.is_empty() && rows.iter().all(|r| r.id.is_some());
    let mut w = writer();
    let mut header: Vec<&str> = FEATURE_HEADER.to_vec();
    if with_id {
        header.insert(0, "id");
    }
    w.write_record(&header).expect("in-memory csv");
    for r in rows {
        let mut rec = Vec::with_capacity(5);
        if with_id {
            rec.push(r.id.clone().unwrap_or_default());
        }
        rec.extend([
            opt(r.p_deep),
            num(r.mrd1_mm),
            num(r.iris_ratio_pct),
            r.label.map(lab).unwrap_or_default(),
        ]);
        w.write_record(&rec).expect("in-memory csv");
    }
    finish(w)
}

pub fn write_truth(rows: &[TruthRow]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(TRUTH_HEADER).expect("in-memory csv");
    for r in rows {
        w.write_record([
            r.id.clone(),
            num(r.mrd1_px),
            num(r.mrd1_mm),
            num(r.iris_ratio_pct),
            lab(r.label),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}

/// Writes a `decision_path` column when any row has one.
pub fn write_predictions(rows: &[PredictionRow]) -> Vec<u8> {
    let with_path = rows.iter().any(|r| r.decision_path.is_some());
    let mut w = writer();
    let mut header = PREDICTION_HEADER.to_vec();
    if with_path {
        header.push("decision_path");
    }
    w.write_record(&header).expect("in-memory csv");
    for r in rows {
        let mut rec = vec![r.id.clone(), lab(r.prediction), opt(r.score)];
        if with_path {
            rec.push(r.decision_path.clone().unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory csv");
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_round_trip_with_and_without_ids() {
        let rows = vec![
            FeatureRow {
                id: Some("0000".into()),
                p_deep: None,
                mrd1_mm: 3.25,
                iris_ratio_pct: 91.5,
                label: Some(Label::NotPtosis),
            },
            FeatureRow {
                id: Some("0001".into()),
                p_deep: Some(0.8),
                mrd1_mm: -0.5,
                iris_ratio_pct: 40.0,
                label: None,
            },
        ];
        let text = String::from_utf8(write_features(&rows)).unwrap();
        assert!(text.starts_with("id,p_deep,mrd1_mm,iris_ratio_pct,label\n0000,,3.25,91.5,0\n"));
        assert_eq!(parse_features(&text, "f").unwrap(), rows);
        let bare = "p_deep,mrd1_mm,iris_ratio_pct,label\n0.3,2.5,88,1\n";
        let parsed = parse_features(bare, "f").unwrap();
        assert_eq!(parsed[0].id, None);
        assert_eq!(parsed[0].label, Some(Label::Ptosis));
    }

    #[test]
    fn malformed_header_and_cells_name_their_line() {
        let err = parse_features("mrd1_mm,p_deep,iris_ratio_pct,label\n", "f.csv").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().starts_with("f.csv:1:"));
        let err = parse_features("p_deep,mrd1_mm,iris_ratio_pct,label\n,1,2,0\n,x,2,0\n", "f.csv")
            .unwrap_err();
        assert!(err.to_string().starts_with("f.csv:3:"), "{err}");
        assert!(parse_features("p_deep,mrd1_mm,iris_ratio_pct,label\n,1,2,2\n", "f").is_err());
        assert!(parse_features("p_deep,mrd1_mm,iris_ratio_pct,label\n,1,2\n", "f").is_err());
    }

    #[test]
    fn truth_and_predictions_round_trip() {
        let truth = vec![TruthRow {
            id: "0003".into(),
            mrd1_px: 40.125,
            mrd1_mm: 4.0,
            iris_ratio_pct: 97.0,
            label: Label::NotPtosis,
        }];
        let text = String::from_utf8(write_truth(&truth)).unwrap();
        assert_eq!(parse_truth(&text, "t").unwrap(), truth);
        let preds = vec![
            PredictionRow {
                id: "a".into(),
                prediction: Label::Ptosis,
                score: None,
                decision_path: Some("deep".into()),
            },
            PredictionRow {
                id: "b".into(),
                prediction: Label::NotPtosis,
                score: Some(0.25),
                decision_path: None,
            },
        ];
        let text = String::from_utf8(write_predictions(&preds)).unwrap();
        assert_eq!(parse_predictions(&text, "p").unwrap(), preds);
    }
}
