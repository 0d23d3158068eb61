use std::collections::{HashMap, HashSet};
use std::path::Path;

use ptosis_core::eval::{evaluate_methods, ComparisonTable, MethodOutput};
use ptosis_core::Label;

use crate::cli::{EvalArgs, TableFormat};
use crate::error::{ToolError, ToolResult};
use crate::fsio;
use crate::tables::{self, PredictionRow, TruthRow};

/// Aligns `preds` to the order of `truth`; the id sets must match exactly.
pub fn align(name: &str, truth: &[TruthRow], preds: &[PredictionRow]) -> ToolResult<MethodOutput> {
    let mut by_id: HashMap<&str, &PredictionRow> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(ToolError::input(format!("{name}: duplicate id {:?}", p.id)));
        }
    }
    let truth_ids: HashSet<&str> = truth.iter().map(|t| t.id.as_str()).collect();
    if let Some(extra) = preds.iter().find(|p| !truth_ids.contains(p.id.as_str())) {
        return Err(ToolError::input(format!("{name}: id {:?} is not in the truth table", extra.id)));
    }
    let mut predictions = Vec::with_capacity(truth.len());
    let mut scores = Vec::with_capacity(truth.len());
    for t in truth {
        let p = by_id
            .get(t.id.as_str())
            .ok_or_else(|| ToolError::input(format!("{name}: no prediction for id {:?}", t.id)))?;
        predictions.push(p.prediction);
        scores.push(p.score);
    }
    Ok(MethodOutput {
        name: name.to_owned(),
        predictions,
        scores: scores.into_iter().collect(),
    })
}

pub fn method_name(path: &Path) -> String {
    let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    name.strip_suffix(".csv").unwrap_or(&name).to_owned()
}

pub fn evaluate(truth: &[TruthRow], methods: &[MethodOutput]) -> ToolResult<ComparisonTable> {
    if truth.is_empty() {
        return Err(ToolError::input("truth table has no rows"));
    }
    let labels: Vec<Label> = truth.iter().map(|t| t.label).collect();
    evaluate_methods(&labels, methods).map_err(|e| ToolError::input(e.to_string()))
}

pub fn run(args: &EvalArgs) -> ToolResult<()> {
    let truth = tables::load_truth(&args.truth)?;
    let mut seen = HashSet::new();
    if let Some(dup) = truth.iter().find(|t| !seen.insert(t.id.as_str())) {
        return Err(ToolError::input(format!("{}: duplicate id {:?}", args.truth.display(), dup.id)));
    }
    let mut methods = Vec::with_capacity(args.predictions.len());
    for path in &args.predictions {
        let preds = tables::load_predictions(path)?;
        methods.push(align(&method_name(path), &truth, &preds)?);
    }
    let table = evaluate(&truth, &methods)?;
    let text = match args.format {
        TableFormat::Text => table.to_text(),
        TableFormat::Csv => table.to_csv(),
    };
    fsio::emit(args.out.as_deref(), text.as_bytes())
}
