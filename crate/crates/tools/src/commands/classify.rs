use std::collections::BTreeMap;

use ptosis_core::classify::{ensemble_average, fuse_observation, FusionPolicy, DEFAULT_T_HI, DEFAULT_T_LO};
use ptosis_core::{Observation, Side};
use serde_json::json;

use super::fit::observation;
use crate::cli::ClassifyArgs;
use crate::error::{ToolError, ToolResult};
use crate::fsio;
use crate::model_file::{ModelFile, MODEL_VERSION};
use crate::report::{tool_id, DiagnosisReport, InputRecord, ModelRecord, Provenance};
use crate::tables::{self, PredictionRow};

/// Per-side mean of the probabilities in a `side,p1,...,pk` table.
pub fn parse_p_deep(text: &str, origin: &str) -> ToolResult<BTreeMap<Side, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| ToolError::input(format!("{origin}:1: {e}")))?
        .clone();
    if header.len() < 2 || &header[0] != "side" {
        return Err(ToolError::input(format!(
            "{origin}:1: header must be `side,p1,...,pk` with at least one probability column"
        )));
    }
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            ToolError::input(format!("{origin}:{}: {e}", e.position().map_or(0, |p| p.line())))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |msg: String| ToolError::input(format!("{origin}:{line}: {msg}"));
        let side: Side = record[0].parse().map_err(|e| at(format!("{e}")))?;
        let probs = record
            .iter()
            .skip(1)
            .map(|c| c.parse::<f64>().map_err(|_| at(format!("not a probability: {c:?}"))))
            .collect::<ToolResult<Vec<_>>>()?;
        let (mean, _) = ensemble_average(&probs).map_err(|e| at(e.to_string()))?;
        if out.insert(side, mean).is_some() {
            return Err(at(format!("{} eye listed twice", side.as_str())));
        }
    }
    Ok(out)
}

fn policy(args: &ClassifyArgs, model: &ModelFile) -> ToolResult<FusionPolicy> {
    let (lo, hi) = match args.fusion.as_deref() {
        Some(&[lo, hi]) => (lo, hi),
        Some(_) => return Err(ToolError::input("--fusion takes T_LO and T_HI")),
        None => (DEFAULT_T_LO, DEFAULT_T_HI),
    };
    FusionPolicy::new(lo, hi, model.model.clone()).map_err(|e| ToolError::schema("--fusion", e))
}

fn fuse(obs: &Observation, policy: &FusionPolicy, what: &str) -> ToolResult<ptosis_core::classify::FusionOutcome> {
    fuse_observation(obs, policy).map_err(|e| match e {
        ptosis_core::Error::Parameter(_) => ToolError::input(format!("{what}: model does not fit the input: {e}")),
        other => ToolError::Compute(format!("{what}: {other}")),
    })
}

pub fn classify_report(
    report: &DiagnosisReport,
    report_record: InputRecord,
    p_deep: Option<(&BTreeMap<Side, f64>, InputRecord)>,
    model: &ModelFile,
    model_bytes: &[u8],
    policy: &FusionPolicy,
) -> ToolResult<DiagnosisReport> {
    let mut eyes = report.eyes.clone();
    for eye in &mut eyes {
        let p = p_deep.as_ref().and_then(|(m, _)| m.get(&eye.side).copied());
        let obs = Observation {
            p_deep: p,
            mrd1_mm: eye.mrd1_mm,
            iris_ratio_pct: eye.iris_ratio_pct,
        };
        let out = fuse(&obs, policy, &format!("{} eye", eye.side.as_str()))?;
        eye.prediction = Some(out.label);
        eye.p_deep = p;
        eye.decision_path = Some(out.path);
        eye.score = Some(out.score);
    }
    let mut inputs = report.provenance.inputs.clone();
    inputs.push(report_record);
    if let Some((_, record)) = p_deep {
        inputs.push(record);
    }
    let mut parameters = report.provenance.parameters.clone();
    parameters.insert("fusion".into(), json!([policy.t_lo, policy.t_hi]));
    Ok(DiagnosisReport::new(
        eyes,
        Provenance {
            tool: tool_id(),
            inputs,
            model: Some(ModelRecord {
                kind: model.model.kind().into(),
                method: model.training.method.clone(),
                format_version: MODEL_VERSION,
                sha256: fsio::sha256_hex(model_bytes),
            }),
            parameters,
        },
    ))
}

pub fn classify_rows(rows: &[tables::FeatureRow], policy: &FusionPolicy) -> ToolResult<Vec<PredictionRow>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let id = r.id.clone().unwrap_or_else(|| (i + 1).to_string());
            let out = fuse(&observation(r), policy, &id)?;
            Ok(PredictionRow {
                id,
                prediction: out.label,
                score: Some(out.score),
                decision_path: Some(path_name(out.path).into()),
            })
        })
        .collect()
}

pub fn path_name(p: ptosis_core::classify::DecisionPath) -> &'static str {
    use ptosis_core::classify::DecisionPath::*;
    match p {
        Deep => "deep",
        Deferred => "deferred",
        ClinicalOnly => "clinical-only",
    }
}

fn looks_like_json(bytes: &[u8]) -> bool {
    bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{')
}

pub fn run(args: &ClassifyArgs) -> ToolResult<()> {
    let model_bytes = fsio::read_bytes(&args.model)?;
    let model = ModelFile::parse(
        std::str::from_utf8(&model_bytes)
            .map_err(|_| ToolError::input(format!("{}: not valid UTF-8", args.model.display())))?,
        &args.model.display().to_string(),
    )?;
    let policy = policy(args, &model)?;
    let input_bytes = fsio::read_bytes(&args.input)?;
    let origin = args.input.display().to_string();
    let text = std::str::from_utf8(&input_bytes).map_err(|_| ToolError::input(format!("{origin}: not valid UTF-8")))?;

    if looks_like_json(&input_bytes) {
        let report = DiagnosisReport::parse(text, &origin)?;
        let p_deep = match &args.p_deep {
            Some(path) => {
                let bytes = fsio::read_bytes(path)?;
                let text = std::str::from_utf8(&bytes)
                    .map_err(|_| ToolError::input(format!("{}: not valid UTF-8", path.display())))?;
                let map = parse_p_deep(text, &path.display().to_string())?;
                Some((map, InputRecord::new("p_deep", path, &bytes)))
            }
            None if args.fusion.is_some() => {
                return Err(ToolError::input("--fusion needs deep probabilities (--p-deep)"));
            }
            None => None,
        };
        let out = classify_report(
            &report,
            InputRecord::new("report", &args.input, &input_bytes),
            p_deep.as_ref().map(|(m, r)| (m, r.clone())),
            &model,
            &model_bytes,
            &policy,
        )?;
        eprint!("{}", out.summary());
        return fsio::emit(args.out.as_deref(), out.to_json().as_bytes());
    }

    if args.p_deep.is_some() {
        return Err(ToolError::input(
            "--p-deep applies to report input; feature tables carry a p_deep column",
        ));
    }
    let rows = tables::parse_features(text, &origin)?;
    if args.fusion.is_some() && rows.iter().all(|r| r.p_deep.is_none()) {
        return Err(ToolError::input(format!("{origin}: --fusion needs p_deep values")));
    }
    let preds = classify_rows(&rows, &policy)?;
    fsio::emit(args.out.as_deref(), &tables::write_predictions(&preds))
}
