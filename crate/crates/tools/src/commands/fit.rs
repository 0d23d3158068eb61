use ptosis_core::classify::{
    fit_logistic, fit_threshold, fit_tree, ClassWeighting, ClassifierModel, LabeledSample,
    LogisticConfig, Objective, ThresholdClassifier, TreeConfig,
};
use ptosis_core::{Feature, Observation};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cli::{FitArgs, FitMethod, ObjectiveArg};
use crate::error::{ToolError, ToolResult};
use crate::fsio;
use crate::model_file::{ModelFile, TrainingInfo};
use crate::tables::{self, FeatureRow};

pub fn parse_feature(name: &str) -> ToolResult<Feature> {
    Feature::ALL
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| {
            ToolError::input(format!(
                "unknown feature {name:?} (expected one of p_deep, mrd1_mm, iris_ratio_pct)"
            ))
        })
}

/// Features a method reads. Tree and logistic models default to the clinical
/// pair, plus `p_deep` when every row carries one.
pub fn select_features(method: FitMethod, explicit: Option<&[String]>, rows: &[FeatureRow]) -> ToolResult<Vec<Feature>> {
    match method {
        FitMethod::ThresholdMrd1 => return Ok(vec![Feature::Mrd1Mm]),
        FitMethod::ThresholdIr => return Ok(vec![Feature::IrisRatioPct]),
        FitMethod::Tree | FitMethod::Logistic => {}
    }
    if let Some(names) = explicit {
        let mut feats = names.iter().map(|n| parse_feature(n.trim())).collect::<ToolResult<Vec<_>>>()?;
        let n = feats.len();
        feats.sort();
        feats.dedup();
        if feats.is_empty() || feats.len() != n {
            return Err(ToolError::input("--features must list distinct feature names"));
        }
        return Ok(feats);
    }
    if !rows.is_empty() && rows.iter().all(|r| r.p_deep.is_some()) {
        Ok(Feature::ALL.to_vec())
    } else {
        Ok(Feature::CLINICAL.to_vec())
    }
}

pub fn observation(row: &FeatureRow) -> Observation {
    Observation {
        p_deep: row.p_deep,
        mrd1_mm: row.mrd1_mm,
        iris_ratio_pct: row.iris_ratio_pct,
    }
}

pub fn labeled_samples(rows: &[FeatureRow], features: &[Feature]) -> ToolResult<Vec<LabeledSample>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let what = r.id.clone().unwrap_or_else(|| format!("row {}", i + 1));
            let label = r.label.ok_or_else(|| ToolError::input(format!("{what}: missing label")))?;
            let x = observation(r)
                .vector(features)
                .map_err(|e| ToolError::input(format!("{what}: {e}")))?;
            Ok(LabeledSample::new(x, label))
        })
        .collect()
}

/// Train/validation index split, shuffled by `seed` when a validation set is requested.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> ToolResult<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(ToolError::input("--validation-fraction must lie in [0, 1)"));
    }
    let n_val = (fraction * n as f64).round() as usize;
    if n_val == 0 {
        return Ok(((0..n).collect(), Vec::new()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut val = idx[..n_val].to_vec();
    let mut train = idx[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    Ok((train, val))
}

pub fn accuracy(model: &ClassifierModel, samples: &[LabeledSample]) -> ToolResult<f64> {
    let mut correct = 0usize;
    for s in samples {
        let p = model
            .predict_vector(&s.features)
            .map_err(|e| ToolError::from_core("prediction", e))?;
        correct += (p.label == s.label) as usize;
    }
    Ok(correct as f64 / samples.len() as f64)
}

pub struct FitOutcome {
    pub model: ClassifierModel,
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

pub fn fit_model(args: &FitArgs, features: Vec<Feature>, train: &[LabeledSample]) -> ToolResult<FitOutcome> {
    let (pos, neg) = train.iter().fold((0, 0), |(p, n), s| {
        if s.label.is_ptosis() {
            (p + 1, n)
        } else {
            (p, n + 1)
        }
    });
    if pos == 0 || neg == 0 {
        return Err(ToolError::Compute(format!(
            "training data has a single class ({pos} ptosis, {neg} not-ptosis)"
        )));
    }
    let mut parameters = serde_json::Map::new();
    parameters.insert(
        "features".into(),
        json!(features.iter().map(|f| f.name()).collect::<Vec<_>>()),
    );
    let core = |e| ToolError::from_core("fit", e);
    let model = match args.model {
        FitMethod::ThresholdMrd1 | FitMethod::ThresholdIr => {
            let objective = match args.objective {
                ObjectiveArg::Accuracy => Objective::Accuracy,
                ObjectiveArg::BalancedAccuracy => Objective::BalancedAccuracy,
            };
            parameters.insert("objective".into(), json!(objective));
            let fit = fit_threshold(train, 0, objective).map_err(core)?;
            ClassifierModel::Threshold(ThresholdClassifier::from_fit(features[0], &fit))
        }
        FitMethod::Tree => {
            let config = TreeConfig {
                max_depth: args.max_depth,
                min_leaf: args.min_leaf,
                weighting: ClassWeighting::Balanced,
            };
            parameters.insert("tree".into(), json!(config));
            let tree = fit_tree(train, &config).map_err(core)?;
            ClassifierModel::Tree { features, tree }
        }
        FitMethod::Logistic => {
            let config = LogisticConfig::default();
            parameters.insert("logistic".into(), json!(config));
            let fit = fit_logistic(train, &config).map_err(core)?;
            if !fit.converged {
                eprintln!(
                    "warning: logistic fit stopped after {} iterations (gradient {:.2e})",
                    fit.iterations, fit.grad_max_norm
                );
            }
            ClassifierModel::Logistic {
                features,
                model: fit.model,
            }
        }
    };
    Ok(FitOutcome { model, parameters })
}

pub fn run(args: &FitArgs) -> ToolResult<()> {
    let bytes = fsio::read_bytes(&args.data)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| ToolError::input(format!("{}: not valid UTF-8", args.data.display())))?;
    let rows = tables::parse_features(text, &args.data.display().to_string())?;
    if rows.is_empty() {
        return Err(ToolError::input(format!("{}: no data rows", args.data.display())));
    }
    let features = select_features(args.model, args.features.as_deref(), &rows)?;
    let samples = labeled_samples(&rows, &features)?;
    let (train_idx, val_idx) = split_indices(samples.len(), args.validation_fraction, args.seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    let (train, val) = (pick(&train_idx), pick(&val_idx));

    let outcome = fit_model(args, features, &train)?;
    let train_accuracy = accuracy(&outcome.model, &train)?;
    let validation_accuracy = if val.is_empty() {
        None
    } else {
        Some(accuracy(&outcome.model, &val)?)
    };
    println!("train accuracy: {train_accuracy:.4} ({} eyes)", train.len());
    if let Some(v) = validation_accuracy {
        println!("validation accuracy: {v:.4} ({} eyes)", val.len());
    }
    let file = ModelFile::new(
        outcome.model,
        TrainingInfo {
            method: args.model.name().into(),
            data_sha256: fsio::sha256_hex(&bytes),
            seed: args.seed,
            n_train: train.len(),
            n_validation: val.len(),
            train_accuracy,
            validation_accuracy,
            parameters: outcome.parameters,
        },
    );
    fsio::write_atomic(&args.out, file.to_json().as_bytes())
}
