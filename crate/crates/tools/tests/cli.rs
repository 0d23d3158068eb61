//! End-to-end behaviour of the `ptosis` binary.

use std::path::Path;
use std::process::{Command, Output};

use ptosis_core::image::{crop_eye_region, mirror_horizontal, DEFAULT_CROP_MARGIN};
use ptosis_core::Side;
use ptosis_tools::commands::fit::observation;
use ptosis_tools::landmarks::LandmarkFile;
use ptosis_tools::model_file::ModelFile;
use ptosis_tools::report::DiagnosisReport;
use ptosis_tools::{pgm, stack_file, tables};
use serde_json::Value;

fn ptosis(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptosis"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = ptosis(dir, args);
    assert!(
        out.status.success(),
        "ptosis {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Temp dir with a 30-eye suite in `suite/` and its features in `features.csv`.
fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--n", "30", "--seed", "4", "--out", "suite"]);
    ok(dir.path(), &["measure", "--suite", "suite", "--out", "features.csv"]);
    dir
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&ptosis(dir.path(), &["--help"])), 0);
    assert_eq!(code(&ptosis(dir.path(), &["--version"])), 0);
    assert_eq!(code(&ptosis(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&ptosis(dir.path(), &["fit", "x.csv"])), 2);
    assert_eq!(code(&ptosis(dir.path(), &["synth", "--n", "0", "--out", "s"])), 2);
    assert_eq!(code(&ptosis(dir.path(), &["measure", "--landmarks", "missing.json"])), 4);
}

#[test]
fn missing_iris_point_is_an_input_error() {
    let dir = fixture();
    let path = dir.path().join("suite/0000.landmarks.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["eyes"][0]["iris"].as_array_mut().unwrap().pop();
    std::fs::write(dir.path().join("bad.landmarks.json"), doc.to_string()).unwrap();
    let out = ptosis(
        dir.path(),
        &["measure", "--landmarks", "bad.landmarks.json", "--image", "suite/0000.pgm"],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.landmarks.json"));
}

#[test]
fn malformed_header_and_single_class() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "mrd1,ir,label\n1,2,1\n").unwrap();
    let out = ptosis(dir.path(), &["fit", "bad.csv", "--model", "tree", "--out", "m.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:1"));

    std::fs::write(
        dir.path().join("one.csv"),
        "p_deep,mrd1_mm,iris_ratio_pct,label\n,1.0,70,1\n,0.5,60,1\n,1.5,75,1\n",
    )
    .unwrap();
    let out = ptosis(dir.path(), &["fit", "one.csv", "--model", "threshold-ir", "--out", "m.json"]);
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn iris_diameter_flag_rescales_millimetres() {
    let dir = fixture();
    let lm = "suite/0003.landmarks.json";
    ok(dir.path(), &["measure", "--landmarks", lm, "--out", "a.json"]);
    ok(dir.path(), &["measure", "--landmarks", lm, "--iris-mm", "12.2", "--out", "b.json"]);
    let (a, _) = DiagnosisReport::load(&dir.path().join("a.json")).unwrap();
    let (b, _) = DiagnosisReport::load(&dir.path().join("b.json")).unwrap();
    let (ea, eb) = (&a.eyes[0], &b.eyes[0]);
    assert_eq!(ea.mrd1_px, eb.mrd1_px);
    assert!((eb.mrd1_mm / ea.mrd1_mm - 12.2 / 11.7).abs() < 1e-9);
    assert!(a.eyes[0].prediction.is_none());
}

#[test]
fn tree_round_trip_matches_in_process_prediction() {
    let dir = fixture();
    ok(dir.path(), &["fit", "features.csv", "--model", "tree", "--out", "tree.json"]);
    ok(dir.path(), &["classify", "features.csv", "--model", "tree.json", "--out", "pred.csv"]);
    let model = ModelFile::load(&dir.path().join("tree.json")).unwrap();
    let rows = tables::load_features(&dir.path().join("features.csv")).unwrap();
    let preds = tables::load_predictions(&dir.path().join("pred.csv")).unwrap();
    assert_eq!(rows.len(), preds.len());
    for (r, p) in rows.iter().zip(&preds) {
        let want = model.model.predict(&observation(r)).unwrap();
        assert_eq!(r.id.as_deref(), Some(p.id.as_str()));
        assert_eq!(p.prediction, want.label);
        assert_eq!(p.score, Some(want.score));
        assert_eq!(p.decision_path.as_deref(), Some("clinical-only"));
    }
}

#[test]
fn eval_tables_and_id_mismatch() {
    let dir = fixture();
    ok(dir.path(), &["fit", "features.csv", "--model", "threshold-mrd1", "--out", "t.json"]);
    ok(dir.path(), &["classify", "features.csv", "--model", "t.json", "--out", "mrd1.csv"]);
    let out = ok(dir.path(), &["eval", "mrd1.csv", "--truth", "suite/truth.csv", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("method,n,accuracy,precision,recall,f1,roc_auc\nmrd1,30,"));

    let full = std::fs::read_to_string(dir.path().join("mrd1.csv")).unwrap();
    let unscored: String = full
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let c: Vec<&str> = l.split(',').collect();
            if i == 0 {
                "id,prediction,score\n".to_string()
            } else {
                format!("{},{},\n", c[0], c[1])
            }
        })
        .collect();
    std::fs::write(dir.path().join("bare.csv"), unscored).unwrap();
    let out = ok(dir.path(), &["eval", "bare.csv", "--truth", "suite/truth.csv", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().lines().nth(1).unwrap().ends_with(",n/a"));

    let short: String = full.lines().take(10).map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.path().join("short.csv"), short).unwrap();
    let out = ptosis(dir.path(), &["eval", "short.csv", "--truth", "suite/truth.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn fusion_paths_in_a_report() {
    let dir = fixture();
    ok(dir.path(), &["fit", "features.csv", "--model", "logistic", "--out", "lr.json"]);
    ok(dir.path(), &["measure", "--landmarks", "suite/0001.landmarks.json", "--out", "r.json"]);
    let (report, _) = DiagnosisReport::load(&dir.path().join("r.json")).unwrap();
    let side = report.eyes[0].side.as_str();
    for (probs, expected) in [("0.1,0.2,0.1,0.2,0.15", "deep"), ("0.5,0.6,0.4,0.5,0.5", "deferred")] {
        std::fs::write(dir.path().join("p.csv"), format!("side,p1,p2,p3,p4,p5\n{side},{probs}\n")).unwrap();
        ok(dir.path(), &["classify", "r.json", "--model", "lr.json", "--p-deep", "p.csv", "--out", "c.json"]);
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
        assert_eq!(doc["eyes"][0]["decision_path"], expected);
    }
    ok(dir.path(), &["classify", "r.json", "--model", "lr.json", "--out", "plain.json"]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plain.json")).unwrap()).unwrap();
    assert_eq!(doc["eyes"][0]["decision_path"], "clinical-only");
    let out = ptosis(dir.path(), &["classify", "r.json", "--model", "lr.json", "--fusion", "0.8", "0.2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn feature_stacks_mirror_right_eyes() {
    let dir = fixture();
    let mut seen = [false, false];
    for i in 0..30 {
        let lm_path = dir.path().join(format!("suite/{i:04}.landmarks.json"));
        let doc = LandmarkFile::load(&lm_path).unwrap();
        let lm = doc.eyes[0].to_landmarks();
        let slot = usize::from(lm.side == Side::Right);
        if seen[slot] {
            continue;
        }
        seen[slot] = true;
        let out_dir = format!("stack{i}");
        ok(
            dir.path(),
            &["features", "--landmarks", lm_path.to_str().unwrap(), "--out", &out_dir, "--format", "pgm"],
        );
        let img = pgm::decode(&std::fs::read(dir.path().join(format!("suite/{i:04}.pgm"))).unwrap()).unwrap();
        let crop = crop_eye_region(&img, &lm.outline(), DEFAULT_CROP_MARGIN).unwrap().image;
        let expected = if lm.side == Side::Right { mirror_horizontal(&crop) } else { crop };
        let side = lm.side.as_str();
        let gray = pgm::decode(&std::fs::read(dir.path().join(format!("{out_dir}/{side}.0-grayscale.pgm"))).unwrap()).unwrap();
        assert_eq!(gray, expected);
        assert!(dir.path().join(format!("{out_dir}/{side}.6-dog.pgm")).exists());

        ok(dir.path(), &["features", "--landmarks", lm_path.to_str().unwrap(), "--out", &out_dir]);
        let (header, planes) = stack_file::decode(&std::fs::read(dir.path().join(format!("{out_dir}/{side}.fstack"))).unwrap()).unwrap();
        assert_eq!(header.channels, 7);
        assert_eq!(planes[0], expected);
    }
    assert_eq!(seen, [true, true]);
}
