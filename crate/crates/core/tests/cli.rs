use std::path::Path;
use std::process::Command;

use cslbp::svm::{save_model, SvmModel};
use cslbp::synth::{generate_corpus, write_corpus, SynthConfig};
use cslbp::GrayImage;

fn cslbp(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cslbp"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cslbp(&["frobnicate"]).0, 2);
    assert_eq!(cslbp(&["detect", "--no-such-flag"]).0, 2);
    assert_eq!(
        cslbp(&["train", "--feature", "sift", "--dataset", "x", "-o", "y"]).0,
        2
    );
}

#[test]
fn help_lists_parameter_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_cslbp"))
        .args(["train", "--help"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "0.022",
        "--sigma",
        "[default: 16]",
        "[default: 32]",
        "1.09",
        "l1sqrt",
        "--hard-mining",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn blank_image_with_negative_bias_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("blank.png");
    GrayImage::filled(160, 240, 0.5)
        .unwrap()
        .save(&img)
        .unwrap();
    let model = dir.path().join("m.txt");
    save_model(&model, &SvmModel::linear(vec![0.0; 1344], -1.0)).unwrap();
    let out = dir.path().join("dets.csv");
    let (code, err) = cslbp(&["detect", s(&img), "--model", s(&model), "-o", s(&out)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "image,x,y,w,h,score\n"
    );
    assert!(dir.path().join("dets.csv.manifest.json").exists());
}

#[test]
fn length_mismatch_is_a_configuration_error_and_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("blank.png");
    GrayImage::filled(64, 128, 0.5).unwrap().save(&img).unwrap();
    let model = dir.path().join("m.txt");
    save_model(&model, &SvmModel::linear(vec![0.0; 2720], -1.0)).unwrap();
    let out = dir.path().join("dets.csv");
    let (code, err) = cslbp(&["detect", s(&img), "--model", s(&model), "-o", s(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("configuration"), "{err}");
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn distrib_of_flat_image_is_all_code_zero() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("flat.png");
    GrayImage::filled(40, 40, 0.3).unwrap().save(&img).unwrap();
    let out = dir.path().join("d.csv");
    assert_eq!(cslbp(&["distrib", s(&img), "-o", s(&out)]).0, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next().unwrap(), "0,0000,true,100.0000");
    assert!(lines.all(|l| l.ends_with(",0.0000")));
}

#[test]
fn extract_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let windows = cslbp::synth::figure_windows(3, 9).unwrap();
    let mut inputs = Vec::new();
    for (i, w) in windows.iter().enumerate() {
        let p = dir.path().join(format!("w{i}.png"));
        w.save(&p).unwrap();
        inputs.push(p);
    }
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let mut args = vec![
            "--workers",
            workers,
            "extract",
            "--feature",
            "pyr-csltp",
            "-o",
            s(&out),
        ];
        args.extend(inputs.iter().map(|p| s(p)));
        assert_eq!(cslbp(&args).0, 0);
        std::fs::read(&out).unwrap()
    };
    assert_eq!(run("1", "a.txt"), run("4", "b.txt"));
}

#[test]
fn train_detect_eval_recovers_planted_figures() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let corpus = generate_corpus(&SynthConfig {
        images: 12,
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap();
    write_corpus(&corpus, &data).unwrap();
    let model = dir.path().join("model.txt");
    let (code, err) = cslbp(&[
        "train",
        "--dataset",
        s(&data),
        "-o",
        s(&model),
        "--hard-mining",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0, "{err}");
    let manifest =
        cslbp::manifest::RunManifest::read(&dir.path().join("model.txt.manifest.json")).unwrap();
    assert_eq!(manifest.subcommand, "train");
    assert_eq!(manifest.seed, 3);

    let dets = dir.path().join("dets.csv");
    let pos = data.join("pos");
    let neg = data.join("neg");
    let (code, err) = cslbp(&[
        "detect",
        s(&pos),
        s(&neg),
        "--model",
        s(&model),
        "-o",
        s(&dets),
    ]);
    assert_eq!(code, 0, "{err}");
    let found = cslbp::eval::read_detections_csv(&dets).unwrap();
    let first = corpus.iter().find(|c| !c.boxes.is_empty()).unwrap();
    let hit = found
        .iter()
        .filter(|(id, _)| *id == first.name)
        .any(|(_, d)| first.boxes.iter().any(|b| b.iou(&d.bbox) > 0.5));
    assert!(
        hit,
        "no detection overlaps the planted box in {}",
        first.name
    );

    let curve = dir.path().join("curve.csv");
    let svg = dir.path().join("curve.svg");
    let (code, err) = cslbp(&[
        "eval",
        "--detections",
        s(&dets),
        "--dataset",
        s(&data),
        "-o",
        s(&curve),
        "--svg",
        s(&svg),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}
