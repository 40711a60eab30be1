//! The `cslbp` command-line front end.
//!
//! Every subcommand writes its outputs through a temporary file that is
//! renamed into place on success, and a `<output>.manifest.json` recording
//! the parameters of the run.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dense::{DenseConfig, NormScheme};
use crate::detect::{mine_hard_negatives, Detector, Pipeline, ScanConfig};
use crate::error::{Error, Result};
use crate::eval::{
    curves_svg, fppi_curve, image_id, load_dataset, read_detections_csv, score_thresholds,
    write_curve_csv, write_detections_csv, ImageResult,
};
use crate::features::{write_records, DescriptorRecord, FeatureKind};
use crate::image::{load_gray, GrayImage};
use crate::manifest::RunManifest;
use crate::patterns::{
    pattern_distribution, uniform_bin_of, uniform_mass, Family, PatternConfig, UNIFORM_CS_LBP_CODES,
};
use crate::pyramid::PyramidConfig;
use crate::svm::{load_model, write_model, KernelKind};
use crate::sweep::{default_grid, sweep_harness, SweepOptions};
use crate::training::{
    jittered_positive_windows, random_negative_windows, train_detector, TrainingConfig,
};
use crate::{WINDOW_HEIGHT, WINDOW_WIDTH};

const WINDOW: (usize, usize) = (WINDOW_WIDTH, WINDOW_HEIGHT);

#[derive(Parser, Debug)]
#[command(
    name = "cslbp",
    version,
    about = "CS-LBP/CS-LTP features, intersection-kernel SVMs and sliding-window detection"
)]
struct Cli {
    /// Worker threads for parallel stages (0 = all cores). Output does not
    /// depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe 64x128 window images and write one descriptor record per window.
    Extract(ExtractArgs),
    /// Train a detector on a dataset directory (pos/, neg/, annotations/).
    Train(TrainArgs),
    /// Collect false positives of a model on the dataset's object-free images.
    Mine(MineArgs),
    /// Run multiscale detection and write a detection CSV.
    Detect(DetectArgs),
    /// Match detections against ground truth and write an FPPI curve.
    Eval(EvalArgs),
    /// Compare dense-descriptor configurations on per-window ROC.
    Sweep(SweepArgs),
    /// Tabulate CS-LBP pattern frequencies over images.
    Distrib(DistribArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FeatureName {
    DenseCslbp,
    PyrCslbp,
    PyrUcslbp,
    PyrCsltp,
    PyrUcsltp,
}

impl FeatureName {
    fn name(self) -> &'static str {
        match self {
            FeatureName::DenseCslbp => "dense-cslbp",
            FeatureName::PyrCslbp => "pyr-cslbp",
            FeatureName::PyrUcslbp => "pyr-ucslbp",
            FeatureName::PyrCsltp => "pyr-csltp",
            FeatureName::PyrUcsltp => "pyr-ucsltp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NormName {
    None,
    L1,
    L1sqrt,
    L1sqrtElem,
    L2,
    L2hys,
}

impl From<NormName> for NormScheme {
    fn from(n: NormName) -> Self {
        match n {
            NormName::None => NormScheme::None,
            NormName::L1 => NormScheme::L1,
            NormName::L1sqrt => NormScheme::L1Sqrt,
            NormName::L1sqrtElem => NormScheme::L1SqrtElem,
            NormName::L2 => NormScheme::L2,
            NormName::L2hys => NormScheme::L2Hys,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KernelName {
    Linear,
    Hik,
}

/// Descriptor parameters shared by every subcommand that describes windows.
#[derive(Args, Debug, Clone)]
struct FeatureArgs {
    /// Window descriptor.
    #[arg(long, value_enum, default_value = "dense-cslbp")]
    feature: FeatureName,
    /// Pattern threshold on the [0, 1] graylevel scale.
    #[arg(long, default_value_t = 0.022)]
    t: f64,
    /// Gaussian block weighting sigma in pixels (dense); 0 disables it.
    #[arg(long, default_value_t = 16.0)]
    sigma: f64,
    /// Block side in pixels (dense).
    #[arg(long, default_value_t = 32)]
    block: usize,
    /// Cell side in pixels (dense).
    #[arg(long, default_value_t = 16)]
    cell: usize,
    /// Block stride in pixels (dense).
    #[arg(long, default_value_t = 16)]
    stride: usize,
    /// Block normalization (dense).
    #[arg(long, value_enum, default_value = "l1sqrt")]
    norm: NormName,
    /// Vote into the nearest cell only instead of bilinear cell shares (dense).
    #[arg(long)]
    no_interpolation: bool,
}

impl FeatureArgs {
    fn feature(&self) -> Result<FeatureKind> {
        Ok(match FeatureKind::from_name(self.feature.name())? {
            FeatureKind::Dense(_) => {
                let d = DenseConfig::default();
                let cfg = DenseConfig {
                    block: self.block,
                    cell: self.cell,
                    block_stride: self.stride,
                    gaussian_sigma: (self.sigma > 0.0).then_some(self.sigma),
                    norm: self.norm.into(),
                    interpolate: !self.no_interpolation,
                    pattern: PatternConfig {
                        t: self.t,
                        ..d.pattern
                    },
                    ..d
                };
                cfg.validate()?;
                FeatureKind::Dense(cfg)
            }
            FeatureKind::Pyramid(p) => {
                let cfg = PyramidConfig { t: self.t, ..p };
                cfg.validate()?;
                FeatureKind::Pyramid(cfg)
            }
        })
    }
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    /// Window step in pixels.
    #[arg(long, default_value_t = 8)]
    step: usize,
    /// Ratio between successive pyramid scales (1.0905 is also accepted).
    #[arg(long, default_value_t = 1.09)]
    scale_factor: f64,
    /// Report windows scoring strictly above this.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    threshold: f64,
    /// NMS suppresses boxes overlapping a kept box by more than this IoU.
    #[arg(long, default_value_t = 0.5)]
    nms_overlap: f64,
}

impl ScanArgs {
    fn scan(&self) -> Result<ScanConfig> {
        let s = ScanConfig {
            step: self.step,
            scale_factor: self.scale_factor,
            score_threshold: self.threshold,
            nms_overlap: self.nms_overlap,
            ..ScanConfig::default()
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Window images, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    feature: FeatureArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset root with pos/, neg/ and annotations/.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    feature: FeatureArgs,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelName,
    /// SVM box constraint.
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    /// SMO stopping tolerance.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Retrain once with false positives mined from neg/.
    #[arg(long)]
    hard_mining: bool,
    /// Random negative windows per object-free image.
    #[arg(long, default_value_t = 10)]
    negatives_per_image: usize,
    /// Most mined windows added to the negatives.
    #[arg(long, default_value_t = 1000)]
    mining_cap: usize,
    /// Extra jittered copies per positive box.
    #[arg(long, default_value_t = 0)]
    jitter: usize,
    #[command(flatten)]
    scan: ScanArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Output directory for the mined windows and their index.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    feature: FeatureArgs,
    #[arg(long, default_value_t = 1000)]
    cap: usize,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Images, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    feature: FeatureArgs,
    /// Second model whose scores are averaged with the first.
    #[arg(long)]
    combine: Option<PathBuf>,
    /// Descriptor of the --combine model.
    #[arg(long, value_enum, default_value = "pyr-cslbp")]
    combine_feature: FeatureName,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Detection CSV from `detect`.
    #[arg(long)]
    detections: PathBuf,
    /// Dataset whose pos/ and neg/ images were scanned.
    #[arg(long)]
    dataset: PathBuf,
    /// Curve CSV.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Random negative windows per object-free image.
    #[arg(long, default_value_t = 20)]
    negatives_per_image: usize,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    /// False-positive rate at which configurations are compared.
    #[arg(long, default_value_t = 0.01)]
    fpr: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DistribArgs {
    /// Images, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.022)]
    t: f64,
}

/// A file written under a temporary name and renamed on commit. Dropping
/// it uncommitted removes the partial file.
struct AtomicFile {
    tmp: PathBuf,
    dest: PathBuf,
    committed: bool,
}

impl AtomicFile {
    fn new(dest: &Path) -> Result<Self> {
        if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut name = dest
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_default();
        name.push(format!(".partial-{}", std::process::id()));
        Ok(AtomicFile {
            tmp: dest.with_file_name(name),
            dest: dest.to_path_buf(),
            committed: false,
        })
    }

    fn write_with(
        &self,
        f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
    ) -> Result<()> {
        let file = std::fs::File::create(&self.tmp).map_err(|e| Error::io(&self.tmp, e))?;
        let mut w = std::io::BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|e| Error::io(&self.tmp, e))
    }

    fn commit(mut self) -> Result<()> {
        std::fs::rename(&self.tmp, &self.dest).map_err(|e| Error::io(&self.dest, e))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for AtomicFile {
    fn drop(&mut self) {
        if !self.committed {
            let _ = std::fs::remove_file(&self.tmp);
        }
    }
}

fn write_output(
    dest: &Path,
    f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
) -> Result<()> {
    let a = AtomicFile::new(dest)?;
    a.write_with(f)?;
    a.commit()
}

fn write_manifest(output: &Path, m: &RunManifest) -> Result<()> {
    let path = RunManifest::path_for(output);
    let text = serde_json::to_string_pretty(m).map_err(|e| Error::invalid(e.to_string()))? + "\n";
    write_output(&path, |w| {
        w.write_all(text.as_bytes())
            .map_err(|e| Error::io(&path, e))
    })
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.is_file()
                        && f.extension().and_then(|e| e.to_str()).is_some_and(|e| {
                            ["png", "pgm", "ppm", "pnm", "jpg", "jpeg"]
                                .contains(&e.to_ascii_lowercase().as_str())
                        })
                })
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("no input images found"));
    }
    Ok(out)
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

type Annotated = Vec<(GrayImage, Vec<crate::detect::BBox>)>;

fn load_positive_images(root: &Path) -> Result<(Annotated, Vec<GrayImage>)> {
    let ds = load_dataset(root)?;
    let pos = ds
        .positives
        .iter()
        .map(|a| Ok((load_gray(&a.path)?, a.boxes.clone())))
        .collect::<Result<Vec<_>>>()?;
    let neg = ds
        .negatives
        .iter()
        .map(load_gray)
        .collect::<Result<Vec<_>>>()?;
    Ok((pos, neg))
}

fn cmd_extract(a: &ExtractArgs) -> Result<()> {
    let feature = a.feature.feature()?;
    let files = expand_inputs(&a.inputs)?;
    let hash = feature.config_hash();
    let records = files
        .iter()
        .map(|f| {
            Ok(DescriptorRecord {
                window_id: image_id(f),
                config_hash: hash.clone(),
                values: feature.describe(&load_gray(f)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_output(&a.out, |w| {
        write_records(w, &records).map_err(|e| Error::io(&a.out, e))
    })?;
    let mut m = RunManifest::new(
        "extract",
        json!({ "feature": to_value(&feature), "config_hash": hash }),
        0,
    );
    m.inputs = files;
    m.outputs = vec![a.out.clone()];
    write_manifest(&a.out, &m)
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let feature = a.feature.feature()?;
    let (pos_images, neg_images) = load_positive_images(&a.dataset)?;
    let positives = jittered_positive_windows(&pos_images, WINDOW, a.jitter, 0.04, 0.04, a.seed)?;
    let scan = a.scan.scan()?;
    let negatives =
        random_negative_windows(&neg_images, a.negatives_per_image, WINDOW, &scan, a.seed)?;
    let kernel = match a.kernel {
        KernelName::Linear => KernelKind::Linear,
        KernelName::Hik => KernelKind::Hik,
    };
    let cfg = TrainingConfig {
        c: a.c,
        tol: a.tol,
        negatives_per_image: a.negatives_per_image,
        hard_mining: a.hard_mining,
        mining_cap: a.mining_cap,
        mining_scan: scan,
        seed: a.seed,
        ..TrainingConfig::new(kernel)
    };
    let trained = train_detector(&feature, &positives, &negatives, &neg_images, &cfg)?;
    for (i, s) in trained.stages.iter().enumerate() {
        eprintln!(
            "stage {}: {} positives, {} negatives, {} support vectors, {} iterations",
            i + 1,
            s.positives,
            s.negatives,
            s.solver.support_vectors,
            s.solver.iterations
        );
    }
    write_output(&a.out, |w| {
        write_model(w, &trained.pipeline.model).map_err(|e| Error::io(&a.out, e))
    })?;
    let mut m = RunManifest::new(
        "train",
        json!({
            "feature": to_value(&feature),
            "training": to_value(&cfg),
            "jitter": a.jitter,
            "mined": trained.mined,
        }),
        a.seed,
    );
    m.inputs = vec![a.dataset.clone()];
    m.outputs = vec![a.out.clone()];
    write_manifest(&a.out, &m)
}

fn cmd_mine(a: &MineArgs) -> Result<()> {
    let feature = a.feature.feature()?;
    let model = load_model(&a.model)?;
    let detector = Detector::single(Pipeline::new(feature.clone(), model)?);
    let ds = load_dataset(&a.dataset)?;
    let negs = ds
        .negatives
        .iter()
        .map(load_gray)
        .collect::<Result<Vec<_>>>()?;
    let scan = a.scan.scan()?;
    let mined = mine_hard_negatives(&detector, &negs, &scan, a.cap)?;

    let mut staging = a.out.clone().into_os_string();
    staging.push(format!(".partial-{}", std::process::id()));
    let staging = PathBuf::from(staging);
    let result = (|| {
        std::fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        let index = staging.join("index.csv");
        let mut rows = String::from("window,image,level,x,y,score\n");
        for (i, w) in mined.iter().enumerate() {
            let name = format!("mined{i:05}.png");
            w.window.save(staging.join(&name))?;
            rows.push_str(&format!(
                "{name},{},{},{},{},{}\n",
                image_id(&ds.negatives[w.image_index]),
                w.level,
                w.x,
                w.y,
                w.score
            ));
        }
        std::fs::write(&index, rows).map_err(|e| Error::io(&index, e))?;
        if a.out.exists() {
            std::fs::remove_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
        }
        std::fs::rename(&staging, &a.out).map_err(|e| Error::io(&a.out, e))
    })();
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&staging);
        return result;
    }
    let mut m = RunManifest::new(
        "mine",
        json!({ "feature": to_value(&feature), "scan": to_value(&scan), "cap": a.cap, "mined": mined.len() }),
        0,
    );
    m.inputs = vec![a.dataset.clone(), a.model.clone()];
    m.outputs = vec![a.out.clone()];
    write_manifest(&a.out, &m)
}

fn cmd_detect(a: &DetectArgs) -> Result<()> {
    let feature = a.feature.feature()?;
    let first = Pipeline::new(feature.clone(), load_model(&a.model)?)?;
    let mut config = json!({ "feature": to_value(&feature) });
    let detector = match &a.combine {
        Some(path) => {
            let f2 = FeatureArgs {
                feature: a.combine_feature,
                ..a.feature.clone()
            }
            .feature()?;
            config["combine_feature"] = to_value(&f2);
            Detector::combined(first, Pipeline::new(f2, load_model(path)?)?)?
        }
        None => Detector::single(first),
    };
    let scan = a.scan.scan()?;
    config["scan"] = to_value(&scan);
    let files = expand_inputs(&a.inputs)?;
    let mut rows = Vec::new();
    for f in &files {
        let img = load_gray(f)?;
        let id = image_id(f);
        rows.extend(
            detector
                .detect(&img, &scan)?
                .into_iter()
                .map(|d| (id.clone(), d)),
        );
    }
    write_output(&a.out, |w| write_detections_csv(w, &rows))?;
    let mut m = RunManifest::new("detect", config, 0);
    m.inputs = files;
    m.inputs.push(a.model.clone());
    m.inputs.extend(a.combine.clone());
    m.outputs = vec![a.out.clone()];
    write_manifest(&a.out, &m)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let ds = load_dataset(&a.dataset)?;
    let dets = read_detections_csv(&a.detections)?;
    let mut images: Vec<(String, ImageResult)> = ds
        .positives
        .iter()
        .map(|p| {
            (
                p.id(),
                ImageResult {
                    detections: Vec::new(),
                    ground_truth: p.boxes.clone(),
                },
            )
        })
        .chain(
            ds.negatives
                .iter()
                .map(|n| (image_id(n), ImageResult::default())),
        )
        .collect();
    for (id, d) in dets {
        match images.iter_mut().find(|(i, _)| *i == id) {
            Some((_, r)) => r.detections.push(d),
            None => {
                return Err(Error::invalid(format!(
                    "detection for unknown image '{id}'"
                )))
            }
        }
    }
    let results: Vec<ImageResult> = images.into_iter().map(|(_, r)| r).collect();
    let mut thresholds = score_thresholds(&results);
    thresholds.insert(0, f64::INFINITY);
    let curve = fppi_curve(&results, &thresholds)?;
    write_output(&a.out, |w| write_curve_csv(w, &curve))?;
    if let Some(svg) = &a.svg {
        let text = curves_svg(&[("detector", &curve)]);
        write_output(svg, |w| {
            w.write_all(text.as_bytes()).map_err(|e| Error::io(svg, e))
        })?;
    }
    let mut m = RunManifest::new("eval", json!({ "match_iou": 0.5 }), 0);
    m.inputs = vec![a.detections.clone(), a.dataset.clone()];
    m.outputs = std::iter::once(a.out.clone())
        .chain(a.svg.clone())
        .collect();
    write_manifest(&a.out, &m)
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let (pos_images, neg_images) = load_positive_images(&a.dataset)?;
    let positives = jittered_positive_windows(&pos_images, WINDOW, 0, 0.0, 0.0, a.seed)?;
    let negatives = random_negative_windows(
        &neg_images,
        a.negatives_per_image,
        WINDOW,
        &ScanConfig::default(),
        a.seed,
    )?;
    let opts = SweepOptions {
        c: a.c,
        fpr: a.fpr,
        seed: a.seed,
        ..SweepOptions::default()
    };
    let grid = default_grid();
    let rows = sweep_harness(&positives, &negatives, &grid, &opts)?;
    write_output(&a.out, |w| {
        let mut cw = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::invalid(e.to_string());
        cw.write_record([
            "config",
            "block",
            "cell",
            "stride",
            "sigma",
            "interpolate",
            "norm",
            "rate_at_fpr",
        ])
        .map_err(err)?;
        for r in &rows {
            let c = &r.config;
            cw.write_record([
                r.name.clone(),
                c.block.to_string(),
                c.cell.to_string(),
                c.block_stride.to_string(),
                c.gaussian_sigma.map_or("none".into(), |s| s.to_string()),
                c.interpolate.to_string(),
                c.norm.name().to_string(),
                r.rate.to_string(),
            ])
            .map_err(err)?;
        }
        cw.flush().map_err(|e| Error::io(&a.out, e))
    })?;
    for r in &rows {
        println!("{:<20} {:.4}", r.name, r.rate);
    }
    let mut m = RunManifest::new(
        "sweep",
        json!({ "options": to_value(&opts), "negatives_per_image": a.negatives_per_image }),
        a.seed,
    );
    m.inputs = vec![a.dataset.clone()];
    m.outputs = vec![a.out.clone()];
    write_manifest(&a.out, &m)
}

fn cmd_distrib(a: &DistribArgs) -> Result<()> {
    let files = expand_inputs(&a.inputs)?;
    let images = files.iter().map(load_gray).collect::<Result<Vec<_>>>()?;
    let cfg = PatternConfig {
        t: a.t,
        ..PatternConfig::with_family(Family::CsLbp)
    };
    let dist = pattern_distribution(&images, &cfg)?;
    let mass = uniform_mass(&dist);
    write_output(&a.out, |w| {
        let mut cw = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::invalid(e.to_string());
        cw.write_record(["code", "bits", "uniform", "percent"])
            .map_err(err)?;
        for (code, p) in dist.iter().enumerate() {
            cw.write_record([
                code.to_string(),
                format!("{code:04b}"),
                (uniform_bin_of(code as u32) < UNIFORM_CS_LBP_CODES.len()).to_string(),
                format!("{:.4}", 100.0 * p),
            ])
            .map_err(err)?;
        }
        cw.flush().map_err(|e| Error::io(&a.out, e))
    })?;
    println!("uniform mass: {:.2}%", 100.0 * mass);
    let mut m = RunManifest::new(
        "distrib",
        json!({ "pattern": to_value(&cfg), "uniform_mass": mass }),
        0,
    );
    m.inputs = files;
    m.outputs = vec![a.out.clone()];
    write_manifest(&a.out, &m)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Extract(a) => cmd_extract(a),
        Command::Train(a) => cmd_train(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Distrib(a) => cmd_distrib(a),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status: 0 on success, 1 on a failed run, 2 on bad usage.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
    {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => Err(Error::config(e.to_string())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
