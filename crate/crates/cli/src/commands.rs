//! Subcommand implementations. Each one is a thin wrapper over library calls.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hoicap::capture::sequence::{load_poses, save_poses};
use hoicap::capture::markers::{load_markers, save_markers};
use hoicap::capture::{estimate_axis, solve_sequence, FramePose, SolverSettings};
use hoicap::fields::io::{load_fields, save_fields, SequenceFields};
use hoicap::fields::{frame_contacts, frame_fields, heatmap_meshes, heatmaps_from_contacts, ContactHeatmap};
use hoicap::geometry::isometry;
use hoicap::metrics::{default_alphas, evaluate_split, EvalManifest, ManifestEntry, SequenceMeta};
use hoicap::models::assets::{write_json, BUNDLE_FILES};
use hoicap::models::AssetBundle;
use hoicap::synth::{generate_assets, generate_sequence, SynthConfig};

use crate::run::RunManifest;
use crate::{Command, Failure, OutputOpts};

/// Environment variable naming the directory searched for `synth.json`.
pub const CONFIG_DIR_ENV: &str = "HOICAP_CONFIG_DIR";
const VIEWS: u32 = 9;

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Synth {
            config,
            out,
            seed,
            frames,
            binary,
            output,
        } => synth(config, &out, seed, frames, binary, &output),
        Command::Solve {
            assets,
            markers,
            out,
            max_iterations,
            output,
        } => solve(&assets, &markers, &out, max_iterations, &output),
        Command::Fields {
            assets,
            poses,
            out,
            dmax,
            binary,
            output,
        } => fields(&assets, &poses, &out, dmax, binary, &output),
        Command::Eval {
            gt,
            pred,
            assets,
            protocol,
            out,
            output,
        } => eval(&gt, &pred, assets.as_deref(), protocol, &out, &output),
        Command::Heatmap {
            assets,
            poses,
            out,
            threshold,
            dmax,
            output,
        } => heatmap(&assets, &poses, &out, threshold, dmax, &output),
        Command::Axis { poses, out, output } => axis(&poses, &out, &output),
        Command::Validate { paths } => validate(&paths),
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Data)
}

fn load_assets(path: &Path) -> Result<AssetBundle<f64>, Failure> {
    Ok(AssetBundle::load(path)?)
}

fn resolve_config(explicit: Option<&Path>) -> Result<(SynthConfig, Option<PathBuf>), Failure> {
    if let Some(p) = explicit {
        return Ok((SynthConfig::load(p)?, Some(p.to_path_buf())));
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let p = PathBuf::from(dir).join("synth.json");
        if p.exists() {
            return Ok((SynthConfig::load(&p)?, Some(p)));
        }
    }
    Ok((SynthConfig::default(), None))
}

/// Fields for every frame, computed in parallel; identical to the sequential library call.
fn par_fields(assets: &AssetBundle<f64>, poses: &[FramePose<f64>], d_max: f64) -> Result<SequenceFields<f64>, Failure> {
    let frames = poses
        .par_iter()
        .map(|p| frame_fields(assets, p, d_max))
        .collect::<hoicap::Result<Vec<_>>>()?;
    Ok(SequenceFields { d_max, frames })
}

fn field_outputs(path: &Path, binary: bool) -> Vec<PathBuf> {
    let mut out = vec![path.to_path_buf()];
    if binary {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("fields");
        for name in hoicap::metrics::FIELD_NAMES {
            out.push(path.with_file_name(format!("{stem}.{name}.f32")));
        }
    }
    out
}

fn synth(config: Option<PathBuf>, out: &Path, seed: Option<u64>, frames: Option<usize>, binary: bool, opts: &OutputOpts) -> CmdResult {
    let (mut cfg, source) = resolve_config(config.as_deref())?;
    let mut run = RunManifest::new("synth", out.join("run.json"));
    if let Some(p) = &source {
        run.input(p);
    }
    if let Some(s) = seed {
        cfg.seed = s;
        run.set("seed", s);
    }
    if let Some(n) = frames {
        cfg.frame_count = n;
        run.set("frame_count", n);
    }
    cfg.validate()?;
    run.seed = Some(cfg.seed);
    run.set("binary", binary);

    let assets_dir = out.join("assets");
    for f in BUNDLE_FILES {
        run.output(assets_dir.join(f));
    }
    let names = ["config.json", "markers.json", "gt_poses.json"];
    for n in names {
        run.output(out.join(n));
    }
    let gt_fields = out.join("gt_fields.json");
    for p in field_outputs(&gt_fields, binary) {
        run.output(p);
    }
    run.output(out.join("gt_manifest.json"));
    run.output(out.join("manifest.json"));
    run.guard(opts.force)?;
    create_dir(out)?;

    let assets = generate_assets::<f64>(&cfg)?;
    let seq = generate_sequence(&assets, &cfg)?;
    assets.save(&assets_dir, 0)?;
    write_json(&out.join("config.json"), &cfg)?;
    save_markers(&seq.markers, out.join("markers.json"))?;
    save_poses(&seq.ground_truth, out.join("gt_poses.json"))?;
    let fields = par_fields(&assets, &seq.ground_truth, hoicap::fields::DEFAULT_D_MAX)?;
    save_fields(&fields, &gt_fields, binary)?;

    let manifest = |poses: &str, fields: &str| EvalManifest {
        sequences: (0..VIEWS)
            .map(|view| ManifestEntry {
                meta: SequenceMeta {
                    view,
                    ..seq.meta.clone()
                },
                poses: poses.into(),
                fields: Some(fields.into()),
                assets: Some("assets".into()),
            })
            .collect(),
    };
    manifest("gt_poses.json", "gt_fields.json").save(out.join("gt_manifest.json"))?;
    manifest("poses.json", "fields.json").save(out.join("manifest.json"))?;
    run.write()?;
    eprintln!(
        "synth: {} frames, {} markers, seed {} -> {}",
        cfg.frame_count,
        seq.markers.correspondences.len(),
        cfg.seed,
        out.display()
    );
    Ok(())
}

fn solve(assets: &Path, markers: &Path, out: &Path, max_iterations: usize, opts: &OutputOpts) -> CmdResult {
    let mut run = RunManifest::new("solve", RunManifest::beside(out));
    run.input(assets);
    run.input(markers);
    run.output(out.to_path_buf());
    run.set("max_iterations", max_iterations);
    run.guard(opts.force)?;

    let bundle = load_assets(assets)?;
    let seq = load_markers::<f64>(markers)?;
    let settings = SolverSettings {
        max_iterations,
        ..SolverSettings::default()
    };
    eprintln!("solve: {} frames, {} markers", seq.frames.len(), seq.correspondences.len());
    let frames = solve_sequence(&bundle, &seq, &settings)?;
    let count = |f: fn(&FramePose<f64>) -> bool| frames.iter().filter(|p| f(p)).count();
    eprintln!(
        "solve: gaps left {} right {} object {}; unconverged left {} right {}",
        count(|p| p.flags.left_gap),
        count(|p| p.flags.right_gap),
        count(|p| p.flags.object_gap),
        count(|p| p.flags.left_unconverged),
        count(|p| p.flags.right_unconverged),
    );
    save_poses(&frames, out)?;
    run.write()
}

fn fields(assets: &Path, poses: &Path, out: &Path, dmax: f64, binary: bool, opts: &OutputOpts) -> CmdResult {
    let mut run = RunManifest::new("fields", RunManifest::beside(out));
    run.input(assets);
    run.input(poses);
    for p in field_outputs(out, binary) {
        run.output(p);
    }
    run.set("dmax", dmax);
    run.set("binary", binary);
    run.guard(opts.force)?;

    let bundle = load_assets(assets)?;
    let frames = load_poses::<f64>(poses)?;
    let fields = par_fields(&bundle, &frames, dmax)?;
    save_fields(&fields, out, binary)?;
    eprintln!("fields: {} frames -> {}", frames.len(), out.display());
    run.write()
}

fn eval(gt: &Path, pred: &Path, assets: Option<&Path>, protocol: hoicap::metrics::Protocol, out: &Path, opts: &OutputOpts) -> CmdResult {
    let mut run = RunManifest::new("eval", out.join("run.json"));
    run.input(gt);
    run.input(pred);
    if let Some(a) = assets {
        run.input(a);
    }
    for n in ["report.json", "report.txt", "pcd.csv"] {
        run.output(out.join(n));
    }
    run.set("protocol", protocol);
    run.guard(opts.force)?;

    let bundle = assets.map(load_assets).transpose()?;
    let gt_records = EvalManifest::load(gt)?.load_records(gt, bundle.as_ref())?;
    let pred_records = EvalManifest::load(pred)?.load_records(pred, bundle.as_ref())?;
    let report = evaluate_split(&gt_records, &pred_records, protocol, &default_alphas())?;
    create_dir(out)?;
    write_json(&out.join("report.json"), &report)?;
    let table = report.to_table();
    std::fs::write(out.join("report.txt"), &table).context("writing report.txt")?;
    std::fs::write(out.join("pcd.csv"), report.pcd_csv()).context("writing pcd.csv")?;
    print!("{table}");
    run.write()
}

fn heatmap(assets: &Path, poses: &[PathBuf], out: &Path, threshold: f64, dmax: f64, opts: &OutputOpts) -> CmdResult {
    let mut run = RunManifest::new("heatmap", out.join("run.json"));
    run.input(assets);
    for p in poses {
        run.input(p);
    }
    let names = ["left", "right", "object"];
    for n in names {
        run.output(out.join(format!("heatmap_{n}.json")));
        run.output(out.join(format!("heatmap_{n}.txt")));
        run.output(out.join(format!("mesh_{n}.obj")));
    }
    run.set("threshold", threshold);
    run.set("dmax", dmax);
    run.guard(opts.force)?;

    let bundle = load_assets(assets)?;
    let mut contacts = Vec::new();
    for p in poses {
        let frames = load_poses::<f64>(p)?;
        let per_frame = frames
            .par_iter()
            .map(|f| frame_contacts(&frame_fields(&bundle, f, dmax)?, threshold))
            .collect::<hoicap::Result<Vec<_>>>()?;
        contacts.extend(per_frame);
    }
    let maps: [ContactHeatmap; 3] = heatmaps_from_contacts(&contacts)?;
    let meshes = heatmap_meshes(&bundle);
    create_dir(out)?;
    for ((name, map), mesh) in names.iter().zip(&maps).zip(&meshes) {
        write_json(&out.join(format!("heatmap_{name}.json")), map)?;
        let text: String = map.frequencies.iter().map(|f| format!("{f}\n")).collect();
        std::fs::write(out.join(format!("heatmap_{name}.txt")), text).context("writing heatmap list")?;
        mesh.write_obj(out.join(format!("mesh_{name}.obj")))?;
    }
    eprintln!("heatmap: {} frames from {} file(s)", contacts.len(), poses.len());
    run.write()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RelativePose {
    rot: [f64; 3],
    trans: [f64; 3],
}

#[derive(Debug, Serialize)]
struct AxisOutput {
    direction: [f64; 3],
    origin: [f64; 3],
    residual: f64,
    frames: usize,
}

fn axis(poses: &Path, out: &Path, opts: &OutputOpts) -> CmdResult {
    let mut run = RunManifest::new("axis", RunManifest::beside(out));
    run.input(poses);
    run.output(out.to_path_buf());
    run.guard(opts.force)?;

    let text = std::fs::read_to_string(poses).with_context(|| format!("reading {}", poses.display()))?;
    let rel: Vec<RelativePose> = serde_json::from_str(&text).with_context(|| format!("parsing {}", poses.display()))?;
    let isos: Vec<_> = rel
        .iter()
        .map(|p| isometry(&p.rot.into(), &p.trans.into()))
        .collect();
    let est = estimate_axis(&isos)?;
    let result = AxisOutput {
        direction: est.direction.into_inner().into(),
        origin: est.origin.coords.into(),
        residual: est.residual,
        frames: rel.len(),
    };
    write_json(out, &result)?;
    run.write()
}

fn validate(paths: &[PathBuf]) -> CmdResult {
    for p in paths {
        let kind = validate_one(p).with_context(|| format!("{} is invalid", p.display()))?;
        println!("{}: ok ({kind})", p.display());
    }
    Ok(())
}

/// Identifies the file type and loads it through the matching reader.
fn validate_one(path: &Path) -> anyhow::Result<&'static str> {
    if path.is_dir() {
        AssetBundle::<f64>::load(path)?;
        return Ok("asset bundle");
    }
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.is_array() {
        load_poses::<f64>(path)?;
        return Ok("pose file");
    }
    let format = value.get("format").and_then(|f| f.as_str());
    let header_format = value.pointer("/header/format").and_then(|f| f.as_str());
    match (format, header_format) {
        (Some(hoicap::models::assets::BUNDLE_FORMAT), _) => {
            AssetBundle::<f64>::load(path)?;
            Ok("asset bundle")
        }
        (Some(hoicap::models::assets::HAND_FORMAT), _) => {
            hoicap::models::assets::load_hand::<f64>(path)?;
            Ok("hand model")
        }
        (Some(hoicap::models::assets::OBJECT_FORMAT), _) => {
            hoicap::models::assets::load_object::<f64>(path)?;
            Ok("articulated object")
        }
        (Some(hoicap::fields::io::FIELDS_FORMAT), _) => {
            load_fields::<f64>(path)?;
            Ok("field dump")
        }
        (_, Some(hoicap::capture::markers::MARKERS_FORMAT)) => {
            load_markers::<f64>(path)?;
            Ok("marker sequence")
        }
        (Some(other), _) => Err(anyhow!("unknown format '{other}'")),
        (None, _) if value.get("sequences").is_some() => {
            let manifest = EvalManifest::load(path)?;
            manifest.load_records::<f64>(path, None)?;
            Ok("evaluation manifest")
        }
        (None, _) if value.get("command").is_some() => Ok("run manifest"),
        (None, _) => {
            let config: SynthConfig = serde_json::from_value(value)?;
            config.validate()?;
            Ok("synthesis config")
        }
    }
}
