use std::path::Path;
use std::process::ExitCode;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Value};

use artikit::assignment::{confidence_targets, hungarian, kept_indices, matching_cost, read_masks};
use artikit::geometry::{
    trilinear_interpolate, triplane_gather, triplane_scatter, write_feature_set, SparseVoxelGrid,
};
use artikit::kinematics::{
    build_tree, pairwise_affinity, parent_distribution, sample_model_states, LabeledCloud,
};
use artikit::losses::selftest;
use artikit::metrics::{evaluate, EvalConfig};
use artikit::model::{
    export_urdf, load_mesh_manifest, load_model, read_mesh_manifest, write_point_cloud_ply,
};
use artikit::numfmt::{fmt_sig9, round_json};
use artikit::{Error, Vec3};

use crate::{
    ArticulateArgs, Cli, Command, EvaluateArgs, ExportUrdfArgs, FeaturesArgs, LossesCommand,
    MatchArgs, TreeArgs,
};

pub struct Failure {
    pub code: u8,
    pub message: String,
    pub details: Vec<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_degenerate() { 3 } else { 2 };
        match e {
            Error::Invalid(violations) => Failure {
                code,
                message: "validation failed".into(),
                details: violations.iter().map(|v| v.to_string()).collect(),
            },
            other => Failure {
                code,
                message: other.to_string(),
                details: Vec::new(),
            },
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: 2,
        message,
        details: Vec::new(),
    }
}

type Outcome = Result<ExitCode, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let v = cli.verbose;
    match &cli.command {
        Command::Articulate(a) => articulate(a, v),
        Command::Evaluate(a) => evaluate_cmd(a, v),
        Command::Tree(a) => tree(a),
        Command::Match(a) => match_cmd(a),
        Command::Features(a) => features(a, v),
        Command::Losses {
            action: LossesCommand::Selftest { json },
        } => losses_selftest(*json),
        Command::ExportUrdf(a) => urdf(a),
    }
}

fn print_json(mut v: Value) -> Outcome {
    round_json(&mut v);
    println!(
        "{}",
        serde_json::to_string_pretty(&v).expect("JSON values serialize")
    );
    Ok(ExitCode::SUCCESS)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn articulate(a: &ArticulateArgs, verbose: u8) -> Outcome {
    let model = load_model(&a.model)?;
    let cloud = match &a.meshes {
        Some(path) => {
            LabeledCloud::from_meshes(&model, &load_mesh_manifest(path)?, a.points, a.seed)?
        }
        None => LabeledCloud::from_model(&model),
    };
    let states = sample_model_states(&model, a.states)?;
    let clouds = states
        .iter()
        .map(|s| cloud.posed(&model, s))
        .collect::<Result<Vec<_>, _>>()?;

    std::fs::create_dir_all(&a.out)
        .map_err(|e| input_error(format!("{}: {e}", a.out.display())))?;
    let ids = model.part_ids();
    let mut entries = Vec::with_capacity(states.len());
    for (k, (state, points)) in states.iter().zip(&clouds).enumerate() {
        let file = format!("state_{k:02}.ply");
        write_point_cloud_ply(points, a.out.join(&file))?;
        let values: Vec<f64> = ids.iter().map(|id| state.get(*id).unwrap_or(0.0)).collect();
        entries.push(json!({ "file": file, "values": values }));
        if verbose > 0 {
            eprintln!("wrote {file}");
        }
    }
    let mut manifest = json!({
        "seed": a.seed,
        "states": a.states,
        "points": cloud.len(),
        "source": if a.meshes.is_some() { "meshes" } else { "model" },
        "part_ids": ids.iter().map(|id| id.0).collect::<Vec<_>>(),
        "entries": entries,
    });
    round_json(&mut manifest);
    let path = a.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize") + "\n";
    std::fs::write(&path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    print_json(json!({ "manifest": path.to_string_lossy(), "states": a.states }))
}

fn evaluate_cmd(a: &EvaluateArgs, verbose: u8) -> Outcome {
    let pred = load_model(&a.pred)?;
    let gt = load_model(&a.gt)?;
    let pred_meshes = a
        .pred_meshes
        .as_deref()
        .map(load_mesh_manifest)
        .transpose()?;
    let gt_meshes = a.gt_meshes.as_deref().map(load_mesh_manifest).transpose()?;
    let cfg = EvalConfig {
        n_states: a.states,
        n_points: a.points,
        tau: a.tau,
        seed: a.seed,
    };
    if verbose > 0 {
        eprintln!(
            "evaluating {} states, tau {}, seed {}",
            cfg.n_states,
            fmt_sig9(cfg.tau),
            cfg.seed
        );
    }
    let report = evaluate(&pred, pred_meshes.as_ref(), &gt, gt_meshes.as_ref(), &cfg)?;
    print_json(report.to_json())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TreeInput {
    Matrix(Vec<Vec<f64>>),
    Object {
        part_probs: Vec<Vec<f64>>,
        #[serde(default)]
        root_scores: Option<Vec<f64>>,
    },
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, Failure> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(input_error(format!("{what}: rows have differing lengths")));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn tree(a: &TreeArgs) -> Outcome {
    let (probs, root) = match read_json::<TreeInput>(&a.logits)? {
        TreeInput::Matrix(m) => (m, None),
        TreeInput::Object {
            part_probs,
            root_scores,
        } => (part_probs, root_scores),
    };
    let compat: Vec<Vec<f64>> = read_json(&a.compat)?;
    let mut aff = pairwise_affinity(
        &matrix(&probs, "part_probs")?,
        &matrix(&compat, "compatibility")?,
    )?;
    if let Some(r) = root {
        aff = aff.with_root_scores(DVector::from_vec(r))?;
    }
    let dist = parent_distribution(&aff);
    let tree = build_tree(&dist);
    let parents: Vec<i64> = (0..dist.len())
        .map(|i| {
            tree.parent_of(artikit::PartId(i as i64))
                .map_or(-1, |p| p.to_raw())
        })
        .collect();
    let rows: Vec<Vec<f64>> = dist
        .probs()
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    print_json(json!({ "parents": parents, "parent_distribution": rows }))
}

fn match_cmd(a: &MatchArgs) -> Outcome {
    let pred = read_masks(&a.pred)?;
    let gt = read_masks(&a.gt)?.hard();
    if pred.points() != gt.points() {
        return Err(input_error(format!(
            "point counts differ: {} has M = {}, {} has M = {}",
            a.pred.display(),
            pred.points(),
            a.gt.display(),
            gt.points()
        )));
    }
    let kept = match &a.confidences {
        Some(path) => {
            let conf: Vec<f64> = read_json(path)?;
            if conf.len() != pred.len() {
                return Err(input_error(format!(
                    "{}: {} confidences for {} queries",
                    path.display(),
                    conf.len(),
                    pred.len()
                )));
            }
            kept_indices(&conf, a.threshold)?
        }
        None => (0..pred.len()).collect(),
    };
    let soft_all = pred.soft();
    let hard_all = pred.hard();
    let soft: Vec<Vec<f64>> = kept.iter().map(|&i| soft_all[i].clone()).collect();
    let hard = artikit::assignment::MaskSet::new(
        pred.points(),
        kept.iter().map(|&i| hard_all.row(i).to_vec()).collect(),
    )?;
    let cost = if soft.is_empty() || gt.is_empty() {
        DMatrix::zeros(soft.len(), gt.len())
    } else {
        matching_cost(&soft, &gt, 1.0, 1.0)?
    };
    let result = hungarian(&cost)?;
    let local_targets = confidence_targets(&hard, &gt, &result)?;

    let mut targets = vec![0.0; pred.len()];
    for (local, &orig) in kept.iter().enumerate() {
        targets[orig] = local_targets[local];
    }
    let pairs: Vec<(usize, usize)> = result.pairs.iter().map(|&(i, j)| (kept[i], j)).collect();
    let unmatched: Vec<usize> = (0..pred.len())
        .filter(|q| !pairs.iter().any(|p| p.0 == *q))
        .collect();
    print_json(json!({
        "pairs": pairs,
        "unmatched_queries": unmatched,
        "kept_queries": kept,
        "total_cost": result.total_cost,
        "targets": targets,
    }))
}

fn features(a: &FeaturesArgs, verbose: u8) -> Outcome {
    let grid = SparseVoxelGrid::load(&a.grid)?;
    let raw: Vec<[f64; 3]> = read_json(&a.points)?;
    let points: Vec<Vec3> = raw.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
    let f_geo = trilinear_interpolate(&grid, &points)?;
    let stack = triplane_scatter(&points, &f_geo, a.triplane_resolution)?;
    let tri = triplane_gather(&stack, &points)?;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| input_error(format!("{}: {e}", a.out.display())))?;
    let geo_path = a.out.join("f_geo.bin");
    let tri_path = a.out.join("triplane.bin");
    write_feature_set(&f_geo, &geo_path)?;
    write_feature_set(&tri, &tri_path)?;
    if verbose > 0 {
        eprintln!(
            "{} points, {} active cells",
            points.len(),
            grid.cells().count()
        );
    }
    print_json(json!({
        "points": points.len(),
        "f_geo": { "path": geo_path.to_string_lossy(), "dim": f_geo.dim() },
        "triplane": { "path": tri_path.to_string_lossy(), "dim": tri.dim(), "resolution": a.triplane_resolution },
    }))
}

fn losses_selftest(as_json: bool) -> Outcome {
    let cases = selftest();
    let all_pass = cases.iter().all(|c| c.passed);
    if as_json {
        let mut v = serde_json::to_value(&cases).expect("cases serialize");
        round_json(&mut v);
        println!(
            "{}",
            serde_json::to_string_pretty(&v).expect("JSON values serialize")
        );
    } else {
        let width = cases.iter().map(|c| c.name.len()).max().unwrap_or(0);
        println!(
            "{:width$}  {:>12}  {:>12}  result",
            "kernel", "value", "expected"
        );
        for c in &cases {
            println!(
                "{:width$}  {:>12.6}  {:>12.6}  {}",
                c.name,
                c.value,
                c.expected,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
    }
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "artikit: {} of {} kernel examples failed",
            cases.iter().filter(|c| !c.passed).count(),
            cases.len()
        );
        Ok(ExitCode::from(1))
    }
}

fn urdf(a: &ExportUrdfArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let paths = match &a.meshes {
        Some(m) => read_mesh_manifest(m)?,
        None => Default::default(),
    };
    let doc = export_urdf(&model, &paths)?;
    match &a.out {
        Some(path) => std::fs::write(path, doc)
            .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => print!("{doc}"),
    }
    Ok(ExitCode::SUCCESS)
}
