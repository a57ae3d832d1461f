//! Fixture files and a URDF grammar checker shared by the CLI test targets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use artikit::model::{save_model, write_ply_mesh};
use artikit::{ArticulatedModel, PartMeshes};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_artikit"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn write_model(dir: &Path, name: &str, model: &ArticulatedModel) -> PathBuf {
    let path = dir.join(name);
    save_model(model, &path).expect("model saves");
    path
}

/// Writes each mesh as PLY beside a manifest and returns the manifest path.
pub fn write_meshes(dir: &Path, prefix: &str, meshes: &PartMeshes) -> PathBuf {
    let mut manifest = BTreeMap::new();
    let entries = meshes
        .base
        .iter()
        .map(|m| (-1i64, m))
        .chain(meshes.parts.iter().map(|(id, m)| (id.0, m)));
    for (id, mesh) in entries {
        let file = format!("{prefix}_{id}.ply");
        write_ply_mesh(mesh, dir.join(&file)).expect("mesh writes");
        manifest.insert(id.to_string(), file);
    }
    let path = dir.join(format!("{prefix}_meshes.json"));
    std::fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
    path
}

fn parse_triple(s: &str) -> Option<[f64; 3]> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .ok()?;
    (v.len() == 3 && v.iter().all(|x| x.is_finite())).then(|| [v[0], v[1], v[2]])
}

/// Checks a URDF document against the format's structural rules and returns every error.
pub fn urdf_errors(doc: &str) -> Vec<String> {
    let mut errors = Vec::new();
    let xml = match roxmltree::Document::parse(doc) {
        Ok(x) => x,
        Err(e) => return vec![format!("not well-formed XML: {e}")],
    };
    let robot = xml.root_element();
    if robot.tag_name().name() != "robot" {
        errors.push(format!(
            "root element is <{}>, expected <robot>",
            robot.tag_name().name()
        ));
    }
    if robot.attribute("name").is_none_or(str::is_empty) {
        errors.push("robot has no name".into());
    }

    let mut links = BTreeSet::new();
    for link in robot.children().filter(|n| n.has_tag_name("link")) {
        let Some(name) = link.attribute("name") else {
            errors.push("link without name".into());
            continue;
        };
        if !links.insert(name.to_string()) {
            errors.push(format!("duplicate link {name}"));
        }
        for geom in link.descendants().filter(|n| n.has_tag_name("geometry")) {
            let shapes: Vec<_> = geom.children().filter(|n| n.is_element()).collect();
            if shapes.len() != 1 {
                errors.push(format!("link {name}: geometry must hold exactly one shape"));
            }
            for mesh in shapes.iter().filter(|n| n.has_tag_name("mesh")) {
                if mesh.attribute("filename").is_none_or(str::is_empty) {
                    errors.push(format!("link {name}: mesh without filename"));
                }
            }
        }
        for origin in link.descendants().filter(|n| n.has_tag_name("origin")) {
            if origin
                .attribute("xyz")
                .is_some_and(|s| parse_triple(s).is_none())
            {
                errors.push(format!("link {name}: bad origin xyz"));
            }
        }
    }

    let mut joint_names = BTreeSet::new();
    let mut parent_of: BTreeMap<String, String> = BTreeMap::new();
    for joint in robot.children().filter(|n| n.has_tag_name("joint")) {
        let name = joint.attribute("name").unwrap_or("");
        if name.is_empty() || !joint_names.insert(name.to_string()) {
            errors.push(format!("joint name `{name}` missing or duplicated"));
        }
        let jtype = joint.attribute("type").unwrap_or("");
        if ![
            "revolute",
            "continuous",
            "prismatic",
            "fixed",
            "floating",
            "planar",
        ]
        .contains(&jtype)
        {
            errors.push(format!("joint {name}: unknown type `{jtype}`"));
        }
        let link_ref = |tag: &str| {
            let nodes: Vec<_> = joint.children().filter(|n| n.has_tag_name(tag)).collect();
            match nodes.as_slice() {
                [n] => n.attribute("link").map(str::to_string),
                _ => None,
            }
        };
        let (Some(parent), Some(child)) = (link_ref("parent"), link_ref("child")) else {
            errors.push(format!(
                "joint {name}: needs exactly one parent and one child"
            ));
            continue;
        };
        for l in [&parent, &child] {
            if !links.contains(l) {
                errors.push(format!("joint {name}: unknown link {l}"));
            }
        }
        if parent_of.insert(child.clone(), parent).is_some() {
            errors.push(format!("link {child} has more than one parent joint"));
        }
        for origin in joint.children().filter(|n| n.has_tag_name("origin")) {
            if origin
                .attribute("xyz")
                .is_some_and(|s| parse_triple(s).is_none())
            {
                errors.push(format!("joint {name}: bad origin xyz"));
            }
            if origin
                .attribute("rpy")
                .is_some_and(|s| parse_triple(s).is_none())
            {
                errors.push(format!("joint {name}: bad origin rpy"));
            }
        }
        if let Some(axis) = joint.children().find(|n| n.has_tag_name("axis")) {
            match axis.attribute("xyz").and_then(parse_triple) {
                Some(a) if (a.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-6 => {}
                _ => errors.push(format!("joint {name}: axis must be a unit xyz triple")),
            }
        }
        let limit = joint.children().find(|n| n.has_tag_name("limit"));
        if matches!(jtype, "revolute" | "prismatic") {
            match limit {
                None => errors.push(format!("joint {name}: {jtype} joint requires <limit>")),
                Some(l) => {
                    let num = |k: &str| l.attribute(k).and_then(|v| v.parse::<f64>().ok());
                    for k in ["effort", "velocity"] {
                        if num(k).is_none() {
                            errors.push(format!("joint {name}: limit needs numeric {k}"));
                        }
                    }
                    match (num("lower"), num("upper")) {
                        (Some(lo), Some(hi)) if lo <= hi => {}
                        _ => errors.push(format!("joint {name}: limit lower/upper invalid")),
                    }
                }
            }
        }
    }

    let roots: Vec<_> = links
        .iter()
        .filter(|l| !parent_of.contains_key(*l))
        .collect();
    if roots.len() != 1 {
        errors.push(format!(
            "expected exactly one root link, found {}",
            roots.len()
        ));
    }
    for start in parent_of.keys() {
        let mut cur = start.clone();
        for _ in 0..=links.len() {
            match parent_of.get(&cur) {
                Some(p) => cur = p.clone(),
                None => break,
            }
        }
        if parent_of.contains_key(&cur) {
            errors.push(format!("link {start} is on a cycle"));
        }
    }
    errors
}
