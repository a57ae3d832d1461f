use std::collections::{BTreeMap, BTreeSet};

use super::{ArticulatedModel, JointSpec, JointType, Parent, PartId, Violation};

const AXIS_UNIT_TOL: f64 = 1e-6;

/// Checks every structural invariant of `model`. An empty list means the model is valid.
pub fn validate_model(model: &ArticulatedModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = model.points.len();

    for (i, p) in model.points.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite()) {
            out.push(Violation::new(
                format!("points[{i}]"),
                "component not finite",
            ));
        }
    }

    // owner of each point: usize::MAX for base, k for parts[k]
    let mut owner: Vec<Option<usize>> = vec![None; m];
    let mut claim = |i: usize, who: usize, field: String, out: &mut Vec<Violation>| {
        if i >= m {
            out.push(Violation::new(
                field,
                format!("index {i} out of range ({m} points)"),
            ));
            return;
        }
        match owner[i] {
            None => owner[i] = Some(who),
            Some(prev) if prev == who => {
                out.push(Violation::new(field, format!("duplicate index {i}")))
            }
            Some(_) => out.push(Violation::new(
                field,
                format!("point {i} assigned to more than one owner"),
            )),
        }
    };
    for &i in &model.base_indices {
        claim(i, usize::MAX, "base_indices".into(), &mut out);
    }

    let mut ids = BTreeSet::new();
    for (k, part) in model.parts.iter().enumerate() {
        let field = format!("parts[{k}]");
        if part.id.0 == PartId::ROOT_SENTINEL {
            out.push(Violation::new(
                format!("{field}.id"),
                "id -1 is reserved for ROOT",
            ));
        }
        if !ids.insert(part.id) {
            out.push(Violation::new(
                format!("{field}.id"),
                format!("duplicate part id {}", part.id),
            ));
        }
        if part.point_indices.is_empty() {
            out.push(Violation::new(
                format!("{field}.point_indices"),
                "must be non-empty",
            ));
        }
        for &i in &part.point_indices {
            claim(i, k, format!("{field}.point_indices"), &mut out);
        }
        validate_joint(&part.joint, &format!("{field}.joint"), &mut out);
    }

    let uncovered = owner.iter().filter(|o| o.is_none()).count();
    if uncovered > 0 {
        let first = owner.iter().position(|o| o.is_none()).unwrap_or(0);
        out.push(Violation::new(
            "points",
            format!("{uncovered} point(s) not covered by any part or base (first: {first})"),
        ));
    }

    validate_tree(&model.tree.parent, &ids, &mut out);
    out
}

pub(crate) fn validate_joint(joint: &JointSpec, field: &str, out: &mut Vec<Violation>) {
    if !joint
        .axis
        .iter()
        .chain(joint.pivot.iter())
        .all(|c| c.is_finite())
    {
        out.push(Violation::new(field, "axis and pivot must be finite"));
    }
    if joint.jtype != JointType::Fixed && (joint.axis.norm() - 1.0).abs() > AXIS_UNIT_TOL {
        out.push(Violation::new(
            format!("{field}.axis"),
            "joint axis not unit length",
        ));
    }
    let l = joint.limits;
    if !(l.center.is_finite() && l.span.is_finite()) {
        out.push(Violation::new(
            format!("{field}.limits"),
            "center and span must be finite",
        ));
    }
    if l.span < 0.0 {
        out.push(Violation::new(format!("{field}.span"), "span ≥ 0"));
    }
    if joint.jtype == JointType::Fixed && (l.center != 0.0 || l.span != 0.0) {
        out.push(Violation::new(
            format!("{field}.limits"),
            "fixed joint requires center = span = 0",
        ));
    }
}

fn validate_tree(
    parent: &BTreeMap<PartId, Parent>,
    ids: &BTreeSet<PartId>,
    out: &mut Vec<Violation>,
) {
    for id in ids {
        if !parent.contains_key(id) {
            out.push(Violation::new(
                "tree",
                format!("part {id} missing from tree"),
            ));
        }
    }
    let mut dangling = false;
    for (child, p) in parent {
        if !ids.contains(child) {
            out.push(Violation::new("tree", format!("unknown part {child}")));
        }
        if let Parent::Part(pid) = p {
            if !parent.contains_key(pid) {
                dangling = true;
                out.push(Violation::new(
                    "tree",
                    format!("parent {pid} of part {child} is not a part"),
                ));
            }
        }
    }
    let tree = super::KinematicTree {
        parent: parent.clone(),
    };
    for cycle in tree.cycles() {
        let names: Vec<String> = cycle.iter().map(|c| c.to_string()).collect();
        out.push(Violation::new(
            "tree",
            format!("cycle {{{}}}", names.join(",")),
        ));
    }
    if !parent.is_empty() && !dangling && !parent.values().any(|p| *p == Parent::Root) {
        out.push(Violation::new("tree", "no part attached to ROOT"));
    }
}
