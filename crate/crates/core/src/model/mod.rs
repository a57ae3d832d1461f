//! Articulated-object domain types.
//!
//! An [`ArticulatedModel`] is a canonical-state point cloud partitioned into a static base and a
//! set of rigid parts. Each part carries the joint connecting it to its parent in the
//! [`KinematicTree`]. All joint frames coincide with the object frame at the canonical pose, so
//! pivots and axes are stored in object coordinates.

mod json;
mod mesh_io;
mod urdf;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use json::{load_model, model_from_json, model_to_json, save_model};
pub use mesh_io::{
    load_mesh_manifest, read_mesh, read_mesh_manifest, read_obj, read_ply_mesh, write_ply_mesh,
    write_point_cloud_ply,
};
pub use urdf::export_urdf;
pub use validate::validate_model;

use crate::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Part identifier. `-1` is reserved for the kinematic root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartId(pub i64);

impl PartId {
    /// Sentinel id used for the root in files.
    pub const ROOT_SENTINEL: i64 = -1;
}

impl fmt::Display for PartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Fixed,
    Revolute,
    Prismatic,
    Continuous,
}

impl JointType {
    /// Category order used by type logits.
    pub const ALL: [JointType; 4] = [
        JointType::Fixed,
        JointType::Revolute,
        JointType::Prismatic,
        JointType::Continuous,
    ];

    pub fn index(self) -> usize {
        match self {
            JointType::Fixed => 0,
            JointType::Revolute => 1,
            JointType::Prismatic => 2,
            JointType::Continuous => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JointType::Fixed => "fixed",
            JointType::Revolute => "revolute",
            JointType::Prismatic => "prismatic",
            JointType::Continuous => "continuous",
        }
    }

    /// Revolute or continuous.
    pub fn is_rotational(self) -> bool {
        matches!(self, JointType::Revolute | JointType::Continuous)
    }

    /// Revolute or prismatic: motion restricted to `[center - span, center + span]`.
    pub fn is_bounded(self) -> bool {
        matches!(self, JointType::Revolute | JointType::Prismatic)
    }
}

impl fmt::Display for JointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Symmetric motion range `[center - span, center + span]`.
///
/// Radians for rotational joints, normalized object length for prismatic ones.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct JointLimits {
    pub center: f64,
    pub span: f64,
}

impl JointLimits {
    pub fn new(center: f64, span: f64) -> Self {
        Self { center, span }
    }

    pub fn lower(&self) -> f64 {
        self.center - self.span
    }

    pub fn upper(&self) -> f64 {
        self.center + self.span
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointSpec {
    pub jtype: JointType,
    pub axis: Vec3,
    /// Point on the motion axis. Stored but unused for prismatic joints.
    pub pivot: Vec3,
    pub limits: JointLimits,
}

impl JointSpec {
    pub fn fixed() -> Self {
        Self {
            jtype: JointType::Fixed,
            axis: Vec3::zeros(),
            pivot: Vec3::zeros(),
            limits: JointLimits::default(),
        }
    }

    pub fn revolute(axis: Vec3, pivot: Vec3, limits: JointLimits) -> Self {
        Self {
            jtype: JointType::Revolute,
            axis,
            pivot,
            limits,
        }
    }

    pub fn prismatic(axis: Vec3, limits: JointLimits) -> Self {
        Self {
            jtype: JointType::Prismatic,
            axis,
            pivot: Vec3::zeros(),
            limits,
        }
    }

    pub fn continuous(axis: Vec3, pivot: Vec3) -> Self {
        Self {
            jtype: JointType::Continuous,
            axis,
            pivot,
            limits: JointLimits::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartSpec {
    pub id: PartId,
    /// Part category index.
    pub label: usize,
    /// Indices into [`ArticulatedModel::points`] owned by this part.
    pub point_indices: Vec<usize>,
    pub joint: JointSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parent {
    Root,
    Part(PartId),
}

impl Parent {
    pub fn from_raw(id: i64) -> Self {
        if id == PartId::ROOT_SENTINEL {
            Parent::Root
        } else {
            Parent::Part(PartId(id))
        }
    }

    pub fn to_raw(self) -> i64 {
        match self {
            Parent::Root => PartId::ROOT_SENTINEL,
            Parent::Part(id) => id.0,
        }
    }
}

impl fmt::Display for Parent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parent::Root => f.write_str("ROOT"),
            Parent::Part(id) => write!(f, "{id}"),
        }
    }
}

/// Parent map of the kinematic tree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct KinematicTree {
    pub parent: BTreeMap<PartId, Parent>,
}

impl KinematicTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn star(ids: impl IntoIterator<Item = PartId>) -> Self {
        Self {
            parent: ids.into_iter().map(|id| (id, Parent::Root)).collect(),
        }
    }

    pub fn with_edge(mut self, child: PartId, parent: Parent) -> Self {
        self.parent.insert(child, parent);
        self
    }

    pub fn parent_of(&self, id: PartId) -> Option<Parent> {
        self.parent.get(&id).copied()
    }

    pub fn children_of(&self, parent: Parent) -> Vec<PartId> {
        self.parent
            .iter()
            .filter(|(_, p)| **p == parent)
            .map(|(c, _)| *c)
            .collect()
    }

    /// Ancestor chain starting at `id` (inclusive) and ending below the root.
    pub fn path_to_root(&self, id: PartId) -> Result<Vec<PartId>> {
        let mut path = vec![id];
        let mut cur = id;
        loop {
            match self.parent.get(&cur) {
                None => {
                    return Err(Error::Invalid(vec![Violation::new(
                        "tree",
                        format!("part {cur} missing from tree"),
                    )]))
                }
                Some(Parent::Root) => return Ok(path),
                Some(Parent::Part(p)) => {
                    if path.len() > self.parent.len() || path.contains(p) {
                        return Err(Error::Invalid(vec![Violation::new(
                            "tree",
                            format!("cycle through part {p}"),
                        )]));
                    }
                    path.push(*p);
                    cur = *p;
                }
            }
        }
    }

    /// Every distinct cycle, each as a sorted member list.
    pub fn cycles(&self) -> Vec<Vec<PartId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Unseen,
            Active,
            Done,
        }
        let mut mark: BTreeMap<PartId, Mark> =
            self.parent.keys().map(|k| (*k, Mark::Unseen)).collect();
        let mut cycles = Vec::new();
        for &start in self.parent.keys() {
            if mark[&start] != Mark::Unseen {
                continue;
            }
            let mut stack = Vec::new();
            let mut cur = start;
            loop {
                match mark.get(&cur).copied() {
                    Some(Mark::Unseen) => {
                        mark.insert(cur, Mark::Active);
                        stack.push(cur);
                        match self.parent[&cur] {
                            Parent::Part(p) => cur = p,
                            Parent::Root => break,
                        }
                    }
                    Some(Mark::Active) => {
                        let pos = stack.iter().position(|x| *x == cur).unwrap_or(0);
                        let mut cycle = stack[pos..].to_vec();
                        cycle.sort();
                        cycles.push(cycle);
                        break;
                    }
                    // Done, or a dangling parent reported elsewhere.
                    _ => break,
                }
            }
            for id in stack {
                mark.insert(id, Mark::Done);
            }
        }
        cycles
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArticulatedModel {
    pub points: Vec<Vec3>,
    pub parts: Vec<PartSpec>,
    pub tree: KinematicTree,
    /// Indices of static points that never move.
    pub base_indices: Vec<usize>,
}

impl ArticulatedModel {
    pub fn part(&self, id: PartId) -> Option<&PartSpec> {
        self.parts.iter().find(|p| p.id == id)
    }

    pub fn part_ids(&self) -> Vec<PartId> {
        self.parts.iter().map(|p| p.id).collect()
    }

    /// Owner of each point: `None` for base points, `Some(k)` for `parts[k]`.
    pub fn point_owners(&self) -> Vec<Option<usize>> {
        let mut owners = vec![None; self.points.len()];
        for (k, part) in self.parts.iter().enumerate() {
            for &i in &part.point_indices {
                if let Some(o) = owners.get_mut(i) {
                    *o = Some(k);
                }
            }
        }
        owners
    }
}

/// Triangle mesh in object coordinates.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        Self { vertices, faces }
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.vertices.len();
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                out.push(Violation::new(
                    format!("vertices[{i}]"),
                    "component not finite",
                ));
            }
        }
        let mut in_range = true;
        for (f, face) in self.faces.iter().enumerate() {
            if face.iter().any(|&i| i >= n) {
                in_range = false;
                out.push(Violation::new(
                    format!("faces[{f}]"),
                    format!("vertex index out of range ({n} vertices)"),
                ));
            }
        }
        if in_range && out.is_empty() && !self.triangle_areas().iter().any(|a| *a > 0.0) {
            out.push(Violation::new("faces", "no face with nonzero area"));
        }
        out
    }

    /// Appends `other`, offsetting its face indices.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(
            other
                .faces
                .iter()
                .map(|f| [f[0] + base, f[1] + base, f[2] + base]),
        );
    }
}

/// Surface meshes of an articulated object: an optional static base plus one mesh per part.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PartMeshes {
    pub base: Option<TriMesh>,
    pub parts: BTreeMap<PartId, TriMesh>,
}

impl PartMeshes {
    /// Checks that every mesh is well formed and that every mesh key names a part of `model`.
    pub fn validate_for(&self, model: &ArticulatedModel) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Some(base) = &self.base {
            for v in base.validate() {
                out.push(Violation::new(format!("meshes[base].{}", v.field), v.rule));
            }
        }
        for (id, mesh) in &self.parts {
            if model.part(*id).is_none() {
                out.push(Violation::new(format!("meshes[{id}]"), "no such part"));
            }
            for v in mesh.validate() {
                out.push(Violation::new(format!("meshes[{id}].{}", v.field), v.rule));
            }
        }
        out
    }
}

/// One broken invariant, naming the offending field and the rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_to_root_follows_chain() {
        let tree = KinematicTree::star([PartId(0)]).with_edge(PartId(1), Parent::Part(PartId(0)));
        assert_eq!(
            tree.path_to_root(PartId(1)).unwrap(),
            vec![PartId(1), PartId(0)]
        );
        assert_eq!(tree.children_of(Parent::Root), vec![PartId(0)]);
    }

    #[test]
    fn cycles_are_reported_once() {
        let tree = KinematicTree::new()
            .with_edge(PartId(1), Parent::Part(PartId(2)))
            .with_edge(PartId(2), Parent::Part(PartId(1)))
            .with_edge(PartId(3), Parent::Part(PartId(1)))
            .with_edge(PartId(4), Parent::Root);
        assert_eq!(tree.cycles(), vec![vec![PartId(1), PartId(2)]]);
        assert!(tree.path_to_root(PartId(3)).is_err());
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let tree = KinematicTree::new().with_edge(PartId(5), Parent::Part(PartId(5)));
        assert_eq!(tree.cycles(), vec![vec![PartId(5)]]);
    }

    #[test]
    fn mesh_validation() {
        let mut mesh = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]);
        assert!(mesh.validate().is_empty());
        mesh.faces.push([0, 1, 7]);
        assert_eq!(mesh.validate().len(), 1);
        let flat = TriMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0],
            vec![[0, 1, 2]],
        );
        assert_eq!(flat.validate()[0].rule, "no face with nonzero area");
    }
}
