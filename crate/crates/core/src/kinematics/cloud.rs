use rayon::prelude::*;

use super::{articulate_labeled, StateVector};
use crate::geometry::sample_surface;
use crate::model::{ArticulatedModel, PartId, PartMeshes, TriMesh, Vec3, Violation};
use crate::{Error, Result};

/// Canonical points of an object labeled with their owning part (`None` for the base).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledCloud {
    pub points: Vec<Vec3>,
    pub owners: Vec<Option<PartId>>,
}

impl LabeledCloud {
    /// The model's own points and ownership.
    pub fn from_model(model: &ArticulatedModel) -> Self {
        let owners = model
            .point_owners()
            .into_par_iter()
            .map(|o| o.map(|k| model.parts[k].id))
            .collect();
        Self {
            points: model.points.clone(),
            owners,
        }
    }

    /// `count` area-uniform samples over the union of the base and part meshes. Every part of
    /// `model` must have a mesh.
    pub fn from_meshes(
        model: &ArticulatedModel,
        meshes: &PartMeshes,
        count: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut violations = meshes.validate_for(model);
        for part in &model.parts {
            if !meshes.parts.contains_key(&part.id) {
                violations.push(Violation::new(
                    format!("meshes[{}]", part.id),
                    "part has no mesh",
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let mut union = TriMesh::default();
        let mut face_owner = Vec::new();
        let labeled = meshes
            .base
            .iter()
            .map(|m| (None, m))
            .chain(meshes.parts.iter().map(|(id, m)| (Some(*id), m)));
        for (owner, mesh) in labeled {
            union.append(mesh);
            face_owner.extend(std::iter::repeat_n(owner, mesh.faces.len()));
        }
        let samples = sample_surface(&union, count, seed)?;
        Ok(Self {
            points: samples.iter().map(|s| s.point).collect(),
            owners: samples.iter().map(|s| face_owner[s.face]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The points moved to `state`.
    pub fn posed(&self, model: &ArticulatedModel, state: &StateVector) -> Result<Vec<Vec3>> {
        articulate_labeled(model, state, &self.points, &self.owners)
    }
}
