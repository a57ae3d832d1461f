use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use super::joint::{joint_transform, RigidTransform};
use crate::model::{validate_model, ArticulatedModel, JointLimits, JointType, PartId};
use crate::{Error, Result, Vec3};

/// Number of articulation states in the evaluation protocol.
pub const DEFAULT_STATE_COUNT: usize = 6;

/// Joint value per part: radians for rotational joints, object length for prismatic ones.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StateVector {
    pub values: BTreeMap<PartId, f64>,
}

impl StateVector {
    /// Every part at its canonical value 0.
    pub fn canonical(model: &ArticulatedModel) -> Self {
        Self {
            values: model.parts.iter().map(|p| (p.id, 0.0)).collect(),
        }
    }

    pub fn get(&self, id: PartId) -> Option<f64> {
        self.values.get(&id).copied()
    }

    pub fn set(&mut self, id: PartId, value: f64) {
        self.values.insert(id, value);
    }
}

/// `n` evenly spaced joint values: the closed range `[center − span, center + span]` for
/// bounded joints, the half-open turn `[0, 2π)` for continuous joints, zeros for fixed joints.
pub fn sample_states(limits: &JointLimits, jtype: JointType, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 states, got {n}"
        )));
    }
    Ok(match jtype {
        JointType::Fixed => vec![0.0; n],
        JointType::Continuous => (0..n).map(|k| TAU * k as f64 / n as f64).collect(),
        JointType::Revolute | JointType::Prismatic => {
            let (lo, hi) = (limits.lower(), limits.upper());
            let mut v: Vec<f64> = (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect();
            v[n - 1] = hi;
            v
        }
    })
}

/// The `n` protocol states of a model: state `k` sets every joint to its `k`-th sampled value.
pub fn sample_model_states(model: &ArticulatedModel, n: usize) -> Result<Vec<StateVector>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 states, got {n}"
        )));
    }
    let mut states = vec![StateVector::default(); n];
    for part in &model.parts {
        let values = sample_states(&part.joint.limits, part.joint.jtype, n)?;
        for (state, v) in states.iter_mut().zip(values) {
            state.set(part.id, v);
        }
    }
    Ok(states)
}

/// World transform of every part at `state`: the part's own joint motion followed by its
/// parent's, up to the root.
pub fn part_transforms(
    model: &ArticulatedModel,
    state: &StateVector,
) -> Result<BTreeMap<PartId, RigidTransform>> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let mut local = BTreeMap::new();
    for part in &model.parts {
        let value = state.get(part.id).ok_or(Error::MissingState(part.id))?;
        local.insert(part.id, joint_transform(&part.joint, value)?);
    }
    let mut world = BTreeMap::new();
    for part in &model.parts {
        let mut t = RigidTransform::identity();
        for id in model.tree.path_to_root(part.id)? {
            t = t.then(&local[&id]);
        }
        world.insert(part.id, t);
    }
    Ok(world)
}

/// Model points at `state`; base points stay fixed.
pub fn articulate(model: &ArticulatedModel, state: &StateVector) -> Result<Vec<Vec3>> {
    let transforms = part_transforms(model, state)?;
    let mut out = model.points.clone();
    for part in &model.parts {
        let t = &transforms[&part.id];
        for &i in &part.point_indices {
            out[i] = t.apply(&model.points[i]);
        }
    }
    Ok(out)
}

/// Moves externally sampled canonical points by their owning part's transform at `state`.
/// `owners[i] = None` marks a base point.
pub fn articulate_labeled(
    model: &ArticulatedModel,
    state: &StateVector,
    points: &[Vec3],
    owners: &[Option<PartId>],
) -> Result<Vec<Vec3>> {
    if points.len() != owners.len() {
        return Err(Error::Shape(format!(
            "{} points but {} owner labels",
            points.len(),
            owners.len()
        )));
    }
    let transforms = part_transforms(model, state)?;
    points
        .par_iter()
        .zip(owners)
        .map(|(p, owner)| match owner {
            None => Ok(*p),
            Some(id) => transforms
                .get(id)
                .map(|t| t.apply(p))
                .ok_or_else(|| Error::InvalidArgument(format!("point owned by unknown part {id}"))),
        })
        .collect()
}
