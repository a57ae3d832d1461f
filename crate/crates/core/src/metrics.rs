//! Geometry and kinematics evaluation.
//!
//! Chamfer distance is the symmetric sum of mean squared nearest-neighbour distances.
//! Inputs to [`evaluate`] are assumed to be pre-aligned in the canonical frame.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::assignment::{hungarian, matching_cost, MaskSet, MatchResult};
use crate::geometry::{nearest_neighbor_distances, KdTree};
use crate::kinematics::{sample_model_states, LabeledCloud};
use crate::model::{validate_model, ArticulatedModel, JointType, PartId, PartMeshes, Vec3};
use crate::numfmt::round_json;
use crate::{Error, Result};

pub const DEFAULT_STATES: usize = crate::kinematics::DEFAULT_STATE_COUNT;
pub const DEFAULT_POINTS: usize = 100_000;
pub const DEFAULT_TAU: f64 = 0.05;
const MIN_NORM: f64 = 1e-12;
const PARALLEL_TOL: f64 = 1e-9;

fn check_clouds(a: &[Vec3], b: &[Vec3]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "point clouds must be non-empty".into(),
        ));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    check_clouds(a, b)?;
    let sq = |d: Vec<f64>| d.iter().map(|x| x * x).collect::<Vec<_>>();
    Ok(mean(&sq(nearest_neighbor_distances(a, b)?)) + mean(&sq(nearest_neighbor_distances(b, a)?)))
}

pub fn fscore(a: &[Vec3], b: &[Vec3], tau: f64) -> Result<f64> {
    check_clouds(a, b)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "F-score threshold {tau} must be positive"
        )));
    }
    let within = |d: Vec<f64>| d.iter().filter(|&&x| x <= tau).count() as f64 / d.len() as f64;
    let precision = within(nearest_neighbor_distances(a, b)?);
    let recall = within(nearest_neighbor_distances(b, a)?);
    Ok(if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    })
}

fn unit(v: &Vec3) -> Result<Vec3> {
    let n = v.norm();
    if n < MIN_NORM || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v / n)
}

/// Unsigned angle between two axis lines, in `[0, π/2]`.
pub fn axis_error(a_p: &Vec3, a_g: &Vec3) -> Result<f64> {
    let d = unit(a_p)?.dot(&unit(a_g)?).clamp(-1.0, 1.0);
    Ok(d.acos().min((-d).acos()))
}

/// Distance between the predicted and ground-truth axis lines along their common
/// perpendicular; for parallel axes, the distance from `o_p` to the ground-truth line.
pub fn pivot_error(o_p: &Vec3, a_p: &Vec3, o_g: &Vec3, a_g: &Vec3) -> Result<f64> {
    let (up, ug) = (unit(a_p)?, unit(a_g)?);
    let cross = up.cross(&ug);
    let n = cross.norm();
    let d = o_p - o_g;
    if n > PARALLEL_TOL {
        Ok(d.dot(&cross).abs() / n)
    } else {
        Ok((d - ug * d.dot(&ug)).norm())
    }
}

/// Fraction of matched pairs whose joint types agree; `None` without matches.
pub fn type_accuracy(
    matching: &MatchResult,
    pred_types: &[JointType],
    gt_types: &[JointType],
) -> Option<f64> {
    if matching.pairs.is_empty() {
        return None;
    }
    let correct = matching
        .pairs
        .iter()
        .filter(|&&(i, j)| pred_types.get(i).is_some() && pred_types.get(i) == gt_types.get(j))
        .count();
    Some(correct as f64 / matching.pairs.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub n_states: usize,
    pub n_points: usize,
    pub tau: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n_states: DEFAULT_STATES,
            n_points: DEFAULT_POINTS,
            tau: DEFAULT_TAU,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateMetrics {
    pub cd: f64,
    pub fscore: f64,
}

/// Kinematic comparison of one matched part pair. Axis error is defined when both joints
/// move; pivot error when both rotate.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMetrics {
    pub pred_part: PartId,
    pub gt_part: PartId,
    pub pred_type: JointType,
    pub gt_type: JointType,
    pub axis_err: Option<f64>,
    pub pivot_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub per_state: Vec<StateMetrics>,
    pub cd_mean: f64,
    pub fscore_mean: f64,
    pub type_accuracy: Option<f64>,
    pub per_joint: Vec<JointMetrics>,
    pub axis_err_mean: Option<f64>,
    pub pivot_err_mean: Option<f64>,
    pub matching: MatchResult,
}

impl MetricReport {
    pub fn axis_errors(&self) -> Vec<f64> {
        self.per_joint.iter().filter_map(|j| j.axis_err).collect()
    }

    pub fn pivot_errors(&self) -> Vec<f64> {
        self.per_joint.iter().filter_map(|j| j.pivot_err).collect()
    }

    /// JSON form with every float rounded to 9 significant digits.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "cd_mean": self.cd_mean,
            "fscore_mean": self.fscore_mean,
            "type_accuracy": self.type_accuracy,
            "axis_err_mean": self.axis_err_mean,
            "pivot_err_mean": self.pivot_err_mean,
            "per_state": self.per_state.iter().enumerate().map(|(k, s)| json!({
                "state": k,
                "cd": s.cd,
                "fscore": s.fscore,
            })).collect::<Vec<_>>(),
            "per_joint": self.per_joint.iter().map(|j| json!({
                "pred_part": j.pred_part.0,
                "gt_part": j.gt_part.0,
                "pred_type": j.pred_type.name(),
                "gt_type": j.gt_type.name(),
                "axis_err": j.axis_err,
                "pivot_err": j.pivot_err,
            })).collect::<Vec<_>>(),
            "matching": {
                "pairs": self.matching.pairs,
                "unmatched": self.matching.unmatched_queries,
                "total_cost": self.matching.total_cost,
            },
        });
        round_json(&mut v);
        v
    }
}

fn cloud(
    model: &ArticulatedModel,
    meshes: Option<&PartMeshes>,
    cfg: &EvalConfig,
) -> Result<LabeledCloud> {
    match meshes {
        Some(m) => LabeledCloud::from_meshes(model, m, cfg.n_points, cfg.seed),
        None => Ok(LabeledCloud::from_model(model)),
    }
}

/// Per-part hard masks of both objects over the ground-truth canonical points. Predicted
/// labels are used directly when both clouds coincide and are otherwise transferred from
/// each ground-truth point's nearest predicted point.
fn part_masks(
    pred: &ArticulatedModel,
    pred_cloud: &LabeledCloud,
    gt: &ArticulatedModel,
    gt_cloud: &LabeledCloud,
) -> Result<(MaskSet, MaskSet)> {
    let m = gt_cloud.points.len();
    let pred_labels: Vec<Option<PartId>> = if pred_cloud.points == gt_cloud.points {
        pred_cloud.owners.clone()
    } else {
        let tree = KdTree::build(&pred_cloud.points)?;
        gt_cloud
            .points
            .par_iter()
            .map(|p| pred_cloud.owners[tree.nearest(p).0])
            .collect()
    };
    let masks = |model: &ArticulatedModel, labels: &[Option<PartId>]| {
        let rows = model
            .parts
            .iter()
            .map(|part| labels.iter().map(|l| *l == Some(part.id)).collect())
            .collect();
        MaskSet::new(m, rows)
    };
    Ok((masks(pred, &pred_labels)?, masks(gt, &gt_cloud.owners)?))
}

fn mean_opt(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| mean(v))
}

/// Compares a predicted articulated object against ground truth over `n_states` paired
/// articulation states and matches parts at the canonical state for kinematic errors.
/// Without meshes each model's own points are articulated; with meshes both objects are
/// resampled with `n_points` area-uniform samples.
pub fn evaluate(
    pred: &ArticulatedModel,
    pred_meshes: Option<&PartMeshes>,
    gt: &ArticulatedModel,
    gt_meshes: Option<&PartMeshes>,
    cfg: &EvalConfig,
) -> Result<MetricReport> {
    for model in [pred, gt] {
        let v = validate_model(model);
        if !v.is_empty() {
            return Err(Error::Invalid(v));
        }
    }
    if cfg.n_points == 0 {
        return Err(Error::InvalidArgument(
            "point count must be positive".into(),
        ));
    }
    if !(cfg.tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "F-score threshold {} must be positive",
            cfg.tau
        )));
    }
    let pred_cloud = cloud(pred, pred_meshes, cfg)?;
    let gt_cloud = cloud(gt, gt_meshes, cfg)?;
    if pred_cloud.points.is_empty() || gt_cloud.points.is_empty() {
        return Err(Error::Degenerate("object has no surface points".into()));
    }
    let pred_states = sample_model_states(pred, cfg.n_states)?;
    let gt_states = sample_model_states(gt, cfg.n_states)?;

    let per_state = (0..cfg.n_states)
        .into_par_iter()
        .map(|k| {
            let a = pred_cloud.posed(pred, &pred_states[k])?;
            let b = gt_cloud.posed(gt, &gt_states[k])?;
            Ok(StateMetrics {
                cd: chamfer(&a, &b)?,
                fscore: fscore(&a, &b, cfg.tau)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (pred_masks, gt_masks) = part_masks(pred, &pred_cloud, gt, &gt_cloud)?;
    let cost = if pred_masks.is_empty() || gt_masks.is_empty() || gt_masks.points() == 0 {
        DMatrix::zeros(pred_masks.len(), gt_masks.len())
    } else {
        matching_cost(&pred_masks.as_soft(), &gt_masks, 1.0, 1.0)?
    };
    let matching = hungarian(&cost)?;

    let mut per_joint = Vec::with_capacity(matching.pairs.len());
    for &(i, j) in &matching.pairs {
        let (p, g) = (&pred.parts[i], &gt.parts[j]);
        let (pj, gj) = (&p.joint, &g.joint);
        let moving = pj.jtype != JointType::Fixed && gj.jtype != JointType::Fixed;
        let rotating = pj.jtype.is_rotational() && gj.jtype.is_rotational();
        per_joint.push(JointMetrics {
            pred_part: p.id,
            gt_part: g.id,
            pred_type: pj.jtype,
            gt_type: gj.jtype,
            axis_err: if moving {
                Some(axis_error(&pj.axis, &gj.axis)?)
            } else {
                None
            },
            pivot_err: if rotating {
                Some(pivot_error(&pj.pivot, &pj.axis, &gj.pivot, &gj.axis)?)
            } else {
                None
            },
        });
    }
    let pred_types: Vec<JointType> = pred.parts.iter().map(|p| p.joint.jtype).collect();
    let gt_types: Vec<JointType> = gt.parts.iter().map(|p| p.joint.jtype).collect();

    let cds: Vec<f64> = per_state.iter().map(|s| s.cd).collect();
    let fs: Vec<f64> = per_state.iter().map(|s| s.fscore).collect();
    let mut report = MetricReport {
        cd_mean: mean(&cds),
        fscore_mean: mean(&fs),
        type_accuracy: type_accuracy(&matching, &pred_types, &gt_types),
        per_state,
        per_joint,
        axis_err_mean: None,
        pivot_err_mean: None,
        matching,
    };
    report.axis_err_mean = mean_opt(&report.axis_errors());
    report.pivot_err_mean = mean_opt(&report.pivot_errors());
    Ok(report)
}
