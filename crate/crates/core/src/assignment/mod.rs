//! Query-to-part matching and query bookkeeping.

mod hungarian;
mod masks;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use hungarian::{hungarian, MatchResult};
pub use masks::{read_masks, write_hard_masks, write_soft_masks, MaskFile, MaskSet, MaskSizeKey};

use crate::geometry::FeatureSet;
use crate::losses::{bce_loss, clamp_prob, dice_loss, sigmoid};
use crate::model::Vec3;
use crate::{Error, Result};

pub const DEFAULT_QUERY_COUNT: usize = 100;
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.5;
pub const HARD_MASK_THRESHOLD: f64 = 0.5;

/// Paired position and content queries with per-query confidences and part-category logits.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySet {
    positions: Vec<Vec3>,
    contents: FeatureSet,
    confidences: Vec<f64>,
    part_logits: DMatrix<f64>,
}

impl QuerySet {
    pub fn new(
        positions: Vec<Vec3>,
        contents: FeatureSet,
        confidences: Vec<f64>,
        part_logits: DMatrix<f64>,
    ) -> Result<Self> {
        let n = positions.len();
        if contents.len() != n || confidences.len() != n || part_logits.nrows() != n {
            return Err(Error::Shape(format!(
                "query rows disagree: {} positions, {} contents, {} confidences, {} logit rows",
                n,
                contents.len(),
                confidences.len(),
                part_logits.nrows()
            )));
        }
        if let Some(c) = confidences.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidArgument(format!(
                "confidence {c} outside [0, 1]"
            )));
        }
        Ok(Self {
            positions,
            contents,
            confidences,
            part_logits,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn contents(&self) -> &FeatureSet {
        &self.contents
    }

    pub fn confidences(&self) -> &[f64] {
        &self.confidences
    }

    pub fn part_logits(&self) -> &DMatrix<f64> {
        &self.part_logits
    }

    fn select(&self, keep: &[usize]) -> Self {
        Self {
            positions: keep.iter().map(|&i| self.positions[i]).collect(),
            contents: self.contents.select_rows(keep),
            confidences: keep.iter().map(|&i| self.confidences[i]).collect(),
            part_logits: self.part_logits.select_rows(keep),
        }
    }
}

/// Mask logits of each query over the surface points.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftMaskSet {
    logits: Vec<Vec<f64>>,
    points: usize,
}

impl SoftMaskSet {
    pub fn from_logits(logits: Vec<Vec<f64>>, points: usize) -> Result<Self> {
        if logits.iter().any(|r| r.len() != points) {
            return Err(Error::Shape(format!(
                "every mask row must have {points} points"
            )));
        }
        if !logits.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("mask logits must be finite".into()));
        }
        Ok(Self { logits, points })
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn logits(&self) -> &[Vec<f64>] {
        &self.logits
    }

    pub fn soft(&self) -> Vec<Vec<f64>> {
        self.logits
            .iter()
            .map(|r| r.iter().map(|&x| sigmoid(x)).collect())
            .collect()
    }

    pub fn hard(&self) -> MaskSet {
        let rows = self
            .logits
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| sigmoid(x) > HARD_MASK_THRESHOLD)
                    .collect()
            })
            .collect();
        MaskSet::new(self.points, rows).expect("rows have the stored length")
    }
}

/// Dot products of each query content vector with each point feature.
pub fn compute_mask_logits(contents: &FeatureSet, h: &FeatureSet) -> Result<SoftMaskSet> {
    if contents.dim() != h.dim() {
        return Err(Error::Shape(format!(
            "query contents have dimension {}, point features {}",
            contents.dim(),
            h.dim()
        )));
    }
    let logits: Vec<Vec<f64>> = (0..contents.len())
        .into_par_iter()
        .map(|i| {
            let q = contents.row(i);
            h.rows()
                .map(|f| q.iter().zip(f).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    SoftMaskSet::from_logits(logits, h.len())
}

/// `N_q × K` matching cost: weighted mean BCE plus Dice between each soft prediction row and
/// each ground-truth mask. Predictions are clamped to `[1e-7, 1 − 1e-7]`.
pub fn matching_cost<R: AsRef<[f64]> + Sync>(
    pred_soft: &[R],
    gt: &MaskSet,
    w_bce: f64,
    w_dice: f64,
) -> Result<DMatrix<f64>> {
    let m = gt.points();
    let clamped: Vec<Vec<f64>> = pred_soft
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let r = r.as_ref();
            if r.len() != m {
                return Err(Error::Shape(format!(
                    "prediction row {i} has {} points, ground truth has {m}",
                    r.len()
                )));
            }
            if let Some(p) = r.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidArgument(format!(
                    "mask probability {p} outside [0, 1]"
                )));
            }
            Ok(r.iter().map(|&p| clamp_prob(p)).collect())
        })
        .collect::<Result<_>>()?;
    let (n, k) = (clamped.len(), gt.len());
    let cells: Vec<f64> = (0..n * k)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / k, c % k);
            let (p, g) = (&clamped[i], gt.row(j));
            Ok(w_bce * bce_loss(p, g)? + w_dice * dice_loss(p, g)?)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(n, k, &cells))
}

fn iou(a: &[bool], b: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mask IoU of each matched query with its ground-truth part; zero for unmatched queries.
pub fn confidence_targets(
    pred_hard: &MaskSet,
    gt: &MaskSet,
    matching: &MatchResult,
) -> Result<Vec<f64>> {
    if pred_hard.points() != gt.points() {
        return Err(Error::Shape(format!(
            "prediction masks have {} points, ground truth {}",
            pred_hard.points(),
            gt.points()
        )));
    }
    let mut u = vec![0.0; pred_hard.len()];
    for &(i, j) in &matching.pairs {
        if i >= pred_hard.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: pred_hard.len(),
            });
        }
        if j >= gt.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: gt.len(),
            });
        }
        u[i] = iou(pred_hard.row(i), gt.row(j));
    }
    Ok(u)
}

/// Adds position and content deltas; confidences and part logits are unchanged.
pub fn residual_update(q: &QuerySet, delta_p: &[Vec3], delta_c: &FeatureSet) -> Result<QuerySet> {
    if delta_p.len() != q.len() || delta_c.len() != q.len() || delta_c.dim() != q.contents.dim() {
        return Err(Error::Shape(format!(
            "deltas ({} positions, {}×{} contents) do not match {} queries of dimension {}",
            delta_p.len(),
            delta_c.len(),
            delta_c.dim(),
            q.len(),
            q.contents.dim()
        )));
    }
    let mut out = q.clone();
    for (p, d) in out.positions.iter_mut().zip(delta_p) {
        *p += d;
    }
    for i in 0..q.len() {
        for (c, d) in out.contents.row_mut(i).iter_mut().zip(delta_c.row(i)) {
            *c += d;
        }
    }
    Ok(out)
}

/// Indices of queries whose confidence is at least `threshold`, in order.
pub fn kept_indices(confidences: &[f64], threshold: f64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    Ok(confidences
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= threshold)
        .map(|(i, _)| i)
        .collect())
}

/// Drops queries with confidence below `threshold`, preserving row order.
pub fn filter_queries(q: &QuerySet, threshold: f64) -> Result<QuerySet> {
    Ok(q.select(&kept_indices(&q.confidences, threshold)?))
}
