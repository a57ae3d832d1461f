//! Training-objective reference kernels.
//!
//! Probabilities are clamped to `[1e-7, 1 − 1e-7]` before any logarithm. Per-point kernels
//! reduce by the mean over points; per-query kernels reduce by the mean over matched queries.

mod selftest;

use serde::Serialize;

pub use selftest::{selftest, SelftestCase};

use crate::model::{JointSpec, JointType, Vec3};
use crate::{Error, Result};

pub const PROB_CLAMP: f64 = 1e-7;
pub const DICE_EPS: f64 = 1e-6;
const MIN_NORM: f64 = 1e-12;
const ROW_SUM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossWeights {
    pub triplet: f64,
    pub mask: f64,
    pub score: f64,
    pub motion: f64,
    pub focal: f64,
    pub dice: f64,
    pub gamma: f64,
    pub beta: f64,
    pub motion_type: f64,
    pub motion_dir: f64,
    pub motion_origin: f64,
    pub motion_limit: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            triplet: 0.2,
            mask: 1.0,
            score: 1.0,
            motion: 1.0,
            focal: 1.0,
            dice: 1.0,
            gamma: 2.0,
            beta: 2.0,
            motion_type: 1.0,
            motion_dir: 1.0,
            motion_origin: 1.0,
            motion_limit: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.triplet,
            self.mask,
            self.score,
            self.motion,
            self.focal,
            self.dice,
            self.gamma,
            self.beta,
            self.motion_type,
            self.motion_dir,
            self.motion_origin,
            self.motion_limit,
        ];
        if all.iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "loss weights must be finite and ≥ 0".into(),
            ))
        }
    }
}

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_row(pred: &[f64], gt: &[bool]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::Shape(format!(
            "prediction has {} points, target has {}",
            pred.len(),
            gt.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Shape("mask rows must be non-empty".into()));
    }
    if let Some(p) = pred.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!(
            "mask probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < MIN_NORM || nb < MIN_NORM {
        return Err(Error::ZeroVector);
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb))
}

/// Contrastive triplet loss; `a` and `b` share a part, `c` does not.
pub fn triplet_loss(a: &[f64], b: &[f64], c: &[f64], tau: f64) -> Result<f64> {
    if a.len() != b.len() || a.len() != c.len() {
        return Err(Error::Shape(
            "triplet embeddings differ in dimension".into(),
        ));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "temperature {tau} must be positive"
        )));
    }
    let (ab, ac, bc) = (
        cosine(a, b)? / tau,
        cosine(a, c)? / tau,
        cosine(b, c)? / tau,
    );
    // −log(s_ab / (s_ab + s_x)) = log(1 + exp(x − ab)), evaluated stably
    let term = |x: f64| softplus(x - ab);
    Ok(0.5 * (term(ac) + term(bc)))
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mean binary cross-entropy over points.
pub fn bce_loss(pred: &[f64], gt: &[bool]) -> Result<f64> {
    check_row(pred, gt)?;
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let p = clamp_prob(p);
            if g {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Mean focal loss over points.
pub fn focal_loss(pred: &[f64], gt: &[bool], gamma: f64) -> Result<f64> {
    check_row(pred, gt)?;
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "focal gamma {gamma} must be ≥ 0"
        )));
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let p = clamp_prob(p);
            let pt = if g { p } else { 1.0 - p };
            -(1.0 - pt).powf(gamma) * pt.ln()
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

pub fn dice_loss(pred: &[f64], gt: &[bool]) -> Result<f64> {
    check_row(pred, gt)?;
    let (mut inter, mut sp, mut sg) = (0.0, 0.0, 0.0);
    for (&p, &g) in pred.iter().zip(gt) {
        sp += p;
        if g {
            inter += p;
            sg += 1.0;
        }
    }
    Ok(1.0 - 2.0 * inter / (sp + sg + DICE_EPS))
}

/// Weighted focal plus Dice loss for one matched query.
pub fn mask_loss(pred: &[f64], gt: &[bool], w: &LossWeights) -> Result<f64> {
    Ok(w.focal * focal_loss(pred, gt, w.gamma)? + w.dice * dice_loss(pred, gt)?)
}

/// Quality focal loss of a confidence logit against an IoU target.
pub fn confidence_loss(c_hat: f64, u: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!(
            "confidence target {u} outside [0, 1]"
        )));
    }
    if !c_hat.is_finite() {
        return Err(Error::InvalidArgument("confidence logit not finite".into()));
    }
    let s = sigmoid(c_hat);
    let p = clamp_prob(s);
    let bce = -u * p.ln() - (1.0 - u) * (1.0 - p).ln();
    Ok((s - u).abs().powf(beta) * bce)
}

/// Joint prediction of one query. `type_logits` are ordered fixed, revolute, prismatic,
/// continuous.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionPrediction {
    pub type_logits: [f64; 4],
    pub axis: Vec3,
    pub origin: Vec3,
    pub center: f64,
    pub span: f64,
}

impl MotionPrediction {
    /// A prediction that reproduces `joint` exactly, with `margin` on the correct type logit.
    pub fn from_joint(joint: &JointSpec, margin: f64) -> Self {
        let mut type_logits = [0.0; 4];
        type_logits[joint.jtype.index()] = margin;
        Self {
            type_logits,
            axis: joint.axis,
            origin: joint.pivot,
            center: joint.limits.center,
            span: joint.limits.span,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MotionLossTerms {
    pub type_ce: f64,
    pub dir: f64,
    pub origin: f64,
    pub limit: f64,
    pub total: f64,
}

/// Motion loss for one matched query. Direction, origin, and limit terms apply only where
/// the ground-truth joint defines them: direction for moving joints, origin for rotational
/// joints, limits for bounded joints.
pub fn motion_loss(
    pred: &MotionPrediction,
    gt: &JointSpec,
    w: &LossWeights,
) -> Result<MotionLossTerms> {
    let type_ce = cross_entropy(&pred.type_logits, gt.jtype.index())?;
    let dir = if gt.jtype == JointType::Fixed {
        0.0
    } else {
        let pn = pred.axis.norm();
        if pn < MIN_NORM {
            return Err(Error::ZeroVector);
        }
        if (gt.axis.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::NonUnitAxis(gt.axis.norm()));
        }
        1.0 - (pred.axis / pn).dot(&gt.axis.normalize()).abs().min(1.0)
    };
    let origin = if gt.jtype.is_rotational() {
        (pred.origin - gt.pivot).abs().sum()
    } else {
        0.0
    };
    let limit = if gt.jtype.is_bounded() {
        (pred.center - gt.limits.center).abs() + (pred.span - gt.limits.span).abs()
    } else {
        0.0
    };
    Ok(MotionLossTerms {
        type_ce,
        dir,
        origin,
        limit,
        total: w.motion_type * type_ce
            + w.motion_dir * dir
            + w.motion_origin * origin
            + w.motion_limit * limit,
    })
}

/// Term-wise mean of [`motion_loss`] over matched queries.
pub fn motion_loss_mean(
    pairs: &[(MotionPrediction, JointSpec)],
    w: &LossWeights,
) -> Result<MotionLossTerms> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no matched queries".into()));
    }
    let mut acc = MotionLossTerms::default();
    for (p, g) in pairs {
        let t = motion_loss(p, g, w)?;
        acc.type_ce += t.type_ce;
        acc.dir += t.dir;
        acc.origin += t.origin;
        acc.limit += t.limit;
        acc.total += t.total;
    }
    let n = pairs.len() as f64;
    Ok(MotionLossTerms {
        type_ce: acc.type_ce / n,
        dir: acc.dir / n,
        origin: acc.origin / n,
        limit: acc.limit / n,
        total: acc.total / n,
    })
}

/// Softmax cross-entropy of `logits` against class `gt`.
pub fn cross_entropy(logits: &[f64], gt: usize) -> Result<f64> {
    if gt >= logits.len() {
        return Err(Error::IndexOutOfRange {
            index: gt,
            len: logits.len(),
        });
    }
    if !logits.iter().all(|l| l.is_finite()) {
        return Err(Error::InvalidArgument("logits must be finite".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok(lse - logits[gt])
}

pub fn object_category_loss(logits: &[f64], gt: usize) -> Result<f64> {
    cross_entropy(logits, gt)
}

/// Mean negative log-likelihood of each row's ground-truth parent.
pub fn structure_loss<R: AsRef<[f64]>>(parent_probs: &[R], gt_parents: &[usize]) -> Result<f64> {
    if parent_probs.len() != gt_parents.len() {
        return Err(Error::Shape(format!(
            "{} distributions for {} targets",
            parent_probs.len(),
            gt_parents.len()
        )));
    }
    if parent_probs.is_empty() {
        return Err(Error::InvalidArgument("no matched queries".into()));
    }
    let mut sum = 0.0;
    for (row, &g) in parent_probs.iter().zip(gt_parents) {
        let row = row.as_ref();
        if g >= row.len() {
            return Err(Error::IndexOutOfRange {
                index: g,
                len: row.len(),
            });
        }
        let total: f64 = row.iter().sum();
        if !row.iter().all(|p| (0.0..=1.0).contains(p)) || (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "parent distribution sums to {total}, expected 1"
            )));
        }
        sum -= row[g].max(PROB_CLAMP).ln();
    }
    Ok(sum / parent_probs.len() as f64)
}

/// Named loss values feeding [`stage_loss`]; `motion_ramp` scales the motion term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossComponents {
    pub triplet: Option<f64>,
    pub object: Option<f64>,
    pub mask: Option<f64>,
    pub score: Option<f64>,
    pub motion: Option<f64>,
    pub structure: Option<f64>,
    pub motion_ramp: f64,
}

impl Default for LossComponents {
    fn default() -> Self {
        Self {
            triplet: None,
            object: None,
            mask: None,
            score: None,
            motion: None,
            structure: None,
            motion_ramp: 1.0,
        }
    }
}

/// Objective of training stage 1 to 4.
pub fn stage_loss(stage: u8, c: &LossComponents, w: &LossWeights) -> Result<f64> {
    let need = |v: Option<f64>, name: &'static str| v.ok_or(Error::MissingComponent(name));
    match stage {
        1 => need(c.triplet, "triplet"),
        2 => need(c.object, "object"),
        3 => {
            if !(0.0..=1.0).contains(&c.motion_ramp) {
                return Err(Error::InvalidArgument(format!(
                    "motion ramp {} outside [0, 1]",
                    c.motion_ramp
                )));
            }
            Ok(w.triplet * need(c.triplet, "triplet")?
                + w.mask * need(c.mask, "mask")?
                + w.score * need(c.score, "score")?
                + c.motion_ramp * w.motion * need(c.motion, "motion")?)
        }
        4 => need(c.structure, "structure"),
        s => Err(Error::InvalidArgument(format!("stage {s} outside 1..=4"))),
    }
}
