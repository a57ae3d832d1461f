use nalgebra::Matrix3;

use crate::model::{JointLimits, JointSpec, JointType};
use crate::{Error, Result, Vec3};

const AXIS_UNIT_TOL: f64 = 1e-6;
const LIMIT_TOL: f64 = 1e-9;

/// Rigid motion `p ↦ R·p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn translation(t: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` about the line through `pivot` with unit direction `axis`.
    pub fn rotation_about(axis: &Vec3, pivot: &Vec3, angle: f64) -> Self {
        let rotation = rodrigues(axis, angle);
        Self {
            rotation,
            translation: pivot - rotation * pivot,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `outer ∘ self`: applies `self` first, then `outer`.
    pub fn then(&self, outer: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: outer.rotation * self.rotation,
            translation: outer.rotation * self.translation + outer.translation,
        }
    }
}

/// Rotation matrix `I + sinθ·K + (1 − cosθ)·K²` for unit `axis` with cross-product matrix `K`.
pub fn rodrigues(axis: &Vec3, angle: f64) -> Matrix3<f64> {
    let k = Matrix3::new(
        0.0, -axis.z, axis.y, //
        axis.z, 0.0, -axis.x, //
        -axis.y, axis.x, 0.0,
    );
    let (s, c) = angle.sin_cos();
    Matrix3::identity() + k * s + k * k * (1.0 - c)
}

/// Checks that `value` is admissible for `joint`: within `[center − span, center + span]` for
/// bounded joints (or exactly the canonical value 0), zero for fixed joints, anything finite for
/// continuous joints.
pub fn check_joint_value(joint: &JointSpec, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "joint value {value} is not finite"
        )));
    }
    let (lower, upper) = match joint.jtype {
        JointType::Continuous => return Ok(()),
        JointType::Fixed => (0.0, 0.0),
        JointType::Revolute | JointType::Prismatic => (joint.limits.lower(), joint.limits.upper()),
    };
    if value == 0.0 || (value >= lower - LIMIT_TOL && value <= upper + LIMIT_TOL) {
        Ok(())
    } else {
        Err(Error::OutOfLimits {
            value,
            lower,
            upper,
        })
    }
}

fn unit_axis(joint: &JointSpec) -> Result<Vec3> {
    let norm = joint.axis.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > AXIS_UNIT_TOL {
        return Err(Error::NonUnitAxis(norm));
    }
    Ok(joint.axis / norm)
}

/// Rigid motion produced by setting `joint` to `value` from the canonical pose.
pub fn joint_transform(joint: &JointSpec, value: f64) -> Result<RigidTransform> {
    check_joint_value(joint, value)?;
    match joint.jtype {
        JointType::Fixed => Ok(RigidTransform::identity()),
        JointType::Prismatic => Ok(RigidTransform::translation(unit_axis(joint)? * value)),
        JointType::Revolute | JointType::Continuous => Ok(RigidTransform::rotation_about(
            &unit_axis(joint)?,
            &joint.pivot,
            value,
        )),
    }
}

/// Moves `points` by a single joint set to `value`.
pub fn apply_joint(joint: &JointSpec, value: f64, points: &[Vec3]) -> Result<Vec<Vec3>> {
    let t = joint_transform(joint, value)?;
    Ok(points.iter().map(|p| t.apply(p)).collect())
}

/// Center–span form of the range `[l_min, l_max]`.
pub fn limits_from_bounds(l_min: f64, l_max: f64) -> Result<JointLimits> {
    if !(l_min <= l_max) {
        return Err(Error::InvalidArgument(format!(
            "lower bound {l_min} exceeds upper bound {l_max}"
        )));
    }
    Ok(JointLimits::new(
        (l_min + l_max) / 2.0,
        (l_max - l_min) / 2.0,
    ))
}

/// `(l_min, l_max)` of a center–span range.
pub fn limits_to_bounds(limits: &JointLimits) -> (f64, f64) {
    (limits.lower(), limits.upper())
}
