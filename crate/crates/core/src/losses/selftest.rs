use std::f64::consts::LN_2;

use serde::Serialize;

use super::*;
use crate::model::JointLimits;

/// One closed-form kernel example and its outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestCase {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn case(name: &'static str, value: Result<f64>, expected: f64, tolerance: f64) -> SelftestCase {
    let value = value.unwrap_or(f64::NAN);
    SelftestCase {
        name,
        value,
        expected,
        tolerance,
        passed: (value - expected).abs() <= tolerance,
    }
}

/// Evaluates every documented kernel example.
pub fn selftest() -> Vec<SelftestCase> {
    let w = LossWeights::default();
    let half_gt = [true, true, false, false];
    let probe = [0.9, 0.2, 0.6, 0.01];
    let gt = JointSpec::revolute(
        Vec3::z(),
        Vec3::new(0.1, 0.2, 0.0),
        JointLimits::new(0.5, 0.5),
    );
    let exact = MotionPrediction::from_joint(&gt, 40.0);
    let flipped = MotionPrediction {
        axis: -gt.axis,
        ..exact
    };
    let off = MotionPrediction {
        axis: Vec3::x(),
        origin: gt.pivot + Vec3::new(0.1, -0.2, 0.0),
        ..exact
    };
    let three = LossComponents {
        triplet: Some(1.0),
        mask: Some(1.0),
        score: Some(1.0),
        motion: Some(1.0),
        ..Default::default()
    };
    let antipodal = (1.0 + (-2f64).exp()).ln();

    vec![
        case(
            "triplet degenerate",
            triplet_loss(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0], 0.5),
            LN_2,
            1e-6,
        ),
        case(
            "triplet antipodal",
            triplet_loss(&[1.0, 0.0], &[2.0, 0.0], &[-1.0, 0.0], 1.0),
            antipodal,
            1e-6,
        ),
        case(
            "focal exact",
            focal_loss(&[1.0, 1.0, 0.0, 0.0], &half_gt, 2.0),
            0.0,
            1e-10,
        ),
        case(
            "focal at 0.5",
            focal_loss(&[0.5; 4], &half_gt, 2.0),
            0.25 * LN_2,
            1e-6,
        ),
        case(
            "focal gamma 0 vs bce",
            focal_loss(&probe, &half_gt, 0.0),
            bce_loss(&probe, &half_gt).unwrap_or(f64::NAN),
            1e-12,
        ),
        case(
            "dice exact",
            dice_loss(&[1.0, 1.0, 0.0, 0.0], &half_gt),
            DICE_EPS / (4.0 + DICE_EPS),
            1e-12,
        ),
        case(
            "dice disjoint",
            dice_loss(&[1.0; 4], &[false; 4]),
            1.0,
            1e-12,
        ),
        case(
            "dice half overlap",
            dice_loss(&[0.5; 4], &half_gt),
            0.5,
            1e-6,
        ),
        case("qfl calibrated", confidence_loss(0.0, 0.5, 2.0), 0.0, 1e-12),
        case(
            "qfl at 0.5",
            confidence_loss(0.0, 1.0, 2.0),
            0.25 * LN_2,
            1e-6,
        ),
        case(
            "motion exact",
            motion_loss(&exact, &gt, &w).map(|t| t.total),
            0.0,
            1e-12,
        ),
        case(
            "motion flipped axis",
            motion_loss(&flipped, &gt, &w).map(|t| t.dir),
            0.0,
            1e-12,
        ),
        case(
            "motion orthogonal axis",
            motion_loss(&off, &gt, &w).map(|t| t.dir),
            1.0,
            1e-12,
        ),
        case(
            "motion origin l1",
            motion_loss(&off, &gt, &w).map(|t| t.origin),
            0.3,
            1e-12,
        ),
        case(
            "structure one-hot",
            structure_loss(&[[0.0, 1.0]], &[1]),
            0.0,
            1e-12,
        ),
        case(
            "structure uniform",
            structure_loss(&[[0.25; 4]], &[0]),
            4f64.ln(),
            1e-6,
        ),
        case(
            "structure mean",
            structure_loss(&[[0.5, 0.5], [1.0, 0.0]], &[0, 0]),
            LN_2 / 2.0,
            1e-12,
        ),
        case(
            "category saturated",
            object_category_loss(&[30.0, 0.0, 0.0], 0),
            0.0,
            1e-12,
        ),
        case(
            "category uniform",
            object_category_loss(&[0.0; 5], 2),
            5f64.ln(),
            1e-12,
        ),
        case(
            "stage 1",
            stage_loss(
                1,
                &LossComponents {
                    triplet: Some(0.7),
                    ..Default::default()
                },
                &w,
            ),
            0.7,
            1e-12,
        ),
        case("stage 3", stage_loss(3, &three, &w), 3.2, 1e-12),
        case(
            "stage 3 ramp 0",
            stage_loss(
                3,
                &LossComponents {
                    motion_ramp: 0.0,
                    ..three
                },
                &w,
            ),
            2.2,
            1e-12,
        ),
    ]
}
