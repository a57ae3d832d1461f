//! Closed-form computational core for monocular articulated 3D reconstruction.
//!
//! The crate is split by pipeline stage:
//!
//! - [`model`]: articulated-object domain types, validation, JSON files, mesh IO and URDF export
//! - [`geometry`]: surface sampling, sparse-voxel trilinear interpolation, triplane scatter/gather,
//!   exact nearest-neighbour search and global pooling
//! - [`kinematics`]: joint transforms, articulation-state sampling, forward kinematics and
//!   kinematic-tree construction from part-category distributions
//! - [`assignment`]: query/part mask logits, Hungarian matching, IoU confidence targets and
//!   query filtering
//! - [`losses`]: reference scalar kernels for every training objective
//! - [`fixtures`]: constructed objects with known geometry
//! - [`metrics`]: Chamfer distance, F-score, joint-type accuracy, axis/pivot errors and the
//!   state-averaged evaluation protocol
//!
//! All geometry lives in the canonical object frame, the axis-aligned cube `[-0.5, 0.5]^3`.

// Negated comparisons are used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
mod error;
pub mod fixtures;
pub mod geometry;
pub mod kinematics;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod numfmt;

pub use error::{Error, Result};
pub use model::{
    ArticulatedModel, JointLimits, JointSpec, JointType, KinematicTree, Parent, PartId, PartMeshes,
    PartSpec, TriMesh, Vec3, Violation,
};
