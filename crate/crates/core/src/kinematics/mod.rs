//! Joint motion, forward kinematics over the kinematic tree, and tree construction from
//! part-category distributions.

mod cloud;
mod joint;
mod states;
mod tree;

pub use cloud::LabeledCloud;
pub use joint::{
    apply_joint, check_joint_value, joint_transform, limits_from_bounds, limits_to_bounds,
    rodrigues, RigidTransform,
};
pub use states::{
    articulate, articulate_labeled, part_transforms, sample_model_states, sample_states,
    StateVector, DEFAULT_STATE_COUNT,
};
pub use tree::{
    build_tree, pairwise_affinity, parent_distribution, AffinityMatrix, ParentDistribution,
};
