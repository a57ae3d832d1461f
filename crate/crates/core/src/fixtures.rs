//! Constructed objects with known geometry, for tests, benchmarks and examples.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::geometry::sample_surface_points;
use crate::model::{
    ArticulatedModel, JointLimits, JointSpec, KinematicTree, Parent, PartId, PartMeshes, PartSpec,
    TriMesh, Vec3,
};
use crate::Result;

/// Closed axis-aligned box with outward-facing triangles.
pub fn box_mesh(min: Vec3, max: Vec3) -> TriMesh {
    let v = |x: usize, y: usize, z: usize| {
        Vec3::new(
            if x == 0 { min.x } else { max.x },
            if y == 0 { min.y } else { max.y },
            if z == 0 { min.z } else { max.z },
        )
    };
    let vertices = (0..8)
        .map(|i| v(i & 1, (i >> 1) & 1, (i >> 2) & 1))
        .collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3], // z = min
        [4, 5, 6],
        [5, 7, 6], // z = max
        [0, 1, 4],
        [1, 5, 4], // y = min
        [2, 6, 3],
        [3, 6, 7], // y = max
        [0, 4, 2],
        [2, 4, 6], // x = min
        [1, 3, 5],
        [3, 7, 5], // x = max
    ];
    TriMesh::new(vertices, faces)
}

/// Builds a model whose points are `points_per_mesh` surface samples of each mesh (base first,
/// then parts in id order). Part labels are the part's position in `parts`.
pub fn assemble(
    meshes: &PartMeshes,
    joints: &[(PartId, JointSpec)],
    tree: KinematicTree,
    points_per_mesh: usize,
    seed: u64,
) -> Result<ArticulatedModel> {
    let mut points = Vec::new();
    let mut base_indices = Vec::new();
    let mut stream = seed;
    let mut take = |mesh: &TriMesh, points: &mut Vec<Vec3>| -> Result<Vec<usize>> {
        let start = points.len();
        points.extend(sample_surface_points(mesh, points_per_mesh, stream)?);
        stream = stream.wrapping_add(1);
        Ok((start..points.len()).collect())
    };
    if let Some(base) = &meshes.base {
        base_indices = take(base, &mut points)?;
    }
    let mut parts = Vec::with_capacity(joints.len());
    for (label, (id, joint)) in joints.iter().enumerate() {
        let indices = match meshes.parts.get(id) {
            Some(mesh) => take(mesh, &mut points)?,
            None => Vec::new(),
        };
        parts.push(PartSpec {
            id: *id,
            label,
            point_indices: indices,
            joint: *joint,
        });
    }
    Ok(ArticulatedModel {
        points,
        parts,
        tree,
        base_indices,
    })
}

pub const CABINET_DOOR: PartId = PartId(0);
pub const CABINET_HANDLE: PartId = PartId(1);

/// Door joint of [`cabinet`]: revolute about +z through the hinge edge, opening `[0, 1]` rad.
pub fn cabinet_door_joint() -> JointSpec {
    JointSpec::revolute(
        Vec3::z(),
        Vec3::new(0.3, -0.25, 0.0),
        JointLimits::new(0.5, 0.5),
    )
}

/// Cabinet meshes: static body, hinged door on the front face and a handle fixed to the door.
pub fn cabinet_meshes() -> PartMeshes {
    PartMeshes {
        base: Some(box_mesh(
            Vec3::new(-0.3, -0.25, -0.4),
            Vec3::new(0.3, 0.25, 0.4),
        )),
        parts: BTreeMap::from([
            (
                CABINET_DOOR,
                box_mesh(Vec3::new(-0.3, -0.27, -0.4), Vec3::new(0.3, -0.25, 0.4)),
            ),
            (
                CABINET_HANDLE,
                box_mesh(
                    Vec3::new(-0.26, -0.31, -0.06),
                    Vec3::new(-0.22, -0.27, 0.06),
                ),
            ),
        ]),
    }
}

/// The cabinet with `points_per_mesh` samples per mesh.
pub fn cabinet_with_points(points_per_mesh: usize, seed: u64) -> (ArticulatedModel, PartMeshes) {
    let meshes = cabinet_meshes();
    let joints = [
        (CABINET_DOOR, cabinet_door_joint()),
        (CABINET_HANDLE, JointSpec::fixed()),
    ];
    let tree = KinematicTree::new()
        .with_edge(CABINET_DOOR, Parent::Root)
        .with_edge(CABINET_HANDLE, Parent::Part(CABINET_DOOR));
    let model = assemble(&meshes, &joints, tree, points_per_mesh, seed)
        .expect("cabinet meshes have positive area");
    (model, meshes)
}

pub fn cabinet() -> (ArticulatedModel, PartMeshes) {
    cabinet_with_points(512, 0)
}

fn random_unit(rng: &mut Pcg64) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_box(rng: &mut Pcg64, max_half: f64) -> TriMesh {
    let half = Vec3::new(
        rng.random_range(0.02..max_half),
        rng.random_range(0.02..max_half),
        rng.random_range(0.02..max_half),
    );
    let limit = 0.5 - max_half;
    let c = Vec3::new(
        rng.random_range(-limit..limit),
        rng.random_range(-limit..limit),
        rng.random_range(-limit..limit),
    );
    box_mesh(c - half, c + half)
}

/// A valid model with a box base and two or three box parts joined by random joints in a
/// random tree, plus its meshes. All geometry lies in the canonical cube.
pub fn random_model(seed: u64, points_per_mesh: usize) -> (ArticulatedModel, PartMeshes) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let n_parts = rng.random_range(2..=3usize);
    let mut meshes = PartMeshes {
        base: Some(random_box(&mut rng, 0.25)),
        parts: BTreeMap::new(),
    };
    let mut joints = Vec::with_capacity(n_parts);
    let mut tree = KinematicTree::new();
    for k in 0..n_parts {
        let id = PartId(k as i64);
        meshes.parts.insert(id, random_box(&mut rng, 0.12));
        let axis = random_unit(&mut rng);
        let pivot = Vec3::new(
            rng.random_range(-0.4..0.4),
            rng.random_range(-0.4..0.4),
            rng.random_range(-0.4..0.4),
        );
        let joint = match rng.random_range(0..4u8) {
            0 => JointSpec::fixed(),
            1 => {
                let lo = rng.random_range(-1.5..0.0);
                let hi = rng.random_range(0.1..1.5);
                JointSpec::revolute(
                    axis,
                    pivot,
                    JointLimits::new(0.5 * (lo + hi), 0.5 * (hi - lo)),
                )
            }
            2 => {
                let hi = rng.random_range(0.05..0.3);
                JointSpec::prismatic(axis, JointLimits::new(0.5 * hi, 0.5 * hi))
            }
            _ => JointSpec::continuous(axis, pivot),
        };
        joints.push((id, joint));
        let parent = if k == 0 || rng.random_bool(0.5) {
            Parent::Root
        } else {
            Parent::Part(PartId(rng.random_range(0..k) as i64))
        };
        tree = tree.with_edge(id, parent);
    }
    let model = assemble(&meshes, &joints, tree, points_per_mesh, seed)
        .expect("random boxes have positive area");
    (model, meshes)
}
