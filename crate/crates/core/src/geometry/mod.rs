//! Point-level geometry operations: surface sampling, feature volumes and nearest neighbours.

mod features;
mod neighbors;
mod sampling;
mod triplane;
mod voxel;

pub use features::{global_pool_concat, read_feature_set, write_feature_set, FeatureSet};
pub use neighbors::{nearest_neighbor_distances, KdTree};
pub use sampling::{sample_surface, sample_surface_points, SurfaceSample};
pub use triplane::{triplane_gather, triplane_scatter, Plane, TriplaneStack};
pub use voxel::{trilinear_interpolate, SparseVoxelGrid, VOXEL_GRID_MAGIC};

use crate::{Error, Result, Vec3};

/// Half-width of the canonical object cube.
pub const CUBE_HALF_EXTENT: f64 = 0.5;
const CUBE_TOL: f64 = 1e-9;

pub(crate) fn check_in_cube(points: &[Vec3]) -> Result<()> {
    let limit = CUBE_HALF_EXTENT + CUBE_TOL;
    for (index, p) in points.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite() && c.abs() <= limit) {
            return Err(Error::OutsideCube {
                index,
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
    }
    Ok(())
}

/// Continuous grid coordinate of `x` on an `n`-cell axis under the cell-center convention,
/// clamped to `[0, n - 1]`.
pub(crate) fn grid_coord(x: f64, n: usize) -> f64 {
    let g = (x + CUBE_HALF_EXTENT) * n as f64 - 0.5;
    g.clamp(0.0, (n - 1) as f64)
}

/// Lower node index and fractional offset for linear interpolation along one axis.
pub(crate) fn lerp_cell(g: f64, n: usize) -> (usize, usize, f64) {
    if n == 1 {
        return (0, 0, 0.0);
    }
    let i0 = (g.floor() as usize).min(n - 2);
    (i0, i0 + 1, g - i0 as f64)
}
