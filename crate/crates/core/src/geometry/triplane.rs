//! Triplane feature splatting and sampling.
//!
//! Each plane is an `N_t × N_t` node grid over the canonical cube using the same cell-center
//! convention as the voxel grid. A point projects onto plane XY at `(x, y)`, YZ at `(y, z)` and
//! ZX at `(z, x)`; node `(u, v)` indexes the first and second projected axis respectively.

use super::{check_in_cube, grid_coord, lerp_cell, FeatureSet};
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    XY,
    YZ,
    ZX,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::XY, Plane::YZ, Plane::ZX];

    /// Object axes spanning the plane, in `(u, v)` order.
    pub fn axes(self) -> (usize, usize) {
        match self {
            Plane::XY => (0, 1),
            Plane::YZ => (1, 2),
            Plane::ZX => (2, 0),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Three orthogonal feature planes plus their splat-weight accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct TriplaneStack {
    resolution: usize,
    dim: usize,
    planes: [Vec<f64>; 3],
    weights: [Vec<f64>; 3],
}

impl TriplaneStack {
    pub fn zeros(resolution: usize, dim: usize) -> Result<Self> {
        if resolution == 0 || dim == 0 {
            return Err(Error::InvalidArgument(
                "triplane resolution and feature dimension must be positive".into(),
            ));
        }
        let feat = vec![0.0; resolution * resolution * dim];
        let w = vec![0.0; resolution * resolution];
        Ok(Self {
            resolution,
            dim,
            planes: [feat.clone(), feat.clone(), feat],
            weights: [w.clone(), w.clone(), w],
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature(&self, plane: Plane, u: usize, v: usize) -> &[f64] {
        let o = (u * self.resolution + v) * self.dim;
        &self.planes[plane.index()][o..o + self.dim]
    }

    pub fn weight(&self, plane: Plane, u: usize, v: usize) -> f64 {
        self.weights[plane.index()][u * self.resolution + v]
    }

    /// Nodes and bilinear weights around the projection of `p` onto `plane`.
    fn corners(&self, plane: Plane, p: &Vec3) -> [(usize, f64); 4] {
        let n = self.resolution;
        let (a, b) = plane.axes();
        let (u0, u1, tu) = lerp_cell(grid_coord(p[a], n), n);
        let (v0, v1, tv) = lerp_cell(grid_coord(p[b], n), n);
        [
            (u0 * n + v0, (1.0 - tu) * (1.0 - tv)),
            (u1 * n + v0, tu * (1.0 - tv)),
            (u0 * n + v1, (1.0 - tu) * tv),
            (u1 * n + v1, tu * tv),
        ]
    }
}

/// Splats per-point features onto the three planes with bilinear weights. Each node ends up
/// holding the weight-normalized average of what was splatted onto it (zero where no weight
/// arrived); accumulated weights are kept in the stack.
pub fn triplane_scatter(
    points: &[Vec3],
    features: &FeatureSet,
    resolution: usize,
) -> Result<TriplaneStack> {
    if points.len() != features.len() {
        return Err(Error::Shape(format!(
            "{} points but {} feature rows",
            points.len(),
            features.len()
        )));
    }
    check_in_cube(points)?;
    let mut stack = TriplaneStack::zeros(resolution, features.dim())?;
    let dim = stack.dim;
    for plane in Plane::ALL {
        let pi = plane.index();
        for (p, f) in points.iter().zip(features.rows()) {
            for (node, w) in stack.corners(plane, p) {
                if w == 0.0 {
                    continue;
                }
                stack.weights[pi][node] += w;
                let dst = &mut stack.planes[pi][node * dim..(node + 1) * dim];
                for (d, v) in dst.iter_mut().zip(f) {
                    *d += w * v;
                }
            }
        }
        for node in 0..resolution * resolution {
            let w = stack.weights[pi][node];
            if w > 0.0 {
                for d in &mut stack.planes[pi][node * dim..(node + 1) * dim] {
                    *d /= w;
                }
            }
        }
    }
    Ok(stack)
}

/// Bilinearly samples every plane at each point's projection and concatenates the samples in
/// XY ‖ YZ ‖ ZX order, giving rows of dimension `3·d`.
pub fn triplane_gather(stack: &TriplaneStack, points: &[Vec3]) -> Result<FeatureSet> {
    check_in_cube(points)?;
    let dim = stack.dim;
    let mut out = FeatureSet::zeros(points.len(), 3 * dim)?;
    for (row, p) in points.iter().enumerate() {
        let dst = out.row_mut(row);
        for plane in Plane::ALL {
            let pi = plane.index();
            let slice = &mut dst[pi * dim..(pi + 1) * dim];
            for (node, w) in stack.corners(plane, p) {
                if w == 0.0 {
                    continue;
                }
                let src = &stack.planes[pi][node * dim..(node + 1) * dim];
                for (d, v) in slice.iter_mut().zip(src) {
                    *d += w * v;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 8;

    fn node(i: usize) -> f64 {
        (i as f64 + 0.5) / N as f64 - 0.5
    }

    #[test]
    fn single_point_on_node() {
        let p = Vec3::new(node(1), node(2), node(5));
        let f = FeatureSet::from_rows(2, &[[1.0, -3.0]]).unwrap();
        let s = triplane_scatter(&[p], &f, N).unwrap();
        assert_eq!(s.feature(Plane::XY, 1, 2), &[1.0, -3.0]);
        assert_eq!(s.feature(Plane::YZ, 2, 5), &[1.0, -3.0]);
        assert_eq!(s.feature(Plane::ZX, 5, 1), &[1.0, -3.0]);
        let nonzero = Plane::ALL
            .iter()
            .flat_map(|&pl| (0..N).flat_map(move |u| (0..N).map(move |v| (pl, u, v))))
            .filter(|&(pl, u, v)| s.feature(pl, u, v).iter().any(|x| *x != 0.0))
            .count();
        assert_eq!(nonzero, 3);
    }

    #[test]
    fn coincident_points_average() {
        let p = Vec3::new(node(3), node(3), node(3));
        let f = FeatureSet::from_rows(1, &[[2.0], [6.0]]).unwrap();
        let s = triplane_scatter(&[p, p], &f, N).unwrap();
        assert_eq!(s.feature(Plane::XY, 3, 3), &[4.0]);
        assert_eq!(s.weight(Plane::XY, 3, 3), 2.0);
    }

    #[test]
    fn empty_scatter_is_zero() {
        let f = FeatureSet::zeros(0, 4).unwrap();
        let s = triplane_scatter(&[], &f, N).unwrap();
        assert_eq!(s, TriplaneStack::zeros(N, 4).unwrap());
    }

    #[test]
    fn gather_round_trips_node_features() {
        let p = Vec3::new(node(6), node(0), node(4));
        let f = FeatureSet::from_rows(2, &[[0.5, 9.0]]).unwrap();
        let s = triplane_scatter(&[p], &f, N).unwrap();
        let g = triplane_gather(&s, &[p]).unwrap();
        assert_eq!(g.row(0), &[0.5, 9.0, 0.5, 9.0, 0.5, 9.0]);
    }

    #[test]
    fn gather_zero_stack() {
        let s = TriplaneStack::zeros(N, 3).unwrap();
        let g = triplane_gather(&s, &[Vec3::new(0.1, -0.2, 0.3)]).unwrap();
        assert_eq!(g.row(0), &[0.0; 9]);
    }

    #[test]
    fn gather_edge_midpoint() {
        // Two scattered points on adjacent XY nodes, far apart on the other planes.
        let a = Vec3::new(node(2), node(4), node(0));
        let b = Vec3::new(node(3), node(4), node(7));
        let f = FeatureSet::from_rows(1, &[[1.0], [5.0]]).unwrap();
        let s = triplane_scatter(&[a, b], &f, N).unwrap();
        let q = Vec3::new((node(2) + node(3)) / 2.0, node(4), node(0));
        let g = triplane_gather(&s, &[q]).unwrap();
        assert!((g.row(0)[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let f = FeatureSet::from_rows(1, &[[1.0]]).unwrap();
        assert!(matches!(triplane_scatter(&[], &f, N), Err(Error::Shape(_))));
    }
}
