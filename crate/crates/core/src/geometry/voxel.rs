//! Sparse voxel feature volumes and trilinear interpolation.
//!
//! Binary layout (little-endian): the 16-byte [`VOXEL_GRID_MAGIC`], then `N_z: u32`,
//! `d_1: u32`, `n_active: u64`, then `n_active` records of `i, j, k: u16` followed by `d_1`
//! `f32` feature values. Records are written in ascending `(i, j, k)` order.

use std::collections::BTreeMap;
use std::path::Path;

use super::{check_in_cube, grid_coord, lerp_cell, FeatureSet};
use crate::{Error, Result, Vec3};

pub const VOXEL_GRID_MAGIC: &[u8; 16] = b"ARTIKIT-SVOXEL01";

/// Features stored at the active cells of an `N_z³` grid covering the canonical cube.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVoxelGrid {
    resolution: usize,
    dim: usize,
    cells: BTreeMap<[u16; 3], Vec<f32>>,
}

impl SparseVoxelGrid {
    pub fn new(resolution: usize, dim: usize) -> Result<Self> {
        if resolution == 0 || resolution > u16::MAX as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "voxel resolution {resolution} outside [1, 65536]"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "feature dimension must be positive".into(),
            ));
        }
        Ok(Self {
            resolution,
            dim,
            cells: BTreeMap::new(),
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Sets the feature of cell `(i, j, k)`, replacing any previous value.
    pub fn insert(&mut self, cell: [usize; 3], feature: Vec<f32>) -> Result<()> {
        if cell.iter().any(|&c| c >= self.resolution) {
            return Err(Error::IndexOutOfRange {
                index: *cell.iter().max().unwrap_or(&0),
                len: self.resolution,
            });
        }
        if feature.len() != self.dim {
            return Err(Error::Shape(format!(
                "feature of dimension {}, grid stores {}",
                feature.len(),
                self.dim
            )));
        }
        self.cells
            .insert([cell[0] as u16, cell[1] as u16, cell[2] as u16], feature);
        Ok(())
    }

    pub fn get(&self, cell: [usize; 3]) -> Option<&[f32]> {
        if cell.iter().any(|&c| c >= self.resolution) {
            return None;
        }
        self.cells
            .get(&[cell[0] as u16, cell[1] as u16, cell[2] as u16])
            .map(Vec::as_slice)
    }

    pub fn cells(&self) -> impl Iterator<Item = ([usize; 3], &[f32])> {
        self.cells
            .iter()
            .map(|(k, v)| ([k[0] as usize, k[1] as usize, k[2] as usize], v.as_slice()))
    }

    /// Object-space center of a cell.
    pub fn cell_center(&self, cell: [usize; 3]) -> Vec3 {
        let n = self.resolution as f64;
        Vec3::new(
            (cell[0] as f64 + 0.5) / n - 0.5,
            (cell[1] as f64 + 0.5) / n - 0.5,
            (cell[2] as f64 + 0.5) / n - 0.5,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.cells.len() * (6 + 4 * self.dim));
        out.extend_from_slice(VOXEL_GRID_MAGIC);
        out.extend_from_slice(&(self.resolution as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.cells.len() as u64).to_le_bytes());
        for (k, v) in &self.cells {
            for c in k {
                out.extend_from_slice(&c.to_le_bytes());
            }
            for f in v {
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let parse = |msg: &str| Error::Parse(format!("voxel grid: {msg}"));
        if bytes.len() < 32 {
            return Err(parse("truncated header"));
        }
        if &bytes[..16] != VOXEL_GRID_MAGIC {
            return Err(parse("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap_or([0; 4]));
        let resolution = u32_at(16) as usize;
        let dim = u32_at(20) as usize;
        let n_active = u64::from_le_bytes(bytes[24..32].try_into().unwrap_or([0; 8])) as usize;
        let mut grid = Self::new(resolution, dim)?;
        let record = 6 + 4 * dim;
        let expected = n_active
            .checked_mul(record)
            .and_then(|b| b.checked_add(32))
            .ok_or_else(|| parse("record count overflows"))?;
        if bytes.len() != expected {
            return Err(parse(&format!(
                "expected {expected} bytes for {n_active} records, found {}",
                bytes.len()
            )));
        }
        for rec in bytes[32..].chunks_exact(record) {
            let idx = |o: usize| u16::from_le_bytes([rec[o], rec[o + 1]]) as usize;
            let cell = [idx(0), idx(2), idx(4)];
            let feature = rec[6..]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if grid.get(cell).is_some() {
                return Err(parse(&format!("duplicate cell {cell:?}")));
            }
            grid.insert(cell, feature)
                .map_err(|e| parse(&format!("record {cell:?}: {e}")))?;
        }
        Ok(grid)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Samples the grid at each point with trilinear interpolation.
///
/// A point maps to grid coordinate `g = (p + 0.5)·N_z − 0.5` per axis, clamped to
/// `[0, N_z − 1]`; missing cells contribute zero vectors.
pub fn trilinear_interpolate(grid: &SparseVoxelGrid, points: &[Vec3]) -> Result<FeatureSet> {
    check_in_cube(points)?;
    let n = grid.resolution;
    let dim = grid.dim;
    let mut out = FeatureSet::zeros(points.len(), dim)?;
    for (row, p) in points.iter().enumerate() {
        let (x0, x1, tx) = lerp_cell(grid_coord(p.x, n), n);
        let (y0, y1, ty) = lerp_cell(grid_coord(p.y, n), n);
        let (z0, z1, tz) = lerp_cell(grid_coord(p.z, n), n);
        let dst = out.row_mut(row);
        for (i, wx) in [(x0, 1.0 - tx), (x1, tx)] {
            for (j, wy) in [(y0, 1.0 - ty), (y1, ty)] {
                for (k, wz) in [(z0, 1.0 - tz), (z1, tz)] {
                    let w = wx * wy * wz;
                    if w == 0.0 {
                        continue;
                    }
                    if let Some(f) = grid.get([i, j, k]) {
                        for (d, v) in dst.iter_mut().zip(f) {
                            *d += w * f64::from(*v);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_with(cells: &[([usize; 3], Vec<f32>)]) -> SparseVoxelGrid {
        let mut g = SparseVoxelGrid::new(4, cells[0].1.len()).unwrap();
        for (c, f) in cells {
            g.insert(*c, f.clone()).unwrap();
        }
        g
    }

    #[test]
    fn exact_at_cell_center() {
        let g = grid_with(&[([1, 2, 3], vec![1.5, -2.0])]);
        let p = g.cell_center([1, 2, 3]);
        let f = trilinear_interpolate(&g, &[p]).unwrap();
        assert_eq!(f.row(0), &[1.5, -2.0]);
    }

    #[test]
    fn mean_of_eight_corners_at_shared_vertex() {
        let mut cells = Vec::new();
        let mut sum = 0.0;
        for (n, c) in [
            [1, 1, 1],
            [2, 1, 1],
            [1, 2, 1],
            [2, 2, 1],
            [1, 1, 2],
            [2, 1, 2],
            [1, 2, 2],
            [2, 2, 2],
        ]
        .into_iter()
        .enumerate()
        {
            let v = (n * n) as f32 + 0.5;
            sum += v as f64;
            cells.push((c, vec![v]));
        }
        let g = grid_with(&cells);
        // cell corner shared by cells 1 and 2 on each axis: 2/4 - 0.5 = 0
        let f = trilinear_interpolate(&g, &[Vec3::zeros()]).unwrap();
        assert!((f.row(0)[0] - sum / 8.0).abs() < 1e-12);
    }

    #[test]
    fn edge_midpoint_averages_two_cells() {
        let g = grid_with(&[([1, 1, 1], vec![2.0]), ([2, 1, 1], vec![6.0])]);
        let p = (g.cell_center([1, 1, 1]) + g.cell_center([2, 1, 1])) / 2.0;
        let f = trilinear_interpolate(&g, &[p]).unwrap();
        assert!((f.row(0)[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_clamps() {
        let g = grid_with(&[([0, 0, 0], vec![3.0])]);
        let f = trilinear_interpolate(&g, &[Vec3::new(-0.5, -0.5, -0.5)]).unwrap();
        assert_eq!(f.row(0), &[3.0]);
    }

    #[test]
    fn outside_cube_is_an_error() {
        let g = grid_with(&[([0, 0, 0], vec![3.0])]);
        assert!(matches!(
            trilinear_interpolate(&g, &[Vec3::new(0.0, 0.0, 0.6)]),
            Err(Error::OutsideCube { .. })
        ));
        assert!(trilinear_interpolate(&g, &[Vec3::new(0.5 + 5e-10, 0.0, 0.0)]).is_ok());
    }

    #[test]
    fn empty_grid_gives_zeros() {
        let g = SparseVoxelGrid::new(8, 3).unwrap();
        let f = trilinear_interpolate(&g, &[Vec3::new(0.1, 0.2, -0.3)]).unwrap();
        assert_eq!(f.row(0), &[0.0; 3]);
    }

    #[test]
    fn insert_checks_bounds_and_dim() {
        let mut g = SparseVoxelGrid::new(4, 2).unwrap();
        assert!(g.insert([4, 0, 0], vec![0.0, 0.0]).is_err());
        assert!(g.insert([0, 0, 0], vec![0.0]).is_err());
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let g = grid_with(&[([3, 0, 1], vec![0.25, -1.0]), ([0, 2, 2], vec![7.0, 8.5])]);
        let bytes = g.to_bytes();
        assert_eq!(bytes.len(), 32 + 2 * (6 + 8));
        assert_eq!(SparseVoxelGrid::from_bytes(&bytes).unwrap(), g);
        assert!(SparseVoxelGrid::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(SparseVoxelGrid::from_bytes(&bad).is_err());
    }
}
