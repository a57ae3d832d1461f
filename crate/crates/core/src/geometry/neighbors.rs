//! Exact nearest-neighbour queries backed by a 3-d tree.

use rayon::prelude::*;

use crate::{Error, Result, Vec3};

const LEAF_SIZE: usize = 8;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static k-d tree over 3-D points. Queries are exact.
#[derive(Debug)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot index an empty point set".into(),
            ));
        }
        let mut tree = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        tree.build_node(0, points.len());
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &i in &self.order[start..end] {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        let axis = (hi - lo).imax();
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]));
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the nearest indexed point and its squared distance.
    pub fn nearest(&self, query: &Vec3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, query, &mut best);
        best
    }

    fn search(&self, node: usize, q: &Vec3, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = (self.points[i] - q).norm_squared();
                    if d < best.1 || (d == best.1 && i < best.0) {
                        *best = (i, d);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, best);
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

/// Euclidean distance from each point of `from` to its nearest point in `to`.
pub fn nearest_neighbor_distances(from: &[Vec3], to: &[Vec3]) -> Result<Vec<f64>> {
    let tree = KdTree::build(to)?;
    Ok(from.par_iter().map(|p| tree.nearest(p).1.sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute(from: &[Vec3], to: &[Vec3]) -> Vec<f64> {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn self_distances_are_zero() {
        let pts: Vec<Vec3> = (0..50)
            .map(|i| Vec3::new(i as f64 * 0.01, 0.0, 0.0))
            .collect();
        assert!(nearest_neighbor_distances(&pts, &pts)
            .unwrap()
            .iter()
            .all(|d| *d == 0.0));
    }

    #[test]
    fn picks_the_closer_target() {
        let d = nearest_neighbor_distances(
            &[Vec3::zeros()],
            &[Vec3::new(0.3, 0.0, 0.0), Vec3::new(0.0, 0.4, 0.0)],
        )
        .unwrap();
        assert!((d[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_pcg::Pcg64::seed_from_u64(9);
        let mut cloud = |n: usize| -> Vec<Vec3> {
            (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.random::<f64>() - 0.5,
                        rng.random::<f64>() - 0.5,
                        rng.random::<f64>() - 0.5,
                    )
                })
                .collect()
        };
        let from = cloud(100);
        let to = cloud(100);
        let fast = nearest_neighbor_distances(&from, &to).unwrap();
        for (a, b) in fast.iter().zip(brute(&from, &to)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn handles_duplicates_and_collinear_points() {
        let to: Vec<Vec3> = (0..40)
            .map(|i| Vec3::new((i / 4) as f64, 0.0, 0.0))
            .collect();
        let from: Vec<Vec3> = (0..20)
            .map(|i| Vec3::new(i as f64 * 0.37, 0.1, 0.0))
            .collect();
        assert_eq!(
            nearest_neighbor_distances(&from, &to).unwrap(),
            brute(&from, &to)
        );
    }

    #[test]
    fn empty_target_rejected() {
        assert!(nearest_neighbor_distances(&[Vec3::zeros()], &[]).is_err());
    }
}
