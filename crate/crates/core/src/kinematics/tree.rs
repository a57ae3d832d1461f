//! Kinematic-tree prediction from part-category distributions.
//!
//! Parts are indexed `0..N`; in a [`ParentDistribution`] column `N` is the root.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::model::{KinematicTree, Parent, PartId};
use crate::{Error, Result};

const PROB_ROW_TOL: f64 = 1e-6;
const DIST_ROW_TOL: f64 = 1e-9;

/// Attachment scores: `scores[(i, j)]` rates part `j` as parent of part `i`;
/// `root_scores[i]` rates the root.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMatrix {
    pub scores: DMatrix<f64>,
    pub root_scores: DVector<f64>,
}

impl AffinityMatrix {
    pub fn new(scores: DMatrix<f64>, root_scores: DVector<f64>) -> Result<Self> {
        let n = scores.nrows();
        if n == 0 || scores.ncols() != n || root_scores.len() != n {
            return Err(Error::Shape(format!(
                "affinity must be N×N with N root scores, got {}×{} and {}",
                scores.nrows(),
                scores.ncols(),
                root_scores.len()
            )));
        }
        if !scores
            .iter()
            .chain(root_scores.iter())
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "affinity scores must be finite".into(),
            ));
        }
        Ok(Self {
            scores,
            root_scores,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.nrows() == 0
    }

    pub fn with_root_scores(mut self, root_scores: DVector<f64>) -> Result<Self> {
        if root_scores.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} root scores for {} parts",
                root_scores.len(),
                self.len()
            )));
        }
        self.root_scores = root_scores;
        Self::new(self.scores, self.root_scores)
    }
}

/// Bilinear attachment scores `s_iᵀ·C·s_j` from per-part category distributions (rows of
/// `part_probs`) and a category compatibility matrix. Root scores start at zero.
pub fn pairwise_affinity(
    part_probs: &DMatrix<f64>,
    compat: &DMatrix<f64>,
) -> Result<AffinityMatrix> {
    let (n, nc) = part_probs.shape();
    if n == 0 {
        return Err(Error::Shape("need at least one part".into()));
    }
    if compat.shape() != (nc, nc) {
        return Err(Error::Shape(format!(
            "compatibility matrix is {}×{}, expected {nc}×{nc}",
            compat.nrows(),
            compat.ncols()
        )));
    }
    for (i, row) in part_probs.row_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if !row.iter().all(|v| v.is_finite() && *v >= 0.0) || (sum - 1.0).abs() > PROB_ROW_TOL {
            return Err(Error::InvalidArgument(format!(
                "part_probs row {i} is not a probability distribution (sum {sum})"
            )));
        }
    }
    let scores = part_probs * compat * part_probs.transpose();
    AffinityMatrix::new(scores, DVector::zeros(n))
}

/// Row-stochastic parent probabilities, `N × (N + 1)` with the root in the last column and
/// zeros on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ParentDistribution {
    probs: DMatrix<f64>,
}

impl ParentDistribution {
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        let n = probs.nrows();
        if n == 0 || probs.ncols() != n + 1 {
            return Err(Error::Shape(format!(
                "parent distribution must be N×(N+1), got {}×{}",
                probs.nrows(),
                probs.ncols()
            )));
        }
        for (i, row) in probs.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if !row.iter().all(|v| v.is_finite() && *v >= 0.0) || (sum - 1.0).abs() > DIST_ROW_TOL {
                return Err(Error::InvalidArgument(format!(
                    "row {i} is not a probability distribution (sum {sum})"
                )));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "part {i} has nonzero self-parent probability"
                )));
            }
        }
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.nrows() == 0
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    /// Probability that `parent` (a part index, or `len()` for the root) is the parent of `child`.
    pub fn prob(&self, child: usize, parent: usize) -> f64 {
        self.probs[(child, parent)]
    }

    /// Admissible parents of `child` from most to least probable; ties go to the lower index,
    /// so the root (index `len()`) loses ties.
    fn ranked_parents(&self, child: usize) -> Vec<usize> {
        let mut c: Vec<usize> = (0..=self.len()).filter(|&j| j != child).collect();
        c.sort_by(|&a, &b| {
            self.prob(child, b)
                .total_cmp(&self.prob(child, a))
                .then(a.cmp(&b))
        });
        c
    }
}

/// Softmax over each part's candidate parents (every other part plus the root); the self
/// entry is excluded before normalization and set to zero.
pub fn parent_distribution(aff: &AffinityMatrix) -> ParentDistribution {
    let n = aff.len();
    let mut probs = DMatrix::zeros(n, n + 1);
    for i in 0..n {
        let logit = |j: usize| {
            if j == n {
                aff.root_scores[i]
            } else {
                aff.scores[(i, j)]
            }
        };
        let max = (0..=n)
            .filter(|&j| j != i)
            .map(logit)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for j in (0..=n).filter(|&j| j != i) {
            let e = (logit(j) - max).exp();
            probs[(i, j)] = e;
            total += e;
        }
        for j in 0..=n {
            probs[(i, j)] /= total;
        }
    }
    ParentDistribution { probs }
}

/// Assigns each part its most probable parent, then, if that creates a cycle, rebuilds the
/// assignment greedily: parts are committed in descending order of their best parent
/// probability (lower index first on ties), each taking the most probable parent that keeps
/// the committed edges acyclic. The root is always admissible, so the result is a valid
/// single-root tree over part ids `0..N`.
pub fn build_tree(dist: &ParentDistribution) -> KinematicTree {
    let n = dist.len();
    let ranked: Vec<Vec<usize>> = (0..n).map(|i| dist.ranked_parents(i)).collect();
    let to_parent = |j: usize| {
        if j == n {
            Parent::Root
        } else {
            Parent::Part(PartId(j as i64))
        }
    };

    let argmax = KinematicTree {
        parent: (0..n)
            .map(|i| (PartId(i as i64), to_parent(ranked[i][0])))
            .collect(),
    };
    if argmax.cycles().is_empty() {
        return argmax;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let pa = dist.prob(a, ranked[a][0]);
        let pb = dist.prob(b, ranked[b][0]);
        match pb.total_cmp(&pa) {
            Ordering::Equal => a.cmp(&b),
            o => o,
        }
    });

    let mut committed: Vec<Option<usize>> = vec![None; n];
    let creates_cycle = |committed: &[Option<usize>], child: usize, parent: usize| {
        let mut cur = parent;
        loop {
            if cur == child {
                return true;
            }
            match committed[cur] {
                Some(p) if p < n => cur = p,
                _ => return false,
            }
        }
    };
    for &i in &order {
        let choice = ranked[i]
            .iter()
            .copied()
            .find(|&j| j == n || !creates_cycle(&committed, i, j))
            .unwrap_or(n);
        committed[i] = Some(choice);
    }

    KinematicTree {
        parent: committed
            .iter()
            .enumerate()
            .map(|(i, p)| (PartId(i as i64), to_parent(p.unwrap_or(n))))
            .collect(),
    }
}
