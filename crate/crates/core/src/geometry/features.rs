use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-point feature vectors of uniform dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    data: Vec<f64>,
}

impl FeatureSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("feature dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values do not divide into rows of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(rows: usize, dim: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; rows * dim])
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has dimension {}, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            data,
        }
    }

    /// Mean over rows. Requires at least one row.
    pub fn mean(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Shape("cannot pool an empty feature set".into()));
        }
        let mut acc = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, v) in acc.iter_mut().zip(r) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        Ok(acc)
    }
}

/// Global mean pooling of point embeddings and geometry features over the same points,
/// concatenated as `mean(h) ‖ mean(f_geo)`.
pub fn global_pool_concat(h: &FeatureSet, f_geo: &FeatureSet) -> Result<Vec<f64>> {
    if h.len() != f_geo.len() {
        return Err(Error::Shape(format!(
            "embeddings describe {} points but geometry features {}",
            h.len(),
            f_geo.len()
        )));
    }
    let mut out = h.mean()?;
    out.extend(f_geo.mean()?);
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    #[serde(rename = "M")]
    rows: usize,
    dim: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `features` as flat little-endian f32 values plus a `<path>.json` sidecar `{M, dim}`.
pub fn write_feature_set(features: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(features.data.len() * 4);
    for v in &features.data {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let text = serde_json::to_string(&Sidecar {
        rows: features.len(),
        dim: features.dim,
    })
    .expect("sidecar serializes");
    std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn read_feature_set(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: Sidecar = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", side.display())))?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != meta.rows * meta.dim * 4 {
        return Err(Error::Parse(format!(
            "{}: expected {} bytes for {}x{} f32 values, found {}",
            path.display(),
            meta.rows * meta.dim * 4,
            meta.rows,
            meta.dim,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    FeatureSet::new(meta.dim, data)
}
