//! Mask interchange files.
//!
//! Hard masks are stored one row per mask as `ceil(M / 8)` bytes, bit `m` of a row at byte
//! `m / 8`, bit `m % 8` (least significant first). Soft masks are stored as little-endian
//! `f32` logits, `M` per row. A JSON sidecar at `<path>.json` records the row count under
//! `N_q` (predictions) or `K` (ground truth), the point count `M`, and the `encoding`
//! (`"bits"` when absent).

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::SoftMaskSet;
use crate::{Error, Result};

/// Binary masks over a common set of `M` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSet {
    points: usize,
    rows: Vec<Vec<bool>>,
}

impl MaskSet {
    pub fn new(points: usize, rows: Vec<Vec<bool>>) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != points) {
            return Err(Error::Shape(format!(
                "mask row {i} has {} points, expected {points}",
                r.len()
            )));
        }
        Ok(Self { points, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    /// Rows as probabilities in `{0, 1}`.
    pub fn as_soft(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskSizeKey {
    Queries,
    Parts,
}

impl MaskSizeKey {
    fn name(self) -> &'static str {
        match self {
            MaskSizeKey::Queries => "N_q",
            MaskSizeKey::Parts => "K",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaskFile {
    Hard(MaskSet),
    Soft(SoftMaskSet),
}

impl MaskFile {
    pub fn points(&self) -> usize {
        match self {
            MaskFile::Hard(m) => m.points(),
            MaskFile::Soft(s) => s.points(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MaskFile::Hard(m) => m.len(),
            MaskFile::Soft(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn soft(&self) -> Vec<Vec<f64>> {
        match self {
            MaskFile::Hard(m) => m.as_soft(),
            MaskFile::Soft(s) => s.soft(),
        }
    }

    pub fn hard(&self) -> MaskSet {
        match self {
            MaskFile::Hard(m) => m.clone(),
            MaskFile::Soft(s) => s.hard(),
        }
    }
}

pub(crate) fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_sidecar(
    path: &Path,
    key: MaskSizeKey,
    rows: usize,
    points: usize,
    encoding: &str,
) -> Result<()> {
    let side = sidecar_path(path);
    let mut obj = Map::new();
    obj.insert(key.name().into(), json!(rows));
    obj.insert("M".into(), json!(points));
    obj.insert("encoding".into(), json!(encoding));
    std::fs::write(&side, Value::Object(obj).to_string() + "\n").map_err(|e| Error::io(&side, e))
}

pub fn write_hard_masks(masks: &MaskSet, key: MaskSizeKey, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let stride = masks.points.div_ceil(8);
    let mut bytes = vec![0u8; stride * masks.len()];
    for (i, row) in masks.rows.iter().enumerate() {
        for (m, _) in row.iter().enumerate().filter(|(_, b)| **b) {
            bytes[i * stride + m / 8] |= 1 << (m % 8);
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    write_sidecar(path, key, masks.len(), masks.points, "bits")
}

pub fn write_soft_masks(
    masks: &SoftMaskSet,
    key: MaskSizeKey,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = masks
        .logits()
        .iter()
        .flatten()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    write_sidecar(path, key, masks.len(), masks.points(), "f32")
}

/// Reads a mask file and its sidecar; the row count may be recorded under either key.
pub fn read_masks(path: impl AsRef<Path>) -> Result<MaskFile> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", side.display())))?;
    let field = |k: &str| meta.get(k).and_then(Value::as_u64).map(|v| v as usize);
    let bad = |msg: String| Error::Parse(format!("{}: {msg}", side.display()));
    let rows = field("N_q")
        .or_else(|| field("K"))
        .ok_or_else(|| bad("missing row count `N_q` or `K`".into()))?;
    let points = field("M").ok_or_else(|| bad("missing point count `M`".into()))?;
    let encoding = match meta.get("encoding") {
        None => "bits",
        Some(v) => v
            .as_str()
            .ok_or_else(|| bad("`encoding` must be a string".into()))?,
    };

    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let size_err = |want: usize| {
        Error::Parse(format!(
            "{}: expected {want} bytes for {rows}×{points} {encoding} masks, found {}",
            path.display(),
            bytes.len()
        ))
    };
    match encoding {
        "bits" => {
            let stride = points.div_ceil(8);
            if bytes.len() != stride * rows {
                return Err(size_err(stride * rows));
            }
            let rows = (0..rows)
                .map(|i| {
                    (0..points)
                        .map(|m| bytes[i * stride + m / 8] >> (m % 8) & 1 == 1)
                        .collect()
                })
                .collect();
            Ok(MaskFile::Hard(MaskSet::new(points, rows)?))
        }
        "f32" => {
            if bytes.len() != 4 * points * rows {
                return Err(size_err(4 * points * rows));
            }
            let values: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            let logits = if points == 0 {
                vec![Vec::new(); rows]
            } else {
                values.chunks(points).map(<[f64]>::to_vec).collect()
            };
            Ok(MaskFile::Soft(SoftMaskSet::from_logits(logits, points)?))
        }
        other => Err(bad(format!("unknown encoding `{other}`"))),
    }
}
