//! Area-weighted uniform sampling of mesh surfaces.
//!
//! The generator is PCG64 (`rand_pcg::Pcg64`, XSL-RR 128/64) seeded with
//! `seed_from_u64(seed)`. Each sample consumes three `f64` draws in `[0, 1)`: the first picks a
//! triangle by inverting the cumulative area table, the other two (`r1`, `r2`) place the point at
//! `(1 - √r1)·a + √r1·(1 - r2)·b + √r1·r2·c`.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::model::TriMesh;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub point: Vec3,
    /// Index of the face the point was drawn from.
    pub face: usize,
}

pub fn sample_surface(mesh: &TriMesh, count: usize, seed: u64) -> Result<Vec<SurfaceSample>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let violations = mesh.validate();
    if let Some(v) = violations.first() {
        if v.rule == "no face with nonzero area" {
            return Err(Error::Degenerate("mesh has zero total area".into()));
        }
        return Err(Error::Invalid(violations));
    }

    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for a in mesh.triangle_areas() {
        total += a;
        cumulative.push(total);
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Degenerate("mesh has zero total area".into()));
    }

    let last = mesh.faces.len() - 1;
    let mut rng = Pcg64::seed_from_u64(seed);
    let samples = (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let face = cumulative.partition_point(|&c| c <= u).min(last);
            let r1 = rng.random::<f64>().sqrt();
            let r2 = rng.random::<f64>();
            let [a, b, c] = mesh.triangle(face);
            let point = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
            SurfaceSample { point, face }
        })
        .collect();
    Ok(samples)
}

/// Draws `count` points uniformly over the surface of `mesh`, deterministically in `seed`.
pub fn sample_surface_points(mesh: &TriMesh, count: usize, seed: u64) -> Result<Vec<Vec3>> {
    Ok(sample_surface(mesh, count, seed)?
        .into_iter()
        .map(|s| s.point)
        .collect())
}
