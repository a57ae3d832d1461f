//! URDF export for physics simulators.
//!
//! Each part becomes a link whose frame sits at its joint pivot; the static base becomes link
//! `base` at the object origin. Because every frame is parallel to the object frame at the
//! canonical pose, a joint's origin is its pivot relative to the parent's pivot, its axis is
//! the object-frame axis, and link meshes are offset by the negated pivot.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use super::{validate_model, ArticulatedModel, JointType, Parent, PartId, Vec3};
use crate::numfmt::fmt_sig9;
use crate::{Error, Result};

pub const BASE_LINK: &str = "base";
// URDF requires effort and velocity on bounded joints; the reconstruction has no dynamics.
const EFFORT: f64 = 1.0;
const VELOCITY: f64 = 1.0;

fn link_name(id: PartId) -> String {
    format!("part_{}", id.0)
}

fn xyz(v: &Vec3) -> String {
    format!("{} {} {}", fmt_sig9(v.x), fmt_sig9(v.y), fmt_sig9(v.z))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders `model` as a URDF document. `mesh_paths` maps part ids (and `-1` for the base) to
/// mesh files referenced by visual and collision elements; links without a mesh are emitted
/// without geometry.
pub fn export_urdf(
    model: &ArticulatedModel,
    mesh_paths: &BTreeMap<PartId, PathBuf>,
) -> Result<String> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    let mut out = String::new();
    let w = &mut out;
    // Writing to a String cannot fail.
    let _ = writeln!(w, r#"<?xml version="1.0"?>"#);
    let _ = writeln!(w, r#"<robot name="articulated_object">"#);

    write_link(
        w,
        BASE_LINK,
        &Vec3::zeros(),
        mesh_paths.get(&PartId(PartId::ROOT_SENTINEL)),
    );
    for part in &model.parts {
        write_link(
            w,
            &link_name(part.id),
            &part.joint.pivot,
            mesh_paths.get(&part.id),
        );
    }

    for part in &model.parts {
        let joint = &part.joint;
        let (parent_link, parent_pivot) = match model.tree.parent_of(part.id) {
            Some(Parent::Part(pid)) => {
                let pivot = model.part(pid).map(|p| p.joint.pivot).unwrap_or_default();
                (link_name(pid), pivot)
            }
            _ => (BASE_LINK.to_string(), Vec3::zeros()),
        };
        let _ = writeln!(
            w,
            r#"  <joint name="joint_{}" type="{}">"#,
            part.id.0,
            joint.jtype.name()
        );
        let _ = writeln!(w, r#"    <parent link="{parent_link}"/>"#);
        let _ = writeln!(w, r#"    <child link="{}"/>"#, link_name(part.id));
        let _ = writeln!(
            w,
            r#"    <origin xyz="{}" rpy="0 0 0"/>"#,
            xyz(&(joint.pivot - parent_pivot))
        );
        if joint.jtype != JointType::Fixed {
            let _ = writeln!(w, r#"    <axis xyz="{}"/>"#, xyz(&joint.axis));
        }
        if joint.jtype.is_bounded() {
            let _ = writeln!(
                w,
                r#"    <limit lower="{}" upper="{}" effort="{}" velocity="{}"/>"#,
                fmt_sig9(joint.limits.lower()),
                fmt_sig9(joint.limits.upper()),
                fmt_sig9(EFFORT),
                fmt_sig9(VELOCITY)
            );
        }
        let _ = writeln!(w, "  </joint>");
    }
    let _ = writeln!(w, "</robot>");
    Ok(out)
}

fn write_link(w: &mut String, name: &str, frame_origin: &Vec3, mesh: Option<&PathBuf>) {
    let Some(mesh) = mesh else {
        let _ = writeln!(w, r#"  <link name="{name}"/>"#);
        return;
    };
    let file = escape(&mesh.to_string_lossy());
    let offset = xyz(&(-frame_origin));
    let _ = writeln!(w, r#"  <link name="{name}">"#);
    for tag in ["visual", "collision"] {
        let _ = writeln!(w, "    <{tag}>");
        let _ = writeln!(w, r#"      <origin xyz="{offset}" rpy="0 0 0"/>"#);
        let _ = writeln!(w, r#"      <geometry><mesh filename="{file}"/></geometry>"#);
        let _ = writeln!(w, "    </{tag}>");
    }
    let _ = writeln!(w, "  </link>");
}
