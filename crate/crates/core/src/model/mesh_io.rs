//! Mesh and point-cloud files: ASCII OBJ and binary little-endian PLY.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{PartId, PartMeshes, TriMesh, Vec3};
use crate::{Error, Result};

/// Reads a mesh, choosing the parser by file extension (`.obj` or `.ply`).
pub fn read_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("obj") => read_obj(path),
        Some("ply") => read_ply_mesh(path),
        _ => Err(Error::Parse(format!(
            "{}: unsupported mesh extension (expected .obj or .ply)",
            path.display()
        ))),
    }
}

/// Reads `v` and `f` records of an ASCII OBJ file. Faces must be triangles; `v/vt/vn`
/// references and negative (relative) indices are accepted.
pub fn read_obj(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text).map_err(|msg| Error::Parse(format!("{}: {msg}", path.display())))
}

fn parse_obj(text: &str) -> std::result::Result<TriMesh, String> {
    let mut mesh = TriMesh::default();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    *slot = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| format!("line {lineno}: malformed vertex"))?;
                }
                mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    return Err(format!(
                        "line {lineno}: face with {} vertices (triangles only)",
                        refs.len()
                    ));
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(refs) {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| format!("line {lineno}: bad vertex reference `{r}`"))?;
                    let n = mesh.vertices.len() as i64;
                    let resolved = if idx > 0 { idx - 1 } else { n + idx };
                    if idx == 0 || resolved < 0 {
                        return Err(format!(
                            "line {lineno}: vertex reference `{r}` out of range"
                        ));
                    }
                    *slot = resolved as usize;
                }
                mesh.faces.push(face);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap_or([0; 8])),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if self.pos + n > self.data.len() {
            return Err("unexpected end of binary data".into());
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn scalar(&mut self, t: Scalar) -> std::result::Result<f64, String> {
        Ok(t.read(self.take(t.size())?))
    }
}

/// Reads a binary little-endian PLY mesh: `vertex` element with `x`, `y`, `z` and a `face`
/// element with a `vertex_indices` (or `vertex_index`) list of triangles. Other elements and
/// properties are skipped.
pub fn read_ply_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&data).map_err(|msg| Error::Parse(format!("{}: {msg}", path.display())))
}

fn parse_ply(data: &[u8]) -> std::result::Result<TriMesh, String> {
    const END: &[u8] = b"end_header\n";
    let header_end = data
        .windows(END.len())
        .position(|w| w == END)
        .ok_or("missing end_header")?
        + END.len();
    let header = std::str::from_utf8(&data[..header_end]).map_err(|_| "header is not UTF-8")?;
    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err("missing `ply` magic".into());
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_ok = false;
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["format", "binary_little_endian", _] => format_ok = true,
            ["format", other, ..] => return Err(format!("unsupported PLY format `{other}`")),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| format!("bad element count `{count}`"))?,
                props: Vec::new(),
            }),
            ["property", "list", ct, it, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                let ct = Scalar::parse(ct).ok_or_else(|| format!("unknown type `{ct}`"))?;
                let it = Scalar::parse(it).ok_or_else(|| format!("unknown type `{it}`"))?;
                el.props.push(Property::List(name.to_string(), ct, it));
            }
            ["property", t, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                let t = Scalar::parse(t).ok_or_else(|| format!("unknown type `{t}`"))?;
                el.props.push(Property::Scalar(name.to_string(), t));
            }
            ["comment", ..] | ["obj_info", ..] | ["end_header"] | [] => {}
            other => return Err(format!("unrecognized header line `{}`", other.join(" "))),
        }
    }
    if !format_ok {
        return Err("missing format line".into());
    }

    let mut cur = Cursor {
        data,
        pos: header_end,
    };
    let mut mesh = TriMesh::default();
    for el in &elements {
        for row in 0..el.count {
            let mut xyz = [0.0f64; 3];
            for prop in &el.props {
                match prop {
                    Property::Scalar(name, t) => {
                        let v = cur.scalar(*t)?;
                        if el.name == "vertex" {
                            match name.as_str() {
                                "x" => xyz[0] = v,
                                "y" => xyz[1] = v,
                                "z" => xyz[2] = v,
                                _ => {}
                            }
                        }
                    }
                    Property::List(name, ct, it) => {
                        let n = cur.scalar(*ct)? as usize;
                        let is_face = el.name == "face"
                            && (name == "vertex_indices" || name == "vertex_index");
                        if is_face && n != 3 {
                            return Err(format!("face {row} has {n} vertices (triangles only)"));
                        }
                        let mut idx = [0usize; 3];
                        #[allow(clippy::needless_range_loop)]
                        for k in 0..n {
                            let v = cur.scalar(*it)?;
                            if is_face {
                                if v < 0.0 {
                                    return Err(format!("face {row} has negative index"));
                                }
                                idx[k] = v as usize;
                            }
                        }
                        if is_face {
                            mesh.faces.push(idx);
                        }
                    }
                }
            }
            if el.name == "vertex" {
                mesh.vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
        }
    }
    Ok(mesh)
}

/// Writes a binary little-endian PLY mesh (float32 vertices, uchar/int32 face lists).
pub fn write_ply_mesh(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write!(
        buf,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    )
    .expect("write to Vec");
    for v in &mesh.vertices {
        for c in v.iter() {
            buf.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    for f in &mesh.faces {
        buf.push(3);
        for &i in f {
            buf.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Writes a binary little-endian PLY point cloud with float32 coordinates.
pub fn write_point_cloud_ply(points: &[Vec3], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(128 + points.len() * 12);
    write!(
        buf,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        points.len()
    )
    .expect("write to Vec");
    for p in points {
        for c in p.iter() {
            buf.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a mesh manifest: a JSON object mapping part ids (`"-1"` for the base) to OBJ/PLY
/// paths. Paths are returned as written.
pub fn read_mesh_manifest(path: impl AsRef<Path>) -> Result<BTreeMap<PartId, PathBuf>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: BTreeMap<String, String> = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    entries
        .into_iter()
        .map(|(key, file)| {
            let id: i64 = key.trim().parse().map_err(|_| {
                Error::Parse(format!("{}: key `{key}` is not a part id", path.display()))
            })?;
            Ok((PartId(id), PathBuf::from(file)))
        })
        .collect()
}

/// Loads the meshes of a manifest, resolving paths relative to the manifest's directory.
pub fn load_mesh_manifest(path: impl AsRef<Path>) -> Result<PartMeshes> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut meshes = PartMeshes::default();
    for (id, file) in read_mesh_manifest(path)? {
        let mesh = read_mesh(dir.join(&file))?;
        if id.0 == PartId::ROOT_SENTINEL {
            meshes.base = Some(mesh);
        } else {
            meshes.parts.insert(id, mesh);
        }
    }
    Ok(meshes)
}
