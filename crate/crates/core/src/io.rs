//! Serialization: JSON artifacts with 17 significant digits, OBJ and binary STL.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::ballpoly::ReuleauxPolyhedron;
use crate::error::{Error, Result};
use crate::fpvd::FarthestPointDiagram;
use crate::geom::Point3;
use crate::mesh::{Patch, TriangleMesh};
use crate::reuleaux::ReuleauxPolygon;
use crate::surgery::MeissnerSolid;

/// Pretty JSON formatter printing every float as `d.ddddddddddddddddde±x`.
pub struct Sig17<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for Sig17<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&fs::read_to_string(path)?)
}

/// A bare center set: `{"centers": [[x, y, z], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterSet {
    pub centers: Vec<Point3>,
}

/// Any JSON artifact, recognized by its top-level keys.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Polygon(ReuleauxPolygon),
    Diagram(Box<FarthestPointDiagram>),
    Centers(CenterSet),
    Solid(Box<ReuleauxPolyhedron>),
    Meissner(Box<MeissnerSolid>),
}

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::Polygon(_) => "polygon",
            Artifact::Diagram(_) => "diagram",
            Artifact::Centers(_) => "centers",
            Artifact::Solid(_) => "solid",
            Artifact::Meissner(_) => "meissner",
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let has = |k: &str| value.get(k).is_some();
        let parse_err = |e: serde_json::Error| Error::Parse {
            line: 0,
            column: 0,
            message: e.to_string(),
        };
        if has("wedges") {
            serde_json::from_value(value).map(|m| Artifact::Meissner(Box::new(m))).map_err(parse_err)
        } else if has("edges") && has("tau") {
            serde_json::from_value(value).map(|s| Artifact::Solid(Box::new(s))).map_err(parse_err)
        } else if has("tree") {
            serde_json::from_value(value).map(|d| Artifact::Diagram(Box::new(d))).map_err(parse_err)
        } else if has("n") && has("vertices") {
            serde_json::from_value(value).map(Artifact::Polygon).map_err(parse_err)
        } else if has("centers") {
            serde_json::from_value(value).map(Artifact::Centers).map_err(parse_err)
        } else {
            Err(Error::Parse {
                line: 1,
                column: 1,
                message: "unrecognized artifact: expected a polygon, diagram, center set, solid or Meissner solid".into(),
            })
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }
}

fn patch_group(p: Patch) -> String {
    match p {
        Patch::Cap(x) => format!("cap_{x}"),
        Patch::Wedge(w) => format!("wedge_{w}"),
        Patch::Sphere => "sphere".into(),
    }
}

pub fn write_obj<W: Write>(mesh: &TriangleMesh, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "# {} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len())?;
    for v in &mesh.vertices {
        writeln!(w, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z)?;
    }
    let mut group = None;
    for (t, p) in mesh.triangles.iter().zip(&mesh.provenance) {
        if group != Some(*p) {
            writeln!(w, "g {}", patch_group(*p))?;
            group = Some(*p);
        }
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stl<W: Write>(mesh: &TriangleMesh, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let mut header = [0u8; 80];
    let tag = b"binary STL, constant-width body";
    header[..tag.len()].copy_from_slice(tag);
    w.write_all(&header)?;
    w.write_all(&(mesh.triangles.len() as u32).to_le_bytes())?;
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i]);
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n.x, n.y, n.z] {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        for p in [a, b, c] {
            for v in [p.x, p.y, p.z] {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        w.write_all(&0u16.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Stl,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => Some(MeshFormat::Stl),
            _ => None,
        }
    }
}

pub fn export_mesh(mesh: &TriangleMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    match format {
        MeshFormat::Obj => write_obj(mesh, file),
        MeshFormat::Stl => write_stl(mesh, file),
    }
}

/// Reads vertices and triangular faces of an OBJ file; other records are ignored.
pub fn read_obj(text: &str) -> Result<TriangleMesh> {
    let mut mesh = TriangleMesh::default();
    for (ln, line) in text.lines().enumerate() {
        let err = |column: usize, message: String| Error::Parse {
            line: ln + 1,
            column,
            message,
        };
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(|s| s.parse::<f64>().map_err(|e| err(3, format!("bad coordinate {s:?}: {e}"))))
                    .collect::<Result<_>>()?;
                if c.len() < 3 {
                    return Err(err(1, "vertex needs 3 coordinates".into()));
                }
                mesh.vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        match head.parse::<usize>() {
                            Ok(i) if i >= 1 => Ok(i - 1),
                            _ => Err(err(3, format!("bad face index {s:?}"))),
                        }
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(err(1, format!("face has {} corners, expected 3", idx.len())));
                }
                mesh.triangles.push([idx[0], idx[1], idx[2]]);
                mesh.provenance.push(Patch::Sphere);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

/// Reads a binary STL, welding bit-identical corners.
pub fn read_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    let fail = |offset: usize, message: &str| Error::Parse {
        line: 0,
        column: offset,
        message: message.into(),
    };
    if bytes.len() < 84 {
        return Err(fail(bytes.len(), "file shorter than the STL header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * count {
        return Err(fail(80, &format!("count field {count} does not match the file size {}", bytes.len())));
    }
    let mut mesh = TriangleMesh::default();
    let mut index: std::collections::HashMap<[u32; 3], usize> = Default::default();
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    for t in 0..count {
        let base = 84 + 50 * t + 12;
        let mut tri = [0; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let o = base + 12 * k;
            let key = [f(o).to_bits(), f(o + 4).to_bits(), f(o + 8).to_bits()];
            *slot = *index.entry(key).or_insert_with(|| {
                mesh.vertices.push(Point3::new(f(o) as f64, f(o + 4) as f64, f(o + 8) as f64));
                mesh.vertices.len() - 1
            });
        }
        mesh.triangles.push(tri);
        mesh.provenance.push(Patch::Sphere);
    }
    Ok(mesh)
}
