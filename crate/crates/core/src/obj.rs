//! Wavefront OBJ reading and writing.
//!
//! Only `v`, `vt` and `f` records are interpreted. Polygons with more than
//! three vertices are fan-triangulated. Numbers are written with 17
//! significant digits so positions round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::mesh::{Mesh, MeshError};

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("no texture coordinates (vt records) present")]
    MissingTexCoords,
    #[error("vertex {vertex} is used with more than one texture coordinate")]
    ConflictingTexCoords { vertex: usize },
    #[error("vertex {vertex} has no texture coordinate")]
    UnmappedVertex { vertex: usize },
}

/// Raw contents of an OBJ file after triangulation.
#[derive(Debug, Clone, Default)]
pub struct ObjData {
    pub positions: Vec<[f64; 3]>,
    pub tex_coords: Vec<[f64; 2]>,
    pub faces: Vec<[usize; 3]>,
    /// Texture index per face corner, when every corner of the face has one.
    pub face_tex: Vec<Option<[usize; 3]>>,
}

impl ObjData {
    pub fn into_mesh(self) -> Result<Mesh, ObjError> {
        Ok(Mesh::new(self.positions, self.faces)?)
    }

    /// One texture coordinate per vertex, resolved through the face records.
    pub fn vertex_tex_coords(&self) -> Result<Vec<[f64; 2]>, ObjError> {
        if self.tex_coords.is_empty() {
            return Err(ObjError::MissingTexCoords);
        }
        let mut uv: Vec<Option<usize>> = vec![None; self.positions.len()];
        for (face, tex) in self.faces.iter().zip(&self.face_tex) {
            let Some(tex) = tex else { return Err(ObjError::MissingTexCoords) };
            for c in 0..3 {
                let v = face[c];
                match uv[v] {
                    None => uv[v] = Some(tex[c]),
                    Some(t) if t == tex[c] || self.tex_coords[t] == self.tex_coords[tex[c]] => {}
                    Some(_) => return Err(ObjError::ConflictingTexCoords { vertex: v }),
                }
            }
        }
        uv.iter()
            .enumerate()
            .map(|(v, t)| t.map(|t| self.tex_coords[t]).ok_or(ObjError::UnmappedVertex { vertex: v }))
            .collect()
    }
}

pub fn parse_obj(text: &str) -> Result<ObjData, ObjError> {
    let mut data = ObjData::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let err = |msg: String| ObjError::Parse { line, msg };
        match tag {
            "v" => {
                let xyz: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad coordinate {t:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
                if xyz.len() != 3 {
                    return Err(err("vertex needs 3 coordinates".into()));
                }
                data.positions.push([xyz[0], xyz[1], xyz[2]]);
            }
            "vt" => {
                let uv: Vec<f64> = tokens
                    .take(2)
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad texture coordinate {t:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
                if uv.len() != 2 {
                    return Err(err("texture coordinate needs 2 components".into()));
                }
                data.tex_coords.push([uv[0], uv[1]]);
            }
            "f" => {
                let mut verts = Vec::new();
                let mut texs = Vec::new();
                for t in tokens {
                    let mut parts = t.split('/');
                    let v = resolve_index(parts.next().unwrap_or(""), data.positions.len())
                        .ok_or_else(|| err(format!("bad vertex index {t:?}")))?;
                    verts.push(v);
                    let vt =
                        parts.next().filter(|s| !s.is_empty()).and_then(|s| resolve_index(s, data.tex_coords.len()));
                    texs.push(vt);
                }
                if verts.len() < 3 {
                    return Err(err("face needs at least 3 vertices".into()));
                }
                for k in 1..verts.len() - 1 {
                    data.faces.push([verts[0], verts[k], verts[k + 1]]);
                    data.face_tex.push(match (texs[0], texs[k], texs[k + 1]) {
                        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
                        _ => None,
                    });
                }
            }
            _ => {}
        }
    }
    Ok(data)
}

/// 1-based or negative (relative) OBJ index to 0-based.
fn resolve_index(token: &str, count: usize) -> Option<usize> {
    let i: i64 = token.parse().ok()?;
    if i > 0 {
        Some(i as usize - 1)
    } else if i < 0 && (-i) as usize <= count {
        Some(count - (-i) as usize)
    } else {
        None
    }
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<ObjData, ObjError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ObjError::Io { path: path.display().to_string(), source })?;
    parse_obj(&text)
}

/// Loads a triangle mesh from an OBJ file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, ObjError> {
    read_obj(path)?.into_mesh()
}

/// Serializes a mesh, optionally with one texture coordinate per vertex.
pub fn write_obj(mesh: &Mesh, uv: Option<&[[f64; 2]]>) -> String {
    let mut out = String::new();
    for p in mesh.positions() {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    if let Some(uv) = uv {
        for t in uv {
            let _ = writeln!(out, "vt {:.16e} {:.16e}", t[0], t[1]);
        }
    }
    for f in mesh.faces() {
        let [a, b, c] = f.map(|i| i + 1);
        if uv.is_some() {
            let _ = writeln!(out, "f {a}/{a} {b}/{b} {c}/{c}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }
    out
}
