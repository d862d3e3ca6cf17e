use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use super::TriMesh;
use crate::error::{Error, Result};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let t = tok.ok_or_else(|| perr(line, "missing coordinate"))?;
    t.parse::<f64>().map_err(|_| perr(line, format!("bad number '{t}'")))
}

/// Parses OBJ text. Only `v` and `f` records matter; faces must be triangles.
pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                positions.push(Vector3::new(x, y, z));
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| perr(line, format!("bad index '{t}'")))?;
                        let n = positions.len() as i64;
                        let i = if i < 0 { n + i } else { i - 1 };
                        if i < 0 || i >= n {
                            return Err(perr(line, format!("index {t} out of range")));
                        }
                        Ok(i as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(perr(line, format!("face with {} vertices; only triangles supported", idx.len())));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriMesh::new(positions, faces)
}

pub fn parse_off(text: &str) -> Result<TriMesh> {
    // tokens paired with their line numbers, comments stripped
    let mut toks = text.lines().enumerate().flat_map(|(ln, l)| {
        l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (ln + 1, t))
    });
    let (l0, head) = toks.next().ok_or_else(|| perr(1, "empty file"))?;
    if head != "OFF" {
        return Err(perr(l0, "missing OFF header"));
    }
    let mut next_usize = |what: &str| -> Result<usize> {
        let (l, t) = toks.next().ok_or_else(|| perr(0, format!("unexpected end of file reading {what}")))?;
        t.parse().map_err(|_| perr(l, format!("bad {what} '{t}'")))
    };
    let nv = next_usize("vertex count")?;
    let nf = next_usize("face count")?;
    let _ne = next_usize("edge count")?;
    let mut positions = Vec::with_capacity(nv);
    let mut faces = Vec::with_capacity(nf);
    let mut coords = Vec::new();
    for _ in 0..nv {
        coords.clear();
        for _ in 0..3 {
            let (l, t) = toks.next().ok_or_else(|| perr(0, "unexpected end of file in vertices"))?;
            coords.push(t.parse::<f64>().map_err(|_| perr(l, format!("bad number '{t}'")))?);
        }
        positions.push(Vector3::new(coords[0], coords[1], coords[2]));
    }
    for _ in 0..nf {
        let (l, t) = toks.next().ok_or_else(|| perr(0, "unexpected end of file in faces"))?;
        let k: usize = t.parse().map_err(|_| perr(l, format!("bad face size '{t}'")))?;
        if k != 3 {
            return Err(perr(l, format!("face with {k} vertices; only triangles supported")));
        }
        let mut f = [0usize; 3];
        for slot in &mut f {
            let (l, t) = toks.next().ok_or_else(|| perr(l, "truncated face"))?;
            *slot = t.parse().map_err(|_| perr(l, format!("bad index '{t}'")))?;
            if *slot >= nv {
                return Err(perr(l, format!("index {slot} out of range")));
            }
        }
        faces.push(f);
    }
    TriMesh::new(positions, faces)
}

/// Loads `.obj` or `.off` by extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("off") => parse_off(&text),
        _ => parse_obj(&text),
    }
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriMesh> {
    parse_obj(&fs::read_to_string(path)?)
}

/// Shortest round-trip formatting, so reloading reproduces positions exactly.
pub fn to_obj_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(40 * (mesh.n_vertices() + mesh.n_faces()));
    for p in mesh.positions() {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_obj_string(mesh))?;
    Ok(())
}

/// One vertex index per line; blank lines and `#` comments ignored.
pub fn parse_landmarks(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let t = raw.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|_| perr(ln + 1, format!("bad landmark index '{t}'")))?);
    }
    Ok(out)
}

pub fn load_landmarks(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_landmarks(&fs::read_to_string(path)?)
}

pub fn save_landmarks(landmarks: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let s: String = landmarks.iter().map(|l| format!("{l}\n")).collect();
    fs::write(path, s)?;
    Ok(())
}
