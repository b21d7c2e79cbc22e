use std::fmt::Write as _;
use std::path::Path;

use super::ControlMesh;
use crate::{Error, Result, Vec3};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    tok.ok_or_else(|| parse_err(line, "missing coordinate"))?
        .parse()
        .map_err(|_| parse_err(line, "bad coordinate"))
}

/// Parses Wavefront OBJ text (vertices and triangular faces only).
pub fn read_obj(text: &str) -> Result<ControlMesh> {
    let mut pos = Vec::new();
    let mut tris = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut it = content.split_whitespace();
        match it.next() {
            Some("v") => {
                let x = parse_f64(it.next(), line)?;
                let y = parse_f64(it.next(), line)?;
                let z = parse_f64(it.next(), line)?;
                pos.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let idx: Vec<i64> = it
                    .map(|t| {
                        t.split('/')
                            .next()
                            .and_then(|s| s.parse::<i64>().ok())
                            .ok_or_else(|| parse_err(line, "bad face index"))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(
                        line,
                        format!("face has {} vertices, expected 3", idx.len()),
                    ));
                }
                let mut t = [0u32; 3];
                for (k, &j) in idx.iter().enumerate() {
                    let r = if j > 0 { j - 1 } else { pos.len() as i64 + j };
                    if r < 0 {
                        return Err(parse_err(line, "face index out of range"));
                    }
                    t[k] = r as u32;
                }
                tris.push(t);
            }
            _ => {}
        }
    }
    ControlMesh::new(pos, tris)
}

/// Parses OFF text with triangular faces.
pub fn read_off(text: &str) -> Result<ControlMesh> {
    let tokens: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| {
            l.split('#')
                .next()
                .unwrap_or("")
                .split_whitespace()
                .map(move |t| (i + 1, t))
        })
        .collect();
    let mut it = tokens.into_iter();
    let (line, head) = it.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if head != "OFF" {
        return Err(parse_err(line, "missing OFF header"));
    }
    let mut next = |what: &str| -> Result<(usize, &str)> {
        it.next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))
    };
    let mut count = |what: &str| -> Result<usize> {
        let (l, t) = next(what)?;
        t.parse().map_err(|_| parse_err(l, format!("bad {what}")))
    };
    let nv = count("vertex count")?;
    let nf = count("face count")?;
    count("edge count")?;
    let mut coord = |what: &str| -> Result<f64> {
        let (l, t) = next(what)?;
        t.parse().map_err(|_| parse_err(l, format!("bad {what}")))
    };
    let mut pos = Vec::with_capacity(nv);
    for _ in 0..nv {
        pos.push(Vec3::new(
            coord("coordinate")?,
            coord("coordinate")?,
            coord("coordinate")?,
        ));
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let n = coord("face size")?;
        if n != 3.0 {
            return Err(parse_err(0, format!("face has {n} vertices, expected 3")));
        }
        let mut f = [0u32; 3];
        for x in &mut f {
            let v = coord("face index")?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(parse_err(0, "bad face index"));
            }
            *x = v as u32;
        }
        tris.push(f);
    }
    ControlMesh::new(pos, tris)
}

/// Reads an `.obj` or `.off` file, chosen by extension.
pub fn read_mesh(path: &Path) -> Result<ControlMesh> {
    let text = std::fs::read_to_string(path)?;
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("obj") => read_obj(&text),
        Some("off") => read_off(&text),
        _ => Err(Error::InvalidArgument(format!(
            "unknown mesh format: {}",
            path.display()
        ))),
    }
}

pub fn write_obj(mesh: &ControlMesh) -> String {
    let mut s = String::new();
    for p in mesh.positions() {
        let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", p.x, p.y, p.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn write_off(mesh: &ControlMesh) -> String {
    let mut s = format!(
        "OFF\n{} {} {}\n",
        mesh.num_vertices(),
        mesh.num_faces(),
        mesh.num_edges()
    );
    for p in mesh.positions() {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", p.x, p.y, p.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}
