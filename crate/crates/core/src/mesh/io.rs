//! Plain-text mesh format.
//!
//! ```text
//! POLYMESH 2
//! <n_vertices>
//! x y            (one line per vertex)
//! <n_elements>
//! k v1 ... vk    (one line per element, 0-based, counter-clockwise)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{build_connectivity, PolyMesh};
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const HEADER: &str = "POLYMESH 2";

/// Real number with 17 significant digits; round-trips every f64.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_string(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "{}", mesh.vertices.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {}", fmt_real(v.x), fmt_real(v.y)).unwrap();
    }
    writeln!(s, "{}", mesh.elements.len()).unwrap();
    for el in &mesh.elements {
        write!(s, "{}", el.vertices.len()).unwrap();
        for v in &el.vertices {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    from_str(&std::fs::read_to_string(path)?)
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::MeshFormat { line, msg: msg.into() }
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.line += 1;
        self.inner
            .next()
            .ok_or_else(|| err(self.line, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_count(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| err(line, format!("expected a count, found {s:?}")))
}

pub fn from_str(text: &str) -> Result<PolyMesh> {
    let mut lines = Lines { inner: text.lines(), line: 0 };
    let header = lines.next("header")?;
    if header != HEADER {
        return Err(err(1, format!("expected header {HEADER:?}, found {header:?}")));
    }
    let nv = parse_count(lines.next("vertex count")?, lines.line)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next("vertex")?;
        let fields: Vec<&str> = l.split(' ').collect();
        if fields.len() != 2 {
            return Err(err(lines.line, "vertex line must hold exactly two reals"));
        }
        let parse = |s: &str| -> Result<f64> {
            let x: f64 = s.parse().map_err(|_| err(lines.line, format!("bad real {s:?}")))?;
            if !x.is_finite() {
                return Err(err(lines.line, "non-finite coordinate"));
            }
            Ok(x)
        };
        vertices.push(Point2::new(parse(fields[0])?, parse(fields[1])?));
    }
    let ne = parse_count(lines.next("element count")?, lines.line)?;
    let mut loops = Vec::with_capacity(ne);
    for _ in 0..ne {
        let l = lines.next("element")?;
        let mut fields = l.split(' ');
        let k = parse_count(fields.next().unwrap_or(""), lines.line)?;
        let ids = fields
            .map(|s| parse_count(s, lines.line))
            .collect::<Result<Vec<_>>>()?;
        if ids.len() != k {
            return Err(err(lines.line, format!("element declares {k} vertices, lists {}", ids.len())));
        }
        if let Some(&bad) = ids.iter().find(|&&v| v >= nv) {
            return Err(err(lines.line, format!("vertex index {bad} out of range")));
        }
        loops.push(ids);
    }
    lines.line += 1;
    if let Some(extra) = lines.inner.next() {
        if !extra.is_empty() || lines.inner.next().is_some() {
            return Err(err(lines.line, "trailing content after last element"));
        }
    }
    build_connectivity(vertices, loops)
}
