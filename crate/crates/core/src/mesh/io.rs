//! The `polymesh 1` text format.
//!
//! ```text
//! polymesh 1
//! vertices N
//! x y            (N lines, 17 significant digits)
//! cells M
//! k i1 i2 ... ik (M lines, 0-based vertex indices, CCW)
//! ```
//!
//! Blank lines are ignored. Clockwise cells are reversed on load with a
//! warning; any other inconsistency is an error.

use std::fmt::Write as _;
use std::path::Path;

use super::geometry::signed_area;
use super::{Point, PolygonMesh};
use crate::{Error, Result};

pub fn write_mesh(mesh: &PolygonMesh) -> String {
    let mut out = String::new();
    out.push_str("polymesh 1\n");
    let _ = writeln!(out, "vertices {}", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e}", v.x, v.y);
    }
    let _ = writeln!(out, "cells {}", mesh.n_cells());
    for cell in mesh.cells() {
        let _ = write!(out, "{}", cell.len());
        for v in cell {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_mesh(mesh: &PolygonMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                self.last = i + 1;
                return Ok((i + 1, t));
            }
        }
        Err(Error::Parse { line: self.last + 1, msg: "unexpected end of file".into() })
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn header_count(lines: &mut Lines<'_>, keyword: &str) -> Result<usize> {
    let (ln, l) = lines.next()?;
    let mut it = l.split_whitespace();
    if it.next() != Some(keyword) {
        return Err(err(ln, format!("expected `{keyword} <count>`")));
    }
    let n = it
        .next()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| err(ln, format!("bad {keyword} count")))?;
    if it.next().is_some() {
        return Err(err(ln, "trailing tokens"));
    }
    Ok(n)
}

pub fn parse_mesh(text: &str) -> Result<PolygonMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, header) = lines.next()?;
    if header.split_whitespace().collect::<Vec<_>>() != ["polymesh", "1"] {
        return Err(err(ln, "expected header `polymesh 1`"));
    }

    let nv = header_count(&mut lines, "vertices")?;
    let mut vertices = Vec::with_capacity(nv.min(1 << 20));
    for _ in 0..nv {
        let (ln, l) = lines.next()?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        match coords[..] {
            [x, y] if x.is_finite() && y.is_finite() => vertices.push(Point::new(x, y)),
            [_, _] => return Err(err(ln, "non-finite coordinate")),
            _ => return Err(err(ln, "expected `x y`")),
        }
    }

    let nc = header_count(&mut lines, "cells")?;
    let mut cells = Vec::with_capacity(nc.min(1 << 20));
    for c in 0..nc {
        let (ln, l) = lines.next()?;
        let tokens: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err(ln, format!("bad index `{t}`"))))
            .collect::<Result<_>>()?;
        let (&k, idx) = tokens.split_first().ok_or_else(|| err(ln, "empty cell line"))?;
        if idx.len() != k {
            return Err(err(ln, format!("cell declares {k} vertices but lists {}", idx.len())));
        }
        if let Some(&bad) = idx.iter().find(|&&v| v >= nv) {
            return Err(err(ln, format!("vertex index {bad} out of range (have {nv})")));
        }
        let mut cell = idx.to_vec();
        if k >= 3 {
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if signed_area(&poly) < 0.0 {
                log::warn!("cell {c} is clockwise, reversing");
                cell.reverse();
            }
        }
        cells.push(cell);
    }
    if let Ok((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after cells"));
    }
    PolygonMesh::new(vertices, cells)
}
