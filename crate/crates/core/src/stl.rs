//! STL export for triangle meshes, plus a small reader used to verify
//! exported files.
//!
//! Both writers are pure functions of the mesh, so output is byte-identical
//! across runs and platforms. ASCII numbers use scientific notation with six
//! significant digits and LF line endings; binary files carry a constant
//! 80-byte header so equal meshes serialize to equal bytes.

use crate::meshing::TriangleMesh;
use nalgebra::{Point3, Vector3};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StlError {
    #[error("malformed stl: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlMode {
    Ascii,
    Binary,
}

const BINARY_HEADER_TAG: &[u8] = b"triangle mesh; millimeters; constant header";

fn facet_normal(a: Point3<f64>, b: Point3<f64>, c: Point3<f64>) -> Vector3<f64> {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        Vector3::zeros()
    }
}

/// Six significant digits, lowercase exponent, negative zero normalized.
fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.5e}")
}

/// Serializes the mesh in the requested STL flavor.
pub fn write_stl(m: &TriangleMesh, name: &str, mode: StlMode) -> Vec<u8> {
    match mode {
        StlMode::Ascii => write_ascii(m, name),
        StlMode::Binary => write_binary(m),
    }
}

fn write_ascii(m: &TriangleMesh, name: &str) -> Vec<u8> {
    let mut out = String::new();
    writeln!(out, "solid {name}").unwrap();
    for t in &m.triangles {
        let a = m.vertices[t[0] as usize];
        let b = m.vertices[t[1] as usize];
        let c = m.vertices[t[2] as usize];
        let n = facet_normal(a, b, c);
        writeln!(out, "facet normal {} {} {}", fmt(n.x), fmt(n.y), fmt(n.z)).unwrap();
        writeln!(out, "outer loop").unwrap();
        for v in [a, b, c] {
            writeln!(out, "vertex {} {} {}", fmt(v.x), fmt(v.y), fmt(v.z)).unwrap();
        }
        writeln!(out, "endloop").unwrap();
        writeln!(out, "endfacet").unwrap();
    }
    writeln!(out, "endsolid {name}").unwrap();
    out.into_bytes()
}

fn write_binary(m: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * m.triangles.len());
    let mut header = [0u8; 80];
    header[..BINARY_HEADER_TAG.len()].copy_from_slice(BINARY_HEADER_TAG);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(m.triangles.len() as u32).to_le_bytes());
    for t in &m.triangles {
        let a = m.vertices[t[0] as usize];
        let b = m.vertices[t[1] as usize];
        let c = m.vertices[t[2] as usize];
        let n = facet_normal(a, b, c);
        for v in [n.x, n.y, n.z] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        for p in [a, b, c] {
            for v in [p.x, p.y, p.z] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Parses either STL flavor back into a triangle soup. A verification aid:
/// tests re-import exported files to check watertightness and that both
/// flavors carry the same geometry.
pub fn read_stl(bytes: &[u8]) -> Result<Vec<[Point3<f32>; 3]>, StlError> {
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if bytes.len() == 84 + 50 * count {
            return read_binary(&bytes[84..], count);
        }
    }
    read_ascii(bytes)
}

fn read_binary(records: &[u8], count: usize) -> Result<Vec<[Point3<f32>; 3]>, StlError> {
    let mut soup = Vec::with_capacity(count);
    for rec in records.chunks_exact(50) {
        let at = |i: usize| {
            // Skip the 12-byte normal; vertices start at byte 12.
            let o = 12 + 4 * i;
            f32::from_le_bytes(rec[o..o + 4].try_into().unwrap())
        };
        soup.push([
            Point3::new(at(0), at(1), at(2)),
            Point3::new(at(3), at(4), at(5)),
            Point3::new(at(6), at(7), at(8)),
        ]);
    }
    Ok(soup)
}

fn read_ascii(bytes: &[u8]) -> Result<Vec<[Point3<f32>; 3]>, StlError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| StlError::Malformed("neither a binary record stream nor text".into()))?;
    if !text.starts_with("solid") {
        return Err(StlError::Malformed("missing `solid` header".into()));
    }
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        if parts.next() != Some("vertex") {
            continue;
        }
        let mut coord = || -> Result<f32, StlError> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| StlError::Malformed(format!("bad vertex on line {}", i + 1)))
        };
        points.push(Point3::new(coord()?, coord()?, coord()?));
    }
    if points.len() % 3 != 0 {
        return Err(StlError::Malformed(format!(
            "{} vertex lines do not form whole triangles",
            points.len()
        )));
    }
    Ok(points.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}
