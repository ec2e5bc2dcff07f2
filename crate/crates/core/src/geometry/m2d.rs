//! `.m2d` mesh text format.
//!
//! ```text
//! NODES <count>
//! x y            (one line per node)
//! TRIANGLES <count>
//! i j k          (0-based, counterclockwise)
//! BOUNDARY_EDGES <count>
//! i j            (0-based, domain to the left)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::TriangleMesh;
use crate::error::{Error, Result};

pub fn write_m2d(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    writeln!(out, "NODES {}", mesh.nodes.len()).unwrap();
    for p in &mesh.nodes {
        writeln!(out, "{:?} {:?}", p[0], p[1]).unwrap();
    }
    writeln!(out, "TRIANGLES {}", mesh.triangles.len()).unwrap();
    for t in &mesh.triangles {
        writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "BOUNDARY_EDGES {}", mesh.boundary_edges.len()).unwrap();
    for e in &mesh.boundary_edges {
        writeln!(out, "{} {}", e.nodes[0], e.nodes[1]).unwrap();
    }
    out
}

pub fn save_m2d(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_m2d(mesh))?;
    Ok(())
}

pub fn load_m2d(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    parse_m2d(&std::fs::read_to_string(path)?)
}

/// Parses the text format. Triangles must be CCW and indices in range; the
/// listed boundary edges must match the edges used by exactly one triangle.
pub fn parse_m2d(text: &str) -> Result<TriangleMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let n_nodes = section(&mut lines, "NODES")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = next_line(&mut lines)?;
        let v = parse_fields::<f64>(ln, l, 2)?;
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(Error::MeshParse { line: ln, msg: "non-finite coordinate".into() });
        }
        nodes.push([v[0], v[1]]);
    }
    let n_tris = section(&mut lines, "TRIANGLES")?;
    let mut triangles = Vec::with_capacity(n_tris);
    for _ in 0..n_tris {
        let (ln, l) = next_line(&mut lines)?;
        let v = parse_fields::<usize>(ln, l, 3)?;
        if v.iter().any(|&i| i >= n_nodes) {
            return Err(Error::MeshParse { line: ln, msg: "node index out of range".into() });
        }
        let [a, b, c] = [nodes[v[0]], nodes[v[1]], nodes[v[2]]];
        if super::domain::orient(a, b, c) <= 0.0 {
            return Err(Error::MeshParse { line: ln, msg: "triangle is not counterclockwise".into() });
        }
        triangles.push([v[0], v[1], v[2]]);
    }
    let n_edges = section(&mut lines, "BOUNDARY_EDGES")?;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let (ln, l) = next_line(&mut lines)?;
        let v = parse_fields::<usize>(ln, l, 2)?;
        if v.iter().any(|&i| i >= n_nodes) {
            return Err(Error::MeshParse { line: ln, msg: "node index out of range".into() });
        }
        edges.push([v[0], v[1]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::MeshParse { line: ln, msg: "trailing content".into() });
    }
    let mesh = TriangleMesh::from_triangles(nodes, triangles, 0)?;
    let mut derived: Vec<[usize; 2]> = mesh.boundary_edges.iter().map(|e| e.nodes).collect();
    derived.sort_unstable();
    edges.sort_unstable();
    if derived != edges {
        return Err(Error::InvalidMesh("BOUNDARY_EDGES section does not match the triangulation boundary".into()));
    }
    Ok(mesh)
}

fn next_line<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<(usize, &'a str)> {
    lines.next().ok_or(Error::MeshParse { line: 0, msg: "unexpected end of file".into() })
}

fn section<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<usize> {
    let (ln, l) = next_line(lines)?;
    let mut it = l.split_whitespace();
    if it.next() != Some(name) {
        return Err(Error::MeshParse { line: ln, msg: format!("expected `{name} <count>`") });
    }
    it.next().and_then(|c| c.parse().ok()).ok_or(Error::MeshParse { line: ln, msg: "bad count".into() })
}

fn parse_fields<T: std::str::FromStr>(ln: usize, l: &str, n: usize) -> Result<Vec<T>> {
    let v: Vec<T> = l
        .split_whitespace()
        .map(|s| s.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::MeshParse { line: ln, msg: format!("cannot parse `{l}`") })?;
    if v.len() != n {
        return Err(Error::MeshParse { line: ln, msg: format!("expected {n} fields, got {}", v.len()) });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolygonalDomain;

    #[test]
    fn roundtrip_preserves_mesh() {
        let m = TriangleMesh::coarse(&PolygonalDomain::lshape()).unwrap().refined(2);
        let back = parse_m2d(&write_m2d(&m)).unwrap();
        assert_eq!(back.nodes, m.nodes);
        assert_eq!(back.triangles, m.triangles);
        let mut a: Vec<_> = back.boundary_edges.iter().map(|e| (e.nodes, e.side)).collect();
        let mut b: Vec<_> = m.boundary_edges.iter().map(|e| (e.nodes, e.side)).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let bad_index = "NODES 3\n0 0\n1 0\n0 1\nTRIANGLES 1\n0 1 3\nBOUNDARY_EDGES 3\n0 1\n1 2\n2 0\n";
        assert!(matches!(parse_m2d(bad_index), Err(Error::MeshParse { line: 6, .. })));
        let clockwise = "NODES 3\n0 0\n1 0\n0 1\nTRIANGLES 1\n0 2 1\nBOUNDARY_EDGES 3\n0 2\n2 1\n1 0\n";
        assert!(matches!(parse_m2d(clockwise), Err(Error::MeshParse { .. })));
        let ok = "NODES 3\n0 0\n1 0\n0 1\nTRIANGLES 1\n0 1 2\nBOUNDARY_EDGES 3\n0 1\n1 2\n2 0\n";
        assert_eq!(parse_m2d(ok).unwrap().n_triangles(), 1);
    }
}
