use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::domain::{cross, dist, dot, norm, orient, sub, DomainShape, Point, PolygonalDomain};
use crate::error::{Error, Result};

/// A boundary edge, oriented so the domain lies to its left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub normal: Point,
    pub length: f64,
    /// Index of the polygon side this edge lies on.
    pub side: usize,
}

/// Conforming P1 triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub boundary_node: Vec<bool>,
    pub level: usize,
    pub h: f64,
}

impl TriangleMesh {
    /// Level-0 mesh of a domain.
    ///
    /// Rectangles get four triangles meeting at the centroid, regular N-gons a
    /// fan around the centre, everything else is ear-clipped.
    pub fn coarse(domain: &PolygonalDomain) -> Result<Self> {
        domain.validate()?;
        let v = &domain.vertices;
        let n = v.len();
        let (nodes, triangles) = match domain.shape {
            DomainShape::Rectangle { .. } => {
                let c = centroid(v);
                let mut nodes = v.clone();
                nodes.push(c);
                let tris = (0..n).map(|i| [i, (i + 1) % n, n]).collect();
                (nodes, tris)
            }
            DomainShape::RegularNgon { .. } => {
                let mut nodes = v.clone();
                nodes.push([0.0, 0.0]);
                let tris = (0..n).map(|i| [i, (i + 1) % n, n]).collect();
                (nodes, tris)
            }
            DomainShape::General => (v.clone(), ear_clip(v)?),
        };
        let side_of = |a: usize, b: usize| -> usize {
            // coarse boundary edges run between consecutive polygon vertices
            if (a + 1) % n == b {
                a
            } else {
                b
            }
        };
        let mut mesh = Self::from_triangles(nodes, triangles, 0)?;
        for e in &mut mesh.boundary_edges {
            e.side = side_of(e.nodes[0], e.nodes[1]);
        }
        mesh.sort_boundary_edges();
        Ok(mesh)
    }

    /// Builds a mesh from nodes and CCW triangles; boundary edges are the
    /// edges used by exactly one triangle. Sides are assigned by grouping
    /// collinear runs along each boundary loop.
    pub fn from_triangles(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, level: usize) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            let [a, b, c] = tri.map(|i| nodes[i]);
            if orient(a, b, c) <= 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
        }
        let mut count: HashMap<(usize, usize), (usize, bool)> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let entry = count.entry(key).or_insert((0, a < b));
                entry.0 += 1;
                if entry.0 == 2 && entry.1 == (a < b) {
                    return Err(Error::InvalidMesh(format!("edge ({a},{b}) used twice with the same orientation")));
                }
                if entry.0 > 2 {
                    return Err(Error::InvalidMesh(format!("edge ({a},{b}) shared by more than two triangles")));
                }
            }
        }
        let mut boundary_edges = Vec::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if count[&(a.min(b), a.max(b))].0 == 1 {
                    boundary_edges.push(make_edge(&nodes, a, b, usize::MAX));
                }
            }
        }
        let mut boundary_node = vec![false; nodes.len()];
        for e in &boundary_edges {
            boundary_node[e.nodes[0]] = true;
            boundary_node[e.nodes[1]] = true;
        }
        let h = max_edge_length(&nodes, &triangles);
        let mut mesh = Self { nodes, triangles, boundary_edges, boundary_node, level, h };
        mesh.assign_sides_by_collinearity()?;
        mesh.sort_boundary_edges();
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_boundary_nodes(&self) -> usize {
        self.boundary_node.iter().filter(|&&b| b).count()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * orient(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|e| e.length).sum()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.boundary_node[i]).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.boundary_node[i]).collect()
    }

    /// Uniform red refinement: every triangle is split into four through its
    /// edge midpoints. Node numbering is deterministic (old nodes first, then
    /// midpoints in order of first appearance).
    pub fn refine(&self) -> TriangleMesh {
        let mut nodes = self.nodes.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(self.triangles.len() * 2);
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(self.boundary_edges.len() * 2);
        for e in &self.boundary_edges {
            let [a, b] = e.nodes;
            let m = mid(a, b, &mut nodes);
            for (i, j) in [(a, m), (m, b)] {
                boundary_edges.push(BoundaryEdge { nodes: [i, j], normal: e.normal, length: dist(nodes[i], nodes[j]), side: e.side });
            }
        }
        let mut boundary_node = vec![false; nodes.len()];
        for e in &boundary_edges {
            boundary_node[e.nodes[0]] = true;
            boundary_node[e.nodes[1]] = true;
        }
        let h = max_edge_length(&nodes, &triangles);
        let mut mesh = TriangleMesh { nodes, triangles, boundary_edges, boundary_node, level: self.level + 1, h };
        mesh.sort_boundary_edges();
        mesh
    }

    /// Applies `refine` `times` times.
    pub fn refined(&self, times: usize) -> TriangleMesh {
        let mut m = self.clone();
        for _ in 0..times {
            m = m.refine();
        }
        m
    }

    /// Checks every structural invariant of the mesh.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if self.triangles[t].iter().any(|&i| i >= self.nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
        }
        let rebuilt = Self::from_triangles(self.nodes.clone(), self.triangles.clone(), self.level)?;
        let key = |e: &BoundaryEdge| e.nodes;
        let mut mine: Vec<_> = self.boundary_edges.iter().map(key).collect();
        let mut theirs: Vec<_> = rebuilt.boundary_edges.iter().map(key).collect();
        mine.sort_unstable();
        theirs.sort_unstable();
        if mine != theirs {
            return Err(Error::InvalidMesh("boundary edges do not match the triangulation".into()));
        }
        for (k, e) in self.boundary_edges.iter().enumerate() {
            if (norm(e.normal) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMesh(format!("boundary edge {k} normal is not unit length")));
            }
            let t = sub(self.nodes[e.nodes[1]], self.nodes[e.nodes[0]]);
            if dot(t, e.normal).abs() > 1e-12 * e.length || cross(t, e.normal) > 0.0 {
                return Err(Error::InvalidMesh(format!("boundary edge {k} normal is not outward")));
            }
        }
        super::traversal::BoundaryTraversal::new(self)?;
        Ok(())
    }

    /// Per-node adjacency (sorted, without self loops).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    fn sort_boundary_edges(&mut self) {
        self.boundary_edges.sort_by_key(|e| e.nodes);
    }

    fn assign_sides_by_collinearity(&mut self) -> Result<()> {
        let trav = super::traversal::BoundaryTraversal::new(self)?;
        let mut side = 0usize;
        let mut first = true;
        for lp in &trav.loops {
            let mut prev_dir: Option<Point> = None;
            for te in &lp.edges {
                let dir = sub(self.nodes[te.nodes[1]], self.nodes[te.nodes[0]]);
                if let Some(p) = prev_dir {
                    let turn = cross(p, dir).abs() > 1e-12 * norm(p) * norm(dir) || dot(p, dir) <= 0.0;
                    if turn {
                        side += 1;
                    }
                } else if !first {
                    side += 1;
                }
                first = false;
                self.boundary_edges[te.edge].side = side;
                prev_dir = Some(dir);
            }
        }
        Ok(())
    }
}

fn make_edge(nodes: &[Point], a: usize, b: usize, side: usize) -> BoundaryEdge {
    let t = sub(nodes[b], nodes[a]);
    let length = norm(t);
    BoundaryEdge { nodes: [a, b], normal: [t[1] / length, -t[0] / length], length, side }
}

fn max_edge_length(nodes: &[Point], triangles: &[[usize; 3]]) -> f64 {
    triangles.iter().flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3]))).map(|(a, b)| dist(nodes[a], nodes[b])).fold(0.0, f64::max)
}

fn centroid(v: &[Point]) -> Point {
    let n = v.len() as f64;
    let (sx, sy) = v.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    [sx / n, sy / n]
}

/// Ear clipping of a CCW simple polygon. Fails when no ear can be found,
/// which happens for polygons left with only collinear vertices.
pub fn ear_clip(v: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut remaining: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len().saturating_sub(2));
    let scale = v.iter().map(|p| norm(*p)).fold(1.0, f64::max);
    let eps = 1e-14 * scale * scale;
    while remaining.len() > 3 {
        let m = remaining.len();
        let ear = (0..m).find(|&k| {
            let (ia, ib, ic) = (remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if orient(a, b, c) <= eps {
                return false;
            }
            remaining.iter().all(|&j| {
                if j == ia || j == ib || j == ic {
                    return true;
                }
                let p = v[j];
                !(orient(a, b, p) >= -eps && orient(b, c, p) >= -eps && orient(c, a, p) >= -eps)
            })
        });
        let Some(k) = ear else {
            return Err(Error::Triangulation("no ear found (degenerate or collinear vertices)".into()));
        };
        let m = remaining.len();
        tris.push([remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]]);
        remaining.remove(k);
    }
    let [a, b, c] = [remaining[0], remaining[1], remaining[2]];
    if orient(v[a], v[b], v[c]) <= eps {
        return Err(Error::Triangulation("final triangle is degenerate (collinear vertices)".into()));
    }
    tris.push([a, b, c]);
    Ok(tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_square_coarse_and_refined() {
        let m = TriangleMesh::coarse(&PolygonalDomain::unit_square()).unwrap();
        assert_eq!((m.n_nodes(), m.n_triangles(), m.boundary_edges.len()), (5, 4, 4));
        m.validate().unwrap();
        let r = m.refine();
        assert_eq!((r.n_nodes(), r.n_triangles(), r.boundary_edges.len()), (13, 16, 8));
        assert!((r.area() - 1.0).abs() < 1e-12);
        assert!((r.h - 0.5 * m.h).abs() <= 1e-12 * m.h);
        assert_eq!(r.level, 1);
        r.validate().unwrap();
    }

    #[test]
    fn lshape_ear_clipped() {
        let m = TriangleMesh::coarse(&PolygonalDomain::lshape()).unwrap();
        assert_eq!(m.n_triangles(), 4);
        assert_eq!(m.n_nodes(), 6);
        assert_eq!(m.interior_nodes().len(), 0);
        assert!((m.area() - 3.0).abs() < 1e-12);
        // sides follow the polygon vertex order
        let mut sides: Vec<_> = m.boundary_edges.iter().map(|e| (e.nodes[0], e.side)).collect();
        sides.sort_unstable();
        assert_eq!(sides, (0..6).map(|i| (i, i)).collect::<Vec<_>>());
        m.validate().unwrap();
    }

    #[test]
    fn ngon_fan() {
        let d = PolygonalDomain::regular_ngon(64, 1.0).unwrap();
        let m = TriangleMesh::coarse(&d).unwrap();
        assert_eq!(m.boundary_edges.len(), 64);
        let expect = 32.0 * (2.0 * PI / 64.0).sin();
        assert!((m.area() - expect).abs() <= 1e-12 * expect);
        m.validate().unwrap();
    }

    #[test]
    fn ear_clip_collinear_failure() {
        // all vertices on one line apart from a sliver: triangle with a 180-degree vertex only
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(ear_clip(&v), Err(Error::Triangulation(_))));
    }

    #[test]
    fn ear_clip_nonconvex() {
        let v = vec![[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [1.5, 1.0], [0.0, 3.0]];
        let tris = ear_clip(&v).unwrap();
        assert_eq!(tris.len(), 3);
        let area: f64 = tris.iter().map(|t| 0.5 * orient(v[t[0]], v[t[1]], v[t[2]])).sum();
        assert!((area - super::super::domain::polygon_signed_area(&v)).abs() < 1e-12);
    }

    #[test]
    fn outward_normals_point_away_from_adjacent_centroid() {
        let m = TriangleMesh::coarse(&PolygonalDomain::lshape()).unwrap().refined(2);
        for e in &m.boundary_edges {
            let tri = m.triangles.iter().find(|t| (0..3).any(|k| t[k] == e.nodes[0] && t[(k + 1) % 3] == e.nodes[1])).unwrap();
            let c = [
                (m.nodes[tri[0]][0] + m.nodes[tri[1]][0] + m.nodes[tri[2]][0]) / 3.0,
                (m.nodes[tri[0]][1] + m.nodes[tri[1]][1] + m.nodes[tri[2]][1]) / 3.0,
            ];
            let (p, q) = (m.nodes[e.nodes[0]], m.nodes[e.nodes[1]]);
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            assert!(dot(e.normal, sub(c, mid)) < 0.0);
        }
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(TriangleMesh::from_triangles(nodes, vec![[0, 2, 1]], 0).is_err());
    }
}
