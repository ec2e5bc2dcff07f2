use serde::{Deserialize, Serialize};

use super::domain::Point;
use super::mesh::TriangleMesh;
use crate::error::{Error, Result};

/// Two-point Gauss abscissae on [0, 1].
pub const GAUSS2: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// A boundary point handed to user-supplied boundary functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: Point,
    /// Arclength coordinate in `[0, perimeter)`.
    pub s: f64,
    /// Polygon side index.
    pub side: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadPoint {
    pub x: Point,
    pub s: f64,
    pub weight: f64,
    /// Values of the two edge hat functions (start node, end node).
    pub basis: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversalEdge {
    /// Index into `TriangleMesh::boundary_edges`.
    pub edge: usize,
    pub nodes: [usize; 2],
    pub s0: f64,
    pub length: f64,
    pub side: usize,
    pub quad: [QuadPoint; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub nodes: Vec<usize>,
    /// Cumulative arclength at each node of `nodes`.
    pub arclength: Vec<f64>,
    pub edges: Vec<TraversalEdge>,
    pub length: f64,
}

/// Arclength-ordered walk around the boundary with per-edge quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraversal {
    pub loops: Vec<BoundaryLoop>,
    pub perimeter: f64,
}

impl BoundaryTraversal {
    /// Each loop starts at its lexicographically smallest node; loops are
    /// ordered by that node and arclength runs on across loops.
    pub fn new(mesh: &TriangleMesh) -> Result<Self> {
        let n = mesh.nodes.len();
        let mut outgoing = vec![usize::MAX; n];
        for (k, e) in mesh.boundary_edges.iter().enumerate() {
            let a = e.nodes[0];
            if outgoing[a] != usize::MAX {
                return Err(Error::InvalidMesh(format!("boundary node {a} has two outgoing edges")));
            }
            outgoing[a] = k;
        }
        let mut starts: Vec<usize> = mesh.boundary_edges.iter().map(|e| e.nodes[0]).collect();
        starts.sort_by(|&a, &b| {
            let (p, q) = (mesh.nodes[a], mesh.nodes[b]);
            p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(a.cmp(&b))
        });
        let mut visited = vec![false; mesh.boundary_edges.len()];
        let mut loops = Vec::new();
        let mut offset = 0.0;
        for &start in &starts {
            if visited[outgoing[start]] {
                continue;
            }
            let mut lp = BoundaryLoop { nodes: Vec::new(), arclength: Vec::new(), edges: Vec::new(), length: 0.0 };
            let mut node = start;
            let mut s = 0.0;
            loop {
                let k = outgoing[node];
                if k == usize::MAX {
                    return Err(Error::InvalidMesh(format!("open boundary chain at node {node}")));
                }
                if visited[k] {
                    return Err(Error::InvalidMesh(format!("boundary chain revisits edge {k}")));
                }
                visited[k] = true;
                let e = &mesh.boundary_edges[k];
                lp.nodes.push(node);
                lp.arclength.push(offset + s);
                let (p, q) = (mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
                let quad = GAUSS2.map(|xi| QuadPoint {
                    x: [p[0] + xi * (q[0] - p[0]), p[1] + xi * (q[1] - p[1])],
                    s: offset + s + xi * e.length,
                    weight: 0.5 * e.length,
                    basis: [1.0 - xi, xi],
                });
                lp.edges.push(TraversalEdge { edge: k, nodes: e.nodes, s0: offset + s, length: e.length, side: e.side, quad });
                s += e.length;
                node = e.nodes[1];
                if node == start {
                    break;
                }
            }
            lp.length = s;
            offset += s;
            loops.push(lp);
        }
        if visited.iter().any(|v| !v) {
            return Err(Error::InvalidMesh("boundary edges not covered by closed loops".into()));
        }
        let perimeter = loops.iter().map(|l| l.length).sum();
        Ok(Self { loops, perimeter })
    }

    pub fn edges(&self) -> impl Iterator<Item = &TraversalEdge> {
        self.loops.iter().flat_map(|l| l.edges.iter())
    }

    pub fn n_edges(&self) -> usize {
        self.loops.iter().map(|l| l.edges.len()).sum()
    }

    /// Boundary point view of every quadrature point, in traversal order.
    pub fn quad_points(&self) -> impl Iterator<Item = (BoundaryPoint, &QuadPoint, &TraversalEdge)> {
        self.edges().flat_map(|e| e.quad.iter().map(move |q| (BoundaryPoint { x: q.x, s: q.s, side: e.side }, q, e)))
    }
}
