//! Sparse LDL^T factorization with a fill-reducing ordering.
//!
//! The numeric kernel is the classic up-looking algorithm driven by the
//! elimination tree. Pivots are 1x1 and taken in the fill-reducing order;
//! a pivot that is zero to working precision is reported as a breakdown so
//! callers can move the shift (the matrices factored here are `K - sigma M`).
//! By Sylvester's law of inertia the signs of `D` give the inertia of the
//! input matrix.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const NONE: usize = usize::MAX;
const LEAF_SIZE: usize = 64;

/// Fill-reducing symmetric permutation. `perm[new] = old`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    pub perm: Vec<usize>,
    pub pinv: Vec<usize>,
}

impl Ordering {
    pub fn natural(n: usize) -> Self {
        Self { perm: (0..n).collect(), pinv: (0..n).collect() }
    }

    /// Approximate minimum degree. Falls back to nested dissection if the
    /// pattern is rejected.
    pub fn amd(a: &CsrMatrix) -> Self {
        let n = a.dim();
        let mut ap = Vec::with_capacity(n + 1);
        let mut ai = Vec::with_capacity(a.nnz());
        ap.push(0);
        for i in 0..n {
            ai.extend_from_slice(a.row(i).0);
            ap.push(ai.len());
        }
        match amd::order(n, &ap, &ai, &amd::Control::default()) {
            Ok((perm, pinv, _)) => Self { perm, pinv },
            Err(status) => {
                log::warn!("AMD ordering failed ({status:?}); using nested dissection");
                Self::nested_dissection(a)
            }
        }
    }

    /// Nested dissection on the matrix graph using breadth-first level sets
    /// as separators.
    pub fn nested_dissection(a: &CsrMatrix) -> Self {
        let adj = a.pattern();
        let n = adj.len();
        let mut nd = Dissector { adj: &adj, in_set: vec![NONE; n], level: vec![NONE; n], next_tag: 0, order: Vec::with_capacity(n) };
        let all: Vec<usize> = (0..n).collect();
        nd.dissect(all);
        let perm = nd.order;
        debug_assert_eq!(perm.len(), n);
        let mut pinv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        Self { perm, pinv }
    }
}

struct Dissector<'a> {
    adj: &'a [Vec<usize>],
    in_set: Vec<usize>,
    level: Vec<usize>,
    next_tag: usize,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn tag(&mut self, nodes: &[usize]) -> usize {
        let t = self.next_tag;
        self.next_tag += 1;
        for &v in nodes {
            self.in_set[v] = t;
            self.level[v] = NONE;
        }
        t
    }

    /// BFS restricted to the tagged set; returns level sets.
    fn bfs(&mut self, root: usize, tag: usize) -> Vec<Vec<usize>> {
        let mut levels = vec![vec![root]];
        self.level[root] = 0;
        loop {
            let d = levels.len();
            let mut next = Vec::new();
            for &v in &levels[d - 1] {
                for &w in &self.adj[v] {
                    if self.in_set[w] == tag && self.level[w] == NONE {
                        self.level[w] = d;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    }

    fn clear_levels(&mut self, levels: &[Vec<usize>]) {
        for l in levels {
            for &v in l {
                self.level[v] = NONE;
            }
        }
    }

    fn dissect(&mut self, nodes: Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            self.order.extend(nodes);
            return;
        }
        let tag = self.tag(&nodes);
        // pseudo-peripheral root
        let mut root = nodes[0];
        let mut levels = self.bfs(root, tag);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < nodes.len() {
            // disconnected: handle components one by one
            let comp: Vec<usize> = levels.concat();
            let rest: Vec<usize> = nodes.into_iter().filter(|&v| self.level[v] == NONE).collect();
            self.clear_levels(&levels);
            self.dissect(comp);
            self.dissect(rest);
            return;
        }
        for _ in 0..3 {
            let last = levels.last().unwrap();
            let cand = *last.iter().min_by_key(|&&v| (self.adj[v].len(), v)).unwrap();
            self.clear_levels(&levels);
            let trial = self.bfs(cand, tag);
            if trial.len() <= levels.len() {
                self.clear_levels(&trial);
                levels = self.bfs(root, tag);
                break;
            }
            root = cand;
            levels = trial;
        }
        if levels.len() < 3 {
            self.clear_levels(&levels);
            self.order.extend(nodes);
            return;
        }
        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut split = 1;
        for (d, l) in levels.iter().enumerate() {
            if acc + l.len() > half {
                split = d.clamp(1, levels.len() - 2);
                break;
            }
            acc += l.len();
        }
        // separator: nodes of the split level with a neighbour beyond it
        let mut part_a: Vec<usize> = levels[..split].concat();
        let part_b: Vec<usize> = levels[split + 1..].concat();
        let mut sep = Vec::new();
        for &v in &levels[split] {
            if self.adj[v].iter().any(|&w| self.in_set[w] == tag && self.level[w] == split + 1) {
                sep.push(v);
            } else {
                part_a.push(v);
            }
        }
        self.clear_levels(&levels);
        self.dissect(part_a);
        self.dissect(part_b);
        self.order.extend(sep);
    }
}

/// Signature of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// `P A P^T = L D L^T` with unit lower triangular `L` stored by columns.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_ordering(a, &Ordering::amd(a))
    }

    pub fn with_ordering(a: &CsrMatrix, ord: &Ordering) -> Result<Self> {
        let n = a.dim();
        if ord.perm.len() != n {
            return Err(Error::Dimension(format!("ordering of size {} for matrix of size {n}", ord.perm.len())));
        }
        // upper triangle of the permuted matrix, by columns
        let mut colcount = vec![0usize; n + 1];
        for (i, j, _) in a.iter() {
            let (ni, nj) = (ord.pinv[i], ord.pinv[j]);
            if ni <= nj {
                colcount[nj + 1] += 1;
            }
        }
        for k in 0..n {
            colcount[k + 1] += colcount[k];
        }
        let ap = colcount.clone();
        let mut next = colcount;
        let mut ai = vec![0usize; ap[n]];
        let mut ax = vec![0.0; ap[n]];
        for (i, j, v) in a.iter() {
            let (ni, nj) = (ord.pinv[i], ord.pinv[j]);
            if ni <= nj {
                ai[next[nj]] = ni;
                ax[next[nj]] = v;
                next[nj] += 1;
            }
        }

        // symbolic: elimination tree and column counts
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                while i < k && flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }

        // numeric
        let amax = a.max_abs().max(f64::MIN_POSITIVE);
        let tiny = 64.0 * f64::EPSILON * amax;
        let mut li = vec![0usize; lp[n]];
        let mut lx = vec![0.0; lp[n]];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        lnz.iter_mut().for_each(|c| *c = 0);
        flag.iter_mut().for_each(|f| *f = NONE);
        for k in 0..n {
            y[k] = 0.0;
            let mut top = n;
            flag[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                y[i] += ax[p];
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let start = lp[i];
                let end = start + lnz[i];
                for p in start..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            if !d[k].is_finite() || d[k].abs() <= tiny {
                return Err(Error::FactorizationBreakdown(ord.perm[k]));
            }
        }
        Ok(Self { n, perm: ord.perm.clone(), pinv: ord.pinv.clone(), lp, li, lx, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_l(&self) -> usize {
        self.lx.len()
    }

    pub fn inertia(&self) -> Inertia {
        let mut s = Inertia::default();
        for &v in &self.d {
            if v < 0.0 {
                s.negative += 1;
            } else if v > 0.0 {
                s.positive += 1;
            } else {
                s.zero += 1;
            }
        }
        s
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..self.n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in 0..self.n {
            x[j] /= self.d[j];
        }
        for j in (0..self.n).rev() {
            let mut xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                xj -= self.lx[p] * x[self.li[p]];
            }
            x[j] = xj;
        }
        let mut out = vec![0.0; self.n];
        for (old, &new) in self.pinv.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}
