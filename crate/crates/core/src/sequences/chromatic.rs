use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Deletion–contraction is exponential in the edge count.
pub const DEFAULT_EDGE_CAP: usize = 20;

/// Simple undirected graph on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        Ok(Self { vertex_count, edges: BTreeSet::new() })
    }

    pub fn with_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(vertex_count)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::new(n)?;
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v)?;
            }
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Result<Self> {
        let mut g = Self::new(n)?;
        for u in 1..n {
            g.add_edge(u - 1, u)?;
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut g = Self::path(n)?;
        if n >= 3 {
            g.add_edge(n - 1, 0)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(Error::InvalidArgument(format!(
                "edge ({u}, {v}) names a vertex outside 0..{}",
                self.vertex_count
            )));
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
        }
        if !self.edges.insert((u.min(v), u.max(v))) {
            return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// `G − e`.
    pub fn delete(&self, e: (usize, usize)) -> Graph {
        let mut g = self.clone();
        g.edges.remove(&(e.0.min(e.1), e.0.max(e.1)));
        g
    }

    /// `G / e`: the endpoints merge, parallel edges collapse and vertices are renumbered.
    pub fn contract(&self, e: (usize, usize)) -> Graph {
        let (keep, gone) = (e.0.min(e.1), e.0.max(e.1));
        let relabel = |x: usize| {
            let x = if x == gone { keep } else { x };
            if x > gone {
                x - 1
            } else {
                x
            }
        };
        let mut edges = BTreeSet::new();
        for &(u, v) in &self.edges {
            let (a, b) = (relabel(u), relabel(v));
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        Graph { vertex_count: self.vertex_count - 1, edges }
    }

    /// Edge-carrying vertices relabelled in order of first appearance, plus the isolated count.
    fn key(&self) -> (Vec<(usize, usize)>, usize) {
        let mut map = BTreeMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(self.edges.len());
        for &(u, v) in &self.edges {
            let n = map.len();
            let a = *map.entry(u).or_insert(n);
            let n = map.len();
            let b = *map.entry(v).or_insert(n);
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        (edges, self.vertex_count - map.len())
    }
}

type Poly = Vec<i64>;

fn sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    while out.len() > 1 && out.last() == Some(&0) {
        out.pop();
    }
    out
}

fn shift(p: &Poly, k: usize) -> Poly {
    let mut out = vec![0; k];
    out.extend_from_slice(p);
    out
}

fn from_edges(edges: &[(usize, usize)], isolated: usize, memo: &mut BTreeMap<Vec<(usize, usize)>, Poly>) -> Poly {
    // χ of the edge-carrying part times q^isolated.
    let core = core_poly(edges, memo);
    shift(&core, isolated)
}

fn core_poly(edges: &[(usize, usize)], memo: &mut BTreeMap<Vec<(usize, usize)>, Poly>) -> Poly {
    if edges.is_empty() {
        return vec![1];
    }
    if let Some(p) = memo.get(edges) {
        return p.clone();
    }
    let n = edges.iter().map(|&(_, v)| v).max().expect("nonempty") + 1;
    let g = Graph { vertex_count: n, edges: edges.iter().copied().collect() };
    let e = *g.edges.iter().next_back().expect("nonempty");
    let (de, di) = g.delete(e).key();
    let (ce, ci) = g.contract(e).key();
    let p = sub(&from_edges(&de, di, memo), &from_edges(&ce, ci, memo));
    memo.insert(edges.to_vec(), p.clone());
    p
}

/// Coefficients of `χ_G(q)` by ascending power of `q`.
pub fn chromatic_polynomial(g: &Graph, edge_cap: usize) -> Result<Vec<i64>> {
    if g.edge_count() > edge_cap {
        return Err(Error::EdgeCapExceeded { edges: g.edge_count(), cap: edge_cap });
    }
    let (edges, isolated) = g.key();
    let mut memo = BTreeMap::new();
    Ok(from_edges(&edges, isolated, &mut memo))
}

pub fn evaluate_polynomial(coefficients: &[i64], q: i64) -> i128 {
    coefficients.iter().rev().fold(0i128, |acc, &c| acc * q as i128 + c as i128)
}
