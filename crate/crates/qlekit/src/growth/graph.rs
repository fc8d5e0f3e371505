//! Undirected multigraphs with loops, as used by the growth and map samplers.

use rand::Rng;

use crate::error::{invalid, Result};

/// Undirected multigraph. Loops appear twice in the adjacency list of their vertex.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Adds an edge and returns its index.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<usize> {
        if a >= self.n || b >= self.n {
            return invalid(format!("edge ({a},{b}) out of range for {} vertices", self.n));
        }
        let e = self.edges.len();
        self.edges.push((a, b));
        self.adj[a].push((b, e));
        self.adj[b].push((a, e));
        Ok(e)
    }

    /// Adds a vertex and returns its index.
    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.n += 1;
        self.n - 1
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Incident (neighbor, edge) pairs; loops listed twice.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// The endpoint of `e` opposite to `v`.
    pub fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// One simple-random-walk step: returns (next vertex, edge used).
    pub fn walk_step<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> (usize, usize) {
        let nb = &self.adj[v];
        nb[rng.gen_range(0..nb.len())]
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Breadth-first graph distances from `s` (usize::MAX if unreachable).
    pub fn bfs_distances(&self, s: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n];
        let mut q = std::collections::VecDeque::new();
        d[s] = 0;
        q.push_back(s);
        while let Some(v) = q.pop_front() {
            for &(w, _) in &self.adj[v] {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    /// The rows × cols square grid; vertex (r, c) has index r·cols + c.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut g = Self::new(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    g.add_edge(v, v + 1).unwrap();
                }
                if r + 1 < rows {
                    g.add_edge(v, v + cols).unwrap();
                }
            }
        }
        g
    }

    /// The cycle on n vertices.
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n).unwrap();
        }
        g
    }

    /// The path 0 − 1 − … − (n−1).
    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i).unwrap();
        }
        g
    }

    /// Adds an absorbing vertex joined once to every listed boundary vertex
    /// (twice for corners listed twice); returns its index.
    pub fn attach_super_vertex(&mut self, boundary: &[usize]) -> usize {
        let s = self.add_vertex();
        for &b in boundary {
            self.add_edge(s, b).unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_count_twice() {
        let g = Graph::from_edges(2, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(1), 1);
        assert!(g.is_connected());
    }

    #[test]
    fn grid_shape() {
        let g = Graph::grid(3, 4);
        assert_eq!(g.n_vertices(), 12);
        assert_eq!(g.n_edges(), 3 * 3 + 2 * 4);
        assert_eq!(g.bfs_distances(0)[11], 5);
    }
}
