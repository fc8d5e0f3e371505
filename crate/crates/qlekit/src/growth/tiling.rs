//! Adjacency graph of the leaves of a dyadic square tiling: two squares are
//! joined when they share a boundary segment of positive length.

use std::collections::BTreeSet;

use super::Graph;
use crate::lqg::SquareTiling;

#[derive(Clone, Debug)]
pub struct TilingGraph {
    pub graph: Graph,
    /// Tiling node index of each vertex.
    pub leaves: Vec<usize>,
    /// Vertices whose square touches the outer boundary.
    pub boundary: Vec<usize>,
}

impl TilingGraph {
    /// Vertex whose square contains the site (x, y).
    pub fn vertex_at(&self, tiling: &SquareTiling, x: usize, y: usize) -> Option<usize> {
        self.leaves.iter().position(|&i| {
            let s = &tiling.nodes[i];
            (s.x..s.x + s.size).contains(&x) && (s.y..s.y + s.size).contains(&y)
        })
    }
}

pub fn tiling_graph(tiling: &SquareTiling) -> TilingGraph {
    let n = tiling.nodes[0].size;
    let leaves: Vec<usize> = (0..tiling.nodes.len()).filter(|&i| tiling.nodes[i].children.is_none()).collect();
    // Owner of every site.
    let mut owner = vec![0usize; n * n];
    for (v, &i) in leaves.iter().enumerate() {
        let s = &tiling.nodes[i];
        for y in s.y..s.y + s.size {
            owner[y * n + s.x..y * n + s.x + s.size].fill(v);
        }
    }
    let mut pairs = BTreeSet::new();
    for y in 0..n {
        for x in 0..n {
            let a = owner[y * n + x];
            if x + 1 < n && owner[y * n + x + 1] != a {
                let b = owner[y * n + x + 1];
                pairs.insert((a.min(b), a.max(b)));
            }
            if y + 1 < n && owner[(y + 1) * n + x] != a {
                let b = owner[(y + 1) * n + x];
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut graph = Graph::new(leaves.len());
    for (a, b) in pairs {
        graph.add_edge(a, b).expect("vertices in range");
    }
    let boundary = leaves
        .iter()
        .enumerate()
        .filter(|(_, &i)| {
            let s = &tiling.nodes[i];
            s.x == 0 || s.y == 0 || s.x + s.size == n || s.y + s.size == n
        })
        .map(|(v, _)| v)
        .collect();
    TilingGraph { graph, leaves, boundary }
}
