//! Uniform spanning trees by Wilson's algorithm and loop-erased random walk.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::growth::Graph;

/// Loop-erased walk as vertices and the edges between consecutive vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Random walk from `start` until it hits `stop`; returns for each visited
/// vertex the edge by which it was last exited. Following these pointers from
/// `start` gives the chronological loop erasure.
fn last_exit<R: Rng + ?Sized>(
    g: &Graph,
    start: usize,
    stop: impl Fn(usize) -> bool,
    exit: &mut [usize],
    rng: &mut R,
) {
    let mut v = start;
    while !stop(v) {
        let (w, e) = g.walk_step(v, rng);
        exit[v] = e;
        v = w;
    }
}

/// Uniform spanning tree rooted at `root`: the parent edge of every vertex
/// (`usize::MAX` at the root).
pub fn wilson_ust<R: Rng + ?Sized>(g: &Graph, root: usize, rng: &mut R) -> Result<Vec<usize>> {
    if root >= g.n_vertices() {
        return invalid("root out of range");
    }
    if !g.is_connected() {
        return invalid("graph is not connected");
    }
    let n = g.n_vertices();
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut parent = vec![usize::MAX; n];
    for s in 0..n {
        if in_tree[s] {
            continue;
        }
        {
            let it = &in_tree;
            last_exit(g, s, |v| it[v], &mut parent, rng);
        }
        let mut v = s;
        while !in_tree[v] {
            in_tree[v] = true;
            v = g.other(parent[v], v);
        }
    }
    Ok(parent)
}

/// Loop erasure of a simple random walk from `a` stopped at `b`.
pub fn lerw<R: Rng + ?Sized>(g: &Graph, a: usize, b: usize, rng: &mut R) -> Result<Path> {
    if a >= g.n_vertices() || b >= g.n_vertices() {
        return invalid("endpoint out of range");
    }
    if g.bfs_distances(a)[b] == usize::MAX {
        return invalid("endpoints are not connected");
    }
    let mut exit = vec![usize::MAX; g.n_vertices()];
    last_exit(g, a, |v| v == b, &mut exit, rng);
    let mut vertices = vec![a];
    let mut edges = Vec::new();
    let mut v = a;
    while v != b {
        let e = exit[v];
        v = g.other(e, v);
        edges.push(e);
        vertices.push(v);
    }
    Ok(Path { vertices, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats::chi_square_p;
    use std::collections::BTreeMap;

    fn tree_key(parent: &[usize]) -> Vec<usize> {
        let mut es: Vec<usize> = parent.iter().copied().filter(|&e| e != usize::MAX).collect();
        es.sort();
        es
    }

    fn freqs(g: &Graph, runs: usize, seed: u64) -> BTreeMap<Vec<usize>, usize> {
        let mut r = rng::from_seed(seed);
        let mut m = BTreeMap::new();
        for _ in 0..runs {
            *m.entry(tree_key(&wilson_ust(g, 0, &mut r).unwrap())).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn triangle_trees_uniform() {
        let runs = 100_000;
        let m = freqs(&Graph::cycle(3), runs, 1);
        assert_eq!(m.len(), 3);
        for c in m.values() {
            assert!((*c as f64 / runs as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn four_cycle_trees_uniform() {
        let m = freqs(&Graph::grid(2, 2), 100_000, 2);
        assert_eq!(m.len(), 4);
        let counts: Vec<usize> = m.values().copied().collect();
        assert!(chi_square_p(&counts, &[0.25; 4]) > 1e-3);
    }

    #[test]
    fn non_symmetric_graph_uniform() {
        // A 4-cycle with a chord has 8 spanning trees.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let m = freqs(&g, 80_000, 3);
        assert_eq!(m.len(), 8);
        let counts: Vec<usize> = m.values().copied().collect();
        assert!(chi_square_p(&counts, &[0.125; 8]) > 1e-3);
    }

    #[test]
    fn lerw_on_path_is_the_path() {
        let g = Graph::path(6);
        let p = lerw(&g, 0, 5, &mut rng::from_seed(4)).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(p.edges, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn lerw_is_simple() {
        let g = Graph::grid(5, 5);
        let mut r = rng::from_seed(8);
        for _ in 0..200 {
            let p = lerw(&g, 0, 24, &mut r).unwrap();
            let mut vs = p.vertices.clone();
            vs.sort();
            vs.dedup();
            assert_eq!(vs.len(), p.vertices.len());
        }
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::new(2);
        assert!(wilson_ust(&g, 0, &mut rng::from_seed(0)).is_err());
        assert!(lerw(&g, 0, 1, &mut rng::from_seed(0)).is_err());
    }
}
