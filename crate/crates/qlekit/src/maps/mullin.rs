//! The Mullin bijection between walks in the quadrant and rooted planar maps
//! decorated by a spanning tree.
//!
//! Reading the walk along the contour of the tree: an x-step up creates a child
//! joined by a tree edge and moves to it, an x-step down returns to the parent,
//! a y-step up opens a non-tree edge at the current corner and a y-step down
//! closes the most recently opened one there. Edge e owns darts 2e and 2e+1.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::counting::rooted_map_code;
use crate::error::{invalid, Result};
use crate::growth::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    /// (+1, 0)
    XP,
    /// (−1, 0)
    XM,
    /// (0, +1)
    YP,
    /// (0, −1)
    YM,
}

/// A walk of length 2n in the closed quadrant from the origin to itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MullinWalk {
    pub steps: Vec<Step>,
}

impl MullinWalk {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let w = Self { steps };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        let (mut x, mut y) = (0i64, 0i64);
        for s in &self.steps {
            match s {
                Step::XP => x += 1,
                Step::XM => x -= 1,
                Step::YP => y += 1,
                Step::YM => y -= 1,
            }
            if x < 0 || y < 0 {
                return invalid("walk leaves the quadrant");
            }
        }
        if x != 0 || y != 0 {
            return invalid("walk does not return to the origin");
        }
        Ok(())
    }

    /// Number of map edges.
    pub fn n(&self) -> usize {
        self.steps.len() / 2
    }
}

/// Rooted planar map with a distinguished spanning tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoratedMap {
    pub n_vertices: usize,
    /// Vertex of each dart.
    pub vertex: Vec<usize>,
    /// Counterclockwise successor of each dart around its vertex.
    pub next: Vec<usize>,
    /// Tree flag per edge.
    pub tree: Vec<bool>,
    /// Root dart; `None` only for the single-vertex map without edges.
    pub root: Option<usize>,
    /// Root vertex.
    pub root_vertex: usize,
}

impl DecoratedMap {
    pub fn n_edges(&self) -> usize {
        self.tree.len()
    }

    pub fn twin(d: usize) -> usize {
        d ^ 1
    }

    /// Faces as orbits of d ↦ next(twin(d)).
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.next.len()];
        let mut faces = Vec::new();
        for s in 0..self.next.len() {
            if seen[s] {
                continue;
            }
            let mut f = Vec::new();
            let mut d = s;
            while !seen[d] {
                seen[d] = true;
                f.push(d);
                d = self.next[Self::twin(d)];
            }
            faces.push(f);
        }
        faces
    }

    pub fn n_faces(&self) -> usize {
        if self.next.is_empty() {
            1
        } else {
            self.faces().len()
        }
    }

    /// The face to the right of the root dart, used as dual root.
    pub fn dual_root(&self) -> Option<usize> {
        let r = self.root?;
        self.faces().iter().position(|f| f.contains(&r))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    /// Underlying multigraph; edge e of the graph is edge e of the map.
    pub fn graph(&self) -> Graph {
        let edges: Vec<(usize, usize)> =
            (0..self.n_edges()).map(|e| (self.vertex[2 * e], self.vertex[2 * e + 1])).collect();
        Graph::from_edges(self.n_vertices, &edges).expect("valid darts")
    }

    /// Rotation of vertex v starting from `start`.
    fn cycle_from(&self, start: usize) -> Vec<usize> {
        let mut out = vec![start];
        let mut d = self.next[start];
        while d != start {
            out.push(d);
            d = self.next[d];
        }
        out
    }

    /// Canonical code of the rooted decorated map (equal iff isomorphic as
    /// rooted maps with tree).
    pub fn code(&self) -> Vec<usize> {
        let Some(root) = self.root else {
            return Vec::new();
        };
        let twin: Vec<usize> = (0..self.next.len()).map(Self::twin).collect();
        let mut code = rooted_map_code(&self.next, &twin, root);
        // Recover the BFS order to append tree flags in canonical order.
        let mut label = vec![usize::MAX; self.next.len()];
        let mut order = vec![root];
        label[root] = 0;
        let mut i = 0;
        while i < order.len() {
            let d = order[i];
            for w in [self.next[d], twin[d]] {
                if label[w] == usize::MAX {
                    label[w] = order.len();
                    order.push(w);
                }
            }
            i += 1;
        }
        code.extend(order.iter().map(|&d| self.tree[d / 2] as usize));
        code
    }
}

/// Decodes a walk into its tree-decorated map.
pub fn mullin(walk: &MullinWalk) -> Result<DecoratedMap> {
    walk.check()?;
    let n = walk.n();
    let mut rot: Vec<Vec<usize>> = vec![Vec::new()];
    let mut vertex = vec![0usize; 2 * n];
    let mut tree = Vec::with_capacity(n);
    let mut parent: Vec<usize> = vec![usize::MAX];
    let mut open: Vec<usize> = Vec::new();
    let mut v = 0usize;
    for s in &walk.steps {
        match s {
            Step::XP => {
                let e = tree.len();
                tree.push(true);
                let w = rot.len();
                rot.push(vec![2 * e + 1]);
                parent.push(v);
                rot[v].push(2 * e);
                vertex[2 * e] = v;
                vertex[2 * e + 1] = w;
                v = w;
            }
            Step::XM => v = parent[v],
            Step::YP => {
                let e = tree.len();
                tree.push(false);
                rot[v].push(2 * e);
                vertex[2 * e] = v;
                open.push(e);
            }
            Step::YM => {
                let e = open.pop().expect("checked walk");
                rot[v].push(2 * e + 1);
                vertex[2 * e + 1] = v;
            }
        }
    }
    let mut next = vec![0usize; 2 * n];
    for r in &rot {
        for (i, &d) in r.iter().enumerate() {
            next[d] = r[(i + 1) % r.len()];
        }
    }
    let root = rot[0].first().copied();
    Ok(DecoratedMap { n_vertices: rot.len(), vertex, next, tree, root, root_vertex: 0 })
}

/// Encodes a tree-decorated map as its walk by following the tree contour from
/// the root corner.
pub fn mullin_inverse(map: &DecoratedMap) -> Result<MullinWalk> {
    let nd = 2 * map.n_edges();
    if map.vertex.len() != nd || map.next.len() != nd {
        return invalid("dart arrays have inconsistent lengths");
    }
    if map.euler_characteristic() != 2 {
        return invalid("rotation system is not planar");
    }
    let Some(root) = map.root else {
        if map.n_vertices != 1 || nd != 0 {
            return invalid("missing root dart");
        }
        return Ok(MullinWalk { steps: Vec::new() });
    };
    if map.vertex[root] != map.root_vertex {
        return invalid("root dart not at root vertex");
    }
    let mut steps = Vec::with_capacity(nd);
    let mut visited = vec![false; map.n_vertices];
    visited[map.root_vertex] = true;
    let mut seen_edge = vec![false; map.n_edges()];
    let mut open: Vec<usize> = Vec::new();
    // (darts of the vertex in contour order, position, is the root)
    let mut frames: Vec<(Vec<usize>, usize)> = vec![(map.cycle_from(root), 0)];
    while let Some((darts, pos)) = frames.last_mut() {
        if *pos == darts.len() {
            frames.pop();
            if !frames.is_empty() {
                steps.push(Step::XM);
            }
            continue;
        }
        let d = darts[*pos];
        *pos += 1;
        let e = d / 2;
        if map.tree[e] {
            if seen_edge[e] {
                return invalid("tree edge reached twice");
            }
            seen_edge[e] = true;
            let t = DecoratedMap::twin(d);
            let w = map.vertex[t];
            if visited[w] {
                return invalid("tree flags contain a cycle");
            }
            visited[w] = true;
            steps.push(Step::XP);
            let child: Vec<usize> = map.cycle_from(t).into_iter().skip(1).collect();
            frames.push((child, 0));
        } else if !seen_edge[e] {
            seen_edge[e] = true;
            open.push(e);
            steps.push(Step::YP);
        } else {
            if open.pop() != Some(e) {
                return invalid("non-tree edges are not nested along the contour");
            }
            steps.push(Step::YM);
        }
    }
    if !visited.iter().all(|&v| v) || !seen_edge.iter().all(|&s| s) {
        return invalid("tree flags do not span the map");
    }
    MullinWalk::new(steps)
}

/// All walks of length 2n.
pub fn all_walks(n: usize) -> Vec<MullinWalk> {
    fn rec(n: usize, x: usize, y: usize, cur: &mut Vec<Step>, out: &mut Vec<MullinWalk>) {
        let left = 2 * n - cur.len();
        if left == 0 {
            out.push(MullinWalk { steps: cur.clone() });
            return;
        }
        if x + y > left {
            return;
        }
        for (s, ok) in [(Step::XP, true), (Step::XM, x > 0), (Step::YP, true), (Step::YM, y > 0)] {
            if !ok {
                continue;
            }
            let (nx, ny) = match s {
                Step::XP => (x + 1, y),
                Step::XM => (x - 1, y),
                Step::YP => (x, y + 1),
                Step::YM => (x, y - 1),
            };
            if nx + ny <= left - 1 {
                cur.push(s);
                rec(n, nx, ny, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, 0, 0, &mut Vec::with_capacity(2 * n), &mut out);
    out
}

fn ln_catalan(k: u64) -> f64 {
    let k = k as f64;
    ln_gamma(2.0 * k + 1.0) - ln_gamma(k + 1.0) - ln_gamma(k + 2.0)
}

/// Uniform Dyck word of semilength k (true = up), by the cycle lemma.
fn dyck<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<bool> {
    let mut s: Vec<bool> = std::iter::repeat(true).take(k).chain(std::iter::repeat(false).take(k + 1)).collect();
    s.shuffle(rng);
    // Rotate to start just after the first minimum of the partial sums.
    let (mut h, mut min, mut arg) = (0i64, 0i64, 0usize);
    for (i, &u) in s.iter().enumerate() {
        h += if u { 1 } else { -1 };
        if h < min {
            min = h;
            arg = i + 1;
        }
    }
    let len = s.len();
    s.rotate_left(arg % len);
    s.pop();
    s
}

/// Uniform walk of length 2n; with `m` given, uniform among walks with exactly
/// m tree edges (m+1 vertices).
pub fn sample_walk<R: Rng + ?Sized>(n: usize, m: Option<usize>, rng: &mut R) -> Result<MullinWalk> {
    let m = match m {
        Some(m) if m > n => return invalid("m exceeds n"),
        Some(m) => m,
        None => {
            let lw: Vec<f64> = (0..=n as u64)
                .map(|j| {
                    let nn = n as u64;
                    ln_gamma(2.0 * nn as f64 + 1.0) - ln_gamma(2.0 * j as f64 + 1.0)
                        - ln_gamma(2.0 * (nn - j) as f64 + 1.0)
                        + ln_catalan(j)
                        + ln_catalan(nn - j)
                })
                .collect();
            let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = lw.iter().map(|l| (l - top).exp()).collect();
            let dist = rand::distributions::WeightedIndex::new(&w).expect("positive weights");
            rng.sample(dist)
        }
    };
    let xs = dyck(m, rng);
    let ys = dyck(n - m, rng);
    let mut is_x: Vec<bool> = std::iter::repeat(true).take(2 * m).chain(std::iter::repeat(false).take(2 * (n - m))).collect();
    is_x.shuffle(rng);
    let (mut i, mut j) = (0, 0);
    let steps = is_x
        .into_iter()
        .map(|x| {
            if x {
                i += 1;
                if xs[i - 1] {
                    Step::XP
                } else {
                    Step::XM
                }
            } else {
                j += 1;
                if ys[j - 1] {
                    Step::YP
                } else {
                    Step::YM
                }
            }
        })
        .collect();
    Ok(MullinWalk { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats::chi_square_p;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn empty_walk_is_a_point() {
        let m = mullin(&MullinWalk { steps: vec![] }).unwrap();
        assert_eq!(m.n_vertices, 1);
        assert_eq!(m.n_edges(), 0);
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(mullin_inverse(&m).unwrap().steps, vec![]);
    }

    #[test]
    fn walk_counts() {
        // Cat(n) Cat(n+1)
        for (n, c) in [(1, 2), (2, 10), (3, 70), (4, 588)] {
            assert_eq!(all_walks(n).len(), c);
        }
    }

    #[test]
    fn round_trip_and_euler() {
        for n in 0..=4 {
            for w in all_walks(n) {
                let m = mullin(&w).unwrap();
                assert_eq!(m.euler_characteristic(), 2, "{:?}", w.steps);
                let xs = w.steps.iter().filter(|s| **s == Step::XP).count();
                assert_eq!(m.tree.iter().filter(|t| **t).count(), xs);
                assert_eq!(m.n_vertices, xs + 1);
                assert!(m.graph().is_connected());
                assert_eq!(mullin_inverse(&m).unwrap(), w);
            }
        }
    }

    #[test]
    fn distinct_walks_give_distinct_maps() {
        for n in 1..=3 {
            let walks = all_walks(n);
            let codes: HashSet<Vec<usize>> = walks.iter().map(|w| mullin(w).unwrap().code()).collect();
            assert_eq!(codes.len(), walks.len());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MullinWalk::new(vec![Step::XM, Step::XP]).is_err());
        assert!(MullinWalk::new(vec![Step::XP]).is_err());
        let mut m = mullin(&MullinWalk::new(vec![Step::XP, Step::YP, Step::XM, Step::YM]).unwrap()).unwrap();
        m.tree[1] = true;
        assert!(mullin_inverse(&m).is_err());
    }

    #[test]
    fn sampler_is_uniform() {
        let n = 3;
        let walks = all_walks(n);
        let idx: HashMap<Vec<Step>, usize> = walks.iter().enumerate().map(|(i, w)| (w.steps.clone(), i)).collect();
        let mut counts = vec![0usize; walks.len()];
        let mut r = rng::from_seed(5);
        for _ in 0..70_000 {
            let w = sample_walk(n, None, &mut r).unwrap();
            counts[idx[&w.steps]] += 1;
        }
        let p = vec![1.0 / walks.len() as f64; walks.len()];
        assert!(chi_square_p(&counts, &p) > 1e-3);
    }

    #[test]
    fn sampler_respects_fixed_m() {
        let mut r = rng::from_seed(6);
        for _ in 0..200 {
            let w = sample_walk(6, Some(2), &mut r).unwrap();
            w.check().unwrap();
            assert_eq!(mullin(&w).unwrap().n_vertices, 3);
        }
    }
}
