//! Edge-growth DLA against loop-erased random walk on tree-weighted random maps.
//!
//! Maps are drawn from uniform Mullin walks, so a map is chosen with probability
//! proportional to its number of spanning trees. Seed and target are distinct
//! uniform vertices. The LERW runs from seed to target; DLA grows a cluster from
//! the seed, each time running a walk from the target and adding the last edge
//! crossed before the cluster is hit, until the target joins.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mullin::{mullin, sample_walk};
use super::spanning::lerw;
use crate::error::{invalid, Result};
use crate::growth::Graph;
use crate::rng;
use crate::stats::tv_counts;

/// Map ensemble and unzipping depth.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DlaParams {
    /// Map edges.
    pub n: usize,
    /// Tree edges (vertices − 1); `None` mixes over all values.
    pub m: Option<usize>,
    /// Number of unzipped steps for the boundary statistic.
    pub k: usize,
}

/// Boundary statistic of the map unzipped along the first k cluster edges:
/// (edges unzipped, edges with one endpoint on the polygon, chords of it).
pub type UnzipStat = (usize, usize, usize);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DlaStats {
    pub samples: usize,
    pub lerw_edges: BTreeMap<usize, usize>,
    pub dla_edges: BTreeMap<usize, usize>,
    pub lerw_unzip: BTreeMap<UnzipStat, usize>,
    pub dla_unzip: BTreeMap<UnzipStat, usize>,
    pub tv_edges: f64,
    pub tv_unzip: f64,
}

/// DLA cluster edges in order of attachment.
pub fn dla_edges<R: Rng + ?Sized>(g: &Graph, seed: usize, target: usize, rng: &mut R) -> Vec<usize> {
    let mut in_cluster = vec![false; g.n_vertices()];
    in_cluster[seed] = true;
    let mut out = Vec::new();
    while !in_cluster[target] {
        let mut v = target;
        loop {
            let (w, e) = g.walk_step(v, rng);
            if in_cluster[w] {
                in_cluster[v] = true;
                out.push(e);
                break;
            }
            v = w;
        }
    }
    out
}

/// Boundary statistic after unzipping the first k of `cluster` (a tree
/// containing `seed`).
pub fn unzip_stat(g: &Graph, seed: usize, cluster: &[usize], k: usize) -> UnzipStat {
    let k = k.min(cluster.len());
    let mut inside = vec![false; g.n_vertices()];
    let mut used = vec![false; g.n_edges()];
    inside[seed] = true;
    for &e in &cluster[..k] {
        let (a, b) = g.edge(e);
        inside[a] = true;
        inside[b] = true;
        used[e] = true;
    }
    let (mut out, mut chords) = (0, 0);
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if used[e] {
            continue;
        }
        match (inside[a], inside[b]) {
            (true, true) => chords += 1,
            (true, false) | (false, true) => out += 1,
            _ => {}
        }
    }
    (k, out, chords)
}

/// One sample: (LERW edges, DLA edges, LERW unzip stat, DLA unzip stat).
pub fn sample_pair<R: Rng + ?Sized>(p: &DlaParams, rng: &mut R) -> Result<(usize, usize, UnzipStat, UnzipStat)> {
    let map = loop {
        let m = mullin(&sample_walk(p.n, p.m, rng)?)?;
        if m.n_vertices >= 2 {
            break m;
        }
    };
    let g = map.graph();
    let nv = g.n_vertices();
    let seed = rng.gen_range(0..nv);
    let target = (seed + rng.gen_range(1..nv)) % nv;
    let l = lerw(&g, seed, target, rng)?;
    let d = dla_edges(&g, seed, target, rng);
    Ok((
        l.edges.len(),
        d.len(),
        unzip_stat(&g, seed, &l.edges, p.k),
        unzip_stat(&g, seed, &d, p.k),
    ))
}

/// Runs both processes on `samples` independent maps.
pub fn compare_dla_lerw(p: &DlaParams, samples: usize, seed: u64) -> Result<DlaStats> {
    if p.n == 0 || p.m == Some(0) {
        return invalid("maps need at least one tree edge");
    }
    const CHUNK: usize = 1000;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<(usize, usize, UnzipStat, UnzipStat)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).map(|_| sample_pair(p, &mut r)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut s = DlaStats {
        samples,
        lerw_edges: BTreeMap::new(),
        dla_edges: BTreeMap::new(),
        lerw_unzip: BTreeMap::new(),
        dla_unzip: BTreeMap::new(),
        tv_edges: 0.0,
        tv_unzip: 0.0,
    };
    for (le, de, lu, du) in parts.into_iter().flatten() {
        *s.lerw_edges.entry(le).or_insert(0) += 1;
        *s.dla_edges.entry(de).or_insert(0) += 1;
        *s.lerw_unzip.entry(lu).or_insert(0) += 1;
        *s.dla_unzip.entry(du).or_insert(0) += 1;
    }
    s.tv_edges = tv_counts(&s.lerw_edges, &s.dla_edges);
    s.tv_unzip = tv_counts(&s.lerw_unzip, &s.dla_unzip);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_map_takes_one_step() {
        let p = DlaParams { n: 1, m: Some(1), k: 2 };
        let s = compare_dla_lerw(&p, 500, 1).unwrap();
        assert_eq!(s.lerw_edges.keys().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(s.dla_edges.keys().copied().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn dla_cluster_is_a_tree_reaching_target() {
        let g = Graph::grid(4, 4);
        let mut r = rng::from_seed(2);
        for _ in 0..100 {
            let d = dla_edges(&g, 0, 15, &mut r);
            let mut seen = vec![false; 16];
            seen[0] = true;
            for &e in &d {
                let (a, b) = g.edge(e);
                assert!(seen[a] ^ seen[b]);
                seen[a] = true;
                seen[b] = true;
            }
            assert!(seen[15]);
        }
    }

    #[test]
    fn edge_laws_agree_on_small_maps() {
        let s = compare_dla_lerw(&DlaParams { n: 5, m: None, k: 2 }, 40_000, 9).unwrap();
        assert!(s.tv_edges < 0.02, "{}", s.tv_edges);
        assert!(s.tv_unzip < 0.03, "{}", s.tv_unzip);
    }
}
