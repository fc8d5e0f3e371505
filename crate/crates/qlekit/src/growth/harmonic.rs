//! Harmonic measure of a cluster seen from a target vertex.
//!
//! The walk from the target enters the cluster through the edge (u, c) with
//! probability G(t, u)/deg(u), where G is the Green's function of the walk
//! killed on the cluster. By reversibility this is proportional to
//! φ(u) = P_u[hit t before the cluster], the solution of the Dirichlet problem
//! with φ = 1 at t and 0 on the cluster.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::Graph;
use crate::error::{invalid, Error, Result};

/// Free endpoint and probability of every edge joining the cluster to a
/// vertex reachable from the target, sorted by edge index.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicMeasure {
    pub edges: Vec<usize>,
    pub probs: Vec<f64>,
}

impl HarmonicMeasure {
    pub fn prob(&self, e: usize) -> f64 {
        self.edges.iter().position(|&x| x == e).map_or(0.0, |i| self.probs[i])
    }
}

/// Edges with exactly one endpoint in the cluster.
pub fn boundary_edges(g: &Graph, cluster: &[bool]) -> Vec<usize> {
    (0..g.n_edges())
        .filter(|&e| {
            let (a, b) = g.edge(e);
            cluster[a] != cluster[b]
        })
        .collect()
}

fn check(g: &Graph, cluster: &[bool], target: usize) -> Result<()> {
    if cluster.len() != g.n_vertices() || target >= g.n_vertices() {
        return invalid("cluster flags or target do not match the graph");
    }
    if cluster[target] {
        return invalid("target lies in the cluster");
    }
    if !cluster.iter().any(|&c| c) {
        return invalid("empty cluster");
    }
    Ok(())
}

const DENSE_LIMIT: usize = 2000;

/// Solves A x = b for the symmetric positive definite reduced Laplacian by
/// conjugate gradients (used above the dense size limit).
fn conjugate_gradient(apply: impl Fn(&[f64], &mut [f64]), b: &[f64], diag: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..10 * n + 100 {
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-14 * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numerical("conjugate gradients did not converge".into()))
}

/// Exact harmonic measure from `target`.
pub fn harmonic_measure_exact(g: &Graph, cluster: &[bool], target: usize) -> Result<HarmonicMeasure> {
    check(g, cluster, target)?;
    // Free vertices reachable from the target without entering the cluster.
    let n = g.n_vertices();
    let mut idx = vec![usize::MAX; n];
    let mut order = vec![target];
    idx[target] = 0;
    let mut q = VecDeque::from([target]);
    while let Some(v) = q.pop_front() {
        for &(w, _) in g.neighbors(v) {
            if !cluster[w] && idx[w] == usize::MAX {
                idx[w] = order.len();
                order.push(w);
                q.push_back(w);
            }
        }
    }
    let bedges: Vec<usize> = boundary_edges(g, cluster)
        .into_iter()
        .filter(|&e| {
            let (a, b) = g.edge(e);
            idx[a] != usize::MAX || idx[b] != usize::MAX
        })
        .collect();
    if bedges.is_empty() {
        return Err(Error::DegenerateDomain("target is cut off from the cluster".into()));
    }
    // Unknowns: order[1..]; φ(target) = 1.
    let m = order.len() - 1;
    let mut phi = vec![1.0; order.len()];
    if m > 0 {
        let mut rhs = vec![0.0; m];
        let diag: Vec<f64> = order[1..].iter().map(|&v| g.degree(v) as f64).collect();
        for (i, &v) in order[1..].iter().enumerate() {
            rhs[i] = g.neighbors(v).iter().filter(|&&(w, _)| w == target).count() as f64;
        }
        let x = if m <= DENSE_LIMIT {
            let mut a = DMatrix::zeros(m, m);
            for (i, &v) in order[1..].iter().enumerate() {
                a[(i, i)] += diag[i];
                for &(w, _) in g.neighbors(v) {
                    let j = idx[w];
                    if j != usize::MAX && j > 0 {
                        a[(i, j - 1)] -= 1.0;
                    }
                }
            }
            let sol = a
                .lu()
                .solve(&DVector::from_vec(rhs))
                .ok_or_else(|| Error::Numerical("singular Dirichlet system".into()))?;
            sol.iter().copied().collect::<Vec<f64>>()
        } else {
            let apply = |p: &[f64], out: &mut [f64]| {
                for (i, &v) in order[1..].iter().enumerate() {
                    let mut s = diag[i] * p[i];
                    for &(w, _) in g.neighbors(v) {
                        let j = idx[w];
                        if j != usize::MAX && j > 0 {
                            s -= p[j - 1];
                        }
                    }
                    out[i] = s;
                }
            };
            conjugate_gradient(apply, &rhs, &diag)?
        };
        phi[1..].copy_from_slice(&x);
    }
    let weights: Vec<f64> = bedges
        .iter()
        .map(|&e| {
            let (a, b) = g.edge(e);
            let u = if cluster[a] { b } else { a };
            phi[idx[u]].max(0.0)
        })
        .collect();
    let s: f64 = weights.iter().sum();
    Ok(HarmonicMeasure { edges: bedges, probs: weights.iter().map(|w| w / s).collect() })
}

/// First cluster-entering edge of a simple random walk from `target`.
pub fn harmonic_measure_walk<R: Rng + ?Sized>(g: &Graph, cluster: &[bool], target: usize, rng: &mut R) -> Result<usize> {
    check(g, cluster, target)?;
    if !reaches_cluster(g, cluster, target) {
        return Err(Error::DegenerateDomain("target is cut off from the cluster".into()));
    }
    let mut v = target;
    loop {
        let (w, e) = g.walk_step(v, rng);
        if cluster[w] {
            return Ok(e);
        }
        v = w;
    }
}

/// Whether a walk from `target` can reach the cluster.
pub fn reaches_cluster(g: &Graph, cluster: &[bool], target: usize) -> bool {
    let mut seen = vec![false; g.n_vertices()];
    seen[target] = true;
    let mut stack = vec![target];
    while let Some(v) = stack.pop() {
        for &(w, _) in g.neighbors(v) {
            if cluster[w] {
                return true;
            }
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Total variation between the exact harmonic measure and the empirical law
/// of `walks` walk samples (parallel over fixed chunks of seeded streams).
pub fn walk_vs_exact_tv(g: &Graph, cluster: &[bool], target: usize, walks: usize, seed: u64) -> Result<f64> {
    use rayon::prelude::*;
    let h = harmonic_measure_exact(g, cluster, target)?;
    const CHUNKS: usize = 100;
    let counts: Vec<Vec<usize>> = (0..CHUNKS)
        .into_par_iter()
        .map(|k| {
            let mut r = crate::rng::stream(seed, k as u64);
            let mut cnt = vec![0usize; h.edges.len()];
            let len = walks / CHUNKS + usize::from(k < walks % CHUNKS);
            for _ in 0..len {
                let e = harmonic_measure_walk(g, cluster, target, &mut r)?;
                let i = h.edges.binary_search(&e).map_err(|_| Error::Numerical("walk hit an unreachable edge".into()))?;
                cnt[i] += 1;
            }
            Ok(cnt)
        })
        .collect::<Result<_>>()?;
    let freq: Vec<f64> = (0..h.edges.len())
        .map(|i| counts.iter().map(|c| c[i]).sum::<usize>() as f64 / walks as f64)
        .collect();
    Ok(crate::stats::tv(&h.probs, &freq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(n: usize, on: &[usize]) -> Vec<bool> {
        let mut f = vec![false; n];
        for &v in on {
            f[v] = true;
        }
        f
    }

    #[test]
    fn single_boundary_edge() {
        let g = Graph::path(4);
        let h = harmonic_measure_exact(&g, &flags(4, &[0]), 3).unwrap();
        assert_eq!(h.edges, vec![0]);
        assert_eq!(h.probs, vec![1.0]);
    }

    #[test]
    fn four_cycle_symmetry() {
        let g = Graph::cycle(4);
        let h = harmonic_measure_exact(&g, &flags(4, &[0]), 2).unwrap();
        assert_eq!(h.edges.len(), 2);
        for p in &h.probs {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sums_to_one_and_nonnegative() {
        let g = Graph::grid(6, 6);
        let h = harmonic_measure_exact(&g, &flags(36, &[14, 15, 21]), 35).unwrap();
        assert!((h.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(h.probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn degenerate_domain() {
        let g = Graph::path(5);
        let c = flags(5, &[0, 2]);
        assert!(harmonic_measure_exact(&g, &c, 1).is_ok());
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(harmonic_measure_exact(&g, &flags(4, &[0]), 3), Err(Error::DegenerateDomain(_))));
    }

    #[test]
    fn conjugate_gradient_agrees_with_dense() {
        let g = Graph::grid(50, 50);
        let c = flags(2500, &[1275]);
        let h = harmonic_measure_exact(&g, &c, 0).unwrap();
        let g2 = Graph::grid(30, 30);
        let h2 = harmonic_measure_exact(&g2, &flags(900, &[465]), 0).unwrap();
        assert!((h.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((h2.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        // Symmetric configuration on the big grid: reflect across the diagonal.
        let p = |e: usize| h.prob(e);
        let up = g.neighbors(1275).iter().find(|x| x.0 == 1225).unwrap().1;
        let left = g.neighbors(1275).iter().find(|x| x.0 == 1274).unwrap().1;
        assert!((p(up) - p(left)).abs() < 1e-10);
    }

    #[test]
    fn walk_matches_exact_on_5x5() {
        let g = Graph::grid(5, 5);
        assert!(walk_vs_exact_tv(&g, &flags(25, &[12]), 0, 1_000_000, 3).unwrap() < 0.01);
    }
}
