//! First-passage percolation balls and exact one-step kernels of Eden and
//! exponential FPP growth.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::dbm::{Clock, GrowthCluster, GrowthStep, Status};
use super::Graph;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weights {
    /// I.i.d. exponential edge weights with this rate.
    Exponential(f64),
    /// Every edge has weight 1.
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
    /// All vertices within passage time t.
    Time(f64),
    /// The first k vertices.
    Count(usize),
}

#[derive(PartialEq)]
struct Entry(f64, usize, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // Min-heap on (time, vertex index).
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Ball of the first-passage metric around `seed`, in order of arrival; ties
/// are broken by vertex index.
pub fn fpp_ball<R: Rng + ?Sized>(g: &Graph, seed: usize, weights: Weights, stop: Stop, rng: &mut R) -> Result<GrowthCluster> {
    if seed >= g.n_vertices() {
        return invalid("seed out of range");
    }
    let w: Vec<f64> = match weights {
        Weights::Exponential(rate) => {
            let d = Exp::new(rate).map_err(|_| crate::Error::InvalidArgument("rate must be positive".into()))?;
            (0..g.n_edges()).map(|_| d.sample(rng)).collect()
        }
        Weights::Unit => vec![1.0; g.n_edges()],
    };
    let mut c = GrowthCluster::new(g.n_vertices(), seed, Clock::Fpp);
    c.in_cluster[seed] = false;
    let mut dist = vec![f64::INFINITY; g.n_vertices()];
    let mut via = vec![usize::MAX; g.n_vertices()];
    dist[seed] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, seed, usize::MAX)]);
    let mut step = 0;
    while let Some(Entry(t, v, e)) = heap.pop() {
        if c.in_cluster[v] || t > dist[v] || (t == dist[v] && e != via[v]) {
            continue;
        }
        match stop {
            Stop::Time(limit) if t > limit => break,
            Stop::Count(k) if c.size() - usize::from(!c.in_cluster[seed]) >= k => break,
            _ => {}
        }
        c.in_cluster[v] = true;
        if v != seed {
            c.history.push(GrowthStep { step, edge: e, vertex: v, weight: w[e], clock: t });
            step += 1;
        }
        for &(u, f) in g.neighbors(v) {
            let nt = t + w[f];
            if !c.in_cluster[u] && (nt < dist[u] || (nt == dist[u] && f < via[u])) {
                dist[u] = nt;
                via[u] = f;
                heap.push(Entry(nt, u, f));
            }
        }
    }
    c.status = Status::Completed;
    Ok(c)
}

/// Eden kernel at a cluster: each outside vertex is added with probability
/// (edges joining it to the cluster)/(all cluster-adjacent edges).
pub fn eden_kernel(g: &Graph, cluster: &BTreeSet<usize>) -> BTreeMap<usize, BigRational> {
    let mut count: BTreeMap<usize, i64> = BTreeMap::new();
    let mut total = 0i64;
    for &(a, b) in g.edges() {
        match (cluster.contains(&a), cluster.contains(&b)) {
            (true, false) => {
                *count.entry(b).or_insert(0) += 1;
                total += 1;
            }
            (false, true) => {
                *count.entry(a).or_insert(0) += 1;
                total += 1;
            }
            _ => {}
        }
    }
    count.into_iter().map(|(v, c)| (v, BigRational::new(BigInt::from(c), BigInt::from(total)))).collect()
}

/// Exponential-FPP kernel at a cluster: by memorylessness the residual clocks
/// of the cluster-adjacent edges are i.i.d. Exp(λ), so vertex v wins the race
/// with probability m_v λ / Σ_w m_w λ where m_v is its number of such edges.
/// The rate is a rational number num/den.
pub fn fpp_kernel(g: &Graph, cluster: &BTreeSet<usize>, rate: (i64, i64)) -> BTreeMap<usize, BigRational> {
    let lambda = BigRational::new(BigInt::from(rate.0), BigInt::from(rate.1));
    let mut race: BTreeMap<usize, BigRational> = BTreeMap::new();
    for &v in cluster {
        for &(u, _) in g.neighbors(v) {
            if !cluster.contains(&u) {
                *race.entry(u).or_insert_with(BigRational::zero) += &lambda;
            }
        }
    }
    let total: BigRational = race.values().fold(BigRational::zero(), |a, b| a + b);
    race.into_iter().map(|(v, r)| (v, r / &total)).collect()
}

/// All connected vertex sets containing `seed` that can arise by growth,
/// with at most `max_size` vertices.
pub fn reachable_clusters(g: &Graph, seed: usize, max_size: usize) -> Vec<BTreeSet<usize>> {
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut frontier = vec![BTreeSet::from([seed])];
    while let Some(c) = frontier.pop() {
        if !seen.insert(c.clone()) || c.len() >= max_size {
            continue;
        }
        for &v in &c {
            for &(u, _) in g.neighbors(v) {
                if !c.contains(&u) {
                    let mut d = c.clone();
                    d.insert(u);
                    if !seen.contains(&d) {
                        frontier.push(d);
                    }
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Checks that the Eden and exponential-FPP kernels coincide on every
/// reachable cluster state; returns the number of states compared.
pub fn kernels_agree(g: &Graph, seed: usize) -> Option<usize> {
    let states = reachable_clusters(g, seed, g.n_vertices());
    for s in &states {
        if eden_kernel(g, s) != fpp_kernel(g, s, (3, 2)) {
            return None;
        }
    }
    Some(states.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats::chi_square_p;

    #[test]
    fn k_one_is_seed() {
        let g = Graph::grid(3, 3);
        let c = fpp_ball(&g, 4, Weights::Exponential(1.0), Stop::Count(1), &mut rng::from_seed(0)).unwrap();
        assert!(c.history.is_empty());
        assert_eq!(c.in_cluster.iter().filter(|&&x| x).count(), 1);
    }

    #[test]
    fn unit_weights_give_graph_balls() {
        let g = Graph::grid(7, 7);
        let c = fpp_ball(&g, 24, Weights::Unit, Stop::Time(2.0), &mut rng::from_seed(0)).unwrap();
        let d = g.bfs_distances(24);
        for v in 0..49 {
            assert_eq!(c.in_cluster[v], d[v] <= 2);
        }
        // Arrival order is by distance then index.
        let order: Vec<(usize, usize)> = c.history.iter().map(|s| (d[s.vertex], s.vertex)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn kernels_match_on_small_graphs() {
        let graphs = [
            Graph::cycle(4),
            Graph::grid(2, 4),
            Graph::from_edges(5, &[(0, 1), (0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap(),
            Graph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (2, 6), (1, 1)]).unwrap(),
        ];
        for g in &graphs {
            assert!(kernels_agree(g, 0).unwrap() > 1);
        }
    }

    #[test]
    fn simulated_fpp_follows_kernel_on_four_cycle() {
        // Law of the ordered sequence of added vertices.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut r = rng::from_seed(7);
        let runs = 60_000;
        for _ in 0..runs {
            let c = fpp_ball(&g, 0, Weights::Exponential(1.0), Stop::Count(4), &mut r).unwrap();
            *counts.entry(c.history.iter().map(|s| s.vertex).collect()).or_insert(0) += 1;
        }
        let mut probs = Vec::new();
        let mut obs = Vec::new();
        for (seq, n) in &counts {
            let mut cl = BTreeSet::from([0]);
            let mut p = 1.0;
            for &v in seq {
                let k = eden_kernel(&g, &cl);
                p *= num_traits::ToPrimitive::to_f64(&k[&v]).unwrap();
                cl.insert(v);
            }
            probs.push(p);
            obs.push(*n);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(chi_square_p(&obs, &probs) > 1e-3);
    }
}
