//! η-dielectric-breakdown growth: at each step a cluster-adjacent edge e is
//! added with probability proportional to b(e)^η, where b is the harmonic
//! measure seen from the target. η = 0 is the Eden model and η = 1 is DLA.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::harmonic::{boundary_edges, harmonic_measure_exact, harmonic_measure_walk};
use super::Graph;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clock {
    /// One unit per added edge.
    Steps,
    /// Proposals ∝ b^{2+η}, each accepted with probability (b_min/b)², one
    /// unit per proposal.
    Capacity,
    /// First-passage time (set by the FPP driver).
    Fpp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sampler {
    /// Weights from the Dirichlet solve.
    Exact,
    /// One random walk per step; only used for η = 1 with the step clock,
    /// other cases fall back to exact weights.
    Walk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Completed,
    ReachedTarget,
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub step: usize,
    pub edge: usize,
    pub vertex: usize,
    /// Selection probability of the edge (NaN when drawn by a walk).
    pub weight: f64,
    pub clock: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCluster {
    pub seed: usize,
    pub in_cluster: Vec<bool>,
    pub history: Vec<GrowthStep>,
    pub clock: Clock,
    pub status: Status,
}

impl GrowthCluster {
    pub fn new(n: usize, seed: usize, clock: Clock) -> Self {
        let mut in_cluster = vec![false; n];
        in_cluster[seed] = true;
        Self { seed, in_cluster, history: Vec::new(), clock, status: Status::Completed }
    }

    pub fn size(&self) -> usize {
        self.history.len() + 1
    }

    /// Every added edge joins the new vertex to the earlier cluster.
    pub fn is_consistent(&self, g: &Graph) -> bool {
        let mut inside = vec![false; g.n_vertices()];
        inside[self.seed] = true;
        for s in &self.history {
            let (a, b) = g.edge(s.edge);
            let other = if a == s.vertex { b } else { a };
            if inside[s.vertex] || !inside[other] || (a != s.vertex && b != s.vertex) {
                return false;
            }
            inside[s.vertex] = true;
        }
        inside == self.in_cluster
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbmParams {
    pub eta: f64,
    pub steps: usize,
    pub clock: Clock,
    pub sampler: Sampler,
}

/// Selection law over cluster-adjacent edges for the current cluster.
pub fn selection_law(g: &Graph, cluster: &[bool], target: usize, eta: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    if eta == 0.0 {
        let e = boundary_edges(g, cluster);
        let p = vec![1.0 / e.len() as f64; e.len()];
        return Ok((e, p));
    }
    let h = harmonic_measure_exact(g, cluster, target)?;
    let w: Vec<f64> = h.probs.iter().map(|b| if *b > 0.0 { b.powf(eta) } else { 0.0 }).collect();
    let s: f64 = w.iter().sum();
    Ok((h.edges, w.iter().map(|x| x / s).collect()))
}

/// Grows a cluster from `seed` for at most `params.steps` additions, stopping
/// early if the target is absorbed or no edge can be added.
pub fn grow_dbm<R: Rng + ?Sized>(g: &Graph, seed: usize, target: usize, params: &DbmParams, rng: &mut R) -> Result<GrowthCluster> {
    if seed >= g.n_vertices() || target >= g.n_vertices() || seed == target {
        return invalid("seed and target must be distinct vertices");
    }
    if !(params.eta >= 0.0) {
        return invalid("eta must be nonnegative");
    }
    if params.clock == Clock::Fpp {
        return invalid("the FPP clock is produced by fpp_ball");
    }
    let mut c = GrowthCluster::new(g.n_vertices(), seed, params.clock);
    let use_walk = params.sampler == Sampler::Walk && params.eta == 1.0 && params.clock == Clock::Steps;
    let mut clock = 0.0;
    for step in 0..params.steps {
        let (edge, weight) = if use_walk {
            if !super::harmonic::reaches_cluster(g, &c.in_cluster, target) {
                c.status = Status::Exhausted;
                return Ok(c);
            }
            (harmonic_measure_walk(g, &c.in_cluster, target, rng)?, f64::NAN)
        } else {
            let (edges, probs) = match selection_law(g, &c.in_cluster, target, params.eta) {
                Ok(x) if !x.0.is_empty() => x,
                Ok(_) | Err(crate::Error::DegenerateDomain(_)) => {
                    c.status = Status::Exhausted;
                    return Ok(c);
                }
                Err(e) => return Err(e),
            };
            match params.clock {
                Clock::Capacity => {
                    // b from the η = 1 law; proposals ∝ b^{2+η}.
                    let b = if params.eta == 1.0 { probs.clone() } else { selection_law(g, &c.in_cluster, target, 1.0)?.1 };
                    let prop: Vec<f64> = b.iter().map(|x| x.powf(2.0 + params.eta)).collect();
                    let bmin = b.iter().cloned().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
                    let dist = WeightedIndex::new(&prop).map_err(|e| crate::Error::Numerical(e.to_string()))?;
                    loop {
                        let i = dist.sample(rng);
                        clock += 1.0;
                        if rng.gen::<f64>() < (bmin / b[i]).powi(2) {
                            break (edges[i], probs[i]);
                        }
                    }
                }
                _ => {
                    let dist = WeightedIndex::new(&probs).map_err(|e| crate::Error::Numerical(e.to_string()))?;
                    let i = dist.sample(rng);
                    (edges[i], probs[i])
                }
            }
        };
        if params.clock == Clock::Steps {
            clock += 1.0;
        }
        let (a, b) = g.edge(edge);
        let vertex = if c.in_cluster[a] { b } else { a };
        c.in_cluster[vertex] = true;
        c.history.push(GrowthStep { step, edge, vertex, weight, clock });
        if vertex == target {
            c.status = Status::ReachedTarget;
            return Ok(c);
        }
    }
    Ok(c)
}
