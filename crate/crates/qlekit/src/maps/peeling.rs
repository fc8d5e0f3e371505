//! Peeling exploration of a uniformly random triangulation of a polygon with a
//! uniformly placed target edge.
//!
//! The state is (m, n): the unexplored region is an (m+2)-gon with n interior
//! vertices, and it contains the target. A region with these parameters has
//! E = 2m + 3n + 1 edges, and the target is uniform among them. Revealing the
//! face on the seed edge gives:
//!
//! * the target itself, with probability 1/E;
//! * a triangle with a new interior vertex, weight φ(n−1, m+1)(E−1)/(φ(n,m)E);
//! * a triangle whose third vertex is on the boundary, splitting the region into
//!   (m1, n1) and (m2, n2) with m1+m2 = m−1, n1+n2 = n; the target lies in
//!   region i with weight φ(n1,m1)φ(n2,m2)E_i/(φ(n,m)E).
//!
//! Both the percolation interface and the Eden exploration induce this same
//! (m, n) kernel; they differ only in where the next seed edge sits.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::counting::{phi, RootEvent};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Exploration rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Percolation,
    Eden,
}

/// Orientation of a new-vertex step in the percolation exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// One exploration step: the revealed triangle plus any bubble that was cut
/// off, glued onto the remaining region at `offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Necklace {
    pub event: RootEvent,
    pub side: Option<Side>,
    /// (m, n) of the region not containing the target, if any.
    pub bubble: Option<(u64, u64)>,
    /// Triangles in the revealed triangle and its bubble.
    pub triangles: u64,
    /// Boundary length of the region left to explore.
    pub boundary_len: u64,
    /// Position of the next seed edge on that boundary.
    pub offset: u64,
}

/// Peeling state and its necklace log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeelingState {
    pub m: u64,
    pub n: u64,
    pub steps: u64,
    pub terminated: bool,
    pub log: Vec<Necklace>,
}

impl PeelingState {
    pub fn new(m: u64, n: u64) -> Self {
        Self { m, n, steps: 0, terminated: false, log: Vec::new() }
    }
}

fn rat(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Number of edges of a region with parameters (m, n).
pub fn edge_count(m: u64, n: u64) -> u64 {
    2 * m + 3 * n + 1
}

/// Exact transition row at (m, n).
pub fn kernel_row(m: u64, n: u64) -> Vec<(RootEvent, BigRational)> {
    let e = edge_count(m, n);
    let total = BigInt::from(phi(n, m)) * BigInt::from(e);
    let mut row = vec![(RootEvent::Terminate, rat(1, e))];
    if n >= 1 {
        let w = BigInt::from(phi(n - 1, m + 1)) * BigInt::from(e - 1);
        row.push((RootEvent::NewVertex, BigRational::new(w, total.clone())));
    }
    if m >= 1 {
        for m1 in 0..m {
            let m2 = m - 1 - m1;
            for n1 in 0..=n {
                let n2 = n - n1;
                let w = BigInt::from(phi(n1, m1) * phi(n2, m2));
                for (first, ei) in [(true, edge_count(m1, n1)), (false, edge_count(m2, n2))] {
                    let p = BigRational::new(&w * BigInt::from(ei), total.clone());
                    row.push((RootEvent::Split { m1, n1, first }, p));
                }
            }
        }
    }
    row
}

/// The row obtained with the edge count m + 2 + 3n in place of 2m + 3n + 1
/// (kept to document that it does not normalize).
pub fn kernel_row_with_edge_count(m: u64, n: u64, edges: impl Fn(u64, u64) -> u64) -> Vec<(RootEvent, BigRational)> {
    let e = edges(m, n);
    let p = BigRational::from(BigInt::from(phi(n, m)));
    let cont = BigRational::one() - rat(1, e);
    let mut row = vec![(RootEvent::Terminate, rat(1, e))];
    if n >= 1 {
        let w = BigRational::from(BigInt::from(phi(n - 1, m + 1))) / &p;
        row.push((RootEvent::NewVertex, &cont * w));
    }
    if m >= 1 {
        for m1 in 0..m {
            let m2 = m - 1 - m1;
            for n1 in 0..=n {
                let n2 = n - n1;
                let w = BigRational::from(BigInt::from(phi(n1, m1) * phi(n2, m2))) / &p;
                for (first, ei) in [(true, edges(m1, n1)), (false, edges(m2, n2))] {
                    let region = rat(ei, e - 1);
                    row.push((RootEvent::Split { m1, n1, first }, &cont * &w * region));
                }
            }
        }
    }
    row
}

/// Sum of a row.
pub fn row_sum(row: &[(RootEvent, BigRational)]) -> BigRational {
    row.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p)
}

/// The (m, n) state reached after an event from (m, n).
pub fn next_state(m: u64, n: u64, ev: RootEvent) -> Option<(u64, u64)> {
    match ev {
        RootEvent::Terminate => None,
        RootEvent::NewVertex => Some((m + 1, n - 1)),
        RootEvent::Split { m1, n1, first: true } => Some((m1, n1)),
        RootEvent::Split { m1, n1, first: false } => Some((m - 1 - m1, n - n1)),
    }
}

/// Kernel rows for every state with m + n ≤ `max_sum`, computed once and
/// shared by both exploration modes.
#[derive(Clone, Debug)]
pub struct KernelTable {
    max_sum: u64,
    rows: HashMap<(u64, u64), Vec<(RootEvent, BigRational)>>,
    cdf: HashMap<(u64, u64), Vec<(RootEvent, f64)>>,
}

impl KernelTable {
    pub fn new(max_sum: u64) -> Self {
        let mut rows = HashMap::new();
        let mut cdf = HashMap::new();
        for s in 0..=max_sum {
            for m in 0..=s {
                let n = s - m;
                let row = kernel_row(m, n);
                let mut acc = BigRational::zero();
                let c: Vec<(RootEvent, f64)> = row
                    .iter()
                    .map(|(ev, p)| {
                        acc += p;
                        (*ev, acc.to_f64().unwrap())
                    })
                    .collect();
                cdf.insert((m, n), c);
                rows.insert((m, n), row);
            }
        }
        Self { max_sum, rows, cdf }
    }

    pub fn max_sum(&self) -> u64 {
        self.max_sum
    }

    pub fn row(&self, m: u64, n: u64) -> Option<&[(RootEvent, BigRational)]> {
        self.rows.get(&(m, n)).map(|r| r.as_slice())
    }

    /// Law of the next (m, n) state (None = terminated) under `mode`.
    pub fn state_law(&self, m: u64, n: u64, _mode: Mode) -> BTreeMap<Option<(u64, u64)>, BigRational> {
        let mut law = BTreeMap::new();
        for (ev, p) in self.row(m, n).expect("state in table") {
            *law.entry(next_state(m, n, *ev)).or_insert_with(BigRational::zero) += p;
        }
        law
    }

    /// Draws an event at (m, n).
    pub fn sample<R: Rng + ?Sized>(&self, m: u64, n: u64, rng: &mut R) -> RootEvent {
        let c = &self.cdf[&(m, n)];
        let u: f64 = rng.gen::<f64>() * c.last().unwrap().1;
        c.iter().find(|(_, x)| u < *x).unwrap_or(c.last().unwrap()).0
    }
}

/// One peeling step.
pub fn peel_step<R: Rng + ?Sized>(
    table: &KernelTable,
    state: &PeelingState,
    mode: Mode,
    rng: &mut R,
) -> Result<PeelingState> {
    if state.terminated {
        return Err(Error::Terminal);
    }
    if state.m + state.n > table.max_sum() {
        return invalid("state outside kernel table");
    }
    let (m, n) = (state.m, state.n);
    let ev = table.sample(m, n, rng);
    let mut next = state.clone();
    next.steps += 1;
    let Some((m2, n2)) = next_state(m, n, ev) else {
        next.terminated = true;
        return Ok(next);
    };
    let bubble = match ev {
        RootEvent::Split { m1, n1, first } => Some(if first { (m - 1 - m1, n - n1) } else { (m1, n1) }),
        _ => None,
    };
    let triangles = 1 + bubble.map_or(0, |(bm, bn)| bm + 2 * bn);
    let boundary_len = m2 + 2;
    let (side, offset) = match mode {
        Mode::Percolation => match ev {
            RootEvent::NewVertex => {
                if rng.gen::<bool>() {
                    (Some(Side::Left), 0)
                } else {
                    (Some(Side::Right), 1)
                }
            }
            _ => (None, 0),
        },
        Mode::Eden => (None, rng.gen_range(0..boundary_len)),
    };
    next.m = m2;
    next.n = n2;
    next.log.push(Necklace { event: ev, side, bubble, triangles, boundary_len, offset });
    Ok(next)
}

/// Result of a full exploration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub path: Vec<(u64, u64)>,
    pub log: Vec<Necklace>,
}

impl Exploration {
    /// Triangles observed before the target is reached.
    pub fn triangles(&self) -> u64 {
        self.log.iter().map(|k| k.triangles).sum()
    }
}

/// Runs the exploration from (m0, n0) until the target is reached.
pub fn explore_until_target<R: Rng + ?Sized>(
    table: &KernelTable,
    m0: u64,
    n0: u64,
    mode: Mode,
    rng: &mut R,
) -> Result<Exploration> {
    let mut s = PeelingState::new(m0, n0);
    let mut path = vec![(m0, n0)];
    while !s.terminated {
        s = peel_step(table, &s, mode, rng)?;
        if !s.terminated {
            path.push((s.m, s.n));
        }
    }
    Ok(Exploration { path, log: s.log })
}

/// Convenience wrapper with its own table and seed.
pub fn explore_seeded(m0: u64, n0: u64, mode: Mode, seed: u64) -> Result<Exploration> {
    let table = KernelTable::new(m0 + n0);
    explore_until_target(&table, m0, n0, mode, &mut rng::from_seed(seed))
}

/// Re-glues every necklace at an independent uniform offset.
pub fn reshuffle_necklaces<R: Rng + ?Sized>(log: &[Necklace], rng: &mut R) -> Vec<Necklace> {
    log.iter()
        .map(|k| Necklace { offset: rng.gen_range(0..k.boundary_len), ..k.clone() })
        .collect()
}
