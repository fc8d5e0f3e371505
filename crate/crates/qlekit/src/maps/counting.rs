//! Exact counts of type II triangulations of polygons.
//!
//! φ(n, m) counts rooted triangulations of an (m+2)-gon with n interior
//! vertices, loops forbidden and multiple edges allowed. The closed form is
//! `2^{n+1} (2m+1)! (2m+3n)! / ((m!)² n! (2m+2n+2)!)`.
//!
//! [`enumerate_triangulations`] builds every such triangulation explicitly by
//! recursive root-face decomposition, checks each one structurally, and
//! counts distinct rooted maps. It is the oracle for [`phi`].

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn factorial(k: u64) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// φ(n, m) in exact arithmetic.
pub fn phi(n: u64, m: u64) -> BigUint {
    let num = (BigUint::one() << (n + 1)) * factorial(2 * m + 1) * factorial(2 * m + 3 * n);
    let mf = factorial(m);
    let den = &mf * &mf * factorial(n) * factorial(2 * m + 2 * n + 2);
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// φ(n+1, m)/φ(n, m) as a float, computed from the exact factorial ratio.
pub fn phi_ratio(n: u64, m: u64) -> f64 {
    let k = (2 * m + 3 * n) as f64;
    let s = (2 * m + 2 * n) as f64;
    2.0 * (k + 1.0) * (k + 2.0) * (k + 3.0) / ((n as f64 + 1.0) * (s + 3.0) * (s + 4.0))
}

/// The constant C_m = √3 (2m+1)! (9/4)^m / (4√π (m!)²) of the asymptotic
/// φ(n,m) ∼ C_m (27/2)^n n^{-5/2}. The denominator 4√π follows from Stirling
/// applied to the factorial formula for φ; the often quoted 2√π is off by 2.
pub fn asymptotic_constant(m: u64) -> f64 {
    let mut binom_like = 1.0f64; // (2m+1)!/(m!)²
    for i in 1..=m {
        binom_like *= (m + i) as f64 / i as f64;
    }
    binom_like *= (2 * m + 1) as f64;
    3f64.sqrt() * binom_like * 2.25f64.powi(m as i32) / (4.0 * std::f64::consts::PI.sqrt())
}

/// Event at the root face of a triangulation with a marked target edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum RootEvent {
    /// The target is the root edge.
    Terminate,
    /// The root triangle has an interior third vertex.
    NewVertex,
    /// The third vertex lies on the boundary, splitting off a region with
    /// boundary length m1+2 and n1 interior vertices (the region following the
    /// root edge in boundary order) and its complement; `first` records
    /// whether the target lies in the first region.
    Split { m1: u64, n1: u64, first: bool },
}

/// A half-built region: boundary vertices and edges in order, root edge
/// between `verts[0]` and `verts[1]`, plus the number of interior vertices
/// still to be placed.
#[derive(Clone)]
struct Region {
    verts: Vec<usize>,
    edges: Vec<usize>,
    n: u64,
    tag: u8,
}

/// An explicit triangulation: oriented triangles given as
/// (vertex, outgoing edge) triples.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub n_vertices: usize,
    pub boundary_vertices: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    pub edge_ends: Vec<(usize, usize)>,
    pub faces: Vec<[(usize, usize); 3]>,
    /// Top-level region each edge belongs to: 0 root edge, 1 new-vertex
    /// region or first split region, 2 second split region.
    pub edge_tag: Vec<u8>,
    pub root_event: RootEvent,
}

struct Builder {
    n_vertices: usize,
    edge_ends: Vec<(usize, usize)>,
    edge_tag: Vec<u8>,
    faces: Vec<[(usize, usize); 3]>,
}

impl Builder {
    fn new_edge(&mut self, a: usize, b: usize, tag: u8) -> usize {
        self.edge_ends.push((a, b));
        self.edge_tag.push(tag);
        self.edge_ends.len() - 1
    }
}

fn build_all(
    stack: &mut Vec<Region>,
    b: &mut Builder,
    first: Option<RootEvent>,
    out: &mut Vec<(Builder, RootEvent)>,
) {
    let Some(reg) = stack.pop() else {
        out.push((
            Builder {
                n_vertices: b.n_vertices,
                edge_ends: b.edge_ends.clone(),
                edge_tag: b.edge_tag.clone(),
                faces: b.faces.clone(),
            },
            first.expect("root face decided"),
        ));
        return;
    };
    let l = reg.verts.len();
    let is_top = first.is_none();
    let (v0, v1) = (reg.verts[0], reg.verts[1]);
    let e0 = reg.edges[0];

    if l == 2 && reg.n == 0 {
        // Glued 2-gon: the two edges are identified, nothing to add.
        build_all(stack, b, first, out);
        stack.push(reg);
        return;
    }

    // Interior third vertex.
    if reg.n >= 1 {
        let snapshot = (b.n_vertices, b.edge_ends.len(), b.faces.len());
        let tag = if is_top { 1 } else { reg.tag };
        let x = b.n_vertices;
        b.n_vertices += 1;
        let a = b.new_edge(v1, x, tag);
        let c = b.new_edge(x, v0, tag);
        b.faces.push([(v0, e0), (v1, a), (x, c)]);
        let mut verts = vec![v0, x];
        verts.extend_from_slice(&reg.verts[1..]);
        let mut edges = vec![c, a];
        edges.extend_from_slice(&reg.edges[1..]);
        stack.push(Region { verts, edges, n: reg.n - 1, tag });
        build_all(stack, b, first.or(Some(RootEvent::NewVertex)), out);
        stack.pop();
        b.n_vertices = snapshot.0;
        b.edge_ends.truncate(snapshot.1);
        b.edge_tag.truncate(snapshot.1);
        b.faces.truncate(snapshot.2);
    }

    // Boundary third vertex v_k.
    for k in 2..l {
        for n1 in 0..=reg.n {
            let n2 = reg.n - n1;
            let snapshot = (b.edge_ends.len(), b.faces.len());
            let vk = reg.verts[k];
            let (t1, t2) = if is_top { (1, 2) } else { (reg.tag, reg.tag) };
            // Side v1–vk: glued onto e1 when the first region is an empty 2-gon.
            let c1 = if k == 2 && n1 == 0 { reg.edges[1] } else { b.new_edge(v1, vk, t1) };
            let c2 = if k == l - 1 && n2 == 0 { reg.edges[l - 1] } else { b.new_edge(vk, v0, t2) };
            b.faces.push([(v0, e0), (v1, c1), (vk, c2)]);
            let mut pushed = 0;
            if !(k == 2 && n1 == 0) {
                let mut verts = vec![vk];
                verts.extend_from_slice(&reg.verts[1..k]);
                let mut edges = vec![c1];
                edges.extend_from_slice(&reg.edges[1..k]);
                stack.push(Region { verts, edges, n: n1, tag: t1 });
                pushed += 1;
            }
            if !(k == l - 1 && n2 == 0) {
                let mut verts = vec![v0, vk];
                verts.extend_from_slice(&reg.verts[k + 1..]);
                let mut edges = vec![c2];
                edges.extend_from_slice(&reg.edges[k..]);
                stack.push(Region { verts, edges, n: n2, tag: t2 });
                pushed += 1;
            }
            let ev = RootEvent::Split { m1: (k - 2) as u64, n1, first: true };
            build_all(stack, b, first.or(Some(ev)), out);
            for _ in 0..pushed {
                stack.pop();
            }
            b.edge_ends.truncate(snapshot.0);
            b.edge_tag.truncate(snapshot.0);
            b.faces.truncate(snapshot.1);
        }
    }
    stack.push(reg);
}

/// Builds every rooted type II triangulation of the (m+2)-gon with n interior
/// vertices. Guarded to m + n ≤ 6.
pub fn build_triangulations(m: u64, n: u64) -> Result<Vec<Triangulation>> {
    if m + n > 6 {
        return Err(Error::TooLarge(format!("m + n = {} exceeds 6", m + n)));
    }
    let l = (m + 2) as usize;
    let mut b = Builder { n_vertices: l, edge_ends: Vec::new(), edge_tag: Vec::new(), faces: Vec::new() };
    let verts: Vec<usize> = (0..l).collect();
    let mut edges = Vec::new();
    for i in 0..l {
        let tag = if i == 0 { 0 } else { u8::MAX };
        edges.push(b.new_edge(i, (i + 1) % l, tag));
    }
    if m == 0 && n == 0 {
        // The glued 2-gon: a single edge, no faces.
        return Ok(vec![Triangulation {
            n_vertices: 2,
            boundary_vertices: verts,
            boundary_edges: vec![0],
            edge_ends: vec![(0, 1)],
            faces: vec![],
            edge_tag: vec![0],
            root_event: RootEvent::Terminate,
        }]);
    }
    let mut out = Vec::new();
    let mut stack = vec![Region { verts: verts.clone(), edges: edges.clone(), n, tag: 0 }];
    build_all(&mut stack, &mut b, None, &mut out);
    Ok(out
        .into_iter()
        .map(|(bb, ev)| {
            let mut tags = bb.edge_tag;
            resolve_boundary_tags(&mut tags, &edges, ev);
            Triangulation {
                n_vertices: bb.n_vertices,
                boundary_vertices: verts.clone(),
                boundary_edges: edges.clone(),
                edge_ends: bb.edge_ends,
                faces: bb.faces,
                edge_tag: tags,
                root_event: ev,
            }
        })
        .collect())
}

/// Boundary edges other than the root get the tag of the top-level region
/// they bound, read off from the root-face event.
fn resolve_boundary_tags(tags: &mut [u8], boundary: &[usize], ev: RootEvent) {
    for (i, &e) in boundary.iter().enumerate().skip(1) {
        tags[e] = match ev {
            RootEvent::NewVertex => 1,
            RootEvent::Split { m1, .. } => {
                let k = m1 as usize + 2;
                if i < k {
                    1
                } else {
                    2
                }
            }
            RootEvent::Terminate => unreachable!(),
        };
    }
}

/// Structural validation of a built triangulation.
pub fn validate(t: &Triangulation, m: u64, n: u64) -> Result<()> {
    let bad = |s: String| Err(Error::Numerical(s));
    if t.faces.is_empty() {
        return if m == 0 && n == 0 && t.edge_ends.len() == 1 { Ok(()) } else { bad("empty triangulation".into()) };
    }
    let e_count = t.edge_ends.len() as u64;
    if e_count != 2 * m + 3 * n + 1 {
        return bad(format!("edge count {e_count} != 2m+3n+1"));
    }
    if t.faces.len() as u64 != m + 2 * n {
        return bad("triangle count != m+2n".into());
    }
    if t.n_vertices as u64 != m + 2 + n {
        return bad("vertex count".into());
    }
    // Each edge: no loop; darts (u→v) used exactly once per side.
    let mut uses = vec![Vec::<(usize, usize)>::new(); t.edge_ends.len()];
    for f in &t.faces {
        for i in 0..3 {
            let (u, e) = f[i];
            let v = f[(i + 1) % 3].0;
            let (a, bb) = t.edge_ends[e];
            if !((a == u && bb == v) || (a == v && bb == u)) {
                return bad(format!("face edge {e} does not join {u},{v}"));
            }
            if u == v {
                return bad("loop".into());
            }
            uses[e].push((u, v));
        }
    }
    let lb = t.boundary_edges.len();
    for (i, &e) in t.boundary_edges.iter().enumerate() {
        let u = t.boundary_vertices[i];
        let v = t.boundary_vertices[(i + 1) % lb];
        // Outer face traverses the boundary backwards.
        uses[e].push((v, u));
    }
    for (e, u) in uses.iter().enumerate() {
        if u.len() != 2 || u[0] != (u[1].1, u[1].0) {
            return bad(format!("edge {e} has sides {u:?}"));
        }
    }
    // Euler characteristic of the sphere (triangles + outer face).
    let chi = t.n_vertices as i64 - e_count as i64 + t.faces.len() as i64 + 1;
    if chi != 2 {
        return bad(format!("Euler characteristic {chi}"));
    }
    Ok(())
}

/// Canonical code of the rooted map underlying a triangulation, rooted at the
/// outer side of the root edge.
pub fn canonical_code(t: &Triangulation) -> Vec<usize> {
    if t.faces.is_empty() {
        return Vec::new();
    }
    // Darts: three per triangle plus one per boundary edge on the outer face.
    let mut next = Vec::new();
    let mut key = Vec::new();
    for f in &t.faces {
        let base = next.len();
        for i in 0..3 {
            next.push(base + (i + 1) % 3);
            key.push((f[i].1, f[i].0));
        }
    }
    let lb = t.boundary_edges.len();
    let outer = next.len();
    for i in 0..lb {
        // Outer face order: edge i traversed v_{i+1} → v_i, followed by edge i−1.
        let e = t.boundary_edges[i];
        next.push(outer + (i + lb - 1) % lb);
        key.push((e, t.boundary_vertices[(i + 1) % lb]));
    }
    let mut twin = vec![usize::MAX; next.len()];
    let mut by_edge: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (d, &(e, _)) in key.iter().enumerate() {
        by_edge.entry(e).or_default().push(d);
    }
    for ds in by_edge.values() {
        twin[ds[0]] = ds[1];
        twin[ds[1]] = ds[0];
    }
    rooted_map_code(&next, &twin, outer)
}

/// Canonical code of a connected rooted map given by its face successor and
/// edge involution on darts.
pub fn rooted_map_code(next: &[usize], twin: &[usize], root: usize) -> Vec<usize> {
    let mut label = vec![usize::MAX; next.len()];
    let mut order = vec![root];
    label[root] = 0;
    let mut i = 0;
    while i < order.len() {
        let d = order[i];
        for w in [next[d], twin[d]] {
            if label[w] == usize::MAX {
                label[w] = order.len();
                order.push(w);
            }
        }
        i += 1;
    }
    let mut code = Vec::with_capacity(2 * order.len());
    for &d in &order {
        code.push(label[next[d]]);
        code.push(label[twin[d]]);
    }
    code
}

/// Number of rooted type II triangulations of the (m+2)-gon with n interior
/// vertices, by exhaustive construction.
pub fn enumerate_triangulations(m: u64, n: u64) -> Result<u64> {
    let ts = build_triangulations(m, n)?;
    let mut seen = HashSet::new();
    for t in &ts {
        validate(t, m, n)?;
        if !seen.insert(canonical_code(t)) {
            return Err(Error::Numerical("duplicate triangulation produced".into()));
        }
    }
    Ok(seen.len() as u64)
}

/// Root-face event counts over all (triangulation, target edge) pairs.
pub fn enumerate_root_events(m: u64, n: u64) -> Result<BTreeMap<RootEvent, u64>> {
    let ts = build_triangulations(m, n)?;
    let mut counts = BTreeMap::new();
    for t in &ts {
        for e in 0..t.edge_ends.len() {
            let ev = match (t.edge_tag[e], t.root_event) {
                (0, _) => RootEvent::Terminate,
                (_, RootEvent::NewVertex) => RootEvent::NewVertex,
                (tag, RootEvent::Split { m1, n1, .. }) => RootEvent::Split { m1, n1, first: tag == 1 },
                _ => unreachable!(),
            };
            *counts.entry(ev).or_insert(0u64) += 1;
        }
    }
    Ok(counts)
}

/// φ(n, m) as u64 when it fits.
pub fn phi_u64(n: u64, m: u64) -> Option<u64> {
    phi(n, m).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(phi_u64(0, 0), Some(1));
        assert_eq!(phi_u64(1, 0), Some(1));
        assert_eq!(phi_u64(0, 1), Some(1));
        assert_eq!(phi_u64(0, 2), Some(2));
        // Catalan numbers for triangulations without interior vertices.
        for m in 0..10u64 {
            let cat = (factorial(2 * m) / (factorial(m) * factorial(m + 1))).to_u64().unwrap();
            assert_eq!(phi_u64(0, m), Some(cat));
        }
    }

    #[test]
    fn enumeration_matches_closed_form() {
        for s in 0..=5u64 {
            for m in 0..=s {
                let n = s - m;
                assert_eq!(enumerate_triangulations(m, n).unwrap(), phi_u64(n, m).unwrap(), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn guard() {
        assert!(matches!(enumerate_triangulations(4, 3), Err(Error::TooLarge(_))));
    }

    #[test]
    fn ratio_tends_to_27_over_2() {
        let exact = {
            let a = phi(2001, 0);
            let b = phi(2000, 0);
            let q = num_rational::BigRational::new(a.into(), b.into());
            q.to_f64().unwrap()
        };
        assert!((exact - phi_ratio(2000, 0)).abs() < 1e-9);
        assert!((exact / 13.5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn asymptotic_constant_is_consistent() {
        // φ(n,m) n^{5/2} / (27/2)^n approaches C_m slowly; check within 2% at n = 3000.
        let n = 3000u64;
        for m in 0..3u64 {
            let p = phi(n, m);
            let shift = p.bits().saturating_sub(60);
            let mant = (p >> shift).to_f64().unwrap();
            let ln_p = mant.ln() + shift as f64 * 2f64.ln();
            let est = (ln_p + 2.5 * (n as f64).ln() - n as f64 * 13.5f64.ln()).exp();
            assert!((est / asymptotic_constant(m) - 1.0).abs() < 0.02, "m={m} est={est}");
        }
    }
}
