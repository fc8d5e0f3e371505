//! The δ-approximation chain for QLE(γ², η) and the drift of its harmonic
//! component.
//!
//! A state keeps the harmonic component 𝔥 as Re P + (2/√κ) log|· − s| with
//! P a power series of degree N and s the boundary point carrying the seed
//! singularity. The −(κ+6)/(2√κ) log|·| term at the origin has boundary
//! values zero, so it never enters 𝔥; it is recorded in `origin` only.
//!
//! One block samples a seed U from exp(−𝔥/√κ), runs the reverse flow f
//! driven by V_t = U e^{i√κ B_{δ−t}}, and replaces 𝔥 by
//!
//!   𝔥∘f − (κ+6)/(2√κ) log|f(z)/z| + Q log|f'| − δ/√κ + ∫ Re G_s dB'_s,
//!
//! G_s = 2w/(1 − w), w = f_s/V_s, with B' independent of B. The three
//! deterministic terms integrate the drift D̃ along the block exactly, so the
//! update is carried out on power series: coefficients up to degree N only
//! depend on coefficients up to degree N because f(0) = 0.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::field::harmonic::{sample_harmonic_fbgff, HarmonicDiskField};
use crate::loewner::{hull_boundary, phi, solve_forward, DrivingMeasure, SolverOptions};
use crate::lqg::{boundary_measure_truncated, sample_circle, CircleMeasure};
use crate::sle::{poisson_kernels, q_of_kappa};
use crate::{rng, C64};

/// Grid resolution of the seed law.
pub const SEED_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QleState {
    /// Series part of degree N plus the seed singularity (2/√κ) at `tip`.
    pub field: HarmonicDiskField,
    /// Strength of the log singularity at the origin of the full field.
    pub origin: f64,
    pub tip: C64,
    /// Angle of the most recent driving atom (the initial seed before any
    /// block has run).
    pub atom: f64,
    pub t: f64,
    pub kappa: f64,
    pub block: usize,
}

impl QleState {
    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// 𝔥(z).
    pub fn value(&self, z: C64) -> Result<f64> {
        self.field.value(z)
    }

    /// ν^N: the seed law exp(α_κ 𝔥^N(u)) du on the standard grid.
    pub fn seed_law(&self) -> Result<CircleMeasure> {
        boundary_measure_truncated(&self.field, alpha(self.kappa), self.degree(), SEED_GRID, false)
    }
}

/// α_κ = −1/√κ.
pub fn alpha(kappa: f64) -> f64 {
    -1.0 / kappa.sqrt()
}

fn series_field(p: &[C64], sing: f64, tip: C64) -> HarmonicDiskField {
    let n = p.len().saturating_sub(1);
    let mut f = HarmonicDiskField::zero(n);
    for k in 1..=n {
        f.cos[k - 1] = p[k].re;
        f.sin[k - 1] = -p[k].im;
    }
    f.singularities = vec![(sing, tip)];
    f
}

fn field_series(f: &HarmonicDiskField) -> Vec<C64> {
    let mut p = vec![C64::new(0.0, 0.0)];
    p.extend(f.cos.iter().zip(&f.sin).map(|(&a, &b)| C64::new(a, -b)));
    p
}

pub fn qle_init(kappa: f64, degree: usize, seed: u64) -> Result<QleState> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::OutOfRange(format!("κ = {kappa} must exceed 1")));
    }
    let mut r = rng::from_seed(seed);
    let u: f64 = r.gen::<f64>() * 2.0 * PI;
    let tip = C64::from_polar(1.0, u);
    let field = sample_harmonic_fbgff(degree, &[(2.0 / kappa.sqrt(), tip)], &mut r)?;
    Ok(QleState { field, origin: -(kappa + 6.0) / (2.0 * kappa.sqrt()), tip, atom: u, t: 0.0, kappa, block: 0 })
}

// Power series on coefficient vectors indexed by degree, truncated to the
// length of the output.

fn mul(a: &[C64], b: &[C64], m: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); m + 1];
    for (i, &x) in a.iter().enumerate().take(m + 1) {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(m + 1 - i) {
            c[i + j] += x * y;
        }
    }
    c
}

/// 1/(1 − w) for w(0) = 0.
fn geometric(w: &[C64], m: usize) -> Vec<C64> {
    let mut r = vec![C64::new(0.0, 0.0); m + 1];
    r[0] = C64::new(1.0, 0.0);
    for k in 1..=m {
        let mut s = C64::new(0.0, 0.0);
        for j in 1..=k.min(w.len() - 1) {
            s += w[j] * r[k - j];
        }
        r[k] = s;
    }
    r
}

/// log g for g(0) = 1, from k L_k = k g_k − Σ_{j<k} j L_j g_{k−j}.
fn log_series(g: &[C64], m: usize) -> Vec<C64> {
    let at = |k: usize| g.get(k).copied().unwrap_or_default();
    let mut l = vec![C64::new(0.0, 0.0); m + 1];
    for k in 1..=m {
        let mut s = at(k) * k as f64;
        for j in 1..k {
            s -= l[j] * at(k - j) * j as f64;
        }
        l[k] = s / k as f64;
    }
    l
}

/// P(f) for f(0) = 0 by Horner's rule.
fn compose(p: &[C64], f: &[C64], m: usize) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); m + 1];
    for &c in p.iter().rev() {
        acc = mul(&acc, f, m);
        acc[0] += c;
    }
    acc
}

/// ḟ = −Φ(u, f) = f − 2f/(1 − f/u), also returning 1/(1 − f/u).
fn reverse_rhs(f: &[C64], u: C64, m: usize) -> (Vec<C64>, Vec<C64>) {
    let w: Vec<C64> = f.iter().map(|x| x / u).collect();
    let r = geometric(&w, m);
    let fr = mul(f, &r, m);
    (f.iter().zip(&fr).map(|(a, b)| a - 2.0 * b).collect(), r)
}

fn axpy(a: &[C64], h: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + h * y).collect()
}

/// Output of one block of series propagation.
struct Propagated {
    /// Analytic series F with Re F = 𝔥_δ, constant term removed.
    f_new: Vec<C64>,
    /// The reverse map f_δ to degree m + 1.
    map: Vec<C64>,
}

/// Propagates Re P + (2/√κ) log|· − s| through one block with reverse
/// driving angles `a` on a grid of step dt, at working degree m.
fn propagate(kappa: f64, p: &[C64], s: C64, a: &[f64], dt: f64, m: usize, noise: Option<&[f64]>) -> Propagated {
    let mf = m + 1;
    let mut f = vec![C64::new(0.0, 0.0); mf + 1];
    f[1] = C64::new(1.0, 0.0);
    let mut g = vec![C64::new(0.0, 0.0); mf + 1];
    for k in 0..a.len() - 1 {
        let ua = C64::from_polar(1.0, a[k]);
        let um = C64::from_polar(1.0, 0.5 * (a[k] + a[k + 1]));
        let ub = C64::from_polar(1.0, a[k + 1]);
        let (k1, r) = reverse_rhs(&f, ua, mf);
        if let Some(db) = noise {
            // G = 2w/(1 − w) = 2(r − 1), evaluated at the left endpoint.
            for (gj, rj) in g.iter_mut().zip(&r).skip(1) {
                *gj += 2.0 * rj * db[k];
            }
        }
        let (k2, _) = reverse_rhs(&axpy(&f, 0.5 * dt, &k1), um, mf);
        let (k3, _) = reverse_rhs(&axpy(&f, 0.5 * dt, &k2), um, mf);
        let (k4, _) = reverse_rhs(&axpy(&f, dt, &k3), ub, mf);
        for j in 0..=mf {
            f[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    let sk = kappa.sqrt();
    let mut out = compose(p, &f, m);
    let one_minus: Vec<C64> = f.iter().enumerate().map(|(k, x)| if k == 0 { C64::new(1.0, 0.0) } else { -x / s }).collect();
    let l1 = log_series(&one_minus, m);
    let lead = f[1];
    let quotient: Vec<C64> = (0..=m).map(|k| f[k + 1] / lead).collect();
    let l2 = log_series(&quotient, m);
    let deriv: Vec<C64> = (0..=m).map(|k| f[k + 1] * (k + 1) as f64 / lead).collect();
    let l3 = log_series(&deriv, m);
    let q = q_of_kappa(kappa);
    for k in 1..=m {
        out[k] += 2.0 / sk * l1[k] - (kappa + 6.0) / (2.0 * sk) * l2[k] + q * l3[k] + g[k];
    }
    out[0] = C64::new(0.0, 0.0);
    Propagated { f_new: out, map: f }
}

/// Everything produced by one block besides the new state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// Seed U of the block.
    pub atom: f64,
    /// Forward driving angles arg U + √κ B_s on the block's grid.
    pub driving: Vec<f64>,
    /// Seed law the atom was drawn from.
    pub nu: CircleMeasure,
    /// Taylor coefficients of f_δ = g_δ^{-1}.
    pub map: Vec<C64>,
}

fn grid_steps(delta: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(delta >= dt) {
        return invalid("need 0 < dt ≤ δ");
    }
    let n = (delta / dt).round() as usize;
    if ((n as f64) * dt - delta).abs() > 1e-9 * delta {
        return invalid("δ must be a multiple of dt");
    }
    Ok(n)
}

fn block_with<R: Rng + ?Sized>(state: &QleState, delta: f64, dt: f64, r: &mut R) -> Result<(QleState, BlockRecord)> {
    let n = grid_steps(delta, dt)?;
    let kappa = state.kappa;
    let sk = kappa.sqrt();
    let nu = state.seed_law()?;
    let u = sample_circle(&nu, r);
    let mut driving = Vec::with_capacity(n + 1);
    driving.push(u);
    for k in 0..n {
        let b: f64 = r.sample(StandardNormal);
        driving.push(driving[k] + sk * dt.sqrt() * b);
    }
    let noise: Vec<f64> = (0..n).map(|_| dt.sqrt() * r.sample::<f64, _>(StandardNormal)).collect();
    let a: Vec<f64> = driving.iter().rev().copied().collect();
    let deg = state.degree();
    let out = propagate(kappa, &field_series(&state.field), state.tip, &a, dt, deg, Some(&noise));
    let v0 = C64::from_polar(1.0, a[0]);
    let mut p = out.f_new;
    // Move the exact (2/√κ) log|1 − z/V_0| out of the series.
    let mut zk = C64::new(1.0, 0.0);
    for (k, c) in p.iter_mut().enumerate().skip(1) {
        zk /= v0;
        *c += 2.0 / sk * zk / k as f64;
    }
    if p.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical("non-finite field coefficients".into()));
    }
    let next = QleState {
        field: series_field(&p, 2.0 / sk, v0),
        origin: state.origin,
        tip: v0,
        atom: u,
        t: state.t + delta,
        kappa,
        block: state.block + 1,
    };
    Ok((next, BlockRecord { atom: u, driving, nu, map: out.map }))
}

/// One block of the chain.
pub fn qle_block(state: &QleState, delta: f64, dt: f64, seed: u64) -> Result<QleState> {
    Ok(block_with(state, delta, dt, &mut rng::from_seed(seed))?.0)
}

/// Like [`qle_block`], also returning the block's seed, driving and map.
pub fn qle_block_record(state: &QleState, delta: f64, dt: f64, seed: u64) -> Result<(QleState, BlockRecord)> {
    block_with(state, delta, dt, &mut rng::from_seed(seed))
}

/// Deterministic part of one block at working degree m for an arbitrary
/// reverse driving path (angles on a grid of step dt); returns the analytic
/// series F with Re F = 𝔥_δ.
pub fn block_deterministic(state: &QleState, reverse_angles: &[f64], dt: f64, m: usize) -> Result<Vec<C64>> {
    if reverse_angles.len() < 2 || !(dt > 0.0) {
        return invalid("need a driving path with at least one step");
    }
    Ok(propagate(state.kappa, &field_series(&state.field), state.tip, reverse_angles, dt, m, None).f_new)
}

/// Evaluates a power series at z.
pub fn eval_series(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QleTrajectory {
    pub kappa: f64,
    pub delta: f64,
    pub dt: f64,
    pub degree: usize,
    pub seed: u64,
    /// States at the block boundaries, starting with the initial state.
    pub states: Vec<QleState>,
    pub blocks: Vec<BlockRecord>,
    /// ∂(D∖K_t) at each block boundary after the first.
    pub hulls: Vec<Vec<C64>>,
}

impl QleTrajectory {
    /// Driving measure of the forward flow: one atom per grid step at the
    /// step's mean angle.
    pub fn driving_measure(&self) -> Result<DrivingMeasure> {
        let mid: Vec<f64> =
            self.blocks.iter().flat_map(|b| b.driving.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect::<Vec<_>>()).collect();
        if mid.is_empty() {
            return invalid("trajectory has no blocks");
        }
        DrivingMeasure::atoms(self.dt, &mid)
    }
}

/// Number of points on each hull polyline emitted by [`qle_run`].
pub const HULL_RESOLUTION: usize = 256;

/// Iterates [`qle_block`] up to time T (a multiple of δ); block ℓ uses the
/// stream rng::stream(seed, ℓ + 1), the initial state stream 0.
pub fn qle_run(kappa: f64, delta: f64, t_end: f64, degree: usize, dt: f64, seed: u64) -> Result<QleTrajectory> {
    grid_steps(delta, dt)?;
    if !(t_end >= 0.0) {
        return invalid("T must be nonnegative");
    }
    let blocks = (t_end / delta).round() as usize;
    if ((blocks as f64) * delta - t_end).abs() > 1e-9 * delta.max(1.0) {
        return invalid("T must be a multiple of δ");
    }
    let mut state = qle_init(kappa, degree, rng::stream(seed, 0).gen())?;
    let mut traj = QleTrajectory { kappa, delta, dt, degree, seed, states: vec![state.clone()], blocks: Vec::new(), hulls: Vec::new() };
    for l in 0..blocks {
        let (next, rec) = block_with(&state, delta, dt, &mut rng::stream(seed, l as u64 + 1))?;
        traj.states.push(next.clone());
        traj.blocks.push(rec);
        state = next;
    }
    if blocks > 0 {
        let nu = traj.driving_measure()?;
        let fwd = solve_forward(&nu, &[], t_end, &SolverOptions::default())?;
        for l in 1..=blocks {
            traj.hulls.push(hull_boundary(&fwd, l as f64 * delta, HULL_RESOLUTION, 1e-3)?);
        }
    }
    Ok(traj)
}

/// (D(z,u), σ(z,u)) with D = −∇𝔥(z)·Φ(u,z) + 𝒫*(z,u)/√κ + Q ∂_θ𝒫̄(z,u)
/// and σ = 𝒫*(z,u).
pub fn qle_drift(field: &HarmonicDiskField, z: C64, u: C64, kappa: f64) -> Result<(f64, f64)> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutOfDomain("|z| must be below 1".into()));
    }
    let (gx, gy) = field.gradient(z)?;
    let ph = phi(u, z);
    let (_, _, dp, ps) = poisson_kernels(z, u);
    Ok((-(gx * ph.re + gy * ph.im) + ps / kappa.sqrt() + q_of_kappa(kappa) * dp, ps))
}

/// (D̃, σ̃) of the block dynamics at a point whose current image is `f`
/// moving with velocity `fdot`, under the block-start field.
pub fn block_drift(field: &HarmonicDiskField, f: C64, fdot: C64, v: C64, kappa: f64) -> Result<(f64, f64)> {
    let (gx, gy) = field.gradient(f)?;
    let (_, _, dp, ps) = poisson_kernels(f, v);
    Ok((gx * fdot.re + gy * fdot.im + ps / kappa.sqrt() + q_of_kappa(kappa) * dp, ps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::Direction;
    use crate::sle::{coupling_h, flow_along_path, sample_radial_sle};
    use crate::stats::tv;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn init_parameters() {
        assert!(matches!(qle_init(1.0, 4, 0), Err(Error::OutOfRange(_))));
        assert!(matches!(qle_init(0.5, 4, 0), Err(Error::OutOfRange(_))));
        let s = qle_init(6.0, 8, 3).unwrap();
        assert!((q_of_kappa(6.0) - 2.0412).abs() < 1e-4);
        assert!((s.origin + 12.0 / (2.0 * 6f64.sqrt())).abs() < 1e-15);
        assert_eq!(s.field.singularities, vec![(2.0 / 6f64.sqrt(), s.tip)]);
        assert_eq!(s.value(c(0.0, 0.0)).unwrap(), 0.0);
        // κ = 2 gives γ² = 2.
        assert!((q_of_kappa(2.0) - (2.0 / 2f64.sqrt() + 2f64.sqrt() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn seed_law_matches_closed_form_at_degree_zero() {
        for seed in 0..5 {
            let s = qle_init(6.0, 0, seed).unwrap();
            let CircleMeasure::Density(w) = s.seed_law().unwrap() else { panic!() };
            let m = w.len();
            let direct: Vec<f64> = (0..m)
                .map(|j| (C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64) - s.tip).norm().powf(-2.0 / 6.0))
                .collect();
            let z: f64 = direct.iter().sum();
            let direct: Vec<f64> = direct.iter().map(|x| x / z).collect();
            assert!(tv(&w, &direct) < 1e-10);
        }
    }

    #[test]
    fn series_helpers() {
        // log(1 − z) = −Σ z^k/k, 1/(1 − z) = Σ z^k.
        let g = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let l = log_series(&g, 6);
        for k in 1..=6 {
            assert!((l[k] + 1.0 / k as f64).norm() < 1e-15);
        }
        let r = geometric(&[c(0.0, 0.0), c(1.0, 0.0)], 5);
        assert!(r.iter().all(|x| (x - 1.0).norm() < 1e-15));
        let p = vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let f = vec![c(0.0, 0.0), c(0.5, 0.0), c(0.0, 1.0)];
        let z = c(0.13, -0.2);
        let comp = eval_series(&compose(&p, &f, 20), z);
        let fz = eval_series(&f, z);
        assert!((comp - (fz + 2.0 * fz * fz)).norm() < 1e-12);
    }

    #[test]
    fn origin_stays_pinned() {
        let mut s = qle_init(6.0, 16, 1).unwrap();
        for k in 0..5 {
            s = qle_block(&s, 0.05, 1e-3, 100 + k).unwrap();
            assert_eq!(s.value(c(0.0, 0.0)).unwrap(), 0.0);
            assert_eq!(s.block, k as usize + 1);
            assert!((s.t - 0.05 * (k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn drift_examples() {
        let zero = HarmonicDiskField::zero(4);
        for u in [c(1.0, 0.0), C64::from_polar(1.0, 2.0)] {
            assert_eq!(qle_drift(&zero, c(0.0, 0.0), u, 6.0).unwrap(), (0.0, 0.0));
        }
        let (d, s) = qle_drift(&zero, c(0.5, 0.0), c(1.0, 0.0), 6.0).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert!((d - (2.0 / 6f64.sqrt() - 4.0 * q_of_kappa(6.0))).abs() < 1e-12);
        assert!((d + 7.348).abs() < 1e-3, "{d}");
        assert!(qle_drift(&zero, c(1.0, 0.0), c(1.0, 0.0), 6.0).is_err());
    }

    #[test]
    fn block_drift_at_identity_is_the_drift() {
        let s = qle_init(6.0, 12, 7).unwrap();
        let mut r = rng::from_seed(8);
        for _ in 0..50 {
            let z = C64::from_polar(r.gen_range(0.0..0.9), r.gen_range(0.0..2.0 * PI));
            let u = C64::from_polar(1.0, r.gen_range(0.0..2.0 * PI));
            let a = qle_drift(&s.field, z, u, 6.0).unwrap();
            let b = block_drift(&s.field, z, -phi(u, z), u, 6.0).unwrap();
            assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
        }
    }

    #[test]
    fn short_block_moves_by_the_drift() {
        let s = qle_init(6.0, 10, 5).unwrap();
        let v = 0.8;
        let d = 1e-4;
        let p = block_deterministic(&s, &[v, v], d, 40).unwrap();
        for z in [c(0.2, 0.1), c(-0.3, 0.25), c(0.0, -0.4)] {
            let moved = eval_series(&p, z).re;
            let rate = (moved - s.value(z).unwrap()) / d;
            let want = qle_drift(&s.field, z, C64::from_polar(1.0, v), 6.0).unwrap().0;
            assert!((rate - want).abs() < 1e-2 * want.abs().max(1.0), "{rate} {want}");
        }
    }

    #[test]
    fn degree_zero_block_matches_sle_coupling() {
        let kappa = 6.0;
        let (delta, dt) = (0.05, 1e-4);
        let n = 500;
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..8 {
                pts.push(C64::from_polar(0.08 * (i + 1) as f64, PI / 4.0 * j as f64 + 0.1));
            }
        }
        let run = sample_radial_sle(kappa, delta, dt, &pts, 21, Direction::Reverse, None, None).unwrap();
        let wd = run.w[n];
        let a: Vec<f64> = run.w.iter().map(|w| w - wd).collect();
        let prior = QleState {
            field: series_field(&[c(0.0, 0.0)], 2.0 / kappa.sqrt(), c(1.0, 0.0)),
            origin: -(kappa + 6.0) / (2.0 * kappa.sqrt()),
            tip: c(1.0, 0.0),
            atom: 0.0,
            t: 0.0,
            kappa,
            block: 0,
        };
        let p = block_deterministic(&prior, &a, dt, 48).unwrap();
        let mut worst: f64 = 0.0;
        for &z in &pts {
            let y = z * C64::from_polar(1.0, -wd);
            let want = coupling_h(&run, z, delta).unwrap() + (kappa + 6.0) / (2.0 * kappa.sqrt()) * y.norm().ln()
                - delta / kappa.sqrt();
            worst = worst.max((eval_series(&p, y).re - want).abs());
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn block_map_inverts_forward_flow() {
        let s = qle_init(6.0, 32, 2).unwrap();
        let (_, rec) = qle_block_record(&s, 0.05, 1e-3, 3).unwrap();
        let pts = [c(0.3, 0.1), c(-0.2, -0.4), c(0.0, 0.45)];
        let images: Vec<C64> = pts.iter().map(|&z| eval_series(&rec.map, z)).collect();
        let (maps, _) = flow_along_path(Direction::Forward, &rec.driving, 1e-3, &images).unwrap();
        for (z, back) in pts.iter().zip(maps.last().unwrap()) {
            assert!((z - back).norm() < 1e-5, "{z} {back}");
        }
    }

    #[test]
    fn run_bookkeeping() {
        let t0 = qle_run(6.0, 0.05, 0.0, 8, 1e-3, 4).unwrap();
        assert_eq!(t0.states.len(), 1);
        assert!(t0.blocks.is_empty() && t0.hulls.is_empty());
        let tr = qle_run(6.0, 0.05, 0.2, 8, 1e-3, 4).unwrap();
        assert_eq!(tr.states.len(), 5);
        assert_eq!(tr.hulls.len(), 4);
        let fwd = solve_forward(&tr.driving_measure().unwrap(), &[], 0.2, &SolverOptions::default()).unwrap();
        for l in 1..=4 {
            let t = 0.05 * l as f64;
            let st = fwd.at(t).unwrap();
            assert!((st.deriv0 * (-t).exp() - 1.0).abs() < 1e-4);
            assert!(tr.hulls[l - 1].iter().all(|x| x.norm() < 1.0));
        }
        let again = qle_run(6.0, 0.05, 0.2, 8, 1e-3, 4).unwrap();
        assert_eq!(tr, again);
        assert!(qle_run(6.0, 0.05, 0.12, 8, 1e-3, 4).is_err());
        assert!(qle_block(&tr.states[0], 1e-4, 1e-3, 0).is_err());
    }
}
