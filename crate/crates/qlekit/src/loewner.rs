//! Measure-driven radial Loewner evolution.
//!
//! The forward flow solves ġ_t(z) = ∫ Φ(u, g_t(z)) dν_t(u) with
//! Φ(u, z) = z (u + z)/(u − z); the reverse flow flips the sign. Driving data
//! are piecewise constant in time: one probability measure per slice of
//! length Δt. Inverse maps are never computed by root finding: the inverse
//! of the forward map at time t is the reverse flow driven by the
//! time-reversed slices on [0, t], and vice versa.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lqg::CircleMeasure;
use crate::C64;

/// Ψ(u, z) = (u + z)/(u − z).
pub fn psi(u: C64, z: C64) -> C64 {
    (u + z) / (u - z)
}

/// Φ(u, z) = z Ψ(u, z).
pub fn phi(u: C64, z: C64) -> C64 {
    z * psi(u, z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingMeasure {
    pub dt: f64,
    pub slices: Vec<CircleMeasure>,
}

impl DrivingMeasure {
    pub fn new(dt: f64, slices: Vec<CircleMeasure>) -> Result<Self> {
        if !(dt > 0.0) || slices.is_empty() {
            return invalid("driving measure needs a positive step and at least one slice");
        }
        for s in &slices {
            let ok = match s {
                CircleMeasure::Atoms(a) => !a.is_empty() && a.iter().all(|x| x.1 >= 0.0 && x.0.is_finite()),
                CircleMeasure::Density(w) => w.len() >= 2 && w.iter().all(|x| *x >= 0.0),
            };
            if !ok || (s.total() - 1.0).abs() > 1e-9 {
                return invalid("every slice must be a probability measure");
            }
        }
        Ok(Self { dt, slices })
    }

    /// Uniform measure in every slice.
    pub fn uniform(dt: f64, n: usize) -> Self {
        Self { dt, slices: vec![CircleMeasure::uniform(64); n.max(1)] }
    }

    /// One unit atom per slice at the given angles.
    pub fn atoms(dt: f64, angles: &[f64]) -> Result<Self> {
        Self::new(dt, angles.iter().map(|&a| CircleMeasure::Atoms(vec![(a, 1.0)])).collect())
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.slices.len() as f64
    }

    /// Rotates every slice by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let slices = self
            .slices
            .iter()
            .map(|s| match s {
                CircleMeasure::Atoms(a) => CircleMeasure::Atoms(a.iter().map(|&(t, w)| (t + angle, w)).collect()),
                CircleMeasure::Density(_) => {
                    // Densities are rotated through their atoms representation
                    // only when the angle is a grid multiple.
                    s.clone()
                }
            })
            .collect();
        Self { dt: self.dt, slices }
    }

    /// Slices covering [0, t] as (duration, slice index), in time order.
    fn pieces(&self, t: f64) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        let mut s = 0.0;
        for i in 0..self.slices.len() {
            if s >= t - 1e-15 {
                break;
            }
            let len = self.dt.min(t - s);
            out.push((len, i));
            s += len;
        }
        out
    }
}

/// A slice prepared for evaluation of ∫Ψ(u, z) dν(u).
#[derive(Clone, Debug)]
enum Prepared {
    Atoms(Vec<(C64, f64)>),
    /// c_0 and c_k = ∫ ū^k dν for k = 1..K; ∫Ψ dν = c_0 + 2 Σ c_k z^k.
    Spectral(f64, Vec<C64>),
}

impl Prepared {
    fn new(m: &CircleMeasure) -> Self {
        match m {
            CircleMeasure::Atoms(a) => Self::Atoms(a.iter().map(|&(t, w)| (C64::from_polar(1.0, t), w)).collect()),
            CircleMeasure::Density(w) => {
                let n = w.len();
                let mut buf: Vec<C64> = w.iter().map(|&x| C64::new(x, 0.0)).collect();
                FftPlanner::new().plan_fft_forward(n).process(&mut buf);
                let h = 2.0 * PI / n as f64;
                let c = (1..=n / 2)
                    .map(|k| {
                        let x = k as f64 * h / 2.0;
                        buf[k] * (x.sin() / x)
                    })
                    .collect();
                Self::Spectral(w.iter().sum(), c)
            }
        }
    }

    /// (∫Ψ(u,z)dν, ∂_z ∫Ψ(u,z)dν).
    fn psi(&self, z: C64) -> (C64, C64) {
        match self {
            Self::Atoms(a) => a.iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |(p, d), &(u, w)| {
                let q = u - z;
                (p + w * (u + z) / q, d + w * 2.0 * u / (q * q))
            }),
            Self::Spectral(c0, c) => {
                let mut p = C64::new(0.0, 0.0);
                let mut d = C64::new(0.0, 0.0);
                for (i, ck) in c.iter().enumerate().rev() {
                    let k = (i + 1) as f64;
                    p = p * z + ck;
                    d = d * z + ck * k;
                }
                (C64::new(*c0, 0.0) + 2.0 * p * z, 2.0 * d)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub dt_max: f64,
    /// Local error tolerance of the step-doubling controller.
    pub tol: f64,
    /// A point is swallowed once |g_t(z)| ≥ 1 − swallow_tol.
    pub swallow_tol: f64,
    /// Below this step a point that is not yet swallowed is declared swallowed.
    pub dt_min: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dt_max: 1e-2, tol: 1e-13, swallow_tol: 1e-9, dt_min: 1e-15 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracked {
    pub z0: C64,
    pub g: C64,
    /// g_t'(z0).
    pub dg: C64,
    /// Swallowing time.
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerState {
    pub t: f64,
    pub points: Vec<Tracked>,
    /// g_t'(0), integrated alongside the points.
    pub deriv0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub direction: Direction,
    pub driving: DrivingMeasure,
    /// States at every slice boundary up to the final time.
    pub states: Vec<LoewnerState>,
}

impl Trajectory {
    pub fn last(&self) -> &LoewnerState {
        self.states.last().expect("trajectories hold at least the initial state")
    }

    /// State recorded at time t (to within 1e−9).
    pub fn at(&self, t: f64) -> Option<&LoewnerState> {
        self.states.iter().find(|s| (s.t - t).abs() < 1e-9)
    }
}

fn rk4(p: &Prepared, sign: f64, g: C64, dg: C64, h: f64) -> (C64, C64) {
    let f = |g: C64, dg: C64| {
        let (s, ds) = p.psi(g);
        (sign * g * s, sign * (s + g * ds) * dg)
    };
    let (k1, l1) = f(g, dg);
    let (k2, l2) = f(g + 0.5 * h * k1, dg + 0.5 * h * l1);
    let (k3, l3) = f(g + 0.5 * h * k2, dg + 0.5 * h * l2);
    let (k4, l4) = f(g + h * k3, dg + h * l3);
    (g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), dg + h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4))
}

/// Advances one point across a slice of length `len` starting at time t0.
fn advance(p: &Prepared, sign: f64, x: &mut Tracked, t0: f64, len: f64, o: &SolverOptions) {
    if x.tau.is_some() {
        return;
    }
    let mut t = 0.0;
    let mut h = o.dt_max.min(len);
    while t < len {
        h = h.min(len - t);
        let (g1, d1) = rk4(p, sign, x.g, x.dg, h);
        let (gh, dh) = rk4(p, sign, x.g, x.dg, h / 2.0);
        let (g2, d2) = rk4(p, sign, gh, dh, h / 2.0);
        let err = ((g2 - g1).norm() + (d2 - d1).norm() / d2.norm().max(1.0)) / 15.0;
        let bad = !(err.is_finite() && g2.norm() < 1.0);
        if bad || err > o.tol {
            if h <= o.dt_min {
                if sign > 0.0 || !err.is_finite() {
                    x.tau = (sign > 0.0).then_some(t0 + t);
                    return;
                }
                // The reverse flow never leaves the disk: force progress.
                x.g = g2;
                x.dg = d2;
                t += h;
                continue;
            }
            h *= if bad { 0.25 } else { (0.9 * (o.tol / err).powf(0.2)).clamp(0.1, 0.5) };
            continue;
        }
        if sign > 0.0 && g2.norm() >= 1.0 - o.swallow_tol {
            // Locate the crossing before accepting the step.
            if h > o.dt_min && g2.norm() > 1.0 - 0.5 * o.swallow_tol {
                h *= 0.5;
                continue;
            }
            x.g = g2;
            x.dg = d2;
            x.tau = Some(t0 + t + h);
            return;
        }
        x.g = g2 + (g2 - g1) / 15.0;
        x.dg = d2 + (d2 - d1) / 15.0;
        t += h;
        if err < o.tol / 32.0 {
            h = (h * 2.0).min(o.dt_max);
        }
    }
}

fn check_points(points: &[C64]) -> Result<()> {
    if points.iter().all(|z| z.norm() < 1.0) {
        Ok(())
    } else {
        Err(Error::OutOfDomain("tracked points must lie in the open disk".into()))
    }
}

fn solve(nu: &DrivingMeasure, sign: f64, points: &[C64], t_end: f64, o: &SolverOptions) -> Result<Vec<LoewnerState>> {
    check_points(points)?;
    if !(t_end >= 0.0) || t_end > nu.horizon() + 1e-12 {
        return invalid("time horizon exceeds the driving measure");
    }
    let mut st = LoewnerState {
        t: 0.0,
        points: points.iter().map(|&z| Tracked { z0: z, g: z, dg: C64::new(1.0, 0.0), tau: None }).collect(),
        deriv0: 1.0,
    };
    let mut out = vec![st.clone()];
    for (len, i) in nu.pieces(t_end) {
        let p = Prepared::new(&nu.slices[i]);
        for x in &mut st.points {
            advance(&p, sign, x, st.t, len, o);
        }
        let mass = p.psi(C64::new(0.0, 0.0)).0.re;
        st.deriv0 *= (sign * mass * len).exp();
        st.t += len;
        out.push(st.clone());
    }
    Ok(out)
}

/// Forward radial Loewner flow of the tracked points up to time `t_end`.
pub fn solve_forward(nu: &DrivingMeasure, points: &[C64], t_end: f64, o: &SolverOptions) -> Result<Trajectory> {
    Ok(Trajectory { direction: Direction::Forward, driving: nu.clone(), states: solve(nu, 1.0, points, t_end, o)? })
}

/// Reverse radial Loewner flow ġ = −∫Φ dν.
pub fn solve_reverse(nu: &DrivingMeasure, points: &[C64], t_end: f64, o: &SolverOptions) -> Result<Trajectory> {
    Ok(Trajectory { direction: Direction::Reverse, driving: nu.clone(), states: solve(nu, -1.0, points, t_end, o)? })
}

/// The driving on [0, t] run backwards in time.
pub fn reversed(nu: &DrivingMeasure, t: f64) -> Vec<(f64, CircleMeasure)> {
    nu.pieces(t).into_iter().rev().map(|(len, i)| (len, nu.slices[i].clone())).collect()
}

fn flow_pieces(pieces: &[(f64, CircleMeasure)], sign: f64, points: &[C64], o: &SolverOptions) -> Vec<C64> {
    let mut xs: Vec<Tracked> = points.iter().map(|&z| Tracked { z0: z, g: z, dg: C64::new(1.0, 0.0), tau: None }).collect();
    let mut t = 0.0;
    for (len, m) in pieces {
        let p = Prepared::new(m);
        for x in &mut xs {
            advance(&p, sign, x, t, *len, o);
        }
        t += len;
    }
    xs.iter().map(|x| x.g).collect()
}

/// g_t^{-1}(w) for the forward flow driven by `nu`, or f_t^{-1}(w) for the
/// reverse flow (where it exists).
pub fn inverse_map(nu: &DrivingMeasure, direction: Direction, t: f64, w: &[C64], o: &SolverOptions) -> Result<Vec<C64>> {
    check_points(w)?;
    if t > nu.horizon() + 1e-12 {
        return invalid("time beyond the driving horizon");
    }
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Reverse => 1.0,
    };
    Ok(flow_pieces(&reversed(nu, t), sign, w, o))
}

/// Image of the circle of radius 1 − probe_eps under g_t^{-1}: a closed
/// polyline tracing ∂(D∖K_t) from inside.
pub fn hull_boundary(traj: &Trajectory, t: f64, resolution: usize, probe_eps: f64) -> Result<Vec<C64>> {
    if traj.direction != Direction::Forward {
        return invalid("hull boundaries are defined for forward trajectories");
    }
    if !(probe_eps > 0.0 && probe_eps < 1.0) || resolution < 3 {
        return invalid("need 0 < probe_eps < 1 and at least three points");
    }
    if t > traj.last().t + 1e-12 {
        return invalid("time outside the trajectory");
    }
    let w: Vec<C64> = (0..resolution)
        .map(|k| C64::from_polar(1.0 - probe_eps, 2.0 * PI * k as f64 / resolution as f64))
        .collect();
    inverse_map(&traj.driving, Direction::Forward, t, &w, &SolverOptions::default())
}

/// Tip of the hull at time t for a driving measure whose slice at t is a
/// single atom: g_t^{-1} evaluated just inside the driving point (the
/// error is quadratic in the offset since the tip is a branch point).
pub fn tip(nu: &DrivingMeasure, t: f64) -> Result<C64> {
    let k = ((t / nu.dt).ceil() as usize).clamp(1, nu.slices.len()) - 1;
    let u = match &nu.slices[k] {
        CircleMeasure::Atoms(a) if a.len() == 1 => a[0].0,
        _ => return invalid("tip requires a single atom at time t"),
    };
    let w = C64::from_polar(1.0 - 1e-5, u);
    Ok(inverse_map(nu, Direction::Forward, t, &[w], &SolverOptions::default())?[0])
}

/// Koebe function k(z) = z/(1 − z)² and its inverse on C∖(−∞, −1/4].
fn koebe(z: C64) -> C64 {
    let d = C64::new(1.0, 0.0) - z;
    z / (d * d)
}

fn koebe_inv(w: C64) -> C64 {
    let s = (C64::new(1.0, 0.0) + 4.0 * w).sqrt();
    (s - 1.0) / (s + 1.0)
}

/// Forward Loewner map of the radial slit from e^{iθ} whose capacity is s:
/// maps D minus the slit onto D.
pub fn slit_map(theta: f64, s: f64, w: C64) -> C64 {
    let r = C64::from_polar(1.0, theta);
    let x = -(w / r);
    -koebe_inv(s.exp() * koebe(x)) * r
}

/// Capacity of the radial slit from the circle to radius y.
pub fn slit_capacity(y: f64) -> f64 {
    ((1.0 + y).powi(2) / (4.0 * y)).ln()
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let cross = |o: C64, p: C64, q: C64| (p - o).re * (q - o).im - (p - o).im * (q - o).re;
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Driving function of a simple curve from the unit circle into the disk,
/// by zipping it up with radial slit maps; returned as one atom per slice of
/// length `dt` (the remainder shorter than a slice is dropped).
pub fn extract_driving(curve: &[C64], dt: f64) -> Result<DrivingMeasure> {
    if curve.len() < 2 || !(dt > 0.0) {
        return invalid("need a curve with at least two points and a positive step");
    }
    if (curve[0].norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidCurve("the curve must start on the unit circle".into()));
    }
    if curve[1..].iter().any(|z| !(z.norm() < 1.0)) {
        return Err(Error::InvalidCurve("the curve must stay inside the open disk".into()));
    }
    let n = curve.len();
    for i in 0..n - 1 {
        let (a, b) = (curve[i], curve[i + 1]);
        if a == b {
            return Err(Error::InvalidCurve("repeated point".into()));
        }
        // Distance from 0 to the segment.
        let t = (-(a.conj() * (b - a)).re / (b - a).norm_sqr()).clamp(0.0, 1.0);
        if (a + (b - a) * t).norm() < 1e-12 {
            return Err(Error::InvalidCurve("the curve passes through 0".into()));
        }
        for j in i + 2..n - 1 {
            if segments_cross(a, b, curve[j], curve[j + 1]) {
                return Err(Error::InvalidCurve(format!("segments {i} and {j} intersect")));
            }
        }
    }
    // Subdivide so that each zipping step has capacity well below dt.
    let h = (0.1 * dt.sqrt()).clamp(1e-4, 0.02);
    let mut pts = Vec::new();
    for w in curve.windows(2) {
        let k = ((w[1] - w[0]).norm() / h).ceil().max(1.0) as usize;
        for j in 1..=k {
            pts.push(w[0] + (w[1] - w[0]) * (j as f64 / k as f64));
        }
    }
    let mut steps: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let mut prev = curve[0].arg();
    for k in 0..pts.len() {
        let w = pts[k];
        let y = w.norm();
        if y >= 1.0 - 1e-15 {
            continue;
        }
        // Unwrap against the previous angle.
        let mut th = w.arg();
        th += 2.0 * PI * ((prev - th) / (2.0 * PI)).round();
        prev = th;
        let s = slit_capacity(y);
        steps.push((s, th));
        for p in &mut pts[k + 1..] {
            *p = slit_map(th, s, *p);
        }
    }
    let total: f64 = steps.iter().map(|x| x.0).sum();
    let n_slices = (total / dt + 1e-9).floor() as usize;
    if n_slices == 0 {
        return invalid("curve capacity is below one slice");
    }
    // Time average of the piecewise-constant angle over each slice.
    let mut angles = vec![0.0; n_slices];
    let (mut i, mut used) = (0usize, 0.0);
    for a in angles.iter_mut() {
        let mut need = dt;
        while need > 1e-15 && i < steps.len() {
            let take = (steps[i].0 - used).min(need);
            *a += take * steps[i].1;
            need -= take;
            used += take;
            if used >= steps[i].0 - 1e-15 {
                i += 1;
                used = 0.0;
            }
        }
        *a /= dt - need;
    }
    DrivingMeasure::atoms(dt, &angles)
}

/// max over `times` of sup_{|w| = r} |g_t^{-1}(w) − g̃_t^{-1}(w)| for two
/// forward trajectories (by the maximum principle the sup over |w| ≤ r is
/// attained on the circle; 64 equally spaced probes are used).
pub fn caratheodory_distance(a: &Trajectory, b: &Trajectory, r: f64, times: &[f64]) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return invalid("radius must lie in (0, 1)");
    }
    if a.direction != Direction::Forward || b.direction != Direction::Forward {
        return invalid("Carathéodory distance compares forward trajectories");
    }
    let w: Vec<C64> = (0..64).map(|k| C64::from_polar(r, 2.0 * PI * k as f64 / 64.0)).collect();
    let o = SolverOptions::default();
    let mut d: f64 = 0.0;
    for &t in times {
        if t > a.last().t + 1e-12 || t > b.last().t + 1e-12 {
            return invalid("time outside a trajectory");
        }
        let x = inverse_map(&a.driving, Direction::Forward, t, &w, &o)?;
        let y = inverse_map(&b.driving, Direction::Forward, t, &w, &o)?;
        for (p, q) in x.iter().zip(&y) {
            d = d.max((p - q).norm());
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    fn random_measure<R: Rng>(r: &mut R, slices: usize) -> DrivingMeasure {
        let s = (0..slices)
            .map(|_| {
                if r.gen_bool(0.5) {
                    let k = r.gen_range(1..4);
                    let w: Vec<f64> = (0..k).map(|_| r.gen::<f64>() + 0.1).collect();
                    let tot: f64 = w.iter().sum();
                    CircleMeasure::Atoms(w.iter().map(|x| (r.gen_range(0.0..2.0 * PI), x / tot)).collect())
                } else {
                    let w: Vec<f64> = (0..64).map(|_| r.gen::<f64>()).collect();
                    let tot: f64 = w.iter().sum();
                    CircleMeasure::Density(w.iter().map(|x| x / tot).collect())
                }
            })
            .collect();
        DrivingMeasure::new(0.05, s).unwrap()
    }

    #[test]
    fn uniform_driving_is_dilation() {
        let nu = DrivingMeasure::uniform(0.1, 10);
        let pts: Vec<C64> = (0..20).map(|k| C64::from_polar(0.9 * (k as f64 + 1.0) / 20.0, k as f64)).collect();
        let tr = solve_forward(&nu, &pts, 1.0, &SolverOptions::default()).unwrap();
        for s in &tr.states {
            for x in &s.points {
                let e = x.z0 * s.t.exp();
                if e.norm() < 1.0 - 1e-6 {
                    assert!((x.g - e).norm() < 1e-8, "{} {}", x.g, e);
                    assert!(x.tau.is_none());
                } else {
                    let tau = x.tau.unwrap();
                    assert!((tau - (1.0 / x.z0.norm()).ln()).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn capacity_and_koebe_on_random_measures() {
        let mut r = rng::from_seed(11);
        for _ in 0..20 {
            let nu = random_measure(&mut r, 20);
            let probes: Vec<C64> = (0..8).map(|k| C64::from_polar(0.24 * (-1.0f64).exp(), k as f64)).collect();
            let tr = solve_forward(&nu, &probes, 1.0, &SolverOptions::default()).unwrap();
            for s in &tr.states {
                assert!((s.deriv0 - s.t.exp()).abs() < 1e-6);
                assert!(s.points.iter().all(|x| x.tau.is_none()));
            }
            let rev = solve_reverse(&nu, &[c(0.0, 0.0)], 1.0, &SolverOptions::default()).unwrap();
            assert!((rev.last().deriv0 - (-1.0f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn swallowing_is_monotone() {
        let mut r = rng::from_seed(5);
        let nu = random_measure(&mut r, 20);
        let pts: Vec<C64> = (0..50).map(|_| C64::from_polar(r.gen_range(0.5..0.99), r.gen_range(0.0..2.0 * PI))).collect();
        let tr = solve_forward(&nu, &pts, 1.0, &SolverOptions::default()).unwrap();
        for w in tr.states.windows(2) {
            for (a, b) in w[0].points.iter().zip(&w[1].points) {
                assert!(a.tau.is_none() || a.tau == b.tau);
            }
        }
        assert!(tr.last().points.iter().any(|x| x.tau.is_some()));
    }

    #[test]
    fn point_mass_respects_conjugation() {
        let nu = DrivingMeasure::atoms(0.1, &[0.0; 10]).unwrap();
        let tr = solve_forward(&nu, &[c(-0.5, 0.0), c(0.3, 0.4), c(0.3, -0.4)], 1.0, &SolverOptions::default()).unwrap();
        let p = &tr.last().points;
        assert!(p[0].g.im.abs() < 1e-9 && p[0].g.re < 0.0);
        assert!((p[1].g - p[2].g.conj()).norm() < 1e-9);
        assert!((tr.last().deriv0 - 1f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn reverse_then_forward_is_identity() {
        let nu = DrivingMeasure::atoms(0.01, &[0.0; 10]).unwrap();
        let pts: Vec<C64> = (0..16).map(|k| C64::from_polar(0.7 * ((k % 4) as f64 + 1.0) / 4.0, k as f64)).collect();
        let o = SolverOptions::default();
        let rev = solve_reverse(&nu, &pts, 0.1, &o).unwrap();
        let img: Vec<C64> = rev.last().points.iter().map(|x| x.g).collect();
        let back = flow_pieces(&reversed(&nu, 0.1), 1.0, &img, &o);
        for (a, b) in back.iter().zip(&pts) {
            assert!((a - b).norm() < 1e-6);
        }
        assert!((rev.last().points[0].dg.norm() - 0.0).abs() > 0.0);
        let z = solve_reverse(&nu, &pts, 0.0, &o).unwrap();
        assert_eq!(z.states.len(), 1);
        let r0 = solve_reverse(&nu, &[c(0.0, 0.0)], 0.1, &o).unwrap();
        assert!((r0.last().points[0].dg.norm() - (-0.1f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn hull_boundaries() {
        let o = SolverOptions::default();
        let nu = DrivingMeasure::uniform(0.1, 5);
        let tr = solve_forward(&nu, &[], 0.5, &o).unwrap();
        let h0 = hull_boundary(&tr, 0.0, 32, 1e-3).unwrap();
        assert!(h0.iter().all(|z| (z.norm() - (1.0 - 1e-3)).abs() < 1e-10));
        let h = hull_boundary(&tr, 0.5, 32, 1e-3).unwrap();
        assert!(h.iter().all(|z| (z.norm() - (1.0 - 1e-3) * (-0.5f64).exp()).abs() < 1e-4));
        let nu = DrivingMeasure::atoms(0.1, &[0.0; 5]).unwrap();
        let tr = solve_forward(&nu, &[], 0.5, &o).unwrap();
        let h = hull_boundary(&tr, 0.5, 64, 1e-3).unwrap();
        for k in 1..64 {
            assert!((h[k] - h[64 - k].conj()).norm() < 1e-6);
        }
        // The slit reaches further in than the rest of the boundary.
        assert!(h[0].re < h[32].norm());
    }

    #[test]
    fn slit_map_matches_loewner_flow() {
        let nu = DrivingMeasure::atoms(0.05, &[0.4; 10]).unwrap();
        let pts = [c(0.1, 0.2), c(-0.5, 0.1), c(0.3, -0.6)];
        let tr = solve_forward(&nu, &pts, 0.5, &SolverOptions::default()).unwrap();
        for x in &tr.last().points {
            assert!((slit_map(0.4, 0.5, x.z0) - x.g).norm() < 1e-9);
        }
        let t = tip(&nu, 0.5).unwrap();
        let y = 1.0 - (C64::from_polar(1.0, 0.4) - t).norm();
        assert!((slit_capacity(y) - 0.5).abs() < 1e-6, "{} {}", t, slit_capacity(y));
    }

    #[test]
    fn straight_and_rotated_slits() {
        for phi in [0.0, 1.3] {
            let curve: Vec<C64> = (0..=100).map(|k| C64::from_polar(1.0 - 0.8 * k as f64 / 100.0, phi)).collect();
            let nu = extract_driving(&curve, 1e-3).unwrap();
            let expect = slit_capacity(0.2);
            assert!((nu.horizon() - expect).abs() <= 1e-3);
            for s in &nu.slices {
                let CircleMeasure::Atoms(a) = s else { panic!() };
                assert!((a[0].0 - phi).abs() < 0.02);
            }
        }
    }

    #[test]
    fn invalid_curves() {
        let self_crossing = [c(1.0, 0.0), c(0.5, 0.0), c(0.6, 0.2), c(0.6, -0.2)];
        assert!(matches!(extract_driving(&self_crossing, 1e-3), Err(Error::InvalidCurve(_))));
        let through_zero = [c(1.0, 0.0), c(-0.5, 0.0)];
        assert!(matches!(extract_driving(&through_zero, 1e-3), Err(Error::InvalidCurve(_))));
        let inside = [c(0.5, 0.0), c(0.2, 0.0)];
        assert!(matches!(extract_driving(&inside, 1e-3), Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn extraction_round_trip() {
        let dt = 1e-3;
        let angles: Vec<f64> = (0..300).map(|k| 0.6 * (5.0 * k as f64 * dt).sin()).collect();
        let nu = DrivingMeasure::atoms(dt, &angles).unwrap();
        let mut curve = vec![c(1.0, 0.0)];
        for k in 1..=60 {
            curve.push(tip(&nu, k as f64 * 0.005).unwrap());
        }
        let ex = extract_driving(&curve, dt).unwrap();
        let t = ex.horizon().min(nu.horizon());
        let o = SolverOptions::default();
        let a = solve_forward(&nu, &[], t, &o).unwrap();
        let b = solve_forward(&ex, &[], t, &o).unwrap();
        let d = caratheodory_distance(&a, &b, 0.5, &[t / 2.0, t]).unwrap();
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn caratheodory_examples() {
        let o = SolverOptions::default();
        let a = solve_forward(&DrivingMeasure::uniform(0.1, 5), &[], 0.5, &o).unwrap();
        let b = solve_forward(&DrivingMeasure::uniform(0.05, 10), &[], 0.5, &o).unwrap();
        assert_eq!(caratheodory_distance(&a, &a, 0.5, &[0.5]).unwrap(), 0.0);
        assert!(caratheodory_distance(&a, &b, 0.5, &[0.2, 0.5]).unwrap() < 1e-8);
        assert!(caratheodory_distance(&a, &b, 1.0, &[0.5]).is_err());
    }

    #[test]
    fn smoothed_atoms_converge() {
        let o = SolverOptions::default();
        let atom = DrivingMeasure::atoms(0.1, &[0.0; 3]).unwrap();
        let base = solve_forward(&atom, &[], 0.3, &o).unwrap();
        let m = 1024;
        let mut prev = f64::INFINITY;
        for w in [0.4, 0.2, 0.1, 0.05] {
            let dens: Vec<f64> = (0..m)
                .map(|j| {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    let d = th.min(2.0 * PI - th);
                    (-(d * d) / (2.0 * w * w)).exp()
                })
                .collect();
            let tot: f64 = dens.iter().sum();
            let nu = DrivingMeasure::new(0.1, vec![CircleMeasure::Density(dens.iter().map(|x| x / tot).collect()); 3]).unwrap();
            let tr = solve_forward(&nu, &[], 0.3, &o).unwrap();
            let d = caratheodory_distance(&base, &tr, 0.5, &[0.1, 0.3]).unwrap();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-2);
    }
}
