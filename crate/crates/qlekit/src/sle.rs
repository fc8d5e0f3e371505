//! Radial SLE_κ, reverse radial SLE_κ(ρ), and the coupling functionals.
//!
//! The driving angle W is advanced by Euler–Maruyama and interpolated
//! linearly inside each step, so the flow itself is an ODE with continuous
//! driving and is integrated by RK4. Reverse runs store the centered maps
//! f_t = e^{−iW_t} g_t where g is the uncentered reverse flow started at the
//! identity with W_0 = 0.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{green_disk, GreenKind};
use crate::loewner::{phi, psi, Direction, DrivingMeasure};
use crate::stats::mean_var;
use crate::{rng, C64};

/// (𝒫, 𝒫̄, ∂_θ𝒫̄, 𝒫*) at (z, u): 𝒫 + i𝒫̄ = Ψ(u, z) and 𝒫* = 𝒫 − 1.
pub fn poisson_kernels(z: C64, u: C64) -> (f64, f64, f64, f64) {
    let p = psi(u, z);
    let d = u - z;
    (p.re, p.im, (-2.0 * z * u / (d * d)).re, p.re - 1.0)
}

/// Q = 2/γ + γ/2 with γ = min(√κ, √(16/κ)); equals 2/√κ + √κ/2 for every κ.
pub fn q_of_kappa(kappa: f64) -> f64 {
    let g = kappa.sqrt().min((16.0 / kappa).sqrt());
    2.0 / g + g / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SleStatus {
    Completed,
    /// Stopped at this time because the force point came within the collision
    /// distance of the driving point.
    Truncated(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcePoint {
    pub rho: f64,
    pub v0: C64,
    /// Centered force point Z_t = e^{−iW_t} V_t on the time grid.
    pub z: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SleRun {
    pub kappa: f64,
    pub dt: f64,
    pub direction: Direction,
    pub times: Vec<f64>,
    /// Brownian increments, one per step.
    pub db: Vec<f64>,
    /// Driving angles W_t on the grid.
    pub w: Vec<f64>,
    pub points: Vec<C64>,
    /// maps[k][j]: f_{t_k}(z_j) (reverse, centered) or g_{t_k}(z_j) (forward).
    pub maps: Vec<Vec<C64>>,
    pub derivs: Vec<Vec<C64>>,
    /// Forward runs only.
    pub swallowed: Vec<Option<f64>>,
    pub force: Option<ForcePoint>,
    pub status: SleStatus,
}

impl SleRun {
    /// Piecewise-constant approximation of the driving: one atom per step at
    /// the mean angle over the step.
    pub fn driving_measure(&self) -> Result<DrivingMeasure> {
        let mid: Vec<f64> = self.w.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        DrivingMeasure::atoms(self.dt, &mid)
    }

    fn time_index(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round() as usize;
        if k >= self.times.len() || (self.times[k] - t).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!("time {t} is not on the run's grid")));
        }
        Ok(k)
    }
}

/// Distance |Z − 1| at which a force-point run is stopped.
pub const COLLISION_DISTANCE: f64 = 0.05;

fn rk4_step(sign: f64, a: f64, b: f64, h: f64, g: C64, dg: C64) -> (C64, C64) {
    let ua = C64::from_polar(1.0, a);
    let um = C64::from_polar(1.0, 0.5 * (a + b));
    let ub = C64::from_polar(1.0, b);
    let f = |u: C64, g: C64, dg: C64| {
        let d = u - g;
        let s = (u + g) / d;
        (sign * g * s, sign * (s + g * 2.0 * u / (d * d)) * dg)
    };
    let (k1, l1) = f(ua, g, dg);
    let (k2, l2) = f(um, g + 0.5 * h * k1, dg + 0.5 * h * l1);
    let (k3, l3) = f(um, g + 0.5 * h * k2, dg + 0.5 * h * l2);
    let (k4, l4) = f(ub, g + h * k3, dg + h * l3);
    (g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), dg + h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4))
}

/// Uncentered Loewner flow along a driving-angle path given on a grid of
/// step `dt` (linear interpolation between grid values). Returns the images
/// and derivatives at every grid time.
pub fn flow_along_path(direction: Direction, angles: &[f64], dt: f64, points: &[C64]) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    if angles.is_empty() || !(dt > 0.0) {
        return invalid("need a nonempty path and a positive step");
    }
    if points.iter().any(|z| !(z.norm() < 1.0)) {
        return Err(Error::OutOfDomain("points must lie in the open disk".into()));
    }
    let sign = if direction == Direction::Forward { 1.0 } else { -1.0 };
    let mut g = points.to_vec();
    let mut dg = vec![C64::new(1.0, 0.0); points.len()];
    let mut maps = vec![g.clone()];
    let mut derivs = vec![dg.clone()];
    for w in angles.windows(2) {
        for j in 0..g.len() {
            (g[j], dg[j]) = rk4_step(sign, w[0], w[1], dt, g[j], dg[j]);
        }
        maps.push(g.clone());
        derivs.push(dg.clone());
    }
    Ok((maps, derivs))
}

/// Samples a radial SLE_κ run (or reverse SLE_κ(ρ) when `rho` is given) on
/// the grid 0, dt, …, T.
#[allow(clippy::too_many_arguments)]
pub fn sample_radial_sle(
    kappa: f64,
    t_end: f64,
    dt: f64,
    points: &[C64],
    seed: u64,
    direction: Direction,
    rho: Option<f64>,
    v0: Option<C64>,
) -> Result<SleRun> {
    let mut r = rng::from_seed(seed);
    sample_with(kappa, t_end, dt, points, &mut r, direction, rho, v0)
}

#[allow(clippy::too_many_arguments)]
fn sample_with<R: Rng + ?Sized>(
    kappa: f64,
    t_end: f64,
    dt: f64,
    points: &[C64],
    r: &mut R,
    direction: Direction,
    rho: Option<f64>,
    v0: Option<C64>,
) -> Result<SleRun> {
    if !(kappa > 0.0) || !(dt > 0.0) || !(t_end >= 0.0) {
        return invalid("need κ > 0, dt > 0 and T ≥ 0");
    }
    if points.iter().any(|z| !(z.norm() < 1.0)) {
        return Err(Error::OutOfDomain("points must lie in the open disk".into()));
    }
    let force = match (rho, direction) {
        (None, _) => None,
        (Some(_), Direction::Forward) => return invalid("the ρ-variant is a reverse flow"),
        (Some(rho), Direction::Reverse) => {
            let v = v0.unwrap_or(C64::new(-1.0, 0.0));
            if (v.norm() - 1.0).abs() > 1e-12 || (v - 1.0).norm() <= COLLISION_DISTANCE {
                return invalid("v0 must lie on the circle away from 1");
            }
            Some(ForcePoint { rho, v0: v, z: vec![v] })
        }
    };
    let n = (t_end / dt).round() as usize;
    if ((n as f64) * dt - t_end).abs() > 1e-9 {
        return invalid("T must be a multiple of dt");
    }
    let sign = if direction == Direction::Forward { 1.0 } else { -1.0 };
    let sk = kappa.sqrt();
    let mut run = SleRun {
        kappa,
        dt,
        direction,
        times: vec![0.0],
        db: Vec::with_capacity(n),
        w: vec![0.0],
        points: points.to_vec(),
        maps: vec![points.to_vec()],
        derivs: vec![vec![C64::new(1.0, 0.0); points.len()]],
        swallowed: vec![None; points.len()],
        force,
        status: SleStatus::Completed,
    };
    let mut g = points.to_vec();
    let mut dg = vec![C64::new(1.0, 0.0); points.len()];
    let mut v = run.force.as_ref().map(|f| f.v0);
    for k in 0..n {
        let b: f64 = r.sample::<f64, _>(StandardNormal) * dt.sqrt();
        let a = run.w[k];
        let mut next = a + sk * b;
        if let (Some(f), Some(vv)) = (&run.force, v) {
            let u = C64::from_polar(1.0, a);
            next += (C64::new(0.0, -0.5 * f.rho) * psi(vv, u)).re * dt;
        }
        for j in 0..g.len() {
            if run.swallowed[j].is_some() {
                continue;
            }
            let (ng, nd) = rk4_step(sign, a, next, dt, g[j], dg[j]);
            if sign > 0.0 && !(ng.norm() < 1.0 - 1e-9 && nd.norm().is_finite()) {
                run.swallowed[j] = Some(k as f64 * dt);
                continue;
            }
            g[j] = ng;
            dg[j] = nd;
        }
        if let Some(vv) = v {
            let (nv, _) = rk4_step(sign, a, next, dt, vv, C64::new(1.0, 0.0));
            v = Some(nv / nv.norm());
        }
        run.db.push(b);
        run.w.push(next);
        run.times.push((k + 1) as f64 * dt);
        let c = match direction {
            Direction::Forward => C64::new(1.0, 0.0),
            Direction::Reverse => C64::from_polar(1.0, -next),
        };
        run.maps.push(g.iter().map(|x| x * c).collect());
        run.derivs.push(dg.iter().map(|x| x * c).collect());
        if let (Some(f), Some(vv)) = (&mut run.force, v) {
            let z = vv * c;
            f.z.push(z);
            if (z - 1.0).norm() < COLLISION_DISTANCE {
                run.status = SleStatus::Truncated((k + 1) as f64 * dt);
                break;
            }
        }
    }
    Ok(run)
}

fn h_value(kappa: f64, f: C64, df: C64, force: Option<(f64, C64)>) -> Result<f64> {
    if f.norm() == 0.0 || (f - 1.0).norm() == 0.0 || df.norm() == 0.0 {
        return Err(Error::SingularArgument("f_t(z) ∈ {0, 1} or f_t'(z) = 0".into()));
    }
    let sk = kappa.sqrt();
    let rho = force.map_or(0.0, |x| x.0);
    let mut h = 2.0 / sk * (f - 1.0).norm().ln() - (kappa + 6.0 - rho) / (2.0 * sk) * f.norm().ln()
        + q_of_kappa(kappa) * df.norm().ln();
    if let Some((rho, z)) = force {
        if (f - z).norm() == 0.0 {
            return Err(Error::SingularArgument("f_t(z) = Z_t".into()));
        }
        h -= rho / sk * (f - z).norm().ln();
    }
    Ok(h)
}

/// 𝔥_t(z) of a reverse run; z must be one of the tracked points and t a grid
/// time. The ρ-variant uses the centered force point Z_t.
pub fn coupling_h(run: &SleRun, z: C64, t: f64) -> Result<f64> {
    if run.direction != Direction::Reverse {
        return invalid("the coupling functional is defined for reverse runs");
    }
    let j = run
        .points
        .iter()
        .position(|p| (p - z).norm() < 1e-14)
        .ok_or_else(|| Error::InvalidArgument(format!("{z} is not a tracked point")))?;
    let k = run.time_index(t)?;
    let force = run.force.as_ref().map(|f| (f.rho, f.z[k]));
    h_value(run.kappa, run.maps[k][j], run.derivs[k][j], force)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoStats {
    pub runs: usize,
    /// Runs stopped early at the force-point collision.
    pub truncated: usize,
    /// Empirical mean of 𝔥_τ(z) − 𝔥_0(z).
    pub mean: f64,
    pub mean_se: f64,
    /// Mean of the predicted drift integral.
    pub predicted_drift: f64,
    pub variance: f64,
    pub variance_se: f64,
    /// Mean of ∫_0^τ 𝒫̄(1, f_s(z))² ds.
    pub predicted_variance: f64,
    pub predicted_variance_se: f64,
}

impl ItoStats {
    /// Drift within `k` standard errors of the prediction.
    pub fn drift_ok(&self, k: f64) -> bool {
        (self.mean - self.predicted_drift).abs() <= k * self.mean_se
    }

    /// Relative variance error.
    pub fn variance_rel_err(&self) -> f64 {
        (self.variance / self.predicted_variance - 1.0).abs()
    }
}

/// Monte Carlo check of the drift and quadratic variation of 𝔥_t(z). The
/// ρ-variant starts its force point at −1 and stops at the collision
/// distance, which keeps the stopped functional a semimartingale with the
/// same drift density.
pub fn verify_fh_ito(kappa: f64, rho: Option<f64>, z: C64, t_end: f64, dt: f64, n_runs: usize, seed: u64) -> Result<ItoStats> {
    if z.norm() > 0.8 {
        return invalid("|z| must be at most 0.8");
    }
    if n_runs < 2 {
        return invalid("need at least two runs");
    }
    let sk = kappa.sqrt();
    let out: Vec<(f64, f64, f64, bool)> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let run = sample_with(kappa, t_end, dt, &[z], &mut r, Direction::Reverse, rho, rho.map(|_| C64::new(-1.0, 0.0)))?;
            let last = run.times.len() - 1;
            let h = |k: usize| h_value(kappa, run.maps[k][0], run.derivs[k][0], run.force.as_ref().map(|f| (f.rho, f.z[k])));
            let dh = h(last)? - h(0)?;
            // Trapezoid rule for ∫𝒫̄² and for the drift density.
            let mut qv = 0.0;
            let mut drift = 0.0;
            for k in 0..last {
                let p = |k: usize| psi(C64::new(1.0, 0.0), run.maps[k][0]).im.powi(2);
                qv += 0.5 * dt * (p(k) + p(k + 1));
                let d = |k: usize| match &run.force {
                    None => 1.0 / sk,
                    Some(f) => {
                        let a = 0.5 * f.rho * phi(f.z[k], C64::new(1.0, 0.0));
                        -((a - 1.0) * (2.0 - f.rho) / (2.0 * sk)).re
                    }
                };
                drift += 0.5 * dt * (d(k) + d(k + 1));
            }
            Ok((dh, drift, qv, matches!(run.status, SleStatus::Truncated(_))))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = out.iter().map(|x| x.0).collect();
    let drifts: Vec<f64> = out.iter().map(|x| x.1).collect();
    let qvs: Vec<f64> = out.iter().map(|x| x.2).collect();
    let n = n_runs as f64;
    let (m, v) = mean_var(&xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let (pd, _) = mean_var(&drifts);
    let (pq, pqv) = mean_var(&qvs);
    Ok(ItoStats {
        runs: n_runs,
        truncated: out.iter().filter(|x| x.3).count(),
        mean: m,
        mean_se: (v / n).sqrt(),
        predicted_drift: pd,
        variance: v,
        variance_se: ((m4 - v * v) / n).max(0.0).sqrt(),
        predicted_variance: pq,
        predicted_variance_se: (pqv / n).sqrt(),
    })
}

/// Finite-difference check of the Green's-function flow along the reverse
/// flow driven by the deterministic angle function `driving`. Dirichlet:
/// dG_t(z,w)/dt = 𝒫(ψ_t(z), e^{iW_t}) 𝒫(ψ_t(w), e^{iW_t}). Neumann: the
/// cross term −𝒫̄(1,f_t(y))𝒫̄(1,f_t(z)) after pairing y ∈ {z, z/2} and
/// {w, w/2} with weights (1, −1), which cancels the single-point terms.
/// Returns the maximum absolute deviation over interior grid times.
pub fn verify_green_flow(kind: GreenKind, driving: impl Fn(f64) -> f64, z: C64, w: C64, t_end: f64, dt: f64) -> Result<f64> {
    if z == w {
        return Err(Error::SingularArgument("z = w".into()));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return invalid("need dt > 0 and T ≥ 0");
    }
    let n = (t_end / dt).round() as usize;
    if n < 2 {
        return Ok(0.0);
    }
    let angles: Vec<f64> = (0..=n).map(|k| driving(k as f64 * dt)).collect();
    let (ys, zs, wy, wz): (Vec<C64>, Vec<C64>, Vec<f64>, Vec<f64>) = match kind {
        GreenKind::Dirichlet => (vec![z], vec![w], vec![1.0], vec![1.0]),
        GreenKind::Neumann => (vec![z, 0.5 * z], vec![w, 0.5 * w], vec![1.0, -1.0], vec![1.0, -1.0]),
    };
    let mut pts = ys.clone();
    pts.extend(&zs);
    // The flow of a deterministic driving is evaluated at the exact midpoint
    // angles rather than the linear interpolant.
    let sub: Vec<f64> = (0..=2 * n).map(|k| driving(k as f64 * dt / 2.0)).collect();
    let mut maps = vec![pts.clone()];
    let mut g = pts.clone();
    for k in 0..n {
        for x in g.iter_mut() {
            *x = rk4_exact(sub[2 * k], sub[2 * k + 1], sub[2 * k + 2], dt, *x);
        }
        maps.push(g.clone());
    }
    let ny = ys.len();
    let paired = |k: usize| -> Result<f64> {
        let mut s = 0.0;
        for (a, &ca) in wy.iter().enumerate() {
            for (b, &cb) in wz.iter().enumerate() {
                s += ca * cb * green_disk(maps[k][a], maps[k][ny + b], kind)?;
            }
        }
        Ok(s)
    };
    let predicted = |k: usize| -> f64 {
        let u = C64::from_polar(1.0, angles[k]);
        match kind {
            GreenKind::Dirichlet => poisson_kernels(maps[k][0], u).0 * poisson_kernels(maps[k][1], u).0,
            GreenKind::Neumann => {
                let pb = |x: C64| poisson_kernels(x * u.conj(), C64::new(1.0, 0.0)).1;
                let sy: f64 = wy.iter().enumerate().map(|(a, c)| c * pb(maps[k][a])).sum();
                let sz: f64 = wz.iter().enumerate().map(|(b, c)| c * pb(maps[k][ny + b])).sum();
                -sy * sz
            }
        }
    };
    let mut dev: f64 = 0.0;
    let mut prev = paired(0)?;
    let mut cur = paired(1)?;
    for k in 1..n {
        let next = paired(k + 1)?;
        dev = dev.max(((next - prev) / (2.0 * dt) - predicted(k)).abs());
        prev = cur;
        cur = next;
    }
    Ok(dev)
}

fn rk4_exact(a: f64, m: f64, b: f64, h: f64, g: C64) -> C64 {
    let f = |t: f64, g: C64| -phi(C64::from_polar(1.0, t), g);
    let k1 = f(a, g);
    let k2 = f(m, g + 0.5 * h * k1);
    let k3 = f(m, g + 0.5 * h * k2);
    let k4 = f(b, g + h * k3);
    g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::{caratheodory_distance, solve_forward, SolverOptions};
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn kernel_examples() {
        let (p, pb, dp, ps) = poisson_kernels(c(0.0, 0.0), C64::from_polar(1.0, 0.7));
        assert_eq!((p, pb, dp, ps), (1.0, 0.0, 0.0, 0.0));
        let (p, pb, dp, ps) = poisson_kernels(c(0.5, 0.0), c(1.0, 0.0));
        assert!((p - 3.0).abs() < 1e-15 && pb == 0.0 && ps == 2.0);
        assert!((dp + 4.0).abs() < 1e-12);
    }

    #[test]
    fn theta_derivative_matches_finite_difference() {
        let mut r = rng::from_seed(3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let z = C64::from_polar(r.gen_range(0.0..0.9), r.gen_range(0.0..2.0 * PI));
            let th: f64 = r.gen_range(0.0..2.0 * PI);
            let e = 1e-5;
            let fd = (poisson_kernels(z, C64::from_polar(1.0, th + e)).1 - poisson_kernels(z, C64::from_polar(1.0, th - e)).1) / (2.0 * e);
            let d = poisson_kernels(z, C64::from_polar(1.0, th)).2;
            worst = worst.max((fd - d).abs() / d.abs().max(1e-3));
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn q_values() {
        assert!((q_of_kappa(6.0) - 2.0412414523193148).abs() < 1e-12);
        for k in [0.5, 2.0, 4.0, 6.0, 8.0, 12.0] {
            assert!((q_of_kappa(k) - (2.0 / k.sqrt() + k.sqrt() / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_h_at_time_zero() {
        let run = sample_radial_sle(6.0, 0.01, 1e-3, &[c(0.5, 0.0), c(0.1, 0.3)], 1, Direction::Reverse, None, None).unwrap();
        let h = coupling_h(&run, c(0.5, 0.0), 0.0).unwrap();
        assert!((h - 1.1320).abs() < 1e-4, "{h}");
        let z = c(0.1, 0.3);
        let closed = 2.0 / 6f64.sqrt() * (z - 1.0).norm().ln() - 12.0 / (2.0 * 6f64.sqrt()) * z.norm().ln();
        assert!((coupling_h(&run, z, 0.0).unwrap() - closed).abs() < 1e-14);
        assert!(coupling_h(&run, c(0.2, 0.0), 0.0).is_err());
        assert!(coupling_h(&run, z, 0.0105).is_err());
    }

    #[test]
    fn reverse_capacity_and_derivative_consistency() {
        let e = 1e-5;
        let z = c(0.3, -0.2);
        let run = sample_radial_sle(6.0, 0.2, 1e-3, &[c(0.0, 0.0), z, z + e, z - e], 9, Direction::Reverse, None, None).unwrap();
        for (k, t) in run.times.iter().enumerate() {
            assert!((run.derivs[k][0].norm() - (-t).exp()).abs() < 1e-5);
            assert!(run.w.iter().all(|w| (C64::from_polar(1.0, *w).norm() - 1.0).abs() < 1e-15));
            let fd = (run.maps[k][2] - run.maps[k][3]) / (2.0 * e);
            assert!((fd - run.derivs[k][1]).norm() / run.derivs[k][1].norm() < 1e-4);
        }
    }

    #[test]
    fn zero_kappa_forward_matches_point_mass() {
        let run = sample_radial_sle(1e-14, 0.2, 1e-3, &[c(0.2, 0.1)], 2, Direction::Forward, None, None).unwrap();
        let o = SolverOptions::default();
        let a = solve_forward(&run.driving_measure().unwrap(), &[], 0.2, &o).unwrap();
        let b = solve_forward(&DrivingMeasure::atoms(0.2, &[0.0]).unwrap(), &[], 0.2, &o).unwrap();
        assert!(caratheodory_distance(&a, &b, 0.5, &[0.1, 0.2]).unwrap() < 1e-6);
        let g = run.maps.last().unwrap()[0];
        assert!((g - a.last().points.first().map_or(g, |x| x.g)).norm() < 1e-6);
    }

    #[test]
    fn forward_points_get_swallowed() {
        let pts: Vec<C64> = (0..12).map(|k| C64::from_polar(0.95, k as f64)).collect();
        let run = sample_radial_sle(4.0, 1.0, 1e-3, &pts, 4, Direction::Forward, None, None).unwrap();
        assert!(run.swallowed.iter().any(|s| s.is_some()));
        assert_eq!(run.status, SleStatus::Completed);
    }

    #[test]
    fn force_point_run_truncates_or_completes() {
        let run = sample_radial_sle(8.0, 1.0, 1e-3, &[c(0.2, 0.0)], 5, Direction::Reverse, Some(0.5), Some(c(0.0, 1.0))).unwrap();
        let fp = run.force.as_ref().unwrap();
        assert_eq!(fp.z.len(), run.times.len());
        assert!(fp.z.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        if let SleStatus::Truncated(t) = run.status {
            assert!((fp.z.last().unwrap() - 1.0).norm() < COLLISION_DISTANCE);
            assert!((run.times.last().unwrap() - t).abs() < 1e-12);
        }
        assert!(sample_radial_sle(8.0, 1.0, 1e-3, &[], 5, Direction::Reverse, Some(0.5), Some(c(1.0, 0.0))).is_err());
    }

    #[test]
    fn log_modulus_drift() {
        // log|f_t| has no martingale part: d log|f| = −𝒫(f, 1) dt.
        let z = c(0.3, 0.0);
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..400 {
            let run = sample_radial_sle(6.0, 0.1, 1e-4, &[z], 100 + i, Direction::Reverse, None, None).unwrap();
            lhs.push(run.maps.last().unwrap()[0].norm().ln() - z.norm().ln());
            let mut s = 0.0;
            for k in 0..run.times.len() - 1 {
                let p = |k: usize| poisson_kernels(run.maps[k][0], c(1.0, 0.0)).0;
                s -= 0.5 * 1e-4 * (p(k) + p(k + 1));
            }
            rhs.push(s);
        }
        let (m, v) = mean_var(&lhs);
        let (p, _) = mean_var(&rhs);
        assert!((m - p).abs() < 3.0 * (v / 400.0).sqrt() + 1e-6);
    }

    #[test]
    fn ito_small_sample() {
        let s = verify_fh_ito(6.0, None, c(0.3, 0.0), 0.1, 1e-3, 2000, 17).unwrap();
        assert!((s.predicted_drift - 0.1 / 6f64.sqrt()).abs() < 1e-12);
        assert!(s.drift_ok(4.0), "{s:?}");
        assert!(s.variance_rel_err() < 0.1, "{s:?}");
        assert!(verify_fh_ito(6.0, None, c(0.85, 0.0), 0.1, 1e-3, 10, 1).is_err());
    }

    #[test]
    fn green_flow_examples() {
        let d = verify_green_flow(GreenKind::Dirichlet, |_| 0.0, c(0.3, 0.0), c(0.0, -0.2), 0.05, 1e-4).unwrap();
        assert!(d < 1e-4, "{d}");
        let drive = |t: f64| 2.0 * t.sin() + 0.5;
        let d = verify_green_flow(GreenKind::Dirichlet, drive, c(0.3, 0.4), c(-0.5, 0.1), 0.3, 1e-3).unwrap();
        assert!(d < 1e-4, "{d}");
        let d = verify_green_flow(GreenKind::Neumann, drive, c(0.3, 0.4), c(-0.5, 0.1), 0.3, 1e-3).unwrap();
        assert!(d < 1e-4, "{d}");
        for kind in [GreenKind::Dirichlet, GreenKind::Neumann] {
            let a = verify_green_flow(kind, |_| 0.0, c(0.3, 0.2), c(-0.1, 0.4), 0.1, 1e-3).unwrap();
            let b = verify_green_flow(kind, |_| 0.0, c(0.3, -0.2), c(-0.1, -0.4), 0.1, 1e-3).unwrap();
            assert!((a - b).abs() < 1e-10);
            assert_eq!(verify_green_flow(kind, |_| 0.0, c(0.3, 0.2), c(-0.1, 0.4), 0.0, 1e-3).unwrap(), 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rotation_equivariance(shift in 0.0..std::f64::consts::TAU, x in -0.6..0.6f64, y in -0.6..0.6f64) {
            let z = c(x, y);
            let path: Vec<f64> = (0..101).map(|k| (k as f64 * 0.03).sin()).collect();
            let rot: Vec<f64> = path.iter().map(|a| a + shift).collect();
            let e = C64::from_polar(1.0, shift);
            let (m1, _) = flow_along_path(Direction::Reverse, &path, 1e-3, &[z]).unwrap();
            let (m2, _) = flow_along_path(Direction::Reverse, &rot, 1e-3, &[z * e]).unwrap();
            prop_assert!((m1[100][0] * e - m2[100][0]).norm() < 1e-12);
        }
    }
}
