//! Discrete Gaussian free fields on the n×n grid.
//!
//! The Dirichlet energy is (2π)^{-1} Σ_edges (f(x) − f(y))², so the covariance
//! is 2π L^{-1} with L the grid Laplacian (4 on the diagonal). In this
//! normalization circle averages have variance log(1/ε) + O(1). Site (i, j)
//! sits at the point z = j + i·𝑖 and has index i·n + j.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::transform::{apply_2d, Dct3, Dst1};
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Normalization constant: covariance = NORMALIZATION · L^{-1}.
pub const NORMALIZATION: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Zero on the outer ring of sites.
    Zero,
    /// Neumann Laplacian on all sites, field of mean zero.
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub n: usize,
    pub bc: Boundary,
    pub normalization: f64,
    pub seed: u64,
    /// Row-major values.
    pub values: Vec<f64>,
}

impl LatticeField {
    pub fn constant(n: usize, c: f64) -> Self {
        Self { n, bc: Boundary::Free, normalization: NORMALIZATION, seed: 0, values: vec![c; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..n * n).map(|k| f((k % n) as f64, (k / n) as f64)).collect();
        Self { n, bc: Boundary::Free, normalization: NORMALIZATION, seed: 0, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Bilinear interpolation at z = x + i·y.
    pub fn interpolate(&self, z: C64) -> f64 {
        bilinear(self.n, z).iter().map(|&(k, w)| w * self.values[k]).sum()
    }
}

fn bilinear(n: usize, z: C64) -> [(usize, f64); 4] {
    let hi = (n - 1) as f64;
    let x = z.re.clamp(0.0, hi);
    let y = z.im.clamp(0.0, hi);
    let j0 = (x.floor() as usize).min(n.saturating_sub(2));
    let i0 = (y.floor() as usize).min(n.saturating_sub(2));
    let fx = x - j0 as f64;
    let fy = y - i0 as f64;
    [
        (i0 * n + j0, (1.0 - fx) * (1.0 - fy)),
        (i0 * n + j0 + 1, fx * (1.0 - fy)),
        ((i0 + 1) * n + j0, (1.0 - fx) * fy),
        ((i0 + 1) * n + j0 + 1, fx * fy),
    ]
}

/// Eigenvalue 4 − 2cos(πa/p) − 2cos(πb/p).
fn lambda(a: usize, b: usize, p: usize) -> f64 {
    let p = p as f64;
    4.0 - 2.0 * (PI * a as f64 / p).cos() - 2.0 * (PI * b as f64 / p).cos()
}

/// Samples the discrete GFF on the n×n grid.
pub fn sample_dgff<R: Rng + ?Sized>(n: usize, bc: Boundary, seed: u64, rng: &mut R) -> Result<LatticeField> {
    if n < 2 {
        return invalid("grid size must be at least 2");
    }
    let mut values = vec![0.0; n * n];
    match bc {
        Boundary::Zero => {
            let m = n - 2;
            if m > 0 {
                let scale = 2.0 / (m + 1) as f64;
                let mut c = vec![0.0; m * m];
                for a in 0..m {
                    for b in 0..m {
                        let z: f64 = rng.sample(StandardNormal);
                        c[a * m + b] = z * scale * (NORMALIZATION / lambda(a + 1, b + 1, m + 1)).sqrt();
                    }
                }
                let t = Dst1::new(m);
                apply_2d(&mut c, m, |x, buf| t.apply(x, buf));
                for i in 0..m {
                    values[(i + 1) * n + 1..(i + 1) * n + 1 + m].copy_from_slice(&c[i * m..(i + 1) * m]);
                }
            }
        }
        Boundary::Free => {
            let w = |a: usize| if a == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            for a in 0..n {
                for b in 0..n {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let z: f64 = rng.sample(StandardNormal);
                    values[a * n + b] = z * w(a) * w(b) * (NORMALIZATION / lambda(a, b, n)).sqrt();
                }
            }
            let t = Dct3::new(n);
            apply_2d(&mut values, n, |x, buf| t.apply(x, buf));
        }
    }
    Ok(LatticeField { n, bc, normalization: NORMALIZATION, seed, values })
}

/// Seeded convenience wrapper around [`sample_dgff`].
pub fn sample_dgff_seeded(n: usize, bc: Boundary, seed: u64) -> Result<LatticeField> {
    sample_dgff(n, bc, seed, &mut crate::rng::from_seed(seed))
}

/// Sparse site weights of the circle average around z of radius ε
/// (grid units). Boundary centers use the part of the circle inside the grid.
pub fn circle_average_weights(n: usize, z: C64, eps: f64) -> Result<Vec<(usize, f64)>> {
    if !(eps > 0.0) {
        return invalid("radius must be positive");
    }
    let hi = (n - 1) as f64;
    let tol = 1e-9;
    let on_boundary = z.re.abs() < tol || z.im.abs() < tol || (z.re - hi).abs() < tol || (z.im - hi).abs() < tol;
    let k = ((2.0 * PI * eps).ceil() as usize).max(16);
    let mut acc = std::collections::BTreeMap::new();
    let mut used = 0usize;
    for s in 0..k {
        let p = z + C64::from_polar(eps, 2.0 * PI * s as f64 / k as f64);
        let inside = p.re >= -tol && p.im >= -tol && p.re <= hi + tol && p.im <= hi + tol;
        if !inside {
            if on_boundary {
                continue;
            }
            return Err(Error::OutOfDomain(format!("circle of radius {eps} around {z} leaves the grid")));
        }
        used += 1;
        for (site, w) in bilinear(n, p) {
            if w != 0.0 {
                *acc.entry(site).or_insert(0.0) += w;
            }
        }
    }
    if used == 0 {
        return Err(Error::OutOfDomain("no part of the circle lies in the grid".into()));
    }
    Ok(acc.into_iter().map(|(s, w)| (s, w / used as f64)).collect())
}

/// Mean of bilinearly interpolated values on ∂B(z, ε).
pub fn circle_average(field: &LatticeField, z: C64, eps: f64) -> Result<f64> {
    Ok(circle_average_weights(field.n, z, eps)?.iter().map(|&(s, w)| w * field.values[s]).sum())
}

/// Solves L u = v on the interior of the zero-boundary n×n grid (v given on all
/// sites, boundary entries ignored) by the sine eigenbasis.
pub fn dirichlet_solve(n: usize, v: &[f64]) -> Vec<f64> {
    let m = n.saturating_sub(2);
    let mut out = vec![0.0; n * n];
    if m == 0 {
        return out;
    }
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        c[i * m..(i + 1) * m].copy_from_slice(&v[(i + 1) * n + 1..(i + 1) * n + 1 + m]);
    }
    let t = Dst1::new(m);
    apply_2d(&mut c, m, |x, buf| t.apply(x, buf));
    let scale = (2.0 / (m + 1) as f64).powi(2);
    for a in 0..m {
        for b in 0..m {
            c[a * m + b] *= scale / lambda(a + 1, b + 1, m + 1);
        }
    }
    apply_2d(&mut c, m, |x, buf| t.apply(x, buf));
    for i in 0..m {
        out[(i + 1) * n + 1..(i + 1) * n + 1 + m].copy_from_slice(&c[i * m..(i + 1) * m]);
    }
    out
}

/// Exact variance of the circle average of the zero-boundary field.
pub fn circle_average_variance(n: usize, z: C64, eps: f64) -> Result<f64> {
    let w = circle_average_weights(n, z, eps)?;
    let mut v = vec![0.0; n * n];
    for &(s, x) in &w {
        v[s] = x;
    }
    let u = dirichlet_solve(n, &v);
    Ok(NORMALIZATION * w.iter().map(|&(s, x)| x * u[s]).sum::<f64>())
}

/// Least-squares slope of var(h_ε(z)) against log(1/ε) over the given radii.
pub fn circle_average_slope(n: usize, z: C64, radii: &[f64]) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &e in radii {
        xs.push(-e.ln());
        ys.push(circle_average_variance(n, z, e)?);
    }
    Ok(crate::stats::linear_fit(&xs, &ys).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dirichlet_green_dense;
    use crate::rng;
    use rayon::prelude::*;

    #[test]
    fn tiny_grid_is_zero() {
        for seed in 0..5 {
            let f = sample_dgff_seeded(2, Boundary::Zero, seed).unwrap();
            assert!(f.values.iter().all(|&v| v == 0.0));
        }
        assert!(sample_dgff_seeded(1, Boundary::Zero, 0).is_err());
    }

    #[test]
    fn zero_boundary_is_exact_and_deterministic() {
        let f = sample_dgff_seeded(17, Boundary::Zero, 3).unwrap();
        for k in 0..17 {
            assert_eq!(f.get(0, k), 0.0);
            assert_eq!(f.get(16, k), 0.0);
            assert_eq!(f.get(k, 0), 0.0);
            assert_eq!(f.get(k, 16), 0.0);
        }
        assert_eq!(f, sample_dgff_seeded(17, Boundary::Zero, 3).unwrap());
    }

    #[test]
    fn free_field_has_mean_zero() {
        let f = sample_dgff_seeded(20, Boundary::Free, 1).unwrap();
        let mean: f64 = f.values.iter().sum::<f64>() / 400.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn dirichlet_solve_matches_dense() {
        let n = 9;
        let g = dirichlet_green_dense(n);
        let v: Vec<f64> = (0..n * n).map(|k| ((k * 7) % 5) as f64 - 2.0).collect();
        let u = dirichlet_solve(n, &v);
        for a in 0..n * n {
            let direct: f64 = (0..n * n).map(|b| g[(a, b)] * v[b]).sum::<f64>() / NORMALIZATION;
            assert!((direct - u[a]).abs() < 1e-10);
        }
    }

    #[test]
    fn free_covariance_matches_pseudoinverse() {
        // Empirical covariance of two sites against the dense Neumann oracle.
        let n = 8;
        let g = crate::oracle::neumann_green_dense(n);
        let runs = 20_000;
        let (a, b) = (9, 30);
        let pairs: Vec<(f64, f64)> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let f = sample_dgff(n, Boundary::Free, 0, &mut rng::stream(17, r as u64)).unwrap();
                (f.values[a], f.values[b])
            })
            .collect();
        let caa = pairs.iter().map(|p| p.0 * p.0).sum::<f64>() / runs as f64;
        let cab = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / runs as f64;
        assert!((caa / g[(a, a)] - 1.0).abs() < 0.05, "{caa} {}", g[(a, a)]);
        assert!((cab - g[(a, b)]).abs() < 0.05 * g[(a, a)], "{cab} {}", g[(a, b)]);
    }

    #[test]
    fn center_variance_matches_dense_green() {
        let n = 33;
        let g = dirichlet_green_dense(n);
        let c = 16 * n + 16;
        let runs = 10_000;
        let xs: Vec<f64> = (0..runs)
            .into_par_iter()
            .map(|r| sample_dgff(n, Boundary::Zero, 0, &mut rng::stream(2, r as u64)).unwrap().values[c])
            .collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / runs as f64;
        assert!((var / g[(c, c)] - 1.0).abs() < 0.05, "{var} vs {}", g[(c, c)]);
    }

    #[test]
    fn constant_and_linear_averages() {
        let c = LatticeField::constant(20, 2.5);
        assert!((circle_average(&c, C64::new(9.3, 10.1), 4.2).unwrap() - 2.5).abs() < 1e-12);
        let f = LatticeField::from_fn(33, |x, _| x);
        let v = circle_average(&f, C64::new(16.0, 16.0), 8.0).unwrap();
        assert!((v - 16.0).abs() < 1e-12);
        assert!(circle_average(&f, C64::new(3.0, 16.0), 8.0).is_err());
        // Boundary center: half circle.
        let v = circle_average(&c, C64::new(0.0, 16.0), 5.0).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn circle_average_increment_variance() {
        let n = 33;
        let z = C64::new(16.0, 16.0);
        let (e1, e2) = (8.0, 4.0);
        // Exact variance of the increment from the dense Green's function.
        let g = dirichlet_green_dense(n);
        let mut v = vec![0.0; n * n];
        for (s, w) in circle_average_weights(n, z, e1).unwrap() {
            v[s] += w;
        }
        for (s, w) in circle_average_weights(n, z, e2).unwrap() {
            v[s] -= w;
        }
        let mut exact = 0.0;
        for a in 0..n * n {
            if v[a] != 0.0 {
                for b in 0..n * n {
                    exact += v[a] * g[(a, b)] * v[b];
                }
            }
        }
        assert!((exact / 2f64.ln() - 1.0).abs() < 0.1, "{exact}");
        let runs = 10_000;
        let diffs: Vec<f64> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let f = sample_dgff(n, Boundary::Zero, 0, &mut rng::stream(5, r as u64)).unwrap();
                circle_average(&f, z, e1).unwrap() - circle_average(&f, z, e2).unwrap()
            })
            .collect();
        let var = diffs.iter().map(|d| d * d).sum::<f64>() / runs as f64;
        assert!((var / exact - 1.0).abs() < 0.1, "{var} vs {exact}");
    }

    #[test]
    fn slope_on_medium_grid() {
        let n = 257;
        let z = C64::new(128.0, 128.0);
        let s = circle_average_slope(n, z, &[2.0, 4.0, 8.0, 16.0, 32.0]).unwrap();
        assert!((s - 1.0).abs() < 0.1, "{s}");
    }
}
