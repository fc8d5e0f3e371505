//! Lattice γ-LQG area measures, their dyadic square decomposition, and
//! boundary measures on the unit circle.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::field::{HarmonicDiskField, LatticeField};
use crate::C64;

/// Normalized site masses e^{γh}/Σ e^{γh}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassGrid {
    pub n: usize,
    pub mass: Vec<f64>,
    pub total: f64,
}

pub fn lqg_mass(field: &LatticeField, gamma: f64) -> Result<MassGrid> {
    if !(0.0..=2.0).contains(&gamma) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} not in [0,2]")));
    }
    let max = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut mass: Vec<f64> = field.values.iter().map(|h| (gamma * (h - max)).exp()).collect();
    let s: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= s;
    }
    let total = mass.iter().sum();
    Ok(MassGrid { n: field.n, mass, total })
}

/// A dyadic square [x, x+size) × [y, y+size) in site units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub x: usize,
    pub y: usize,
    pub size: usize,
    pub depth: u32,
    pub mass: f64,
    /// Child indices (NW order: (x,y), (x+s,y), (x,y+s), (x+s,y+s)).
    pub children: Option<[usize; 4]>,
    /// A single-site square whose mass is still ≥ δ.
    pub floor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareTiling {
    pub delta: f64,
    /// Node 0 is the root.
    pub nodes: Vec<Square>,
}

impl SquareTiling {
    pub fn leaves(&self) -> impl Iterator<Item = &Square> {
        self.nodes.iter().filter(|s| s.children.is_none())
    }

    /// Sum of leaf masses, accumulated in the same tree order as the node
    /// masses, so it reproduces the root mass exactly.
    pub fn leaf_mass_sum(&self) -> f64 {
        fn rec(t: &SquareTiling, i: usize) -> f64 {
            match t.nodes[i].children {
                None => t.nodes[i].mass,
                Some([a, b, c, d]) => (rec(t, a) + rec(t, b)) + (rec(t, c) + rec(t, d)),
            }
        }
        rec(self, 0)
    }

    /// Checks the threshold rule: leaves below δ unless floor, split nodes ≥ δ.
    pub fn check(&self) -> bool {
        self.nodes.iter().all(|s| match s.children {
            None => s.mass < self.delta || (s.floor && s.size == 1),
            Some(ch) => s.mass >= self.delta && ch.iter().all(|&c| self.nodes[c].size * 2 == s.size),
        })
    }
}

/// Splits squares four ways until their mass drops below δ; single sites are
/// never split and are flagged as floor leaves if still heavy.
pub fn square_decompose(mass: &MassGrid, delta: f64) -> Result<SquareTiling> {
    let n = mass.n;
    if n == 0 || !n.is_power_of_two() {
        return invalid("grid size must be a power of two");
    }
    if !(delta > 0.0) {
        return invalid("delta must be positive");
    }
    // Mass pyramid: level l has (n >> l)² blocks of side 2^l.
    let mut levels = vec![mass.mass.clone()];
    let mut side = n;
    while side > 1 {
        let prev = levels.last().unwrap();
        let h = side / 2;
        let mut next = vec![0.0; h * h];
        for i in 0..h {
            for j in 0..h {
                let a = prev[2 * i * side + 2 * j];
                let b = prev[2 * i * side + 2 * j + 1];
                let c = prev[(2 * i + 1) * side + 2 * j];
                let d = prev[(2 * i + 1) * side + 2 * j + 1];
                next[i * h + j] = (a + b) + (c + d);
            }
        }
        levels.push(next);
        side = h;
    }
    let top = levels.len() - 1;
    let block = |level: usize, x: usize, y: usize| {
        let w = n >> level;
        levels[level][(y >> level) * w + (x >> level)]
    };
    let mut nodes = vec![Square { x: 0, y: 0, size: n, depth: 0, mass: block(top, 0, 0), children: None, floor: false }];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        let s = nodes[i].clone();
        if s.mass < delta {
            continue;
        }
        if s.size == 1 {
            nodes[i].floor = true;
            continue;
        }
        let h = s.size / 2;
        let level = h.trailing_zeros() as usize;
        let mut ch = [0usize; 4];
        for (k, (dx, dy)) in [(0, 0), (h, 0), (0, h), (h, h)].into_iter().enumerate() {
            let (x, y) = (s.x + dx, s.y + dy);
            ch[k] = nodes.len();
            nodes.push(Square { x, y, size: h, depth: s.depth + 1, mass: block(level, x, y), children: None, floor: false });
        }
        nodes[i].children = Some(ch);
        stack.extend(ch.iter().rev());
    }
    Ok(SquareTiling { delta, nodes })
}

/// A probability measure on the unit circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CircleMeasure {
    /// (angle, mass) pairs.
    Atoms(Vec<(f64, f64)>),
    /// Cell masses on the grid θ_j = 2πj/M; cell j is centered at θ_j and the
    /// mass is spread uniformly over it.
    Density(Vec<f64>),
}

impl CircleMeasure {
    pub fn uniform(m: usize) -> Self {
        Self::Density(vec![1.0 / m as f64; m])
    }

    pub fn total(&self) -> f64 {
        match self {
            Self::Atoms(a) => a.iter().map(|x| x.1).sum(),
            Self::Density(w) => w.iter().sum(),
        }
    }

    /// Fourier coefficient ∫ e^{−ikθ} dν (cells treated as point masses at
    /// their centers times the cell-averaging factor).
    pub fn fourier(&self, k: i64) -> C64 {
        match self {
            Self::Atoms(a) => a.iter().map(|&(t, w)| C64::from_polar(w, -(k as f64) * t)).sum(),
            Self::Density(w) => {
                let m = w.len();
                let h = 2.0 * PI / m as f64;
                let sinc = if k == 0 { 1.0 } else { (k as f64 * h / 2.0).sin() / (k as f64 * h / 2.0) };
                let s: C64 = w.iter().enumerate().map(|(j, &x)| C64::from_polar(x, -(k as f64) * h * j as f64)).sum();
                s * sinc
            }
        }
    }
}

/// Boundary measure ∝ exp(a·𝔥^n(e^{iθ})) on an M-point grid, where 𝔥^n keeps
/// the series up to degree n plus the field's singularities. Singularities on
/// the circle that fall on a grid angle are integrated over their cell.
/// With `compensate`, the factor exp(−a² var 𝔥^n(u)) is applied pointwise.
pub fn boundary_measure_truncated(
    field: &HarmonicDiskField,
    a: f64,
    n: usize,
    m: usize,
    compensate: bool,
) -> Result<CircleMeasure> {
    if n > field.degree() {
        return invalid("truncation degree exceeds field degree");
    }
    if m < 64 {
        return invalid("grid resolution must be at least 64");
    }
    let h = 2.0 * PI / m as f64;
    let mut logw = vec![0.0; m];
    let mut cell_factor = vec![1.0; m];
    for (j, lw) in logw.iter_mut().enumerate() {
        let u = C64::from_polar(1.0, h * j as f64);
        let mut p = C64::new(1.0, 0.0);
        let mut s = 0.0;
        for k in 1..=n {
            p *= u;
            s += field.cos[k - 1] * p.re + field.sin[k - 1] * p.im;
        }
        *lw = a * s;
    }
    for &(g, x) in &field.singularities {
        let p = a * g;
        let on_circle = (x.norm() - 1.0).abs() < 1e-12;
        let jx = if on_circle {
            let t = x.arg().rem_euclid(2.0 * PI) / h;
            let r = t.round();
            ((t - r).abs() < 1e-9).then_some(r as usize % m)
        } else {
            None
        };
        if jx.is_some() && p <= -1.0 {
            return Err(Error::NonIntegrableAtom(format!("exponent {p} at grid angle")));
        }
        for (j, lw) in logw.iter_mut().enumerate() {
            if Some(j) == jx {
                // Cell average of |φ|^p over [−h/2, h/2].
                cell_factor[j] *= (h / 2.0).powf(p) / (p + 1.0);
            } else {
                *lw += p * (C64::from_polar(1.0, h * j as f64) - x).norm().ln();
            }
        }
    }
    if compensate {
        let var: f64 = (1..=n).map(|k| 2.0 / k as f64).sum();
        for lw in &mut logw {
            *lw -= a * a * var;
        }
    }
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logw.iter().zip(&cell_factor).map(|(l, c)| (l - top).exp() * c).collect();
    let s: f64 = w.iter().sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Numerical("boundary measure has no finite mass".into()));
    }
    for x in &mut w {
        *x /= s;
    }
    Ok(CircleMeasure::Density(w))
}

/// Draws an angle in [0, 2π).
pub fn sample_circle<R: Rng + ?Sized>(measure: &CircleMeasure, rng: &mut R) -> f64 {
    match measure {
        CircleMeasure::Atoms(a) => {
            let total: f64 = a.iter().map(|x| x.1).sum();
            let mut u = rng.gen::<f64>() * total;
            for &(t, w) in a {
                if u < w {
                    return t.rem_euclid(2.0 * PI);
                }
                u -= w;
            }
            a.last().map_or(0.0, |x| x.0.rem_euclid(2.0 * PI))
        }
        CircleMeasure::Density(w) => {
            let m = w.len();
            let h = 2.0 * PI / m as f64;
            let total: f64 = w.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            for (j, &x) in w.iter().enumerate() {
                if u < x {
                    return (h * (j as f64 - 0.5 + u / x)).rem_euclid(2.0 * PI);
                }
                u -= x;
            }
            let j = w.iter().rposition(|&x| x > 0.0).unwrap_or(0);
            (h * (j as f64 + 0.5)).rem_euclid(2.0 * PI)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_dgff, sample_harmonic_fbgff, Boundary};
    use crate::rng;
    use crate::stats::tv;

    #[test]
    fn gamma_zero_and_constant_are_uniform() {
        let f = sample_dgff(8, Boundary::Zero, 1, &mut rng::from_seed(1)).unwrap();
        let m = lqg_mass(&f, 0.0).unwrap();
        assert!(m.mass.iter().all(|&x| (x - 1.0 / 64.0).abs() < 1e-15));
        let c = LatticeField::constant(8, 7.5);
        let m = lqg_mass(&c, 1.7).unwrap();
        assert!(m.mass.iter().all(|&x| (x - 1.0 / 64.0).abs() < 1e-15));
        assert!(lqg_mass(&c, 2.5).is_err());
    }

    #[test]
    fn uniform_mass_gives_dyadic_grid() {
        let c = LatticeField::constant(32, 0.0);
        let m = lqg_mass(&c, 0.0).unwrap();
        for k in 0..=5u32 {
            let delta = 4f64.powi(-(k as i32)) * m.total * (1.0 + 1e-9);
            let t = square_decompose(&m, delta).unwrap();
            let leaves: Vec<&Square> = t.leaves().collect();
            assert_eq!(leaves.len(), 4usize.pow(k));
            assert!(leaves.iter().all(|s| s.depth == k && !s.floor));
            assert!(t.check());
        }
    }

    #[test]
    fn point_mass_splits_to_floor() {
        let mut mass = vec![0.0; 64];
        mass[27] = 1.0;
        let m = MassGrid { n: 8, mass, total: 1.0 };
        let t = square_decompose(&m, 0.5).unwrap();
        let floor: Vec<&Square> = t.leaves().filter(|s| s.floor).collect();
        assert_eq!(floor.len(), 1);
        assert_eq!((floor[0].x, floor[0].y), (3, 3));
        assert_eq!(t.leaves().count(), 1 + 3 * 3);
        assert!(t.check());
    }

    #[test]
    fn conservation_on_random_fields() {
        for seed in 0..100 {
            let f = sample_dgff(64, Boundary::Zero, seed, &mut rng::from_seed(seed)).unwrap();
            let m = lqg_mass(&f, 1.0).unwrap();
            let t = square_decompose(&m, 1e-3).unwrap();
            assert_eq!(t.leaf_mass_sum(), t.nodes[0].mass);
            assert!((t.nodes[0].mass - m.total).abs() < 1e-12);
            assert!(t.check());
        }
    }

    #[test]
    fn zero_field_measure_is_uniform() {
        let f = HarmonicDiskField::zero(4);
        let CircleMeasure::Density(w) = boundary_measure_truncated(&f, -0.4, 4, 256, false).unwrap() else {
            panic!()
        };
        assert!(w.iter().all(|&x| (x - 1.0 / 256.0).abs() < 1e-15));
    }

    #[test]
    fn single_mode_ratio() {
        let mut f = HarmonicDiskField::zero(1);
        f.cos[0] = 0.8;
        let a = -1.0 / 6f64.sqrt();
        let CircleMeasure::Density(w) = boundary_measure_truncated(&f, a, 1, 512, false).unwrap() else {
            panic!()
        };
        let max = w.iter().cloned().fold(0.0, f64::max);
        let min = w.iter().cloned().fold(1.0, f64::min);
        assert!((max / min - (2.0 * (a * 0.8).abs()).exp()).abs() < 1e-10);
    }

    #[test]
    fn constant_shift_and_compensation_do_not_matter() {
        let f = sample_harmonic_fbgff(16, &[(0.5, C64::new(0.0, 1.0))], &mut rng::from_seed(2)).unwrap();
        let a = boundary_measure_truncated(&f, 0.7, 16, 1024, false).unwrap();
        let b = boundary_measure_truncated(&f, 0.7, 16, 1024, true).unwrap();
        let (CircleMeasure::Density(a), CircleMeasure::Density(b)) = (a, b) else { panic!() };
        assert!(tv(&a, &b) < 1e-12);
    }

    #[test]
    fn atom_on_grid_is_handled() {
        let f = sample_harmonic_fbgff(4, &[(2.0 / 6f64.sqrt(), C64::new(1.0, 0.0))], &mut rng::from_seed(3)).unwrap();
        let a = -1.0 / 6f64.sqrt();
        let m = boundary_measure_truncated(&f, a, 4, 4096, false).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-12);
        let g = sample_harmonic_fbgff(0, &[(-3.0, C64::new(1.0, 0.0))], &mut rng::from_seed(3)).unwrap();
        assert!(matches!(
            boundary_measure_truncated(&g, 1.0, 0, 128, false),
            Err(Error::NonIntegrableAtom(_))
        ));
    }

    #[test]
    fn point_mass_and_uniform_sampling() {
        let mut r = rng::from_seed(4);
        let pm = CircleMeasure::Atoms(vec![(1.25, 1.0)]);
        assert!((0..100).all(|_| sample_circle(&pm, &mut r) == 1.25));
        let u = CircleMeasure::uniform(4096);
        let n = 100_000;
        let s: C64 = (0..n).map(|_| C64::from_polar(1.0, sample_circle(&u, &mut r))).sum::<C64>() / n as f64;
        let sigma = (0.5 / n as f64).sqrt();
        assert!(s.re.abs() < 3.0 * sigma && s.im.abs() < 3.0 * sigma);
    }

    fn binned_tv(m: &CircleMeasure, samples: &[f64], bins: usize) -> f64 {
        let CircleMeasure::Density(w) = m else { panic!() };
        let per = w.len() / bins;
        // Bin b covers cells [b·per, (b+1)·per), i.e. angles shifted by half a cell.
        let h = 2.0 * PI / w.len() as f64;
        let p: Vec<f64> = (0..bins).map(|b| w[b * per..(b + 1) * per].iter().sum()).collect();
        let mut q = vec![0.0; bins];
        for &t in samples {
            let j = (((t + h / 2.0) / h).floor() as usize) % w.len();
            q[j / per] += 1.0 / samples.len() as f64;
        }
        tv(&p, &q)
    }

    #[test]
    fn sampler_matches_density() {
        let f = sample_harmonic_fbgff(8, &[], &mut rng::from_seed(5)).unwrap();
        let m = boundary_measure_truncated(&f, -1.0 / 6f64.sqrt(), 8, 4096, false).unwrap();
        let mut r = rng::from_seed(6);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_circle(&m, &mut r)).collect();
        assert!(binned_tv(&m, &xs, 64) < 0.01);
    }

    #[test]
    fn resampling_the_atom_is_uniform() {
        let gamma = 1.0;
        let mut r = rng::from_seed(7);
        let n = 100_000;
        let mut counts = vec![0.0; 20];
        for _ in 0..n {
            let u = r.gen::<f64>() * 2.0 * PI;
            let f = sample_harmonic_fbgff(16, &[(-gamma, C64::from_polar(1.0, u))], &mut r).unwrap();
            let m = boundary_measure_truncated(&f, gamma / 2.0, 16, 256, false).unwrap();
            let t = sample_circle(&m, &mut r);
            counts[((t / (2.0 * PI) * 20.0) as usize).min(19)] += 1.0 / n as f64;
        }
        assert!(tv(&counts, &[0.05; 20]) < 0.02);
    }
}
