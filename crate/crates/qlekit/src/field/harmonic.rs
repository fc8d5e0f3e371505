//! Harmonic fields on the unit disk: truncated Fourier series plus
//! logarithmic singularities, and the disk Green's functions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreenKind {
    /// log|(1 − xȳ)/(y − x)|
    Dirichlet,
    /// −log|(x − y)(1 − xȳ)|
    Neumann,
}

/// Green's function of the unit disk.
pub fn green_disk(x: C64, y: C64, kind: GreenKind) -> Result<f64> {
    if x == y {
        return Err(Error::SingularArgument("x = y".into()));
    }
    if x.norm() >= 1.0 || y.norm() >= 1.0 {
        return Err(Error::OutOfDomain("points must lie in the open unit disk".into()));
    }
    let c = C64::new(1.0, 0.0) - x * y.conj();
    Ok(match kind {
        GreenKind::Dirichlet => (c.norm() / (y - x).norm()).ln(),
        GreenKind::Neumann => -((x - y).norm() * c.norm()).ln(),
    })
}

/// h(z) = Σ_k [a_k Re z^k + b_k Im z^k] + Σ_i γ_i log|z − x_i| − const,
/// the constant chosen so that h(0) = 0 when no singularity sits at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDiskField {
    /// a_k for k = 1..=N (index k−1).
    pub cos: Vec<f64>,
    /// b_k for k = 1..=N.
    pub sin: Vec<f64>,
    /// (strength, location) pairs.
    pub singularities: Vec<(f64, C64)>,
    pub pinned: bool,
}

/// Evaluation target of [`HarmonicDiskField::eval`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Gradient(f64, f64),
}

impl HarmonicDiskField {
    pub fn zero(degree: usize) -> Self {
        Self { cos: vec![0.0; degree], sin: vec![0.0; degree], singularities: Vec::new(), pinned: true }
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Σ_k (a_k − i b_k) z^k, whose real part is the series part of h.
    fn series(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for k in (1..=self.degree()).rev() {
            let c = C64::new(self.cos[k - 1], -self.sin[k - 1]);
            dp = dp * z + p;
            p = p * z + c;
        }
        (p * z, dp * z + p)
    }

    fn check_point(&self, z: C64) -> Result<()> {
        if !(z.norm() <= 1.0) {
            return Err(Error::OutOfDomain(format!("|{z}| > 1")));
        }
        for &(_, x) in &self.singularities {
            if z == x {
                return Err(Error::SingularArgument(format!("evaluation at singularity {x}")));
            }
        }
        Ok(())
    }

    pub fn value(&self, z: C64) -> Result<f64> {
        self.check_point(z)?;
        let mut v = self.series(z).0.re;
        for &(g, x) in &self.singularities {
            v += g * (z - x).norm().ln();
            if self.pinned && x != C64::new(0.0, 0.0) {
                v -= g * x.norm().ln();
            }
        }
        Ok(v)
    }

    /// (∂_x h, ∂_y h).
    pub fn gradient(&self, z: C64) -> Result<(f64, f64)> {
        self.check_point(z)?;
        // For h = Re F with F analytic, ∇h = conj(F').
        let mut d = self.series(z).1;
        for &(g, x) in &self.singularities {
            d += g / (z - x);
        }
        Ok((d.re, -d.im))
    }

    pub fn eval(&self, z: C64, gradient: bool) -> Result<Value> {
        if gradient {
            let (x, y) = self.gradient(z)?;
            Ok(Value::Gradient(x, y))
        } else {
            Ok(Value::Scalar(self.value(z)?))
        }
    }
}

/// Harmonic part of the free-boundary GFF truncated at degree N: independent
/// coefficients of Re z^k and Im z^k with variance 2/k, which makes each basis
/// function unit-norm for the (2π)^{-1} Dirichlet inner product. The
/// covariance is then −2 log|1 − zw̄| up to truncation.
pub fn sample_harmonic_fbgff<R: Rng + ?Sized>(
    degree: usize,
    singularities: &[(f64, C64)],
    rng: &mut R,
) -> Result<HarmonicDiskField> {
    for &(_, x) in singularities {
        if !(x.norm() <= 1.0 + 1e-12) {
            return invalid("singularities must lie in the closed unit disk");
        }
    }
    let mut f = HarmonicDiskField::zero(degree);
    for k in 1..=degree {
        let s = (2.0 / k as f64).sqrt();
        f.cos[k - 1] = s * rng.sample::<f64, _>(StandardNormal);
        f.sin[k - 1] = s * rng.sample::<f64, _>(StandardNormal);
    }
    f.singularities = singularities.to_vec();
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rayon::prelude::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn green_examples() {
        let d = green_disk(c(0.0, 0.0), c(0.5, 0.0), GreenKind::Dirichlet).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-6);
        let n = green_disk(c(0.0, 0.0), c(0.5, 0.0), GreenKind::Neumann).unwrap();
        assert!((n - std::f64::consts::LN_2).abs() < 1e-6);
        let d = green_disk(c(0.3, 0.0), c(0.6, 0.0), GreenKind::Dirichlet).unwrap();
        // log(0.82/0.3)
        assert!((d - 1.005522).abs() < 1e-6);
        assert!(matches!(green_disk(c(0.1, 0.0), c(0.1, 0.0), GreenKind::Dirichlet), Err(Error::SingularArgument(_))));
    }

    #[test]
    fn zero_and_monomial() {
        let mut f = HarmonicDiskField::zero(3);
        assert_eq!(f.value(c(0.4, -0.2)).unwrap(), 0.0);
        f.cos[0] = 1.0;
        assert!((f.value(c(0.5, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        let g = sample_harmonic_fbgff(0, &[], &mut rng::from_seed(0)).unwrap();
        assert_eq!(g.value(c(0.7, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn qle_singularities() {
        let k = 6f64;
        let a = -(k + 6.0) / (2.0 * k.sqrt());
        let b = 2.0 / k.sqrt();
        let f = sample_harmonic_fbgff(0, &[(a, c(0.0, 0.0)), (b, c(1.0, 0.0))], &mut rng::from_seed(0)).unwrap();
        for z in [c(0.3, 0.2), c(-0.5, 0.1)] {
            let want = a * z.norm().ln() + b * (z - 1.0).norm().ln();
            assert!((f.value(z).unwrap() - want).abs() < 1e-14);
        }
        assert!(f.value(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn pinned_at_origin() {
        let f = sample_harmonic_fbgff(20, &[(1.3, c(0.6, 0.8)), (-0.4, c(0.2, -0.3))], &mut rng::from_seed(4)).unwrap();
        assert_eq!(f.value(c(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = sample_harmonic_fbgff(12, &[(0.7, c(0.0, 1.0)), (-1.1, c(0.1, 0.2))], &mut rng::from_seed(9)).unwrap();
        let mut r = rng::from_seed(10);
        let h = 1e-6;
        for _ in 0..100 {
            let z = loop {
                let z = c(Rng::gen_range(&mut r, -0.9..0.9), Rng::gen_range(&mut r, -0.9..0.9));
                if z.norm() < 0.9 && (z - c(0.1, 0.2)).norm() > 0.05 {
                    break z;
                }
            };
            let (gx, gy) = f.gradient(z).unwrap();
            let fx = (f.value(z + h).unwrap() - f.value(z - h).unwrap()) / (2.0 * h);
            let fy = (f.value(z + c(0.0, h)).unwrap() - f.value(z - c(0.0, h)).unwrap()) / (2.0 * h);
            let scale = gx.hypot(gy).max(1.0);
            assert!(((gx - fx).abs() + (gy - fy).abs()) / scale < 1e-5);
        }
    }

    #[test]
    fn covariance_matches_green_difference() {
        let (z, w) = (c(0.3, 0.0), c(-0.4, 0.0));
        let oracle = green_disk(z, w, GreenKind::Neumann).unwrap() - green_disk(z, w, GreenKind::Dirichlet).unwrap();
        let runs = 100_000;
        let prods: Vec<f64> = (0..runs)
            .into_par_iter()
            .map(|i| {
                let f = sample_harmonic_fbgff(64, &[], &mut rng::stream(21, i)).unwrap();
                f.value(z).unwrap() * f.value(w).unwrap()
            })
            .collect();
        let (m, v) = crate::stats::mean_var(&prods);
        let se = (v / runs as f64).sqrt();
        assert!((m - oracle).abs() < (0.05 * oracle.abs()).max(3.0 * se), "{m} vs {oracle} (se {se})");
    }

    proptest! {
        #[test]
        fn eval_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, x in -0.6f64..0.6, y in -0.6f64..0.6) {
            let mut f = HarmonicDiskField::zero(3);
            f.cos[1] = a;
            f.sin[2] = b;
            let z = c(x, y);
            let want = a * (z * z).re + b * (z * z * z).im;
            prop_assert!((f.value(z).unwrap() - want).abs() < 1e-12);
        }
    }
}
