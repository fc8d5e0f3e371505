//! Exponent relations between the LQG parameter γ, the DBM parameter η,
//! the boundary exponents α, β, and the associated dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which (γ², η) curve a record lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    /// κ = γ², α = −1/γ.
    Upper,
    /// κ = 16/γ², α = −γ/4.
    Middle,
    /// α = β = 0, η = −1.
    Trivial,
}

/// All exponents attached to a point of one of the three curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub gamma: f64,
    pub kappa: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub d: f64,
    pub delta_bar: f64,
    pub curve: Curve,
}

/// Q = 2/γ + γ/2.
pub fn q_of_gamma(gamma: f64) -> f64 {
    2.0 / gamma + gamma / 2.0
}

/// The LQG parameter paired with κ: γ = min(√κ, 4/√κ).
pub fn gamma_of_kappa(kappa: f64) -> f64 {
    kappa.sqrt().min(4.0 / kappa.sqrt())
}

/// Inputs to [`relation_solve`]; exactly one field must be `None`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Relation {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
}

/// Solves αQ_γ = β − η − 1 for the missing variable and returns it.
///
/// When γ is the unknown, the root in (0, 2] is returned.
pub fn relation_solve(r: Relation) -> Result<f64> {
    let missing = [r.alpha.is_none(), r.beta.is_none(), r.gamma.is_none(), r.eta.is_none()]
        .iter()
        .filter(|m| **m)
        .count();
    if missing != 1 {
        return invalid("exactly one of alpha, beta, gamma, eta must be unknown");
    }
    if let Some(g) = r.gamma {
        if g <= 0.0 {
            return invalid("gamma must be positive");
        }
    }
    match (r.alpha, r.beta, r.gamma, r.eta) {
        (None, Some(b), Some(g), Some(e)) => Ok((b - e - 1.0) / q_of_gamma(g)),
        (Some(a), None, Some(g), Some(e)) => Ok(a * q_of_gamma(g) + e + 1.0),
        (Some(a), Some(b), Some(g), None) => Ok(b - 1.0 - a * q_of_gamma(g)),
        (Some(a), Some(b), None, Some(e)) => {
            let rhs = b - e - 1.0;
            if a == 0.0 {
                return Err(Error::Inconsistent(
                    "alpha = 0 leaves gamma undetermined".into(),
                ));
            }
            let q = rhs / a;
            if q < 2.0 {
                return Err(Error::Inconsistent(format!("Q = {q} < 2 has no real gamma")));
            }
            Ok(q - (q * q - 4.0).sqrt())
        }
        _ => unreachable!(),
    }
}

/// (upper, middle) η values at γ²: 3/γ² − 1/2 and 3γ²/16 − 1/2.
pub fn eta_curves(gamma_sq: f64) -> Result<(f64, f64)> {
    if !(gamma_sq > 0.0 && gamma_sq <= 4.0) {
        return Err(Error::OutOfRange(format!("gamma^2 = {gamma_sq} not in (0,4]")));
    }
    Ok((3.0 / gamma_sq - 0.5, 3.0 * gamma_sq / 16.0 - 0.5))
}

/// d = 1 + κ/4 + ¼√((4+κ)² + 16κ).
pub fn watabiki_d(kappa: f64) -> Result<f64> {
    if kappa < 0.0 {
        return Err(Error::OutOfRange("kappa must be nonnegative".into()));
    }
    // (4+κ)² + 16κ expanded, which keeps d(8/3) = 4 exact in floating point.
    Ok((4.0 + kappa + (kappa * kappa + 24.0 * kappa + 16.0).sqrt()) / 4.0)
}

/// Δ̄ = (Q − β*)/(Q + β_*) with β_* = max(2√2, all strengths) and
/// β* = max(2, −boundary strengths).
pub fn holder_exponent(gamma: f64, boundary: &[f64], interior: &[f64]) -> Result<f64> {
    if gamma <= 0.0 {
        return invalid("gamma must be positive");
    }
    let q = q_of_gamma(gamma);
    let lower = boundary
        .iter()
        .chain(interior)
        .fold(2.0 * 2f64.sqrt(), |m, &g| m.max(g));
    let upper = boundary.iter().fold(2.0f64, |m, &g| m.max(-g));
    if upper >= q {
        return Err(Error::OutOfRange(format!("beta* = {upper} >= Q = {q}")));
    }
    Ok((q - upper) / (q + lower))
}

impl ExponentRecord {
    /// Record for γ on the given curve.
    pub fn on_curve(gamma: f64, curve: Curve) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 2.0) {
            return Err(Error::OutOfRange("gamma must lie in (0,2]".into()));
        }
        let q = q_of_gamma(gamma);
        let (kappa, alpha) = match curve {
            Curve::Upper => (gamma * gamma, -1.0 / gamma),
            Curve::Middle => (16.0 / (gamma * gamma), -gamma / 4.0),
            Curve::Trivial => (f64::NAN, 0.0),
        };
        let beta = alpha * alpha;
        let eta = relation_solve(Relation {
            alpha: Some(alpha),
            beta: Some(beta),
            gamma: Some(gamma),
            eta: None,
        })?;
        let delta_bar = if gamma < 2.0 {
            holder_exponent(gamma, &[], &[])?
        } else {
            0.0
        };
        Ok(Self {
            gamma,
            kappa,
            q,
            alpha,
            beta,
            eta,
            d: watabiki_d(gamma * gamma)?,
            delta_bar,
            curve,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relation_examples() {
        let eta = relation_solve(Relation {
            alpha: Some(0.0),
            beta: Some(0.0),
            gamma: Some(1.3),
            eta: None,
        })
        .unwrap();
        assert_eq!(eta, -1.0);
        let eta = relation_solve(Relation {
            alpha: Some(-1.0 / 2f64.sqrt()),
            beta: Some(0.5),
            gamma: Some(2f64.sqrt()),
            eta: None,
        })
        .unwrap();
        assert!((eta - 1.0).abs() < 1e-12);
        let eta = relation_solve(Relation {
            alpha: Some(-1.0 / 6f64.sqrt()),
            beta: Some(1.0 / 6.0),
            gamma: Some((8.0f64 / 3.0).sqrt()),
            eta: None,
        })
        .unwrap();
        assert!(eta.abs() < 1e-12);
    }

    #[test]
    fn gamma_solve_inverts_q() {
        let g = 1.2;
        let a = -0.3;
        let b = 0.09;
        let e = relation_solve(Relation { alpha: Some(a), beta: Some(b), gamma: Some(g), eta: None })
            .unwrap();
        let g2 = relation_solve(Relation { alpha: Some(a), beta: Some(b), gamma: None, eta: Some(e) })
            .unwrap();
        assert!((g - g2).abs() < 1e-12);
        assert!(relation_solve(Relation { alpha: Some(0.0), beta: Some(0.0), gamma: None, eta: Some(0.5) })
            .is_err());
    }

    #[test]
    fn curve_points() {
        assert_eq!(eta_curves(2.0).unwrap(), (1.0, -0.125));
        let (u, m) = eta_curves(8.0 / 3.0).unwrap();
        assert!((u - 0.625).abs() < 1e-15 && m.abs() < 1e-15);
        assert_eq!(eta_curves(4.0).unwrap(), (0.25, 0.25));
        assert!(eta_curves(0.0).is_err());
    }

    #[test]
    fn watabiki_values() {
        assert_eq!(watabiki_d(0.0).unwrap(), 2.0);
        assert_eq!(watabiki_d(8.0 / 3.0).unwrap(), 4.0);
        assert!((watabiki_d(2.0).unwrap() - 3.561553).abs() < 1e-6);
        let mut prev = watabiki_d(0.0).unwrap();
        for i in 1..=1000 {
            let d = watabiki_d(i as f64 / 100.0).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn holder_values() {
        let d = holder_exponent(2f64.sqrt(), &[], &[]).unwrap();
        // (2.12132 − 2)/(2.12132 + 2.82843)
        assert!((d - 0.0245104).abs() < 1e-6);
        let g = (8.0f64 / 3.0).sqrt();
        let with = holder_exponent(g, &[2.0 / 6f64.sqrt()], &[]).unwrap();
        assert_eq!(with, holder_exponent(g, &[], &[]).unwrap());
        assert!(holder_exponent(1.999999, &[], &[]).unwrap() < 1e-6);
        assert!(holder_exponent(1.0, &[-3.0], &[]).is_err());
    }

    #[test]
    fn parameters_of_kappa() {
        let g = gamma_of_kappa(6.0);
        assert!((g * g - 8.0 / 3.0).abs() < 1e-12);
        assert!((q_of_gamma(g) - 2.0412414523193148).abs() < 1e-12);
        let g = gamma_of_kappa(2.0);
        assert!((g * g - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn curves_satisfy_relation(gsq in 1e-3f64..=4.0) {
            let g = gsq.sqrt();
            let (up, mid) = eta_curves(gsq).unwrap();
            let u = ExponentRecord::on_curve(g, Curve::Upper).unwrap();
            let m = ExponentRecord::on_curve(g, Curve::Middle).unwrap();
            prop_assert!((u.eta - up).abs() < 1e-12 * (1.0 + up.abs()));
            prop_assert!((m.eta - mid).abs() < 1e-12);
            prop_assert!((u.alpha + 1.0 / u.kappa.sqrt()).abs() < 1e-12);
            prop_assert!((m.alpha + 1.0 / m.kappa.sqrt()).abs() < 1e-12);
        }

        #[test]
        fn holder_in_unit_interval(g in 0.05f64..1.99, b in -1.9f64..3.0, i in -3.0f64..3.0) {
            let d = holder_exponent(g, &[b], &[i]).unwrap();
            prop_assert!(d > 0.0 && d < 1.0);
        }
    }
}
