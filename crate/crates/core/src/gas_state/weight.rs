//! Velocity weights `m(v)` for the weighted sup-norms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::maxwellian::maxwellian_speed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("polynomial exponent k = {k} must exceed k_inf = {k_inf}")]
    PolynomialTooWeak { k: f64, k_inf: f64 },
    #[error("stretched exponential needs kappa1 > 0 and kappa2 in (0, 2), got ({0}, {1})")]
    BadStretchedExponential(f64, f64),
    #[error("Maxwellian power zeta = {0} must lie in (1/2, 1)")]
    BadMaxwellianPower(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `1 + |v|^k`.
    Polynomial { k: f64 },
    /// `exp(kappa1 |v|^kappa2)`.
    StretchedExponential { kappa1: f64, kappa2: f64 },
    /// `mu(v)^{-zeta}`.
    MaxwellianPower { zeta: f64 },
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Polynomial { k: 7.0 }
    }
}

impl Weight {
    #[inline]
    pub fn value(&self, speed: f64) -> f64 {
        match *self {
            Weight::Polynomial { k } => 1.0 + speed.powf(k),
            Weight::StretchedExponential { kappa1, kappa2 } => (kappa1 * speed.powf(kappa2)).exp(),
            Weight::MaxwellianPower { zeta } => maxwellian_speed(speed).powf(-zeta),
        }
    }

    /// Parameter-range admissibility; `k_inf` comes from the collision model.
    pub fn check_admissible(&self, k_inf: f64) -> Result<(), WeightError> {
        match *self {
            Weight::Polynomial { k } if !(k > k_inf) => Err(WeightError::PolynomialTooWeak { k, k_inf }),
            Weight::StretchedExponential { kappa1, kappa2 } if !(kappa1 > 0.0 && kappa2 > 0.0 && kappa2 < 2.0) => {
                Err(WeightError::BadStretchedExponential(kappa1, kappa2))
            }
            Weight::MaxwellianPower { zeta } if !(zeta > 0.5 && zeta < 1.0) => Err(WeightError::BadMaxwellianPower(zeta)),
            _ => Ok(()),
        }
    }

    /// Decay condition making `(1 + |v|) nu(v) / m(v)` integrable on all of velocity space for
    /// `nu ~ |v|^gamma`; `m mu` is bounded for every admissible kind.
    pub fn semigroup_admissible(&self, gamma: f64) -> bool {
        match *self {
            Weight::Polynomial { k } => k > 4.0 + gamma,
            Weight::StretchedExponential { kappa1, kappa2 } => kappa1 > 0.0 && kappa2 > 0.0 && kappa2 < 2.0,
            Weight::MaxwellianPower { zeta } => zeta > 0.0 && zeta < 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_gate_is_strict() {
        let k_inf = 6.0;
        assert!(Weight::Polynomial { k: 6.0 }.check_admissible(k_inf).is_err());
        assert!(Weight::Polynomial { k: 6.01 }.check_admissible(k_inf).is_ok());
    }

    #[test]
    fn other_kinds_check_ranges() {
        assert!(Weight::StretchedExponential { kappa1: 1.0, kappa2: 2.0 }.check_admissible(6.0).is_err());
        assert!(Weight::StretchedExponential { kappa1: 0.5, kappa2: 1.0 }.check_admissible(6.0).is_ok());
        assert!(Weight::MaxwellianPower { zeta: 0.5 }.check_admissible(6.0).is_err());
        assert!(Weight::MaxwellianPower { zeta: 0.9 }.check_admissible(6.0).is_ok());
    }

    #[test]
    fn maxwellian_power_inverts_mu() {
        let w = Weight::MaxwellianPower { zeta: 0.75 };
        let r = 1.3;
        assert!((w.value(r) * maxwellian_speed(r).powf(0.75) - 1.0).abs() < 1e-12);
    }
}
