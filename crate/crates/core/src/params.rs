//! Model parameters and the scaling reduction of the two-component
//! bending Hamiltonian.
//!
//! With `X̃ = a^{1/4} X` the operator factorizes as
//! `√a · [HO ⊗ I + b̃ · V]`, `b̃ = b/a`, where `HO` is the unit 2D isotropic
//! oscillator. Every solver in this crate works on the bracketed unit-scale
//! operator; [`rescale_eigenvalue`] is where `√a` comes back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    a: f64,
    b: f64,
    btilde: f64,
    scale: f64,
}

impl ModelParams {
    /// Validates `0 < b < a` (both finite).
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!("non-finite parameters a={a}, b={b}")));
        }
        if a <= 0.0 {
            return Err(Error::invalid(format!("a must be positive, got {a}")));
        }
        if b <= 0.0 {
            return Err(Error::invalid(format!("b must be positive, got {b}")));
        }
        if b >= a {
            return Err(Error::invalid(format!("btilde out of range: b/a = {} must be < 1", b / a)));
        }
        Ok(Self { a, b, btilde: b / a, scale: a.sqrt() })
    }

    /// The decoupled limit `b = 0`, outside the Renner regime. Only used to
    /// rescale oscillator reference values.
    pub fn decoupled(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::invalid(format!("a must be positive and finite, got {a}")));
        }
        Ok(Self { a, b: 0.0, btilde: 0.0, scale: a.sqrt() })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Dimensionless Renner parameter `b/a`.
    pub fn btilde(&self) -> f64 {
        self.btilde
    }

    /// Energy prefactor `√a`.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Same as [`ModelParams::new`].
pub fn make_params(a: f64, b: f64) -> Result<ModelParams> {
    ModelParams::new(a, b)
}

/// Maps an eigenvalue of the unit-scale operator to the physical one.
pub fn rescale_eigenvalue(params: &ModelParams, mu_unit: f64) -> Result<f64> {
    if !mu_unit.is_finite() {
        return Err(Error::invalid(format!("non-finite eigenvalue {mu_unit}")));
    }
    Ok(params.scale * mu_unit)
}

/// Whether a unit-scale solver accepts this `b̃`. Unlike [`ModelParams`],
/// `b̃ = 0` is allowed: it is the decoupled-oscillator limit.
pub fn check_btilde(btilde: f64) -> Result<()> {
    if btilde.is_finite() && (0.0..1.0).contains(&btilde) {
        Ok(())
    } else {
        Err(Error::invalid(format!("btilde must lie in [0, 1), got {btilde}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectorKind {
    ZeroSector,
    NonzeroSector,
}

/// Angular-momentum label `l` of a radial sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorIndex {
    l: i32,
}

impl SectorIndex {
    pub fn new(l: i32) -> Self {
        Self { l }
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn abs_l(&self) -> u32 {
        self.l.unsigned_abs()
    }

    pub fn kind(&self) -> SectorKind {
        if self.l == 0 {
            SectorKind::ZeroSector
        } else {
            SectorKind::NonzeroSector
        }
    }
}

impl std::fmt::Display for SectorIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "l={}", self.l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn params_from_examples() {
        let p = make_params(1.0, 0.5).unwrap();
        assert_eq!(p.btilde(), 0.5);
        assert_eq!(p.scale(), 1.0);

        let p = make_params(4.0, 2.0).unwrap();
        assert_eq!(p.btilde(), 0.5);
        assert_eq!(p.scale(), 2.0);
    }

    #[test]
    fn params_reject_outside_renner_regime() {
        assert!(make_params(1.0, 1.0).is_err());
        assert!(make_params(1.0, 1.5).is_err());
        assert!(make_params(1.0, 0.0).is_err());
        assert!(make_params(-1.0, -2.0).is_err());
        assert!(make_params(0.0, 0.0).is_err());
        assert!(make_params(f64::NAN, 0.5).is_err());
        assert!(make_params(f64::INFINITY, 0.5).is_err());
    }

    #[test]
    fn rescaling() {
        let p = make_params(1.0, 0.5).unwrap();
        let mu = 2.0 * 0.5f64.sqrt();
        assert_relative_eq!(rescale_eigenvalue(&p, mu).unwrap(), std::f64::consts::SQRT_2, epsilon = 1e-15);

        // (2N+2)√(a-b) with N=0, a=4, b=2.
        let p = make_params(4.0, 2.0).unwrap();
        assert_relative_eq!(rescale_eigenvalue(&p, mu).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert!(rescale_eigenvalue(&p, f64::NAN).is_err());

        let p = ModelParams::decoupled(9.0).unwrap();
        assert_eq!(rescale_eigenvalue(&p, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn sector_kind_tracks_l() {
        assert_eq!(SectorIndex::new(0).kind(), SectorKind::ZeroSector);
        assert_eq!(SectorIndex::new(-3).kind(), SectorKind::NonzeroSector);
        assert_eq!(SectorIndex::new(-3).abs_l(), 3);
    }

    #[test]
    fn btilde_gate() {
        assert!(check_btilde(0.0).is_ok());
        assert!(check_btilde(0.99).is_ok());
        assert!(check_btilde(1.0).is_err());
        assert!(check_btilde(-0.1).is_err());
    }
}
