//! Three-level spectrum of a flux-tunable superconducting qutrit.
//!
//! All quantities are dimensionless: frequencies in units of a reference
//! angular frequency `ω_r`, energies in `ħω_r`, temperatures in `ħω_r / k_B`
//! and heat currents in `λħω_r²`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The reference frequency every other quantity is measured against.
///
/// Fixed to one; it exists so that conversions have a single named anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub omega_r: f64,
}

impl UnitSystem {
    /// The only unit system in use: `ω_r = 1`.
    pub const DIMENSIONLESS: UnitSystem = UnitSystem { omega_r: 1.0 };
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::DIMENSIONLESS
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("Josephson energy must be positive, got {0}")]
    NonPositiveJosephson(f64),
    #[error("charging energy must be positive, got {0}")]
    NonPositiveCharging(f64),
    #[error("invalid flux φ = {phi}: cos(φ/3) = {cos} must be positive")]
    InvalidFlux { phi: f64, cos: f64 },
    #[error("derived frequency {name} = {value} is not positive")]
    NonPositiveFrequency { name: &'static str, value: f64 },
}

/// Circuit parameters of the three-junction loop qutrit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Josephson energy of each junction, in `ħω_r`.
    pub e_j: f64,
    /// Island charging energy, in `ħω_r`.
    pub e_c: f64,
    /// Reduced flux phase φ in radians.
    pub phi: f64,
}

impl CircuitParams {
    /// Validated constructor. Rejects non-positive energies and fluxes with
    /// `cos(φ/3) ≤ 0`.
    pub fn new(e_j: f64, e_c: f64, phi: f64) -> Result<Self, SpectrumError> {
        let params = Self { e_j, e_c, phi };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if !(self.e_j > 0.0) {
            return Err(SpectrumError::NonPositiveJosephson(self.e_j));
        }
        if !(self.e_c > 0.0) {
            return Err(SpectrumError::NonPositiveCharging(self.e_c));
        }
        let cos = (self.phi / 3.0).cos();
        if !(cos > 0.0) {
            return Err(SpectrumError::InvalidFlux { phi: self.phi, cos });
        }
        Ok(())
    }

    /// Whether `E_J ≥ 5 E_C`; below that the perturbative spectrum is
    /// questionable. Advisory only.
    pub fn is_transmon_regime(&self) -> bool {
        self.e_j >= 5.0 * self.e_c
    }

    /// Effective Josephson energy `(3/2) E_J cos(φ/3)` of the expanded loop
    /// potential.
    pub fn effective_josephson(&self) -> f64 {
        1.5 * self.e_j * (self.phi / 3.0).cos()
    }
}

/// Transition frequencies of the lowest three levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QutritSpectrum {
    pub omega0: f64,
    pub omega10: f64,
    pub omega21: f64,
    pub omega20: f64,
    /// Next transition up; only used as a bound on resonator linewidths.
    pub omega32: f64,
}

impl QutritSpectrum {
    /// Level energies measured from the ground state: `[0, ω10, ω20]`.
    pub fn energies(&self) -> [f64; 3] {
        [0.0, self.omega10, self.omega20]
    }

    /// `E_j − E_i`, i.e. `ω_{ji}`.
    #[inline]
    pub fn gap(&self, upper: usize, lower: usize) -> f64 {
        let e = self.energies();
        e[upper] - e[lower]
    }
}

/// Perturbative level energy `E_n = ω0 (n + 1/2) − E_C (6n² + 6n + 3) / 16`.
pub fn level_energy(omega0: f64, e_c: f64, n: u32) -> f64 {
    let n = n as f64;
    omega0 * (n + 0.5) - e_c * (6.0 * n * n + 6.0 * n + 3.0) / 16.0
}

/// Derive the qutrit spectrum from circuit parameters.
///
/// `ω20` is stored as `ω10 + ω21` so that level spacings are exactly
/// additive; energy conservation of the heat currents relies on it.
pub fn derive_spectrum(params: &CircuitParams) -> Result<QutritSpectrum, SpectrumError> {
    let cos = (params.phi / 3.0).cos();
    if !(cos > 0.0) {
        return Err(SpectrumError::InvalidFlux { phi: params.phi, cos });
    }
    let omega0 = (8.0 * params.effective_josephson() * params.e_c).sqrt();
    let omega10 = omega0 - 0.75 * params.e_c;
    let omega21 = omega0 - 1.5 * params.e_c;
    let omega32 = omega0 - 2.25 * params.e_c;
    let spectrum = QutritSpectrum {
        omega0,
        omega10,
        omega21,
        omega20: omega10 + omega21,
        omega32,
    };
    for (name, value) in [
        ("omega0", spectrum.omega0),
        ("omega10", spectrum.omega10),
        ("omega21", spectrum.omega21),
        ("omega20", spectrum.omega20),
        ("omega32", spectrum.omega32),
    ] {
        if !(value > 0.0) {
            return Err(SpectrumError::NonPositiveFrequency { name, value });
        }
    }
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_flux_values() {
        let s = derive_spectrum(&CircuitParams::new(5.0, 0.5, 0.0).unwrap()).unwrap();
        assert_relative_eq!(s.omega0, 30f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(s.omega10, 5.102_225_575_051_661, max_relative = 1e-14);
        assert_relative_eq!(s.omega21, 4.727_225_575_051_661, max_relative = 1e-14);
    }

    #[test]
    fn half_pi_flux_values() {
        // Frozen from an independent numpy evaluation of the level formula.
        let s = derive_spectrum(&CircuitParams::new(5.0, 0.5, PI / 2.0).unwrap()).unwrap();
        assert_relative_eq!(s.omega0, 5.097_132_734_541_367_5, max_relative = 1e-14);
        assert_relative_eq!(s.omega10, 4.722_132_734_541_367_5, max_relative = 1e-14);
        assert_relative_eq!(s.omega21, 4.347_132_734_541_367_5, max_relative = 1e-14);
        assert_relative_eq!(s.omega20, 9.069_265_469_082_735, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_limit() {
        let params = CircuitParams { e_j: 5.0, e_c: 0.0, phi: 0.0 };
        let s = derive_spectrum(&params).unwrap_err();
        // e_c = 0 collapses ω0 to zero as well, so check the shape of the
        // spacings through level_energy instead.
        assert!(matches!(s, SpectrumError::NonPositiveFrequency { .. }));
        let omega0 = 5.0;
        let d10 = level_energy(omega0, 0.0, 1) - level_energy(omega0, 0.0, 0);
        let d21 = level_energy(omega0, 0.0, 2) - level_energy(omega0, 0.0, 1);
        let d32 = level_energy(omega0, 0.0, 3) - level_energy(omega0, 0.0, 2);
        assert_eq!(d10, omega0);
        assert_eq!(d21, omega0);
        assert_eq!(d32, omega0);
    }

    #[test]
    fn spacings_match_level_formula() {
        let p = CircuitParams::new(7.3, 0.41, 1.1).unwrap();
        let s = derive_spectrum(&p).unwrap();
        let e: Vec<f64> = (0..4).map(|n| level_energy(s.omega0, p.e_c, n)).collect();
        assert_relative_eq!(s.omega10, e[1] - e[0], max_relative = 1e-13);
        assert_relative_eq!(s.omega21, e[2] - e[1], max_relative = 1e-13);
        assert_relative_eq!(s.omega32, e[3] - e[2], max_relative = 1e-13);
        assert_relative_eq!(s.omega20, e[2] - e[0], max_relative = 1e-13);
    }

    #[test]
    fn invalid_flux_rejected() {
        let p = CircuitParams { e_j: 5.0, e_c: 0.5, phi: 1.6 * PI };
        assert!(matches!(derive_spectrum(&p), Err(SpectrumError::InvalidFlux { .. })));
        assert!(CircuitParams::new(5.0, 0.5, 2.0 * PI).is_err());
    }

    #[test]
    fn large_charging_energy_gives_nonpositive_frequency() {
        let p = CircuitParams::new(0.1, 5.0, 0.0).unwrap();
        assert!(!p.is_transmon_regime());
        assert!(matches!(
            derive_spectrum(&p),
            Err(SpectrumError::NonPositiveFrequency { .. })
        ));
    }

    #[test]
    fn omega0_decreases_with_flux() {
        let mut prev = f64::INFINITY;
        for k in 1..300 {
            let phi = 1.5 * PI * k as f64 / 300.0;
            let p = CircuitParams { e_j: 5.0, e_c: 0.5, phi };
            let w0 = (8.0 * p.effective_josephson() * p.e_c).sqrt();
            assert!(w0 < prev, "ω0 not decreasing at φ = {phi}");
            prev = w0;
        }
    }

    #[test]
    fn deterministic() {
        let p = CircuitParams::new(5.0, 0.5, 0.7).unwrap();
        let a = derive_spectrum(&p).unwrap();
        let b = derive_spectrum(&p).unwrap();
        assert_eq!(a.omega20.to_bits(), b.omega20.to_bits());
    }
}
