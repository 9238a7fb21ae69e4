//! Scattering-problem domain types: wavenumbers, incidence, branches.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// A real positive wavenumber (natural units: the wave equation is
/// `−ψ″ + v(x,|ψ|)ψ = k²ψ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumber(f64);

impl WaveNumber {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Validation(format!(
                "wavenumber k = {k} must be finite and positive"
            )));
        }
        Ok(WaveNumber(k))
    }

    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }
}

/// Which asymptotic region the incident wave comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// An incident wave: side plus complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub side: Side,
    pub amplitude: Complex64,
}

impl Incidence {
    pub fn new(side: Side, amplitude: Complex64) -> Self {
        Incidence { side, amplitude }
    }

    pub fn abs_amplitude(&self) -> f64 {
        self.amplitude.norm()
    }
}

/// One self-consistent scattering solution at fixed `(k, side, A)`.
///
/// `n` is the transmitted modulus `|N| = |A·T|`, the root of the amplitude
/// self-consistency equation that this branch corresponds to. `residual` is
/// the absolute residual of that equation at `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub n: f64,
    /// Reflection amplitude `R`.
    pub r: Complex64,
    /// Transmission amplitude `T`.
    pub t: Complex64,
    pub residual: f64,
    /// Set when the root was found as a near-tangency (branch fold) rather
    /// than a sign change.
    pub tangency: bool,
}

/// All branches found for one `(k, incidence)` query, sorted ascending in `n`.
#[derive(Debug, Clone)]
pub struct BranchSet {
    pub k: WaveNumber,
    pub incidence: Incidence,
    pub branches: Vec<Branch>,
    /// The residual's sign at the top of the scan window suggested further
    /// roots beyond it.
    pub window_exhausted: bool,
    pub scan_window: (f64, f64),
    pub grid_points: usize,
}

impl BranchSet {
    /// Convenience: `|T|²` per branch.
    pub fn transmission_intensities(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.t.norm_sqr()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_must_be_positive() {
        assert!(WaveNumber::new(0.0).is_err());
        assert!(WaveNumber::new(-1.0).is_err());
        assert!(WaveNumber::new(f64::NAN).is_err());
        assert_eq!(WaveNumber::new(2.5).unwrap().k(), 2.5);
    }

    #[test]
    fn incidence_modulus() {
        let inc = Incidence::new(Side::Left, Complex64::new(3.0, 4.0));
        assert_eq!(inc.abs_amplitude(), 5.0);
    }
}
