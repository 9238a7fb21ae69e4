//! Modulus-dependent coupling functions `m ↦ f(m)`.
//!
//! Only the modulus of the field enters a coupling, which keeps the
//! scattering problem covariant under a global phase of the field and is
//! what reduces the amplitude self-consistency condition to a real scalar
//! equation.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// One term of a generalized polynomial, `coeff * m^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyTerm {
    pub coeff: Complex64,
    pub power: f64,
}

/// A coupling `f` mapping the nonnegative field modulus to a complex value.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityFn {
    /// `f(m) = 0`: no interaction.
    Zero,
    /// `f(m) = z`: an amplitude-independent (linear) coupling.
    Constant(Complex64),
    /// `f(m) = z m^ν` with `z ≠ 0` and `ν > −1`. `ν = 2` is a localized
    /// Kerr response, `ν = 0` an amplitude-independent coupling.
    PowerLaw { z: Complex64, nu: f64 },
    /// `f(m) = Σ coeff_j m^{power_j}`, powers strictly increasing and `> −1`.
    Polynomial { terms: Vec<PolyTerm> },
}

impl NonlinearityFn {
    /// Kerr coupling `z m²`.
    pub fn kerr(z: Complex64) -> Self {
        NonlinearityFn::PowerLaw { z, nu: 2.0 }
    }

    /// Builds a validated power law.
    pub fn power_law(z: Complex64, nu: f64) -> Result<Self> {
        let f = NonlinearityFn::PowerLaw { z, nu };
        f.validate()?;
        Ok(f)
    }

    /// Builds a validated polynomial; terms are sorted by power.
    pub fn polynomial(mut terms: Vec<PolyTerm>) -> Result<Self> {
        terms.sort_by(|t, u| {
            t.power
                .partial_cmp(&u.power)
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let f = NonlinearityFn::Polynomial { terms };
        f.validate()?;
        Ok(f)
    }

    /// Checks the variant's invariants without normalizing.
    pub fn validate(&self) -> Result<()> {
        match self {
            NonlinearityFn::Zero => Ok(()),
            NonlinearityFn::Constant(z) => {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Validation(format!(
                        "constant coupling z = {z} is not finite"
                    )));
                }
                Ok(())
            }
            NonlinearityFn::PowerLaw { z, nu } => {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Validation(format!(
                        "power-law coupling z = {z} is not finite"
                    )));
                }
                if *z == Complex64::new(0.0, 0.0) {
                    return Err(Error::Validation(
                        "power-law coupling z must be nonzero".into(),
                    ));
                }
                if !nu.is_finite() {
                    return Err(Error::Validation(
                        "power-law exponent ν must be finite".into(),
                    ));
                }
                if *nu <= -1.0 {
                    return Err(Error::Validation(format!(
                        "power-law exponent ν = {nu} must exceed -1"
                    )));
                }
                Ok(())
            }
            NonlinearityFn::Polynomial { terms } => {
                if terms.is_empty() {
                    return Err(Error::Validation(
                        "polynomial must have at least one term (use Zero instead)".into(),
                    ));
                }
                for t in terms {
                    if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() || !t.power.is_finite() {
                        return Err(Error::Validation("polynomial term is not finite".into()));
                    }
                    if t.power <= -1.0 {
                        return Err(Error::Validation(format!(
                            "polynomial power {} must exceed -1",
                            t.power
                        )));
                    }
                }
                for pair in terms.windows(2) {
                    if pair[0].power >= pair[1].power {
                        return Err(Error::Validation(format!(
                            "polynomial powers must be strictly increasing (found {} before {})",
                            pair[0].power, pair[1].power
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Evaluates `f(m)` for `m ≥ 0` (`m > 0` when a negative power is present).
    pub fn eval(&self, m: f64) -> Result<Complex64> {
        if !(m >= 0.0) {
            return Err(Error::Domain(format!(
                "modulus m = {m} must be nonnegative"
            )));
        }
        if m == 0.0 && self.has_negative_power() {
            return Err(Error::Domain(
                "coupling has a negative power and is undefined at m = 0".into(),
            ));
        }
        Ok(match self {
            NonlinearityFn::Zero => Complex64::new(0.0, 0.0),
            NonlinearityFn::Constant(z) => *z,
            NonlinearityFn::PowerLaw { z, nu } => z * m.powf(*nu),
            NonlinearityFn::Polynomial { terms } => {
                terms.iter().fold(Complex64::new(0.0, 0.0), |acc, t| {
                    acc + t.coeff * m.powf(t.power)
                })
            }
        })
    }

    /// True when evaluating at `m = 0` would be singular.
    pub fn has_negative_power(&self) -> bool {
        match self {
            NonlinearityFn::Zero | NonlinearityFn::Constant(_) => false,
            NonlinearityFn::PowerLaw { nu, .. } => *nu < 0.0,
            NonlinearityFn::Polynomial { terms } => terms.iter().any(|t| t.power < 0.0),
        }
    }

    /// True when `f(m)` does not depend on `m` (the interaction is linear).
    pub fn is_amplitude_independent(&self) -> bool {
        match self {
            NonlinearityFn::Zero | NonlinearityFn::Constant(_) => true,
            NonlinearityFn::PowerLaw { nu, .. } => *nu == 0.0,
            NonlinearityFn::Polynomial { terms } => terms.iter().all(|t| t.power == 0.0),
        }
    }

    /// The sign-flipped coupling `m ↦ −f(m)`, which swaps gain and loss and
    /// turns spectral singularities into their time-reversed counterparts.
    pub fn negated(&self) -> Self {
        match self {
            NonlinearityFn::Zero => NonlinearityFn::Zero,
            NonlinearityFn::Constant(z) => NonlinearityFn::Constant(-z),
            NonlinearityFn::PowerLaw { z, nu } => NonlinearityFn::PowerLaw { z: -z, nu: *nu },
            NonlinearityFn::Polynomial { terms } => NonlinearityFn::Polynomial {
                terms: terms
                    .iter()
                    .map(|t| PolyTerm {
                        coeff: -t.coeff,
                        power: t.power,
                    })
                    .collect(),
            },
        }
    }
}
