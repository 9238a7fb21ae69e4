//! Finite-range interactions: δ-site chains and smooth modulus-dependent
//! potentials on an interval.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityFn;

/// A smooth potential profile `v(x, m)`; the value multiplies the field, so
/// the interaction term is `v(x, |ψ(x)|) ψ(x)`, vanishing outside `[a, b]`.
pub type SmoothFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// One δ-site: the field derivative jumps by `coupling(|ψ(c)|)·ψ(c)` at `x = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSite {
    pub position: f64,
    pub coupling: NonlinearityFn,
}

/// A finite-range interaction.
///
/// Couplings depend on the field through its modulus only; phase-dependent
/// interactions are rejected by construction (they would break the global
/// phase covariance the scalar self-consistency reduction relies on).
#[derive(Clone)]
pub enum Interaction {
    /// A chain of δ-sites at strictly increasing positions.
    DeltaChain(Vec<DeltaSite>),
    /// A smooth profile `v(x, m)` supported on `[a, b]`.
    SmoothModulus { a: f64, b: f64, potential: SmoothFn },
}

impl fmt::Debug for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interaction::DeltaChain(sites) => f.debug_tuple("DeltaChain").field(sites).finish(),
            Interaction::SmoothModulus { a, b, .. } => f
                .debug_struct("SmoothModulus")
                .field("a", a)
                .field("b", b)
                .field("potential", &"<fn>")
                .finish(),
        }
    }
}

impl Interaction {
    /// Single δ-site shorthand.
    pub fn single_delta(position: f64, coupling: NonlinearityFn) -> Result<Self> {
        Interaction::DeltaChain(alloc::vec![DeltaSite { position, coupling }]).validated()
    }

    /// Normalizes and checks the interaction: sites are sorted by position,
    /// duplicates and non-finite data are rejected, couplings validated.
    pub fn validated(self) -> Result<Self> {
        match self {
            Interaction::DeltaChain(mut sites) => {
                if sites.is_empty() {
                    return Err(Error::Validation("delta chain has no sites".into()));
                }
                for s in &sites {
                    if !s.position.is_finite() {
                        return Err(Error::Validation(format!(
                            "site position c = {} is not finite",
                            s.position
                        )));
                    }
                    s.coupling.validate()?;
                }
                sites.sort_by(|x, y| {
                    x.position
                        .partial_cmp(&y.position)
                        .unwrap_or(core::cmp::Ordering::Equal)
                });
                for pair in sites.windows(2) {
                    if pair[0].position == pair[1].position {
                        return Err(Error::Validation(format!(
                            "duplicate site position c = {}",
                            pair[0].position
                        )));
                    }
                }
                Ok(Interaction::DeltaChain(sites))
            }
            Interaction::SmoothModulus { a, b, potential } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::Validation("support endpoints must be finite".into()));
                }
                if a >= b {
                    return Err(Error::Validation(format!(
                        "support requires a < b (got a = {a}, b = {b})"
                    )));
                }
                Ok(Interaction::SmoothModulus { a, b, potential })
            }
        }
    }

    /// Support interval `(a, b)`; a single site collapses to `(c, c)`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Interaction::DeltaChain(sites) => (
                sites.first().map(|s| s.position).unwrap_or(0.0),
                sites.last().map(|s| s.position).unwrap_or(0.0),
            ),
            Interaction::SmoothModulus { a, b, .. } => (*a, *b),
        }
    }

    pub fn sites(&self) -> Option<&[DeltaSite]> {
        match self {
            Interaction::DeltaChain(sites) => Some(sites),
            Interaction::SmoothModulus { .. } => None,
        }
    }

    /// True when some coupling is singular at zero modulus.
    pub fn has_negative_power(&self) -> bool {
        match self {
            Interaction::DeltaChain(sites) => sites.iter().any(|s| s.coupling.has_negative_power()),
            // Unknowable for a closure; assume regular at m = 0.
            Interaction::SmoothModulus { .. } => false,
        }
    }

    /// True when the scattering response cannot depend on the field amplitude.
    pub fn is_amplitude_independent(&self) -> bool {
        match self {
            Interaction::DeltaChain(sites) => {
                sites.iter().all(|s| s.coupling.is_amplitude_independent())
            }
            Interaction::SmoothModulus { .. } => false,
        }
    }

    /// The interaction with every coupling sign-flipped.
    pub fn negated(&self) -> Self {
        match self {
            Interaction::DeltaChain(sites) => Interaction::DeltaChain(
                sites
                    .iter()
                    .map(|s| DeltaSite {
                        position: s.position,
                        coupling: s.coupling.negated(),
                    })
                    .collect(),
            ),
            Interaction::SmoothModulus { a, b, potential } => {
                let inner = potential.clone();
                Interaction::SmoothModulus {
                    a: *a,
                    b: *b,
                    potential: Arc::new(move |x, m| -inner(x, m)),
                }
            }
        }
    }

    /// The interaction frozen at zero field: couplings replaced by their
    /// value at `m = 0`. Errors when a negative power makes `f(0)` undefined.
    pub fn frozen_at_zero(&self) -> Result<Self> {
        match self {
            Interaction::DeltaChain(sites) => {
                let mut frozen = Vec::with_capacity(sites.len());
                for s in sites {
                    frozen.push(DeltaSite {
                        position: s.position,
                        coupling: NonlinearityFn::Constant(s.coupling.eval(0.0)?),
                    });
                }
                Ok(Interaction::DeltaChain(frozen))
            }
            Interaction::SmoothModulus { a, b, potential } => {
                let inner = potential.clone();
                Ok(Interaction::SmoothModulus {
                    a: *a,
                    b: *b,
                    potential: Arc::new(move |x, _| inner(x, 0.0)),
                })
            }
        }
    }
}

/// Validates and normalizes a raw interaction description.
pub fn validate_interaction(raw: Interaction) -> Result<Interaction> {
    raw.validated()
}

/// Support interval `(a, b)` of a valid interaction.
pub fn support_interval(interaction: &Interaction) -> (f64, f64) {
    interaction.support()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn site(c: f64) -> DeltaSite {
        DeltaSite {
            position: c,
            coupling: NonlinearityFn::Constant(Complex64::new(1.0, 0.0)),
        }
    }

    #[test]
    fn sites_are_sorted() {
        let i = Interaction::DeltaChain(vec![site(0.5), site(-0.5)])
            .validated()
            .unwrap();
        let sites = i.sites().unwrap();
        assert_eq!(sites[0].position, -0.5);
        assert_eq!(sites[1].position, 0.5);
        assert_eq!(i.support(), (-0.5, 0.5));
    }

    #[test]
    fn duplicate_positions_rejected() {
        let err = Interaction::DeltaChain(vec![site(0.0), site(0.0)])
            .validated()
            .unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("duplicate site position"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn single_site_support_collapses() {
        let i = Interaction::single_delta(2.0, NonlinearityFn::Zero).unwrap();
        assert_eq!(i.support(), (2.0, 2.0));
    }

    #[test]
    fn smooth_support_passthrough() {
        let i = Interaction::SmoothModulus {
            a: -1.0,
            b: 3.0,
            potential: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
        }
        .validated()
        .unwrap();
        assert_eq!(i.support(), (-1.0, 3.0));
    }

    #[test]
    fn smooth_requires_ordered_interval() {
        let i = Interaction::SmoothModulus {
            a: 1.0,
            b: 1.0,
            potential: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
        };
        assert!(i.validated().is_err());
    }

    #[test]
    fn validation_idempotent() {
        let raw = Interaction::DeltaChain(vec![site(1.0), site(-2.0), site(0.25)]);
        let once = raw.validated().unwrap();
        let twice = once.clone().validated().unwrap();
        assert_eq!(once.sites().unwrap(), twice.sites().unwrap());
    }
}
