//! One-dimensional scattering for finite-range nonlinear interactions.
//!
//! Solves the stationary wave equation `−ψ″(x) + v(x, |ψ|)ψ(x) = k²ψ(x)` for
//! interactions confined to a finite interval — chains of nonlinear δ-sites
//! or smooth modulus-dependent profiles — by two independent routes:
//!
//! * [`jost`]: shoot the outgoing-wave initial-value problem across the
//!   support and read the scattering data off the boundary combinations
//!   `ψ′ ± ikψ`;
//! * [`xfer`]: an amplitude-dependent 2×2 transfer matrix with a composition
//!   rule for disjoint supports, from which `R` and `T` follow as entry
//!   ratios.
//!
//! Because the interaction is nonlinear, a fixed incident amplitude may be
//! compatible with several transmitted moduli: [`selfconsist`] enumerates
//! every root of the scalar self-consistency equation and each becomes one
//! [`Branch`] of the multistable response. [`phenomena`] locates spectral
//! singularities (and their time reverses), reflectionless and invisible
//! configurations, and nonreciprocal transmission.
//!
//! ```
//! use num_complex::Complex64;
//! use scatter1d::{Incidence, Interaction, NonlinearityFn, Side, WaveNumber};
//! use scatter1d::selfconsist::SolveOptions;
//!
//! // A single Kerr site f(m) = 2m² at the origin.
//! let interaction =
//!     Interaction::single_delta(0.0, NonlinearityFn::kerr(Complex64::new(2.0, 0.0))).unwrap();
//! let k = WaveNumber::new(1.0).unwrap();
//! let incidence = Incidence::new(Side::Left, Complex64::new(2f64.sqrt(), 0.0));
//!
//! let set = scatter1d::jost::solve_scattering(&interaction, k, &incidence,
//!     &SolveOptions::default()).unwrap();
//! assert_eq!(set.branches.len(), 1);
//! assert!((set.branches[0].n - 1.0).abs() < 1e-9);
//! assert!((set.branches[0].t.norm_sqr() - 0.5).abs() < 1e-9);
//! ```
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod integrate;
pub mod interaction;
pub mod jost;
pub mod nonlinearity;
pub mod phenomena;
pub mod scattering;
pub mod selfconsist;
pub mod xfer;

pub use error::{Error, Result};
pub use integrate::OdeOptions;
pub use interaction::{support_interval, validate_interaction, DeltaSite, Interaction, SmoothFn};
pub use nonlinearity::{NonlinearityFn, PolyTerm};
pub use scattering::{Branch, BranchSet, Incidence, Side, WaveNumber};
pub use selfconsist::SolveOptions;

pub use num_complex::Complex64;
