//! Jost-function route: shoot the outgoing-wave initial-value problem across
//! the support, read off boundary data, and close the amplitude
//! self-consistency loop in the transmitted modulus.
//!
//! For left incidence the solution is seeded at `x = b` as a purely outgoing
//! wave `ψ(b) = N e^{ibk}`, `ψ′(b) = ik N e^{ibk}` and propagated backward;
//! right incidence seeds `ψ(a) = N e^{−iak}`, `ψ′(a) = −ik N e^{−iak}` and
//! propagates forward. The boundary combinations `F± = ψ′(b) ± ikψ(b)` and
//! `G± = ψ′(a) ± ikψ(a)` then encode the incident amplitude and the
//! reflection/transmission pair.
//!
//! The seed uses a real nonnegative `N`: modulus-only couplings make the
//! problem covariant under a global phase, so an arbitrary incident phase
//! multiplies `(A, N)` jointly and leaves `R`, `T`, `|N|` untouched.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrate::{dormand_prince, OdeOptions};
use crate::interaction::Interaction;
use crate::scattering::{Branch, BranchSet, Incidence, Side, WaveNumber};
use crate::selfconsist::{
    enumerate_roots, Equation, ResidualFn, ResidualMeta, RootHit, SolveOptions,
};

/// Field value and derivative at a position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldState {
    pub x: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// The four boundary combinations for a propagated outgoing-wave solution.
///
/// By construction the seeded side is exact: left seeding gives
/// `f_plus = 2ik n e^{ibk}`, `f_minus = 0`; right seeding gives
/// `g_minus = −2ik n e^{−iak}`, `g_plus = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostData {
    pub f_plus: Complex64,
    pub f_minus: Complex64,
    pub g_plus: Complex64,
    pub g_minus: Complex64,
    pub side: Side,
    pub n: f64,
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Exact free-space advance of `(ψ, ψ′)` by `dx` under `ψ″ = −k²ψ`.
fn free_advance(k: f64, dx: f64, psi: Complex64, dpsi: Complex64) -> (Complex64, Complex64) {
    let (s, c) = (k * dx).sin_cos();
    (psi * c + dpsi * (s / k), -psi * (k * s) + dpsi * c)
}

/// Propagates a field state across the interaction support.
///
/// δ-chains are transported exactly: plane-wave evolution between sites and
/// the jump `ψ′(c⁺) = ψ′(c⁻) + f(|ψ(c)|)ψ(c)` at each site. Smooth profiles
/// are integrated adaptively with `opts` tolerances.
pub fn propagate(
    interaction: &Interaction,
    k: WaveNumber,
    seed: &FieldState,
    direction: Direction,
    opts: &OdeOptions,
) -> Result<FieldState> {
    let kk = k.k();
    match interaction {
        Interaction::DeltaChain(sites) => {
            let mut x = seed.x;
            let mut psi = seed.psi;
            let mut dpsi = seed.dpsi;
            let apply = |x: &mut f64,
                         psi: &mut Complex64,
                         dpsi: &mut Complex64,
                         c: f64,
                         f: &crate::nonlinearity::NonlinearityFn,
                         sign: f64|
             -> Result<()> {
                let (p, dp) = free_advance(kk, c - *x, *psi, *dpsi);
                *psi = p;
                *dpsi = dp + f.eval(p.norm())? * p * sign;
                *x = c;
                Ok(())
            };
            match direction {
                Direction::Forward => {
                    for s in sites {
                        apply(&mut x, &mut psi, &mut dpsi, s.position, &s.coupling, 1.0)?;
                    }
                }
                Direction::Backward => {
                    for s in sites.iter().rev() {
                        apply(&mut x, &mut psi, &mut dpsi, s.position, &s.coupling, -1.0)?;
                    }
                }
            }
            Ok(FieldState { x, psi, dpsi })
        }
        Interaction::SmoothModulus { a, b, potential } => {
            let target = match direction {
                Direction::Forward => *b,
                Direction::Backward => *a,
            };
            let v = potential.clone();
            let rhs = move |x: f64, y: &[Complex64; 2]| {
                let vv = v(x, y[0].norm());
                [y[1], (vv - kk * kk) * y[0]]
            };
            let out = dormand_prince(rhs, seed.x, target, [seed.psi, seed.dpsi], opts)?;
            Ok(FieldState {
                x: target,
                psi: out[0],
                dpsi: out[1],
            })
        }
    }
}

/// Shoots the outgoing-wave problem seeded with transmitted modulus `n` and
/// returns the boundary data at both support endpoints.
pub fn jost_solve(
    interaction: &Interaction,
    k: WaveNumber,
    side: Side,
    n: f64,
    opts: &OdeOptions,
) -> Result<JostData> {
    if !n.is_finite() || n < 0.0 {
        return Err(Error::Validation(
            "seed modulus n must be finite and nonnegative".into(),
        ));
    }
    let kk = k.k();
    let (a, b) = interaction.support();
    let ik = Complex64::new(0.0, kk);
    match side {
        Side::Left => {
            let seed = FieldState {
                x: b,
                psi: cis(b * kk) * n,
                dpsi: ik * cis(b * kk) * n,
            };
            let at_a = propagate(interaction, k, &seed, Direction::Backward, opts)?;
            Ok(JostData {
                f_plus: 2.0 * ik * cis(b * kk) * n,
                f_minus: Complex64::new(0.0, 0.0),
                g_plus: at_a.dpsi + ik * at_a.psi,
                g_minus: at_a.dpsi - ik * at_a.psi,
                side,
                n,
            })
        }
        Side::Right => {
            let seed = FieldState {
                x: a,
                psi: cis(-a * kk) * n,
                dpsi: -ik * cis(-a * kk) * n,
            };
            let at_b = propagate(interaction, k, &seed, Direction::Forward, opts)?;
            Ok(JostData {
                f_plus: at_b.dpsi + ik * at_b.psi,
                f_minus: at_b.dpsi - ik * at_b.psi,
                g_plus: Complex64::new(0.0, 0.0),
                g_minus: -2.0 * ik * cis(-a * kk) * n,
                side,
                n,
            })
        }
    }
}

/// Recovers the incident amplitude and the reflection/transmission pair from
/// boundary data.
///
/// Left: `A = G₊/(2ik e^{iak})`, `R = −e^{2iak}G₋/G₊`, `T = e^{i(a−b)k}F₊/G₊`.
/// Right: `A = −F₋/(2ik e^{−ibk})`, `R = −e^{−2ibk}F₊/F₋`, `T = e^{i(a−b)k}G₋/F₋`.
///
/// A vanishing denominator is a spectral singularity and is reported as
/// `Error::SingularDenominator` rather than an overflowing amplitude; the
/// threshold is `1e−12·(2k·n)`, the natural scale of the seeded data.
pub fn amplitudes_from_jost(
    data: &JostData,
    k: WaveNumber,
    a: f64,
    b: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    if data.n <= 0.0 {
        return Err(Error::Domain(
            "amplitude recovery needs a positive seed modulus n".into(),
        ));
    }
    let kk = k.k();
    let ik = Complex64::new(0.0, kk);
    let singular_tol = 1e-12 * (2.0 * kk * data.n);
    match data.side {
        Side::Left => {
            let denom = data.g_plus;
            if denom.norm() < singular_tol {
                return Err(Error::SingularDenominator {
                    defect: denom.norm(),
                });
            }
            let a_inc = denom / (2.0 * ik * cis(a * kk));
            let r = -cis(2.0 * a * kk) * data.g_minus / denom;
            let t = cis((a - b) * kk) * data.f_plus / denom;
            Ok((a_inc, r, t))
        }
        Side::Right => {
            let denom = data.f_minus;
            if denom.norm() < singular_tol {
                return Err(Error::SingularDenominator {
                    defect: denom.norm(),
                });
            }
            let a_inc = -denom / (2.0 * ik * cis(-b * kk));
            let r = -cis(-2.0 * b * kk) * data.f_plus / denom;
            let t = cis((a - b) * kk) * data.g_minus / denom;
            Ok((a_inc, r, t))
        }
    }
}

/// The incident modulus `|A|` produced by a seed modulus `n`.
///
/// `amplitude_map(·, 0) = 0`, and zeros at `n > 0` mark spectral
/// singularities (outgoing radiation with no incident wave).
pub fn amplitude_map(
    interaction: &Interaction,
    k: WaveNumber,
    side: Side,
    n: f64,
    opts: &OdeOptions,
) -> Result<f64> {
    if n == 0.0 {
        return Ok(0.0);
    }
    let data = jost_solve(interaction, k, side, n, opts)?;
    let denom = match side {
        Side::Left => data.g_plus,
        Side::Right => data.f_minus,
    };
    Ok(denom.norm() / (2.0 * k.k()))
}

/// Residual `n ↦ |A(n)| − |A|` for root enumeration.
pub fn amplitude_residual(
    interaction: &Interaction,
    k: WaveNumber,
    side: Side,
    abs_a: f64,
    opts: &OdeOptions,
) -> ResidualFn {
    let i = interaction.clone();
    let o = *opts;
    ResidualFn::new(
        ResidualMeta {
            equation: Equation::AmplitudeMap,
            side: Some(side),
            k: k.k(),
            abs_amplitude: abs_a,
        },
        move |n| Ok(amplitude_map(&i, k, side, n, &o)? - abs_a),
    )
}

/// Solves the scattering problem by the Jost prescription: enumerate every
/// `n ≥ 0` with `|A(n)| = |A|` and report the branch data at each root.
pub fn solve_scattering(
    interaction: &Interaction,
    k: WaveNumber,
    incidence: &Incidence,
    opts: &SolveOptions,
) -> Result<BranchSet> {
    let abs_a = incidence.abs_amplitude();
    let residual = amplitude_residual(interaction, k, incidence.side, abs_a, &opts.ode);
    let window = opts.window_for(abs_a, k, interaction.has_negative_power());
    let report = enumerate_roots(&residual, window, opts.grid_n, opts.tol)?;

    let (a, b) = interaction.support();
    let mut branches = Vec::with_capacity(report.roots.len());
    for hit in &report.roots {
        match branch_at_root(interaction, k, incidence.side, hit, a, b, &opts.ode) {
            Ok(branch) => branches.push(branch),
            // A singular denominator at a root only occurs for |A| ≈ 0,
            // where the root is the emission state, not a scattering branch.
            Err(Error::SingularDenominator { .. }) => continue,
            Err(e) => return Err(e),
        }
    }

    Ok(BranchSet {
        k,
        incidence: *incidence,
        branches,
        window_exhausted: report.window_exhausted,
        scan_window: report.scan_window,
        grid_points: report.grid_points,
    })
}

fn branch_at_root(
    interaction: &Interaction,
    k: WaveNumber,
    side: Side,
    hit: &RootHit,
    a: f64,
    b: f64,
    ode: &OdeOptions,
) -> Result<Branch> {
    if hit.x == 0.0 {
        // Zero-field branch: (R, T) are the limits along the branch, i.e.
        // the scattering data of the interaction frozen at f(0).
        let frozen = interaction.frozen_at_zero()?;
        let data = jost_solve(&frozen, k, side, 1.0, ode)?;
        let (_, r, t) = amplitudes_from_jost(&data, k, a, b)?;
        return Ok(Branch {
            n: 0.0,
            r,
            t,
            residual: hit.residual.abs(),
            tangency: hit.tangency,
        });
    }
    let data = jost_solve(interaction, k, side, hit.x, ode)?;
    let (_, r, t) = amplitudes_from_jost(&data, k, a, b)?;
    Ok(Branch {
        n: hit.x,
        r,
        t,
        residual: hit.residual.abs(),
        tangency: hit.tangency,
    })
}
