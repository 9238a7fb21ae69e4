//! Shared fixtures for the integration suites: the figure parameter sets and
//! a branch comparator.
#![allow(dead_code)]

use num_complex::Complex64;
use scatter1d::{Branch, DeltaSite, Interaction, NonlinearityFn};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Double δ at c = ∓1/2 with power-law couplings.
pub fn pair(z1: Complex64, nu1: f64, z2: Complex64, nu2: f64) -> Interaction {
    let coupling = |z: Complex64, nu: f64| {
        if nu == 0.0 {
            NonlinearityFn::Constant(z)
        } else {
            NonlinearityFn::power_law(z, nu).unwrap()
        }
    };
    Interaction::DeltaChain(vec![
        DeltaSite {
            position: -0.5,
            coupling: coupling(z1, nu1),
        },
        DeltaSite {
            position: 0.5,
            coupling: coupling(z2, nu2),
        },
    ])
    .validated()
    .unwrap()
}

/// Mirror-symmetric gain pair, z = i, ν ∈ {−0.7, −0.5, 0, 1, 2, 3}.
pub fn fig2_presets() -> Vec<(String, f64, Interaction)> {
    [-0.7, -0.5, 0.0, 1.0, 2.0, 3.0]
        .into_iter()
        .map(|nu| {
            (
                format!("fig2-nu{nu}"),
                nu,
                pair(c(0.0, 1.0), nu, c(0.0, 1.0), nu),
            )
        })
        .collect()
}

/// Conjugate-coupling pair z₁ = z₂* = 1 − i, ν ∈ {−0.5, 0, 1, 2, 3, 4}.
pub fn fig3_presets() -> Vec<(String, f64, Interaction)> {
    [-0.5, 0.0, 1.0, 2.0, 3.0, 4.0]
        .into_iter()
        .map(|nu| {
            (
                format!("fig3-nu{nu}"),
                nu,
                pair(c(1.0, -1.0), nu, c(1.0, 1.0), nu),
            )
        })
        .collect()
}

/// Asymmetric pair z₂ = −2z₁ = 1 + 2i, ν₁ = 2ν₂ = 2.
pub fn fig4_preset() -> (String, f64, Interaction) {
    (
        "fig4".to_string(),
        2.0,
        pair(c(-0.5, -1.0), 2.0, c(1.0, 2.0), 1.0),
    )
}

pub fn all_presets() -> Vec<(String, Interaction)> {
    let mut out: Vec<(String, Interaction)> = Vec::new();
    for (name, _, i) in fig2_presets() {
        out.push((name, i));
    }
    for (name, _, i) in fig3_presets() {
        out.push((name, i));
    }
    let (name, _, i) = fig4_preset();
    out.push((name, i));
    out
}

/// Branchwise distance in `(n, R, T)`.
pub fn branch_distance(a: &Branch, b: &Branch) -> f64 {
    (a.n - b.n)
        .abs()
        .max((a.r - b.r).norm())
        .max((a.t - b.t).norm())
}
