//! Detectors for the scattering phenomenology: spectral singularities and
//! their time reverses, reflectionlessness, transparency/invisibility, and
//! nonreciprocal transmission.
//!
//! A spectral singularity is a real wavenumber at which the scattering
//! denominator vanishes: the system emits outgoing radiation with no
//! incident wave (laser-threshold condition in optical realizations). Its
//! search is parametrized by the emission modulus `n` rather than the
//! incident amplitude, which vanishes there.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrate::OdeOptions;
use crate::interaction::Interaction;
use crate::jost::{amplitude_map, jost_solve};
use crate::nonlinearity::NonlinearityFn;
use crate::scattering::{Branch, Incidence, Side, WaveNumber};
use crate::selfconsist::SolveOptions;
use crate::xfer::rt_from_transfer;

/// Grid sizes and tolerance for the phenomenon scans.
#[derive(Debug, Clone)]
pub struct DetectParams {
    pub k_grid: usize,
    pub n_grid: usize,
    /// Defect threshold below which a candidate counts as a detection.
    pub tol: f64,
    pub ode: OdeOptions,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            k_grid: 48,
            n_grid: 48,
            tol: 1e-10,
            ode: OdeOptions::default(),
        }
    }
}

/// Which phenomenon a caller is asking about, with the incidence side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhenomenonQuery {
    pub kind: PhenomenonKind,
    pub side: QuerySide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhenomenonKind {
    Reflectionless,
    Transparent,
    Invisible,
    Nonreciprocal,
    SpectralSingularity,
    TimeReversedSpectralSingularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuerySide {
    Left,
    Right,
    Both,
}

/// One detected spectral singularity (or time-reversed singularity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityReport {
    pub k_star: f64,
    /// Emission modulus `|N|` at the singularity.
    pub n_star: f64,
    /// Outgoing intensity toward `x → −∞`.
    pub intensity_left: f64,
    /// Outgoing intensity toward `x → +∞`.
    pub intensity_right: f64,
    pub side: Side,
    /// Normalized defect `|A(n)|/n` achieved at `(k⋆, n⋆)`.
    pub defect: f64,
}

/// The normalized singularity defect: `|A(n)|/n`, zero exactly at a spectral
/// singularity (`|G₊|` for left seeding, `|F₋|` for right, scaled by `2kn`).
pub fn singularity_defect(
    interaction: &Interaction,
    k: WaveNumber,
    side: Side,
    n: f64,
    ode: &OdeOptions,
) -> Result<f64> {
    if n <= 0.0 {
        return Err(Error::Domain("emission modulus n must be positive".into()));
    }
    Ok(amplitude_map(interaction, k, side, n, ode)? / n)
}

/// Scans the `(k, n)` rectangle for spectral singularities.
///
/// Grid minima of the defect are refined by compass search to below
/// `params.tol`; single-δ chains additionally solve the closed condition
/// `f(n) = 2ik` directly. Every hit is re-checked through the Jost route
/// before being reported. Reports are sorted by `(k⋆, n⋆)`.
pub fn detect_spectral_singularity(
    interaction: &Interaction,
    side: Side,
    k_range: (f64, f64),
    n_range: (f64, f64),
    params: &DetectParams,
) -> Result<Vec<SingularityReport>> {
    if !(k_range.0 > 0.0 && k_range.0 < k_range.1) {
        return Err(Error::Validation(
            "k range must be positive and ordered".into(),
        ));
    }
    if !(n_range.0 > 0.0 && n_range.0 < n_range.1) {
        return Err(Error::Validation(
            "n range must be positive and ordered".into(),
        ));
    }

    let mut hits: Vec<(f64, f64, f64)> = Vec::new();

    if let Some(sites) = interaction.sites() {
        if sites.len() == 1 {
            closed_single_delta_hits(&sites[0].coupling, k_range, n_range, params, &mut hits);
        }
    }
    scan_hits(interaction, side, k_range, n_range, params, &mut hits)?;

    // Re-check through the Jost route, attach emission intensities, dedup.
    let mut reports: Vec<SingularityReport> = Vec::new();
    let linear = interaction.is_amplitude_independent();
    for (k_star, n_star, _) in hits {
        let k = match WaveNumber::new(k_star) {
            Ok(k) => k,
            Err(_) => continue,
        };
        let defect = match singularity_defect(interaction, k, side, n_star, &params.ode) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if defect >= params.tol {
            continue;
        }
        let data = jost_solve(interaction, k, side, n_star, &params.ode)?;
        let two_k = 2.0 * k_star;
        let (intensity_left, intensity_right) = match side {
            // Left seeding: outgoing modulus is n at +∞ and |G₋|/2k at −∞.
            Side::Left => ((data.g_minus.norm() / two_k).powi(2), n_star * n_star),
            Side::Right => (n_star * n_star, (data.f_plus.norm() / two_k).powi(2)),
        };
        let duplicate = reports.iter().any(|r| {
            let dk = (r.k_star - k_star).abs() <= 1e-6 * k_star.max(r.k_star);
            let dn = (r.n_star - n_star).abs() <= 1e-6 * n_star.max(r.n_star);
            dk && (dn || linear)
        });
        if !duplicate {
            reports.push(SingularityReport {
                k_star,
                n_star,
                intensity_left,
                intensity_right,
                side,
                defect,
            });
        }
    }
    reports.sort_by(|a, b| {
        (a.k_star, a.n_star)
            .partial_cmp(&(b.k_star, b.n_star))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(reports)
}

/// Closed single-δ condition: `f(n)` purely imaginary with positive
/// imaginary part and `k⋆ = Im f(n)/2` inside the window.
fn closed_single_delta_hits(
    f: &NonlinearityFn,
    k_range: (f64, f64),
    n_range: (f64, f64),
    params: &DetectParams,
    out: &mut Vec<(f64, f64, f64)>,
) {
    let samples = params.n_grid.max(24);
    let step = (n_range.1 - n_range.0) / (samples - 1) as f64;
    let eval = |n: f64| f.eval(n).ok();

    let mut push_if_valid = |n: f64| {
        if let Some(v) = eval(n) {
            let k_star = v.im / 2.0;
            if v.re.abs() <= 1e-12 * v.norm().max(1e-300)
                && k_star >= k_range.0
                && k_star <= k_range.1
            {
                out.push((k_star, n, 0.0));
            }
        }
    };

    // Purely imaginary couplings trace a curve k⋆(n); mixed couplings can
    // only satisfy the condition at isolated zeros of Re f.
    let mut all_imaginary = true;
    let mut prev: Option<(f64, f64)> = None;
    for j in 0..samples {
        let n = n_range.0 + step * j as f64;
        let Some(v) = eval(n) else { continue };
        if v.re.abs() > 1e-12 * v.norm().max(1e-300) {
            all_imaginary = false;
        }
        if let Some((n0, re0)) = prev {
            if re0 * v.re < 0.0 {
                // Bisect Re f(n) = 0.
                let (mut lo, mut hi, mut flo) = (n0, n, re0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let Some(vm) = eval(mid) else { break };
                    if vm.re == 0.0 || hi - lo <= f64::EPSILON * (1.0 + lo.abs() + hi.abs()) {
                        break;
                    }
                    if vm.re * flo < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = vm.re;
                    }
                }
                push_if_valid(0.5 * (lo + hi));
            }
        }
        prev = Some((n, v.re));
    }
    if all_imaginary {
        for j in 0..samples {
            push_if_valid(n_range.0 + step * j as f64);
        }
    }
}

fn scan_hits(
    interaction: &Interaction,
    side: Side,
    k_range: (f64, f64),
    n_range: (f64, f64),
    params: &DetectParams,
    out: &mut Vec<(f64, f64, f64)>,
) -> Result<()> {
    let kn = params.k_grid.max(4);
    let nn = params.n_grid.max(4);
    let dk = (k_range.1 - k_range.0) / (kn - 1) as f64;
    let dn = (n_range.1 - n_range.0) / (nn - 1) as f64;

    let defect = |kv: f64, nv: f64| -> Option<f64> {
        let k = WaveNumber::new(kv).ok()?;
        singularity_defect(interaction, k, side, nv, &params.ode).ok()
    };

    let mut grid = Vec::with_capacity(kn * nn);
    for ik in 0..kn {
        for jn in 0..nn {
            let kv = k_range.0 + dk * ik as f64;
            let nv = n_range.0 + dn * jn as f64;
            grid.push(defect(kv, nv));
        }
    }

    // Refine every grid point that is a weak local minimum under a coarse cut.
    let cut = 0.5;
    for ik in 0..kn {
        for jn in 0..nn {
            let Some(v) = grid[ik * nn + jn] else {
                continue;
            };
            if v > cut {
                continue;
            }
            let mut is_min = true;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (pi, pj) = (ik as i64 + di, jn as i64 + dj);
                if pi < 0 || pj < 0 || pi >= kn as i64 || pj >= nn as i64 {
                    continue;
                }
                if let Some(u) = grid[pi as usize * nn + pj as usize] {
                    if u < v {
                        is_min = false;
                        break;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let kv = k_range.0 + dk * ik as f64;
            let nv = n_range.0 + dn * jn as f64;
            if let Some((k_star, n_star, d)) =
                compass_refine(&defect, (kv, nv), (dk, dn), k_range, n_range, params.tol)
            {
                if d < params.tol {
                    out.push((k_star, n_star, d));
                }
            }
        }
    }
    Ok(())
}

/// Compass (pattern) search minimizing a nonnegative defect on a rectangle.
fn compass_refine(
    f: &dyn Fn(f64, f64) -> Option<f64>,
    start: (f64, f64),
    step0: (f64, f64),
    kb: (f64, f64),
    nb: (f64, f64),
    tol: f64,
) -> Option<(f64, f64, f64)> {
    let (mut kx, mut nx) = start;
    let mut best = f(kx, nx)?;
    let (mut hk, mut hn) = step0;
    for _ in 0..400 {
        if best < tol * 1e-2 {
            break;
        }
        let mut improved = false;
        for (sk, sn) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (-1.0, -1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
        ] {
            let ck = (kx + sk * hk).clamp(kb.0, kb.1);
            let cn = (nx + sn * hn).clamp(nb.0, nb.1);
            if let Some(v) = f(ck, cn) {
                if v < best {
                    best = v;
                    kx = ck;
                    nx = cn;
                    improved = true;
                }
            }
        }
        if !improved {
            hk *= 0.5;
            hn *= 0.5;
            if hk < 1e-13 * kb.1.abs().max(1.0) && hn < 1e-13 * nb.1.abs().max(1.0) {
                break;
            }
        }
    }
    Some((kx, nx, best))
}

/// Detects time-reversed spectral singularities: the same search applied to
/// the interaction with every coupling sign-flipped (gain turned into loss;
/// the coherent-perfect-absorption condition).
pub fn detect_time_reversed_ss(
    interaction: &Interaction,
    side: Side,
    k_range: (f64, f64),
    n_range: (f64, f64),
    params: &DetectParams,
) -> Result<Vec<SingularityReport>> {
    detect_spectral_singularity(&interaction.negated(), side, k_range, n_range, params)
}

/// One amplitude at which a branch scatters without reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionlessHit {
    pub abs_amplitude: f64,
    pub branch: Branch,
}

/// Finds reflectionless configurations over an incident-amplitude window.
///
/// Single-δ chains solve `f(x⋆) = 0` directly and report `|A| = x⋆`; other
/// interactions scan the window and keep branches with `|R| < tol`. A
/// chain of zero couplings is reflectionless at every amplitude and reports
/// the scan grid.
pub fn find_reflectionless(
    interaction: &Interaction,
    side: Side,
    k: WaveNumber,
    a_range: (f64, f64),
    params: &DetectParams,
    solve: &SolveOptions,
) -> Result<Vec<ReflectionlessHit>> {
    if !(a_range.0 > 0.0 && a_range.0 < a_range.1) {
        return Err(Error::Validation(
            "amplitude range must be positive and ordered".into(),
        ));
    }
    let samples = params.n_grid.max(9);

    let mut hits = Vec::new();
    let mut record = |abs_a: f64| -> Result<()> {
        let inc = Incidence::new(side, Complex64::new(abs_a, 0.0));
        let set = rt_from_transfer(interaction, k, &inc, solve)?;
        for b in set.branches {
            if b.r.norm() < params.tol {
                hits.push(ReflectionlessHit {
                    abs_amplitude: abs_a,
                    branch: b,
                });
            }
        }
        Ok(())
    };

    match interaction.sites() {
        Some(sites) if sites.len() == 1 => {
            for x_star in coupling_zeros(&sites[0].coupling, a_range, samples * 8, params.tol) {
                record(x_star)?;
            }
        }
        _ => {
            let step = (a_range.1 - a_range.0) / (samples - 1) as f64;
            for j in 0..samples {
                record(a_range.0 + step * j as f64)?;
            }
        }
    }
    hits.sort_by(|a, b| {
        a.abs_amplitude
            .partial_cmp(&b.abs_amplitude)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(hits)
}

/// Zeros of `|f|` on a window, by dense sampling plus golden-section
/// refinement of local minima. An identically-zero coupling returns the
/// sample grid.
fn coupling_zeros(f: &NonlinearityFn, range: (f64, f64), samples: usize, tol: f64) -> Vec<f64> {
    let step = (range.1 - range.0) / (samples - 1) as f64;
    if matches!(f, NonlinearityFn::Zero) {
        return (0..samples).map(|j| range.0 + step * j as f64).collect();
    }
    let abs_f = |x: f64| f.eval(x).ok().map(|v| v.norm());
    let mut zeros = Vec::new();
    let mut vals: Vec<Option<f64>> = Vec::with_capacity(samples);
    for j in 0..samples {
        vals.push(abs_f(range.0 + step * j as f64));
    }
    for j in 1..samples - 1 {
        let (Some(v0), Some(v1), Some(v2)) = (vals[j - 1], vals[j], vals[j + 1]) else {
            continue;
        };
        if v1 <= v0 && v1 <= v2 {
            let (mut a, mut b) = (
                range.0 + step * (j - 1) as f64,
                range.0 + step * (j + 1) as f64,
            );
            const INV_PHI: f64 = 0.618_033_988_749_894_9;
            for _ in 0..120 {
                if b - a <= f64::EPSILON * (1.0 + a.abs() + b.abs()) {
                    break;
                }
                let c = b - INV_PHI * (b - a);
                let d = a + INV_PHI * (b - a);
                match (abs_f(c), abs_f(d)) {
                    (Some(fc), Some(fd)) if fc < fd => b = d,
                    (Some(_), Some(_)) => a = c,
                    _ => break,
                }
            }
            let x = 0.5 * (a + b);
            if abs_f(x).map(|v| v < tol).unwrap_or(false)
                && !zeros
                    .iter()
                    .any(|z: &f64| (z - x).abs() < 1e-9 * x.max(1.0))
            {
                zeros.push(x);
            }
        }
    }
    zeros
}

/// Per-branch transparency data at one incidence.
#[derive(Debug, Clone, PartialEq)]
pub struct TransparencyReport {
    pub branch: Branch,
    /// `|T − 1|`.
    pub defect: f64,
    /// `|R|`.
    pub reflection: f64,
    /// Both defects below the detection tolerance.
    pub invisible: bool,
}

/// Solves the scattering problem and reports the transparency defect
/// `|T − 1|` per branch; a branch is invisible when reflection and
/// transparency defects are both below `tol`.
pub fn check_transparency(
    interaction: &Interaction,
    k: WaveNumber,
    incidence: &Incidence,
    solve: &SolveOptions,
    tol: f64,
) -> Result<Vec<TransparencyReport>> {
    let set = rt_from_transfer(interaction, k, incidence, solve)?;
    Ok(set
        .branches
        .into_iter()
        .map(|branch| {
            let defect = (branch.t - Complex64::new(1.0, 0.0)).norm();
            let reflection = branch.r.norm();
            let invisible = defect < tol && reflection < tol;
            TransparencyReport {
                branch,
                defect,
                reflection,
                invisible,
            }
        })
        .collect())
}

/// Transmission comparison at one wavenumber for equal left/right incident
/// amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct NonreciprocityPoint {
    pub k: f64,
    /// Matched (|T^l|², |T^r|²) pairs, paired by nearest transmission.
    pub pairs: Vec<(f64, f64)>,
    /// Largest `||T^l|² − |T^r|²|` over matched pairs.
    pub gap: f64,
    /// Branch counts differed between the two sides.
    pub structural_mismatch: bool,
}

/// Scans a wavenumber grid and reports branchwise transmission intensities
/// for both incidence sides at equal incident modulus.
pub fn nonreciprocity_scan(
    interaction: &Interaction,
    k_grid: &[f64],
    abs_a: f64,
    solve: &SolveOptions,
) -> Result<Vec<NonreciprocityPoint>> {
    let mut points = Vec::with_capacity(k_grid.len());
    for &kv in k_grid {
        let k = WaveNumber::new(kv)?;
        let amp = Complex64::new(abs_a, 0.0);
        let left = rt_from_transfer(interaction, k, &Incidence::new(Side::Left, amp), solve)?;
        let right = rt_from_transfer(interaction, k, &Incidence::new(Side::Right, amp), solve)?;

        let mut lt: Vec<f64> = left.branches.iter().map(|b| b.t.norm_sqr()).collect();
        let mut rt: Vec<f64> = right.branches.iter().map(|b| b.t.norm_sqr()).collect();
        let structural_mismatch = lt.len() != rt.len();

        // Greedy nearest-|T|² pairing.
        let mut pairs = Vec::new();
        while !lt.is_empty() && !rt.is_empty() {
            let mut best = (0usize, 0usize, f64::INFINITY);
            for (i, &a) in lt.iter().enumerate() {
                for (j, &b) in rt.iter().enumerate() {
                    let d = (a - b).abs();
                    if d < best.2 {
                        best = (i, j, d);
                    }
                }
            }
            pairs.push((lt.remove(best.0), rt.remove(best.1)));
        }
        let gap = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        points.push(NonreciprocityPoint {
            k: kv,
            pairs,
            gap,
            structural_mismatch,
        });
    }
    Ok(points)
}

/// Largest transmission gap over a scan.
pub fn max_gap(points: &[NonreciprocityPoint]) -> f64 {
    points.iter().map(|p| p.gap).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::DeltaSite;
    use crate::nonlinearity::PolyTerm;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn k(v: f64) -> WaveNumber {
        WaveNumber::new(v).unwrap()
    }

    #[test]
    fn linear_gain_singularity_at_unit_wavenumber() {
        // f ≡ 2i: k⋆ = 1 for any emission modulus.
        let i = Interaction::single_delta(0.0, NonlinearityFn::Constant(c(0.0, 2.0))).unwrap();
        let reports = detect_spectral_singularity(
            &i,
            Side::Left,
            (0.2, 3.0),
            (0.1, 2.0),
            &DetectParams::default(),
        )
        .unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!((r.k_star - 1.0).abs() < 1e-8, "k⋆ = {}", r.k_star);
            assert!(r.defect < 1e-10);
            // Emission intensities coincide for a single site.
            assert!((r.intensity_left - r.intensity_right).abs() < 1e-8);
        }
    }

    #[test]
    fn kerr_gain_singularity_locus() {
        // f(x) = i x²: the singularity locus is n² = 2k⋆.
        let i = Interaction::single_delta(0.0, NonlinearityFn::kerr(c(0.0, 1.0))).unwrap();
        let reports = detect_spectral_singularity(
            &i,
            Side::Left,
            (0.1, 5.0),
            (0.2, 3.0),
            &DetectParams::default(),
        )
        .unwrap();
        assert!(reports.len() >= 20);
        for r in &reports {
            assert!((r.n_star * r.n_star - 2.0 * r.k_star).abs() < 1e-8);
            assert!((r.intensity_right - r.n_star * r.n_star).abs() < 1e-8);
        }

        // The transfer-route condition fires at the same points: the map's
        // diagonal entry vanishes at (0, n⋆).
        for r in reports.iter().take(5) {
            let map = crate::xfer::transfer_map(&i, k(r.k_star), &OdeOptions::default()).unwrap();
            let m = map.eval(Complex64::new(0.0, 0.0), Complex64::new(r.n_star, 0.0)).unwrap();
            assert!(m.m22.norm() < 1e-9, "|m22| = {:.3e}", m.m22.norm());
        }
    }

    #[test]
    fn real_coupling_has_no_singularity() {
        let i = Interaction::single_delta(0.0, NonlinearityFn::kerr(c(1.7, 0.0))).unwrap();
        let reports = detect_spectral_singularity(
            &i,
            Side::Left,
            (0.1, 4.0),
            (0.1, 3.0),
            &DetectParams::default(),
        )
        .unwrap();
        assert!(reports.is_empty());
    }

    #[test]
    fn time_reversed_mirrors_sign_flip() {
        let loss = Interaction::single_delta(0.0, NonlinearityFn::Constant(c(0.0, -2.0))).unwrap();
        let reports = detect_time_reversed_ss(
            &loss,
            Side::Left,
            (0.2, 3.0),
            (0.1, 2.0),
            &DetectParams::default(),
        )
        .unwrap();
        assert!(!reports.is_empty());
        assert!((reports[0].k_star - 1.0).abs() < 1e-8);

        let real = Interaction::single_delta(0.0, NonlinearityFn::Constant(c(1.0, 0.0))).unwrap();
        assert!(detect_time_reversed_ss(
            &real,
            Side::Left,
            (0.2, 3.0),
            (0.1, 2.0),
            &DetectParams::default(),
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn reflectionless_polynomial_zero() {
        let f = NonlinearityFn::polynomial(vec![
            PolyTerm {
                coeff: c(-1.0, 0.0),
                power: 0.0,
            },
            PolyTerm {
                coeff: c(1.0, 0.0),
                power: 2.0,
            },
        ])
        .unwrap();
        let i = Interaction::single_delta(0.0, f).unwrap();
        let hits = find_reflectionless(
            &i,
            Side::Left,
            k(1.0),
            (0.2, 3.0),
            &DetectParams::default(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(hits.iter().any(|h| (h.abs_amplitude - 1.0).abs() < 1e-9));
        for h in &hits {
            assert!(h.branch.r.norm() < 1e-10);
            // Jost-route condition at the reported amplitude: G₋ vanishes.
            let data =
                jost_solve(&i, k(1.0), Side::Left, h.branch.n, &OdeOptions::default()).unwrap();
            assert!(data.g_minus.norm() < 1e-10);
        }
    }

    #[test]
    fn linear_site_never_reflectionless() {
        let i = Interaction::single_delta(0.0, NonlinearityFn::Constant(c(0.7, 0.3))).unwrap();
        let hits = find_reflectionless(
            &i,
            Side::Left,
            k(1.0),
            (0.2, 3.0),
            &DetectParams::default(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn zero_coupling_reflectionless_everywhere() {
        let i = Interaction::single_delta(0.0, NonlinearityFn::Zero).unwrap();
        let hits = find_reflectionless(
            &i,
            Side::Right,
            k(1.0),
            (0.5, 2.0),
            &DetectParams::default(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(hits.len() >= 9);
        for h in &hits {
            assert!(h.branch.r.norm() < 1e-12);
            assert!((h.branch.t - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn transparency_defect_closed_value() {
        // f ≡ 1 at k = 1/2: |T − 1| = 1/√2.
        let i = Interaction::single_delta(0.0, NonlinearityFn::Constant(c(1.0, 0.0))).unwrap();
        let reports = check_transparency(
            &i,
            k(0.5),
            &Incidence::new(Side::Left, c(1.0, 0.0)),
            &SolveOptions::default(),
            1e-10,
        )
        .unwrap();
        assert_eq!(reports.len(), 1);
        assert!((reports[0].defect - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(!reports[0].invisible);
    }

    #[test]
    fn invisible_point_detected() {
        let f = NonlinearityFn::polynomial(vec![
            PolyTerm {
                coeff: c(-1.0, 0.0),
                power: 0.0,
            },
            PolyTerm {
                coeff: c(1.0, 0.0),
                power: 2.0,
            },
        ])
        .unwrap();
        let i = Interaction::single_delta(0.0, f).unwrap();
        for side in [Side::Left, Side::Right] {
            let reports = check_transparency(
                &i,
                k(1.0),
                &Incidence::new(side, c(1.0, 0.0)),
                &SolveOptions::default(),
                1e-10,
            )
            .unwrap();
            assert!(reports.iter().any(|r| r.invisible));
        }
    }

    #[test]
    fn single_delta_is_reciprocal() {
        let i = Interaction::single_delta(0.4, NonlinearityFn::kerr(c(0.3, 0.9))).unwrap();
        let ks: Vec<f64> = (1..=10).map(|j| 0.3 * j as f64).collect();
        let points = nonreciprocity_scan(&i, &ks, 1.0, &SolveOptions::default()).unwrap();
        assert!(max_gap(&points) < 1e-10);
        assert!(points.iter().all(|p| !p.structural_mismatch));
    }

    #[test]
    fn linear_double_delta_is_reciprocal() {
        let i = Interaction::DeltaChain(vec![
            DeltaSite {
                position: -0.5,
                coupling: NonlinearityFn::Constant(c(1.0, -1.0)),
            },
            DeltaSite {
                position: 0.5,
                coupling: NonlinearityFn::Constant(c(1.0, 1.0)),
            },
        ])
        .validated()
        .unwrap();
        let ks: Vec<f64> = (1..=10).map(|j| 0.4 * j as f64).collect();
        let points = nonreciprocity_scan(&i, &ks, 1.0, &SolveOptions::default()).unwrap();
        assert!(max_gap(&points) < 1e-12);
    }

    #[test]
    fn asymmetric_nonlinear_pair_breaks_reciprocity() {
        // Kerr sites with conjugate couplings: transmission differs by side.
        let i = Interaction::DeltaChain(vec![
            DeltaSite {
                position: -0.5,
                coupling: NonlinearityFn::power_law(c(1.0, -1.0), 2.0).unwrap(),
            },
            DeltaSite {
                position: 0.5,
                coupling: NonlinearityFn::power_law(c(1.0, 1.0), 2.0).unwrap(),
            },
        ])
        .validated()
        .unwrap();
        let ks: Vec<f64> = (1..=40).map(|j| 0.3 * j as f64).collect();
        let points = nonreciprocity_scan(&i, &ks, 1.0, &SolveOptions::default()).unwrap();
        assert!(max_gap(&points) > 1e-3);
    }
}
