//! Scalar self-consistency equations and root enumeration.
//!
//! For a modulus-dependent interaction the transmitted modulus `x = |N| =
//! |A·T|` satisfies a real scalar equation at fixed `(k, side, |A|)`; every
//! nonnegative root is one branch of the (possibly multistable) response.
//! This module builds those residual functions for the closed-form δ cases,
//! solves the Kerr cubic exactly, and enumerates roots of arbitrary residuals
//! by dense scanning with bisection refinement and tangency detection.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::integrate::OdeOptions;
use crate::interaction::{DeltaSite, Interaction};
use crate::nonlinearity::NonlinearityFn;
use crate::scattering::{Side, WaveNumber};

/// Root-scan configuration shared by both solver routes.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Scan window for the transmitted modulus; `None` picks a default from
    /// `(|A|, k)`.
    pub window: Option<(f64, f64)>,
    pub grid_n: usize,
    /// Residual tolerance: reported roots satisfy `|residual| < tol`.
    pub tol: f64,
    pub ode: OdeOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            window: None,
            grid_n: 2000,
            tol: 1e-10,
            ode: OdeOptions::default(),
        }
    }
}

impl SolveOptions {
    /// Default scan window. Gain media can push `|N|` well past `|A|`, so
    /// the upper bound scales with both `|A|` and `|A|/2k`.
    pub fn window_for(&self, abs_a: f64, k: WaveNumber, negative_power: bool) -> (f64, f64) {
        if let Some(w) = self.window {
            return w;
        }
        let lo = if negative_power { 1e-9 } else { 0.0 };
        let hi = (10.0 * abs_a).max(10.0 * abs_a / (2.0 * k.k())).max(1.0);
        (lo, hi)
    }
}

/// Which equation a residual realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// Single-δ modulus equation in `x = |N|`.
    SingleDelta,
    /// Double-δ master equation in `x = |N|`.
    DoubleDelta,
    /// `|A(x)| − |A|` with `|A(x)|` from the Jost route.
    AmplitudeMap,
    /// `x·|M₂₂(0, x)| − |A|` from the transfer route.
    TransferDiagonal,
}

/// Metadata carried by a residual for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct ResidualMeta {
    pub equation: Equation,
    pub side: Option<Side>,
    pub k: f64,
    pub abs_amplitude: f64,
}

/// A real scalar residual `x ↦ r(x)` whose nonnegative roots are branches.
pub struct ResidualFn {
    f: Box<dyn Fn(f64) -> Result<f64> + Send + Sync>,
    pub meta: ResidualMeta,
}

impl ResidualFn {
    pub fn new<F>(meta: ResidualMeta, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        ResidualFn {
            f: Box::new(f),
            meta,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }
}

/// One enumerated root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootHit {
    pub x: f64,
    pub residual: f64,
    /// Found as a local minimum of `|r|` below `√tol` (branch fold) rather
    /// than a sign change.
    pub tangency: bool,
}

/// Outcome of a root scan.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub roots: Vec<RootHit>,
    pub scan_window: (f64, f64),
    pub grid_points: usize,
    /// The last evaluable sample was still below zero: roots may lie beyond
    /// the window.
    pub window_exhausted: bool,
}

/// Single-δ modulus equation residual,
/// `x²|f̂(x)|² − 2x² Im f̂(x) + x² − |A|²` with `f̂ = f/2k`.
pub fn single_delta_residual(f: &NonlinearityFn, k: WaveNumber, abs_a: f64) -> ResidualFn {
    let fv = f.clone();
    let kk = k.k();
    ResidualFn::new(
        ResidualMeta {
            equation: Equation::SingleDelta,
            side: None,
            k: kk,
            abs_amplitude: abs_a,
        },
        move |x| {
            let fh = fv.eval(x)? / (2.0 * kk);
            Ok(x * x * fh.norm_sqr() - 2.0 * x * x * fh.im + x * x - abs_a * abs_a)
        },
    )
}

/// Algebraically identical form `x²|1 + i f̂(x)|² − |A|²`, kept as an
/// independent arithmetic path for cross-checks.
pub fn single_delta_residual_compact(f: &NonlinearityFn, k: WaveNumber, abs_a: f64) -> ResidualFn {
    let fv = f.clone();
    let kk = k.k();
    ResidualFn::new(
        ResidualMeta {
            equation: Equation::SingleDelta,
            side: None,
            k: kk,
            abs_amplitude: abs_a,
        },
        move |x| {
            let fh = fv.eval(x)? / (2.0 * kk);
            let one_plus = Complex64::new(1.0, 0.0) + Complex64::new(0.0, 1.0) * fh;
            Ok(x * x * one_plus.norm_sqr() - abs_a * abs_a)
        },
    )
}

/// Double-δ master equation residual
/// `x·|(1−w)g₁g₂ + g₁ + g₂ + 1| − |A|` with side-dependent `g₁, g₂` and
/// `w = e^{2i(c₂−c₁)k}`.
///
/// For left incidence `g₂(x) = i f₂(x)/2k` and
/// `g₁(x) = (i/2k) f₁(x·|i(1−w)f₂(x)/2k + 1|)`; right incidence swaps the
/// roles of `f₁` and `f₂`.
pub fn double_delta_residual(
    s1: &DeltaSite,
    s2: &DeltaSite,
    k: WaveNumber,
    side: Side,
    abs_a: f64,
) -> Result<ResidualFn> {
    if !(s1.position < s2.position) {
        return Err(Error::Validation(
            "double-δ residual requires c₁ < c₂".into(),
        ));
    }
    let kk = k.k();
    let meta = ResidualMeta {
        equation: Equation::DoubleDelta,
        side: Some(side),
        k: kk,
        abs_amplitude: abs_a,
    };
    let gs = double_delta_gs(s1, s2, k, side);
    Ok(ResidualFn::new(meta, move |x| {
        let (g1, g2, w) = gs(x)?;
        let m22 = (Complex64::new(1.0, 0.0) - w) * g1 * g2 + g1 + g2 + Complex64::new(1.0, 0.0);
        Ok(x * m22.norm() - abs_a)
    }))
}

/// Shared evaluation of the side-dependent `(g₁, g₂, w)` triple at `x = |N|`.
pub(crate) fn double_delta_gs(
    s1: &DeltaSite,
    s2: &DeltaSite,
    k: WaveNumber,
    side: Side,
) -> Arc<dyn Fn(f64) -> Result<(Complex64, Complex64, Complex64)> + Send + Sync> {
    let kk = k.k();
    let w = Complex64::from_polar(1.0, 2.0 * (s2.position - s1.position) * kk);
    let f1 = s1.coupling.clone();
    let f2 = s2.coupling.clone();
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    match side {
        Side::Left => Arc::new(move |x| {
            let f2x = f2.eval(x)?;
            let g2 = i * f2x / (2.0 * kk);
            let inner = x * ((one - w) * g2 + one).norm();
            let g1 = i * f1.eval(inner)? / (2.0 * kk);
            Ok((g1, g2, w))
        }),
        Side::Right => Arc::new(move |x| {
            let f1x = f1.eval(x)?;
            let g1 = i * f1x / (2.0 * kk);
            let inner = x * ((one - w) * g1 + one).norm();
            let g2 = i * f2.eval(inner)? / (2.0 * kk);
            Ok((g1, g2, w))
        }),
    }
}

/// The unique positive root of the Kerr modulus equation
/// `|ẑ|²x⁶ − 2 Im(ẑ) x⁴ + x² − |A|² = 0`, `ẑ = z/2k`, solved as a closed-form
/// cubic in `u = x²` and polished by Newton iteration.
///
/// When strong gain makes the cubic multistable (several positive roots) the
/// uniqueness contract is violated and `Error::RootMultiplicity` is returned.
pub fn kerr_root(z: Complex64, k: WaveNumber, abs_a: f64) -> Result<f64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Validation("Kerr coupling z must be nonzero".into()));
    }
    if !abs_a.is_finite() || abs_a < 0.0 {
        return Err(Error::Validation(
            "incident modulus |A| must be finite and nonnegative".into(),
        ));
    }
    if abs_a == 0.0 {
        return Ok(0.0);
    }
    let zh = z / (2.0 * k.k());
    let a3 = zh.norm_sqr();
    let a2 = -2.0 * zh.im;
    let a1 = 1.0;
    let a0 = -(abs_a * abs_a);

    let poly = |u: f64| ((a3 * u + a2) * u + a1) * u + a0;
    let dpoly = |u: f64| (3.0 * a3 * u + 2.0 * a2) * u + a1;

    let mut positive: Vec<f64> = Vec::new();
    for mut u in cubic_real_roots(a3, a2, a1, a0) {
        // Newton polish against the original coefficients.
        for _ in 0..4 {
            let d = dpoly(u);
            if d != 0.0 {
                u -= poly(u) / d;
            }
        }
        if u > 0.0 && !positive.iter().any(|v| (v - u).abs() <= 1e-9 * u.max(*v)) {
            positive.push(u);
        }
    }
    if positive.len() != 1 {
        return Err(Error::RootMultiplicity {
            count: positive.len(),
        });
    }
    Ok(positive[0].sqrt())
}

/// Real roots of `a3 u³ + a2 u² + a1 u + a0` with `a3 > 0`.
fn cubic_real_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    let p_ = a2 / a3;
    let q_ = a1 / a3;
    let r_ = a0 / a3;
    // Depressed form t³ + pt + q with u = t − p_/3.
    let p = q_ - p_ * p_ / 3.0;
    let q = 2.0 * p_ * p_ * p_ / 27.0 - p_ * q_ / 3.0 + r_;
    let shift = -p_ / 3.0;

    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let mut out = Vec::new();
    if disc > 0.0 {
        // Three real roots (requires p < 0).
        let m = 2.0 * (-p / 3.0).sqrt();
        let acos_arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = acos_arg.acos();
        for j in 0..3 {
            let t = m * ((theta - 2.0 * core::f64::consts::PI * j as f64) / 3.0).cos();
            out.push(t + shift);
        }
    } else {
        let d = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let t = (-q / 2.0 + d).cbrt() + (-q / 2.0 - d).cbrt();
        out.push(t + shift);
    }
    out
}

/// Enumerates the roots of `r` in `window` by dense uniform scanning.
///
/// Sign changes are refined by bisection to machine precision in `x`; local
/// minima of `|r|` below `√tol` that do not straddle a sign change are
/// reported as tangency-flagged roots (branch folds). Roots are sorted
/// ascending and deduplicated.
pub fn enumerate_roots(
    r: &ResidualFn,
    window: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<RootReport> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Validation(
            "scan window must be finite with x_min < x_max".into(),
        ));
    }
    if grid_n < 2 {
        return Err(Error::Validation("grid_n must be at least 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation("tolerance must be positive".into()));
    }
    let span = hi - lo;
    let step = span / (grid_n - 1) as f64;

    let mut xs = Vec::with_capacity(grid_n);
    let mut vs: Vec<Option<f64>> = Vec::with_capacity(grid_n);
    for i in 0..grid_n {
        let x = if i + 1 == grid_n {
            hi
        } else {
            lo + step * i as f64
        };
        xs.push(x);
        vs.push(r.eval(x).ok().filter(|v| v.is_finite()));
    }
    if vs.iter().all(|v| v.is_none()) {
        return Err(Error::NoValidSamples);
    }

    let mut hits: Vec<RootHit> = Vec::new();

    // Exact zeros on the grid.
    for i in 0..grid_n {
        if let Some(v) = vs[i] {
            if v == 0.0 {
                hits.push(RootHit {
                    x: xs[i],
                    residual: 0.0,
                    tangency: false,
                });
            }
        }
    }

    // Sign changes between consecutive evaluable samples.
    for i in 0..grid_n - 1 {
        if let (Some(v0), Some(v1)) = (vs[i], vs[i + 1]) {
            if v0 * v1 < 0.0 {
                if let Some(hit) = bisect(r, xs[i], xs[i + 1], v0) {
                    hits.push(hit);
                }
            }
        }
    }

    // Tangency pass: interior minima of |r| with no adjacent sign change.
    let flag_level = tol.sqrt();
    for i in 1..grid_n - 1 {
        let (v_prev, v, v_next) = match (vs[i - 1], vs[i], vs[i + 1]) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => continue,
        };
        let same_sign = v_prev * v > 0.0 && v * v_next > 0.0;
        if same_sign && v.abs() < flag_level && v.abs() <= v_prev.abs() && v.abs() <= v_next.abs() {
            if let Some((x_min, v_min)) = golden_min_abs(r, xs[i - 1], xs[i + 1]) {
                if v_min.abs() < flag_level {
                    hits.push(RootHit {
                        x: x_min,
                        residual: v_min,
                        tangency: true,
                    });
                }
            }
        }
    }

    hits.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(core::cmp::Ordering::Equal));

    // Merge near-duplicates, preferring sign-change roots over tangencies.
    let merge_tol = (span * 1e-9).max(1e-12);
    let mut merged: Vec<RootHit> = Vec::new();
    for h in hits {
        match merged.last_mut() {
            Some(last) if (h.x - last.x).abs() <= merge_tol => {
                let prefer_new = (!h.tangency && last.tangency)
                    || (h.tangency == last.tangency && h.residual.abs() < last.residual.abs());
                if prefer_new {
                    *last = h;
                }
            }
            _ => merged.push(h),
        }
    }

    // A sign-change root must actually meet the residual tolerance;
    // tangency hits are held to the √tol flag level by construction.
    merged.retain(|h| h.tangency || h.residual.abs() < tol);

    let window_exhausted = vs
        .iter()
        .rev()
        .flatten()
        .next()
        .map(|v| *v < 0.0)
        .unwrap_or(false);

    Ok(RootReport {
        roots: merged,
        scan_window: window,
        grid_points: grid_n,
        window_exhausted,
    })
}

fn bisect(r: &ResidualFn, mut lo: f64, mut hi: f64, v_lo: f64) -> Option<RootHit> {
    let mut f_lo = v_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        let f_mid = match r.eval(mid) {
            Ok(v) if v.is_finite() => v,
            _ => return None,
        };
        if f_mid == 0.0 {
            return Some(RootHit {
                x: mid,
                residual: 0.0,
                tangency: false,
            });
        }
        if f_mid * f_lo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let residual = r.eval(x).ok()?;
    Some(RootHit {
        x,
        residual,
        tangency: false,
    })
}

fn golden_min_abs(r: &ResidualFn, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = r.eval(c).ok()?;
    let mut fd = r.eval(d).ok()?;
    for _ in 0..120 {
        if b - a <= f64::EPSILON * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc.abs() < fd.abs() {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = r.eval(c).ok()?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = r.eval(d).ok()?;
        }
    }
    let x = 0.5 * (a + b);
    let v = r.eval(x).ok()?;
    Some((x, v))
}

/// Space-reflects an interaction, `x → −x`.
///
/// Right-incidence data of the reflected interaction equals left-incidence
/// data of the original, which is how left incidence is reduced for chains
/// the closed forms do not cover.
pub fn parity_reflect(interaction: &Interaction) -> Interaction {
    match interaction {
        Interaction::DeltaChain(sites) => {
            let mut reflected: Vec<DeltaSite> = sites
                .iter()
                .map(|s| DeltaSite {
                    position: -s.position,
                    coupling: s.coupling.clone(),
                })
                .collect();
            reflected.reverse();
            Interaction::DeltaChain(reflected)
        }
        Interaction::SmoothModulus { a, b, potential } => {
            let inner = potential.clone();
            Interaction::SmoothModulus {
                a: -b,
                b: -a,
                potential: Arc::new(move |x, m| inner(-x, m)),
            }
        }
    }
}
