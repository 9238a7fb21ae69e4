//! Adaptive Dormand–Prince 5(4) integration for small complex systems.
//!
//! Used for smooth potential profiles and for the numeric transfer-matrix
//! construction; δ-sites are never regularized, callers split the domain at
//! site positions and apply the jump conditions themselves.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerances and budget for the adaptive stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    /// Tight tolerances for closed-form cross-validation work.
    pub fn tight() -> Self {
        OdeOptions {
            rtol: 1e-14,
            atol: 3e-16,
            max_steps: 4_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = rhs(x, y)` from `x0` to `x1` (either direction) and
/// returns the state at `x1`.
pub fn dormand_prince<const N: usize, F>(
    rhs: F,
    x0: f64,
    x1: f64,
    y0: [Complex64; N],
    opts: &OdeOptions,
) -> Result<[Complex64; N]>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let h_min = span.abs() * 1e-15 * 4.0 + f64::MIN_POSITIVE;

    let mut x = x0;
    let mut y = y0;
    let mut h = dir * (span.abs() / 100.0).min(0.1);

    for _ in 0..opts.max_steps {
        if (x - x1) * dir >= 0.0 {
            return Ok(y);
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        if h.abs() < h_min {
            return Err(Error::StepSizeUnderflow { x });
        }

        let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
        k[0] = rhs(x, &y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += kj[i] * (a * h);
                    }
                }
            }
            k[s] = rhs(x + C[s] * h, &ys);
        }

        let mut y5 = y;
        let mut err = [Complex64::new(0.0, 0.0); N];
        for (s, ks) in k.iter().enumerate() {
            let b5 = B5[s];
            let db = B5[s] - B4[s];
            for i in 0..N {
                if b5 != 0.0 {
                    y5[i] += ks[i] * (b5 * h);
                }
                if db != 0.0 {
                    err[i] += ks[i] * (db * h);
                }
            }
        }

        // A non-finite ratio means the trial step diverged; treat it as an
        // infinitely bad step so the controller shrinks h.
        let mut enorm: f64 = 0.0;
        for i in 0..N {
            let scale = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            let ratio = err[i].norm() / scale;
            if ratio.is_finite() {
                enorm = enorm.max(ratio);
            } else {
                enorm = f64::INFINITY;
                break;
            }
        }

        if enorm <= 1.0 {
            x += h;
            y = y5;
            if y.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::StepSizeUnderflow { x });
            }
        }
        let factor = if enorm == 0.0 {
            5.0
        } else if enorm.is_finite() {
            0.9 * enorm.powf(-0.2)
        } else {
            0.2
        };
        h *= factor.clamp(0.2, 5.0);
    }
    Err(Error::MaxStepsExceeded { x })
}
