//! Sweep orchestration: solve every (k, side) point, assign continuation
//! branch ids, optionally cross-check against the Jost route, and assemble
//! deterministic row output.

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use scatter1d::xfer::rt_from_transfer;
use scatter1d::{jost, Branch, BranchSet, Complex64, Incidence, Interaction, Side, WaveNumber};

use crate::config::SweepConfig;
use crate::output::{side_tag, SweepRow};

const VERIFY_TOL: f64 = 1e-10;

/// Outcome of one sweep point before row assembly.
struct PointResult {
    k: f64,
    side: Side,
    outcome: Result<BranchSet, String>,
}

/// Runs the sweep described by `cfg` and returns rows sorted by
/// (side, k, branch).
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let interaction = cfg.interaction.to_core()?;
    let ks = cfg.k_grid.points()?;
    let opts = cfg.solver.to_options(interaction.has_negative_power());
    let sides = cfg.side.sides();

    let solve_points = |interaction: &Interaction| -> Vec<PointResult> {
        sides
            .iter()
            .flat_map(|&side| {
                let interaction = interaction.clone();
                let opts = opts.clone();
                ks.par_iter()
                    .map(move |&k| {
                        let outcome = WaveNumber::new(k)
                            .and_then(|k_val| {
                                let inc = Incidence::new(side, Complex64::new(cfg.amp, 0.0));
                                rt_from_transfer(&interaction, k_val, &inc, &opts)
                            })
                            .map_err(|e| e.to_string());
                        PointResult { k, side, outcome }
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    };

    let points = match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building worker pool")?;
            pool.install(|| solve_points(&interaction))
        }
        None => solve_points(&interaction),
    };

    let total = points.len();
    let failed = points.iter().filter(|p| p.outcome.is_err()).count();
    if total > 0 && failed == total {
        bail!(SolverExhausted(anyhow!(
            "every sweep point failed; first error: {}",
            points[0]
                .outcome
                .as_ref()
                .err()
                .cloned()
                .unwrap_or_default()
        )));
    }

    let mut rows = Vec::new();
    for &side in &sides {
        let mut tracker = BranchTracker::default();
        for p in points.iter().filter(|p| p.side == side) {
            match &p.outcome {
                Ok(set) => {
                    let ids = tracker.assign(&set.branches);
                    for (branch, id) in set.branches.iter().zip(ids) {
                        let mut flags = Vec::new();
                        if branch.tangency {
                            flags.push("tangency".to_string());
                        }
                        if set.window_exhausted {
                            flags.push("window-exhausted".to_string());
                        }
                        if cfg.verify {
                            if let Some(problem) =
                                verify_branch(&interaction, p.k, side, cfg.amp, branch, &opts)
                            {
                                flags.push(problem);
                            }
                        }
                        rows.push(make_row(p.k, side, id, branch, flags.join(";")));
                    }
                }
                Err(msg) => {
                    rows.push(SweepRow {
                        k: p.k,
                        side: side_tag(side).into(),
                        branch: 0,
                        n: f64::NAN,
                        re_r: f64::NAN,
                        im_r: f64::NAN,
                        re_t: f64::NAN,
                        im_t: f64::NAN,
                        abs_t2: f64::NAN,
                        residual: f64::NAN,
                        flags: format!("error:{}", msg.replace([',', '\n'], " ")),
                    });
                }
            }
        }
    }

    rows.sort_by(|a, b| {
        (a.side.as_str(), a.k, a.branch)
            .partial_cmp(&(b.side.as_str(), b.k, b.branch))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(rows)
}

/// Marker error: every point of the sweep failed (exit code 2).
#[derive(Debug)]
pub struct SolverExhausted(pub anyhow::Error);

impl std::fmt::Display for SolverExhausted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for SolverExhausted {}

fn make_row(k: f64, side: Side, branch: u32, b: &Branch, flags: String) -> SweepRow {
    SweepRow {
        k,
        side: side_tag(side).into(),
        branch,
        n: b.n,
        re_r: b.r.re,
        im_r: b.r.im,
        re_t: b.t.re,
        im_t: b.t.im,
        abs_t2: b.t.norm_sqr(),
        residual: b.residual,
        flags,
    }
}

fn verify_branch(
    interaction: &Interaction,
    k: f64,
    side: Side,
    amp: f64,
    branch: &Branch,
    opts: &scatter1d::SolveOptions,
) -> Option<String> {
    let k = WaveNumber::new(k).ok()?;
    let inc = Incidence::new(side, Complex64::new(amp, 0.0));
    match jost::solve_scattering(interaction, k, &inc, opts) {
        Ok(reference) => {
            let matched = reference.branches.iter().any(|b| {
                (b.n - branch.n).abs() < VERIFY_TOL.max(1e-8 * branch.n)
                    && (b.r - branch.r).norm() < VERIFY_TOL
                    && (b.t - branch.t).norm() < VERIFY_TOL
            });
            (!matched).then(|| "verify-mismatch".to_string())
        }
        Err(e) => Some(format!("verify-error:{e}").replace([',', '\n'], " ")),
    }
}

/// Nearest-`n` branch continuation across adjacent sweep points. Ids are
/// stable while a branch persists; new branches get fresh ids.
#[derive(Default)]
struct BranchTracker {
    previous: Vec<(u32, f64)>,
    next_id: u32,
}

impl BranchTracker {
    fn assign(&mut self, branches: &[Branch]) -> Vec<u32> {
        let mut ids = vec![u32::MAX; branches.len()];
        let mut taken = vec![false; self.previous.len()];

        // Greedy nearest-n matching against the previous point.
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (bi, b) in branches.iter().enumerate() {
            for (pi, (_, pn)) in self.previous.iter().enumerate() {
                candidates.push(((b.n - pn).abs(), bi, pi));
            }
        }
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for (_, bi, pi) in candidates {
            if ids[bi] == u32::MAX && !taken[pi] {
                ids[bi] = self.previous[pi].0;
                taken[pi] = true;
            }
        }
        for (bi, id) in ids.iter_mut().enumerate() {
            if *id == u32::MAX {
                *id = self.next_id;
                self.next_id += 1;
            }
            let _ = bi;
        }
        self.previous = ids.iter().zip(branches).map(|(&id, b)| (id, b.n)).collect();
        self.next_id = self.next_id.max(
            self.previous
                .iter()
                .map(|(id, _)| id + 1)
                .max()
                .unwrap_or(0),
        );
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepConfig;

    fn branch(n: f64) -> Branch {
        Branch {
            n,
            r: Complex64::new(0.0, 0.0),
            t: Complex64::new(1.0, 0.0),
            residual: 0.0,
            tangency: false,
        }
    }

    #[test]
    fn tracker_keeps_ids_across_points() {
        let mut t = BranchTracker::default();
        assert_eq!(t.assign(&[branch(1.0)]), vec![0]);
        assert_eq!(t.assign(&[branch(1.05)]), vec![0]);
        // A second branch appears: new id, old branch keeps its id.
        assert_eq!(t.assign(&[branch(1.1), branch(2.0)]), vec![0, 1]);
        // The lower branch vanishes; the surviving one still tracks by n.
        assert_eq!(t.assign(&[branch(2.02)]), vec![1]);
        // A reappearing branch gets a fresh id.
        assert_eq!(t.assign(&[branch(1.2), branch(2.04)]), vec![2, 1]);
    }

    #[test]
    fn sweep_rows_sorted_and_deterministic() {
        let cfg = SweepConfig::from_json(
            r#"{
                "interaction": {"type": "delta_chain", "sites": [
                    {"c": 0.0, "f": {"type": "constant", "z": [1.0, 0.0]}}]},
                "side": "both",
                "amp": 1.0,
                "k_grid": {"min": 0.3, "max": 2.0, "count": 7, "spacing": "linear"},
                "workers": 2
            }"#,
        )
        .unwrap();
        let rows1 = run_sweep(&cfg).unwrap();
        let rows2 = run_sweep(&cfg).unwrap();
        assert_eq!(rows1, rows2);
        assert_eq!(rows1.len(), 14);
        let mut sorted = rows1.clone();
        sorted.sort_by(|a, b| {
            (a.side.as_str(), a.k, a.branch)
                .partial_cmp(&(b.side.as_str(), b.k, b.branch))
                .unwrap()
        });
        assert_eq!(rows1, sorted);
        // Linear real site: flux conservation per row.
        for r in &rows1 {
            let flux = r.re_r * r.re_r + r.im_r * r.im_r + r.abs_t2;
            assert!((flux - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_flag_is_quiet_on_consistent_data() {
        let cfg = SweepConfig::from_json(
            r#"{
                "interaction": {"type": "delta_chain", "sites": [
                    {"c": 0.2, "f": {"type": "power_law", "z": [0.0, 1.0], "nu": 2.0}}]},
                "side": "left",
                "amp": 1.3,
                "k_grid": {"min": 0.5, "max": 1.5, "count": 5, "spacing": "linear"},
                "verify": true
            }"#,
        )
        .unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert!(!r.flags.contains("verify-mismatch"), "{:?}", r.flags);
        }
    }
}
