//! Property tests for the structural invariants: validation idempotence,
//! residual-form identity, determinant/composition algebra, gauge identity,
//! route equivalence, and root reproducibility under grid refinement.

mod common;

use common::c;
use num_complex::Complex64;
use proptest::prelude::*;
use scatter1d::selfconsist::{
    enumerate_roots, single_delta_residual, single_delta_residual_compact, SolveOptions,
};
use scatter1d::xfer::{compose, delta_transfer, double_delta_matrix, rt_from_transfer};
use scatter1d::{
    jost, DeltaSite, Incidence, Interaction, NonlinearityFn, PolyTerm, Side, WaveNumber,
};

fn kn(v: f64) -> WaveNumber {
    WaveNumber::new(v).unwrap()
}

fn coupling_strategy() -> impl Strategy<Value = NonlinearityFn> {
    prop_oneof![
        Just(NonlinearityFn::Zero),
        ((-2.0..2.0f64), (-2.0..2.0f64)).prop_map(|(re, im)| NonlinearityFn::Constant(c(re, im))),
        ((-2.0..2.0f64), (-2.0..2.0f64), (-0.5..3.0f64))
            .prop_filter("nonzero coupling", |(re, im, _)| re.hypot(*im) > 1e-3)
            .prop_map(|(re, im, nu)| NonlinearityFn::power_law(c(re, im), nu).unwrap()),
        (
            (-1.5..1.5f64),
            (-1.5..1.5f64),
            (-1.5..1.5f64),
            (-1.5..1.5f64)
        )
            .prop_map(|(a, b, d, e)| NonlinearityFn::polynomial(vec![
                PolyTerm {
                    coeff: c(a, b),
                    power: 0.0
                },
                PolyTerm {
                    coeff: c(d, e),
                    power: 2.0
                },
            ])
            .unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn validation_is_idempotent(
        mut positions in prop::collection::vec(-5.0..5.0f64, 1..5),
        f in coupling_strategy(),
    ) {
        positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
        positions.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let sites: Vec<DeltaSite> = positions
            .iter()
            .map(|&p| DeltaSite { position: p, coupling: f.clone() })
            .collect();
        let once = Interaction::DeltaChain(sites).validated().unwrap();
        let twice = once.clone().validated().unwrap();
        prop_assert_eq!(once.sites().unwrap(), twice.sites().unwrap());
    }

    #[test]
    fn residual_forms_coincide(
        f in coupling_strategy(),
        k in 0.1..5.0f64,
        amp in 0.0..4.0f64,
        x in 1e-3..8.0f64,
    ) {
        let expanded = single_delta_residual(&f, kn(k), amp).eval(x).unwrap();
        let compact = single_delta_residual_compact(&f, kn(k), amp).eval(x).unwrap();
        let scale = expanded.abs().max(compact.abs()).max(1.0);
        prop_assert!((expanded - compact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn determinant_and_composition_identities(
        f1 in coupling_strategy(),
        f2 in coupling_strategy(),
        k in 0.4..4.0f64,
        gap in 0.2..2.5f64,
        (ra, ta) in (0.05..0.2f64, 0.0..core::f64::consts::TAU),
        (rb, tb) in (0.3..0.55f64, 0.0..core::f64::consts::TAU),
    ) {
        let s1 = DeltaSite { position: -0.5 * gap, coupling: f1 };
        let s2 = DeltaSite { position: 0.5 * gap, coupling: f2 };
        let a = Complex64::from_polar(ra, ta);
        let b = Complex64::from_polar(rb, tb);

        let composed = compose(delta_transfer(&s2, kn(k)), delta_transfer(&s1, kn(k))).unwrap();
        let m = composed.eval(a, b).unwrap();
        let closed = double_delta_matrix(&s1, &s2, kn(k), a, b).unwrap();

        let scale = m.m11.norm().max(m.m12.norm()).max(m.m21.norm()).max(m.m22.norm()).max(1.0);
        prop_assert!(m.max_abs_diff(&closed) <= 1e-13 * scale);
        prop_assert!((m.det() - c(1.0, 0.0)).norm() <= 1e-13 * scale * scale);
    }

    #[test]
    fn gauge_term_annihilates_its_argument(
        f in coupling_strategy(),
        k in 0.3..4.0f64,
        (ra, ta) in (0.0..1.5f64, 0.0..core::f64::consts::TAU),
        (rb, tb) in (0.0..1.5f64, 0.0..core::f64::consts::TAU),
        (g1re, g1im, g2re, g2im) in (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64),
    ) {
        let site = DeltaSite { position: 0.2, coupling: f };
        let base = delta_transfer(&site, kn(k));
        let gauge = scatter1d::xfer::GaugeTransform::new(
            move |a, b| c(g1re, g1im) * a + b * c(0.1, -0.2),
            move |a, b| c(g2re, g2im) + a * b,
        );
        let perturbed = scatter1d::xfer::gauge_perturb(base.clone(), gauge);
        let a = Complex64::from_polar(ra, ta);
        let b = Complex64::from_polar(rb, tb);
        let (x0, y0) = base.apply(a, b).unwrap();
        let (x1, y1) = perturbed.apply(a, b).unwrap();
        let scale = x0.norm().max(y0.norm()).max(1.0);
        prop_assert!((x1 - x0).norm() <= 1e-13 * scale);
        prop_assert!((y1 - y0).norm() <= 1e-13 * scale);
    }

    #[test]
    fn scattering_routes_agree_on_single_sites(
        f in coupling_strategy(),
        k in 0.15..6.0f64,
        amp in 0.1..3.0f64,
        side_right in any::<bool>(),
    ) {
        let interaction = Interaction::single_delta(0.4, f).unwrap();
        let side = if side_right { Side::Right } else { Side::Left };
        let inc = Incidence::new(side, c(amp, 0.0));
        let opts = SolveOptions::default();
        let via_jost = jost::solve_scattering(&interaction, kn(k), &inc, &opts).unwrap();
        let via_xfer = rt_from_transfer(&interaction, kn(k), &inc, &opts).unwrap();

        let a: Vec<_> = via_jost.branches.iter().filter(|b| !b.tangency).collect();
        let b: Vec<_> = via_xfer.branches.iter().filter(|b| !b.tangency).collect();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.n - y.n).abs() < 1e-9);
            prop_assert!((x.r - y.r).norm() < 1e-9);
            prop_assert!((x.t - y.t).norm() < 1e-9);
        }
    }

    #[test]
    fn roots_survive_grid_refinement(
        f in coupling_strategy(),
        k in 0.2..4.0f64,
        amp in 0.1..3.0f64,
    ) {
        let residual = single_delta_residual(&f, kn(k), amp);
        let window = (if f.has_negative_power() { 1e-9 } else { 0.0 }, 10.0 * amp.max(1.0));
        let coarse = enumerate_roots(&residual, window, 2000, 1e-10).unwrap();
        let fine = enumerate_roots(&residual, window, 8000, 1e-10).unwrap();
        for hit in coarse.roots.iter().filter(|h| !h.tangency) {
            let reproduced = fine
                .roots
                .iter()
                .any(|h| !h.tangency && (h.x - hit.x).abs() < 1e-9 * hit.x.max(1.0));
            prop_assert!(reproduced, "root {} lost at 4x resolution", hit.x);
        }
    }
}
