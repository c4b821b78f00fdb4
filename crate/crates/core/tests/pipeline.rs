//! End-to-end checks across sections, kernels, envelopes and measures.

use toric_bergman::bergman::BergmanLevel;
use toric_bergman::envelope::{equilibrium_envelope, pullback, contact_set};
use toric_bergman::geometry::{
    build_model, LogGrid, Model, MomentPolytope, Perturbation, SubvarietyDescriptor, SubvarietyKind, WeightSymbol,
};
use toric_bergman::ma::{monge_ampere, shipped_test_functions, weak_compare, TestFunction};
use toric_bergman::scenario::shipped_scenario;
use toric_bergman::volume::{fundamental_inequality_probe, moving_intersection};

fn shipped(id: &str) -> Model {
    shipped_scenario(id).unwrap().build().unwrap()
}

fn ambient(p: MomentPolytope, g: Perturbation, n: usize) -> Model {
    let grid = LogGrid::new(p.dim(), n, 12.0).unwrap();
    build_model(
        p.clone(),
        SubvarietyDescriptor::ambient_of(p.clone()),
        WeightSymbol::for_polytope(&p, g, 12.0),
        grid,
    )
    .unwrap()
}

#[test]
fn surface_envelopes_carry_full_mass() {
    let square = ambient(MomentPolytope::rectangle(1, 1), Perturbation::Zero, 33);
    let total = monge_ampere(&equilibrium_envelope(&square, true).unwrap()).unwrap().total;
    assert!((total - 2.0).abs() < 1e-9);
    let plane = shipped("p2_fs");
    let total = monge_ampere(&equilibrium_envelope(&plane, true).unwrap()).unwrap().total;
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn doubling_the_bundle_scales_volumes() {
    let line = ambient(MomentPolytope::interval(2), Perturbation::Zero, 129);
    let v = monge_ampere(&equilibrium_envelope(&line, true).unwrap()).unwrap().total;
    assert!((v - 2.0).abs() < 1e-12);
    let plane = ambient(MomentPolytope::simplex(2), Perturbation::Zero, 33);
    let v = monge_ampere(&equilibrium_envelope(&plane, true).unwrap()).unwrap().total;
    assert!((v - 4.0).abs() < 1e-9);
}

#[test]
fn constant_pairing_on_the_diagonal_is_one_over_m() {
    let model = shipped("diag_bump");
    let ma = monge_ampere(&equilibrium_envelope(&model, true).unwrap()).unwrap();
    for m in [4u32, 16, 64] {
        let level = BergmanLevel::new(&model, m).unwrap();
        let gap = weak_compare(&level, &ma, &[TestFunction::Constant])[0];
        assert!((gap - 1.0 / f64::from(m)).abs() < 1e-8, "m={m}: {gap}");
    }
}

#[test]
fn fubini_study_pairings_decay_like_one_over_m() {
    let model = shipped("p1_fs");
    let ma = monge_ampere(&equilibrium_envelope(&model, true).unwrap()).unwrap();
    let tests = shipped_test_functions();
    for m in [8u32, 32] {
        let gaps = weak_compare(&BergmanLevel::new(&model, m).unwrap(), &ma, &tests);
        for g in gaps {
            assert!(g <= 1.01 / f64::from(m), "m={m}: {g}");
        }
    }
}

#[test]
fn restricted_envelope_dominates_the_pulled_back_one() {
    let model = shipped("diag_bump");
    let restricted = equilibrium_envelope(&model, true).unwrap();
    let amb = equilibrium_envelope(&model, false).unwrap();
    let pulled = pullback(&model, &amb);
    // The ambient hull lives on a coarse grid; its interpolant overshoots by
    // at most O(h²) times the curvature.
    let h = model.ambient_grid().spacing();
    for (k, (a, r)) in pulled.iter().zip(&restricted.values).enumerate() {
        assert!(a <= &(r + h * h), "k={k}: {a} > {r}");
        assert!(r <= &(restricted.samples[k] + 1e-12));
    }
}

#[test]
fn kernel_is_dominated_by_the_envelope_gap() {
    for id in ["p1_bump", "diag_bump"] {
        let model = shipped(id);
        let env = equilibrium_envelope(&model, true).unwrap();
        for m in [8u32, 32] {
            let level = BergmanLevel::new(&model, m).unwrap();
            let k = level.kernel_grid(&model, model.grid()).unwrap();
            let sup = k.values.iter().cloned().fold(0.0, f64::max);
            let mf = f64::from(m);
            for i in 0..k.values.len() {
                let bound = (-mf * (env.samples[i] - env.values[i])).exp() * sup;
                assert!(k.values[i] <= bound * (1.0 + 1e-9), "{id} m={m} i={i}");
                assert!(k.values[i] >= 0.0);
            }
        }
    }
}

#[test]
fn local_morse_excess_shrinks_on_the_contact_set() {
    let model = shipped("p1_bump");
    let env = equilibrium_envelope(&model, true).unwrap();
    let contact = contact_set(&env);
    let u = model.restricted();
    let grid = model.grid();
    let excess: Vec<f64> = [8u32, 16, 32, 64]
        .iter()
        .map(|&m| {
            let k = BergmanLevel::new(&model, m).unwrap().kernel_grid(&model, grid).unwrap();
            (0..grid.len())
                .filter(|&i| contact.interior[i] && grid.in_inner_half(i))
                .map(|i| {
                    let t = grid.point(i);
                    let curv = u.hessian(&t[..1])[0][0];
                    k.values[i] * u.mu_density(&t[..1]) / f64::from(m) / curv - 1.0
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    assert!(excess.windows(2).all(|w| w[1] < w[0]), "{excess:?}");
}

#[test]
fn bump_constant_is_stable_under_adding_a_level() {
    let model = shipped("p1_bump");
    let env = equilibrium_envelope(&model, true).unwrap();
    let early = fundamental_inequality_probe(&model, &env, &[8, 16, 32]).unwrap();
    let full = fundamental_inequality_probe(&model, &env, &[8, 16, 32, 64]).unwrap();
    assert!((full.c - early.c).abs() / early.c < 0.1);
}

#[test]
fn moving_intersection_on_the_diagonal() {
    let model = shipped("diag_bump");
    for m in [1u32, 8, 64] {
        assert!((moving_intersection(&model, m).unwrap() - 2.0).abs() < 1e-6);
    }
}

#[test]
fn coordinate_curve_restricts_to_a_side() {
    let rect = MomentPolytope::rectangle(2, 1);
    let sub = SubvarietyDescriptor::new(SubvarietyKind::CoordinateCurve { axis: 0 }, rect.clone()).unwrap();
    let w = WeightSymbol::for_polytope(&rect, Perturbation::Zero, 12.0);
    let model = build_model(rect, sub, w, LogGrid::new(1, 129, 12.0).unwrap()).unwrap();
    let total = monge_ampere(&equilibrium_envelope(&model, true).unwrap()).unwrap().total;
    assert!((total - 2.0).abs() < 1e-12);
    let level = BergmanLevel::new(&model, 8).unwrap();
    assert_eq!(level.image_dims(), 17);
    assert!((level.trace() - 17.0).abs() < 1e-8 * 17.0);
}
