//! Rank-two (and one rank-three) checks of the tangle bimodules: action
//! axioms, projectivity on both sides, tensor composition, isotopy
//! invariance and biadjointness of the elementary cups.

use annular_core::algebra::Algebra;
use annular_core::bimodule::{
    actions_report, biadjointness_report, dehn_twist_report, elementary_cup,
    identity_bimodule_report, left_projective_decomposition, projectivity_report,
    right_projective_decomposition, tensor_iso_report, tensor_linearity_report,
    Bimodule, TensorPsi,
};
use annular_core::tangle::FlatTangle;

#[test]
fn identity_bimodule_at_rank_three() {
    let alg = Algebra::new(3);
    let report = identity_bimodule_report(&alg);
    assert!(report.ok(), "{}", report);
}

#[test]
fn actions_on_rank_two_cups_and_caps() {
    let alg2 = Algebra::new(2);
    let alg1 = Algebra::new(1);
    for i in 1..=3 {
        let cup = elementary_cup(2, i);
        let bim = Bimodule::new(&alg2, &alg1, &cup).unwrap();
        let report = actions_report(&bim);
        assert!(report.ok(), "cup {}: {}", i, report);
        let bim = Bimodule::new(&alg1, &alg2, &cup.reflect()).unwrap();
        let report = actions_report(&bim);
        assert!(report.ok(), "cap {}: {}", i, report);
    }
}

#[test]
fn actions_on_the_rank_two_twist() {
    let alg = Algebra::new(2);
    let bim = Bimodule::new(&alg, &alg, &FlatTangle::tw(2)).unwrap();
    let report = actions_report(&bim);
    assert!(report.ok(), "{}", report);
}

#[test]
fn actions_on_a_rank_two_turnback_tangle() {
    let alg = Algebra::new(2);
    // Cap at 2,3 then cup at 2,3: one turnback on each boundary.
    let t = elementary_cup(2, 2)
        .reflect()
        .compose(&elementary_cup(2, 2))
        .unwrap();
    let bim = Bimodule::new(&alg, &alg, &t).unwrap();
    let report = actions_report(&bim);
    assert!(report.ok(), "{}", report);
    let report = projectivity_report(&bim);
    assert!(report.ok(), "{}", report);
}

#[test]
fn projectivity_for_rank_two_tangles() {
    let alg2 = Algebra::new(2);
    let alg1 = Algebra::new(1);
    for i in 1..=3 {
        let cup = elementary_cup(2, i);
        let bim = Bimodule::new(&alg2, &alg1, &cup).unwrap();
        let report = projectivity_report(&bim);
        assert!(report.ok(), "cup {}: {}", i, report);
        // One turnback persists on the left, none on the right.
        assert_eq!(
            left_projective_decomposition(&bim).len(),
            alg1.matchings().len()
        );
        assert!(!right_projective_decomposition(&bim).is_empty());
    }
    let tw = Bimodule::new(&alg2, &alg2, &FlatTangle::tw(2)).unwrap();
    let report = projectivity_report(&tw);
    assert!(report.ok(), "{}", report);
}

#[test]
fn tensor_composition_at_rank_two() {
    let alg2 = Algebra::new(2);
    let alg1 = Algebra::new(1);
    let cup = elementary_cup(2, 1);
    let cap = cup.reflect();

    // Twist after a cup: H^2-H^1 composed with H^2-H^2.
    let bim1 = Bimodule::new(&alg2, &alg1, &cup).unwrap();
    let bim2 = Bimodule::new(&alg2, &alg2, &FlatTangle::tw(2)).unwrap();
    let t = cup.compose(&FlatTangle::tw(2)).unwrap().normalize();
    let comp = Bimodule::new(&alg2, &alg1, &t).unwrap();
    let psi = TensorPsi::new(&bim2, &bim1, &comp).unwrap();
    let report = tensor_iso_report(&psi);
    assert!(report.ok(), "{}", report);
    let report = tensor_linearity_report(&psi);
    assert!(report.ok(), "{}", report);

    // Cap after a cup: the turnback tangle through the middle algebra H^2.
    let bimc = Bimodule::new(&alg2, &alg1, &cup).unwrap();
    let bimb = Bimodule::new(&alg1, &alg2, &cap).unwrap();
    let t = cup.compose(&cap).unwrap();
    let comp = Bimodule::new(&alg1, &alg1, &t).unwrap();
    let psi = TensorPsi::new(&bimb, &bimc, &comp).unwrap();
    let report = tensor_iso_report(&psi);
    assert!(report.ok(), "{}", report);
    let report = tensor_linearity_report(&psi);
    assert!(report.ok(), "{}", report);
}

#[test]
fn dehn_twist_invariance_at_rank_two() {
    let alg2 = Algebra::new(2);
    let alg1 = Algebra::new(1);
    let bim = Bimodule::new(&alg2, &alg1, &elementary_cup(2, 2)).unwrap();
    let report = dehn_twist_report(&bim);
    assert!(report.ok(), "{}", report);
    let bim = Bimodule::new(&alg2, &alg2, &FlatTangle::id(2)).unwrap();
    let report = dehn_twist_report(&bim);
    assert!(report.ok(), "{}", report);
}

#[test]
fn biadjointness_of_rank_two_cups() {
    let outer = Algebra::new(2);
    let inner = Algebra::new(1);
    for i in 1..=3 {
        let report = biadjointness_report(&outer, &inner, i);
        assert!(report.ok(), "cup {}: {}", i, report);
    }
}
