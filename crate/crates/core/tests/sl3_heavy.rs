//! Growth and minimal cut path checks over exhaustive small corpora:
//! round trips in both directions, enumeration against the closed counting
//! formula, schedule independence, structural properties of grown webs,
//! and skein confluence on randomized elliptic webs.

use annular_core::ring::LaurentQA;
use annular_core::sl3::grow;
use annular_core::sl3::path::{self, SignString, StateString};
use annular_core::sl3::reduce::{self, SkeinVector};
use annular_core::sl3::web::{Web, WebJson};
use num_bigint::BigInt;

fn all_sign_strings(n: usize) -> Vec<SignString> {
    (0..1u32 << n)
        .map(|mask| {
            SignString((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
        })
        .collect()
}

#[test]
fn min_cut_inverts_growth_up_to_length_five() {
    for n in 0..=5usize {
        for signs in all_sign_strings(n) {
            for states in path::enumerate_states(&signs) {
                let web = grow::grow(&signs, &states).unwrap();
                web.check().unwrap();
                assert_eq!(
                    web.min_cut_states().unwrap(),
                    (signs.clone(), states.clone()),
                    "({}; {})",
                    signs,
                    states
                );
            }
        }
    }
}

#[test]
fn growth_inverts_min_cut_on_enumerated_webs() {
    for n in 0..=5usize {
        for signs in all_sign_strings(n) {
            for (states, web) in grow::enumerate_webs(&signs).unwrap() {
                let (sg, st) = web.min_cut_states().unwrap();
                let regrown = grow::grow(&sg, &st).unwrap();
                assert_eq!(
                    web.canonical_form(),
                    regrown.canonical_form(),
                    "({}; {})",
                    signs,
                    states
                );
            }
        }
    }
}

#[test]
fn enumeration_matches_the_counting_formula_up_to_length_six() {
    for n in 0..=6usize {
        for signs in all_sign_strings(n) {
            let webs = grow::enumerate_webs(&signs).unwrap();
            assert_eq!(
                BigInt::from(webs.len()),
                path::count_closed_paths(&signs),
                "{}",
                signs
            );
            // The webs are pairwise distinct rel boundary.
            let mut forms: Vec<String> =
                webs.iter().map(|(_, w)| w.canonical_form()).collect();
            forms.sort();
            let before = forms.len();
            forms.dedup();
            assert_eq!(forms.len(), before, "{}", signs);
        }
    }
}

#[test]
fn growth_is_schedule_independent_up_to_length_five() {
    for n in 0..=5usize {
        for signs in all_sign_strings(n) {
            for states in path::enumerate_states(&signs) {
                grow::order_independence_check(&signs, &states, 11, 4).unwrap();
            }
        }
    }
}

#[test]
fn grown_webs_are_nonelliptic_with_the_expected_faces() {
    for n in 0..=5usize {
        for signs in all_sign_strings(n) {
            for (states, web) in grow::enumerate_webs(&signs).unwrap() {
                assert!(web.is_nonelliptic(), "({}; {})", signs, states);
                if !web.live_web_edges().is_empty() {
                    assert!(
                        web.has_outer_u_y_or_h(),
                        "({}; {}) lacks an outer face with 1 to 3 web sides",
                        signs,
                        states
                    );
                    if web.web_connected() {
                        web.euler_identities().unwrap();
                    }
                }
                web.canonical_flow().unwrap();
            }
        }
    }
}

#[test]
fn grown_webs_round_trip_through_json() {
    for signs in all_sign_strings(4) {
        for (_, web) in grow::enumerate_webs(&signs).unwrap() {
            let json = web.to_json();
            let text = serde_json::to_string(&json).unwrap();
            let back: WebJson = serde_json::from_str(&text).unwrap();
            let rebuilt = Web::from_json(&back).unwrap();
            assert_eq!(web.canonical_form(), rebuilt.canonical_form());
            assert_eq!(web.min_cut_states().unwrap(), rebuilt.min_cut_states().unwrap());
        }
    }
}

#[test]
fn skein_reduction_is_confluent_on_two_hundred_random_elliptic_webs() {
    let hook = LaurentQA::essential_rank();
    let mut seen = 0usize;
    let mut seed = 0u64;
    'outer: for n in [2usize, 3, 4, 5] {
        for signs in all_sign_strings(n) {
            for states in path::enumerate_states(&signs) {
                for round in 0..3u64 {
                    seed += 1;
                    let web =
                        reduce::random_elliptic_web(&signs, &states, 1000 * seed + round)
                            .unwrap();
                    if web.essential_circles() > 0 {
                        continue;
                    }
                    let det = reduce::reduce(&web, Some(&hook)).unwrap();
                    assert!(!det.is_zero());
                    for t in 0..2 {
                        let got =
                            reduce::reduce_random(&web, Some(&hook), 7 * seed + t).unwrap();
                        assert_eq!(det, got, "({}; {}) seed {}", signs, states, seed);
                    }
                    seen += 1;
                    if seen >= 200 {
                        break 'outer;
                    }
                }
            }
        }
    }
    assert!(seen >= 200, "only {} elliptic webs were generated", seen);
}

#[test]
fn reduction_restores_the_basis_expansion_of_modified_webs() {
    // Collapsing an inserted bigon multiplies by [2]; a reduced web stays a
    // single basis vector with that scalar.
    for signs in all_sign_strings(3) {
        for states in path::enumerate_states(&signs) {
            let base = grow::grow(&signs, &states).unwrap();
            let mut web = base.clone();
            let Some(&edge) = web.live_web_edges().first() else { continue };
            reduce::insert_bigon(&mut web, edge).unwrap();
            let got = reduce::reduce(&web, None).unwrap();
            let mut expect = SkeinVector::zero();
            expect.add((signs.clone(), states.clone()), &LaurentQA::bracket2());
            assert_eq!(got, expect, "({}; {})", signs, states);
        }
    }
}

#[test]
fn state_enumeration_orders_and_negation_symmetry() {
    for n in 0..=5usize {
        for signs in all_sign_strings(n) {
            let states = path::enumerate_states(&signs);
            let mut sorted = states.clone();
            sorted.sort();
            assert_eq!(states, sorted, "{}", signs);
            assert_eq!(
                states.len(),
                path::enumerate_states(&signs.negated()).len(),
                "{}",
                signs
            );
            for st in &states {
                assert!(path::is_admissible(&signs, st));
            }
        }
    }
}

#[test]
fn depths_of_the_triple_plus_web() {
    let signs = SignString::parse("+++").unwrap();
    let states = StateString::new(vec![-1, 0, 1]).unwrap();
    let web = grow::grow(&signs, &states).unwrap();
    let faces = web.faces();
    let depth = web.depths(&faces);
    // Depths of the faces inside each boundary arc step by the states.
    let arc_depths: Vec<i64> = (0..3)
        .map(|k| depth[web.inner_face_of_arc(&faces, k)].unwrap() as i64)
        .collect();
    for k in 0..3 {
        let prev = arc_depths[(k + 2) % 3];
        assert_eq!(arc_depths[k] - prev, states.0[k] as i64);
    }
    assert_eq!(*arc_depths.iter().min().unwrap(), 1);
}
