//! Exhaustive and randomized structure checks for the arc algebras that are
//! too heavy to live next to the modules.

use annular_core::algebra::{generation, relations, symmetries_report, Algebra};
use annular_core::config::{Band, Stack};
use annular_core::matching::Matching;
use annular_core::tangle::FlatTangle;
use annular_core::tqft::{apply_step, Slots, StateVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn associativity_is_exhaustive_for_rank_two() {
    let alg = Algebra::new(2);
    let k = alg.matchings().len();
    let mut checked = 0usize;
    for d in 0..k {
        for c in 0..k {
            let xs = alg.space(d, c).slots.basis();
            for b in 0..k {
                let ys = alg.space(c, b).slots.basis();
                for a in 0..k {
                    let zs = alg.space(b, a).slots.basis();
                    for dx in xs.iter() {
                        let x = alg.basis_element(d, c, dx.clone());
                        for dy in ys.iter() {
                            let y = alg.basis_element(c, b, dy.clone());
                            let xy = alg.multiply(&x, &y);
                            for dz in zs.iter() {
                                let z = alg.basis_element(b, a, dz.clone());
                                let lhs = alg.multiply(&xy, &z);
                                let rhs = alg.multiply(&x, &alg.multiply(&y, &z));
                                assert_eq!(lhs, rhs, "({},{},{},{})", d, c, b, a);
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 10_000, "only {} triples checked", checked);
}

#[test]
fn associativity_holds_on_random_rank_three_triples() {
    let alg = Algebra::new(3);
    let k = alg.matchings().len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..400 {
        let (d, c, b, a) = (
            rng.gen_range(0..k),
            rng.gen_range(0..k),
            rng.gen_range(0..k),
            rng.gen_range(0..k),
        );
        let pick = |hi: usize, lo: usize, rng: &mut ChaCha8Rng| {
            let basis = alg.space(hi, lo).slots.basis();
            let dec = basis.choose(rng).unwrap().clone();
            alg.basis_element(hi, lo, dec)
        };
        let x = pick(d, c, &mut rng);
        let y = pick(c, b, &mut rng);
        let z = pick(b, a, &mut rng);
        let lhs = alg.multiply(&alg.multiply(&x, &y), &z);
        let rhs = alg.multiply(&x, &alg.multiply(&y, &z));
        assert_eq!(lhs, rhs, "({},{},{},{})", d, c, b, a);
    }
}

#[test]
fn relations_hold_for_rank_three() {
    let alg = Algebra::new(3);
    let report = relations::relations_report(&alg);
    assert!(report.ok(), "{}", report);
}

#[test]
fn relations_hold_for_rank_four_including_far_commutativity() {
    let alg = Algebra::new(4);
    let report = relations::relations_report(&alg);
    assert!(report.ok(), "{}", report);
}

#[test]
fn degree_one_elements_generate_rank_three() {
    let alg = Algebra::new(3);
    let report = generation::generation_report(&alg);
    assert!(report.ok(), "{}", report);
}

#[test]
fn symmetries_hold_for_rank_two() {
    let alg = Algebra::new(2);
    let report = symmetries_report(&alg);
    assert!(report.ok(), "{}", report);
}

/// Number of boundary points the drawn arc of pair `(p, q)` passes over.
fn drawn_span(m: &Matching, p: usize, q: usize) -> usize {
    let inner = q - p - 1;
    let e = m.arc_at_point(p);
    if m.gap_inside(e, m.puncture_face()) {
        2 * m.n() - inner - 2
    } else {
        inner
    }
}

/// All orders of the middle saddles in which no pair is surgered while a
/// wider drawn arc still covers it.
fn valid_orders(m: &Matching) -> Vec<Vec<(usize, usize)>> {
    fn extend(
        m: &Matching,
        remaining: &mut Vec<(usize, usize)>,
        prefix: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if remaining.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..remaining.len() {
            let (p, q) = remaining[i];
            let covered = remaining.iter().any(|&(u, v)| {
                (u, v) != (p, q)
                    && drawn_span(m, u, v) > drawn_span(m, p, q)
                    && {
                        // (p, q) lies under (u, v)'s drawn arc.
                        let e = m.arc_at_point(u);
                        let under_chord = u < p && q < v;
                        if m.gap_inside(e, m.puncture_face()) {
                            !under_chord
                        } else {
                            under_chord
                        }
                    }
            });
            if covered {
                continue;
            }
            let pair = remaining.remove(i);
            prefix.push(pair);
            extend(m, remaining, prefix, out);
            prefix.pop();
            remaining.insert(i, pair);
        }
    }
    let mut out = Vec::new();
    extend(
        m,
        &mut m.pairs().to_vec(),
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Run the multiplication cobordism on every basis vector of the four-layer
/// stack with the given saddle order. The final circle index order depends on
/// the surgery history, so state vectors are re-keyed by a canonical circle
/// order (the smallest square arc each circle traverses) before returning.
fn run_order(stack: &Stack, order: &[(usize, usize)]) -> Vec<StateVector> {
    let config0 = stack.trace();
    let slots0 = Slots::from_config(&config0);
    let mut out = Vec::new();
    for dec in slots0.basis() {
        let mut v = StateVector::basis(dec);
        let mut config = config0.clone();
        let mut slots = slots0.clone();
        for &(p, q) in order {
            let outcome = config.surgery(
                stack,
                &Band {
                    lower: 1,
                    upper: 2,
                    p,
                    q,
                },
            );
            let after = Slots::from_config(&outcome.config);
            v = apply_step(&v, &outcome, &slots, &after);
            config = outcome.config;
            slots = after;
        }
        let key = |c: &annular_core::config::Circle| {
            c.items
                .iter()
                .filter_map(|it| match *it {
                    annular_core::config::Item::Arc { layer, arc, .. } => {
                        Some((layer, arc))
                    }
                    _ => None,
                })
                .min()
                .unwrap()
        };
        let mut idx: Vec<usize> = (0..config.circles.len()).collect();
        idx.sort_by_key(|&i| key(&config.circles[i]));
        let mut rank = vec![0usize; idx.len()];
        for (r, &i) in idx.iter().enumerate() {
            rank[i] = r;
        }
        let mut rekeyed = StateVector::zero();
        for (d, c) in v.terms() {
            let mut nd = d.clone();
            for (i, &r) in rank.iter().enumerate() {
                nd[r] = d[i];
            }
            rekeyed.add_term(nd, c.clone());
        }
        out.push(rekeyed);
    }
    out
}

#[test]
fn all_cover_respecting_saddle_orders_agree() {
    for n in 1..=2 {
        let ms = Matching::enumerate(n);
        for low in ms.iter() {
            for mid in ms.iter() {
                for top in ms.iter() {
                    let stack = Stack::new(vec![
                        FlatTangle::cup(low),
                        FlatTangle::cap(mid),
                        FlatTangle::cup(mid),
                        FlatTangle::cap(top),
                    ])
                    .unwrap();
                    let orders = valid_orders(mid);
                    assert!(!orders.is_empty());
                    let reference = run_order(&stack, &orders[0]);
                    for order in orders[1..].iter() {
                        assert_eq!(
                            run_order(&stack, order),
                            reference,
                            "order {:?} for {} {} {}",
                            order,
                            low,
                            mid,
                            top
                        );
                    }
                }
            }
        }
    }
}
