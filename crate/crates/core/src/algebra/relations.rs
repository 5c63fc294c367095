//! Instance-by-instance verification of the quadratic relations among the
//! degree-one generators: roundtrip products, far-commutativity, the
//! triangle relation, mixed-flip vanishing, the four-equal-paths relation
//! and the two sum relations.

use super::{Algebra, CheckReport, Element};
use crate::matching::{BoundaryItem, Matching, SurgeryArc};
use crate::ring::PolyAlpha;

fn comp_point(m: &Matching, e: usize) -> usize {
    m.pairs()[e].0
}

fn arcs_joining(m: &Matching, e: usize, f: usize) -> Vec<SurgeryArc> {
    m.surgery_arcs()
        .into_iter()
        .filter(|r| (r.arc1 == e && r.arc2 == f) || (r.arc1 == f && r.arc2 == e))
        .collect()
}

fn unique_arc(m: &Matching, e: usize, f: usize) -> Option<SurgeryArc> {
    let arcs = arcs_joining(m, e, f);
    if arcs.len() == 1 {
        Some(arcs[0])
    } else {
        None
    }
}

/// True when representatives of the two surgery arcs can be drawn disjointly:
/// either they live in different regions, or their ends do not interleave on
/// the common region boundary.
fn disjoint_arcs(m: &Matching, r1: &SurgeryArc, r2: &SurgeryArc) -> bool {
    if r1.region != r2.region {
        return true;
    }
    let regions = m.regions();
    let order: Vec<usize> = m
        .region_boundary(&regions, r1.region)
        .into_iter()
        .filter_map(|item| match item {
            BoundaryItem::Arc { arc, .. } => Some(arc),
            BoundaryItem::Gap(_) => None,
        })
        .collect();
    let pos = |arc: usize| order.iter().position(|&x| x == arc).unwrap();
    let (i, j) = (pos(r1.arc1), pos(r1.arc2));
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let strictly_between = |x: usize| lo < x && x < hi;
    strictly_between(pos(r2.arc1)) == strictly_between(pos(r2.arc2))
}

/// Roundtrip flip products: `y^j_{b,γ'} · y^i_{a,γ} = δ_ij (x_{a,γ} − α_i 1_a)`.
fn flip_roundtrips(alg: &Algebra, report: &mut CheckReport) {
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        for e in 0..alg.n() {
            if !m.is_outermost(e) {
                continue;
            }
            let (_, b) = alg.y_flip(a, e, 1);
            let e_back = alg.matchings()[b].arc_at_point(comp_point(&m, e));
            for i in 1..=2 {
                for j in 1..=2 {
                    let (yi, _) = alg.y_flip(a, e, i);
                    let (yj, back) = alg.y_flip(b, e_back, j);
                    assert_eq!(back, a, "flip is an involution");
                    let prod = alg.multiply(&yj, &yi);
                    let want = if i == j {
                        alg.x_gen(a, e)
                            .sub(&alg.idempotent(a).scale(&PolyAlpha::alpha(i)))
                    } else {
                        Element::zero()
                    };
                    report.check(prod == want, || {
                        format!("flip roundtrip a={} e={} i={} j={}", a, e, i, j)
                    });
                }
            }
        }
    }
}

/// Roundtrip swap products:
/// `y_{b,r'} · y_{a,r} = x_{a,γ1} + x_{a,γ2} − (α1+α2) 1_a`.
fn swap_roundtrips(alg: &Algebra, report: &mut CheckReport) {
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        for r in m.surgery_arcs() {
            let (y, b) = alg.y_swap(a, &r);
            let r_dual = m.dual_surgery_arc(&r);
            let (y_back, back) = alg.y_swap(b, &r_dual);
            assert_eq!(back, a, "dual arc undoes the surgery");
            let prod = alg.multiply(&y_back, &y);
            let want = alg
                .x_gen(a, r.arc1)
                .add(&alg.x_gen(a, r.arc2))
                .sub(&alg.idempotent(a).scale(
                    &(PolyAlpha::alpha(1) + PolyAlpha::alpha(2)),
                ));
            report.check(prod == want, || {
                format!("swap roundtrip a={} r=({},{})", a, r.arc1, r.arc2)
            });
        }
    }
}

/// First sum relation: for an adjacent pair with the puncture in the shared
/// region, the two labelled flip roundtrips add up to the swap roundtrip on
/// either side.
fn sum_relation_one(alg: &Algebra, report: &mut CheckReport) -> usize {
    let mut instances = 0;
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        for r in m.surgery_arcs() {
            if r.side.is_none() {
                continue;
            }
            let (g1, g2) = (r.arc1, r.arc2);
            if !m.is_outermost(g1) || !m.is_outermost(g2) {
                continue;
            }
            instances += 1;
            let roundtrip = |e: usize, i: usize| -> Element {
                let (yi, b) = alg.y_flip(a, e, i);
                let e_back = alg.matchings()[b].arc_at_point(comp_point(&m, e));
                let (y_back, _) = alg.y_flip(b, e_back, i);
                alg.multiply(&y_back, &yi)
            };
            let lhs = roundtrip(g1, 1).add(&roundtrip(g2, 2));
            let (y, b) = alg.y_swap(a, &r);
            let (y_back, _) = alg.y_swap(b, &m.dual_surgery_arc(&r));
            let rhs = alg.multiply(&y_back, &y);
            report.check(lhs == rhs, || {
                format!("sum relation 1 at a={} pair=({},{})", a, g1, g2)
            });
        }
    }
    instances
}

/// Far-commutativity of disjoint swaps on four distinct components.
fn far_commutativity_swaps(alg: &Algebra, report: &mut CheckReport) -> usize {
    let mut instances = 0;
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        let arcs: Vec<SurgeryArc> = m
            .surgery_arcs()
            .into_iter()
            .filter(|r| r.side.is_none())
            .collect();
        for (i, r1) in arcs.iter().enumerate() {
            for r2 in arcs[i + 1..].iter() {
                let comps = [r1.arc1, r1.arc2, r2.arc1, r2.arc2];
                let mut distinct = comps.to_vec();
                distinct.sort();
                distinct.dedup();
                if distinct.len() != 4 || !disjoint_arcs(&m, r1, r2) {
                    continue;
                }
                let leg = |first: &SurgeryArc, second: &SurgeryArc| -> Option<(usize, Element)> {
                    let (y1, b1) = alg.y_swap(a, first);
                    let mb = &alg.matchings()[b1];
                    let c1 = mb.arc_at_point(comp_point(&m, second.arc1));
                    let c2 = mb.arc_at_point(comp_point(&m, second.arc2));
                    let img = unique_arc(mb, c1, c2)?;
                    let (y2, b12) = alg.y_swap(b1, &img);
                    Some((b12, alg.multiply(&y2, &y1)))
                };
                let (Some((t1, p1)), Some((t2, p2))) = (leg(r1, r2), leg(r2, r1)) else {
                    continue;
                };
                instances += 1;
                report.check(t1 == t2 && p1 == p2, || {
                    format!(
                        "far-commutativity of swaps at a={} arcs ({},{}) ({},{})",
                        a, r1.arc1, r1.arc2, r2.arc1, r2.arc2
                    )
                });
            }
        }
    }
    instances
}

/// Far-commutativity of a swap with a disjoint flip.
fn far_commutativity_swap_flip(alg: &Algebra, report: &mut CheckReport) -> usize {
    let mut instances = 0;
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        for r in m.surgery_arcs() {
            if r.side.is_some() {
                continue;
            }
            for g in 0..alg.n() {
                if g == r.arc1 || g == r.arc2 || !m.is_outermost(g) {
                    continue;
                }
                let (y_swap_a, b) = alg.y_swap(a, &r);
                let mb = alg.matchings()[b].clone();
                let g_in_b = mb.arc_at_point(comp_point(&m, g));
                if !mb.is_outermost(g_in_b) {
                    continue;
                }
                let (_, b_flip) = alg.y_flip(a, g, 1);
                let mbf = &alg.matchings()[b_flip];
                let c1 = mbf.arc_at_point(comp_point(&m, r.arc1));
                let c2 = mbf.arc_at_point(comp_point(&m, r.arc2));
                let Some(img) = unique_arc(mbf, c1, c2) else {
                    continue;
                };
                instances += 1;
                for i in 1..=2 {
                    let (y_flip_b, c) = alg.y_flip(b, g_in_b, i);
                    let path1 = alg.multiply(&y_flip_b, &y_swap_a);
                    let (yi, _) = alg.y_flip(a, g, i);
                    let (y_swap_b, c_alt) = alg.y_swap(b_flip, &img);
                    let path2 = alg.multiply(&y_swap_b, &yi);
                    report.check(c == c_alt && path1 == path2, || {
                        format!(
                            "swap/flip far-commutativity a={} r=({},{}) γ={} i={}",
                            a, r.arc1, r.arc2, g, i
                        )
                    });
                }
            }
        }
    }
    instances
}

/// Triangle relation for three pairwise adjacent components.
fn triangle(alg: &Algebra, report: &mut CheckReport) -> usize {
    let mut instances = 0;
    let n = alg.n();
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        for e in 0..n {
            for f in e + 1..n {
                for g in f + 1..n {
                    let path = |x: usize, y: usize, z: usize| -> Option<(usize, Element)> {
                        let r1 = unique_arc(&m, x, y)?;
                        let (y1, b1) = alg.y_swap(a, &r1);
                        let mb = &alg.matchings()[b1];
                        let cz = mb.arc_at_point(comp_point(&m, z));
                        let news: Vec<usize> = {
                            let (p, q) = m.pairs()[x];
                            let (s, t) = m.pairs()[y];
                            let mut v = vec![
                                mb.arc_at_point(p),
                                mb.arc_at_point(q),
                                mb.arc_at_point(s),
                                mb.arc_at_point(t),
                            ];
                            v.sort();
                            v.dedup();
                            v
                        };
                        let mut cands = Vec::new();
                        for &c in news.iter() {
                            cands.extend(arcs_joining(mb, cz, c));
                        }
                        if cands.len() != 1 {
                            return None;
                        }
                        let (y2, b) = alg.y_swap(b1, &cands[0]);
                        Some((b, alg.multiply(&y2, &y1)))
                    };
                    let legs = [path(e, f, g), path(e, g, f), path(f, g, e)];
                    let legs: Vec<(usize, Element)> = match legs {
                        [Some(x), Some(y), Some(z)] => vec![x, y, z],
                        _ => continue,
                    };
                    instances += 1;
                    let same = legs.iter().all(|l| l.0 == legs[0].0)
                        && legs.iter().all(|l| l.1 == legs[0].1);
                    report.check(same, || {
                        format!("triangle relation a={} comps ({},{},{})", a, e, f, g)
                    });
                }
            }
        }
    }
    instances
}

/// The four-equal-paths relation on an adjacent outermost pair with the
/// puncture in the shared region.
fn four_paths(alg: &Algebra, report: &mut CheckReport) -> usize {
    let mut instances = 0;
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        let side_arcs: Vec<SurgeryArc> = m
            .surgery_arcs()
            .into_iter()
            .filter(|r| r.side.is_some())
            .collect();
        let mut seen_pairs = Vec::new();
        for r in side_arcs.iter() {
            let (g1, g2) = (r.arc1.min(r.arc2), r.arc1.max(r.arc2));
            if seen_pairs.contains(&(g1, g2)) {
                continue;
            }
            seen_pairs.push((g1, g2));
            if !m.is_outermost(g1) || !m.is_outermost(g2) {
                continue;
            }
            let pair_arcs: Vec<SurgeryArc> = side_arcs
                .iter()
                .filter(|s| s.arc1.min(s.arc2) == g1 && s.arc1.max(s.arc2) == g2)
                .cloned()
                .collect();
            if pair_arcs.len() != 2 {
                continue;
            }
            // Flip-first legs determine the common target b.
            let flip_leg = |e: usize, i: usize| -> Option<(usize, Element)> {
                let (y1, c) = alg.y_flip(a, e, i);
                let mc = &alg.matchings()[c];
                let e1 = mc.arc_at_point(comp_point(&m, g1));
                let e2 = mc.arc_at_point(comp_point(&m, g2));
                let arc = unique_arc(mc, e1, e2)?;
                let (y2, b) = alg.y_swap(c, &arc);
                Some((b, alg.multiply(&y2, &y1)))
            };
            // Swap-first legs: flip whichever outermost component of the
            // intermediate lands on b.
            let swap_leg = |r: &SurgeryArc, i: usize, b: usize| -> Option<Element> {
                let (y1, b1) = alg.y_swap(a, r);
                let mb = alg.matchings()[b1].clone();
                for e in 0..alg.n() {
                    if mb.is_outermost(e) && alg.idx(&mb.flip(e)) == b {
                        let (y2, _) = alg.y_flip(b1, e, i);
                        return Some(alg.multiply(&y2, &y1));
                    }
                }
                None
            };
            let mut checked = false;
            for i in 1..=2 {
                let (Some((b3, p3)), Some((b4, p4))) = (flip_leg(g1, i), flip_leg(g2, i))
                else {
                    continue;
                };
                if b3 != b4 {
                    report.check(false, || {
                        format!("four paths: flip legs disagree on target, a={}", a)
                    });
                    continue;
                }
                let (Some(p1), Some(p2)) = (
                    swap_leg(&pair_arcs[0], i, b3),
                    swap_leg(&pair_arcs[1], i, b3),
                ) else {
                    continue;
                };
                checked = true;
                report.check(
                    p1 == p2 && p1 == p3 && p3 == p4,
                    || format!("four paths a={} pair=({},{}) i={}", a, g1, g2, i),
                );
            }
            if checked {
                instances += 1;
            }
        }
    }
    instances
}

/// Second sum relation: with `c = f_{γ2}(a)` and `d = f_{γ1}(a)`, the two
/// labelled flip-flip paths through `a` sum to the swap-swap path through
/// the nested middle diagram.
fn sum_relation_two(alg: &Algebra, report: &mut CheckReport) -> usize {
    let mut instances = 0;
    for a in 0..alg.matchings().len() {
        let m = alg.matchings()[a].clone();
        let mut seen_pairs = Vec::new();
        for r in m.surgery_arcs() {
            if r.side.is_none() {
                continue;
            }
            let (g1, g2) = (r.arc1.min(r.arc2), r.arc1.max(r.arc2));
            if seen_pairs.contains(&(g1, g2)) {
                continue;
            }
            seen_pairs.push((g1, g2));
            if !m.is_outermost(g1) || !m.is_outermost(g2) {
                continue;
            }
            let (_, c) = alg.y_flip(a, g2, 1);
            let (_, d) = alg.y_flip(a, g1, 1);
            let mc = alg.matchings()[c].clone();
            let g2_in_c = mc.arc_at_point(comp_point(&m, g2));
            // Flip-flip paths c → a → d, summed over the label.
            let mut lhs = Element::zero();
            for i in 1..=2 {
                let (y_back, back) = alg.y_flip(c, g2_in_c, i);
                assert_eq!(back, a);
                let (y_fwd, fwd) = alg.y_flip(a, g1, i);
                assert_eq!(fwd, d);
                lhs = lhs.add(&alg.multiply(&y_fwd, &y_back));
            }
            // Swap-swap path c → b → d through the nested diagram.
            let g1_in_c = mc.arc_at_point(comp_point(&m, g1));
            let to_b: Vec<SurgeryArc> = arcs_joining(&mc, g1_in_c, g2_in_c);
            let mut rhs = None;
            for arc in to_b.iter() {
                let (y1, b) = alg.y_swap(c, arc);
                let mb = alg.matchings()[b].clone();
                let e1 = mb.arc_at_point(comp_point(&m, g1));
                let e2 = mb.arc_at_point(comp_point(&m, g2));
                for arc2 in arcs_joining(&mb, e1, e2).iter() {
                    let (y2, t) = alg.y_swap(b, arc2);
                    if t == d {
                        rhs = Some(alg.multiply(&y2, &y1));
                        break;
                    }
                }
                if rhs.is_some() {
                    break;
                }
            }
            let Some(rhs) = rhs else {
                continue;
            };
            instances += 1;
            report.check(lhs == rhs, || {
                format!("sum relation 2 at a={} pair=({},{})", a, g1, g2)
            });
        }
    }
    instances
}

/// Run all relation families and report instance counts.
pub fn relations_report(alg: &Algebra) -> CheckReport {
    let mut report = CheckReport::new("relations");
    flip_roundtrips(alg, &mut report);
    swap_roundtrips(alg, &mut report);
    let n = alg.n();
    let c1 = sum_relation_one(alg, &mut report);
    report.check(n < 2 || c1 > 0, || "no instances of sum relation 1".into());
    let c2 = four_paths(alg, &mut report);
    report.check(n < 2 || c2 > 0, || "no instances of the four-path relation".into());
    let c3 = sum_relation_two(alg, &mut report);
    report.check(n < 2 || c3 > 0, || "no instances of sum relation 2".into());
    let c4 = far_commutativity_swap_flip(alg, &mut report);
    report.check(n < 3 || c4 > 0, || "no swap/flip far-commutativity instances".into());
    let c5 = triangle(alg, &mut report);
    report.check(n < 3 || c5 > 0, || "no triangle instances".into());
    let c6 = far_commutativity_swaps(alg, &mut report);
    report.check(n < 4 || c6 > 0, || "no swap far-commutativity instances".into());
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_hold_for_small_ranks() {
        for n in 1..=2 {
            let alg = Algebra::new(n);
            let report = relations_report(&alg);
            assert!(report.ok(), "{}", report);
        }
    }
}
