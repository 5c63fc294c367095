//! Certificates that `H^n` is generated in degrees zero and one.
//!
//! Every standard basis element is expressed as a polynomial combination of
//! products of idempotents and the two kinds of degree-one generators
//! (flips and swaps), following the constructive argument: strip dots by
//! multiplying with dotted diagonal generators, split contractible circles
//! with more than two segments along reducing arcs, and peel essential
//! circles by flipping an outermost component.

use super::{Algebra, CheckReport, Element};
use crate::matching::SurgeryArc;
use crate::ring::PolyAlpha;
use crate::tqft::Dec;
use std::fmt;

/// A formal expression in degree-zero and degree-one generators.
#[derive(Clone, Debug)]
pub enum Expr {
    /// The idempotent `1_a`.
    One(usize),
    /// Flip generator `y^label` along the outermost component `comp` of `a`.
    YFlip { a: usize, comp: usize, label: usize },
    /// Swap generator along a surgery arc of `a`.
    YSwap { a: usize, arc: SurgeryArc },
    Scaled(PolyAlpha, Box<Expr>),
    Sum(Vec<Expr>),
    Prod(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, alg: &Algebra) -> Element {
        match self {
            Expr::One(a) => alg.idempotent(*a),
            Expr::YFlip { a, comp, label } => alg.y_flip(*a, *comp, *label).0,
            Expr::YSwap { a, arc } => alg.y_swap(*a, arc).0,
            Expr::Scaled(c, e) => e.eval(alg).scale(c),
            Expr::Sum(es) => es
                .iter()
                .fold(Element::zero(), |acc, e| acc.add(&e.eval(alg))),
            Expr::Prod(l, r) => alg.multiply(&l.eval(alg), &r.eval(alg)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::One(a) => write!(f, "1[{}]", a),
            Expr::YFlip { a, comp, label } => write!(f, "yf[{};{};{}]", a, comp, label),
            Expr::YSwap { a, arc } => write!(
                f,
                "ys[{};{}-{}{}]",
                a,
                arc.arc1,
                arc.arc2,
                match arc.side {
                    None => String::new(),
                    Some(s) => format!(";{}", s),
                }
            ),
            Expr::Scaled(c, e) => write!(f, "({})·{}", c, e),
            Expr::Sum(es) => {
                f.write_str("(")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}", e)?;
                }
                f.write_str(")")
            }
            Expr::Prod(l, r) => write!(f, "{}·{}", l, r),
        }
    }
}

/// A certified factorization of one standard basis element.
pub struct Certificate {
    pub b: usize,
    pub a: usize,
    pub dec: Vec<Dec>,
    pub expr: Expr,
}

/// The unique surgery arc joining the nested adjacent components `e < f`.
fn nested_arc(alg: &Algebra, a: usize, e: usize, f: usize) -> Option<SurgeryArc> {
    let m = &alg.matchings()[a];
    let arcs: Vec<SurgeryArc> = m
        .surgery_arcs()
        .into_iter()
        .filter(|r| {
            (r.arc1 == e && r.arc2 == f) || (r.arc1 == f && r.arc2 == e)
        })
        .collect();
    if arcs.len() == 1 {
        Some(arcs[0])
    } else {
        None
    }
}

/// Certificate for the dotted diagonal generator `x_{a,e}`, by induction on
/// the nesting depth of the component `e`.
pub fn certify_x(alg: &Algebra, a: usize, e: usize) -> Result<Expr, String> {
    let m = &alg.matchings()[a];
    if m.is_outermost(e) {
        let b = alg.idx(&m.flip(e));
        let p = m.pairs()[e].0;
        let e_flipped = alg.matchings()[b].arc_at_point(p);
        return Ok(Expr::Sum(vec![
            Expr::Prod(
                Box::new(Expr::YFlip {
                    a: b,
                    comp: e_flipped,
                    label: 1,
                }),
                Box::new(Expr::YFlip { a, comp: e, label: 1 }),
            ),
            Expr::Scaled(PolyAlpha::alpha(1), Box::new(Expr::One(a))),
        ]));
    }
    // Parent: the minimal component strictly containing e. It is adjacent
    // to e, and nested pairs admit a unique surgery arc.
    let parent = (0..alg.n())
        .filter(|&f| m.nested_below(e, f))
        .find(|&f| {
            !(0..alg.n())
                .any(|g| m.nested_below(e, g) && m.nested_below(g, f))
        })
        .ok_or("no parent for a non-outermost component")?;
    let r = nested_arc(alg, a, e, parent)
        .ok_or("nested adjacent pair without a unique surgery arc")?;
    let b_m = m.surgery(&r);
    let b = alg.idx(&b_m);
    let r_dual = m.dual_surgery_arc(&r);
    Ok(Expr::Sum(vec![
        Expr::Prod(
            Box::new(Expr::YSwap { a: b, arc: r_dual }),
            Box::new(Expr::YSwap { a, arc: r }),
        ),
        Expr::Scaled(-PolyAlpha::one(), Box::new(certify_x(alg, a, parent)?)),
        Expr::Scaled(
            PolyAlpha::alpha(1) + PolyAlpha::alpha(2),
            Box::new(Expr::One(a)),
        ),
    ]))
}

/// Transfer the decoration of `dec` (on the `(b, a)` configuration) to a
/// configuration whose circles are matched by boundary point sets, with
/// `reset` point sets becoming undotted circles.
fn transfer_dec(
    alg: &Algebra,
    b: usize,
    a: usize,
    dec: &[Dec],
    tb: usize,
    ta: usize,
    reset: &[usize],
) -> Result<Vec<Dec>, String> {
    let old_points = alg.circle_points(b, a);
    let new_points = alg.circle_points(tb, ta);
    let mut out = vec![Dec::One; new_points.len()];
    for (j, pts) in new_points.iter().enumerate() {
        let k = *pts.first().ok_or("circle without boundary points")?;
        if reset.contains(&k) {
            if alg.space(tb, ta).slots.essential[j] {
                return Err("replacement circle is essential".into());
            }
            out[j] = Dec::One;
            continue;
        }
        let i = alg.circle_through(b, a, k);
        if old_points[i] != *pts {
            return Err("circle is not preserved".into());
        }
        out[j] = dec[i];
        if out[j].essential() != alg.space(tb, ta).slots.essential[j] {
            return Err("essentiality changed on a preserved circle".into());
        }
    }
    Ok(out)
}

/// Certify one standard basis element as a combination of products of
/// degree-zero and degree-one elements.
pub fn certify(alg: &Algebra, b: usize, a: usize, dec: &[Dec]) -> Result<Expr, String> {
    // Strip dots one at a time by multiplying with a dotted diagonal
    // generator on a segment of the dotted circle.
    if let Some(slot) = dec.iter().position(|d| *d == Dec::Dot) {
        let points = alg.circle_points(b, a);
        let k = points[slot][0];
        let seg = alg.matchings()[a].arc_at_point(k);
        let mut undotted = dec.to_vec();
        undotted[slot] = Dec::One;
        return Ok(Expr::Prod(
            Box::new(certify(alg, b, a, &undotted)?),
            Box::new(certify_x(alg, a, seg)?),
        ));
    }

    let slots = &alg.space(b, a).slots;
    let qdeg = slots.qdeg(dec) + alg.shift();
    if qdeg == 0 {
        if b != a {
            return Err("degree-zero element off the diagonal".into());
        }
        return Ok(Expr::One(a));
    }
    if qdeg == 1 {
        if slots.num_essential() == 1 {
            let slot = slots.essential.iter().position(|&e| e).unwrap();
            let label = dec[slot].label().ok_or("unlabelled essential circle")?;
            let k = alg.circle_points(b, a)[slot][0];
            let comp = alg.matchings()[a].arc_at_point(k);
            let flipped = alg.matchings()[a].flip(comp);
            if alg.idx(&flipped) != b {
                return Err("degree-one element is not a flip generator".into());
            }
            return Ok(Expr::YFlip { a, comp, label });
        }
        let arc = alg.matchings()[a]
            .surgery_arcs()
            .into_iter()
            .find(|r| alg.idx(&alg.matchings()[a].surgery(r)) == b)
            .ok_or("degree-one element is not a swap generator")?;
        return Ok(Expr::YSwap { a, arc });
    }

    let points = alg.circle_points(b, a);
    let m_a = &alg.matchings()[a];
    let m_b = &alg.matchings()[b];

    // Reducing systems: a contractible circle with more than two segments
    // is split in two by surgery along a nested adjacent pair of its
    // segments lying on one side.
    for (c_slot, pts) in points.iter().enumerate() {
        if slots.essential[c_slot] {
            continue;
        }
        let segs_a: Vec<usize> = {
            let mut v: Vec<usize> = pts.iter().map(|&k| m_a.arc_at_point(k)).collect();
            v.sort();
            v.dedup();
            v
        };
        let segs_b: Vec<usize> = {
            let mut v: Vec<usize> = pts.iter().map(|&k| m_b.arc_at_point(k)).collect();
            v.sort();
            v.dedup();
            v
        };
        if segs_a.len() + segs_b.len() <= 2 {
            continue;
        }
        // Side a.
        for &g1 in segs_a.iter() {
            for &g2 in segs_a.iter() {
                if !m_a.nested_below(g1, g2) {
                    continue;
                }
                let Some(r) = nested_arc(alg, a, g1, g2) else {
                    continue;
                };
                let c = alg.idx(&m_a.surgery(&r));
                let target = &alg.space(b, c).slots;
                if target.len() != slots.len() + 1
                    || target.num_essential() != slots.num_essential()
                {
                    continue;
                }
                let Ok(w_dec) = transfer_dec(alg, b, a, dec, b, c, pts) else {
                    continue;
                };
                return Ok(Expr::Prod(
                    Box::new(certify(alg, b, c, &w_dec)?),
                    Box::new(Expr::YSwap { a, arc: r }),
                ));
            }
        }
        // Side b.
        for &g1 in segs_b.iter() {
            for &g2 in segs_b.iter() {
                if !m_b.nested_below(g1, g2) {
                    continue;
                }
                let Some(r) = nested_arc(alg, b, g1, g2) else {
                    continue;
                };
                let c = alg.idx(&m_b.surgery(&r));
                let target = &alg.space(c, a).slots;
                if target.len() != slots.len() + 1
                    || target.num_essential() != slots.num_essential()
                {
                    continue;
                }
                let Ok(w_dec) = transfer_dec(alg, b, a, dec, c, a, pts) else {
                    continue;
                };
                let r_dual = m_b.dual_surgery_arc(&r);
                return Ok(Expr::Prod(
                    Box::new(Expr::YSwap { a: c, arc: r_dual }),
                    Box::new(certify(alg, c, a, &w_dec)?),
                ));
            }
        }
    }

    // Flip peeling: an outermost component on an essential circle.
    for (c_slot, pts) in points.iter().enumerate() {
        if !slots.essential[c_slot] {
            continue;
        }
        let label = dec[c_slot].label().unwrap();
        // Side a.
        for &k in pts.iter() {
            let comp = m_a.arc_at_point(k);
            if !m_a.is_outermost(comp) {
                continue;
            }
            let c = alg.idx(&m_a.flip(comp));
            let target = &alg.space(b, c).slots;
            if target.len() != slots.len()
                || target.num_essential() + 1 != slots.num_essential()
            {
                continue;
            }
            let Ok(w_dec) = transfer_dec(alg, b, a, dec, b, c, pts) else {
                continue;
            };
            return Ok(Expr::Prod(
                Box::new(certify(alg, b, c, &w_dec)?),
                Box::new(Expr::YFlip { a, comp, label }),
            ));
        }
        // Side b.
        for &k in pts.iter() {
            let comp = m_b.arc_at_point(k);
            if !m_b.is_outermost(comp) {
                continue;
            }
            let c = alg.idx(&m_b.flip(comp));
            let target = &alg.space(c, a).slots;
            if target.len() != slots.len()
                || target.num_essential() + 1 != slots.num_essential()
            {
                continue;
            }
            let Ok(w_dec) = transfer_dec(alg, b, a, dec, c, a, pts) else {
                continue;
            };
            let comp_in_c = alg.matchings()[c].arc_at_point(alg.matchings()[b].pairs()[comp].0);
            if alg.idx(&alg.matchings()[c].flip(comp_in_c)) != b {
                return Err("flip does not return to b".into());
            }
            return Ok(Expr::Prod(
                Box::new(Expr::YFlip {
                    a: c,
                    comp: comp_in_c,
                    label,
                }),
                Box::new(certify(alg, c, a, &w_dec)?),
            ));
        }
    }

    Err(format!(
        "no factorization step applies to ({}, {}) in degree {}",
        b, a, qdeg
    ))
}

/// Build and verify certificates for every standard basis element.
pub fn certificates(alg: &Algebra) -> Result<Vec<Certificate>, String> {
    let mut out = Vec::new();
    for (b, a, dec) in alg.basis() {
        let expr = certify(alg, b, a, &dec)?;
        out.push(Certificate { b, a, dec, expr });
    }
    Ok(out)
}

/// Verify that every certificate evaluates to its basis element.
pub fn generation_report(alg: &Algebra) -> CheckReport {
    let mut report = CheckReport::new("degree-one generation");
    match certificates(alg) {
        Err(e) => report.check(false, || e.clone()),
        Ok(certs) => {
            for cert in certs.iter() {
                let want = alg.basis_element(cert.b, cert.a, cert.dec.clone());
                let got = cert.expr.eval(alg);
                report.check(got == want, || {
                    format!(
                        "certificate for ({}, {}) [{}] evaluates to {} instead of {}",
                        cert.b,
                        cert.a,
                        cert.dec
                            .iter()
                            .map(|d| d.text())
                            .collect::<Vec<_>>()
                            .join(" "),
                        got,
                        want
                    )
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_diagonal_certificates_check_out() {
        for n in 1..=2 {
            let alg = Algebra::new(n);
            for a in 0..alg.matchings().len() {
                for e in 0..n {
                    let expr = certify_x(&alg, a, e).unwrap();
                    assert_eq!(expr.eval(&alg), alg.x_gen(a, e), "n={} a={} e={}", n, a, e);
                }
            }
        }
    }

    #[test]
    fn all_rank_one_and_two_elements_are_certified() {
        for n in 0..=2 {
            let alg = Algebra::new(n);
            let report = generation_report(&alg);
            assert!(report.ok(), "{}", report);
        }
    }
}
