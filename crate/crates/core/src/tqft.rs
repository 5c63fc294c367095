//! State spaces of circle configurations and the saddle maps between them.
//!
//! A contractible circle carries the Frobenius algebra `Z[a1,a2][X]/((X-a1)(X-a2))`
//! with basis `1`, `X`; an essential circle carries the idempotent basis
//! `e1`, `e2`. Saddles act by the merge and split rules below, and free loop
//! slots ride along untouched. The anchored degree reads the essential
//! circles radially, innermost first.

use crate::config::{Config, Step, SurgeryOutcome};
use crate::ring::{Bidegree, LaurentQA, PolyAlpha};
use std::collections::BTreeMap;
use std::fmt;

/// Decoration of a single circle.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Dec {
    /// Unit on a contractible circle.
    One,
    /// Dotted generator `X` on a contractible circle.
    Dot,
    /// Idempotent `e1` on an essential circle.
    E1,
    /// Idempotent `e2` on an essential circle.
    E2,
}

impl Dec {
    pub fn text(&self) -> &'static str {
        match self {
            Dec::One => "1",
            Dec::Dot => "X",
            Dec::E1 => "e1",
            Dec::E2 => "e2",
        }
    }

    pub fn essential(&self) -> bool {
        matches!(self, Dec::E1 | Dec::E2)
    }

    /// Label of an essential decoration (1 or 2).
    pub fn label(&self) -> Option<usize> {
        match self {
            Dec::E1 => Some(1),
            Dec::E2 => Some(2),
            _ => None,
        }
    }

    pub fn e(label: usize) -> Dec {
        match label {
            1 => Dec::E1,
            2 => Dec::E2,
            _ => panic!("essential label must be 1 or 2"),
        }
    }

    fn tau(&self) -> Dec {
        match self {
            Dec::E1 => Dec::E2,
            Dec::E2 => Dec::E1,
            other => *other,
        }
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

/// The circle slots of a configuration: traced circles first (in trace
/// order), then the free loops.
#[derive(Clone, Debug)]
pub struct Slots {
    pub essential: Vec<bool>,
    /// Radial rank among the essential circles, innermost first.
    pub rank: Vec<Option<usize>>,
}

impl Slots {
    pub fn from_config(config: &Config) -> Slots {
        let mut essential: Vec<bool> =
            config.circles.iter().map(|c| c.is_essential()).collect();
        let mut rank = config.essential_rank();
        essential.extend(std::iter::repeat(false).take(config.free.len()));
        rank.extend(std::iter::repeat(None).take(config.free.len()));
        Slots { essential, rank }
    }

    pub fn len(&self) -> usize {
        self.essential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.essential.is_empty()
    }

    pub fn num_essential(&self) -> usize {
        self.essential.iter().filter(|&&e| e).count()
    }

    fn fits(&self, dec: &[Dec]) -> bool {
        dec.len() == self.len()
            && dec
                .iter()
                .zip(self.essential.iter())
                .all(|(d, &e)| d.essential() == e)
    }

    /// All basis decorations, in lexicographic order.
    pub fn basis(&self) -> Vec<Vec<Dec>> {
        let mut out = vec![Vec::new()];
        for &e in self.essential.iter() {
            let choices = if e {
                [Dec::E1, Dec::E2]
            } else {
                [Dec::One, Dec::Dot]
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |&d| {
                        let mut v = prefix.clone();
                        v.push(d);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Quantum degree of a basis decoration, before any overall shift.
    pub fn qdeg(&self, dec: &[Dec]) -> i64 {
        assert!(self.fits(dec));
        dec.iter()
            .map(|d| match d {
                Dec::One => -1,
                Dec::Dot => 1,
                Dec::E1 | Dec::E2 => 0,
            })
            .sum()
    }

    /// Anchored degree: the essential circle at radial position `i`
    /// (1-based, innermost first) contributes `(-1)^(i+1)` when labelled
    /// `e1` and `(-1)^i` when labelled `e2`.
    pub fn adeg(&self, dec: &[Dec]) -> i64 {
        assert!(self.fits(dec));
        dec.iter()
            .zip(self.rank.iter())
            .map(|(d, r)| match (d, r) {
                (Dec::E1, Some(r)) => {
                    if r % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                }
                (Dec::E2, Some(r)) => {
                    if r % 2 == 0 {
                        -1
                    } else {
                        1
                    }
                }
                _ => 0,
            })
            .sum()
    }

    pub fn bidegree(&self, dec: &[Dec], shift: i64) -> Bidegree {
        Bidegree::new(self.qdeg(dec) + shift, self.adeg(dec))
    }

    /// Graded rank `(q + q^-1)^c (a + a^-1)^e q^shift`.
    pub fn graded_rank(&self, shift: i64) -> LaurentQA {
        let e = self.num_essential();
        let c = self.len() - e;
        &(&LaurentQA::bracket2().pow(c as u32)
            * &LaurentQA::essential_rank().pow(e as u32))
            * &LaurentQA::q_pow(shift)
    }
}

fn a1() -> PolyAlpha {
    PolyAlpha::alpha(1)
}

fn a2() -> PolyAlpha {
    PolyAlpha::alpha(2)
}

/// `alpha_{tau(i)}`: the other root.
fn alpha_other(label: usize) -> PolyAlpha {
    PolyAlpha::alpha(3 - label)
}

/// Merge two circles. Symmetric in its arguments.
pub fn merge_rule(d1: Dec, d2: Dec) -> Vec<(Dec, PolyAlpha)> {
    match (d1, d2) {
        (Dec::One, d) | (d, Dec::One) => vec![(d, PolyAlpha::one())],
        (Dec::Dot, Dec::Dot) => vec![
            (Dec::Dot, a1() + a2()),
            (Dec::One, -(a1() * a2())),
        ],
        (Dec::Dot, e) | (e, Dec::Dot) => {
            let i = e.label().unwrap();
            vec![(e, alpha_other(i))]
        }
        (e1, e2) => {
            let i = e1.label().unwrap();
            if e1 == e2 {
                vec![
                    (Dec::Dot, PolyAlpha::one()),
                    (Dec::One, -PolyAlpha::alpha(i)),
                ]
            } else {
                vec![]
            }
        }
    }
}

/// Split one circle into two, with the given essentiality of the children.
pub fn split_rule(d: Dec, child_ess: (bool, bool)) -> Vec<(Dec, Dec, PolyAlpha)> {
    match child_ess {
        (false, false) => match d {
            Dec::One => vec![
                (Dec::One, Dec::Dot, PolyAlpha::one()),
                (Dec::Dot, Dec::One, PolyAlpha::one()),
                (Dec::One, Dec::One, -(a1() + a2())),
            ],
            Dec::Dot => vec![
                (Dec::Dot, Dec::Dot, PolyAlpha::one()),
                (Dec::One, Dec::One, -(a1() * a2())),
            ],
            _ => panic!("essential circle cannot split into two contractible ones"),
        },
        (true, true) => match d {
            Dec::One => vec![
                (Dec::E1, Dec::E1, PolyAlpha::one()),
                (Dec::E2, Dec::E2, PolyAlpha::one()),
            ],
            Dec::Dot => vec![
                (Dec::E1, Dec::E1, alpha_other(1)),
                (Dec::E2, Dec::E2, alpha_other(2)),
            ],
            _ => panic!("essential circle cannot split into two essential ones"),
        },
        (first_ess, _) => {
            let i = match d.label() {
                Some(i) => i,
                None => panic!("only an essential circle splits off an essential child"),
            };
            let e = Dec::e(i);
            if first_ess {
                vec![
                    (e, Dec::Dot, PolyAlpha::one()),
                    (e, Dec::One, -PolyAlpha::alpha(i)),
                ]
            } else {
                vec![
                    (Dec::Dot, e, PolyAlpha::one()),
                    (Dec::One, e, -PolyAlpha::alpha(i)),
                ]
            }
        }
    }
}

/// Add a dot to one circle (multiplication by `X` resp. `alpha_{tau(i)}`).
pub fn dot_rule(d: Dec) -> Vec<(Dec, PolyAlpha)> {
    match d {
        Dec::One => vec![(Dec::Dot, PolyAlpha::one())],
        Dec::Dot => vec![
            (Dec::Dot, a1() + a2()),
            (Dec::One, -(a1() * a2())),
        ],
        e => {
            let i = e.label().unwrap();
            vec![(e, alpha_other(i))]
        }
    }
}

/// Counit of a contractible circle: `X -> 1`, `1 -> 0`.
fn counit(d: Dec) -> PolyAlpha {
    match d {
        Dec::Dot => PolyAlpha::one(),
        Dec::One => PolyAlpha::zero(),
        _ => panic!("counit applies to contractible circles only"),
    }
}

/// A linear combination of basis decorations for one configuration.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct StateVector {
    terms: BTreeMap<Vec<Dec>, PolyAlpha>,
}

impl StateVector {
    pub fn zero() -> Self {
        StateVector {
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(dec: Vec<Dec>) -> Self {
        let mut v = StateVector::zero();
        v.add_term(dec, PolyAlpha::one());
        v
    }

    pub fn add_term(&mut self, dec: Vec<Dec>, coeff: PolyAlpha) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(dec).or_insert_with(PolyAlpha::zero);
        *entry += &coeff;
        if entry.is_zero() {
            // Re-fetch the key to drop the cancelled term.
            let keys: Vec<Vec<Dec>> = self
                .terms
                .iter()
                .filter(|(_, c)| c.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in keys {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Dec>, &PolyAlpha)> {
        self.terms.iter()
    }

    pub fn coeff(&self, dec: &[Dec]) -> PolyAlpha {
        self.terms.get(dec).cloned().unwrap_or_else(PolyAlpha::zero)
    }

    pub fn scale(&self, c: &PolyAlpha) -> StateVector {
        let mut out = StateVector::zero();
        for (k, v) in self.terms.iter() {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (k, v) in other.terms.iter() {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (k, v) in other.terms.iter() {
            out.add_term(k.clone(), -v.clone());
        }
        out
    }

    /// The covering involution: swap `e1` and `e2` everywhere and conjugate
    /// the coefficients.
    pub fn tau(&self) -> StateVector {
        let mut out = StateVector::zero();
        for (k, v) in self.terms.iter() {
            out.add_term(k.iter().map(|d| d.tau()).collect(), v.tau());
        }
        out
    }

    /// Add a dot on the circle in the given slot.
    pub fn with_dot(&self, slot: usize) -> StateVector {
        let mut out = StateVector::zero();
        for (k, v) in self.terms.iter() {
            for (d, co) in dot_rule(k[slot]) {
                let mut key = k.clone();
                key[slot] = d;
                out.add_term(key, v * &co);
            }
        }
        out
    }

    /// Evaluate the counit on every slot (all must be contractible).
    pub fn trace(&self, slots: &Slots) -> PolyAlpha {
        assert_eq!(slots.num_essential(), 0, "trace needs a contractible configuration");
        let mut total = PolyAlpha::zero();
        for (k, v) in self.terms.iter() {
            let mut c = v.clone();
            for &d in k.iter() {
                c = c * counit(d);
            }
            total += &c;
        }
        total
    }

    /// True when every term is homogeneous of the same bidegree; returns it.
    pub fn homogeneous_bidegree(&self, slots: &Slots, shift: i64) -> Option<Bidegree> {
        let mut deg = None;
        for (k, v) in self.terms.iter() {
            for (exp, _) in v.terms() {
                // Each alpha has quantum degree 2.
                let coeff_q = 2 * (exp[0] + exp[1] + exp[2]) as i64;
                let d = Bidegree::new(
                    slots.qdeg(k) + shift + coeff_q,
                    slots.adeg(k),
                );
                match deg {
                    None => deg = Some(d),
                    Some(prev) if prev == d => {}
                    _ => return None,
                }
            }
        }
        deg
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, v) in self.terms.iter() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let key: Vec<&str> = k.iter().map(|d| d.text()).collect();
            write!(f, "({})·[{}]", v, key.join(" "))?;
        }
        Ok(())
    }
}

/// Push a state vector through one surgery step, forwards.
pub fn apply_step(
    v: &StateVector,
    outcome: &SurgeryOutcome,
    old_slots: &Slots,
    new_slots: &Slots,
) -> StateVector {
    let old_traced = outcome.moved.len();
    let free = old_slots.len() - old_traced;
    let new_traced = new_slots.len() - free;
    let mut out = StateVector::zero();
    for (k, v0) in v.terms() {
        assert!(old_slots.fits(k));
        let mut template = vec![None; new_slots.len()];
        for (i, m) in outcome.moved.iter().enumerate() {
            if let Some(j) = *m {
                template[j] = Some(k[i]);
            }
        }
        for f in 0..free {
            template[new_traced + f] = Some(k[old_traced + f]);
        }
        match outcome.step {
            Step::Merge { from: (c1, c2), to } => {
                for (d, co) in merge_rule(k[c1], k[c2]) {
                    assert_eq!(d.essential(), new_slots.essential[to]);
                    let mut t = template.clone();
                    t[to] = Some(d);
                    out.add_term(t.into_iter().map(Option::unwrap).collect(), v0 * &co);
                }
            }
            Step::Split { from, to: (t1, t2) } => {
                let ess = (new_slots.essential[t1], new_slots.essential[t2]);
                for (d1, d2, co) in split_rule(k[from], ess) {
                    let mut t = template.clone();
                    t[t1] = Some(d1);
                    t[t2] = Some(d2);
                    out.add_term(t.into_iter().map(Option::unwrap).collect(), v0 * &co);
                }
            }
        }
    }
    out
}

/// Push a state vector on the surgered configuration back through the step,
/// i.e. apply the reversed cobordism: merges replay as splits and splits as
/// merges. Used for comultiplication.
pub fn apply_step_reverse(
    v: &StateVector,
    outcome: &SurgeryOutcome,
    old_slots: &Slots,
    new_slots: &Slots,
) -> StateVector {
    let old_traced = outcome.moved.len();
    let free = old_slots.len() - old_traced;
    let new_traced = new_slots.len() - free;
    let mut out = StateVector::zero();
    for (k, v0) in v.terms() {
        assert!(new_slots.fits(k));
        let mut template = vec![None; old_slots.len()];
        for (i, m) in outcome.moved.iter().enumerate() {
            if let Some(j) = *m {
                template[i] = Some(k[j]);
            }
        }
        for f in 0..free {
            template[old_traced + f] = Some(k[new_traced + f]);
        }
        match outcome.step {
            Step::Merge { from: (c1, c2), to } => {
                let ess = (old_slots.essential[c1], old_slots.essential[c2]);
                for (d1, d2, co) in split_rule(k[to], ess) {
                    let mut t = template.clone();
                    t[c1] = Some(d1);
                    t[c2] = Some(d2);
                    out.add_term(t.into_iter().map(Option::unwrap).collect(), v0 * &co);
                }
            }
            Step::Split { from, to: (t1, t2) } => {
                for (d, co) in merge_rule(k[t1], k[t2]) {
                    assert_eq!(d.essential(), old_slots.essential[from]);
                    let mut t = template.clone();
                    t[from] = Some(d);
                    out.add_term(t.into_iter().map(Option::unwrap).collect(), v0 * &co);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{saddle_sequence, Stack};
    use crate::matching::Matching;
    use crate::tangle::FlatTangle;
    use num_bigint::BigInt;

    const ALL: [Dec; 4] = [Dec::One, Dec::Dot, Dec::E1, Dec::E2];

    fn contractible() -> [Dec; 2] {
        [Dec::One, Dec::Dot]
    }

    #[test]
    fn graded_rank_matches_basis_enumeration() {
        for n in 1..=2 {
            for a in Matching::enumerate(n) {
                for b in Matching::enumerate(n) {
                    let stack = Stack::new(vec![
                        FlatTangle::cup(&a),
                        FlatTangle::cap(&b),
                    ])
                    .unwrap();
                    let slots = Slots::from_config(&stack.trace());
                    let mut by_hand = LaurentQA::zero();
                    for dec in slots.basis() {
                        by_hand += &LaurentQA::monomial(
                            slots.qdeg(&dec),
                            slots.adeg(&dec),
                            BigInt::from(1),
                        );
                    }
                    assert_eq!(by_hand, slots.graded_rank(0), "{} {}", a, b);
                }
            }
        }
    }

    #[test]
    fn merge_is_symmetric_and_tau_equivariant() {
        for &d1 in ALL.iter() {
            for &d2 in ALL.iter() {
                let mut lhs = merge_rule(d1, d2);
                let mut rhs = merge_rule(d2, d1);
                lhs.sort_by(|a, b| a.0.cmp(&b.0));
                rhs.sort_by(|a, b| a.0.cmp(&b.0));
                assert_eq!(lhs, rhs);
                let mut tw: Vec<(Dec, PolyAlpha)> = merge_rule(d1.tau(), d2.tau())
                    .into_iter()
                    .map(|(d, c)| (d.tau(), c.tau()))
                    .collect();
                tw.sort_by(|a, b| a.0.cmp(&b.0));
                let mut plain = merge_rule(d1, d2);
                plain.sort_by(|a, b| a.0.cmp(&b.0));
                assert_eq!(tw, plain);
            }
        }
    }

    #[test]
    fn split_is_tau_equivariant() {
        let shapes = [(false, false), (true, false), (false, true), (true, true)];
        for &d in ALL.iter() {
            for &ess in shapes.iter() {
                let valid = match ess {
                    (false, false) | (true, true) => !d.essential(),
                    _ => d.essential(),
                };
                if !valid {
                    continue;
                }
                let mut tw: Vec<(Dec, Dec, PolyAlpha)> = split_rule(d.tau(), ess)
                    .into_iter()
                    .map(|(a, b, c)| (a.tau(), b.tau(), c.tau()))
                    .collect();
                let mut plain = split_rule(d, ess);
                let key = |t: &(Dec, Dec, PolyAlpha)| (t.0, t.1);
                tw.sort_by_key(key);
                plain.sort_by_key(key);
                assert_eq!(tw, plain);
            }
        }
    }

    /// `(counit ⊗ id) ∘ split = id` on a contractible circle, on both sides.
    #[test]
    fn counit_laws() {
        for &d in contractible().iter() {
            let mut left = BTreeMap::new();
            let mut right = BTreeMap::new();
            for (d1, d2, co) in split_rule(d, (false, false)) {
                *left.entry(d2).or_insert_with(PolyAlpha::zero) += &(counit(d1) * co.clone());
                *right.entry(d1).or_insert_with(PolyAlpha::zero) += &(counit(d2) * co);
            }
            for table in [&left, &right] {
                for (&k, v) in table.iter() {
                    let expect = if k == d {
                        PolyAlpha::one()
                    } else {
                        PolyAlpha::zero()
                    };
                    assert_eq!(*v, expect, "counit law fails at {}", d);
                }
            }
        }
    }

    fn pairing(d1: Dec, d2: Dec) -> PolyAlpha {
        let mut total = PolyAlpha::zero();
        for (d, co) in merge_rule(d1, d2) {
            if !d.essential() {
                total += &(counit(d) * co);
            }
        }
        total
    }

    /// Frobenius adjunction `<m(x,y), z> = <x ⊗ y, Δ(z)>` for contractible
    /// circles, and its analogue when the split produces essential circles.
    #[test]
    fn merge_and_split_are_adjoint() {
        for &x in contractible().iter() {
            for &y in contractible().iter() {
                for &z in contractible().iter() {
                    let mut lhs = PolyAlpha::zero();
                    for (d, co) in merge_rule(x, y) {
                        lhs += &(pairing(d, z) * co);
                    }
                    let mut rhs = PolyAlpha::zero();
                    for (d1, d2, co) in split_rule(z, (false, false)) {
                        rhs += &(pairing(x, d1) * pairing(y, d2) * co);
                    }
                    assert_eq!(lhs, rhs, "{} {} {}", x, y, z);
                }
            }
        }
        // Essential pairing: <e_i, e_j> = δ_ij; check it against the split
        // of a contractible circle into two essential ones.
        for &x in [Dec::E1, Dec::E2].iter() {
            for &y in [Dec::E1, Dec::E2].iter() {
                for &z in contractible().iter() {
                    let mut lhs = PolyAlpha::zero();
                    for (d, co) in merge_rule(x, y) {
                        lhs += &(pairing(d, z) * co);
                    }
                    let mut rhs = PolyAlpha::zero();
                    for (d1, d2, co) in split_rule(z, (true, true)) {
                        rhs += &(ess_pair(x, d1) * ess_pair(y, d2) * co);
                    }
                    assert_eq!(lhs, rhs, "{} {} {}", x, y, z);
                }
            }
        }
    }

    fn ess_pair(x: Dec, y: Dec) -> PolyAlpha {
        let mut total = PolyAlpha::zero();
        for (d, co) in merge_rule(x, y) {
            total += &(counit(d) * co);
        }
        total
    }

    #[test]
    fn dot_rule_matches_merging_a_dotted_circle() {
        for &d in ALL.iter() {
            let mut via_merge = merge_rule(d, Dec::Dot);
            let mut direct = dot_rule(d);
            via_merge.sort_by(|a, b| a.0.cmp(&b.0));
            direct.sort_by(|a, b| a.0.cmp(&b.0));
            assert_eq!(via_merge, direct);
        }
    }

    /// The n = 1 multiplication table computed through genuine surgeries.
    #[test]
    fn rank_one_products_through_surgery() {
        let ms = Matching::enumerate(1);
        let (r, s) = (ms[0].clone(), ms[1].clone());
        let prod = |upper: &Matching, mid: &Matching, lower: &Matching, key: Vec<Dec>| {
            let stack = Stack::new(vec![
                FlatTangle::cup(lower),
                FlatTangle::cap(mid),
                FlatTangle::cup(mid),
                FlatTangle::cap(upper),
            ])
            .unwrap();
            let config = stack.trace();
            let mut slots = Slots::from_config(&config);
            let mut v = StateVector::basis(key);
            let mut cur = config;
            for band in saddle_sequence(mid, 1, 2) {
                let out = cur.surgery(&stack, &band);
                let next_slots = Slots::from_config(&out.config);
                v = apply_step(&v, &out, &slots, &next_slots);
                slots = next_slots;
                cur = out.config;
            }
            (v, slots)
        };

        // y^i_{s,r} · y^i_{r,s} = X - alpha_i on the diagonal circle of s.
        for (i, e) in [(1, Dec::E1), (2, Dec::E2)] {
            let (v, _) = prod(&s, &r, &s, vec![e, e]);
            let mut want = StateVector::basis(vec![Dec::Dot]);
            want.add_term(vec![Dec::One], -PolyAlpha::alpha(i));
            assert_eq!(v, want, "i = {}", i);
        }
        // Mixed labels annihilate each other.
        let (v, _) = prod(&s, &r, &s, vec![Dec::E1, Dec::E2]);
        assert!(v.is_zero());
        // x_r · x_r = (a1 + a2) x_r - a1 a2 1_r.
        let (v, _) = prod(&r, &r, &r, vec![Dec::Dot, Dec::Dot]);
        let mut want = StateVector::zero();
        want.add_term(vec![Dec::Dot], PolyAlpha::alpha(1) + PolyAlpha::alpha(2));
        want.add_term(
            vec![Dec::One],
            -(PolyAlpha::alpha(1) * PolyAlpha::alpha(2)),
        );
        assert_eq!(v, want);
        // 1_r is a unit on that circle.
        let (v, _) = prod(&r, &r, &r, vec![Dec::One, Dec::Dot]);
        assert_eq!(v, StateVector::basis(vec![Dec::Dot]));
    }

    /// Reversing the merge of two essential circles splits `1` as
    /// `e1 ⊗ e1 + e2 ⊗ e2`.
    #[test]
    fn reverse_step_comultiplies() {
        let ms = Matching::enumerate(1);
        let (r, s) = (ms[0].clone(), ms[1].clone());
        let stack = Stack::new(vec![
            FlatTangle::cup(&s),
            FlatTangle::cap(&r),
            FlatTangle::cup(&r),
            FlatTangle::cap(&s),
        ])
        .unwrap();
        let config = stack.trace();
        let old_slots = Slots::from_config(&config);
        assert_eq!(old_slots.num_essential(), 2);
        let band = saddle_sequence(&r, 1, 2)[0];
        let out = config.surgery(&stack, &band);
        let new_slots = Slots::from_config(&out.config);
        let back = apply_step_reverse(
            &StateVector::basis(vec![Dec::One]),
            &out,
            &old_slots,
            &new_slots,
        );
        let want = StateVector::basis(vec![Dec::E1, Dec::E1])
            .add(&StateVector::basis(vec![Dec::E2, Dec::E2]));
        assert_eq!(back, want);
    }

    #[test]
    fn anchored_degree_is_read_innermost_first() {
        // Nested essential circles: [e1 e1] has positions 1 and 2, so the
        // contributions cancel; [e1 e2] adds up to ±2.
        let a = Matching::new(2, vec![(1, 4), (2, 3)], 2).unwrap();
        let b = Matching::new(2, vec![(1, 4), (2, 3)], 0).unwrap();
        let stack = Stack::new(vec![FlatTangle::cup(&a), FlatTangle::cap(&b)]).unwrap();
        let config = stack.trace();
        let slots = Slots::from_config(&config);
        assert_eq!(slots.num_essential(), 2);
        let order = config.essential_order();
        let inner = order[0];
        let outer = order[1];
        let mut dec = vec![Dec::E1; 2];
        dec[inner] = Dec::E1;
        dec[outer] = Dec::E1;
        assert_eq!(slots.adeg(&dec), 0);
        dec[outer] = Dec::E2;
        assert_eq!(slots.adeg(&dec), 2);
        dec[inner] = Dec::E2;
        dec[outer] = Dec::E1;
        assert_eq!(slots.adeg(&dec), -2);
    }

    #[test]
    fn homogeneous_bidegree_tracks_coefficients() {
        let mut v = StateVector::basis(vec![Dec::Dot]);
        let slots = Slots {
            essential: vec![false],
            rank: vec![None],
        };
        // X and a1·1 share the bidegree (1, 0) before shifts.
        v.add_term(vec![Dec::One], PolyAlpha::alpha(1));
        assert_eq!(
            v.homogeneous_bidegree(&slots, 0),
            Some(Bidegree::new(1, 0))
        );
        v.add_term(vec![Dec::One], PolyAlpha::one());
        assert_eq!(v.homogeneous_bidegree(&slots, 0), None);
    }
}
