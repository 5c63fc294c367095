//! Bimodules of flat annular tangles.
//!
//! A flat `(n, m)`-tangle `T` yields a bimodule over the pair of arc
//! algebras: the component at `(b, a)` lives on the circle configuration
//! obtained by closing `T` with `a` inside and the reflection of `b`
//! outside, shifted by the inner rank `m`. The outer algebra acts on the
//! left and the inner algebra on the right, both by saddle cobordisms
//! contracting a doubled matching layer, exactly as in algebra
//! multiplication.

use crate::algebra::{Algebra, CheckReport, Element, PairSpace};
use crate::config::{saddle_sequence, Band, Config, Stack, SurgeryOutcome};
use crate::matching::Matching;
use crate::ring::{Bidegree, LaurentQA, PolyAlpha};
use crate::tangle::{FlatTangle, Pt};
use crate::tqft::{apply_step, apply_step_reverse, Dec, Slots, StateVector};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

/// A precomputed action cobordism: a stacked diagram split into a lower and
/// an upper factor glued along a doubled matching, the saddle sequence that
/// contracts the doubling, and circle correspondences at both ends.
struct ActionPlan {
    /// Slot of the lower factor -> slot of the stacked diagram.
    lower_map: Vec<usize>,
    /// Slot of the upper factor -> slot of the stacked diagram.
    upper_map: Vec<usize>,
    init_slots: Slots,
    steps: Vec<PlanStep>,
    /// Slot of the surgered diagram -> slot of the target space.
    final_map: Vec<usize>,
    target_len: usize,
}

struct PlanStep {
    outcome: SurgeryOutcome,
    before: Slots,
    after: Slots,
}

fn first_arc_any(c: &crate::config::Circle) -> (usize, usize) {
    c.items
        .iter()
        .find_map(|it| match *it {
            crate::config::Item::Arc { layer, arc, .. } => Some((layer, arc)),
            _ => None,
        })
        .expect("circle without arcs")
}

/// Circles of a factor's own configuration located inside the big stacked
/// configuration; `layers[l]` is the stacked layer carrying factor layer `l`.
fn embed_factor(big: &Config, factor: &PairSpace, layers: &[usize]) -> Vec<usize> {
    factor
        .config
        .circles
        .iter()
        .map(|c| {
            let (l, arc) = first_arc_any(c);
            big.circle_of_arc(layers[l], arc)
        })
        .collect()
}

fn make_action_plan(
    layers: Vec<FlatTangle>,
    lower: &PairSpace,
    lower_layers: &[usize],
    upper: &PairSpace,
    upper_layers: &[usize],
    glue: &Matching,
    band_lower: usize,
    target: &PairSpace,
    target_layers: &[(usize, usize)],
) -> ActionPlan {
    let stack = Stack::new(layers).expect("action stack is closed");
    let config0 = stack.trace();
    let init_slots = Slots::from_config(&config0);

    let mut lower_map = embed_factor(&config0, lower, lower_layers);
    let mut upper_map = embed_factor(&config0, upper, upper_layers);
    {
        let mut seen: Vec<usize> =
            lower_map.iter().chain(upper_map.iter()).copied().collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), config0.circles.len(), "factors cover the stack");
    }
    // Free loops are untouched by every saddle: the lower factor's come
    // first in the stacked configuration because its layers sit below.
    assert_eq!(
        config0.free.len(),
        lower.config.free.len() + upper.config.free.len()
    );
    let big_traced = config0.circles.len();
    for f in 0..lower.config.free.len() {
        lower_map.push(big_traced + f);
    }
    for f in 0..upper.config.free.len() {
        upper_map.push(big_traced + lower.config.free.len() + f);
    }

    let mut steps = Vec::new();
    let mut config = config0;
    let mut slots = init_slots.clone();
    for band in saddle_sequence(glue, band_lower, band_lower + 1) {
        let outcome = config.surgery(&stack, &band);
        let after = Slots::from_config(&outcome.config);
        config = outcome.config.clone();
        steps.push(PlanStep {
            outcome,
            before: slots,
            after: after.clone(),
        });
        slots = after;
    }

    let final_map = match_into_target(
        &config,
        &slots,
        stack.layers.len(),
        target,
        target_layers,
    );

    ActionPlan {
        lower_map,
        upper_map,
        init_slots,
        steps,
        final_map,
        target_len: target.slots.len(),
    }
}

/// Identify every slot of a (surgered) stacked configuration with a slot of
/// the target space. Circles through a shared layer carry over by their
/// arcs. Closed circles away from the shared layers: essential ones are
/// pinned by their radial rank, contractible ones and free loops fill the
/// remaining non-essential target slots in order. Contractible closed
/// circles are inert under every saddle, so their pairing carries no
/// information beyond a bijection.
fn match_into_target(
    config: &Config,
    slots: &Slots,
    num_layers: usize,
    target: &PairSpace,
    target_layers: &[(usize, usize)],
) -> Vec<usize> {
    let mut to_target = vec![None; num_layers];
    for &(bl, tl) in target_layers.iter() {
        to_target[bl] = Some(tl);
    }
    let matched: Vec<Option<usize>> = config
        .circles
        .iter()
        .enumerate()
        .map(|(f, c)| {
            let by_arc = c.items.iter().find_map(|it| match *it {
                crate::config::Item::Arc { layer, arc, .. } => {
                    to_target[layer].map(|tl| target.config.circle_of_arc(tl, arc))
                }
                _ => None,
            });
            by_arc.or_else(|| {
                if c.is_essential() {
                    let r = slots.rank[f].expect("essential circle is ranked");
                    Some(
                        (0..target.config.circles.len())
                            .find(|&t| target.slots.rank[t] == Some(r))
                            .expect("essential circle has a ranked partner"),
                    )
                } else {
                    None
                }
            })
        })
        .collect();
    let mut used = vec![false; target.slots.len()];
    for (f, m) in matched.iter().enumerate() {
        if let Some(t) = *m {
            assert!(!used[t], "final map collides");
            used[t] = true;
            assert_eq!(
                config.circles[f].is_essential(),
                target.config.circles[t].is_essential()
            );
            assert_eq!(slots.rank[f], target.slots.rank[t], "radial order kept");
        }
    }
    let mut spare = (0..target.slots.len()).filter(|&t| !used[t]).inspect(|&t| {
        assert!(!target.slots.essential[t], "leftover slot is contractible")
    });
    let mut final_map: Vec<usize> = Vec::with_capacity(slots.len());
    for (f, m) in matched.iter().enumerate() {
        match *m {
            Some(t) => final_map.push(t),
            None => {
                assert!(!config.circles[f].is_essential());
                final_map.push(spare.next().expect("slot for a closed circle"));
            }
        }
    }
    for _ in 0..config.free.len() {
        final_map.push(spare.next().expect("slot for a free loop"));
    }
    assert!(spare.next().is_none(), "every target slot is hit");
    final_map
}

impl ActionPlan {
    /// Push `upper ⊗ lower` through the saddles and read off the target.
    fn apply(&self, upper: &StateVector, lower: &StateVector) -> StateVector {
        let mut v = StateVector::zero();
        for (ku, cu) in upper.terms() {
            for (kl, cl) in lower.terms() {
                let mut key = vec![Dec::One; self.init_slots.len()];
                for (i, &j) in self.lower_map.iter().enumerate() {
                    key[j] = kl[i];
                }
                for (i, &j) in self.upper_map.iter().enumerate() {
                    key[j] = ku[i];
                }
                v.add_term(key, cu * cl);
            }
        }
        for step in self.steps.iter() {
            v = apply_step(&v, &step.outcome, &step.before, &step.after);
        }
        let mut out = StateVector::zero();
        for (k, c) in v.terms() {
            let mut key = vec![Dec::One; self.target_len];
            for (f, &t) in self.final_map.iter().enumerate() {
                key[t] = k[f];
            }
            out.add_term(key, c.clone());
        }
        out
    }
}

/// The bimodule of a flat `(n, m)`-tangle over the outer (`H^n`, left) and
/// inner (`H^m`, right) arc algebras.
pub struct Bimodule<'a> {
    outer: &'a Algebra,
    inner: &'a Algebra,
    /// The composition of `mid`, inner to outer.
    tangle: FlatTangle,
    /// The flat layers presenting the tangle, kept separate so interior
    /// arcs stay addressable for saddle morphisms between resolutions.
    mid: Vec<FlatTangle>,
    /// Spaces indexed `[b][a]` with `b` an outer and `a` an inner matching.
    spaces: Vec<Vec<PairSpace>>,
    left_plans: RefCell<HashMap<(usize, usize, usize), Rc<ActionPlan>>>,
    right_plans: RefCell<HashMap<(usize, usize, usize), Rc<ActionPlan>>>,
}

impl<'a> Bimodule<'a> {
    pub fn new(
        outer: &'a Algebra,
        inner: &'a Algebra,
        tangle: &FlatTangle,
    ) -> Result<Bimodule<'a>, String> {
        Bimodule::new_layered(outer, inner, std::slice::from_ref(tangle))
    }

    /// A bimodule presented by a stack of flat layers, composed inner to
    /// outer.
    pub fn new_layered(
        outer: &'a Algebra,
        inner: &'a Algebra,
        mid: &[FlatTangle],
    ) -> Result<Bimodule<'a>, String> {
        if mid.is_empty() {
            return Err("a bimodule needs at least one layer".into());
        }
        if mid[0].bottom() != 2 * inner.n() {
            return Err(format!(
                "tangle has {} inner endpoints, algebra expects {}",
                mid[0].bottom(),
                2 * inner.n()
            ));
        }
        if mid[mid.len() - 1].top() != 2 * outer.n() {
            return Err(format!(
                "tangle has {} outer endpoints, algebra expects {}",
                mid[mid.len() - 1].top(),
                2 * outer.n()
            ));
        }
        let mut tangle = mid[0].clone();
        for t in mid[1..].iter() {
            tangle = tangle.compose(t).map_err(|e| e.to_string())?;
        }
        let spaces = outer
            .matchings()
            .iter()
            .map(|b| {
                inner
                    .matchings()
                    .iter()
                    .map(|a| {
                        let mut layers = vec![FlatTangle::cup(a)];
                        layers.extend(mid.iter().cloned());
                        layers.push(FlatTangle::cap(b));
                        let stack = Stack::new(layers).unwrap();
                        let config = stack.trace();
                        let slots = Slots::from_config(&config);
                        PairSpace {
                            stack,
                            config,
                            slots,
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Bimodule {
            outer,
            inner,
            tangle,
            mid: mid.to_vec(),
            spaces,
            left_plans: RefCell::new(HashMap::new()),
            right_plans: RefCell::new(HashMap::new()),
        })
    }

    pub fn outer(&self) -> &Algebra {
        self.outer
    }

    pub fn inner(&self) -> &Algebra {
        self.inner
    }

    pub fn tangle(&self) -> &FlatTangle {
        &self.tangle
    }

    /// The global grading shift, by the inner rank.
    pub fn shift(&self) -> i64 {
        self.inner.n() as i64
    }

    pub fn space(&self, b: usize, a: usize) -> &PairSpace {
        &self.spaces[b][a]
    }

    pub fn basis(&self) -> Vec<(usize, usize, Vec<Dec>)> {
        let mut out = Vec::new();
        for b in 0..self.spaces.len() {
            for a in 0..self.spaces[b].len() {
                for dec in self.spaces[b][a].slots.basis() {
                    out.push((b, a, dec));
                }
            }
        }
        out
    }

    pub fn basis_element(&self, b: usize, a: usize, dec: Vec<Dec>) -> Element {
        let mut x = Element::zero();
        x.add_component(b, a, StateVector::basis(dec));
        x
    }

    pub fn bidegree(&self, b: usize, a: usize, dec: &[Dec]) -> Bidegree {
        self.spaces[b][a].slots.bidegree(dec, self.shift())
    }

    pub fn homogeneous_bidegree(&self, x: &Element) -> Option<Bidegree> {
        let mut deg = None;
        for (&(b, a), sv) in x.components() {
            let d = sv.homogeneous_bidegree(&self.spaces[b][a].slots, self.shift())?;
            match deg {
                None => deg = Some(d),
                Some(prev) if prev == d => {}
                _ => return None,
            }
        }
        deg
    }

    pub fn graded_rank(&self) -> LaurentQA {
        let mut total = LaurentQA::zero();
        for row in self.spaces.iter() {
            for space in row.iter() {
                total += &space.slots.graded_rank(self.shift());
            }
        }
        total
    }

    /// Circle of the `(b, a)` space through inner boundary point `k` of the
    /// tangle layer.
    pub fn circle_through_inner(&self, b: usize, a: usize, k: usize) -> usize {
        let space = &self.spaces[b][a];
        let (arc, _) = space.stack.layers[1].partner(Pt::B(k));
        space.config.circle_of_arc(1, arc)
    }

    /// Circle of the `(b, a)` space through outer boundary point `k` of the
    /// tangle layer.
    pub fn circle_through_outer(&self, b: usize, a: usize, k: usize) -> usize {
        let space = &self.spaces[b][a];
        let last = self.mid.len();
        let (arc, _) = space.stack.layers[last].partner(Pt::T(k));
        space.config.circle_of_arc(last, arc)
    }

    fn left_plan(&self, c: usize, b: usize, a: usize) -> Rc<ActionPlan> {
        if let Some(p) = self.left_plans.borrow().get(&(c, b, a)) {
            return Rc::clone(p);
        }
        let mb = &self.outer.matchings()[b];
        let mc = &self.outer.matchings()[c];
        let ma = &self.inner.matchings()[a];
        let k = self.mid.len();
        let mut layers = vec![FlatTangle::cup(ma)];
        layers.extend(self.mid.iter().cloned());
        layers.push(FlatTangle::cap(mb));
        layers.push(FlatTangle::cup(mb));
        layers.push(FlatTangle::cap(mc));
        let lower: Vec<usize> = (0..=k + 1).collect();
        let mut shared: Vec<(usize, usize)> = (0..=k).map(|j| (j, j)).collect();
        shared.push((k + 3, k + 1));
        let plan = Rc::new(make_action_plan(
            layers,
            &self.spaces[b][a],
            &lower,
            self.outer.space(c, b),
            &[k + 2, k + 3],
            mb,
            k + 1,
            &self.spaces[c][a],
            &shared,
        ));
        self.left_plans
            .borrow_mut()
            .insert((c, b, a), Rc::clone(&plan));
        plan
    }

    fn right_plan(&self, b: usize, a: usize, a0: usize) -> Rc<ActionPlan> {
        if let Some(p) = self.right_plans.borrow().get(&(b, a, a0)) {
            return Rc::clone(p);
        }
        let ma = &self.inner.matchings()[a];
        let ma0 = &self.inner.matchings()[a0];
        let mb = &self.outer.matchings()[b];
        let k = self.mid.len();
        let mut layers = vec![
            FlatTangle::cup(ma0),
            FlatTangle::cap(ma),
            FlatTangle::cup(ma),
        ];
        layers.extend(self.mid.iter().cloned());
        layers.push(FlatTangle::cap(mb));
        let upper: Vec<usize> = (2..=k + 3).collect();
        let mut shared = vec![(0, 0)];
        shared.extend((0..k).map(|j| (j + 3, j + 1)));
        shared.push((k + 3, k + 1));
        let plan = Rc::new(make_action_plan(
            layers,
            self.inner.space(a, a0),
            &[0, 1],
            &self.spaces[b][a],
            &upper,
            ma,
            1,
            &self.spaces[b][a0],
            &shared,
        ));
        self.right_plans
            .borrow_mut()
            .insert((b, a, a0), Rc::clone(&plan));
        plan
    }

    /// Left action of the outer algebra: `h ⊗ x ↦ h·x`.
    pub fn left_act(&self, h: &Element, x: &Element) -> Element {
        let mut out = Element::zero();
        for (&(c, b1), sh) in h.components() {
            for (&(b2, a), sx) in x.components() {
                if b1 != b2 {
                    continue;
                }
                let plan = self.left_plan(c, b1, a);
                out.add_component(c, a, plan.apply(sh, sx));
            }
        }
        out
    }

    /// Right action of the inner algebra: `x ⊗ h ↦ x·h`.
    pub fn right_act(&self, x: &Element, h: &Element) -> Element {
        let mut out = Element::zero();
        for (&(b, a1), sx) in x.components() {
            for (&(a2, a0), sh) in h.components() {
                if a1 != a2 {
                    continue;
                }
                let plan = self.right_plan(b, a1, a0);
                out.add_component(b, a0, plan.apply(sx, sh));
            }
        }
        out
    }
}

/// Verify the bimodule axioms on the standard basis: unit actions,
/// associativity of each action against algebra multiplication, commutation
/// of the two actions, and additivity of the bigrading under both actions.
pub fn actions_report(bim: &Bimodule) -> CheckReport {
    let mut report = CheckReport::new("bimodule actions");
    let xs: Vec<Element> = bim
        .basis()
        .iter()
        .map(|(b, a, dec)| bim.basis_element(*b, *a, dec.clone()))
        .collect();
    let hs: Vec<(Element, Bidegree, usize)> = bim
        .outer()
        .basis()
        .into_iter()
        .map(|(c, b, dec)| {
            let deg = bim.outer().bidegree(c, b, &dec);
            (bim.outer().basis_element(c, b, dec), deg, b)
        })
        .collect();
    let ks: Vec<(Element, Bidegree, usize)> = bim
        .inner()
        .basis()
        .into_iter()
        .map(|(a, a0, dec)| {
            let deg = bim.inner().bidegree(a, a0, &dec);
            (bim.inner().basis_element(a, a0, dec), deg, a)
        })
        .collect();

    let uo = bim.outer().unit();
    let ui = bim.inner().unit();
    for x in xs.iter() {
        report.check(bim.left_act(&uo, x) == *x, || "1·x ≠ x".into());
        report.check(bim.right_act(x, &ui) == *x, || "x·1 ≠ x".into());
    }

    for (bi, (b, a, dec)) in bim.basis().iter().enumerate() {
        let x = &xs[bi];
        let dx = bim.bidegree(*b, *a, dec);
        let wx = bim.space(*b, *a).slots.num_essential() as u32;
        for (h, dh, hb) in hs.iter() {
            if hb != b {
                continue;
            }
            let hx = bim.left_act(h, x);
            if hx.is_zero() {
                continue;
            }
            let dhx = bim.homogeneous_bidegree(&hx);
            report.check(dhx.is_some(), || "h·x is not homogeneous".into());
            if let Some(d) = dhx {
                let sign = if wx % 2 == 0 { 1 } else { -1 };
                report.check(
                    d.qdeg == dh.qdeg + dx.qdeg && d.adeg == dx.adeg + sign * dh.adeg,
                    || format!("degree of h·x: got {:?}", d),
                );
            }
        }
        for (k, dk, ka) in ks.iter() {
            if ka != a {
                continue;
            }
            let xk = bim.right_act(x, k);
            if xk.is_zero() {
                continue;
            }
            let dxk = bim.homogeneous_bidegree(&xk);
            report.check(dxk.is_some(), || "x·k is not homogeneous".into());
            if let Some(d) = dxk {
                let w = component_essential(bim.inner(), k);
                let sign = if w % 2 == 0 { 1 } else { -1 };
                report.check(
                    d.qdeg == dx.qdeg + dk.qdeg && d.adeg == dk.adeg + sign * dx.adeg,
                    || format!("degree of x·k: got {:?}", d),
                );
            }
        }
    }

    // Associativity of each action and commutation of the two.
    for x in xs.iter() {
        for (h1, _, _) in hs.iter() {
            for (h2, _, _) in hs.iter() {
                let lhs = bim.left_act(&bim.outer().multiply(h1, h2), x);
                let rhs = bim.left_act(h1, &bim.left_act(h2, x));
                report.check(lhs == rhs, || "(h1 h2)·x ≠ h1·(h2·x)".into());
            }
            for (k, _, _) in ks.iter() {
                let lhs = bim.right_act(&bim.left_act(h1, x), k);
                let rhs = bim.left_act(h1, &bim.right_act(x, k));
                report.check(lhs == rhs, || "(h·x)·k ≠ h·(x·k)".into());
            }
        }
        for (k1, _, _) in ks.iter() {
            for (k2, _, _) in ks.iter() {
                let lhs = bim.right_act(x, &bim.inner().multiply(k1, k2));
                let rhs = bim.right_act(&bim.right_act(x, k1), k2);
                report.check(lhs == rhs, || "x·(k1 k2) ≠ (x·k1)·k2".into());
            }
        }
    }

    report
}

/// Number of essential circles in the single component of a basis element.
fn component_essential(alg: &Algebra, x: &Element) -> u32 {
    let (&(b, a), _) = x.components().next().expect("basis element");
    alg.space(b, a).slots.num_essential() as u32
}

/// The bimodule of the identity tangle is the algebra itself: exhibit the
/// circle correspondence and check it intertwines both actions with
/// multiplication.
pub fn identity_bimodule_report(alg: &Algebra) -> CheckReport {
    let mut report = CheckReport::new("identity bimodule");
    let id = FlatTangle::id(alg.n());
    let bim = Bimodule::new(alg, alg, &id).unwrap();
    report.check(
        bim.graded_rank() == alg.graded_rank(),
        || "graded rank differs from the algebra".into(),
    );

    let m = alg.matchings().len();
    // perms[b][a]: circle of the bimodule space -> circle of the algebra
    // space, matched through the boundary points they share.
    let mut perms: Vec<Vec<Vec<usize>>> = Vec::new();
    for b in 0..m {
        let mut row = Vec::new();
        for a in 0..m {
            let space = bim.space(b, a);
            let mut perm = vec![None; space.config.circles.len()];
            for k in 1..=2 * alg.n() {
                let i = bim.circle_through_inner(b, a, k);
                let j = alg.circle_through(b, a, k);
                match perm[i] {
                    None => perm[i] = Some(j),
                    Some(prev) => {
                        report.check(prev == j, || "correspondence splits a circle".into())
                    }
                }
            }
            let perm: Vec<usize> = perm.into_iter().map(|p| p.unwrap()).collect();
            for (i, &j) in perm.iter().enumerate() {
                report.check(
                    space.config.circles[i].is_essential()
                        == alg.space(b, a).config.circles[j].is_essential()
                        && space.slots.rank[i] == alg.space(b, a).slots.rank[j],
                    || "correspondence breaks the radial order".into(),
                );
            }
            row.push(perm);
        }
        perms.push(row);
    }

    let phi = |x: &Element| -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in x.components() {
            let perm = &perms[b][a];
            let mut mapped = StateVector::zero();
            for (k, coeff) in sv.terms() {
                let mut key = vec![Dec::One; alg.space(b, a).slots.len()];
                for (i, &j) in perm.iter().enumerate() {
                    key[j] = k[i];
                }
                mapped.add_term(key, coeff.clone());
            }
            out.add_component(b, a, mapped);
        }
        out
    };

    let xs: Vec<Element> = bim
        .basis()
        .iter()
        .map(|(b, a, dec)| bim.basis_element(*b, *a, dec.clone()))
        .collect();
    let hs: Vec<Element> = alg
        .basis()
        .into_iter()
        .map(|(c, b, dec)| alg.basis_element(c, b, dec))
        .collect();
    for (x, (b, a, dec)) in xs.iter().zip(bim.basis().iter()) {
        report.check(
            alg.homogeneous_bidegree(&phi(x)) == Some(bim.bidegree(*b, *a, dec)),
            || "correspondence changes the bidegree".into(),
        );
        for h in hs.iter() {
            report.check(
                phi(&bim.left_act(h, x)) == alg.multiply(h, &phi(x)),
                || "left action differs from multiplication".into(),
            );
            report.check(
                phi(&bim.right_act(x, h)) == alg.multiply(&phi(x), h),
                || "right action differs from multiplication".into(),
            );
        }
    }

    report
}

/// The cobordism contracting a doubled middle matching between two stacked
/// tangle closures: the structure map of the tensor product
/// `F(T2) ⊗ F(T1) → F(T2 T1)` over the shared middle algebra.
pub struct TensorPsi<'x, 'a> {
    bim2: &'x Bimodule<'a>,
    bim1: &'x Bimodule<'a>,
    composite: &'x Bimodule<'a>,
    plans: RefCell<HashMap<(usize, usize, usize), Rc<ActionPlan>>>,
}

impl<'x, 'a> TensorPsi<'x, 'a> {
    /// `bim2` sits outside `bim1`; `composite` is the bimodule of the
    /// composed tangle over the same outer and inner algebras.
    pub fn new(
        bim2: &'x Bimodule<'a>,
        bim1: &'x Bimodule<'a>,
        composite: &'x Bimodule<'a>,
    ) -> Result<TensorPsi<'x, 'a>, String> {
        if !std::ptr::eq(bim2.inner, bim1.outer) {
            return Err("factors do not share the middle algebra".into());
        }
        if !std::ptr::eq(bim2.outer, composite.outer)
            || !std::ptr::eq(bim1.inner, composite.inner)
        {
            return Err("composite is over different algebras".into());
        }
        let t = bim1
            .tangle
            .compose(&bim2.tangle)
            .map_err(|e| e.to_string())?
            .normalize();
        if t != composite.tangle.normalize() {
            return Err("composite tangle is not the composition".into());
        }
        Ok(TensorPsi {
            bim2,
            bim1,
            composite,
            plans: RefCell::new(HashMap::new()),
        })
    }

    pub fn factors(&self) -> (&'x Bimodule<'a>, &'x Bimodule<'a>) {
        (self.bim2, self.bim1)
    }

    pub fn composite(&self) -> &'x Bimodule<'a> {
        self.composite
    }

    fn plan(&self, c: usize, b: usize, a: usize) -> Rc<ActionPlan> {
        if let Some(p) = self.plans.borrow().get(&(c, b, a)) {
            return Rc::clone(p);
        }
        let mid = self.bim1.outer;
        let ma = &self.bim1.inner.matchings()[a];
        let mb = &mid.matchings()[b];
        let mc = &self.bim2.outer.matchings()[c];
        let k1 = self.bim1.mid.len();
        let k2 = self.bim2.mid.len();
        let mut layers = vec![FlatTangle::cup(ma)];
        layers.extend(self.bim1.mid.iter().cloned());
        layers.push(FlatTangle::cap(mb));
        layers.push(FlatTangle::cup(mb));
        layers.extend(self.bim2.mid.iter().cloned());
        layers.push(FlatTangle::cap(mc));
        let lower: Vec<usize> = (0..=k1 + 1).collect();
        let upper: Vec<usize> = (k1 + 2..=k1 + k2 + 3).collect();
        let plan = Rc::new(make_action_plan(
            layers,
            self.bim1.space(b, a),
            &lower,
            self.bim2.space(c, b),
            &upper,
            mb,
            k1 + 1,
            self.composite.space(c, a),
            &[(0, 0), (k1 + k2 + 3, self.composite.mid.len() + 1)],
        ));
        self.plans
            .borrow_mut()
            .insert((c, b, a), Rc::clone(&plan));
        plan
    }

    /// The image of `x ⊗ y`, extended bilinearly over components.
    pub fn psi(&self, x: &Element, y: &Element) -> Element {
        let mut out = Element::zero();
        for (&(c, b1), sx) in x.components() {
            for (&(b2, a), sy) in y.components() {
                if b1 != b2 {
                    continue;
                }
                let plan = self.plan(c, b1, a);
                out.add_component(c, a, plan.apply(sx, sy));
            }
        }
        out
    }
}

/// Certify that `psi` identifies the tensor product with the composite
/// bimodule: on the basis `x ⊗ g` given by the left projective
/// decomposition of the inner factor, the matrix of `psi` is square with
/// determinant `±1` in every component, and the quantum ranks agree.
pub fn tensor_iso_report(psi: &TensorPsi) -> CheckReport {
    let mut report = CheckReport::new("tensor composition");
    let (bim2, bim1) = psi.factors();
    let composite = psi.composite();
    let summands = left_projective_decomposition(bim1);

    let mut expected = LaurentQA::zero();
    for s in summands.iter() {
        let mut col = LaurentQA::zero();
        for c in 0..bim2.outer().matchings().len() {
            col += &bim2
                .space(c, s.through)
                .slots
                .graded_rank(bim2.shift());
        }
        expected += &(&LaurentQA::q_pow(s.degree.qdeg) * &col.at_a1());
    }
    report.check(
        composite.graded_rank().at_a1() == expected,
        || "tensor product changes the quantum rank".into(),
    );

    for a in 0..bim1.inner().matchings().len() {
        let col: Vec<&ProjectiveSummand> =
            summands.iter().filter(|s| s.fixed == a).collect();
        for c in 0..bim2.outer().matchings().len() {
            let space = composite.space(c, a);
            let basis = space.slots.basis();
            let index: HashMap<Vec<Dec>, usize> = basis
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, d)| (d, i))
                .collect();
            let mut rows = Vec::new();
            for s in col.iter() {
                for xdec in bim2.space(c, s.through).slots.basis() {
                    let x = bim2.basis_element(c, s.through, xdec);
                    let img = psi.psi(&x, &s.generator);
                    let mut row = vec![PolyAlpha::zero(); basis.len()];
                    for (&(pc, pa), sv) in img.components() {
                        report.check((pc, pa) == (c, a), || {
                            "psi leaves the component".into()
                        });
                        for (k, v) in sv.terms() {
                            row[index[k]] = v.clone();
                        }
                    }
                    rows.push(row);
                }
            }
            report.check(rows.len() == basis.len(), || {
                format!(
                    "psi block at ({}, {}) is {}x{}",
                    c,
                    a,
                    rows.len(),
                    basis.len()
                )
            });
            if rows.len() == basis.len() {
                report.check(crate::ring::unimodular(&rows), || {
                    format!("psi block at ({}, {}) is not unimodular", c, a)
                });
            }
        }
    }
    report
}

/// Check that `psi` is balanced over the middle algebra and commutes with
/// the outer and inner actions, on all composable basis triples.
pub fn tensor_linearity_report(psi: &TensorPsi) -> CheckReport {
    let mut report = CheckReport::new("tensor linearity");
    let (bim2, bim1) = psi.factors();
    let composite = psi.composite();
    let mid = bim1.outer();
    let xs: Vec<(usize, usize, Element)> = bim2
        .basis()
        .into_iter()
        .map(|(c, b, dec)| (c, b, bim2.basis_element(c, b, dec)))
        .collect();
    let ys: Vec<(usize, usize, Element)> = bim1
        .basis()
        .into_iter()
        .map(|(b, a, dec)| (b, a, bim1.basis_element(b, a, dec)))
        .collect();

    for (c, b, x) in xs.iter() {
        for (yb, _, y) in ys.iter() {
            for (hb, hb2, dec) in mid.basis() {
                if hb != *b || hb2 != *yb {
                    continue;
                }
                let h = mid.basis_element(hb, hb2, dec);
                let lhs = psi.psi(&bim2.right_act(x, &h), y);
                let rhs = psi.psi(x, &bim1.left_act(&h, y));
                report.check(lhs == rhs, || "psi(x·h ⊗ y) ≠ psi(x ⊗ h·y)".into());
            }
            if yb != b {
                continue;
            }
            let xy = psi.psi(x, y);
            for (hc, hc2, dec) in bim2.outer().basis() {
                if hc2 != *c {
                    continue;
                }
                let h = bim2.outer().basis_element(hc, hc2, dec);
                report.check(
                    psi.psi(&bim2.left_act(&h, x), y) == composite.left_act(&h, &xy),
                    || "psi does not commute with the left action".into(),
                );
            }
        }
    }
    for (_, b, x) in xs.iter() {
        for (yb, ya, y) in ys.iter() {
            if yb != b {
                continue;
            }
            let xy = psi.psi(x, y);
            for (ka, ka2, dec) in bim1.inner().basis() {
                if ka != *ya {
                    continue;
                }
                let k = bim1.inner().basis_element(ka, ka2, dec);
                report.check(
                    psi.psi(x, &bim1.right_act(y, &k)) == composite.right_act(&xy, &k),
                    || "psi does not commute with the right action".into(),
                );
            }
        }
    }
    report
}

/// Certify an isomorphism between two bimodules over the same algebras
/// whose tangles are isotopic rel boundary: circles are matched through the
/// boundary points they share, closed essential circles by radial rank,
/// and the remaining contractible circles in slot order. The resulting
/// slot bijection must intertwine both actions on the whole basis.
pub fn correspondence_report(
    name: &str,
    src: &Bimodule,
    dst: &Bimodule,
) -> CheckReport {
    let mut report = CheckReport::new(name);
    if !std::ptr::eq(src.outer, dst.outer) || !std::ptr::eq(src.inner, dst.inner) {
        report.check(false, || "bimodules are over different algebras".into());
        return report;
    }
    let nb = src.outer().matchings().len();
    let na = src.inner().matchings().len();
    let mut perms: Vec<Vec<Vec<usize>>> = Vec::new();
    for b in 0..nb {
        let mut row = Vec::new();
        for a in 0..na {
            let s = src.space(b, a);
            let d = dst.space(b, a);
            let mut perm: Vec<Option<usize>> = vec![None; s.config.circles.len()];
            let mut set = |report: &mut CheckReport, i: usize, j: usize| match perm[i] {
                None => perm[i] = Some(j),
                Some(prev) => report.check(prev == j, || {
                    "correspondence splits a circle".into()
                }),
            };
            for k in 1..=src.tangle().bottom() {
                set(
                    &mut report,
                    src.circle_through_inner(b, a, k),
                    dst.circle_through_inner(b, a, k),
                );
            }
            for k in 1..=src.tangle().top() {
                set(
                    &mut report,
                    src.circle_through_outer(b, a, k),
                    dst.circle_through_outer(b, a, k),
                );
            }
            for (i, m) in perm.iter_mut().enumerate() {
                if m.is_none() && s.config.circles[i].is_essential() {
                    let r = s.slots.rank[i];
                    *m = (0..d.config.circles.len())
                        .find(|&j| d.slots.rank[j] == r);
                }
            }
            let mut used = vec![false; d.slots.len()];
            let mut ok = true;
            for m in perm.iter().flatten() {
                if used[*m] {
                    ok = false;
                }
                used[*m] = true;
            }
            let mut spare = (0..d.slots.len()).filter(|&j| !used[j]);
            let mut full: Vec<usize> = Vec::with_capacity(s.slots.len());
            for (i, m) in perm.iter().enumerate() {
                match *m {
                    Some(j) => full.push(j),
                    None => match spare.next() {
                        Some(j) => {
                            ok = ok && !s.config.circles[i].is_essential();
                            full.push(j);
                        }
                        None => ok = false,
                    },
                }
            }
            for _ in 0..s.config.free.len() {
                match spare.next() {
                    Some(j) => full.push(j),
                    None => ok = false,
                }
            }
            ok = ok && spare.next().is_none();
            if ok {
                for (i, &j) in full.iter().enumerate() {
                    ok = ok
                        && s.slots.essential[i] == d.slots.essential[j]
                        && s.slots.rank[i] == d.slots.rank[j];
                }
            }
            report.check(ok, || {
                format!("no slot bijection at ({}, {})", b, a)
            });
            if !ok {
                return report;
            }
            row.push(full);
        }
        perms.push(row);
    }

    let phi = |x: &Element| -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in x.components() {
            let perm = &perms[b][a];
            let mut mapped = StateVector::zero();
            for (k, coeff) in sv.terms() {
                let mut key = vec![Dec::One; dst.space(b, a).slots.len()];
                for (i, &j) in perm.iter().enumerate() {
                    key[j] = k[i];
                }
                mapped.add_term(key, coeff.clone());
            }
            out.add_component(b, a, mapped);
        }
        out
    };

    for (b, a, dec) in src.basis() {
        let x = src.basis_element(b, a, dec.clone());
        let fx = phi(&x);
        report.check(
            dst.homogeneous_bidegree(&fx) == Some(src.bidegree(b, a, &dec)),
            || "correspondence changes the bidegree".into(),
        );
        for (c, b2, hdec) in src.outer().basis() {
            if b2 != b {
                continue;
            }
            let h = src.outer().basis_element(c, b2, hdec);
            report.check(
                phi(&src.left_act(&h, &x)) == dst.left_act(&h, &fx),
                || "correspondence breaks the left action".into(),
            );
        }
        for (a2, a0, kdec) in src.inner().basis() {
            if a2 != a {
                continue;
            }
            let k = src.inner().basis_element(a2, a0, kdec);
            report.check(
                phi(&src.right_act(&x, &k)) == dst.right_act(&fx, &k),
                || "correspondence breaks the right action".into(),
            );
        }
    }
    report
}

/// The bimodule is invariant under pre- and post-composition with a Dehn
/// twist of the annulus.
pub fn dehn_twist_report(bim: &Bimodule) -> CheckReport {
    let mut report = CheckReport::new("dehn twist");
    if bim.outer().n() > 0 {
        let t = bim
            .tangle()
            .compose(&FlatTangle::tw(bim.outer().n()))
            .unwrap()
            .normalize();
        let twisted = Bimodule::new(bim.outer, bim.inner, &t).unwrap();
        let sub = correspondence_report("outer twist", bim, &twisted);
        report.checks += sub.checks;
        report.failures.extend(sub.failures);
    }
    if bim.inner().n() > 0 {
        let t = FlatTangle::tw(bim.inner().n())
            .compose(bim.tangle())
            .unwrap()
            .normalize();
        let twisted = Bimodule::new(bim.outer, bim.inner, &t).unwrap();
        let sub = correspondence_report("inner twist", bim, &twisted);
        report.checks += sub.checks;
        report.failures.extend(sub.failures);
    }
    report
}

/// Traced slots of a bimodule space whose circles never leave the tangle
/// and its closure on one side, followed by every free loop. These circles
/// persist across all matchings on the other side.
fn persistent_slots(space: &PairSpace, left: bool) -> Vec<usize> {
    let keep = |layer: usize| if left { layer <= 1 } else { layer >= 1 };
    let mut out = Vec::new();
    for (i, c) in space.config.circles.iter().enumerate() {
        let closed = c.items.iter().all(|it| match *it {
            crate::config::Item::Arc { layer, .. } => keep(layer),
            crate::config::Item::Cross { layer, .. } => keep(layer),
        });
        if closed {
            out.push(i);
        }
    }
    for f in 0..space.config.free.len() {
        out.push(space.config.circles.len() + f);
    }
    out
}

/// One summand of a one-sided decomposition of the bimodule into shifted
/// indecomposable projectives.
pub struct ProjectiveSummand {
    /// Matching index fixed by the summand: inner for a left decomposition,
    /// outer for a right one.
    pub fixed: usize,
    /// Matching whose projective module this summand is a shifted copy of.
    pub through: usize,
    /// Generator: a basis element decorating the persistent circles.
    pub generator: Element,
    pub degree: Bidegree,
}

/// Decomposition of the bimodule as a left module over the outer algebra.
pub fn left_projective_decomposition(bim: &Bimodule) -> Vec<ProjectiveSummand> {
    side_decomposition(bim, true)
}

/// Decomposition as a right module over the inner algebra.
pub fn right_projective_decomposition(bim: &Bimodule) -> Vec<ProjectiveSummand> {
    side_decomposition(bim, false)
}

fn side_decomposition(bim: &Bimodule, left: bool) -> Vec<ProjectiveSummand> {
    let fixed_alg = if left { bim.inner() } else { bim.outer() };
    let other_alg = if left { bim.outer() } else { bim.inner() };
    let mut out = Vec::new();
    for fx in 0..fixed_alg.matchings().len() {
        let space_of = |o: usize| {
            if left {
                bim.space(o, fx)
            } else {
                bim.space(fx, o)
            }
        };
        // The matching of the through strands: closing with it turns every
        // non-persistent circle contractible and maximizes their number,
        // uniquely, at the full rank.
        let mut through = None;
        let mut best = 0usize;
        let mut ties = 0usize;
        for o in 0..other_alg.matchings().len() {
            let space = space_of(o);
            let pers = persistent_slots(space, left);
            let open = space
                .config
                .circles
                .iter()
                .enumerate()
                .filter(|(i, c)| !pers.contains(i) && !c.is_essential())
                .count();
            if through.is_none() || open > best {
                through = Some(o);
                best = open;
                ties = 1;
            } else if open == best {
                ties += 1;
            }
        }
        let through = through.expect("some matching closes the tangle");
        assert_eq!(best, other_alg.n(), "through strands close to nested circles");
        assert_eq!(ties, 1, "through matching is unique");

        let gen_space = space_of(through);
        let pers = persistent_slots(gen_space, left);
        let mut decs: Vec<Vec<Dec>> =
            vec![vec![Dec::One; gen_space.slots.len()]];
        for &slot in pers.iter() {
            let choices = if gen_space.slots.essential[slot] {
                [Dec::E1, Dec::E2]
            } else {
                [Dec::One, Dec::Dot]
            };
            decs = decs
                .into_iter()
                .flat_map(|d| {
                    choices.iter().map(move |&c| {
                        let mut d = d.clone();
                        d[slot] = c;
                        d
                    })
                })
                .collect();
        }
        for dec in decs {
            let (b, a) = if left { (through, fx) } else { (fx, through) };
            let degree = bim.bidegree(b, a, &dec);
            out.push(ProjectiveSummand {
                fixed: fx,
                through,
                generator: bim.basis_element(b, a, dec),
                degree,
            });
        }
    }
    out
}

/// Certify that acting on the generators presents the bimodule as a direct
/// sum of shifted indecomposable projectives on either side: the change of
/// basis is square with determinant `±1` in every component, and the
/// quantum graded ranks match.
pub fn projectivity_report(bim: &Bimodule) -> CheckReport {
    let mut report = CheckReport::new("projective decomposition");
    for &left in &[true, false] {
        let side = if left { "left" } else { "right" };
        let fixed_alg = if left { bim.inner() } else { bim.outer() };
        let other_alg = if left { bim.outer() } else { bim.inner() };
        let summands = side_decomposition(bim, left);

        // Quantum graded rank of the sum of shifted projectives.
        let mut expected = LaurentQA::zero();
        for s in summands.iter() {
            let mut proj = LaurentQA::zero();
            for o in 0..other_alg.matchings().len() {
                let space = if left {
                    other_alg.space(o, s.through)
                } else {
                    other_alg.space(s.through, o)
                };
                proj += &space.slots.graded_rank(other_alg.shift());
            }
            expected += &(&LaurentQA::q_pow(s.degree.qdeg) * &proj.at_a1());
        }
        report.check(
            bim.graded_rank().at_a1() == expected,
            || format!("{} decomposition changes the quantum rank", side),
        );

        for fx in 0..fixed_alg.matchings().len() {
            let col: Vec<&ProjectiveSummand> =
                summands.iter().filter(|s| s.fixed == fx).collect();
            for o in 0..other_alg.matchings().len() {
                let space = if left {
                    bim.space(o, fx)
                } else {
                    bim.space(fx, o)
                };
                let basis = space.slots.basis();
                let index: HashMap<Vec<Dec>, usize> = basis
                    .iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, d)| (d, i))
                    .collect();
                let mut rows = Vec::new();
                for s in col.iter() {
                    let hspace = if left {
                        other_alg.space(o, s.through)
                    } else {
                        other_alg.space(s.through, o)
                    };
                    for hdec in hspace.slots.basis() {
                        let prod = if left {
                            let h = other_alg.basis_element(o, s.through, hdec);
                            bim.left_act(&h, &s.generator)
                        } else {
                            let h = other_alg.basis_element(s.through, o, hdec);
                            bim.right_act(&s.generator, &h)
                        };
                        let mut row = vec![PolyAlpha::zero(); basis.len()];
                        for (&(pb, pa), sv) in prod.components() {
                            let expect = if left { (o, fx) } else { (fx, o) };
                            report.check((pb, pa) == expect, || {
                                format!("{} action leaves the component", side)
                            });
                            for (k, c) in sv.terms() {
                                row[index[k]] = c.clone();
                            }
                        }
                        rows.push(row);
                    }
                }
                report.check(rows.len() == basis.len(), || {
                    format!(
                        "{} block at ({}, {}) is {}x{}",
                        side,
                        fx,
                        o,
                        rows.len(),
                        basis.len()
                    )
                });
                if rows.len() == basis.len() {
                    report.check(crate::ring::unimodular(&rows), || {
                        format!("{} block at ({}, {}) is not unimodular", side, fx, o)
                    });
                }
            }
        }
    }
    report
}

/// The saddle cobordism surgering one band inside the tangle layer, between
/// the tangle components `B(p)..B(q)` and `T(p)..T(q)`; `dst` must be the
/// bimodule of the surgered tangle. Run backwards it is the reversed saddle
/// `dst -> src`.
pub struct SaddleMorphism<'x, 'a> {
    src: &'x Bimodule<'a>,
    dst: &'x Bimodule<'a>,
    /// Layer of the source stack carrying both attaching arcs; the tangle
    /// layers sit at `1..=mid.len()`.
    layer: usize,
    p: usize,
    q: usize,
    plans: RefCell<HashMap<(usize, usize), Rc<SaddlePlan>>>,
}

struct SaddlePlan {
    outcome: SurgeryOutcome,
    before: Slots,
    after: Slots,
    /// Slot of the surgered source -> slot of the destination space.
    final_map: Vec<usize>,
    dst_len: usize,
}

impl<'x, 'a> SaddleMorphism<'x, 'a> {
    pub fn new(
        src: &'x Bimodule<'a>,
        dst: &'x Bimodule<'a>,
        p: usize,
        q: usize,
    ) -> Result<SaddleMorphism<'x, 'a>, String> {
        SaddleMorphism::new_at(src, dst, 1, p, q)
    }

    /// A saddle with both attaching arcs on the given tangle layer of a
    /// layered bimodule. All other layers must be shared with `dst`.
    pub fn new_at(
        src: &'x Bimodule<'a>,
        dst: &'x Bimodule<'a>,
        layer: usize,
        p: usize,
        q: usize,
    ) -> Result<SaddleMorphism<'x, 'a>, String> {
        if !std::ptr::eq(src.outer, dst.outer) || !std::ptr::eq(src.inner, dst.inner) {
            return Err("bimodules are over different algebras".into());
        }
        if src.mid.len() != dst.mid.len() {
            return Err("layer counts differ".into());
        }
        if layer == 0 || layer > src.mid.len() {
            return Err("saddle layer is out of range".into());
        }
        Ok(SaddleMorphism {
            src,
            dst,
            layer,
            p,
            q,
            plans: RefCell::new(HashMap::new()),
        })
    }

    fn plan(&self, b: usize, a: usize) -> Rc<SaddlePlan> {
        if let Some(p) = self.plans.borrow().get(&(b, a)) {
            return Rc::clone(p);
        }
        let space = self.src.space(b, a);
        let outcome = space.config.surgery(
            &space.stack,
            &Band {
                lower: self.layer,
                upper: self.layer,
                p: self.p,
                q: self.q,
            },
        );
        let after = Slots::from_config(&outcome.config);
        let target = self.dst.space(b, a);
        let num_layers = self.src.mid.len() + 2;
        let shared: Vec<(usize, usize)> = (0..num_layers)
            .filter(|&j| j != self.layer)
            .map(|j| (j, j))
            .collect();
        let final_map =
            match_into_target(&outcome.config, &after, num_layers, target, &shared);
        let plan = Rc::new(SaddlePlan {
            outcome,
            before: space.slots.clone(),
            after,
            final_map,
            dst_len: target.slots.len(),
        });
        self.plans.borrow_mut().insert((b, a), Rc::clone(&plan));
        plan
    }

    /// The saddle applied to an element of the source bimodule.
    pub fn apply(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in x.components() {
            let plan = self.plan(b, a);
            let v = apply_step(sv, &plan.outcome, &plan.before, &plan.after);
            let mut mapped = StateVector::zero();
            for (k, c) in v.terms() {
                let mut key = vec![Dec::One; plan.dst_len];
                for (f, &t) in plan.final_map.iter().enumerate() {
                    key[t] = k[f];
                }
                mapped.add_term(key, c.clone());
            }
            out.add_component(b, a, mapped);
        }
        out
    }

    /// The reversed saddle applied to an element of the destination.
    pub fn apply_reverse(&self, y: &Element) -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in y.components() {
            let plan = self.plan(b, a);
            let mut v = StateVector::zero();
            for (k, c) in sv.terms() {
                let key: Vec<Dec> =
                    plan.final_map.iter().map(|&t| k[t]).collect();
                v.add_term(key, c.clone());
            }
            let back =
                apply_step_reverse(&v, &plan.outcome, &plan.before, &plan.after);
            out.add_component(b, a, back);
        }
        out
    }
}

/// Identification of a bimodule whose closures trace the same circles as
/// the algebra's own pair diagrams (an identity-shaped tangle, possibly
/// carrying free loops) with the algebra. Free loops are born decorated by
/// the unit and die by the counit of the Frobenius algebra.
pub struct LoopIdentification<'x, 'a> {
    bim: &'x Bimodule<'a>,
    /// perms[b][a]: traced circle of the bimodule space -> algebra circle.
    perms: Vec<Vec<Vec<usize>>>,
}

impl<'x, 'a> LoopIdentification<'x, 'a> {
    pub fn new(bim: &'x Bimodule<'a>) -> Result<LoopIdentification<'x, 'a>, String> {
        if !std::ptr::eq(bim.outer, bim.inner) {
            return Err("outer and inner algebras differ".into());
        }
        let alg = bim.outer;
        let m = alg.matchings().len();
        let mut perms = Vec::new();
        for b in 0..m {
            let mut row = Vec::new();
            for a in 0..m {
                let space = bim.space(b, a);
                let aspace = alg.space(b, a);
                if !aspace.config.free.is_empty() {
                    return Err("algebra space has free loops".into());
                }
                if space.config.circles.len() != aspace.config.circles.len() {
                    return Err(format!("circle count differs at ({b}, {a})"));
                }
                let mut perm = vec![None; space.config.circles.len()];
                for k in 1..=2 * alg.n() {
                    let i = bim.circle_through_inner(b, a, k);
                    let j = alg.circle_through(b, a, k);
                    match perm[i] {
                        None => perm[i] = Some(j),
                        Some(prev) if prev == j => {}
                        _ => return Err(format!("split circle at ({b}, {a})")),
                    }
                }
                let perm: Vec<usize> = perm
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| format!("closed circle at ({b}, {a})"))?;
                let mut seen = vec![false; perm.len()];
                for (i, &j) in perm.iter().enumerate() {
                    if seen[j] {
                        return Err(format!("collision at ({b}, {a})"));
                    }
                    seen[j] = true;
                    if space.slots.essential[i] != aspace.slots.essential[j]
                        || space.slots.rank[i] != aspace.slots.rank[j]
                    {
                        return Err(format!("radial order broken at ({b}, {a})"));
                    }
                }
                row.push(perm);
            }
            perms.push(row);
        }
        Ok(LoopIdentification { bim, perms })
    }

    /// Project onto the algebra, killing each free loop by the counit:
    /// a dot survives as `1`, an undecorated loop dies.
    pub fn to_algebra(&self, x: &Element) -> Element {
        let alg = self.bim.outer;
        let mut out = Element::zero();
        for (&(b, a), sv) in x.components() {
            let perm = &self.perms[b][a];
            let traced = perm.len();
            let mut mapped = StateVector::zero();
            for (k, coeff) in sv.terms() {
                if k[traced..].iter().any(|&d| d != Dec::Dot) {
                    continue;
                }
                let mut key = vec![Dec::One; alg.space(b, a).slots.len()];
                for (i, &j) in perm.iter().enumerate() {
                    key[j] = k[i];
                }
                mapped.add_term(key, coeff.clone());
            }
            out.add_component(b, a, mapped);
        }
        out
    }

    /// Include the algebra, giving birth to each free loop with the unit.
    pub fn from_algebra(&self, h: &Element) -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in h.components() {
            let perm = &self.perms[b][a];
            let space = self.bim.space(b, a);
            let mut inv = vec![0usize; perm.len()];
            for (i, &j) in perm.iter().enumerate() {
                inv[j] = i;
            }
            let mut mapped = StateVector::zero();
            for (k, coeff) in sv.terms() {
                let mut key = vec![Dec::One; space.slots.len()];
                for (j, &i) in inv.iter().enumerate() {
                    key[i] = k[j];
                }
                mapped.add_term(key, coeff.clone());
            }
            out.add_component(b, a, mapped);
        }
        out
    }
}

/// The `(n, n - 1)`-tangle with one cup at outer positions `i, i + 1` and
/// through strands everywhere else, for `1 <= i < 2n`.
pub fn elementary_cup(n: usize, i: usize) -> FlatTangle {
    assert!(n >= 1 && (1..2 * n).contains(&i), "cup position out of range");
    let mut arcs = vec![(Pt::T(i), Pt::T(i + 1))];
    for j in 1..=2 * (n - 1) {
        let t = if j < i { j } else { j + 2 };
        arcs.push((Pt::B(j), Pt::T(t)));
    }
    FlatTangle::new(2 * (n - 1), 2 * n, 0, arcs, 0).unwrap()
}

/// The tensor basis `x ⊗ g_s` of one component of a tensor structure map,
/// with its change-of-basis matrix into the composite space.
struct TensorBlock<'s> {
    rows: Vec<(Element, &'s ProjectiveSummand)>,
    /// `mat[d][r]`: coefficient of composite basis vector `d` in the image
    /// of tensor basis vector `r`.
    mat: Vec<Vec<PolyAlpha>>,
    index: HashMap<Vec<Dec>, usize>,
}

fn tensor_block<'s>(
    psi: &TensorPsi,
    summands: &'s [ProjectiveSummand],
    c: usize,
    a: usize,
) -> Option<TensorBlock<'s>> {
    let (bim2, _) = psi.factors();
    let basis = psi.composite().space(c, a).slots.basis();
    let index: HashMap<Vec<Dec>, usize> = basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, d)| (d, i))
        .collect();
    let mut rows = Vec::new();
    let mut cols: Vec<Vec<PolyAlpha>> = Vec::new();
    for s in summands.iter().filter(|s| s.fixed == a) {
        for xdec in bim2.space(c, s.through).slots.basis() {
            let x = bim2.basis_element(c, s.through, xdec);
            let img = psi.psi(&x, &s.generator);
            let mut col = vec![PolyAlpha::zero(); basis.len()];
            if let Some(sv) = img.component(c, a) {
                for (k, v) in sv.terms() {
                    col[index[k]] = v.clone();
                }
            }
            cols.push(col);
            rows.push((x, s));
        }
    }
    if cols.len() != basis.len() {
        return None;
    }
    let mat = (0..basis.len())
        .map(|d| cols.iter().map(|col| col[d].clone()).collect())
        .collect();
    Some(TensorBlock { rows, mat, index })
}

impl<'s> TensorBlock<'s> {
    /// Coordinates of a composite-space vector in the tensor basis.
    fn coords(&self, sv: &StateVector) -> Option<Vec<PolyAlpha>> {
        let mut t = vec![PolyAlpha::zero(); self.mat.len()];
        for (k, v) in sv.terms() {
            t[*self.index.get(k)?] = v.clone();
        }
        crate::ring::solve_unimodular(&self.mat, &t)
    }
}

/// Verify that an elementary cup tangle `C` and its reflection induce a
/// biadjoint pair of bimodules. One adjunction has a loop birth as its unit
/// and the saddle closing the two facing turnbacks as its counit; the other
/// runs the same saddle backwards and kills the loop by the counit of the
/// Frobenius algebra. All four triangle identities are checked on the whole
/// basis, transported through the tensor structure maps of the stacked
/// composites.
pub fn biadjointness_report(
    outer: &Algebra,
    inner: &Algebra,
    i: usize,
) -> CheckReport {
    let mut report = CheckReport::new("biadjointness");
    assert_eq!(outer.n(), inner.n() + 1, "cup tangle needs adjacent ranks");
    let c = elementary_cup(outer.n(), i);
    let cbar = c.reflect();
    let vt = cbar.compose(&c).unwrap();
    let w = c.compose(&cbar).unwrap();
    let zn = w.compose(&c).unwrap();
    let zbar = cbar.compose(&w).unwrap();
    let idt = FlatTangle::id(outer.n());

    let bim_c = Bimodule::new(outer, inner, &c).unwrap();
    let bim_cbar = Bimodule::new(inner, outer, &cbar).unwrap();
    let bim_v = Bimodule::new(outer, outer, &vt).unwrap();
    let bim_w = Bimodule::new(inner, inner, &w).unwrap();
    let bim_z = Bimodule::new(outer, inner, &zn).unwrap();
    let bim_zbar = Bimodule::new(inner, outer, &zbar).unwrap();
    let bim_id = Bimodule::new(outer, outer, &idt).unwrap();

    let saddle = SaddleMorphism::new(&bim_v, &bim_id, i, i + 1).unwrap();
    let phi = LoopIdentification::new(&bim_id).unwrap();
    let loops = LoopIdentification::new(&bim_w).unwrap();

    let eta = loops.from_algebra(&inner.unit());
    let eta2 = saddle.apply_reverse(&phi.from_algebra(&outer.unit()));
    let eps = |v: &Element| phi.to_algebra(&saddle.apply(v));
    report.check(!eta.is_zero() && !eta2.is_zero(), || {
        "degenerate adjunction unit".into()
    });

    let psi1 = TensorPsi::new(&bim_c, &bim_w, &bim_z).unwrap();
    let psi2 = TensorPsi::new(&bim_v, &bim_c, &bim_z).unwrap();
    let psi1b = TensorPsi::new(&bim_w, &bim_cbar, &bim_zbar).unwrap();
    let psi2b = TensorPsi::new(&bim_cbar, &bim_v, &bim_zbar).unwrap();
    let sum_c = left_projective_decomposition(&bim_c);
    let sum_w = left_projective_decomposition(&bim_w);
    let sum_v = left_projective_decomposition(&bim_v);
    let sum_cbar = left_projective_decomposition(&bim_cbar);

    let component =
        |x: &Element, b: usize, a: usize| -> StateVector {
            x.component(b, a).cloned().unwrap_or_else(StateVector::zero)
        };

    // Triangles for F(C): the birth rises on the inner side and the saddle
    // closes it off; then the same with the reversed saddle and the loop
    // death.
    for b in 0..outer.matchings().len() {
        for a in 0..inner.matchings().len() {
            let blk2 = tensor_block(&psi2, &sum_c, b, a);
            let blk1 = tensor_block(&psi1, &sum_w, b, a);
            report.check(blk2.is_some() && blk1.is_some(), || {
                format!("tensor basis missing at ({b}, {a})")
            });
            let (blk2, blk1) = match (blk2, blk1) {
                (Some(x), Some(y)) => (x, y),
                _ => continue,
            };
            for dec in bim_c.space(b, a).slots.basis() {
                let x = bim_c.basis_element(b, a, dec);

                let mid = psi1.psi(&x, &eta);
                match blk2.coords(&component(&mid, b, a)) {
                    Some(z) => {
                        let mut got = Element::zero();
                        for (zj, (v, s)) in z.iter().zip(blk2.rows.iter()) {
                            got = got.add(
                                &bim_c.left_act(&eps(v), &s.generator).scale(zj),
                            );
                        }
                        report.check(got == x, || {
                            format!("cup triangle (saddle counit) at ({b}, {a})")
                        });
                    }
                    None => report.check(false, || {
                        format!("no tensor coordinates at ({b}, {a})")
                    }),
                }

                let mid = psi2.psi(&eta2, &x);
                match blk1.coords(&component(&mid, b, a)) {
                    Some(z) => {
                        let mut got = Element::zero();
                        for (zj, (xp, s)) in z.iter().zip(blk1.rows.iter()) {
                            got = got.add(
                                &bim_c
                                    .right_act(xp, &loops.to_algebra(&s.generator))
                                    .scale(zj),
                            );
                        }
                        report.check(got == x, || {
                            format!("cup triangle (loop counit) at ({b}, {a})")
                        });
                    }
                    None => report.check(false, || {
                        format!("no tensor coordinates at ({b}, {a})")
                    }),
                }
            }
        }
    }

    // Triangles for the reflected cap.
    for a1 in 0..inner.matchings().len() {
        for b in 0..outer.matchings().len() {
            let blk2 = tensor_block(&psi2b, &sum_v, a1, b);
            let blk1 = tensor_block(&psi1b, &sum_cbar, a1, b);
            report.check(blk2.is_some() && blk1.is_some(), || {
                format!("tensor basis missing at ({a1}, {b})")
            });
            let (blk2, blk1) = match (blk2, blk1) {
                (Some(x), Some(y)) => (x, y),
                _ => continue,
            };
            for dec in bim_cbar.space(a1, b).slots.basis() {
                let x = bim_cbar.basis_element(a1, b, dec);

                let mid = psi1b.psi(&eta, &x);
                match blk2.coords(&component(&mid, a1, b)) {
                    Some(z) => {
                        let mut got = Element::zero();
                        for (zj, (xp, s)) in z.iter().zip(blk2.rows.iter()) {
                            got = got.add(
                                &bim_cbar
                                    .right_act(xp, &eps(&s.generator))
                                    .scale(zj),
                            );
                        }
                        report.check(got == x, || {
                            format!("cap triangle (saddle counit) at ({a1}, {b})")
                        });
                    }
                    None => report.check(false, || {
                        format!("no tensor coordinates at ({a1}, {b})")
                    }),
                }

                let mid = psi2b.psi(&x, &eta2);
                match blk1.coords(&component(&mid, a1, b)) {
                    Some(z) => {
                        let mut got = Element::zero();
                        for (zj, (wv, s)) in z.iter().zip(blk1.rows.iter()) {
                            got = got.add(
                                &bim_cbar
                                    .left_act(&loops.to_algebra(wv), &s.generator)
                                    .scale(zj),
                            );
                        }
                        report.check(got == x, || {
                            format!("cap triangle (loop counit) at ({a1}, {b})")
                        });
                    }
                    None => report.check(false, || {
                        format!("no tensor coordinates at ({a1}, {b})")
                    }),
                }
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_bimodule_is_the_algebra_for_small_ranks() {
        for n in 0..=2 {
            let alg = Algebra::new(n);
            let report = identity_bimodule_report(&alg);
            assert!(report.ok(), "{}", report);
        }
    }

    #[test]
    fn actions_on_the_twist_bimodule() {
        let alg = Algebra::new(1);
        let bim = Bimodule::new(&alg, &alg, &FlatTangle::tw(1)).unwrap();
        let report = actions_report(&bim);
        assert!(report.ok(), "{}", report);
    }

    #[test]
    fn actions_on_an_elementary_cup() {
        let outer = Algebra::new(1);
        let inner = Algebra::new(0);
        let cup = FlatTangle::new(
            0,
            2,
            0,
            vec![(Pt::T(1), Pt::T(2))],
            0,
        )
        .unwrap();
        let bim = Bimodule::new(&outer, &inner, &cup).unwrap();
        let report = actions_report(&bim);
        assert!(report.ok(), "{}", report);
        // One generator `1` and one `X` per outer matching, shifted by 0.
        assert_eq!(bim.basis().len(), 2 * outer.matchings().len());
    }

    #[test]
    fn free_loops_ride_along() {
        let alg = Algebra::new(1);
        let id_loop = FlatTangle::new(
            2,
            2,
            0,
            vec![(Pt::B(1), Pt::T(1)), (Pt::B(2), Pt::T(2))],
            1,
        )
        .unwrap();
        let bim = Bimodule::new(&alg, &alg, &id_loop).unwrap();
        let report = actions_report(&bim);
        assert!(report.ok(), "{}", report);
        let report = projectivity_report(&bim);
        assert!(report.ok(), "{}", report);
        // The free loop doubles the rank of every space.
        let id = Bimodule::new(&alg, &alg, &FlatTangle::id(1)).unwrap();
        assert_eq!(bim.basis().len(), 2 * id.basis().len());
    }

    #[test]
    fn projectivity_for_small_tangles() {
        let alg1 = Algebra::new(1);
        let alg0 = Algebra::new(0);

        let id = Bimodule::new(&alg1, &alg1, &FlatTangle::id(1)).unwrap();
        assert!(projectivity_report(&id).ok());
        // The identity bimodule is the sum of the P_b, one per matching.
        let summands = left_projective_decomposition(&id);
        assert_eq!(summands.len(), alg1.matchings().len());
        for s in summands.iter() {
            assert_eq!(s.fixed, s.through);
        }

        let tw = Bimodule::new(&alg1, &alg1, &FlatTangle::tw(1)).unwrap();
        assert!(projectivity_report(&tw).ok());

        let cup = FlatTangle::new(0, 2, 0, vec![(Pt::T(1), Pt::T(2))], 0).unwrap();
        let bim = Bimodule::new(&alg1, &alg0, &cup).unwrap();
        let report = projectivity_report(&bim);
        assert!(report.ok(), "{}", report);
        // No closed circles: one left summand, a single shifted projective.
        assert_eq!(left_projective_decomposition(&bim).len(), 1);
        // Over the trivial inner algebra every circle persists: two right
        // summands per outer matching.
        assert_eq!(
            right_projective_decomposition(&bim).len(),
            2 * alg1.matchings().len()
        );
    }

    #[test]
    fn tensor_composition_of_rank_one_twists() {
        let alg = Algebra::new(1);
        for (t1, t2) in [
            (FlatTangle::id(1), FlatTangle::id(1)),
            (FlatTangle::tw(1), FlatTangle::tw_inv(1)),
            (FlatTangle::tw(1), FlatTangle::tw(1)),
        ] {
            let bim1 = Bimodule::new(&alg, &alg, &t1).unwrap();
            let bim2 = Bimodule::new(&alg, &alg, &t2).unwrap();
            let t = t1.compose(&t2).unwrap().normalize();
            let comp = Bimodule::new(&alg, &alg, &t).unwrap();
            let psi = TensorPsi::new(&bim2, &bim1, &comp).unwrap();
            let report = tensor_iso_report(&psi);
            assert!(report.ok(), "{}", report);
            let report = tensor_linearity_report(&psi);
            assert!(report.ok(), "{}", report);
        }
    }

    #[test]
    fn tensor_composition_with_a_cup() {
        let alg1 = Algebra::new(1);
        let alg0 = Algebra::new(0);
        let cup = FlatTangle::new(0, 2, 0, vec![(Pt::T(1), Pt::T(2))], 0).unwrap();
        let bim1 = Bimodule::new(&alg1, &alg0, &cup).unwrap();
        let bim2 = Bimodule::new(&alg1, &alg1, &FlatTangle::tw(1)).unwrap();
        let t = cup.compose(&FlatTangle::tw(1)).unwrap().normalize();
        let comp = Bimodule::new(&alg1, &alg0, &t).unwrap();
        let psi = TensorPsi::new(&bim2, &bim1, &comp).unwrap();
        let report = tensor_iso_report(&psi);
        assert!(report.ok(), "{}", report);
        let report = tensor_linearity_report(&psi);
        assert!(report.ok(), "{}", report);
    }

    #[test]
    fn dehn_twist_invariance_for_small_tangles() {
        let alg1 = Algebra::new(1);
        let alg0 = Algebra::new(0);
        for t in [FlatTangle::id(1), FlatTangle::tw(1)] {
            let bim = Bimodule::new(&alg1, &alg1, &t).unwrap();
            let report = dehn_twist_report(&bim);
            assert!(report.ok(), "{}", report);
        }
        let cup = FlatTangle::new(0, 2, 0, vec![(Pt::T(1), Pt::T(2))], 0).unwrap();
        let bim = Bimodule::new(&alg1, &alg0, &cup).unwrap();
        let report = dehn_twist_report(&bim);
        assert!(report.ok(), "{}", report);
    }

    #[test]
    fn layered_presentation_matches_the_fused_bimodule() {
        let alg = Algebra::new(1);
        let turnback = elementary_cup(1, 1)
            .reflect()
            .compose(&elementary_cup(1, 1))
            .unwrap();
        let layered =
            Bimodule::new_layered(&alg, &alg, &[FlatTangle::id(1), turnback.clone()])
                .unwrap();
        let fused = Bimodule::new(&alg, &alg, &turnback).unwrap();
        assert_eq!(layered.graded_rank(), fused.graded_rank());
        let report = actions_report(&layered);
        assert!(report.ok(), "{}", report);

        // A saddle at the upper layer undoes the turnback.
        let idt = Bimodule::new_layered(&alg, &alg, &[FlatTangle::id(1), FlatTangle::id(1)])
            .unwrap();
        let saddle = SaddleMorphism::new_at(&layered, &idt, 2, 1, 2).unwrap();
        for (b, a, dec) in alg.basis() {
            let h = alg.basis_element(b, a, dec);
            let lhs = saddle.apply(&layered.left_act(&h, &layered_unit(&layered)));
            let rhs = idt.left_act(&h, &saddle.apply(&layered_unit(&layered)));
            assert_eq!(lhs, rhs);
        }
    }

    fn layered_unit(bim: &Bimodule) -> Element {
        let mut x = Element::zero();
        for b in 0..bim.outer().matchings().len() {
            let dec = bim.space(b, b).slots.basis().swap_remove(0);
            x.add_component(b, b, StateVector::basis(dec));
        }
        x
    }

    #[test]
    fn loop_birth_and_death_are_module_maps() {
        let alg = Algebra::new(1);
        let id_loop = FlatTangle::new(
            2,
            2,
            0,
            vec![(Pt::B(1), Pt::T(1)), (Pt::B(2), Pt::T(2))],
            1,
        )
        .unwrap();
        let bim = Bimodule::new(&alg, &alg, &id_loop).unwrap();
        let li = LoopIdentification::new(&bim).unwrap();
        // A newborn loop carries no dot, so it dies silently.
        assert!(li.to_algebra(&li.from_algebra(&alg.unit())).is_zero());
        for (b, a, dec) in bim.basis() {
            let x = bim.basis_element(b, a, dec);
            for (cc, bb, hdec) in alg.basis() {
                if bb != b {
                    continue;
                }
                let h = alg.basis_element(cc, bb, hdec);
                assert_eq!(
                    li.to_algebra(&bim.left_act(&h, &x)),
                    alg.multiply(&h, &li.to_algebra(&x))
                );
                assert_eq!(
                    li.from_algebra(&alg.multiply(&h, &li.to_algebra(&x))),
                    bim.left_act(&h, &li.from_algebra(&li.to_algebra(&x)))
                );
            }
        }
    }

    #[test]
    fn biadjointness_of_the_rank_one_cup() {
        let outer = Algebra::new(1);
        let inner = Algebra::new(0);
        let report = biadjointness_report(&outer, &inner, 1);
        assert!(report.ok(), "{}", report);
    }

    #[test]
    fn closed_essential_circle_in_the_tangle() {
        let outer = Algebra::new(1);
        let inner = Algebra::new(1);
        let t = FlatTangle::new(
            2,
            2,
            1,
            vec![
                (Pt::B(1), Pt::B(2)),
                (Pt::T(1), Pt::T(2)),
                (Pt::L(1), Pt::R(1)),
            ],
            0,
        )
        .unwrap();
        let bim = Bimodule::new(&outer, &inner, &t).unwrap();
        let report = actions_report(&bim);
        assert!(report.ok(), "{}", report);
        let report = projectivity_report(&bim);
        assert!(report.ok(), "{}", report);
        // Every space has exactly one essential circle, from the tangle.
        for b in 0..outer.matchings().len() {
            for a in 0..inner.matchings().len() {
                assert!(bim.space(b, a).slots.num_essential() >= 1);
            }
        }
    }
}
