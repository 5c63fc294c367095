//! The annular arc algebras `H^n`: multiplication by saddle cobordisms,
//! Frobenius structure, symmetries, degree-one generation and quadratic
//! relations.
//!
//! Elements are sums of components indexed by pairs `(b, a)` of crossingless
//! matchings; the `(b, a)` component lives on the circle configuration
//! obtained by closing `a` with the reflection of `b`. Every component
//! carries the global grading shift by `n`.

pub mod generation;
pub mod relations;

use crate::config::{saddle_sequence, Config, Stack, SurgeryOutcome};
use crate::matching::{Matching, SurgeryArc};
use crate::ring::{Bidegree, LaurentQA, PolyAlpha};
use crate::tangle::{FlatTangle, Pt};
use crate::tqft::{apply_step, apply_step_reverse, Dec, Slots, StateVector};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

/// The closure of `a` by the reflection of `b`, with its traced circles.
pub struct PairSpace {
    pub stack: Stack,
    pub config: Config,
    pub slots: Slots,
}

/// A precomputed multiplication cobordism for one `(top, mid, low)` triple.
struct MultPlan {
    /// Circle of `glue(low, mid)` -> circle of the stacked configuration.
    lower_map: Vec<usize>,
    /// Circle of `glue(mid, top)` -> circle of the stacked configuration.
    upper_map: Vec<usize>,
    init_slots: Slots,
    steps: Vec<PlanStep>,
    /// Circle of the fully surgered configuration -> circle of
    /// `glue(low, top)`.
    final_map: Vec<usize>,
}

struct PlanStep {
    outcome: SurgeryOutcome,
    before: Slots,
    after: Slots,
}

pub struct Algebra {
    n: usize,
    matchings: Vec<Matching>,
    spaces: Vec<Vec<PairSpace>>,
    plans: RefCell<HashMap<(usize, usize, usize), Rc<MultPlan>>>,
}

/// An element of `H^n`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Element {
    components: BTreeMap<(usize, usize), StateVector>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, b: usize, a: usize) -> Option<&StateVector> {
        self.components.get(&(b, a))
    }

    pub fn components(&self) -> impl Iterator<Item = (&(usize, usize), &StateVector)> {
        self.components.iter()
    }

    pub fn add_component(&mut self, b: usize, a: usize, sv: StateVector) {
        if sv.is_zero() {
            return;
        }
        let entry = self
            .components
            .entry((b, a))
            .or_insert_with(StateVector::zero);
        *entry = entry.add(&sv);
        if entry.is_zero() {
            self.components.remove(&(b, a));
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (&(b, a), sv) in other.components.iter() {
            out.add_component(b, a, sv.clone());
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (&(b, a), sv) in other.components.iter() {
            out.add_component(b, a, sv.scale(&-PolyAlpha::one()));
        }
        out
    }

    pub fn scale(&self, c: &PolyAlpha) -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in self.components.iter() {
            out.add_component(b, a, sv.scale(c));
        }
        out
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&(b, a), sv) in self.components.iter() {
            if !first {
                f.write_str(" ⊕ ")?;
            }
            first = false;
            write!(f, "({},{}): {}", b, a, sv)?;
        }
        Ok(())
    }
}

/// An element of `H^n ⊗ H^n`, as produced by comultiplication. A term
/// `(b, c, a, left, right)` is `left ⊗ right` with `left` a decoration of
/// the `(b, c)` component and `right` of the `(c, a)` component.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TensorElement {
    terms: BTreeMap<(usize, usize, usize, Vec<Dec>, Vec<Dec>), PolyAlpha>,
}

impl TensorElement {
    pub fn zero() -> Self {
        TensorElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(
        &mut self,
        key: (usize, usize, usize, Vec<Dec>, Vec<Dec>),
        coeff: PolyAlpha,
    ) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(PolyAlpha::zero);
        *entry += &coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(
        &self,
    ) -> impl Iterator<Item = (&(usize, usize, usize, Vec<Dec>, Vec<Dec>), &PolyAlpha)> {
        self.terms.iter()
    }
}

/// Outcome of one of the verification suites.
#[derive(Debug, Default)]
pub struct CheckReport {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            ..CheckReport::default()
        }
    }

    pub fn check(&mut self, ok: bool, desc: impl Fn() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(desc());
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} checks passed",
            self.name,
            self.checks - self.failures.len(),
            self.checks
        )?;
        for fail in self.failures.iter() {
            write!(f, "\n  FAIL {}", fail)?;
        }
        Ok(())
    }
}

impl Algebra {
    pub fn new(n: usize) -> Algebra {
        let matchings = Matching::enumerate(n);
        let spaces = matchings
            .iter()
            .map(|b| {
                matchings
                    .iter()
                    .map(|a| {
                        let stack = Stack::new(vec![
                            FlatTangle::cup(a),
                            FlatTangle::cap(b),
                        ])
                        .unwrap();
                        let config = stack.trace();
                        assert!(config.free.is_empty());
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
        Algebra {
            n,
            matchings,
            spaces,
            plans: RefCell::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> i64 {
        self.n as i64
    }

    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn idx(&self, m: &Matching) -> usize {
        self.matchings
            .iter()
            .position(|x| x == m)
            .expect("matching not in the basis")
    }

    pub fn space(&self, b: usize, a: usize) -> &PairSpace {
        &self.spaces[b][a]
    }

    /// Circle of the `(b, a)` configuration through boundary point `k`.
    pub fn circle_through(&self, b: usize, a: usize, k: usize) -> usize {
        let space = &self.spaces[b][a];
        let (arc, _) = space.stack.layers[0].partner(Pt::T(k));
        space.config.circle_of_arc(0, arc)
    }

    /// Boundary points lying on each circle of the `(b, a)` configuration.
    pub fn circle_points(&self, b: usize, a: usize) -> Vec<Vec<usize>> {
        let space = &self.spaces[b][a];
        let mut points = vec![Vec::new(); space.config.circles.len()];
        for k in 1..=2 * self.n {
            points[self.circle_through(b, a, k)].push(k);
        }
        points
    }

    /// All standard basis elements, as `(b, a, decoration)` triples.
    pub fn basis(&self) -> Vec<(usize, usize, Vec<Dec>)> {
        let mut out = Vec::new();
        for b in 0..self.matchings.len() {
            for a in 0..self.matchings.len() {
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

    /// Common bidegree of all terms, if the element is homogeneous.
    pub fn homogeneous_bidegree(&self, x: &Element) -> Option<Bidegree> {
        let mut deg = None;
        for (&(b, a), sv) in x.components.iter() {
            let d = sv.homogeneous_bidegree(&self.spaces[b][a].slots, self.shift())?;
            match deg {
                None => deg = Some(d),
                Some(prev) if prev == d => {}
                _ => return None,
            }
        }
        deg
    }

    pub fn idempotent(&self, a: usize) -> Element {
        let k = self.spaces[a][a].slots.len();
        self.basis_element(a, a, vec![Dec::One; k])
    }

    pub fn unit(&self) -> Element {
        let mut u = Element::zero();
        for a in 0..self.matchings.len() {
            u = u.add(&self.idempotent(a));
        }
        u
    }

    /// Diagonal generator with a dot on the circle through component `e`
    /// of `a`.
    pub fn x_gen(&self, a: usize, e: usize) -> Element {
        let p = self.matchings[a].pairs()[e].0;
        let circle = self.circle_through(a, a, p);
        let k = self.spaces[a][a].slots.len();
        let mut dec = vec![Dec::One; k];
        dec[circle] = Dec::Dot;
        self.basis_element(a, a, dec)
    }

    /// Degree-one flip generator along the outermost component `e` of `a`,
    /// with the essential circle labelled `label`. Returns the element and
    /// the index of the flipped matching.
    pub fn y_flip(&self, a: usize, e: usize, label: usize) -> (Element, usize) {
        let b = self.idx(&self.matchings[a].flip(e));
        let slots = &self.spaces[b][a].slots;
        assert_eq!(slots.num_essential(), 1, "flip closure has one essential circle");
        let dec: Vec<Dec> = slots
            .essential
            .iter()
            .map(|&ess| if ess { Dec::e(label) } else { Dec::One })
            .collect();
        (self.basis_element(b, a, dec), b)
    }

    /// Degree-one swap generator along the surgery arc `r` of `a`.
    pub fn y_swap(&self, a: usize, r: &SurgeryArc) -> (Element, usize) {
        let b = self.idx(&self.matchings[a].surgery(r));
        let slots = &self.spaces[b][a].slots;
        assert_eq!(slots.num_essential(), 0, "swap closure is contractible");
        assert_eq!(slots.len() + 1, self.n, "swap closure has n-1 circles");
        let dec = vec![Dec::One; slots.len()];
        (self.basis_element(b, a, dec), b)
    }

    fn plan(&self, top: usize, mid: usize, low: usize) -> Rc<MultPlan> {
        if let Some(p) = self.plans.borrow().get(&(top, mid, low)) {
            return Rc::clone(p);
        }
        let plan = Rc::new(self.make_plan(top, mid, low));
        self.plans
            .borrow_mut()
            .insert((top, mid, low), Rc::clone(&plan));
        plan
    }

    fn make_plan(&self, top: usize, mid: usize, low: usize) -> MultPlan {
        let stack = Stack::new(vec![
            FlatTangle::cup(&self.matchings[low]),
            FlatTangle::cap(&self.matchings[mid]),
            FlatTangle::cup(&self.matchings[mid]),
            FlatTangle::cap(&self.matchings[top]),
        ])
        .unwrap();
        let config0 = stack.trace();
        assert!(config0.free.is_empty());
        let init_slots = Slots::from_config(&config0);

        let first_arc = |c: &crate::config::Circle, layer: usize| -> usize {
            c.items
                .iter()
                .find_map(|it| match it {
                    crate::config::Item::Arc { layer: l, arc, .. } if *l == layer => {
                        Some(*arc)
                    }
                    _ => None,
                })
                .expect("circle misses the expected layer")
        };
        let lower_space = &self.spaces[mid][low];
        let upper_space = &self.spaces[top][mid];
        let lower_map: Vec<usize> = lower_space
            .config
            .circles
            .iter()
            .map(|c| config0.circle_of_arc(0, first_arc(c, 0)))
            .collect();
        let upper_map: Vec<usize> = upper_space
            .config
            .circles
            .iter()
            .map(|c| config0.circle_of_arc(2, first_arc(c, 0)))
            .collect();
        {
            let mut seen: Vec<usize> = lower_map.iter().chain(upper_map.iter()).copied().collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), config0.circles.len(), "halves cover the stack");
        }

        let mut steps = Vec::new();
        let mut config = config0;
        let mut slots = init_slots.clone();
        for band in saddle_sequence(&self.matchings[mid], 1, 2) {
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

        let target = &self.spaces[top][low];
        let final_map: Vec<usize> = config
            .circles
            .iter()
            .map(|c| target.config.circle_of_arc(0, first_arc(c, 0)))
            .collect();
        {
            let mut seen = final_map.clone();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), target.config.circles.len(), "final bijection");
            for (f, &t) in final_map.iter().enumerate() {
                assert_eq!(
                    config.circles[f].is_essential(),
                    target.config.circles[t].is_essential()
                );
                assert_eq!(slots.rank[f], target.slots.rank[t], "radial order preserved");
            }
        }

        MultPlan {
            lower_map,
            upper_map,
            init_slots,
            steps,
            final_map,
        }
    }

    fn product_component(
        &self,
        top: usize,
        mid: usize,
        low: usize,
        upper: &StateVector,
        lower: &StateVector,
    ) -> StateVector {
        let plan = self.plan(top, mid, low);
        let mut v = StateVector::zero();
        for (ku, cu) in upper.terms() {
            for (kl, cl) in lower.terms() {
                let mut key = vec![Dec::One; plan.init_slots.len()];
                for (i, &j) in plan.lower_map.iter().enumerate() {
                    key[j] = kl[i];
                }
                for (i, &j) in plan.upper_map.iter().enumerate() {
                    key[j] = ku[i];
                }
                v.add_term(key, cu * cl);
            }
        }
        for step in plan.steps.iter() {
            v = apply_step(&v, &step.outcome, &step.before, &step.after);
        }
        let target_len = self.spaces[top][low].slots.len();
        let mut out = StateVector::zero();
        for (k, c) in v.terms() {
            let mut key = vec![Dec::One; target_len];
            for (f, &t) in plan.final_map.iter().enumerate() {
                key[t] = k[f];
            }
            out.add_term(key, c.clone());
        }
        out
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Element {
        let mut out = Element::zero();
        for (&(c, b1), sx) in x.components.iter() {
            for (&(b2, a), sy) in y.components.iter() {
                if b1 != b2 {
                    continue;
                }
                let sv = self.product_component(c, b1, a, sx, sy);
                out.add_component(c, a, sv);
            }
        }
        out
    }

    /// The Frobenius trace: the counit on diagonal components, zero
    /// elsewhere.
    pub fn trace(&self, x: &Element) -> PolyAlpha {
        let mut total = PolyAlpha::zero();
        for (&(b, a), sv) in x.components.iter() {
            if b == a {
                total += &sv.trace(&self.spaces[b][a].slots);
            }
        }
        total
    }

    /// Comultiplication: the reversed multiplication cobordisms
    /// `⟨b̄a⟩ → ⟨b̄c⟩ ⊗ ⟨c̄a⟩` summed over all middle matchings `c`.
    pub fn comultiply(&self, x: &Element) -> TensorElement {
        let mut out = TensorElement::zero();
        for (&(b, a), sv) in x.components.iter() {
            for c in 0..self.matchings.len() {
                let plan = self.plan(b, c, a);
                // Transport onto the surgered stacked configuration, then
                // replay the saddles backwards.
                let mut v = StateVector::zero();
                for (k, coeff) in sv.terms() {
                    let key: Vec<Dec> =
                        plan.final_map.iter().map(|&t| k[t]).collect();
                    v.add_term(key, coeff.clone());
                }
                for step in plan.steps.iter().rev() {
                    v = apply_step_reverse(&v, &step.outcome, &step.before, &step.after);
                }
                for (k, coeff) in v.terms() {
                    let right: Vec<Dec> =
                        plan.lower_map.iter().map(|&j| k[j]).collect();
                    let left: Vec<Dec> =
                        plan.upper_map.iter().map(|&j| k[j]).collect();
                    out.add_term((b, c, a, left, right), coeff.clone());
                }
            }
        }
        out
    }

    /// Contract the right tensor factor with the trace.
    pub fn counit_right(&self, t: &TensorElement) -> Element {
        let mut out = Element::zero();
        for ((b, c, a, left, right), coeff) in t.terms() {
            if c != a {
                continue;
            }
            let mut sv = StateVector::zero();
            sv.add_term(right.clone(), coeff.clone());
            let val = sv.trace(&self.spaces[*c][*a].slots);
            let mut res = StateVector::zero();
            res.add_term(left.clone(), val);
            out.add_component(*b, *c, res);
        }
        out
    }

    /// Contract the left tensor factor with the trace.
    pub fn counit_left(&self, t: &TensorElement) -> Element {
        let mut out = Element::zero();
        for ((b, c, a, left, right), coeff) in t.terms() {
            if b != c {
                continue;
            }
            let mut sv = StateVector::zero();
            sv.add_term(left.clone(), coeff.clone());
            let val = sv.trace(&self.spaces[*b][*c].slots);
            let mut res = StateVector::zero();
            res.add_term(right.clone(), val);
            out.add_component(*c, *a, res);
        }
        out
    }

    /// Multiply the left tensor factor on the left by `x`.
    pub fn tensor_left_mul(&self, x: &Element, t: &TensorElement) -> TensorElement {
        let mut out = TensorElement::zero();
        for ((b, c, a, left, right), coeff) in t.terms() {
            let factor = self.basis_element(*b, *c, left.clone());
            let prod = self.multiply(x, &factor);
            for (&(b2, c2), sv) in prod.components.iter() {
                assert_eq!(c2, *c);
                for (k, v) in sv.terms() {
                    out.add_term(
                        (b2, *c, *a, k.clone(), right.clone()),
                        v * coeff,
                    );
                }
            }
        }
        out
    }

    /// Multiply the right tensor factor on the right by `y`.
    pub fn tensor_right_mul(&self, t: &TensorElement, y: &Element) -> TensorElement {
        let mut out = TensorElement::zero();
        for ((b, c, a, left, right), coeff) in t.terms() {
            let factor = self.basis_element(*c, *a, right.clone());
            let prod = self.multiply(&factor, y);
            for (&(c2, a2), sv) in prod.components.iter() {
                assert_eq!(c2, *c);
                for (k, v) in sv.terms() {
                    out.add_term(
                        (*b, *c, a2, left.clone(), k.clone()),
                        v * coeff,
                    );
                }
            }
        }
        out
    }

    /// The label-swapping automorphism: `e1 ↔ e2` on every essential circle
    /// together with `α1 ↔ α2` on coefficients.
    pub fn tau_n(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in x.components.iter() {
            out.add_component(b, a, sv.tau());
        }
        out
    }

    fn relabel(
        &self,
        x: &Element,
        f: impl Fn(&Matching) -> Matching,
        point_map: impl Fn(usize) -> usize,
        swap: bool,
    ) -> Element {
        let mut out = Element::zero();
        for (&(b, a), sv) in x.components.iter() {
            let b2 = self.idx(&f(&self.matchings[b]));
            let a2 = self.idx(&f(&self.matchings[a]));
            let (tb, ta) = if swap { (a2, b2) } else { (b2, a2) };
            let src = &self.spaces[b][a];
            let dst = &self.spaces[tb][ta];
            let mut perm = vec![None; src.config.circles.len()];
            for k in 1..=2 * self.n {
                let i = self.circle_through(b, a, k);
                let j = self.circle_through(tb, ta, point_map(k));
                match perm[i] {
                    None => perm[i] = Some(j),
                    Some(prev) => assert_eq!(prev, j, "relabelling is circle-wise"),
                }
            }
            let perm: Vec<usize> = perm.into_iter().map(Option::unwrap).collect();
            for (i, &j) in perm.iter().enumerate() {
                assert_eq!(
                    src.config.circles[i].is_essential(),
                    dst.config.circles[j].is_essential()
                );
            }
            let mut mapped = StateVector::zero();
            for (k, coeff) in sv.terms() {
                let mut key = vec![Dec::One; dst.slots.len()];
                for (i, &j) in perm.iter().enumerate() {
                    key[j] = k[i];
                }
                mapped.add_term(key, coeff.clone());
            }
            out.add_component(tb, ta, mapped);
        }
        out
    }

    /// Rotation by one marked point counterclockwise.
    pub fn rotate(&self, x: &Element) -> Element {
        let n = self.n;
        self.relabel(
            x,
            |m| rotate_matching(m),
            |k| k % (2 * n) + 1,
            false,
        )
    }

    /// Reflection through an axis avoiding the marked points.
    pub fn reflect(&self, x: &Element) -> Element {
        let n = self.n;
        self.relabel(
            x,
            |m| reflect_matching(m),
            |k| 2 * n + 1 - k,
            false,
        )
    }

    /// The anti-isomorphism onto the opposite algebra: `(b, a) ↦ (a, b)`.
    pub fn op(&self, x: &Element) -> Element {
        self.relabel(x, |m| m.clone(), |k| k, true)
    }

    /// Total graded rank `Σ_{a,b} q^n · rk⟨b̄a⟩`.
    pub fn graded_rank(&self) -> LaurentQA {
        let mut total = LaurentQA::zero();
        for row in self.spaces.iter() {
            for space in row.iter() {
                total += &space.slots.graded_rank(self.shift());
            }
        }
        total
    }
}

/// Rotate a matching one marked point counterclockwise.
pub fn rotate_matching(m: &Matching) -> Matching {
    let n = m.n();
    if n == 0 {
        return m.clone();
    }
    let rot = |p: usize| p % (2 * n) + 1;
    let pairs = m.pairs().iter().map(|&(i, j)| (rot(i), rot(j))).collect();
    Matching::new(n, pairs, (m.puncture_face() + 1) % (2 * n)).unwrap()
}

/// Reflect a matching through the axis between points `2n` and `1`.
pub fn reflect_matching(m: &Matching) -> Matching {
    let n = m.n();
    if n == 0 {
        return m.clone();
    }
    let refl = |p: usize| 2 * n + 1 - p;
    let pairs = m.pairs().iter().map(|&(i, j)| (refl(i), refl(j))).collect();
    Matching::new(n, pairs, (2 * n - m.puncture_face()) % (2 * n)).unwrap()
}

/// Verify the listed symmetries of `H^n`.
pub fn symmetries_report(alg: &Algebra) -> CheckReport {
    let mut report = CheckReport::new("symmetries");
    let basis = alg.basis();
    let elems: Vec<Element> = basis
        .iter()
        .map(|(b, a, dec)| alg.basis_element(*b, *a, dec.clone()))
        .collect();

    // Rotation has order 2n on the algebra.
    if alg.n() > 0 {
        let order = 2 * alg.n();
        for x in elems.iter() {
            let mut y = x.clone();
            let mut first_return = None;
            for k in 1..=order {
                y = alg.rotate(&y);
                if first_return.is_none() && y == *x {
                    first_return = Some(k);
                }
            }
            report.check(y == *x, || "rotation^2n is not the identity".into());
            if let Some(k) = first_return {
                report.check(order % k == 0, || {
                    format!("rotation orbit length {} does not divide {}", k, order)
                });
            }
        }
        // Some element realizes the full order.
        let full = elems.iter().any(|x| {
            let mut y = x.clone();
            for _ in 1..order {
                y = alg.rotate(&y);
                if y == *x {
                    return false;
                }
            }
            true
        });
        report.check(full, || "no basis element has a full rotation orbit".into());
    }

    // Reflection is an involution; tau_n is an involution.
    for x in elems.iter() {
        report.check(alg.reflect(&alg.reflect(x)) == *x, || {
            "reflection is not an involution".into()
        });
        report.check(alg.tau_n(&alg.tau_n(x)) == *x, || {
            "tau_n is not an involution".into()
        });
        report.check(alg.op(&alg.op(x)) == *x, || "op² ≠ id".into());
    }

    // Multiplicativity on all composable basis pairs.
    for x in elems.iter() {
        for y in elems.iter() {
            let xy = alg.multiply(x, y);
            report.check(
                alg.rotate(&xy) == alg.multiply(&alg.rotate(x), &alg.rotate(y)),
                || "rotation is not an algebra map".into(),
            );
            report.check(
                alg.reflect(&xy) == alg.multiply(&alg.reflect(x), &alg.reflect(y)),
                || "reflection is not an algebra map".into(),
            );
            report.check(
                alg.tau_n(&xy) == alg.multiply(&alg.tau_n(x), &alg.tau_n(y)),
                || "tau_n is not an algebra map".into(),
            );
            report.check(
                alg.op(&xy) == alg.multiply(&alg.op(y), &alg.op(x)),
                || "op is not an anti-homomorphism".into(),
            );
        }
    }

    // tau_n intertwines the coefficient involution.
    let c = PolyAlpha::alpha(1);
    for x in elems.iter().take(8) {
        report.check(
            alg.tau_n(&x.scale(&c)) == alg.tau_n(x).scale(&c.tau()),
            || "tau_n does not intertwine tau on coefficients".into(),
        );
    }

    // Dihedral relation: reflect ∘ rotate ∘ reflect = rotate⁻¹.
    if alg.n() > 0 {
        for x in elems.iter() {
            let lhs = alg.reflect(&alg.rotate(&alg.reflect(x)));
            let mut rhs = x.clone();
            for _ in 0..2 * alg.n() - 1 {
                rhs = alg.rotate(&rhs);
            }
            report.check(lhs == rhs, || "dihedral relation fails".into());
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn a1() -> PolyAlpha {
        PolyAlpha::alpha(1)
    }

    fn a2() -> PolyAlpha {
        PolyAlpha::alpha(2)
    }

    #[test]
    fn rank_zero_algebra_is_the_ground_ring() {
        let alg = Algebra::new(0);
        assert_eq!(alg.basis().len(), 1);
        let u = alg.unit();
        assert_eq!(alg.multiply(&u, &u), u);
        assert_eq!(alg.trace(&u), PolyAlpha::one());
    }

    #[test]
    fn rank_one_algebra_has_rank_eight() {
        let alg = Algebra::new(1);
        assert_eq!(alg.basis().len(), 8);
        // Graded rank: two diagonal pieces q(q + q^-1), two essential pieces
        // q(a + a^-1).
        let expect = &(&LaurentQA::bracket2() + &LaurentQA::essential_rank())
            * &LaurentQA::monomial(1, 0, BigInt::from(2));
        assert_eq!(alg.graded_rank(), expect);
    }

    #[test]
    fn idempotents_are_orthogonal() {
        for n in 1..=2 {
            let alg = Algebra::new(n);
            let m = alg.matchings().len();
            for a in 0..m {
                for b in 0..m {
                    let ea = alg.idempotent(a);
                    let eb = alg.idempotent(b);
                    let prod = alg.multiply(&ea, &eb);
                    if a == b {
                        assert_eq!(prod, ea);
                    } else {
                        assert!(prod.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn unit_is_neutral() {
        for n in 1..=2 {
            let alg = Algebra::new(n);
            let u = alg.unit();
            for (b, a, dec) in alg.basis() {
                let x = alg.basis_element(b, a, dec);
                assert_eq!(alg.multiply(&u, &x), x);
                assert_eq!(alg.multiply(&x, &u), x);
            }
        }
    }

    #[test]
    fn rank_one_multiplication_table() {
        let alg = Algebra::new(1);
        // Matching 0 has the puncture outside the arc; call it r. Matching 1
        // is s.
        let r = 0;
        let s = 1;
        let one_r = alg.idempotent(r);
        let x_r = alg.x_gen(r, 0);
        let x_s = alg.x_gen(s, 0);
        let y1_rs = alg.basis_element(r, s, vec![Dec::E1]);
        let y2_rs = alg.basis_element(r, s, vec![Dec::E2]);
        let y1_sr = alg.basis_element(s, r, vec![Dec::E1]);
        let y2_sr = alg.basis_element(s, r, vec![Dec::E2]);

        // x_r · x_r = (α1 + α2) x_r − α1 α2 1_r.
        assert_eq!(
            alg.multiply(&x_r, &x_r),
            x_r.scale(&(a1() + a2()))
                .sub(&one_r.scale(&(a1() * a2())))
        );
        // x acts on y^i by α_{τ(i)} on either side.
        assert_eq!(alg.multiply(&x_r, &y1_rs), y1_rs.scale(&a2()));
        assert_eq!(alg.multiply(&y1_rs, &x_s), y1_rs.scale(&a2()));
        assert_eq!(alg.multiply(&x_r, &y2_rs), y2_rs.scale(&a1()));
        // y^i_{s,r} · y^i_{r,s} = x_s − α_i 1_s.
        assert_eq!(
            alg.multiply(&y1_sr, &y1_rs),
            x_s.sub(&alg.idempotent(s).scale(&a1()))
        );
        assert_eq!(
            alg.multiply(&y2_sr, &y2_rs),
            x_s.sub(&alg.idempotent(s).scale(&a2()))
        );
        // Mixed labels vanish.
        assert!(alg.multiply(&y1_sr, &y2_rs).is_zero());
        assert!(alg.multiply(&y2_sr, &y1_rs).is_zero());
    }

    #[test]
    fn basis_degrees_are_nonnegative_and_products_additive() {
        for n in 1..=2 {
            let alg = Algebra::new(n);
            let basis = alg.basis();
            for (b, a, dec) in basis.iter() {
                let deg = alg.bidegree(*b, *a, dec);
                assert!(deg.qdeg >= 0, "qdeg must be non-negative");
            }
            for (c, b1, dx) in basis.iter() {
                for (b2, a, dy) in basis.iter() {
                    if b1 != b2 {
                        continue;
                    }
                    let x = alg.basis_element(*c, *b1, dx.clone());
                    let y = alg.basis_element(*b2, *a, dy.clone());
                    let xy = alg.multiply(&x, &y);
                    if xy.is_zero() {
                        continue;
                    }
                    let dgx = alg.bidegree(*c, *b1, dx);
                    let dgy = alg.bidegree(*b2, *a, dy);
                    let dgxy = alg.homogeneous_bidegree(&xy).expect("homogeneous");
                    assert_eq!(dgxy.qdeg, dgx.qdeg + dgy.qdeg, "qdeg additive");
                    // adeg(xy) = adeg(y) + (−1)^{w(y)} adeg(x), where w(y) is
                    // the number of essential circles of y's configuration.
                    let w = alg.space(*b2, *a).slots.num_essential() as u32;
                    let sign = if w % 2 == 0 { 1 } else { -1 };
                    assert_eq!(dgxy.adeg, dgy.adeg + sign * dgx.adeg, "adeg rule");
                }
            }
        }
    }

    #[test]
    fn trace_values_and_symmetry() {
        let alg = Algebra::new(1);
        assert_eq!(alg.trace(&alg.idempotent(0)), PolyAlpha::zero());
        assert_eq!(alg.trace(&alg.x_gen(0, 0)), PolyAlpha::one());
        let basis = alg.basis();
        for (b, a, dx) in basis.iter() {
            for (b2, a2, dy) in basis.iter() {
                let x = alg.basis_element(*b, *a, dx.clone());
                let y = alg.basis_element(*b2, *a2, dy.clone());
                assert_eq!(
                    alg.trace(&alg.multiply(&x, &y)),
                    alg.trace(&alg.multiply(&y, &x)),
                    "trace symmetry"
                );
            }
        }
    }

    #[test]
    fn counit_laws_for_comultiplication() {
        for n in 1..=2 {
            let alg = Algebra::new(n);
            for (b, a, dec) in alg.basis() {
                let x = alg.basis_element(b, a, dec);
                let dx = alg.comultiply(&x);
                assert_eq!(alg.counit_right(&dx), x, "(id ⊗ ε)Δ = id");
                assert_eq!(alg.counit_left(&dx), x, "(ε ⊗ id)Δ = id");
            }
        }
    }

    #[test]
    fn comultiplication_is_a_bimodule_map() {
        let alg = Algebra::new(1);
        let basis = alg.basis();
        for (b, a, dx) in basis.iter() {
            for (b2, a2, dy) in basis.iter() {
                if a != b2 {
                    continue;
                }
                let x = alg.basis_element(*b, *a, dx.clone());
                let y = alg.basis_element(*b2, *a2, dy.clone());
                let dxy = alg.comultiply(&alg.multiply(&x, &y));
                assert_eq!(
                    dxy,
                    alg.tensor_left_mul(&x, &alg.comultiply(&y)),
                    "Δ(xy) = (x ⊗ 1)Δ(y)"
                );
                assert_eq!(
                    dxy,
                    alg.tensor_right_mul(&alg.comultiply(&x), &y),
                    "Δ(xy) = Δ(x)(1 ⊗ y)"
                );
            }
        }
    }

    #[test]
    fn gram_matrix_is_unimodular_for_rank_one() {
        let alg = Algebra::new(1);
        let basis = alg.basis();
        let k = basis.len();
        let mut gram = vec![vec![PolyAlpha::zero(); k]; k];
        for (i, (b, a, dx)) in basis.iter().enumerate() {
            for (j, (b2, a2, dy)) in basis.iter().enumerate() {
                let x = alg.basis_element(*b, *a, dx.clone());
                let y = alg.basis_element(*b2, *a2, dy.clone());
                gram[i][j] = alg.trace(&alg.multiply(&x, &y));
            }
        }
        let det = determinant(&gram);
        assert_eq!(det.num_terms(), 1, "Gram determinant is a monomial");
        let (_, coeff) = det.terms().next().unwrap();
        assert!(
            *coeff == BigInt::from(1) || *coeff == BigInt::from(-1),
            "Gram determinant is a unit times a monomial"
        );
    }

    /// Determinant by expansion over column subsets (no division needed).
    fn determinant(m: &[Vec<PolyAlpha>]) -> PolyAlpha {
        fn go(
            m: &[Vec<PolyAlpha>],
            used: u32,
            row: usize,
            memo: &mut HashMap<u32, PolyAlpha>,
        ) -> PolyAlpha {
            if row == m.len() {
                return PolyAlpha::one();
            }
            if let Some(v) = memo.get(&used) {
                return v.clone();
            }
            let mut total = PolyAlpha::zero();
            let mut sign = 1i64;
            for col in 0..m.len() {
                if used & (1 << col) != 0 {
                    continue;
                }
                if !m[row][col].is_zero() {
                    let sub = go(m, used | (1 << col), row + 1, memo);
                    let term = &m[row][col] * &sub;
                    total += &(term * PolyAlpha::constant(sign));
                }
                sign = -sign;
            }
            memo.insert(used, total.clone());
            total
        }
        go(m, 0, 0, &mut HashMap::new())
    }

    #[test]
    fn symmetry_suite_passes_for_small_ranks() {
        for n in 0..=1 {
            let alg = Algebra::new(n);
            let report = symmetries_report(&alg);
            assert!(report.ok(), "{}", report);
        }
    }

    #[test]
    fn associativity_rank_one() {
        let alg = Algebra::new(1);
        let basis = alg.basis();
        for (c, b1, dx) in basis.iter() {
            for (b2, a1, dy) in basis.iter() {
                if b1 != b2 {
                    continue;
                }
                for (a2, d, dz) in basis.iter() {
                    if a1 != a2 {
                        continue;
                    }
                    let x = alg.basis_element(*c, *b1, dx.clone());
                    let y = alg.basis_element(*b2, *a1, dy.clone());
                    let z = alg.basis_element(*a2, *d, dz.clone());
                    assert_eq!(
                        alg.multiply(&alg.multiply(&x, &y), &z),
                        alg.multiply(&x, &alg.multiply(&y, &z))
                    );
                }
            }
        }
    }
}
