//! Closed configurations of circles obtained by stacking flat tangles, and
//! band surgery on them.
//!
//! A [`Stack`] is a list of flat tangles composed radially, innermost first,
//! with no free boundary. Tracing it yields a [`Config`]: circles recorded as
//! cyclic sequences of directed arc traversals and seam crossings. Crossings
//! keep their `(layer, height)` position along the seam, which orders the
//! essential circles radially; that order is what the anchored grading reads.

use crate::tangle::{FlatTangle, Pt};
use std::fmt;

/// One step of a circle traversal.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Item {
    /// Square arc `arc` of `layer`, traversed from its second endpoint when
    /// `rev` is set.
    Arc { layer: usize, arc: usize, rev: bool },
    /// Seam crossing at `(layer, height)`; `dir = 1` for a counterclockwise
    /// passage (leaving through the right copy of the seam).
    Cross { layer: usize, height: usize, dir: i8 },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Circle {
    pub items: Vec<Item>,
}

impl Circle {
    pub fn winding(&self) -> i64 {
        self.items
            .iter()
            .map(|it| match it {
                Item::Cross { dir, .. } => *dir as i64,
                _ => 0,
            })
            .sum()
    }

    pub fn is_essential(&self) -> bool {
        self.winding() != 0
    }

    /// Seam crossing positions, sorted from the inner boundary outwards.
    pub fn crossing_keys(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<(usize, usize)> = self
            .items
            .iter()
            .filter_map(|it| match it {
                Item::Cross { layer, height, .. } => Some((*layer, *height)),
                _ => None,
            })
            .collect();
        keys.sort();
        keys
    }

    fn reversed(&self) -> Circle {
        let items = self
            .items
            .iter()
            .rev()
            .map(|it| match *it {
                Item::Arc { layer, arc, rev } => Item::Arc {
                    layer,
                    arc,
                    rev: !rev,
                },
                Item::Cross { layer, height, dir } => Item::Cross {
                    layer,
                    height,
                    dir: -dir,
                },
            })
            .collect();
        Circle { items }
    }
}

/// A closed stacked diagram.
#[derive(Clone, Debug)]
pub struct Stack {
    pub layers: Vec<FlatTangle>,
}

impl Stack {
    pub fn new(layers: Vec<FlatTangle>) -> Result<Self, String> {
        if layers.is_empty() {
            return Err("empty stack".into());
        }
        if layers[0].bottom() != 0 {
            return Err("stack must be closed at the bottom".into());
        }
        if layers.last().unwrap().top() != 0 {
            return Err("stack must be closed at the top".into());
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].top() != pair[1].bottom() {
                return Err(format!(
                    "layers {} and {} do not match: {} vs {}",
                    i,
                    i + 1,
                    pair[0].top(),
                    pair[1].bottom()
                ));
            }
        }
        Ok(Stack { layers })
    }

    /// Trace all circles. Circle order is deterministic: by the smallest
    /// `(layer, arc)` they traverse.
    pub fn trace(&self) -> Config {
        let mut visited: Vec<Vec<bool>> = self
            .layers
            .iter()
            .map(|t| vec![false; t.arcs().len()])
            .collect();
        let mut circles = Vec::new();
        for l0 in 0..self.layers.len() {
            for a0 in 0..self.layers[l0].arcs().len() {
                if visited[l0][a0] {
                    continue;
                }
                let start_entry = self.layers[l0].arcs()[a0].0;
                let mut items = Vec::new();
                let mut layer = l0;
                let mut entry = start_entry;
                loop {
                    let (arc, exit) = self.layers[layer].partner(entry);
                    visited[layer][arc] = true;
                    items.push(Item::Arc {
                        layer,
                        arc,
                        rev: self.layers[layer].arcs()[arc].1 == entry,
                    });
                    let (next_layer, next_entry) = match exit {
                        Pt::T(j) => (layer + 1, Pt::B(j)),
                        Pt::B(j) => (layer - 1, Pt::T(j)),
                        Pt::R(s) => {
                            items.push(Item::Cross {
                                layer,
                                height: s,
                                dir: 1,
                            });
                            (layer, Pt::L(s))
                        }
                        Pt::L(s) => {
                            items.push(Item::Cross {
                                layer,
                                height: s,
                                dir: -1,
                            });
                            (layer, Pt::R(s))
                        }
                    };
                    layer = next_layer;
                    entry = next_entry;
                    if layer == l0 && entry == start_entry {
                        break;
                    }
                }
                circles.push(Circle { items });
            }
        }
        let free = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(l, t)| std::iter::repeat(l).take(t.free_loops()))
            .collect();
        let config = Config { circles, free };
        config.check();
        config
    }

    /// The traversal of the single component of `layer` entered at `entry`,
    /// staying inside that layer, with its other interface endpoint.
    fn layer_component(&self, layer: usize, entry: Pt) -> (Vec<Item>, Pt) {
        let t = &self.layers[layer];
        let mut items = Vec::new();
        let mut at = entry;
        loop {
            let (arc, exit) = t.partner(at);
            items.push(Item::Arc {
                layer,
                arc,
                rev: t.arcs()[arc].1 == at,
            });
            at = match exit {
                Pt::R(s) => {
                    items.push(Item::Cross {
                        layer,
                        height: s,
                        dir: 1,
                    });
                    Pt::L(s)
                }
                Pt::L(s) => {
                    items.push(Item::Cross {
                        layer,
                        height: s,
                        dir: -1,
                    });
                    Pt::R(s)
                }
                other => return (items, other),
            };
        }
    }
}

/// A traced closed configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub circles: Vec<Circle>,
    /// Layers of the seam-avoiding contractible loops.
    pub free: Vec<usize>,
}

/// A band joining the layer-`lower` component with inner endpoints `B(p)`,
/// `B(q)` to the layer-`upper` component with outer endpoints `T(p)`, `T(q)`.
/// Surgery along it realizes one saddle of a multiplication cobordism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Band {
    pub lower: usize,
    pub upper: usize,
    pub p: usize,
    pub q: usize,
}

/// How a surgery changed the circle list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Merge { from: (usize, usize), to: usize },
    Split { from: usize, to: (usize, usize) },
}

#[derive(Clone, Debug)]
pub struct SurgeryOutcome {
    pub config: Config,
    pub step: Step,
    /// New index of each untouched old circle (`None` for the consumed ones).
    pub moved: Vec<Option<usize>>,
}

impl Config {
    pub fn total_circles(&self) -> usize {
        self.circles.len() + self.free.len()
    }

    /// Windings of traced circles (free loops all have winding zero).
    pub fn windings(&self) -> Vec<i64> {
        self.circles.iter().map(|c| c.winding()).collect()
    }

    fn check(&self) {
        for c in self.circles.iter() {
            assert!(c.winding().abs() <= 1, "embedded circle winds at most once");
        }
    }

    /// Indices of traced circles that are essential, innermost first.
    pub fn essential_order(&self) -> Vec<usize> {
        let essential: Vec<usize> = (0..self.circles.len())
            .filter(|&i| self.circles[i].is_essential())
            .collect();
        // `inside(c, d)`: circle c separates the inner boundary from d,
        // detected by the parity of c's crossings below d's crossings.
        let inside = |c: usize, d: usize| -> bool {
            let keys_c = self.circles[c].crossing_keys();
            let keys_d = self.circles[d].crossing_keys();
            let parities: Vec<bool> = keys_d
                .iter()
                .map(|kd| keys_c.iter().filter(|kc| *kc < kd).count() % 2 == 1)
                .collect();
            assert!(
                parities.windows(2).all(|w| w[0] == w[1]),
                "disjoint circles lie on one side of each other"
            );
            parities[0]
        };
        let mut order = essential.clone();
        for &c in essential.iter() {
            for &d in essential.iter() {
                if c != d {
                    assert_ne!(
                        inside(c, d),
                        inside(d, c),
                        "radial order must be total"
                    );
                }
            }
        }
        order.sort_by_key(|&c| {
            essential
                .iter()
                .filter(|&&d| d != c && inside(d, c))
                .count()
        });
        order
    }

    /// Radial rank of each traced circle among the essential ones.
    pub fn essential_rank(&self) -> Vec<Option<usize>> {
        let mut rank = vec![None; self.circles.len()];
        for (r, &c) in self.essential_order().iter().enumerate() {
            rank[c] = Some(r);
        }
        rank
    }

    /// Index of the traced circle containing the given square arc.
    pub fn circle_of_arc(&self, layer: usize, arc: usize) -> usize {
        for (i, c) in self.circles.iter().enumerate() {
            if c.items.iter().any(|it| {
                matches!(it, Item::Arc { layer: l, arc: a, .. } if *l == layer && *a == arc)
            }) {
                return i;
            }
        }
        panic!("arc ({}, {}) not found in configuration", layer, arc)
    }

    /// Perform surgery along `band`. The `stack` must be the one this
    /// configuration was traced from (layer indices are shared).
    pub fn surgery(&self, stack: &Stack, band: &Band) -> SurgeryOutcome {
        let (seg_lower, end_lower) = stack.layer_component(band.lower, Pt::B(band.p));
        assert_eq!(
            end_lower,
            Pt::B(band.q),
            "lower band end must join B{} to B{}",
            band.p,
            band.q
        );
        let (seg_upper, end_upper) = stack.layer_component(band.upper, Pt::T(band.p));
        assert_eq!(end_upper, Pt::T(band.q), "upper band end mismatch");
        let (ci_lower, run_lower, fwd_lower) = self.locate(&seg_lower);
        let (ci_upper, run_upper, fwd_upper) = self.locate(&seg_upper);
        // `fwd` is true when the circle traverses the component from p to q.
        if ci_lower != ci_upper {
            // Merge. Cut both circles open after their segments.
            let a = self.remainder(ci_lower, &run_lower);
            let b = self.remainder(ci_upper, &run_upper);
            let joined = if fwd_lower == fwd_upper {
                // Same direction: the second circle is traversed backwards
                // in the merged circle.
                let mut items = a;
                items.extend(Circle { items: b }.reversed().items);
                items
            } else {
                let mut items = a;
                items.extend(b);
                items
            };
            let (circles, moved, to) =
                self.rebuild(&[ci_lower, ci_upper], vec![Circle { items: joined }]);
            SurgeryOutcome {
                config: Config {
                    circles,
                    free: self.free.clone(),
                },
                step: Step::Merge {
                    from: (ci_lower, ci_upper),
                    to: to[0],
                },
                moved,
            }
        } else {
            assert_ne!(
                fwd_lower, fwd_upper,
                "band ends traversed in the same direction on one circle"
            );
            // Split: the circle is [seg_lower] A [seg_upper] B cyclically.
            let circle = &self.circles[ci_lower];
            let len = circle.items.len();
            let (s1, l1) = run_lower;
            let (s2, l2) = run_upper;
            let between = |from_end: usize, to_start: usize| -> Vec<Item> {
                let mut items = Vec::new();
                let mut i = from_end % len;
                while i != to_start {
                    items.push(circle.items[i]);
                    i = (i + 1) % len;
                }
                items
            };
            let a = between(s1 + l1, s2);
            let b = between(s2 + l2, s1);
            let (circles, moved, to) = self.rebuild(
                &[ci_lower],
                vec![Circle { items: a }, Circle { items: b }],
            );
            SurgeryOutcome {
                config: Config {
                    circles,
                    free: self.free.clone(),
                },
                step: Step::Split {
                    from: ci_lower,
                    to: (to[0], to[1]),
                },
                moved,
            }
        }
    }

    /// Find the circle containing the component `seg`, the cyclic position
    /// and length of its run there, and whether it is traversed forwards.
    fn locate(&self, seg: &[Item]) -> (usize, (usize, usize), bool) {
        let first = match seg[0] {
            Item::Arc { layer, arc, .. } => (layer, arc),
            _ => unreachable!("segment starts with an arc"),
        };
        let ci = self.circle_of_arc(first.0, first.1);
        let circle = &self.circles[ci];
        let len = circle.items.len();
        let matches_at = |start: usize, forward: bool| -> bool {
            (0..seg.len()).all(|t| {
                let idx = if forward {
                    (start + t) % len
                } else {
                    (start + len - t) % len
                };
                let got = circle.items[idx];
                let want = seg[t];
                if forward {
                    got == want
                } else {
                    // Reverse traversal flips arcs and crossings.
                    match (got, want) {
                        (
                            Item::Arc { layer, arc, rev },
                            Item::Arc {
                                layer: l2,
                                arc: a2,
                                rev: r2,
                            },
                        ) => layer == l2 && arc == a2 && rev != r2,
                        (
                            Item::Cross { layer, height, dir },
                            Item::Cross {
                                layer: l2,
                                height: h2,
                                dir: d2,
                            },
                        ) => layer == l2 && height == h2 && dir == -d2,
                        _ => false,
                    }
                }
            })
        };
        for (i, it) in circle.items.iter().enumerate() {
            if *it == seg[0] {
                if matches_at(i, true) {
                    return (ci, (i, seg.len()), true);
                }
            }
            if let (
                Item::Arc { layer, arc, .. },
                Item::Arc {
                    layer: l2, arc: a2, ..
                },
            ) = (it, &seg[0])
            {
                if layer == l2 && arc == a2 && matches_at(i, false) {
                    // Runs backwards; its run starts at i - (len - 1).
                    let start = (i + len + 1 - seg.len()) % len;
                    return (ci, (start, seg.len()), false);
                }
            }
        }
        panic!("component not found in its circle")
    }

    /// The circle's items outside the run, starting just after it.
    fn remainder(&self, ci: usize, run: &(usize, usize)) -> Vec<Item> {
        let circle = &self.circles[ci];
        let len = circle.items.len();
        let (start, rlen) = *run;
        let mut items = Vec::new();
        let mut i = (start + rlen) % len;
        while i != start {
            items.push(circle.items[i]);
            i = (i + 1) % len;
        }
        items
    }

    /// Replace the circles at `consumed` with `produced` (inserted at the
    /// smallest consumed index), keeping all others in order.
    fn rebuild(
        &self,
        consumed: &[usize],
        produced: Vec<Circle>,
    ) -> (Vec<Circle>, Vec<Option<usize>>, Vec<usize>) {
        let insert_at = *consumed.iter().min().unwrap();
        let mut circles = Vec::new();
        let mut moved = vec![None; self.circles.len()];
        let mut to = Vec::new();
        for (i, c) in self.circles.iter().enumerate() {
            if i == insert_at {
                for p in produced.iter() {
                    to.push(circles.len());
                    circles.push(p.clone());
                }
            }
            if !consumed.contains(&i) {
                moved[i] = Some(circles.len());
                circles.push(c.clone());
            }
        }
        if insert_at >= self.circles.len() {
            for p in produced.iter() {
                to.push(circles.len());
                circles.push(p.clone());
            }
        }
        (circles, moved, to)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} circles ({} essential), {} free loops",
            self.circles.len(),
            self.circles.iter().filter(|c| c.is_essential()).count(),
            self.free.len()
        )
    }
}

/// The multiplication saddles for middle matching `b` sitting between layers
/// `lower` (its reflection, attached below) and `upper`: one band per
/// component of `b`.
///
/// Order matters: a pair can only be surgered once no remaining arc is drawn
/// over it, since the drawn arc of a wider pair passes radially between the
/// two copies of any pair it covers. Surgering widest drawn spans first keeps
/// every intermediate diagram embedded.
pub fn saddle_sequence(b: &crate::matching::Matching, lower: usize, upper: usize) -> Vec<Band> {
    let n2 = 2 * b.n();
    let mut pairs: Vec<(usize, usize)> = b.pairs().to_vec();
    let span = |&(p, q): &(usize, usize)| -> usize {
        let inner = q - p - 1;
        let e = b.arc_at_point(p);
        if b.gap_inside(e, b.puncture_face()) {
            // Drawn over the complementary interval, around the seam.
            n2 - inner - 2
        } else {
            inner
        }
    };
    pairs.sort_by_key(|pq| (std::cmp::Reverse(span(pq)), *pq));
    pairs
        .into_iter()
        .map(|(p, q)| Band {
            lower,
            upper,
            p,
            q,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::Matching;

    fn glue_stack(a: &Matching, b: &Matching) -> Stack {
        Stack::new(vec![FlatTangle::cup(a), FlatTangle::cap(b)]).unwrap()
    }

    #[test]
    fn trace_matches_flat_composition() {
        for n in 1..=3 {
            for a in Matching::enumerate(n) {
                for b in Matching::enumerate(n) {
                    let config = glue_stack(&a, &b).trace();
                    let flat = FlatTangle::cup(&a)
                        .compose(&FlatTangle::cap(&b))
                        .unwrap();
                    let (_, closed) = flat.components();
                    assert_eq!(config.total_circles(), closed.len());
                    let mut w1: Vec<i64> =
                        config.windings().iter().map(|w| w.abs()).collect();
                    w1.extend(std::iter::repeat(0).take(config.free.len()));
                    let mut w2: Vec<i64> = closed.iter().map(|w| w.abs()).collect();
                    w1.sort();
                    w2.sort();
                    assert_eq!(w1, w2, "{} {}", a, b);
                }
            }
        }
    }

    #[test]
    fn diagonal_glue_gives_contractible_circles() {
        for n in 1..=3 {
            for a in Matching::enumerate(n) {
                let config = glue_stack(&a, &a).trace();
                assert_eq!(config.circles.len(), n);
                assert!(config.circles.iter().all(|c| !c.is_essential()));
            }
        }
    }

    #[test]
    fn essential_order_on_nested_pair() {
        // a: nested arcs with the puncture innermost, so both arcs cross the
        // seam; b: same arcs, puncture outermost, crossing nothing. Both
        // circles are essential, the (2,3)-circle innermost.
        let a = Matching::new(2, vec![(1, 4), (2, 3)], 2).unwrap();
        let b = Matching::new(2, vec![(1, 4), (2, 3)], 0).unwrap();
        let config = glue_stack(&a, &b).trace();
        assert_eq!(config.circles.len(), 2);
        assert!(config.circles.iter().all(|c| c.is_essential()));
        let order = config.essential_order();
        assert_eq!(order.len(), 2);
        // The innermost circle is the one through boundary points 2 and 3.
        let inner = config.circle_of_arc(0, {
            let cup = FlatTangle::cup(&a);
            cup.arcs()
                .iter()
                .position(|&(p, q)| {
                    [p, q].contains(&Pt::T(2)) || [p, q].contains(&Pt::T(3))
                })
                .unwrap()
        });
        assert_eq!(order[0], inner);
    }

    #[test]
    fn saddle_walk_reaches_the_glued_configuration() {
        // Surgering all components of b inside c̄ b b̄ a must leave the
        // circles of c̄ a (in circle count and winding data).
        for n in 1..=2 {
            let ms = Matching::enumerate(n);
            for a in ms.iter() {
                for b in ms.iter() {
                    for c in ms.iter() {
                        let stack = Stack::new(vec![
                            FlatTangle::cup(a),
                            FlatTangle::cap(b),
                            FlatTangle::cup(b),
                            FlatTangle::cap(c),
                        ])
                        .unwrap();
                        let mut config = stack.trace();
                        let mut merges = 0;
                        let mut splits = 0;
                        for band in saddle_sequence(b, 1, 2) {
                            let out = config.surgery(&stack, &band);
                            match out.step {
                                Step::Merge { .. } => merges += 1,
                                Step::Split { .. } => splits += 1,
                            }
                            config = out.config;
                        }
                        assert_eq!(merges + splits, n);
                        let target = glue_stack(a, c).trace();
                        assert_eq!(
                            config.circles.len(),
                            target.circles.len(),
                            "{} {} {}",
                            a,
                            b,
                            c
                        );
                        let mut w1: Vec<i64> =
                            config.windings().iter().map(|w| w.abs()).collect();
                        let mut w2: Vec<i64> =
                            target.windings().iter().map(|w| w.abs()).collect();
                        w1.sort();
                        w2.sort();
                        assert_eq!(w1, w2, "{} {} {}", a, b, c);
                    }
                }
            }
        }
    }

    #[test]
    fn single_saddle_splits_the_double_circle() {
        // b b̄ alone: surgery along the single band of b splits each circle
        // pair... for n=1, the two-layer stack has one circle; the band
        // splits it into two (the identity strands' closure).
        for b in Matching::enumerate(1) {
            let stack = Stack::new(vec![
                FlatTangle::cup(&b),
                FlatTangle::cap(&b),
                FlatTangle::cup(&b),
                FlatTangle::cap(&b),
            ])
            .unwrap();
            let config = stack.trace();
            assert_eq!(config.circles.len(), 2);
            let band = saddle_sequence(&b, 1, 2)[0];
            let out = config.surgery(&stack, &band);
            match out.step {
                Step::Merge { .. } => {}
                _ => panic!("two distinct circles must merge"),
            }
            assert_eq!(out.config.circles.len(), 1);
        }
    }
}
