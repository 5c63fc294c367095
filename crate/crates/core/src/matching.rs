//! Crossingless matchings of `2n` boundary points in the punctured disk.
//!
//! Boundary points are numbered `1..=2n` counterclockwise. The complement of
//! the arcs falls into `n + 1` regions; the puncture sits in one of them. A
//! region is recorded via the boundary *gaps* it touches: gap `g` (for
//! `0 <= g < 2n`) is the boundary interval between point `g` and point `g +
//! 1`, with gap `0` between point `2n` and point `1`. Two matchings with the
//! same arcs and the puncture in the same region are equal; the stored
//! `puncture_face` is normalised to the smallest gap id in that region.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::VecDeque;
use std::fmt;

/// A crossingless matching in the punctured disk.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Matching {
    n: usize,
    /// Arcs `(i, j)` with `i < j`, sorted by first endpoint.
    pairs: Vec<(usize, usize)>,
    /// Smallest gap id of the region containing the puncture.
    puncture_face: usize,
}

/// The complementary regions of a matching.
#[derive(Clone, Debug)]
pub struct Regions {
    /// Region id of each gap, indexed by gap id.
    pub region_of_gap: Vec<usize>,
    /// Gap ids in each region, sorted.
    pub gaps_in: Vec<Vec<usize>>,
    /// Per arc: region just inside the arc, region just outside.
    pub arc_sides: Vec<(usize, usize)>,
}

impl Regions {
    pub fn count(&self) -> usize {
        self.gaps_in.len()
    }
}

/// A surgery arc joining two distinct arcs of a matching through a shared
/// region. When that region contains the puncture there are two isotopy
/// classes of surgery arc, distinguished by `side`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurgeryArc {
    pub arc1: usize,
    pub arc2: usize,
    pub region: usize,
    /// `None` when the shared region avoids the puncture. Otherwise selects
    /// which part of the cut region keeps the puncture: `Some(0)` keeps it
    /// with the gaps following the first arc segment on the region boundary,
    /// `Some(1)` with the gaps following the second.
    pub side: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingError(pub String);

impl fmt::Display for MatchingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid matching: {}", self.0)
    }
}

impl std::error::Error for MatchingError {}

impl Matching {
    pub fn new(
        n: usize,
        mut pairs: Vec<(usize, usize)>,
        puncture_face: usize,
    ) -> Result<Self, MatchingError> {
        if pairs.len() != n {
            return Err(MatchingError(format!(
                "expected {} arcs, got {}",
                n,
                pairs.len()
            )));
        }
        if n > 0 && puncture_face >= 2 * n {
            return Err(MatchingError(format!(
                "puncture face {} out of range",
                puncture_face
            )));
        }
        let mut seen = vec![false; 2 * n + 1];
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
            for &e in [p.0, p.1].iter() {
                if e < 1 || e > 2 * n {
                    return Err(MatchingError(format!("endpoint {} out of range", e)));
                }
                if seen[e] {
                    return Err(MatchingError(format!("endpoint {} used twice", e)));
                }
                seen[e] = true;
            }
        }
        pairs.sort();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            for &(x, y) in pairs[k + 1..].iter() {
                let x_in = i < x && x < j;
                let y_in = i < y && y < j;
                if x_in != y_in {
                    return Err(MatchingError(format!(
                        "arcs ({},{}) and ({},{}) cross",
                        i, j, x, y
                    )));
                }
            }
        }
        let mut m = Matching {
            n,
            pairs,
            puncture_face: if n == 0 { 0 } else { puncture_face },
        };
        if n > 0 {
            let regions = m.regions();
            let r = regions.region_of_gap[m.puncture_face];
            m.puncture_face = regions.gaps_in[r][0];
        }
        m
            .validate_ok()
            .map(|_| m)
    }

    fn validate_ok(&self) -> Result<(), MatchingError> {
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn puncture_face(&self) -> usize {
        self.puncture_face
    }

    /// True if gap `g` lies strictly inside arc `e`.
    pub fn gap_inside(&self, e: usize, g: usize) -> bool {
        let (i, j) = self.pairs[e];
        i <= g && g < j
    }

    /// The arc index using boundary point `p`.
    pub fn arc_at_point(&self, p: usize) -> usize {
        self.pairs
            .iter()
            .position(|&(i, j)| i == p || j == p)
            .expect("point out of range")
    }

    /// Complementary regions, as classes of gaps.
    pub fn regions(&self) -> Regions {
        let two_n = 2 * self.n;
        // Gaps g and h lie in the same region iff they sit on the same side
        // of every arc.
        let sig = |g: usize| -> Vec<bool> {
            (0..self.n).map(|e| self.gap_inside(e, g)).collect()
        };
        let mut region_of_gap = vec![usize::MAX; two_n];
        let mut gaps_in: Vec<Vec<usize>> = Vec::new();
        let mut sigs: Vec<Vec<bool>> = Vec::new();
        for g in 0..two_n {
            let s = sig(g);
            match sigs.iter().position(|t| *t == s) {
                Some(r) => {
                    region_of_gap[g] = r;
                    gaps_in[r].push(g);
                }
                None => {
                    region_of_gap[g] = sigs.len();
                    sigs.push(s);
                    gaps_in.push(vec![g]);
                }
            }
        }
        // The two regions incident to arc (i, j) are the regions of the gaps
        // on either side of endpoint j.
        let arc_sides = self
            .pairs
            .iter()
            .map(|&(_, j)| {
                (region_of_gap[j - 1], region_of_gap[j % two_n])
            })
            .collect();
        Regions {
            region_of_gap,
            gaps_in,
            arc_sides,
        }
    }

    /// Region containing the puncture.
    pub fn puncture_region(&self, regions: &Regions) -> usize {
        regions.region_of_gap[self.puncture_face]
    }

    /// Distance from the puncture region to each region in the region tree.
    pub fn region_depths(&self, regions: &Regions) -> Vec<usize> {
        let mut adj = vec![Vec::new(); regions.count()];
        for &(r1, r2) in regions.arc_sides.iter() {
            adj[r1].push(r2);
            adj[r2].push(r1);
        }
        let mut dist = vec![usize::MAX; regions.count()];
        let start = self.puncture_region(regions);
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(r) = queue.pop_front() {
            for &s in adj[r].iter() {
                if dist[s] == usize::MAX {
                    dist[s] = dist[r] + 1;
                    queue.push_back(s);
                }
            }
        }
        dist
    }

    /// Number of arcs separating arc `e` from the puncture.
    pub fn depth(&self, e: usize) -> usize {
        let regions = self.regions();
        let dist = self.region_depths(&regions);
        let (r1, r2) = regions.arc_sides[e];
        dist[r1].min(dist[r2])
    }

    /// Boundary points of the interval `I` such that arc `e` together with
    /// `I` bounds a disk avoiding the puncture.
    fn interval(&self, e: usize) -> Vec<usize> {
        let (i, j) = self.pairs[e];
        if self.gap_inside(e, self.puncture_face) {
            (j..=2 * self.n).chain(1..=i).collect()
        } else {
            (i..=j).collect()
        }
    }

    /// Nesting order: `e < f` iff the puncture-avoiding disk of `e` sits
    /// inside that of `f`.
    pub fn nested_below(&self, e: usize, f: usize) -> bool {
        if e == f {
            return false;
        }
        let int_e = self.interval(e);
        let int_f = self.interval(f);
        int_e.iter().all(|p| int_f.contains(p))
    }

    /// Arc `e` is outermost when no arc separates it from the puncture.
    pub fn is_outermost(&self, e: usize) -> bool {
        self.depth(e) == 0
    }

    /// Slide the outermost arc `e` across the puncture. The arcs are
    /// unchanged; the puncture moves to the other side of `e`.
    pub fn flip(&self, e: usize) -> Matching {
        assert!(self.is_outermost(e), "flip requires an outermost arc");
        let regions = self.regions();
        let here = self.puncture_region(&regions);
        let (r1, r2) = regions.arc_sides[e];
        let there = if r1 == here { r2 } else { r1 };
        assert!(r1 == here || r2 == here);
        Matching {
            n: self.n,
            pairs: self.pairs.clone(),
            puncture_face: regions.gaps_in[there][0],
        }
    }

    /// Boundary of region `r` as an alternating cyclic sequence of gaps and
    /// directed arc traversals `(arc, from, to)`.
    pub fn region_boundary(&self, regions: &Regions, r: usize) -> Vec<BoundaryItem> {
        let two_n = 2 * self.n;
        let start = regions.gaps_in[r][0];
        let mut items = Vec::new();
        let mut g = start;
        loop {
            items.push(BoundaryItem::Gap(g));
            // The gap ends at point g + 1; cross the arc there.
            let from = if g + 1 > two_n { 1 } else { g + 1 };
            let e = self.arc_at_point(from);
            let (i, j) = self.pairs[e];
            let to = if i == from { j } else { i };
            items.push(BoundaryItem::Arc { arc: e, from, to });
            // Exactly one of the gaps flanking `to` lies in r.
            let before = (to + two_n - 1) % two_n;
            let after = to % two_n;
            g = if regions.region_of_gap[before] == r {
                before
            } else {
                debug_assert_eq!(regions.region_of_gap[after], r);
                after
            };
            if g == start {
                break;
            }
        }
        items
    }

    /// All surgery arcs: one per adjacent arc pair whose shared region avoids
    /// the puncture, two otherwise.
    pub fn surgery_arcs(&self) -> Vec<SurgeryArc> {
        let regions = self.regions();
        let punc = self.puncture_region(&regions);
        let mut out = Vec::new();
        for e in 0..self.n {
            for f in e + 1..self.n {
                let (a1, a2) = regions.arc_sides[e];
                let (b1, b2) = regions.arc_sides[f];
                let shared: Vec<usize> = [a1, a2]
                    .iter()
                    .copied()
                    .filter(|r| *r == b1 || *r == b2)
                    .collect();
                debug_assert!(shared.len() <= 1, "region graph must be a tree");
                if let Some(&r) = shared.first() {
                    if r == punc {
                        out.push(SurgeryArc {
                            arc1: e,
                            arc2: f,
                            region: r,
                            side: Some(0),
                        });
                        out.push(SurgeryArc {
                            arc1: e,
                            arc2: f,
                            region: r,
                            side: Some(1),
                        });
                    } else {
                        out.push(SurgeryArc {
                            arc1: e,
                            arc2: f,
                            region: r,
                            side: None,
                        });
                    }
                }
            }
        }
        out
    }

    /// Shared region of two adjacent arcs, if any.
    pub fn shared_region(&self, e: usize, f: usize) -> Option<usize> {
        let regions = self.regions();
        let (a1, a2) = regions.arc_sides[e];
        let (b1, b2) = regions.arc_sides[f];
        [a1, a2].into_iter().find(|r| *r == b1 || *r == b2)
    }

    /// Perform surgery along `arc`, cutting the two arcs and reconnecting
    /// them through the shared region.
    pub fn surgery(&self, arc: &SurgeryArc) -> Matching {
        let regions = self.regions();
        let punc = self.puncture_region(&regions);
        assert_eq!(
            (arc.region == punc),
            arc.side.is_some(),
            "side data required exactly when the shared region holds the puncture"
        );
        let boundary = self.region_boundary(&regions, arc.region);
        // Locate the two arc traversals in boundary order.
        let mut segs = Vec::new();
        for (pos, item) in boundary.iter().enumerate() {
            if let BoundaryItem::Arc { arc: e, from, to } = item {
                if *e == arc.arc1 || *e == arc.arc2 {
                    segs.push((pos, *e, *from, *to));
                }
            }
        }
        assert_eq!(segs.len(), 2, "arcs not adjacent through this region");
        let (pos1, e1, x1, y1) = segs[0];
        let (pos2, e2, x2, y2) = segs[1];
        let mut pairs: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != e1 && *k != e2)
            .map(|(_, p)| *p)
            .collect();
        pairs.push((y1.min(x2), y1.max(x2)));
        pairs.push((y2.min(x1), y2.max(x1)));
        let face = match arc.side {
            None => self.puncture_face,
            Some(s) => {
                // The gap immediately after the chosen arc segment stays on
                // the puncture side of the cut.
                let pos = if s == 0 { pos1 } else { pos2 };
                match boundary[(pos + 1) % boundary.len()] {
                    BoundaryItem::Gap(g) => g,
                    _ => unreachable!("region boundary alternates arcs and gaps"),
                }
            }
        };
        Matching::new(self.n, pairs, face).expect("surgery preserves validity")
    }

    /// The surgery arc on `self.surgery(arc)` undoing `arc`.
    pub fn dual_surgery_arc(&self, arc: &SurgeryArc) -> SurgeryArc {
        let b = self.surgery(arc);
        for cand in b.surgery_arcs() {
            if b.surgery(&cand) == *self {
                // The dual joins the two new arcs; they are the last two in
                // the rebuilt pair list before sorting, so identify them by
                // absence from the untouched arcs.
                let old: Vec<(usize, usize)> = self
                    .pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != arc.arc1 && *k != arc.arc2)
                    .map(|(_, p)| *p)
                    .collect();
                let p1 = b.pairs[cand.arc1];
                let p2 = b.pairs[cand.arc2];
                if !old.contains(&p1) && !old.contains(&p2) {
                    return cand;
                }
            }
        }
        panic!("no dual surgery arc found");
    }

    /// All matchings in `B^n`, sorted.
    pub fn enumerate(n: usize) -> Vec<Matching> {
        if n == 0 {
            return vec![Matching::new(0, Vec::new(), 0).unwrap()];
        }
        let points: Vec<usize> = (1..=2 * n).collect();
        let mut out = Vec::new();
        for pairing in noncrossing_pairings(&points) {
            let base = Matching::new(n, pairing.clone(), 0).expect("valid pairing");
            let regions = base.regions();
            for gaps in regions.gaps_in.iter() {
                out.push(
                    Matching::new(n, pairing.clone(), gaps[0]).expect("valid pairing"),
                );
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// One piece of a region boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryItem {
    Gap(usize),
    Arc { arc: usize, from: usize, to: usize },
}

fn noncrossing_pairings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if points.is_empty() {
        return vec![Vec::new()];
    }
    let first = points[0];
    let mut out = Vec::new();
    for k in (1..points.len()).step_by(2) {
        let partner = points[k];
        for inner in noncrossing_pairings(&points[1..k]) {
            for outer in noncrossing_pairings(&points[k + 1..]) {
                let mut pairing = vec![(first, partner)];
                pairing.extend(inner.iter().copied());
                pairing.extend(outer);
                out.push(pairing);
            }
        }
    }
    out
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arcs: Vec<String> = self
            .pairs
            .iter()
            .map(|&(i, j)| format!("{}-{}", i, j))
            .collect();
        write!(f, "[{} | x@{}]", arcs.join(" "), self.puncture_face)
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            pairs: Vec<(usize, usize)>,
            puncture_face: usize,
        }
        let raw = Raw::deserialize(deserializer)?;
        Matching::new(raw.n, raw.pairs, raw.puncture_face)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: usize, pairs: &[(usize, usize)], face: usize) -> Matching {
        Matching::new(n, pairs.to_vec(), face).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        // |B^n| = binomial(2n, n).
        assert_eq!(Matching::enumerate(0).len(), 1);
        assert_eq!(Matching::enumerate(1).len(), 2);
        assert_eq!(Matching::enumerate(2).len(), 6);
        assert_eq!(Matching::enumerate(3).len(), 20);
        assert_eq!(Matching::enumerate(4).len(), 70);
    }

    #[test]
    fn pairing_counts_are_catalan() {
        for (n, catalan) in [(1usize, 1usize), (2, 2), (3, 5), (4, 14)] {
            let points: Vec<usize> = (1..=2 * n).collect();
            assert_eq!(noncrossing_pairings(&points).len(), catalan);
        }
    }

    #[test]
    fn regions_count_and_face_normalisation() {
        let a = m(2, &[(1, 2), (3, 4)], 0);
        let regions = a.regions();
        assert_eq!(regions.count(), 3);
        // Gaps 0 and 2 share the central region.
        assert_eq!(regions.region_of_gap[0], regions.region_of_gap[2]);
        assert_eq!(a, m(2, &[(1, 2), (3, 4)], 2));
        assert_ne!(a, m(2, &[(1, 2), (3, 4)], 1));
    }

    #[test]
    fn crossing_pairs_rejected() {
        assert!(Matching::new(2, vec![(1, 3), (2, 4)], 0).is_err());
        assert!(Matching::new(2, vec![(1, 2), (2, 4)], 0).is_err());
    }

    #[test]
    fn depth_and_outermost() {
        let a = m(2, &[(1, 4), (2, 3)], 0);
        let outer = a.pairs().iter().position(|p| *p == (1, 4)).unwrap();
        let inner = a.pairs().iter().position(|p| *p == (2, 3)).unwrap();
        assert_eq!(a.depth(outer), 0);
        assert_eq!(a.depth(inner), 1);
        assert!(a.is_outermost(outer));
        assert!(!a.is_outermost(inner));
        assert!(a.nested_below(inner, outer));
        assert!(!a.nested_below(outer, inner));
    }

    #[test]
    fn outermost_matches_maximality() {
        for n in 1..=3 {
            for a in Matching::enumerate(n) {
                for e in 0..n {
                    let maximal = (0..n).all(|f| !a.nested_below(e, f));
                    assert_eq!(a.is_outermost(e), maximal, "{} arc {}", a, e);
                }
            }
        }
    }

    #[test]
    fn depth_matches_chain_length() {
        // depth(e) equals the longest chain e < e_1 < ... above e.
        for n in 1..=4 {
            for a in Matching::enumerate(n) {
                let mut longest = vec![0usize; n];
                let mut order: Vec<usize> = (0..n).collect();
                // Process from outermost inwards.
                order.sort_by_key(|&e| std::cmp::Reverse(a.depth(e)));
                order.reverse();
                for &e in order.iter() {
                    longest[e] = (0..n)
                        .filter(|&f| a.nested_below(e, f))
                        .map(|f| longest[f] + 1)
                        .max()
                        .unwrap_or(0);
                }
                for e in 0..n {
                    assert_eq!(a.depth(e), longest[e], "{} arc {}", a, e);
                }
            }
        }
    }

    #[test]
    fn flip_is_an_involution() {
        for n in 1..=3 {
            for a in Matching::enumerate(n) {
                for e in 0..n {
                    if a.is_outermost(e) {
                        let b = a.flip(e);
                        assert_ne!(a, b);
                        assert_eq!(b.pairs(), a.pairs());
                        assert_eq!(b.flip(e), a);
                    }
                }
            }
        }
    }

    #[test]
    fn surgery_on_split_pair() {
        // Two arcs beside the puncture; surgery brings them together, with
        // the puncture tracked to one side or the other.
        let a = m(2, &[(1, 2), (3, 4)], 0);
        let arcs = a.surgery_arcs();
        assert_eq!(arcs.len(), 2);
        let results: Vec<Matching> = arcs.iter().map(|r| a.surgery(r)).collect();
        assert_eq!(results[0], m(2, &[(1, 4), (2, 3)], 2));
        assert_eq!(results[1], m(2, &[(1, 4), (2, 3)], 0));
        assert_ne!(results[0], results[1]);
    }

    #[test]
    fn surgery_toggles_nesting() {
        for n in 2..=3 {
            for a in Matching::enumerate(n) {
                let regions = a.regions();
                let punc = a.puncture_region(&regions);
                for r in a.surgery_arcs() {
                    let nested = a.nested_below(r.arc1, r.arc2)
                        || a.nested_below(r.arc2, r.arc1);
                    // Two arc choices exactly when the shared region holds
                    // the puncture; such pairs are never nested.
                    assert_eq!(r.side.is_some(), r.region == punc, "{} {:?}", a, r);
                    if r.region == punc {
                        assert!(!nested, "{} {:?}", a, r);
                    }
                    let b = a.surgery(&r);
                    let old: Vec<(usize, usize)> = a
                        .pairs()
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != r.arc1 && *k != r.arc2)
                        .map(|(_, p)| *p)
                        .collect();
                    let new_arcs: Vec<usize> = (0..n)
                        .filter(|&k| !old.contains(&b.pairs()[k]))
                        .collect();
                    assert_eq!(new_arcs.len(), 2);
                    let now_nested = b.nested_below(new_arcs[0], new_arcs[1])
                        || b.nested_below(new_arcs[1], new_arcs[0]);
                    assert_eq!(now_nested, !nested, "{} -> {}", a, b);
                }
            }
        }
    }

    #[test]
    fn surgery_duals_undo() {
        for n in 2..=3 {
            for a in Matching::enumerate(n) {
                for r in a.surgery_arcs() {
                    let b = a.surgery(&r);
                    let dual = a.dual_surgery_arc(&r);
                    assert_eq!(b.surgery(&dual), a);
                }
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let a = m(3, &[(1, 6), (2, 3), (4, 5)], 1);
        let text = serde_json::to_string(&a).unwrap();
        let back: Matching = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
        assert!(serde_json::from_str::<Matching>(
            "{\"n\":2,\"pairs\":[[1,3],[2,4]],\"puncture_face\":0}"
        )
        .is_err());
    }
}
