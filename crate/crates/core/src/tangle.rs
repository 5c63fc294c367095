//! Flat annular tangles, encoded by cutting the annulus along the seam.
//!
//! The seam is the radial segment at angle zero (gap 0 of both boundary
//! circles). Cutting along it turns the annulus into a square: `2m` points on
//! the bottom edge (inner boundary), `2n` on the top (outer boundary), and
//! `k` points on each of the left and right edges where the tangle met the
//! seam. `L_s` and `R_s` are the two copies of seam crossing `s`, numbered
//! from the inner boundary outwards. A flat tangle is a non-crossing perfect
//! matching of these square boundary points, together with a count of closed
//! loops that avoid the seam entirely.
//!
//! Seam-avoiding contractible loops are recorded only by their count; their
//! position among the other components carries no information used anywhere
//! in this crate.

use crate::matching::Matching;
use serde::de::Error as DeError;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A point on the boundary of the cut-open square.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Pt {
    /// Bottom (inner boundary) point, `1..=2m`.
    B(usize),
    /// Top (outer boundary) point, `1..=2n`.
    T(usize),
    /// Left copy of seam crossing `s`, `1..=k`, inner first.
    L(usize),
    /// Right copy of seam crossing `s`.
    R(usize),
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pt::B(i) => write!(f, "B{}", i),
            Pt::T(i) => write!(f, "T{}", i),
            Pt::L(i) => write!(f, "L{}", i),
            Pt::R(i) => write!(f, "R{}", i),
        }
    }
}

impl Pt {
    fn parse(text: &str) -> Option<Pt> {
        let (head, tail) = text.split_at(1);
        let idx: usize = tail.parse().ok()?;
        match head {
            "B" => Some(Pt::B(idx)),
            "T" => Some(Pt::T(idx)),
            "L" => Some(Pt::L(idx)),
            "R" => Some(Pt::R(idx)),
            _ => None,
        }
    }
}

/// A flat annular `(n, m)`-tangle: `2m` inner and `2n` outer endpoints.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatTangle {
    bottom: usize,
    top: usize,
    seam: usize,
    /// Non-crossing matching of the square boundary, arcs sorted.
    arcs: Vec<(Pt, Pt)>,
    /// Closed contractible loops disjoint from the seam.
    free_loops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangleError(pub String);

impl fmt::Display for TangleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid tangle: {}", self.0)
    }
}

impl std::error::Error for TangleError {}

impl FlatTangle {
    /// Position of `p` in the counterclockwise boundary cycle of the square:
    /// bottom left-to-right, right edge upwards, top right-to-left, left
    /// edge downwards.
    fn pos(&self, p: Pt) -> usize {
        match p {
            Pt::B(i) => i - 1,
            Pt::R(s) => self.bottom + s - 1,
            Pt::T(j) => self.bottom + self.seam + (self.top - j),
            Pt::L(s) => self.bottom + self.seam + self.top + (self.seam - s),
        }
    }

    fn in_range(&self, p: Pt) -> bool {
        match p {
            Pt::B(i) => i >= 1 && i <= self.bottom,
            Pt::T(j) => j >= 1 && j <= self.top,
            Pt::L(s) | Pt::R(s) => s >= 1 && s <= self.seam,
        }
    }

    pub fn new(
        bottom: usize,
        top: usize,
        seam: usize,
        mut arcs: Vec<(Pt, Pt)>,
        free_loops: usize,
    ) -> Result<Self, TangleError> {
        if bottom % 2 != 0 || top % 2 != 0 {
            return Err(TangleError("odd number of boundary points".into()));
        }
        let t = FlatTangle {
            bottom,
            top,
            seam,
            arcs: Vec::new(),
            free_loops,
        };
        let total = bottom + top + 2 * seam;
        if arcs.len() * 2 != total {
            return Err(TangleError(format!(
                "expected {} arc endpoints, got {}",
                total,
                arcs.len() * 2
            )));
        }
        let mut seen = vec![false; total];
        for a in arcs.iter_mut() {
            for p in [a.0, a.1] {
                if !t.in_range(p) {
                    return Err(TangleError(format!("point {} out of range", p)));
                }
                let q = t.pos(p);
                if seen[q] {
                    return Err(TangleError(format!("point {} used twice", p)));
                }
                seen[q] = true;
            }
            if t.pos(a.0) > t.pos(a.1) {
                *a = (a.1, a.0);
            }
        }
        arcs.sort_by_key(|a| t.pos(a.0));
        for (i, &(p, q)) in arcs.iter().enumerate() {
            let (p, q) = (t.pos(p), t.pos(q));
            for &(u, v) in arcs[i + 1..].iter() {
                let (u, v) = (t.pos(u), t.pos(v));
                let u_in = p < u && u < q;
                let v_in = p < v && v < q;
                if u_in != v_in {
                    return Err(TangleError(format!(
                        "arcs ({},{}) and ({},{}) cross",
                        arcs[i].0, arcs[i].1, u, v
                    )));
                }
            }
        }
        Ok(FlatTangle { arcs, ..t })
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn seam(&self) -> usize {
        self.seam
    }

    pub fn arcs(&self) -> &[(Pt, Pt)] {
        &self.arcs
    }

    pub fn free_loops(&self) -> usize {
        self.free_loops
    }

    pub fn is_closed(&self) -> bool {
        self.bottom == 0 && self.top == 0
    }

    /// The other endpoint of the arc at `p`, with the arc's index.
    pub fn partner(&self, p: Pt) -> (usize, Pt) {
        for (i, &(u, v)) in self.arcs.iter().enumerate() {
            if u == p {
                return (i, v);
            }
            if v == p {
                return (i, u);
            }
        }
        panic!("point {} not in tangle", p)
    }

    /// The identity `(n, n)`-tangle: `2n` radial strands.
    pub fn id(n: usize) -> FlatTangle {
        let arcs = (1..=2 * n).map(|i| (Pt::B(i), Pt::T(i))).collect();
        FlatTangle::new(2 * n, 2 * n, 0, arcs, 0).unwrap()
    }

    /// The positive Dehn twist applied to the identity `(n, n)`-tangle: each
    /// strand wraps once around the annulus counterclockwise.
    pub fn tw(n: usize) -> FlatTangle {
        let mut arcs = Vec::new();
        for i in 1..=2 * n {
            arcs.push((Pt::B(i), Pt::R(2 * n + 1 - i)));
            arcs.push((Pt::L(2 * n + 1 - i), Pt::T(i)));
        }
        FlatTangle::new(2 * n, 2 * n, 2 * n, arcs, 0).unwrap()
    }

    /// The negative Dehn twist applied to the identity tangle.
    pub fn tw_inv(n: usize) -> FlatTangle {
        let mut arcs = Vec::new();
        for i in 1..=2 * n {
            arcs.push((Pt::B(i), Pt::L(i)));
            arcs.push((Pt::R(i), Pt::T(i)));
        }
        FlatTangle::new(2 * n, 2 * n, 2 * n, arcs, 0).unwrap()
    }

    /// A matching viewed as an `(n, 0)`-tangle: arcs hang from the outer
    /// boundary, the puncture is the shrunken inner boundary.
    pub fn cup(a: &Matching) -> FlatTangle {
        let n = a.n();
        let regions = a.regions();
        // Arcs crossing the seam are those separating the puncture region
        // from the region at gap 0, ordered from the puncture outwards.
        let mut path = Vec::new();
        if n > 0 {
            let dist = a.region_depths(&regions);
            let mut r = regions.region_of_gap[0];
            while dist[r] > 0 {
                let e = (0..n)
                    .find(|&e| {
                        let (r1, r2) = regions.arc_sides[e];
                        (r1 == r && dist[r2] + 1 == dist[r])
                            || (r2 == r && dist[r1] + 1 == dist[r])
                    })
                    .expect("region tree path");
                path.push(e);
                let (r1, r2) = regions.arc_sides[e];
                r = if r1 == r { r2 } else { r1 };
            }
            path.reverse(); // innermost (nearest the puncture) first
        }
        let mut arcs = Vec::new();
        for e in 0..n {
            let (i, j) = a.pairs()[e];
            match path.iter().position(|&f| f == e) {
                None => arcs.push((Pt::T(i), Pt::T(j))),
                Some(t) => {
                    // The j-side piece runs to the seam through gap 0 from
                    // the right, the i-side piece from the left.
                    arcs.push((Pt::T(j), Pt::R(t + 1)));
                    arcs.push((Pt::L(t + 1), Pt::T(i)));
                }
            }
        }
        FlatTangle::new(0, 2 * n, path.len(), arcs, 0).unwrap()
    }

    /// The reflection of `cup(b)`: a `(0, n)`-tangle attached below.
    pub fn cap(b: &Matching) -> FlatTangle {
        FlatTangle::cup(b).reflect()
    }

    /// Reflect through the core circle of the annulus, exchanging inner and
    /// outer boundaries.
    pub fn reflect(&self) -> FlatTangle {
        let k = self.seam;
        let swap = |p: Pt| match p {
            Pt::B(i) => Pt::T(i),
            Pt::T(i) => Pt::B(i),
            Pt::L(s) => Pt::L(k + 1 - s),
            Pt::R(s) => Pt::R(k + 1 - s),
        };
        let arcs = self.arcs.iter().map(|&(p, q)| (swap(p), swap(q))).collect();
        FlatTangle::new(self.top, self.bottom, k, arcs, self.free_loops).unwrap()
    }

    /// Stack `upper` on top of `self`, gluing `self`'s outer boundary to
    /// `upper`'s inner boundary.
    pub fn compose(&self, upper: &FlatTangle) -> Result<FlatTangle, TangleError> {
        if self.top != upper.bottom {
            return Err(TangleError(format!(
                "boundary mismatch: {} vs {}",
                self.top, upper.bottom
            )));
        }
        let k1 = self.seam;
        let k = k1 + upper.seam;
        // Endpoints of the composite: everything except the glued interface.
        #[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
        enum Node {
            Lo(Pt),
            Up(Pt),
        }
        let out = |node: Node| -> Option<Pt> {
            match node {
                Node::Lo(Pt::B(i)) => Some(Pt::B(i)),
                Node::Lo(Pt::L(s)) => Some(Pt::L(s)),
                Node::Lo(Pt::R(s)) => Some(Pt::R(s)),
                Node::Up(Pt::T(j)) => Some(Pt::T(j)),
                Node::Up(Pt::L(s)) => Some(Pt::L(k1 + s)),
                Node::Up(Pt::R(s)) => Some(Pt::R(k1 + s)),
                _ => None,
            }
        };
        // Step from one endpoint through its arc and any interface gluing.
        let across = |node: Node| -> Node {
            match node {
                Node::Lo(p) => Node::Lo(self.partner(p).1),
                Node::Up(p) => Node::Up(upper.partner(p).1),
            }
        };
        let glue = |node: Node| -> Option<Node> {
            match node {
                Node::Lo(Pt::T(j)) => Some(Node::Up(Pt::B(j))),
                Node::Up(Pt::B(j)) => Some(Node::Lo(Pt::T(j))),
                _ => None,
            }
        };
        let mut arcs = Vec::new();
        let mut visited: std::collections::HashSet<Node> = Default::default();
        let mut starts: Vec<Node> = Vec::new();
        for &(p, q) in self.arcs.iter() {
            starts.push(Node::Lo(p));
            starts.push(Node::Lo(q));
        }
        for &(p, q) in upper.arcs.iter() {
            starts.push(Node::Up(p));
            starts.push(Node::Up(q));
        }
        // Open components first: walk from each non-interface endpoint.
        for &start in starts.iter() {
            if out(start).is_none() || visited.contains(&start) {
                continue;
            }
            let mut node = start;
            loop {
                visited.insert(node);
                node = across(node);
                visited.insert(node);
                match glue(node) {
                    Some(next) => node = next,
                    None => break,
                }
            }
            arcs.push((out(start).unwrap(), out(node).unwrap()));
        }
        // Remaining arcs lie on closed loops through the interface only.
        let mut free_loops = self.free_loops + upper.free_loops;
        for &start in starts.iter() {
            if visited.contains(&start) {
                continue;
            }
            let mut node = start;
            loop {
                visited.insert(node);
                node = across(node);
                visited.insert(node);
                node = glue(node).expect("closed loop stays on the interface");
                if node == start {
                    break;
                }
            }
            free_loops += 1;
        }
        FlatTangle::new(self.bottom, upper.top, k, arcs, free_loops)
    }

    /// Cancel pairs of adjacent opposite seam crossings until none remain.
    pub fn normalize(&self) -> FlatTangle {
        let mut t = self.clone();
        'outer: loop {
            for s in 1..t.seam {
                for (a, b) in [(Pt::L(s), Pt::L(s + 1)), (Pt::R(s), Pt::R(s + 1))] {
                    if t.partner(a).1 == b {
                        t = t.cancel(s, a, b);
                        continue 'outer;
                    }
                }
            }
            return t;
        }
    }

    /// Remove crossings `s` and `s + 1`, joined directly by the arc `(a, b)`
    /// on one side of the seam.
    fn cancel(&self, s: usize, a: Pt, b: Pt) -> FlatTangle {
        let mirror = |p: Pt| match p {
            Pt::L(h) => Pt::R(h),
            Pt::R(h) => Pt::L(h),
            other => other,
        };
        let (ma, mb) = (mirror(a), mirror(b));
        let (_, u) = self.partner(ma);
        let (_, v) = self.partner(mb);
        let mut arcs: Vec<(Pt, Pt)> = Vec::new();
        let mut free_loops = self.free_loops;
        if u == mb {
            // The mirror side closes up: a loop crossing the seam twice.
            free_loops += 1;
        }
        for &(p, q) in self.arcs.iter() {
            let ends = [p, q];
            if ends.contains(&a) || ends.contains(&ma) || ends.contains(&mb) {
                continue;
            }
            arcs.push((p, q));
        }
        if u != mb {
            arcs.push((u, v));
        }
        // Renumber the remaining crossings.
        let shift = |p: Pt| match p {
            Pt::L(h) if h > s + 1 => Pt::L(h - 2),
            Pt::R(h) if h > s + 1 => Pt::R(h - 2),
            other => other,
        };
        let arcs = arcs.iter().map(|&(p, q)| (shift(p), shift(q))).collect();
        FlatTangle::new(self.bottom, self.top, self.seam - 2, arcs, free_loops)
            .expect("cancellation preserves validity")
    }

    /// Traced components: open arcs as (end, end, net seam crossing counted
    /// along the traversal from the first end), closed loops as net windings.
    pub fn components(&self) -> (Vec<(Pt, Pt, i64)>, Vec<i64>) {
        let mut open = Vec::new();
        let mut closed = Vec::new();
        let mut visited: std::collections::HashSet<Pt> = Default::default();
        let outer = |p: Pt| matches!(p, Pt::B(_) | Pt::T(_));
        let mut ends: Vec<Pt> = Vec::new();
        for &(p, q) in self.arcs.iter() {
            ends.push(p);
            ends.push(q);
        }
        ends.sort_by_key(|&p| self.pos(p));
        for &start in ends.iter().filter(|&&p| outer(p)) {
            if visited.contains(&start) {
                continue;
            }
            let mut node = start;
            let mut winding = 0i64;
            loop {
                visited.insert(node);
                node = self.partner(node).1;
                visited.insert(node);
                match node {
                    Pt::L(s) => {
                        winding -= 1;
                        node = Pt::R(s);
                    }
                    Pt::R(s) => {
                        winding += 1;
                        node = Pt::L(s);
                    }
                    _ => break,
                }
            }
            open.push((start, node, winding));
        }
        for &start in ends.iter() {
            if visited.contains(&start) {
                continue;
            }
            let mut node = start;
            let mut winding = 0i64;
            loop {
                visited.insert(node);
                node = self.partner(node).1;
                visited.insert(node);
                node = match node {
                    Pt::L(s) => {
                        winding -= 1;
                        Pt::R(s)
                    }
                    Pt::R(s) => {
                        winding += 1;
                        Pt::L(s)
                    }
                    _ => unreachable!("closed component stays on the seam"),
                };
                if node == start {
                    break;
                }
            }
            closed.push(winding);
        }
        for _ in 0..self.free_loops {
            closed.push(0);
        }
        (open, closed)
    }

    /// Interpret a normalized `(n, 0)`-tangle as a matching plus closed
    /// loops. Closed windings are returned alongside.
    pub fn to_matching(&self) -> Result<(Matching, Vec<i64>), TangleError> {
        if self.bottom != 0 {
            return Err(TangleError("not an (n, 0)-tangle".into()));
        }
        let t = self.normalize();
        let (open, closed) = t.components();
        let n = t.top / 2;
        let mut pairs = Vec::new();
        for &(p, q, _) in open.iter() {
            match (p, q) {
                (Pt::T(i), Pt::T(j)) => pairs.push((i.min(j), i.max(j))),
                _ => unreachable!("open ends of an (n, 0)-tangle are outer"),
            }
        }
        let base = Matching::new(n, pairs.clone(), 0)
            .map_err(|e| TangleError(e.to_string()))?;
        // Walk inwards from gap 0 across the seam-crossing arcs; the far end
        // of the walk is the puncture region.
        let regions = base.regions();
        let mut r = if n > 0 {
            regions.region_of_gap[0]
        } else {
            0
        };
        let mut crossing_arcs: Vec<(usize, usize)> = Vec::new(); // (height, arc)
        for s in 1..=t.seam {
            let (_, p) = t.partner(Pt::L(s));
            let (_, q) = t.partner(Pt::R(s));
            match (p, q) {
                (Pt::T(i), Pt::T(j)) => {
                    let pair = (i.min(j), i.max(j));
                    let e = base
                        .pairs()
                        .iter()
                        .position(|&x| x == pair)
                        .expect("crossing arc is a matching arc");
                    crossing_arcs.push((s, e));
                }
                _ => {
                    return Err(TangleError(
                        "seam-crossing component is not a single matching arc".into(),
                    ))
                }
            }
        }
        crossing_arcs.sort();
        for &(_, e) in crossing_arcs.iter().rev() {
            let (r1, r2) = regions.arc_sides[e];
            if r1 == r {
                r = r2;
            } else {
                assert_eq!(r2, r, "crossing arcs form a path from gap 0");
                r = r1;
            }
        }
        let face = if n > 0 { regions.gaps_in[r][0] } else { 0 };
        let matching =
            Matching::new(n, pairs, face).map_err(|e| TangleError(e.to_string()))?;
        Ok((matching, closed))
    }
}

impl fmt::Display for FlatTangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arcs: Vec<String> = self
            .arcs
            .iter()
            .map(|(p, q)| format!("{}-{}", p, q))
            .collect();
        write!(
            f,
            "({}<-{}; k={}; {}{})",
            self.top,
            self.bottom,
            self.seam,
            arcs.join(" "),
            if self.free_loops > 0 {
                format!("; {} loops", self.free_loops)
            } else {
                String::new()
            }
        )
    }
}

impl fmt::Debug for FlatTangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    ends: Vec<String>,
    seam: i64,
}

impl Serialize for FlatTangle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (open, closed) = self.components();
        let mut edges = Vec::new();
        for (p, q, w) in open {
            // Canonical traversal: from the bottom/lower-index end.
            let (p, q, w) = match (p, q) {
                (Pt::T(_), Pt::B(_)) => (q, p, -w),
                (Pt::B(i), Pt::B(j)) | (Pt::T(i), Pt::T(j)) if i > j => (q, p, -w),
                _ => (p, q, w),
            };
            edges.push(EdgeRepr {
                ends: vec![p.to_string(), q.to_string()],
                seam: w,
            });
        }
        for w in closed {
            edges.push(EdgeRepr {
                ends: Vec::new(),
                seam: w,
            });
        }
        let mut s = serializer.serialize_struct("FlatTangle", 4)?;
        s.serialize_field("schema", "annular-webs/v1")?;
        s.serialize_field("bottom", &self.bottom)?;
        s.serialize_field("top", &self.top)?;
        s.serialize_field("edges", &edges)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for FlatTangle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            #[allow(dead_code)]
            schema: Option<String>,
            bottom: usize,
            top: usize,
            edges: Vec<EdgeRepr>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut want_open: Vec<(Pt, Pt, i64)> = Vec::new();
        let mut want_closed: Vec<i64> = Vec::new();
        let mut free_loops = 0usize;
        for e in raw.edges.iter() {
            match e.ends.len() {
                0 => {
                    if e.seam == 0 {
                        free_loops += 1;
                    } else if e.seam.abs() == 1 {
                        want_closed.push(e.seam);
                    } else {
                        return Err(D::Error::custom(
                            "closed component winding must be -1, 0, or 1",
                        ));
                    }
                }
                2 => {
                    let p = Pt::parse(&e.ends[0])
                        .ok_or_else(|| D::Error::custom("bad endpoint"))?;
                    let q = Pt::parse(&e.ends[1])
                        .ok_or_else(|| D::Error::custom("bad endpoint"))?;
                    want_open.push((p, q, e.seam));
                }
                _ => return Err(D::Error::custom("edge must have 0 or 2 ends")),
            }
        }
        reconstruct(raw.bottom, raw.top, &want_open, &want_closed, free_loops)
            .ok_or_else(|| {
                D::Error::custom("edge data does not describe a planar annular tangle")
            })
    }
}

/// Find the lexicographically first non-crossing realization of the given
/// components with the minimal number of seam crossings.
fn reconstruct(
    bottom: usize,
    top: usize,
    open: &[(Pt, Pt, i64)],
    closed: &[i64],
    free_loops: usize,
) -> Option<FlatTangle> {
    let k: i64 = open.iter().map(|&(_, _, w)| w.abs()).sum::<i64>()
        + closed.iter().map(|w| w.abs()).sum::<i64>();
    let k = k as usize;
    let probe = FlatTangle {
        bottom,
        top,
        seam: k,
        arcs: Vec::new(),
        free_loops: 0,
    };
    let total = bottom + top + 2 * k;
    if total % 2 != 0 {
        return None;
    }
    let mut by_pos: Vec<Pt> = Vec::with_capacity(total);
    for i in 1..=bottom {
        by_pos.push(Pt::B(i));
    }
    for s in 1..=k {
        by_pos.push(Pt::R(s));
    }
    for j in (1..=top).rev() {
        by_pos.push(Pt::T(j));
    }
    for s in (1..=k).rev() {
        by_pos.push(Pt::L(s));
    }
    // Sorted target multisets for the final check.
    let norm_open = |list: &[(Pt, Pt, i64)]| -> Vec<(Pt, Pt, i64)> {
        let mut v: Vec<(Pt, Pt, i64)> = list
            .iter()
            .map(|&(p, q, w)| {
                if probe.pos(p) <= probe.pos(q) {
                    (p, q, w)
                } else {
                    (q, p, -w)
                }
            })
            .collect();
        v.sort();
        v
    };
    let want_open = norm_open(open);
    let mut want_closed: Vec<i64> = closed.to_vec();
    want_closed.sort();

    fn search(
        pos: usize,
        matched: &mut Vec<Option<usize>>,
        by_pos: &[Pt],
        outer_ok: &dyn Fn(Pt, Pt) -> bool,
        accept: &mut dyn FnMut(&[(usize, usize)]) -> bool,
        found: &mut Option<Vec<(usize, usize)>>,
    ) {
        if found.is_some() {
            return;
        }
        let total = matched.len();
        if pos == total {
            let mut arcs = Vec::new();
            for (i, m) in matched.iter().enumerate() {
                if let Some(j) = m {
                    if *j > i {
                        arcs.push((i, *j));
                    }
                }
            }
            if accept(&arcs) {
                *found = Some(arcs);
            }
            return;
        }
        if matched[pos].is_some() {
            search(pos + 1, matched, by_pos, outer_ok, accept, found);
            return;
        }
        let mut q = pos + 1;
        while q < total {
            if matched[q].is_none() {
                let outer = |p: Pt| matches!(p, Pt::B(_) | Pt::T(_));
                let allowed = if outer(by_pos[pos]) && outer(by_pos[q]) {
                    outer_ok(by_pos[pos], by_pos[q])
                } else {
                    true
                };
                // Non-crossing: the interval (pos, q) must have an even
                // number of unmatched points and all matches inside.
                let inside_ok = matched[pos + 1..q]
                    .iter()
                    .all(|m| m.map_or(true, |j| pos < j && j < q))
                    && matched[pos + 1..q].iter().filter(|m| m.is_none()).count() % 2
                        == 0;
                if allowed && inside_ok {
                    matched[pos] = Some(q);
                    matched[q] = Some(pos);
                    search(pos + 1, matched, by_pos, outer_ok, accept, found);
                    matched[pos] = None;
                    matched[q] = None;
                    if found.is_some() {
                        return;
                    }
                }
            }
            q += 1;
        }
    }

    // An arc joining two outer points directly is a whole component with no
    // seam crossings; restrict those to the requested seamless edges.
    let seamless: Vec<(Pt, Pt)> = want_open
        .iter()
        .filter(|&&(_, _, w)| w == 0)
        .map(|&(p, q, _)| (p, q))
        .collect();
    let outer_ok = move |p: Pt, q: Pt| -> bool {
        seamless.contains(&(p, q)) || seamless.contains(&(q, p))
    };
    let mut matched: Vec<Option<usize>> = vec![None; total];
    let mut found = None;
    // Accept a candidate only if it traces back to the requested data.
    let mut accept = |arcs_idx: &[(usize, usize)]| -> bool {
        let arcs: Vec<(Pt, Pt)> = arcs_idx
            .iter()
            .map(|&(i, j)| (by_pos[i], by_pos[j]))
            .collect();
        let t = match FlatTangle::new(bottom, top, k, arcs, 0) {
            Ok(t) => t,
            Err(_) => return false,
        };
        let (got_open, got_closed) = t.components();
        let mut got_closed: Vec<i64> = got_closed.into_iter().filter(|w| *w != 0).collect();
        got_closed.sort();
        norm_open(&got_open) == want_open && got_closed == want_closed
    };
    search(0, &mut matched, &by_pos, &outer_ok, &mut accept, &mut found);
    let arcs_idx = found?;
    let arcs: Vec<(Pt, Pt)> = arcs_idx
        .iter()
        .map(|&(i, j)| (by_pos[i], by_pos[j]))
        .collect();
    FlatTangle::new(bottom, top, k, arcs, free_loops).ok()
}
