//! Annular SL(3) webs as combinatorial maps.
//!
//! A [`Web`] is a trivalent graph with oriented edges, every internal vertex
//! a source or a sink, embedded in the annulus with its univalent vertices on
//! the outer boundary circle. The embedding is recorded as a rotation system
//! together with a marked puncture face. The boundary circle itself is part
//! of the map: for a web with `n` endpoints, vertices `0..n` are the boundary
//! vertices in cyclic order and edges `0..n` are the circle arcs between
//! them, so every face of the annulus appears as a face of the map.
//!
//! Rotation lists are stored in clockwise order as drawn on the cylinder
//! with the outer boundary on top; tracing `h -> succ(twin(h))` then walks
//! each face once. Disjoint circle components carry no combinatorial data
//! and are kept as counters, split into contractible and essential ones.

use super::path::{SignString, StateString};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Vert {
    Boundary,
    Internal,
    Dead,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Edge {
    pub(crate) v: [usize; 2],
    /// Directed `v[0] -> v[1]` when set. Meaningless for boundary arcs.
    pub(crate) forward: bool,
    pub(crate) alive: bool,
}

/// An annular SL(3) web. See the module documentation for the encoding.
#[derive(Clone, Debug)]
pub struct Web {
    pub(crate) verts: Vec<Vert>,
    pub(crate) edges: Vec<Edge>,
    /// Cyclic clockwise list of incident `(edge, end)` pairs per vertex.
    pub(crate) rot: Vec<Vec<(usize, usize)>>,
    /// Number of boundary points; arcs are edges `0..n`.
    pub(crate) n: usize,
    /// Disjoint contractible circles.
    pub(crate) circles: usize,
    /// Disjoint circles around the puncture.
    pub(crate) essential: usize,
    /// Half-edge `(edge, end)` on the puncture face; `None` only for the
    /// empty web.
    pub(crate) punct: Option<(usize, usize)>,
}

/// The faces of a web, traced deterministically.
#[derive(Clone, Debug)]
pub struct Faces {
    /// Half-edges of each face in cyclic order; half `2e + end` is based at
    /// `v[end]` of edge `e`.
    pub halves: Vec<Vec<usize>>,
    /// Face index of each half-edge (`usize::MAX` on dead edges).
    pub of: Vec<usize>,
}

impl Faces {
    /// Number of sides that are web edges (arcs of the boundary circle do
    /// not count).
    pub fn web_sides(&self, web: &Web, face: usize) -> usize {
        self.halves[face]
            .iter()
            .filter(|&&h| !web.is_arc(h / 2))
            .count()
    }
}

impl Web {
    /// The empty web: no boundary points, no edges; the puncture sits in the
    /// single face.
    pub fn empty() -> Web {
        Web {
            verts: Vec::new(),
            edges: Vec::new(),
            rot: Vec::new(),
            n: 0,
            circles: 0,
            essential: 0,
            punct: None,
        }
    }

    /// A bare boundary circle with `n` marked points and no web yet; used by
    /// the growth algorithm, which attaches one leg per boundary vertex.
    pub(crate) fn boundary_only(n: usize) -> Web {
        let mut web = Web::empty();
        web.n = n;
        for _ in 0..n {
            web.verts.push(Vert::Boundary);
            web.rot.push(Vec::new());
        }
        for k in 0..n {
            web.edges.push(Edge {
                v: [k, (k + 1) % n],
                forward: true,
                alive: true,
            });
        }
        for k in 0..n {
            let left = (k + n - 1) % n;
            // Clockwise: arc towards the previous point, arc towards the
            // next, then the leg (added later by the caller).
            web.rot[k] = vec![(left, 1), (k, 0)];
        }
        web
    }

    pub fn boundary_len(&self) -> usize {
        self.n
    }

    pub fn contractible_circles(&self) -> usize {
        self.circles
    }

    pub fn essential_circles(&self) -> usize {
        self.essential
    }

    /// Indices of the live web edges, excluding the boundary arcs.
    pub fn live_web_edges(&self) -> Vec<usize> {
        (self.n..self.edges.len()).filter(|&e| self.edges[e].alive).collect()
    }

    pub(crate) fn is_arc(&self, e: usize) -> bool {
        e < self.n
    }

    pub(crate) fn base(&self, e: usize, end: usize) -> usize {
        self.edges[e].v[end]
    }

    /// Whether the half `(e, end)` points away from its base vertex.
    pub(crate) fn directed_away(&self, e: usize, end: usize) -> bool {
        self.edges[e].forward == (end == 0)
    }

    fn succ(&self, e: usize, end: usize) -> (usize, usize) {
        let v = self.base(e, end);
        let list = &self.rot[v];
        let pos = list
            .iter()
            .position(|&x| x == (e, end))
            .expect("half-edge listed at its base vertex");
        list[(pos + 1) % list.len()]
    }

    /// Face successor of a half-edge.
    fn next_on_face(&self, e: usize, end: usize) -> (usize, usize) {
        self.succ(e, 1 - end)
    }

    /// Trace all faces, in order of their smallest half-edge.
    pub fn faces(&self) -> Faces {
        let mut of = vec![usize::MAX; 2 * self.edges.len()];
        let mut halves = Vec::new();
        for h0 in 0..2 * self.edges.len() {
            if !self.edges[h0 / 2].alive || of[h0] != usize::MAX {
                continue;
            }
            let id = halves.len();
            let mut cycle = Vec::new();
            let (mut e, mut end) = (h0 / 2, h0 % 2);
            loop {
                let h = 2 * e + end;
                debug_assert_eq!(of[h], usize::MAX);
                of[h] = id;
                cycle.push(h);
                let (ne, nend) = self.next_on_face(e, end);
                if 2 * ne + nend == h0 {
                    break;
                }
                e = ne;
                end = nend;
            }
            halves.push(cycle);
        }
        Faces { halves, of }
    }

    /// Face on the annulus side of boundary arc `k`.
    pub fn inner_face_of_arc(&self, faces: &Faces, k: usize) -> usize {
        faces.of[2 * k + 1]
    }

    /// The face outside the boundary circle (undefined for the empty web).
    pub(crate) fn outside_face(&self, faces: &Faces) -> usize {
        faces.of[0]
    }

    pub(crate) fn punct_face(&self, faces: &Faces) -> Option<usize> {
        self.punct.map(|(e, end)| faces.of[2 * e + end])
    }

    /// Boundary orientations: `+` at a point whose strand is directed away
    /// from the boundary.
    pub fn signs(&self) -> SignString {
        let mut out = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let (e, end) = self.rot[k][2];
            out.push(if self.directed_away(e, end) { 1 } else { -1 });
        }
        SignString(out)
    }

    /// Face depths: the minimal number of web edges a path from the puncture
    /// must cross to reach each face. The boundary circle cannot be crossed,
    /// so the face outside it stays at `None`.
    pub fn depths(&self, faces: &Faces) -> Vec<Option<usize>> {
        let mut depth = vec![None; faces.halves.len()];
        let Some(start) = self.punct_face(faces) else {
            return depth;
        };
        depth[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let d = depth[f].unwrap();
            for &h in &faces.halves[f] {
                let e = h / 2;
                if self.is_arc(e) {
                    continue;
                }
                let g = faces.of[h ^ 1];
                if depth[g].is_none() {
                    depth[g] = Some(d + 1);
                    queue.push_back(g);
                }
            }
        }
        depth
    }

    /// The minimal cut path algorithm: the sign string read from the
    /// boundary and the state string of depth differences across each
    /// boundary point.
    pub fn min_cut_states(&self) -> Result<(SignString, StateString), String> {
        self.nonelliptic_witness().map_err(|w| format!("elliptic web: {}", w))?;
        if self.n == 0 {
            return Ok((SignString(Vec::new()), StateString(Vec::new())));
        }
        let faces = self.faces();
        let depth = self.depths(&faces);
        let d = |k: usize| -> Result<i64, String> {
            let f = self.inner_face_of_arc(&faces, k % self.n);
            depth[f]
                .map(|x| x as i64)
                .ok_or_else(|| "face unreachable from the puncture".into())
        };
        let mut states = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let right = d(k)?;
            let left = d((k + self.n - 1) % self.n)?;
            let j = right - left;
            if !(-1..=1).contains(&j) {
                return Err(format!("depth jump {} at boundary point {}", j, k));
            }
            states.push(j as i8);
        }
        Ok((self.signs(), StateString(states)))
    }

    /// `Ok` when the web is non-elliptic; otherwise a description of the
    /// first offending feature (circle, contractible bigon or square, or a
    /// closed component).
    pub fn nonelliptic_witness(&self) -> Result<(), String> {
        if self.essential > 0 {
            return Err(format!("{} essential circle(s)", self.essential));
        }
        if self.circles > 0 {
            return Err(format!("{} contractible circle(s)", self.circles));
        }
        // Closed components: vertices unreachable from the boundary.
        let reachable = self.reachable_from_boundary();
        if let Some(v) = (0..self.verts.len())
            .find(|&v| self.verts[v] != Vert::Dead && !reachable[v])
        {
            return Err(format!("closed component through vertex {}", v));
        }
        let faces = self.faces();
        let punct = self.punct_face(&faces);
        for f in 0..faces.halves.len() {
            if Some(f) == punct {
                continue;
            }
            if faces.halves[f].iter().any(|&h| self.is_arc(h / 2)) {
                continue;
            }
            let sides = faces.halves[f].len();
            if sides == 2 || sides == 4 {
                return Err(format!(
                    "inner face {} with {} sides away from the puncture",
                    f, sides
                ));
            }
        }
        Ok(())
    }

    pub fn is_nonelliptic(&self) -> bool {
        self.nonelliptic_witness().is_ok()
    }

    pub(crate) fn reachable_from_boundary(&self) -> Vec<bool> {
        let mut seen = vec![false; self.verts.len()];
        let mut queue: VecDeque<usize> = (0..self.n).collect();
        for &k in queue.iter() {
            seen[k] = true;
        }
        if self.n == 0 {
            return seen;
        }
        while let Some(v) = queue.pop_front() {
            for &(e, end) in &self.rot[v] {
                let w = self.base(e, 1 - end);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Whether the web graph itself (boundary circle excluded) is connected.
    pub fn web_connected(&self) -> bool {
        let mut seen = vec![false; self.verts.len()];
        let start = match (0..self.verts.len()).find(|&v| {
            self.verts[v] != Vert::Dead
                && self.rot[v].iter().any(|&(e, _)| !self.is_arc(e))
        }) {
            Some(v) => v,
            None => return true,
        };
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(e, end) in &self.rot[v] {
                if self.is_arc(e) {
                    continue;
                }
                let w = self.base(e, 1 - end);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        (0..self.verts.len()).all(|v| {
            self.verts[v] == Vert::Dead
                || seen[v]
                || self.rot[v].iter().all(|&(e, _)| self.is_arc(e))
        })
    }

    /// Internal vertex, edge and face counts `(v_i, e_i, e_b, f_i, f_b)`:
    /// web edges split by boundary contact, faces split by boundary contact
    /// with the outside of the circle excluded.
    pub fn census(&self) -> (usize, usize, usize, usize, usize) {
        let v_i = self
            .verts
            .iter()
            .filter(|&&v| v == Vert::Internal)
            .count();
        let (mut e_i, mut e_b) = (0, 0);
        for (e, edge) in self.edges.iter().enumerate() {
            if !edge.alive || self.is_arc(e) {
                continue;
            }
            if edge.v.iter().any(|&v| self.verts[v] == Vert::Boundary) {
                e_b += 1;
            } else {
                e_i += 1;
            }
        }
        let faces = self.faces();
        let outside = if self.n > 0 {
            Some(self.outside_face(&faces))
        } else {
            None
        };
        let (mut f_i, mut f_b) = (0, 0);
        for f in 0..faces.halves.len() {
            if Some(f) == outside {
                continue;
            }
            if faces.halves[f].iter().any(|&h| self.is_arc(h / 2)) {
                f_b += 1;
            } else {
                f_i += 1;
            }
        }
        (v_i, e_i, e_b, f_i, f_b)
    }

    /// Euler identities for a connected web. These reduce to
    /// `e_i = v_i + f_i - 1` and `v_i = 2 f_i + f_b - 2` when every web edge
    /// touching the boundary has its other end internal; a strand joining
    /// two boundary points shifts both by the difference `f_b - e_b`.
    pub fn euler_identities(&self) -> Result<(), String> {
        if !self.web_connected() {
            return Err("web is not connected".into());
        }
        let (v_i, e_i, e_b, f_i, f_b) = self.census();
        let (v_i, e_i, e_b, f_i, f_b) =
            (v_i as i64, e_i as i64, e_b as i64, f_i as i64, f_b as i64);
        if e_i != v_i + f_i - 1 + (f_b - e_b) {
            return Err(format!(
                "edge identity fails: e_i={} v_i={} f_i={} e_b={} f_b={}",
                e_i, v_i, f_i, e_b, f_b
            ));
        }
        if v_i != 2 * f_i + 2 * f_b - self.n as i64 - 2 {
            return Err(format!(
                "vertex identity fails: v_i={} f_i={} f_b={} n={}",
                v_i, f_i, f_b, self.n
            ));
        }
        Ok(())
    }

    /// Whether an outer face of a connected web away from the puncture has
    /// one, two or three web sides.
    pub fn has_outer_u_y_or_h(&self) -> bool {
        let faces = self.faces();
        let punct = self.punct_face(&faces);
        let outside = if self.n > 0 {
            Some(self.outside_face(&faces))
        } else {
            None
        };
        (0..faces.halves.len()).any(|f| {
            Some(f) != punct
                && Some(f) != outside
                && faces.halves[f].iter().any(|&h| self.is_arc(h / 2))
                && (1..=3).contains(&faces.web_sides(self, f))
        })
    }

    /// The canonical flow: the set of unbalanced web edges, where an edge is
    /// balanced when the faces on its two sides have equal depth. Errors if
    /// some internal vertex does not abut exactly one balanced edge, which
    /// happens only on elliptic input.
    pub fn canonical_flow(&self) -> Result<Vec<usize>, String> {
        let faces = self.faces();
        let depth = self.depths(&faces);
        let balanced = |e: usize| -> bool {
            depth[faces.of[2 * e]] == depth[faces.of[2 * e + 1]]
        };
        for v in 0..self.verts.len() {
            if self.verts[v] != Vert::Internal {
                continue;
            }
            let count = self
                .rot[v]
                .iter()
                .filter(|&&(e, _)| balanced(e))
                .count();
            if count != 1 {
                return Err(format!(
                    "vertex {} abuts {} balanced edges",
                    v, count
                ));
            }
        }
        let flow: Vec<usize> = (self.n..self.edges.len())
            .filter(|&e| self.edges[e].alive && !balanced(e))
            .collect();
        // The flow support must be a union of arcs and loops: every internal
        // vertex keeps exactly two of its edges.
        for v in 0..self.verts.len() {
            if self.verts[v] == Vert::Internal {
                let deg = self
                    .rot[v]
                    .iter()
                    .filter(|&&(e, _)| flow.binary_search(&e).is_ok())
                    .count();
                if deg != 2 {
                    return Err(format!("flow degree {} at vertex {}", deg, v));
                }
            }
        }
        Ok(flow)
    }

    /// A canonical description of the web with the boundary fixed pointwise:
    /// equal strings exactly for webs related by an isotopy of the annulus
    /// that restricts to the identity on the boundary circle.
    pub fn canonical_form(&self) -> String {
        use std::fmt::Write;
        let mut label = vec![usize::MAX; self.verts.len()];
        let mut entry = vec![usize::MAX; self.verts.len()];
        let mut order = Vec::new();
        for k in 0..self.n {
            label[k] = order.len();
            entry[k] = 0;
            order.push(k);
        }
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            let list = &self.rot[v];
            for t in 0..list.len() {
                let (e, end) = list[(entry[v] + t) % list.len()];
                let w = self.base(e, 1 - end);
                if label[w] == usize::MAX {
                    label[w] = order.len();
                    entry[w] = self.rot[w]
                        .iter()
                        .position(|&x| x == (e, 1 - end))
                        .unwrap();
                    order.push(w);
                }
            }
        }
        let mut out = String::new();
        let unreached = (0..self.verts.len())
            .filter(|&v| self.verts[v] != Vert::Dead && label[v] == usize::MAX)
            .count();
        write!(out, "n={};c={};e={};u={};", self.n, self.circles, self.essential, unreached)
            .unwrap();
        let half_key = |e: usize, end: usize| -> (usize, usize) {
            let v = self.base(e, end);
            let slot = self.rot[v].iter().position(|&x| x == (e, end)).unwrap();
            let k = (slot + self.rot[v].len() - entry[v]) % self.rot[v].len();
            (label[v], k)
        };
        for (li, &v) in order.iter().enumerate() {
            let kind = if self.verts[v] == Vert::Boundary { 'b' } else { 'i' };
            write!(out, "{}{}[", kind, li).unwrap();
            let list = &self.rot[v];
            for t in 0..list.len() {
                let (e, end) = list[(entry[v] + t) % list.len()];
                let (lw, slot) = half_key(e, 1 - end);
                let dir = if self.is_arc(e) {
                    'o'
                } else if self.directed_away(e, end) {
                    '>'
                } else {
                    '<'
                };
                write!(out, "{}{}@{},", dir, lw, slot).unwrap();
            }
            out.push_str("];");
        }
        match self.punct {
            None => out.push_str("p=none"),
            Some((e, end)) => {
                // The puncture face, keyed by its smallest labelled half.
                let faces = self.faces();
                let f = faces.of[2 * e + end];
                let key = faces.halves[f]
                    .iter()
                    .map(|&h| half_key(h / 2, h % 2))
                    .min()
                    .unwrap();
                write!(out, "p={}@{}", key.0, key.1).unwrap();
            }
        }
        out
    }

    /// Structural validation: trivalent source/sink internal vertices,
    /// univalent boundary vertices, consistent rotation lists, and a live
    /// puncture anchor off the outside face.
    pub fn check(&self) -> Result<(), String> {
        for v in 0..self.verts.len() {
            match self.verts[v] {
                Vert::Dead => {
                    if !self.rot[v].is_empty() {
                        return Err(format!("dead vertex {} keeps edges", v));
                    }
                }
                Vert::Boundary => {
                    if v >= self.n {
                        return Err(format!("boundary vertex {} out of range", v));
                    }
                    if self.rot[v].len() != 3 {
                        return Err(format!("boundary vertex {} not trivalent in the map", v));
                    }
                    let (e, end) = self.rot[v][2];
                    if self.is_arc(e) || self.base(e, end) != v {
                        return Err(format!("bad leg at boundary vertex {}", v));
                    }
                }
                Vert::Internal => {
                    if self.rot[v].len() != 3 {
                        return Err(format!("internal vertex {} not trivalent", v));
                    }
                    let mut away = 0;
                    for &(e, end) in &self.rot[v] {
                        if self.is_arc(e) {
                            return Err(format!("arc at internal vertex {}", v));
                        }
                        if self.base(e, end) != v {
                            return Err(format!("rotation entry of {} not based there", v));
                        }
                        if self.directed_away(e, end) {
                            away += 1;
                        }
                    }
                    if away != 0 && away != 3 {
                        return Err(format!("vertex {} is neither source nor sink", v));
                    }
                }
            }
            for &(e, _) in &self.rot[v] {
                if !self.edges[e].alive {
                    return Err(format!("dead edge {} listed at vertex {}", e, v));
                }
            }
        }
        for (e, edge) in self.edges.iter().enumerate() {
            if !edge.alive {
                continue;
            }
            for end in 0..2 {
                let v = edge.v[end];
                if self.verts[v] == Vert::Dead {
                    return Err(format!("edge {} touches dead vertex {}", e, v));
                }
                if !self.rot[v].contains(&(e, end)) {
                    return Err(format!("edge {} end {} missing from rotation", e, end));
                }
            }
        }
        match self.punct {
            None => {
                if self.edges.iter().any(|e| e.alive) {
                    return Err("nonempty web without a puncture anchor".into());
                }
            }
            Some((e, _)) => {
                if !self.edges[e].alive {
                    return Err("puncture anchor on a dead edge".into());
                }
                if self.n > 0 {
                    let faces = self.faces();
                    if self.punct_face(&faces) == Some(self.outside_face(&faces)) {
                        return Err("puncture anchored outside the boundary circle".into());
                    }
                }
            }
        }
        Ok(())
    }
}

/// Serialized form of a web. Half-edge `2i + end` belongs to the `i`-th
/// entry of `edges` in the emitted order; `next` steps clockwise around the
/// base vertex among web half-edges only, and the boundary circle is
/// reconstructed from `boundary_order`.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct WebJson {
    pub schema: String,
    pub vertices: Vec<VertexJson>,
    pub half_edges: Vec<HalfEdgeJson>,
    pub boundary_order: Vec<usize>,
    pub puncture_face: Option<usize>,
    #[serde(default)]
    pub circles: usize,
    #[serde(default)]
    pub essential_circles: usize,
}

#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct VertexJson {
    #[serde(rename = "type")]
    pub kind: String,
}

#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct HalfEdgeJson {
    pub vertex: usize,
    pub next: usize,
    pub twin: usize,
    pub orient: i8,
}

pub const SCHEMA: &str = "annular-webs/v1";

impl Web {
    pub fn to_json(&self) -> WebJson {
        let mut vmap = vec![usize::MAX; self.verts.len()];
        let mut vertices = Vec::new();
        for v in 0..self.verts.len() {
            if self.verts[v] != Vert::Dead {
                vmap[v] = vertices.len();
                vertices.push(VertexJson {
                    kind: match self.verts[v] {
                        Vert::Boundary => "boundary".into(),
                        Vert::Internal => {
                            let away = self
                                .rot[v]
                                .iter()
                                .filter(|&&(e, end)| self.directed_away(e, end))
                                .count();
                            if away == 3 { "source".into() } else { "sink".into() }
                        }
                        Vert::Dead => unreachable!(),
                    },
                });
            }
        }
        let mut emap = vec![usize::MAX; self.edges.len()];
        let mut edge_order = Vec::new();
        for e in self.n..self.edges.len() {
            if self.edges[e].alive {
                emap[e] = edge_order.len();
                edge_order.push(e);
            }
        }
        let half = |e: usize, end: usize| 2 * emap[e] + end;
        let mut half_edges = Vec::new();
        for &e in &edge_order {
            for end in 0..2 {
                let v = self.base(e, end);
                // Next web half-edge clockwise around v.
                let list = &self.rot[v];
                let pos = list.iter().position(|&x| x == (e, end)).unwrap();
                let mut next = (e, end);
                for t in 1..=list.len() {
                    let cand = list[(pos + t) % list.len()];
                    if !self.is_arc(cand.0) {
                        next = cand;
                        break;
                    }
                }
                half_edges.push(HalfEdgeJson {
                    vertex: vmap[v],
                    next: half(next.0, next.1),
                    twin: half(e, 1 - end),
                    orient: if self.directed_away(e, end) { 1 } else { -1 },
                });
            }
        }
        let puncture_face = self.punct.map(|(e, end)| {
            let faces = self.faces();
            let f = faces.of[2 * e + end];
            // Face index in the serialized numbering: faces ordered by their
            // smallest serialized half-edge; faces made only of arcs get no
            // serialized half and sort last by original index.
            let mut keyed: Vec<(usize, usize)> = (0..faces.halves.len())
                .map(|g| {
                    let key = faces.halves[g]
                        .iter()
                        .filter(|&&h| !self.is_arc(h / 2))
                        .map(|&h| half(h / 2, h % 2))
                        .min()
                        .unwrap_or(usize::MAX);
                    (key, g)
                })
                .collect();
            keyed.sort();
            keyed.iter().position(|&(_, g)| g == f).unwrap()
        });
        WebJson {
            schema: SCHEMA.into(),
            vertices,
            half_edges,
            boundary_order: (0..self.n).collect(),
            puncture_face,
            circles: self.circles,
            essential_circles: self.essential,
        }
    }

    pub fn from_json(json: &WebJson) -> Result<Web, String> {
        if json.schema != SCHEMA {
            return Err(format!("unsupported schema {:?}", json.schema));
        }
        let n = json.boundary_order.len();
        if json.half_edges.len() % 2 != 0 {
            return Err("odd number of half-edges".into());
        }
        let m = json.half_edges.len() / 2;
        let mut web = Web::boundary_only(n);
        // Boundary vertices come first in the serialized numbering.
        for (k, &b) in json.boundary_order.iter().enumerate() {
            if b != k {
                return Err("boundary_order must list vertices 0..n in order".into());
            }
        }
        for (v, vj) in json.vertices.iter().enumerate() {
            match (v < n, vj.kind.as_str()) {
                (true, "boundary") => {}
                (false, "source") | (false, "sink") => {
                    web.verts.push(Vert::Internal);
                    web.rot.push(Vec::new());
                }
                _ => return Err(format!("vertex {} has unexpected type {:?}", v, vj.kind)),
            }
        }
        for i in 0..m {
            let h0 = &json.half_edges[2 * i];
            let h1 = &json.half_edges[2 * i + 1];
            if h0.twin != 2 * i + 1 || h1.twin != 2 * i {
                return Err(format!("edge {} has inconsistent twins", i));
            }
            if h0.orient == h1.orient {
                return Err(format!("edge {} has inconsistent orientations", i));
            }
            web.edges.push(Edge {
                v: [h0.vertex, h1.vertex],
                forward: h0.orient == 1,
                alive: true,
            });
        }
        // Rebuild rotations from the `next` cycles.
        let mut placed = vec![false; 2 * m];
        for h in 0..2 * m {
            if placed[h] {
                continue;
            }
            let v = json.half_edges[h].vertex;
            let mut cycle = Vec::new();
            let mut cur = h;
            loop {
                if json.half_edges[cur].vertex != v {
                    return Err("a next-cycle leaves its vertex".into());
                }
                placed[cur] = true;
                cycle.push((n + cur / 2, cur % 2));
                cur = json.half_edges[cur].next;
                if cur == h {
                    break;
                }
            }
            if v < n {
                if cycle.len() != 1 {
                    return Err(format!("boundary vertex {} needs exactly one leg", v));
                }
                web.rot[v].push(cycle[0]);
            } else {
                if !web.rot[v].is_empty() {
                    return Err(format!("vertex {} has two rotation cycles", v));
                }
                web.rot[v] = cycle;
            }
        }
        web.circles = json.circles;
        web.essential = json.essential_circles;
        // Recover the puncture anchor from the serialized face index.
        web.punct = match json.puncture_face {
            None => None,
            Some(fi) => {
                let faces = web.faces();
                let mut keyed: Vec<(usize, usize)> = (0..faces.halves.len())
                    .map(|g| {
                        let key = faces.halves[g]
                            .iter()
                            .filter(|&&h| !web.is_arc(h / 2))
                            .map(|&h| {
                                let (e, end) = (h / 2, h % 2);
                                2 * (e - n) + end
                            })
                            .min()
                            .unwrap_or(usize::MAX);
                        (key, g)
                    })
                    .collect();
                keyed.sort();
                let f = keyed
                    .get(fi)
                    .map(|&(_, g)| g)
                    .ok_or_else(|| "puncture face index out of range".to_string())?;
                let h = *faces.halves[f]
                    .iter()
                    .find(|&&h| !web.is_arc(h / 2))
                    .ok_or_else(|| "puncture face has no web side".to_string())?;
                Some((h / 2, h % 2))
            }
        };
        web.check()?;
        Ok(web)
    }
}

#[cfg(test)]
mod tests {
    use super::super::path::StateString;
    use super::*;

    /// The cap joining the two boundary points of `(+,-)`; `wrap` routes it
    /// the long way around the puncture.
    pub(crate) fn u_web(wrap: bool) -> Web {
        let mut web = Web::boundary_only(2);
        web.edges.push(Edge {
            v: [0, 1],
            forward: true,
            alive: true,
        });
        web.rot[0].push((2, 0));
        web.rot[1].push((2, 1));
        // The open region lies on the side of the half based at the
        // right-hand strand of the cap.
        web.punct = Some(if wrap { (2, 0) } else { (2, 1) });
        web.check().unwrap();
        web
    }

    #[test]
    fn the_u_web_has_three_faces() {
        let web = u_web(false);
        let faces = web.faces();
        assert_eq!(faces.halves.len(), 3);
        let depth = web.depths(&faces);
        let pocket = web.inner_face_of_arc(&faces, 0);
        let open = web.inner_face_of_arc(&faces, 1);
        assert_eq!(depth[pocket], Some(1));
        assert_eq!(depth[open], Some(0));
        assert!(depth[web.outside_face(&faces)].is_none());
    }

    #[test]
    fn min_cut_states_of_the_two_caps() {
        let (s, j) = u_web(false).min_cut_states().unwrap();
        assert_eq!(s.0, vec![1, -1]);
        assert_eq!(j, StateString(vec![1, -1]));
        let (s, j) = u_web(true).min_cut_states().unwrap();
        assert_eq!(s.0, vec![1, -1]);
        assert_eq!(j, StateString(vec![-1, 1]));
    }

    #[test]
    fn the_two_caps_differ_only_by_the_puncture_face()  {
        let a = u_web(false);
        let b = u_web(true);
        assert_ne!(a.canonical_form(), b.canonical_form());
        assert!(a.is_nonelliptic() && b.is_nonelliptic());
        a.euler_identities().unwrap();
    }

    #[test]
    fn empty_web_basics() {
        let web = Web::empty();
        assert!(web.is_nonelliptic());
        let (s, j) = web.min_cut_states().unwrap();
        assert!(s.is_empty() && j.0.is_empty());
        assert_eq!(web.faces().halves.len(), 0);
    }

    #[test]
    fn json_round_trip_of_the_cap() {
        for wrap in [false, true] {
            let web = u_web(wrap);
            let json = web.to_json();
            let text = serde_json::to_string(&json).unwrap();
            let back: WebJson = serde_json::from_str(&text).unwrap();
            let rebuilt = Web::from_json(&back).unwrap();
            assert_eq!(web.canonical_form(), rebuilt.canonical_form());
        }
    }
}
