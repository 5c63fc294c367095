//! Skein reduction of elliptic annular webs.
//!
//! Circle, bigon and square faces away from the puncture are rewritten by
//! the local relations: a contractible circle contributes `[3]`, a bigon
//! collapses to a strand with coefficient `[2]`, and a square splits into
//! the sum of its two leg pairings. The result is a linear combination of
//! non-elliptic webs, recorded by their boundary data since the minimal cut
//! path map identifies each of them with an admissible `(sign, state)`
//! pair.
//!
//! A circle around the puncture has no local evaluation here; reduction
//! refuses it unless the caller supplies a replacement coefficient.

use super::path::{SignString, StateString};
use super::web::{Edge, Faces, Vert, Web};
use crate::ring::LaurentQA;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::collections::HashSet;
use std::collections::VecDeque;

/// A linear combination of non-elliptic webs, keyed by boundary data.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SkeinVector(pub BTreeMap<(SignString, StateString), LaurentQA>);

impl SkeinVector {
    pub fn zero() -> Self {
        SkeinVector(BTreeMap::new())
    }

    pub fn add(&mut self, key: (SignString, StateString), value: &LaurentQA) {
        let slot = self.0.entry(key).or_insert_with(LaurentQA::zero);
        *slot += value;
        if slot.is_zero() {
            // Entries are pruned so that equal vectors compare equal.
            let key = self
                .0
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .unwrap();
            self.0.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// Reduce with the deterministic face order: the elliptic face with the
/// smallest index at every step.
pub fn reduce(web: &Web, essential_value: Option<&LaurentQA>) -> Result<SkeinVector, String> {
    run(web, essential_value, None)
}

/// Reduce, picking a uniformly random elliptic face at every step.
pub fn reduce_random(
    web: &Web,
    essential_value: Option<&LaurentQA>,
    seed: u64,
) -> Result<SkeinVector, String> {
    run(web, essential_value, Some(ChaCha8Rng::seed_from_u64(seed)))
}

fn run(
    web: &Web,
    essential_value: Option<&LaurentQA>,
    mut rng: Option<ChaCha8Rng>,
) -> Result<SkeinVector, String> {
    let mut out = SkeinVector::zero();
    let mut queue = vec![(web.clone(), LaurentQA::one())];
    let mut steps = 0usize;
    while let Some((mut w, mut coeff)) = queue.pop() {
        steps += 1;
        if steps > 100_000 {
            return Err("reduction exceeded the step bound".into());
        }
        if w.circles > 0 {
            coeff = &coeff * &LaurentQA::bracket3().pow(w.circles as u32);
            w.circles = 0;
        }
        if w.essential > 0 {
            match essential_value {
                Some(value) => {
                    coeff = &coeff * &value.pow(w.essential as u32);
                    w.essential = 0;
                }
                None => {
                    return Err(
                        "a circle around the puncture has no local relation; \
                         supply a replacement value to reduce it"
                            .into(),
                    );
                }
            }
        }
        if w.n == 0 && w.edges.iter().any(|e| e.alive) {
            return Err("closed webs without boundary endpoints are unsupported".into());
        }
        let faces = w.faces();
        let punct = w.punct_face(&faces);
        let mut candidates: Vec<usize> = (0..faces.halves.len())
            .filter(|&f| {
                Some(f) != punct
                    && faces.halves[f].iter().all(|&h| !w.is_arc(h / 2))
                    && matches!(faces.halves[f].len(), 2 | 4)
            })
            .collect();
        if candidates.is_empty() {
            let key = w.min_cut_states()?;
            out.add(key, &coeff);
            continue;
        }
        if let Some(r) = rng.as_mut() {
            candidates.shuffle(r);
        }
        // A square whose resolution would split off a winding piece is
        // postponed; by confluence any other elliptic face serves as well.
        let mut advanced = false;
        for f in candidates {
            if faces.halves[f].len() == 2 {
                collapse_bigon(&mut w, &faces, f, false)?;
                queue.push((w, &coeff * &LaurentQA::bracket2()));
                advanced = true;
                break;
            }
            match resolve_square(&w, &faces, f)? {
                SquareOutcome::Resolved([(a, fa), (b, fb)]) => {
                    queue.push((a, &coeff * &fa));
                    queue.push((b, &coeff * &fb));
                    advanced = true;
                    break;
                }
                SquareOutcome::WindingPiece => continue,
            }
        }
        if !advanced {
            return Err(
                "every remaining elliptic face splits off a piece winding \
                 the puncture"
                    .into(),
            );
        }
    }
    Ok(out)
}

/// Move the puncture anchor off the edges about to be deleted. The regions
/// they separate merge, so any surviving half-edge reachable by crossing
/// only dying edges marks the same region.
fn rescue_anchor(web: &mut Web, faces: &Faces, dying: &HashSet<usize>) -> Result<(), String> {
    let Some((e, _)) = web.punct else {
        return Ok(());
    };
    if !dying.contains(&e) {
        return Ok(());
    }
    let start = web.punct_face(faces).unwrap();
    let mut seen = vec![false; faces.halves.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for &h in &faces.halves[f] {
            if !dying.contains(&(h / 2)) {
                web.punct = Some((h / 2, h % 2));
                return Ok(());
            }
            let g = faces.of[h ^ 1];
            if !seen[g] {
                seen[g] = true;
                queue.push_back(g);
            }
        }
    }
    Err("the puncture region is bounded only by deleted edges".into())
}

/// Splice out every 2-valent vertex left by a rewrite. A joint whose two
/// halves belong to one edge is a circle pinching off; in sphere mode (used
/// for closed components in a disk) it is always contractible, while in the
/// annulus such circles are classified before they disconnect, so meeting
/// one here means a case the resolution missed.
fn smooth(web: &mut Web, sphere: bool) -> Result<(), String> {
    loop {
        let Some(v) = (0..web.verts.len())
            .find(|&v| web.verts[v] == Vert::Internal && web.rot[v].len() == 2)
        else {
            return Ok(());
        };
        let (e, a) = web.rot[v][0];
        let (f, b) = web.rot[v][1];
        if e == f {
            if !sphere {
                return Err("a circle pinched off after losing its embedding".into());
            }
            web.circles += 1;
            web.edges[e].alive = false;
            web.rot[v].clear();
            web.verts[v] = Vert::Dead;
            continue;
        }
        if web.directed_away(e, a) == web.directed_away(f, b) {
            return Err(format!("inconsistent strand directions at vertex {}", v));
        }
        // Keep `e`; its end at `v` takes over `f`'s far attachment.
        if let Some((pe, pend)) = web.punct {
            if pe == f {
                let faces = web.faces();
                let target = faces.of[2 * f + pend];
                let end = (0..2)
                    .find(|&end| faces.of[2 * e + end] == target)
                    .ok_or("spliced strand does not bound the puncture face")?;
                web.punct = Some((e, end));
            }
        }
        let y = web.edges[f].v[1 - b];
        let slot = web.rot[y]
            .iter()
            .position(|&x| x == (f, 1 - b))
            .ok_or("far half missing from its rotation")?;
        web.rot[y][slot] = (e, a);
        web.edges[e].v[a] = y;
        web.edges[f].alive = false;
        web.rot[v].clear();
        web.verts[v] = Vert::Dead;
    }
}

/// Whether a circle winds around the puncture. The circle is described by
/// wall edges approximating it in the still-connected map; it is essential
/// exactly when the puncture region cannot reach the boundary without
/// crossing a wall.
fn circle_is_essential(web: &Web, faces: &Faces, walls: &[usize]) -> Result<bool, String> {
    if web.n == 0 {
        return Err("cannot classify a circle without boundary endpoints".into());
    }
    let start = web
        .punct_face(faces)
        .ok_or("pinched circle in a web without a puncture")?;
    let mut seen = vec![false; faces.halves.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for &h in &faces.halves[f] {
            if web.is_arc(h / 2) {
                return Ok(false);
            }
            if walls.contains(&(h / 2)) {
                continue;
            }
            let g = faces.of[h ^ 1];
            if !seen[g] {
                seen[g] = true;
                queue.push_back(g);
            }
        }
    }
    Ok(true)
}

fn collapse_bigon(web: &mut Web, faces: &Faces, f: usize, sphere: bool) -> Result<(), String> {
    let [h1, h2] = faces.halves[f][..] else {
        return Err("not a bigon".into());
    };
    let (e1, e2) = (h1 / 2, h2 / 2);
    if e1 == e2 {
        return Err("degenerate bigon on a single edge".into());
    }
    let u = web.base(e1, h1 % 2);
    let v = web.base(e2, h2 % 2);
    if web.verts[u] != Vert::Internal || web.verts[v] != Vert::Internal {
        return Err("bigon corner on the boundary".into());
    }
    let leg = |w: &Web, c: usize| {
        w.rot[c]
            .iter()
            .copied()
            .find(|&(e, _)| e != e1 && e != e2)
            .ok_or_else(|| format!("no third edge at bigon corner {}", c))
    };
    let gu = leg(web, u)?;
    let gv = leg(web, v)?;
    if gu.0 == gv.0 {
        // A theta component: collapsing its bigon leaves a bare circle. On
        // the annulus it would already have been classified and split off.
        if !sphere {
            return Err("closed theta component lost its embedding".into());
        }
        web.edges[e1].alive = false;
        web.edges[e2].alive = false;
        web.edges[gu.0].alive = false;
        for c in [u, v] {
            web.rot[c].clear();
            web.verts[c] = Vert::Dead;
        }
        web.circles += 1;
        return Ok(());
    }
    rescue_anchor(web, faces, &HashSet::from([e1, e2]))?;
    web.edges[e1].alive = false;
    web.edges[e2].alive = false;
    // `v` becomes the 2-valent joint of the two legs; smoothing splices it.
    web.edges[gu.0].v[gu.1] = v;
    web.rot[v] = vec![gu, gv];
    web.rot[u].clear();
    web.verts[u] = Vert::Dead;
    smooth(web, sphere)
}

/// The sides, corners and legs of a square face, with the degenerate
/// layouts ruled out.
fn square_frame(
    web: &Web,
    faces: &Faces,
    f: usize,
) -> Result<([usize; 4], [usize; 4], [(usize, usize); 4]), String> {
    let halves = &faces.halves[f];
    if halves.len() != 4 {
        return Err("not a square".into());
    }
    let mut edges = [0usize; 4];
    let mut corners = [0usize; 4];
    for (i, &h) in halves.iter().enumerate() {
        edges[i] = h / 2;
        corners[i] = web.base(h / 2, h % 2);
    }
    let mut distinct = edges.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != 4 {
        return Err("square traversing an edge twice is unsupported".into());
    }
    let mut dv = corners.to_vec();
    dv.sort();
    dv.dedup();
    if dv.len() != 4 {
        return Err("square visiting a corner twice is unsupported".into());
    }
    if corners.iter().any(|&c| web.verts[c] != Vert::Internal) {
        return Err("square corner on the boundary".into());
    }
    let mut legs = [(0usize, 0usize); 4];
    for i in 0..4 {
        legs[i] = web.rot[corners[i]]
            .iter()
            .copied()
            .find(|&(e, _)| !edges.contains(&e))
            .ok_or_else(|| format!("no leg at square corner {}", corners[i]))?;
    }
    Ok((edges, corners, legs))
}

/// Replace the square by one pairing of its legs: kill the four sides and
/// joint each leg pair at a 2-valent vertex, recording each joint's side of
/// the square so pinched-off cycles can be traced in the old embedding.
fn apply_pairing(
    w: &mut Web,
    edges: &[usize; 4],
    corners: &[usize; 4],
    legs: &[(usize, usize); 4],
    pairs: [(usize, usize); 2],
) -> Vec<(usize, usize)> {
    let mut joints = Vec::new();
    for &(i, j) in &pairs {
        let (ca, cb) = (corners[i], corners[j]);
        let (ga, gb) = (legs[i], legs[j]);
        w.edges[gb.0].v[gb.1] = ca;
        w.rot[ca] = vec![ga, gb];
        w.rot[cb].clear();
        w.verts[cb] = Vert::Dead;
        joints.push((ca, edges[i]));
    }
    for &e in edges {
        w.edges[e].alive = false;
    }
    joints
}

/// Connected components that no longer reach the boundary, as vertex sets.
fn closed_components(w: &Web) -> Vec<Vec<usize>> {
    let reach = w.reachable_from_boundary();
    let mut seen = vec![false; w.verts.len()];
    let mut out = Vec::new();
    for v0 in 0..w.verts.len() {
        if w.verts[v0] == Vert::Dead || reach[v0] || seen[v0] {
            continue;
        }
        let mut comp = vec![v0];
        seen[v0] = true;
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &(e, end) in &w.rot[v] {
                let u = w.base(e, 1 - end);
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Some simple cycle in a closed component, as a list of edges.
fn component_cycle(w: &Web, comp: &[usize]) -> Result<Vec<usize>, String> {
    let mut parent: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let start = comp[0];
    parent.insert(start, (start, usize::MAX));
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &(e, end) in &w.rot[v] {
            if e == parent[&v].1 {
                continue;
            }
            let u = w.base(e, 1 - end);
            if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry(u) {
                slot.insert((v, e));
                stack.push(u);
            } else {
                // Found a cycle: join the two tree paths to the meeting
                // point.
                let path = |mut x: usize| {
                    let mut edges = Vec::new();
                    let mut nodes = vec![x];
                    while parent[&x].0 != x {
                        edges.push(parent[&x].1);
                        x = parent[&x].0;
                        nodes.push(x);
                    }
                    (nodes, edges)
                };
                let (nv, ev) = path(v);
                let (nu, eu) = path(u);
                let meet = nv
                    .iter()
                    .find(|x| nu.contains(x))
                    .copied()
                    .ok_or("tree paths never meet")?;
                let cut = |nodes: &[usize], edges: &[usize]| -> Vec<usize> {
                    let k = nodes.iter().position(|&x| x == meet).unwrap();
                    edges[..k].to_vec()
                };
                let mut cycle = vec![e];
                cycle.extend(cut(&nv, &ev));
                cycle.extend(cut(&nu, &eu));
                return Ok(cycle);
            }
        }
    }
    Err("closed component has no cycle".into())
}

/// Split a closed component off into its own web with no boundary.
fn extract_component(w: &mut Web, comp: &[usize]) -> Web {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &v) in comp.iter().enumerate() {
        map.insert(v, i);
    }
    let mut piece = Web::empty();
    for _ in comp {
        piece.verts.push(Vert::Internal);
        piece.rot.push(Vec::new());
    }
    let mut emap: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in comp {
        for &(e, _) in &w.rot[v] {
            emap.entry(e).or_insert_with(|| {
                let id = piece.edges.len();
                let old = w.edges[e];
                piece.edges.push(Edge {
                    v: [map[&old.v[0]], map[&old.v[1]]],
                    forward: old.forward,
                    alive: true,
                });
                id
            });
        }
    }
    for &v in comp {
        piece.rot[map[&v]] = w.rot[v].iter().map(|&(e, end)| (emap[&e], end)).collect();
    }
    for &e in emap.keys() {
        w.edges[e].alive = false;
    }
    for &v in comp {
        w.rot[v].clear();
        w.verts[v] = Vert::Dead;
    }
    piece
}

/// Evaluate a closed web lying in a disk. Only its own surface matters, so
/// the rotation system is read as a sphere map and every circle counts as
/// contractible.
fn eval_sphere(web: Web) -> Result<LaurentQA, String> {
    let mut total = LaurentQA::zero();
    let mut queue = vec![(web, LaurentQA::one())];
    let mut steps = 0usize;
    while let Some((mut w, mut coeff)) = queue.pop() {
        steps += 1;
        if steps > 100_000 {
            return Err("sphere evaluation exceeded the step bound".into());
        }
        smooth(&mut w, true)?;
        if w.circles > 0 {
            coeff = &coeff * &LaurentQA::bracket3().pow(w.circles as u32);
            w.circles = 0;
        }
        let faces = w.faces();
        let pick = (0..faces.halves.len())
            .find(|&f| matches!(faces.halves[f].len(), 2 | 4));
        let Some(f) = pick else {
            if w.edges.iter().any(|e| e.alive) {
                return Err("closed web with no elliptic face".into());
            }
            total += &coeff;
            continue;
        };
        if faces.halves[f].len() == 2 {
            collapse_bigon(&mut w, &faces, f, true)?;
            queue.push((w, &coeff * &LaurentQA::bracket2()));
        } else {
            let (edges, corners, legs) = square_frame(&w, &faces, f)?;
            for pairs in [[(0, 1), (2, 3)], [(1, 2), (3, 0)]] {
                let mut branch = w.clone();
                apply_pairing(&mut branch, &edges, &corners, &legs, pairs);
                smooth(&mut branch, true)?;
                queue.push((branch, coeff.clone()));
            }
        }
    }
    Ok(total)
}

enum SquareOutcome {
    Resolved([(Web, LaurentQA); 2]),
    /// A resolution would split off a multi-vertex piece winding the
    /// puncture, which has no evaluation here.
    WindingPiece,
}

/// The two resolutions of a square face on the annulus, each with the
/// scalar collected from any closed pieces it splits off.
fn resolve_square(web: &Web, faces: &Faces, f: usize) -> Result<SquareOutcome, String> {
    let (edges, corners, legs) = square_frame(web, faces, f)?;
    let resolve = |pairs: [(usize, usize); 2]| -> Result<Option<(Web, LaurentQA)>, String> {
        let mut w = web.clone();
        let joints = apply_pairing(&mut w, &edges, &corners, &legs, pairs);
        // Pieces that no longer reach the boundary have lost their place in
        // the annulus, so decide their winding in the old embedding first:
        // a cycle of such a piece runs along its own edges, crossing the
        // square along the side of each joint it passes.
        let comps = closed_components(&w);
        let mut factor = LaurentQA::one();
        let mut dying: HashSet<usize> = edges.iter().copied().collect();
        let mut plan = Vec::new();
        for comp in comps {
            let cycle = component_cycle(&w, &comp)?;
            let mut walls = cycle.clone();
            for &(joint, side) in &joints {
                if comp.contains(&joint) {
                    walls.push(side);
                }
            }
            let winds = circle_is_essential(web, faces, &walls)?;
            if winds && comp.iter().any(|&v| w.rot[v].len() != 2) {
                return Ok(None);
            }
            for &v in &comp {
                for &(e, _) in &w.rot[v] {
                    dying.insert(e);
                }
            }
            plan.push((comp, winds));
        }
        rescue_anchor(&mut w, faces, &dying)?;
        for (comp, winds) in plan {
            if winds {
                // A bare cycle around the puncture.
                for &v in &comp {
                    for &(e, _) in &w.rot[v] {
                        w.edges[e].alive = false;
                    }
                }
                for &v in &comp {
                    w.rot[v].clear();
                    w.verts[v] = Vert::Dead;
                }
                w.essential += 1;
            } else {
                let piece = extract_component(&mut w, &comp);
                factor = &factor * &eval_sphere(piece)?;
            }
        }
        smooth(&mut w, false)?;
        Ok(Some((w, factor)))
    };
    match (resolve([(0, 1), (2, 3)])?, resolve([(1, 2), (3, 0)])?) {
        (Some(a), Some(b)) => Ok(SquareOutcome::Resolved([a, b])),
        _ => Ok(SquareOutcome::WindingPiece),
    }
}

/// Insert a bigon in the middle of a web edge. The new web reduces to `[2]`
/// times the old one.
pub fn insert_bigon(web: &mut Web, e: usize) -> Result<(), String> {
    if web.is_arc(e) || !web.edges[e].alive {
        return Err("bigons go on web edges".into());
    }
    let tail = if web.directed_away(e, 0) { 0 } else { 1 };
    let head = 1 - tail;
    let y = web.edges[e].v[head];
    let a = web.verts.len();
    let b = a + 1;
    web.verts.push(Vert::Internal); // sink
    web.verts.push(Vert::Internal); // source
    let m1 = web.edges.len();
    let m2 = m1 + 1;
    let ey = m1 + 2;
    web.edges.push(Edge { v: [b, a], forward: true, alive: true });
    web.edges.push(Edge { v: [b, a], forward: true, alive: true });
    web.edges.push(Edge { v: [b, y], forward: true, alive: true });
    let slot = web.rot[y]
        .iter()
        .position(|&x| x == (e, head))
        .ok_or("edge end missing from its rotation")?;
    web.rot[y][slot] = (ey, 1);
    web.edges[e].v[head] = a;
    web.rot.push(vec![(e, head), (m1, 1), (m2, 1)]);
    web.rot.push(vec![(m1, 0), (ey, 0), (m2, 0)]);
    web.check()
}

/// Try to insert a square across face `f` between two of its strand sides.
/// Returns `None` when the face has no suitable pair of sides.
pub fn insert_square(web: &Web, f: usize, rng: &mut ChaCha8Rng) -> Option<Web> {
    let faces = web.faces();
    if f >= faces.halves.len() || Some(f) == web.punct_face(&faces) {
        return None;
    }
    let mut pairs = Vec::new();
    let halves = &faces.halves[f];
    for i in 0..halves.len() {
        for j in 0..halves.len() {
            if i == j {
                continue;
            }
            let (h1, h2) = (halves[i], halves[j]);
            let (e1, e2) = (h1 / 2, h2 / 2);
            if web.is_arc(e1) || web.is_arc(e2) || e1 == e2 {
                continue;
            }
            // Antiparallel strands bound the face with equal alignment.
            if web.directed_away(e1, h1 % 2) == web.directed_away(e2, h2 % 2) {
                pairs.push((h1, h2));
            }
        }
    }
    pairs.shuffle(rng);
    for (h1, h2) in pairs {
        if let Some(w) = build_square(web, h1, h2) {
            return Some(w);
        }
    }
    None
}

/// Build the double-rung ladder between the strands under halves `h1` and
/// `h2` of a common face, verifying that a genuine square face appears.
fn build_square(web: &Web, h1: usize, h2: usize) -> Option<Web> {
    let mut w = web.clone();
    let aligned = w.directed_away(h1 / 2, h1 % 2);
    // Left strand flows down the page, right strand up; when the halves are
    // against their strands the picture is mirrored.
    let (left, right) = if aligned { (h2, h1) } else { (h1, h2) };
    let (e1, d1) = (left / 2, left % 2);
    let (e2, d2) = (right / 2, right % 2);
    let y1_end = if aligned { 1 - d1 } else { d1 };
    let y2_end = if aligned { d2 } else { 1 - d2 };
    let y1 = w.edges[e1].v[y1_end];
    let y2 = w.edges[e2].v[y2_end];
    let v1a = w.verts.len();
    let (v1b, v2a, v2b) = (v1a + 1, v1a + 2, v1a + 3);
    for _ in 0..4 {
        w.verts.push(Vert::Internal);
    }
    let m1 = w.edges.len();
    let (ra, rb, m2, e1low, e2low) = (m1 + 1, m1 + 2, m1 + 3, m1 + 4, m1 + 5);
    // Left rail reversed, top rung into the sink, bottom rung out of the
    // source, right rail with the right strand's upward flow.
    w.edges.push(Edge { v: [v1a, v1b], forward: false, alive: true }); // m1
    w.edges.push(Edge { v: [v1a, v2a], forward: false, alive: true }); // ra
    w.edges.push(Edge { v: [v1b, v2b], forward: true, alive: true }); // rb
    w.edges.push(Edge { v: [v2a, v2b], forward: true, alive: true }); // m2
    w.edges.push(Edge { v: [v1b, y1], forward: true, alive: true }); // e1low
    w.edges.push(Edge { v: [v2b, y2], forward: false, alive: true }); // e2low
    for (y, old, new) in [(y1, (e1, y1_end), (e1low, 1)), (y2, (e2, y2_end), (e2low, 1))] {
        let slot = w.rot[y].iter().position(|&x| x == old)?;
        w.rot[y][slot] = new;
    }
    w.edges[e1].v[y1_end] = v1a;
    w.edges[e2].v[y2_end] = v2a;
    let mut rots = [
        vec![(e1, y1_end), (ra, 0), (m1, 0)],       // v1a: up, rung, down
        vec![(m1, 1), (rb, 0), (e1low, 0)],         // v1b: up, rung, down
        vec![(e2, y2_end), (m2, 0), (ra, 1)],       // v2a: up, down, rung
        vec![(m2, 1), (e2low, 0), (rb, 1)],         // v2b: up, down, rung
    ];
    if !aligned {
        for r in rots.iter_mut() {
            r.reverse();
        }
    }
    for r in rots {
        w.rot.push(r);
    }
    if w.check().is_err() {
        return None;
    }
    // The region between the rungs must close into a square.
    let faces = w.faces();
    let punct = w.punct_face(&faces);
    let want: HashSet<usize> = HashSet::from([m1, ra, m2, rb]);
    let found = (0..faces.halves.len()).any(|g| {
        Some(g) != punct
            && faces.halves[g].len() == 4
            && faces.halves[g].iter().map(|&h| h / 2).collect::<HashSet<_>>() == want
    });
    if found {
        Some(w)
    } else {
        None
    }
}

/// A randomized elliptic web: a grown web with a few bigons and squares
/// inserted at random positions.
pub fn random_elliptic_web(
    signs: &SignString,
    states: &StateString,
    seed: u64,
) -> Result<Web, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut web = super::grow::grow(signs, states)?;
    let inserts = rng.gen_range(1..=3);
    for _ in 0..inserts {
        if rng.gen_bool(0.5) {
            let faces = web.faces();
            let f = rng.gen_range(0..faces.halves.len().max(1));
            if let Some(w) = insert_square(&web, f, &mut rng) {
                web = w;
                continue;
            }
        }
        let candidates: Vec<usize> = (web.n..web.edges.len())
            .filter(|&e| web.edges[e].alive)
            .collect();
        match candidates.choose(&mut rng) {
            Some(&e) => insert_bigon(&mut web, e)?,
            None => break,
        }
    }
    Ok(web)
}

#[cfg(test)]
mod tests {
    use super::super::grow;
    use super::super::path;
    use super::*;

    fn s(text: &str) -> SignString {
        SignString::parse(text).unwrap()
    }

    fn j(entries: &[i8]) -> StateString {
        StateString::new(entries.to_vec()).unwrap()
    }

    fn single(signs: &SignString, states: &StateString, value: LaurentQA) -> SkeinVector {
        let mut v = SkeinVector::zero();
        v.add((signs.clone(), states.clone()), &value);
        v
    }

    #[test]
    fn nonelliptic_webs_reduce_to_themselves() {
        for (states, web) in grow::enumerate_webs(&s("+-")).unwrap() {
            let got = reduce(&web, None).unwrap();
            assert_eq!(got, single(&s("+-"), &states, LaurentQA::one()));
        }
    }

    #[test]
    fn disjoint_circles_contribute_bracket_three() {
        let mut web = grow::grow(&s("+-"), &j(&[1, -1])).unwrap();
        web.circles = 2;
        let got = reduce(&web, None).unwrap();
        let expect = LaurentQA::bracket3().pow(2);
        assert_eq!(got, single(&s("+-"), &j(&[1, -1]), expect));
    }

    #[test]
    fn essential_circles_need_a_value() {
        let mut web = grow::grow(&s("+-"), &j(&[0, 0])).unwrap();
        web.essential = 1;
        assert!(reduce(&web, None).is_err());
        let value = LaurentQA::essential_rank();
        let got = reduce(&web, Some(&value)).unwrap();
        assert_eq!(got, single(&s("+-"), &j(&[0, 0]), value));
    }

    #[test]
    fn an_inserted_bigon_scales_by_bracket_two() {
        for states in path::enumerate_states(&s("+-+-")) {
            let base = grow::grow(&s("+-+-"), &states).unwrap();
            let plain = reduce(&base, None).unwrap();
            for e in base.boundary_len()..base.edges.len() {
                if !base.edges[e].alive {
                    continue;
                }
                let mut web = base.clone();
                insert_bigon(&mut web, e).unwrap();
                assert!(!web.is_nonelliptic());
                let got = reduce(&web, None).unwrap();
                let mut expect = SkeinVector::zero();
                for (key, value) in &plain.0 {
                    expect.add(key.clone(), &(value * &LaurentQA::bracket2()));
                }
                assert_eq!(got, expect, "edge {} of ({})", e, states);
            }
        }
    }

    #[test]
    fn square_insertion_preserves_confluence() {
        let mut made = 0;
        for (seed, states) in path::enumerate_states(&s("+-+-")).into_iter().enumerate() {
            let base = grow::grow(&s("+-+-"), &states).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let faces = base.faces().halves.len();
            for f in 0..faces {
                let Some(web) = insert_square(&base, f, &mut rng) else {
                    continue;
                };
                made += 1;
                let hook = LaurentQA::essential_rank();
                let det = reduce(&web, Some(&hook)).unwrap();
                for t in 0..3 {
                    assert_eq!(det, reduce_random(&web, Some(&hook), 100 * seed as u64 + t).unwrap());
                }
            }
        }
        assert!(made > 0, "no square was inserted anywhere");
    }

    #[test]
    fn randomized_elliptic_webs_reduce_confluently() {
        for (seed, states) in path::enumerate_states(&s("+++")).into_iter().enumerate() {
            let web = random_elliptic_web(&s("+++"), &states, seed as u64).unwrap();
            let hook = LaurentQA::essential_rank();
            let det = reduce(&web, Some(&hook)).unwrap();
            assert!(!det.is_zero());
            for t in 0..4 {
                let got = reduce_random(&web, Some(&hook), 31 * seed as u64 + t).unwrap();
                assert_eq!(det, got, "seed {} trial {}", seed, t);
            }
        }
    }
}
