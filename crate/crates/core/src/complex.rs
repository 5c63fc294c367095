//! Cubes of resolutions of annular link and tangle diagrams, their integer
//! specializations and homology.
//!
//! A diagram is a vertical stack of slices, read inner to outer: flat
//! tangle layers interleaved with single crossings. Each of the `2^c`
//! smoothings is a stack of flat layers carrying a bimodule state space;
//! flipping one crossing is a saddle, and the signed sum of cube edges is
//! the differential.
//!
//! Conventions, pinned by the tests rather than forced by the theory: the
//! 0-smoothing of a positive crossing is the turnback smoothing; the edge
//! from `v` to `v + e_c` carries the sign `(-1)^(number of 1-bits of v
//! below c)`; homological degree is the smoothing weight minus the number
//! of negative crossings; the quantum grading of the vertex at weight `w`
//! is shifted by `2 n_minus - n_plus - w`. The last shift uses the
//! grading of this crate, where an undotted circle sits in degree `-1`, so
//! printed quantum degrees are inverse to the tables that put it in `+1`.

use crate::algebra::{Algebra, CheckReport, Element};
use crate::bimodule::{Bimodule, SaddleMorphism};
use crate::ring::{Bidegree, LaurentQA, PolyAlpha};
use crate::snf;
use crate::tangle::{FlatTangle, Pt};
use crate::tqft::Dec;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

/// One horizontal slice of an annular diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slice {
    Flat(FlatTangle),
    /// A crossing between strands `i` and `i + 1` of a `strands`-strand
    /// level, all other strands passing through vertically.
    Crossing { strands: usize, i: usize, sign: i8 },
}

/// A crossing of a diagram, with its slice position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub slice: usize,
    pub strands: usize,
    pub i: usize,
    pub sign: i8,
}

/// An annular link or tangle diagram in sliced form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnularDiagram {
    slices: Vec<Slice>,
}

const MAX_CROSSINGS: usize = 12;

fn slice_bottom(s: &Slice) -> usize {
    match s {
        Slice::Flat(t) => t.bottom(),
        Slice::Crossing { strands, .. } => *strands,
    }
}

fn slice_top(s: &Slice) -> usize {
    match s {
        Slice::Flat(t) => t.top(),
        Slice::Crossing { strands, .. } => *strands,
    }
}

fn turnback(strands: usize, i: usize) -> FlatTangle {
    let mut arcs = vec![(Pt::B(i), Pt::B(i + 1)), (Pt::T(i), Pt::T(i + 1))];
    for j in (1..=strands).filter(|&j| j != i && j != i + 1) {
        arcs.push((Pt::B(j), Pt::T(j)));
    }
    FlatTangle::new(strands, strands, 0, arcs, 0).unwrap()
}

impl AnnularDiagram {
    pub fn new(slices: Vec<Slice>) -> Result<AnnularDiagram, String> {
        if slices.is_empty() {
            return Err("a diagram needs at least one slice".into());
        }
        for w in slices.windows(2) {
            if slice_top(&w[0]) != slice_bottom(&w[1]) {
                return Err(format!(
                    "slice boundaries do not match: {} vs {}",
                    slice_top(&w[0]),
                    slice_bottom(&w[1])
                ));
            }
        }
        for s in &slices {
            if let Slice::Crossing { strands, i, sign } = s {
                if *i == 0 || *i >= *strands {
                    return Err(format!("crossing position {i} out of range"));
                }
                if *sign != 1 && *sign != -1 {
                    return Err(format!("crossing sign must be +1 or -1, got {sign}"));
                }
            }
        }
        let diagram = AnnularDiagram { slices };
        let c = diagram.crossings().len();
        if c > MAX_CROSSINGS {
            return Err(format!("too many crossings: {c}"));
        }
        for state in 0..1usize << c {
            let layers = diagram.resolution(state);
            let (_, windings) = closed_circles(&layers);
            if windings.iter().any(|w| w.abs() > 1) {
                return Err(format!(
                    "smoothing {state:b} has a circle of winding outside -1..=1"
                ));
            }
        }
        Ok(diagram)
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn bottom(&self) -> usize {
        slice_bottom(&self.slices[0])
    }

    pub fn top(&self) -> usize {
        slice_top(&self.slices[self.slices.len() - 1])
    }

    pub fn is_closed(&self) -> bool {
        self.bottom() == 0 && self.top() == 0
    }

    pub fn crossings(&self) -> Vec<Crossing> {
        self.slices
            .iter()
            .enumerate()
            .filter_map(|(k, s)| match s {
                Slice::Crossing { strands, i, sign } => Some(Crossing {
                    slice: k,
                    strands: *strands,
                    i: *i,
                    sign: *sign,
                }),
                Slice::Flat(_) => None,
            })
            .collect()
    }

    pub fn n_plus(&self) -> usize {
        self.crossings().iter().filter(|c| c.sign > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.crossings().iter().filter(|c| c.sign < 0).count()
    }

    pub fn writhe(&self) -> i64 {
        self.n_plus() as i64 - self.n_minus() as i64
    }

    /// The flat layers of the smoothing selected by the bits of `state`,
    /// one layer per slice.
    pub fn resolution(&self, state: usize) -> Vec<FlatTangle> {
        let mut c = 0;
        self.slices
            .iter()
            .map(|s| match s {
                Slice::Flat(t) => t.clone(),
                Slice::Crossing { strands, i, sign } => {
                    let bit = (state >> c) & 1 == 1;
                    c += 1;
                    // Bit 0 of a positive crossing is the turnback.
                    if bit != (*sign > 0) {
                        turnback(*strands, *i)
                    } else {
                        vertical(*strands)
                    }
                }
            })
            .collect()
    }

    /// The diagram with crossing `c` replaced by one of its smoothings.
    pub fn resolve_crossing(&self, c: usize, to_turnback: bool) -> AnnularDiagram {
        let cr = self.crossings()[c];
        let mut slices = self.slices.clone();
        slices[cr.slice] = Slice::Flat(if to_turnback {
            turnback(cr.strands, cr.i)
        } else {
            vertical(cr.strands)
        });
        AnnularDiagram { slices }
    }

    /// Graded Euler characteristic of a closed diagram by recursive
    /// resolution of the first crossing, Kauffman style; independent of
    /// the state space machinery.
    pub fn skein_bracket(&self) -> LaurentQA {
        assert!(self.is_closed(), "skein bracket needs a closed diagram");
        let crossings = self.crossings();
        if crossings.is_empty() {
            let layers = self.resolution(0);
            let (contractible, windings) = closed_circles(&layers);
            let circle = &LaurentQA::q_pow(1) + &LaurentQA::q_pow(-1);
            let essential = &LaurentQA::a_pow(1) + &LaurentQA::a_pow(-1);
            let mut out = LaurentQA::one();
            for _ in 0..contractible {
                out = &out * &circle;
            }
            for _ in windings.iter() {
                out = &out * &essential;
            }
            return out;
        }
        let turn = self.resolve_crossing(0, true).skein_bracket();
        let vert = self.resolve_crossing(0, false).skein_bracket();
        if crossings[0].sign > 0 {
            // 0-smoothing turnback, 1-smoothing vertical.
            &(&LaurentQA::q_pow(-1) * &turn)
                - &(&LaurentQA::q_pow(-2) * &vert)
        } else {
            &(&LaurentQA::q_pow(1) * &turn) - &(&LaurentQA::q_pow(2) * &vert)
        }
    }

    // Corpus diagrams.

    /// A crossingless contractible circle.
    pub fn unknot() -> AnnularDiagram {
        let t = FlatTangle::new(0, 0, 0, Vec::new(), 1).unwrap();
        AnnularDiagram::new(vec![Slice::Flat(t)]).unwrap()
    }

    /// A crossingless circle around the puncture.
    pub fn essential_unknot() -> AnnularDiagram {
        let t = FlatTangle::new(0, 0, 1, vec![(Pt::L(1), Pt::R(1))], 0).unwrap();
        AnnularDiagram::new(vec![Slice::Flat(t)]).unwrap()
    }

    /// A contractible circle with one kink.
    pub fn kink(sign: i8) -> AnnularDiagram {
        AnnularDiagram::plat(1, &[(1, sign)])
    }

    /// A circle around the puncture with one kink.
    pub fn essential_kink(sign: i8) -> AnnularDiagram {
        let bottom =
            FlatTangle::new(0, 2, 1, vec![(Pt::T(1), Pt::L(1)), (Pt::R(1), Pt::T(2))], 0)
                .unwrap();
        let top = FlatTangle::new(2, 0, 0, vec![(Pt::B(1), Pt::B(2))], 0).unwrap();
        AnnularDiagram::new(vec![
            Slice::Flat(bottom),
            Slice::Crossing { strands: 2, i: 1, sign },
            Slice::Flat(top),
        ])
        .unwrap()
    }

    /// A circle around the puncture carrying a cancelling pair of
    /// crossings.
    pub fn essential_r2() -> AnnularDiagram {
        let bottom =
            FlatTangle::new(0, 2, 1, vec![(Pt::T(1), Pt::L(1)), (Pt::R(1), Pt::T(2))], 0)
                .unwrap();
        let top = FlatTangle::new(2, 0, 0, vec![(Pt::B(1), Pt::B(2))], 0).unwrap();
        AnnularDiagram::new(vec![
            Slice::Flat(bottom),
            Slice::Crossing { strands: 2, i: 1, sign: 1 },
            Slice::Crossing { strands: 2, i: 1, sign: -1 },
            Slice::Flat(top),
        ])
        .unwrap()
    }

    /// Plat closure of a braid word on `2 pairs` strands, contained in a
    /// disk away from the puncture. Letters are `(position, sign)`.
    pub fn plat(pairs: usize, word: &[(usize, i8)]) -> AnnularDiagram {
        let w = 2 * pairs;
        let cups = (1..=pairs).map(|j| (Pt::T(2 * j - 1), Pt::T(2 * j))).collect();
        let caps = (1..=pairs).map(|j| (Pt::B(2 * j - 1), Pt::B(2 * j))).collect();
        let mut slices = vec![Slice::Flat(FlatTangle::new(0, w, 0, cups, 0).unwrap())];
        for &(i, sign) in word {
            slices.push(Slice::Crossing { strands: w, i, sign });
        }
        slices.push(Slice::Flat(FlatTangle::new(w, 0, 0, caps, 0).unwrap()));
        AnnularDiagram::new(slices).unwrap()
    }

    /// The positive Hopf link in a disk.
    pub fn hopf_link() -> AnnularDiagram {
        AnnularDiagram::plat(2, &[(2, 1), (2, 1)])
    }

    /// A vertical strand (doubled so the boundary is even) with a kink on
    /// the first strand, as an `(1, 1)`-tangle diagram.
    pub fn strand_kink(sign: i8) -> AnnularDiagram {
        let bottom = FlatTangle::new(
            2,
            4,
            0,
            vec![(Pt::B(1), Pt::T(1)), (Pt::T(2), Pt::T(3)), (Pt::B(2), Pt::T(4))],
            0,
        )
        .unwrap();
        let top = FlatTangle::new(
            4,
            2,
            0,
            vec![(Pt::B(1), Pt::B(2)), (Pt::B(3), Pt::T(1)), (Pt::B(4), Pt::T(2))],
            0,
        )
        .unwrap();
        AnnularDiagram::new(vec![
            Slice::Flat(bottom),
            Slice::Crossing { strands: 4, i: 1, sign },
            Slice::Flat(top),
        ])
        .unwrap()
    }
}

fn vertical(strands: usize) -> FlatTangle {
    let arcs = (1..=strands).map(|j| (Pt::B(j), Pt::T(j))).collect();
    FlatTangle::new(strands, strands, 0, arcs, 0).unwrap()
}

/// Closed-circle census of a stack of flat layers, by direct arc walking:
/// the number of contractible circles (free loops included) and the
/// winding of each seam-crossing circle. Open strands are skipped.
pub fn closed_circles(layers: &[FlatTangle]) -> (usize, Vec<i64>) {
    let mut visited: HashSet<(usize, Pt)> = HashSet::new();
    let glue = |l: usize, p: Pt| -> Option<(usize, Pt, i64)> {
        match p {
            Pt::T(k) => {
                if l + 1 < layers.len() {
                    Some((l + 1, Pt::B(k), 0))
                } else {
                    None
                }
            }
            Pt::B(k) => {
                if l > 0 {
                    Some((l - 1, Pt::T(k), 0))
                } else {
                    None
                }
            }
            Pt::L(s) => Some((l, Pt::R(s), 1)),
            Pt::R(s) => Some((l, Pt::L(s), -1)),
        }
    };
    let mut contractible = 0;
    let mut windings = Vec::new();
    for (l0, t) in layers.iter().enumerate() {
        contractible += t.free_loops();
        for &(u, _) in t.arcs() {
            if visited.contains(&(l0, u)) {
                continue;
            }
            // Walk the component through arcs and gluings.
            let start = (l0, u);
            let mut cur = start;
            let mut winding = 0i64;
            let mut closed = true;
            loop {
                visited.insert(cur);
                let (_, other) = layers[cur.0].partner(cur.1);
                visited.insert((cur.0, other));
                match glue(cur.0, other) {
                    None => {
                        closed = false;
                        break;
                    }
                    Some((l, p, w)) => {
                        winding += w;
                        cur = (l, p);
                    }
                }
                if cur == start {
                    break;
                }
            }
            if !closed {
                // Walk the other way just to mark the rest of the strand.
                let mut cur = start;
                while let Some((l, p, _)) = glue(cur.0, cur.1) {
                    if visited.contains(&(l, p)) {
                        break;
                    }
                    visited.insert((l, p));
                    let (_, other) = layers[l].partner(p);
                    visited.insert((l, other));
                    cur = (l, other);
                }
                continue;
            }
            if winding == 0 {
                contractible += 1;
            } else {
                windings.push(winding);
            }
        }
    }
    (contractible, windings)
}

/// Sparse columns: entry lists `(row, coefficient)` per source basis
/// vector.
pub type SparseCols = Vec<Vec<(usize, PolyAlpha)>>;

/// The cube of resolutions of a diagram, with one bimodule per smoothing.
pub struct BimoduleComplex<'a> {
    outer: &'a Algebra,
    inner: &'a Algebra,
    diagram: AnnularDiagram,
    crossings: Vec<Crossing>,
    vertices: Vec<Bimodule<'a>>,
    bases: Vec<Vec<(usize, usize, Vec<Dec>)>>,
    index: Vec<HashMap<(usize, usize, Vec<Dec>), usize>>,
    edges: RefCell<HashMap<(usize, usize), Rc<SparseCols>>>,
}

impl<'a> BimoduleComplex<'a> {
    pub fn new(
        outer: &'a Algebra,
        inner: &'a Algebra,
        diagram: AnnularDiagram,
    ) -> Result<BimoduleComplex<'a>, String> {
        if diagram.bottom() != 2 * inner.n() || diagram.top() != 2 * outer.n() {
            return Err(format!(
                "diagram boundary ({}, {}) does not fit the algebras ({}, {})",
                diagram.bottom(),
                diagram.top(),
                2 * inner.n(),
                2 * outer.n()
            ));
        }
        let crossings = diagram.crossings();
        let mut vertices = Vec::new();
        for state in 0..1usize << crossings.len() {
            vertices.push(Bimodule::new_layered(
                outer,
                inner,
                &diagram.resolution(state),
            )?);
        }
        let bases: Vec<_> = vertices.iter().map(|b| b.basis()).collect();
        let index = bases
            .iter()
            .map(|basis| {
                basis
                    .iter()
                    .enumerate()
                    .map(|(i, k)| (k.clone(), i))
                    .collect()
            })
            .collect();
        Ok(BimoduleComplex {
            outer,
            inner,
            diagram,
            crossings,
            vertices,
            bases,
            index,
            edges: RefCell::new(HashMap::new()),
        })
    }

    pub fn diagram(&self) -> &AnnularDiagram {
        &self.diagram
    }

    pub fn outer(&self) -> &Algebra {
        self.outer
    }

    pub fn inner(&self) -> &Algebra {
        self.inner
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn vertex(&self, state: usize) -> &Bimodule<'a> {
        &self.vertices[state]
    }

    pub fn basis(&self, state: usize) -> &[(usize, usize, Vec<Dec>)] {
        &self.bases[state]
    }

    /// Homological degree of a smoothing.
    pub fn hdeg(&self, state: usize) -> i64 {
        state.count_ones() as i64 - self.diagram.n_minus() as i64
    }

    /// Quantum shift of a smoothing.
    pub fn qshift(&self, state: usize) -> i64 {
        2 * self.diagram.n_minus() as i64
            - self.diagram.n_plus() as i64
            - state.count_ones() as i64
    }

    /// Shifted bidegree of a basis vector of a vertex.
    pub fn bidegree(&self, state: usize, idx: usize) -> Bidegree {
        let (b, a, dec) = &self.bases[state][idx];
        let d = self.vertices[state].bidegree(*b, *a, dec);
        Bidegree::new(d.qdeg + self.qshift(state), d.adeg)
    }

    fn element_coords(&self, state: usize, x: &Element) -> Vec<(usize, PolyAlpha)> {
        let mut out = Vec::new();
        for (&(b, a), sv) in x.components() {
            for (k, c) in sv.terms() {
                let idx = self.index[state][&(b, a, k.clone())];
                out.push((idx, c.clone()));
            }
        }
        out.sort_by_key(|(i, _)| *i);
        out
    }

    /// The unsigned saddle matrix of the cube edge at crossing `c` leaving
    /// the smoothing `state` (which must have bit `c` clear).
    pub fn edge(&self, state: usize, c: usize) -> Rc<SparseCols> {
        assert_eq!(state >> c & 1, 0, "edge leaves a smoothing with bit {c} set");
        if let Some(e) = self.edges.borrow().get(&(state, c)) {
            return Rc::clone(e);
        }
        let cr = self.crossings[c];
        let layer = cr.slice + 1;
        let dst = state | (1 << c);
        let cols: SparseCols = if cr.sign > 0 {
            // The source smoothing carries the turnback: forward saddle.
            let sm = SaddleMorphism::new_at(
                &self.vertices[state],
                &self.vertices[dst],
                layer,
                cr.i,
                cr.i + 1,
            )
            .unwrap();
            self.bases[state]
                .iter()
                .map(|(b, a, dec)| {
                    let x = self.vertices[state].basis_element(*b, *a, dec.clone());
                    self.element_coords(dst, &sm.apply(&x))
                })
                .collect()
        } else {
            // The target smoothing carries the turnback: reversed saddle.
            let sm = SaddleMorphism::new_at(
                &self.vertices[dst],
                &self.vertices[state],
                layer,
                cr.i,
                cr.i + 1,
            )
            .unwrap();
            self.bases[state]
                .iter()
                .map(|(b, a, dec)| {
                    let x = self.vertices[state].basis_element(*b, *a, dec.clone());
                    self.element_coords(dst, &sm.apply_reverse(&x))
                })
                .collect()
        };
        let cols = Rc::new(cols);
        self.edges
            .borrow_mut()
            .insert((state, c), Rc::clone(&cols));
        cols
    }

    fn edge_sign(state: usize, c: usize) -> i64 {
        let below = (state & ((1 << c) - 1)).count_ones();
        if below % 2 == 0 { 1 } else { -1 }
    }

    fn states_of_weight(&self, w: u32) -> Vec<usize> {
        (0..1usize << self.crossings.len())
            .filter(|v| v.count_ones() == w)
            .collect()
    }

    /// The signed total differential from weight `w` to `w + 1`, as sparse
    /// columns over the concatenated vertex bases (states in increasing
    /// order).
    pub fn differential(&self, w: u32) -> SparseCols {
        let src = self.states_of_weight(w);
        let dst = self.states_of_weight(w + 1);
        let mut dst_offset = HashMap::new();
        let mut off = 0;
        for &v in &dst {
            dst_offset.insert(v, off);
            off += self.bases[v].len();
        }
        let mut cols = Vec::new();
        for &v in &src {
            let mut blocks: Vec<(usize, i64, Rc<SparseCols>)> = Vec::new();
            for c in 0..self.crossings.len() {
                if v >> c & 1 == 1 {
                    continue;
                }
                let sign = Self::edge_sign(v, c);
                blocks.push((dst_offset[&(v | (1 << c))], sign, self.edge(v, c)));
            }
            for j in 0..self.bases[v].len() {
                let mut col = Vec::new();
                for (off, sign, e) in &blocks {
                    for (i, coeff) in &e[j] {
                        let c = if *sign < 0 { -coeff } else { coeff.clone() };
                        col.push((off + i, c));
                    }
                }
                col.sort_by_key(|(i, _)| *i);
                cols.push(col);
            }
        }
        cols
    }

    /// Basis labels aligned with [`BimoduleComplex::differential`].
    pub fn level_labels(&self, w: u32) -> Vec<Bidegree> {
        let mut out = Vec::new();
        for v in self.states_of_weight(w) {
            for i in 0..self.bases[v].len() {
                out.push(self.bidegree(v, i));
            }
        }
        out
    }

    /// Check `d . d = 0` exactly over the polynomial ring.
    pub fn d_squared_report(&self) -> CheckReport {
        let mut report = CheckReport::new("cube differential squares to zero");
        let c = self.crossings.len() as u32;
        for w in 0..c.saturating_sub(1) {
            let d0 = self.differential(w);
            let d1 = self.differential(w + 1);
            let mut ok = true;
            for col in &d0 {
                let mut acc: HashMap<usize, PolyAlpha> = HashMap::new();
                for (mid, coeff) in col {
                    for (row, c2) in &d1[*mid] {
                        let e = acc.entry(*row).or_insert_with(PolyAlpha::zero);
                        *e += &(coeff * c2);
                    }
                }
                if acc.values().any(|p| !p.is_zero()) {
                    ok = false;
                }
            }
            report.check(ok, || format!("d^2 != 0 from weight {w}"));
        }
        report
    }

    /// Check that the differentials preserve the shifted quantum grading
    /// and the annular grading.
    pub fn grading_report(&self) -> CheckReport {
        let mut report = CheckReport::new("cube differential gradings");
        let c = self.crossings.len() as u32;
        for w in 0..c {
            let d = self.differential(w);
            let src = self.level_labels(w);
            let dst = self.level_labels(w + 1);
            let mut q_ok = true;
            let mut a_ok = true;
            for (j, col) in d.iter().enumerate() {
                for (i, coeff) in col {
                    if !coeff.is_homogeneous() {
                        q_ok = false;
                        continue;
                    }
                    let extra = coeff.degree().unwrap_or(0) as i64;
                    if dst[*i].qdeg + extra != src[j].qdeg {
                        q_ok = false;
                    }
                    if dst[*i].adeg != src[j].adeg {
                        a_ok = false;
                    }
                }
            }
            report.check(q_ok, || format!("quantum degree not preserved at weight {w}"));
            report.check(a_ok, || format!("annular degree not preserved at weight {w}"));
        }
        report
    }

    /// Graded Euler characteristic, from the vertex state spaces.
    pub fn euler_characteristic(&self) -> LaurentQA {
        let mut out = LaurentQA::zero();
        for state in 0..self.vertices.len() {
            let sign = if self.hdeg(state).rem_euclid(2) == 0 { 1 } else { -1 };
            let shift = LaurentQA::monomial(self.qshift(state), 0, BigInt::from(sign));
            out += &(&shift * &self.vertices[state].graded_rank());
        }
        out
    }

    /// Specialize the generators to integers, producing an integer chain
    /// complex with bidegree labels.
    pub fn specialize(&self, a1: i64, a2: i64) -> IntComplex {
        let vals = [BigInt::from(a1), BigInt::from(a2), BigInt::zero()];
        let c = self.crossings.len() as u32;
        let labels = (0..=c).map(|w| self.level_labels(w)).collect();
        let mats = (0..c)
            .map(|w| {
                self.differential(w)
                    .into_iter()
                    .map(|col| {
                        col.into_iter()
                            .filter_map(|(i, p)| {
                                let v = p.eval(&vals);
                                if v.is_zero() { None } else { Some((i, v)) }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        IntComplex {
            min_h: -(self.diagram.n_minus() as i64),
            labels,
            mats,
        }
    }
}

/// An integer chain complex with bidegree labels on the basis, indexed by
/// consecutive homological degrees starting at `min_h`.
pub struct IntComplex {
    min_h: i64,
    labels: Vec<Vec<Bidegree>>,
    /// `mats[k]` maps level `k` to level `k + 1`, sparse columns.
    mats: Vec<Vec<Vec<(usize, BigInt)>>>,
}

/// One homology summand: free rank and torsion coefficients at a
/// homological degree, with its bidegree when the complex splits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyGroup {
    pub hdeg: i64,
    pub bidegree: Option<Bidegree>,
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl IntComplex {
    pub fn min_h(&self) -> i64 {
        self.min_h
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.len()).collect()
    }

    pub fn d_squared_ok(&self) -> bool {
        for k in 0..self.mats.len().saturating_sub(1) {
            for col in &self.mats[k] {
                let mut acc: HashMap<usize, BigInt> = HashMap::new();
                for (mid, c) in col {
                    for (row, c2) in &self.mats[k + 1][*mid] {
                        *acc.entry(*row).or_insert_with(BigInt::zero) += c * c2;
                    }
                }
                if acc.values().any(|v| !v.is_zero()) {
                    return false;
                }
            }
        }
        true
    }

    fn graded(&self) -> bool {
        for (k, m) in self.mats.iter().enumerate() {
            for (j, col) in m.iter().enumerate() {
                for (i, _) in col {
                    if self.labels[k][j] != self.labels[k + 1][*i] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Homology at every level, split by bidegree when the differentials
    /// preserve it. Only nonzero groups are listed, sorted.
    pub fn homology(&self) -> Vec<HomologyGroup> {
        let graded = self.graded();
        let levels = self.labels.len();
        let mut out = Vec::new();
        for k in 0..levels {
            let degrees: Vec<Option<Bidegree>> = if graded {
                let mut set: Vec<Bidegree> = self.labels[k].clone();
                set.sort();
                set.dedup();
                set.into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            for deg in degrees {
                let keep = |lvl: usize| -> Vec<usize> {
                    (0..self.labels[lvl].len())
                        .filter(|&i| deg.map_or(true, |d| self.labels[lvl][i] == d))
                        .collect()
                };
                let rows = keep(k);
                let into = if k > 0 {
                    submatrix(&self.mats[k - 1], &keep(k - 1), &rows)
                } else {
                    Vec::new()
                };
                let into = dense(&into, rows.len());
                let out_m = if k + 1 < levels {
                    let rows_up = keep(k + 1);
                    dense(&submatrix(&self.mats[k], &rows, &rows_up), rows_up.len())
                } else {
                    Vec::new()
                };
                let (free, torsion) = snf::homology_summand(rows.len(), &into, &out_m);
                if free > 0 || !torsion.is_empty() {
                    out.push(HomologyGroup {
                        hdeg: self.min_h + k as i64,
                        bidegree: deg,
                        free_rank: free,
                        torsion,
                    });
                }
            }
        }
        out.sort_by_key(|g| (g.hdeg, g.bidegree.map(|d| (d.qdeg, d.adeg))));
        out
    }

    /// Graded Euler characteristic of the free parts, for cross-checking.
    pub fn homology_euler_characteristic(&self) -> LaurentQA {
        let mut out = LaurentQA::zero();
        for g in self.homology() {
            let d = g.bidegree.unwrap_or(Bidegree::new(0, 0));
            let sign = if g.hdeg.rem_euclid(2) == 0 { 1 } else { -1 };
            out += &LaurentQA::monomial(
                d.qdeg,
                d.adeg,
                BigInt::from(sign * g.free_rank as i64),
            );
        }
        out
    }
}

/// Columns of `m` restricted to `cols` source indices and `rows` target
/// indices (both sorted), reindexed densely.
fn submatrix(
    m: &[Vec<(usize, BigInt)>],
    cols: &[usize],
    rows: &[usize],
) -> Vec<Vec<(usize, BigInt)>> {
    let row_of: HashMap<usize, usize> =
        rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    cols.iter()
        .map(|&j| {
            m[j].iter()
                .filter_map(|(i, c)| row_of.get(i).map(|&ri| (ri, c.clone())))
                .collect()
        })
        .collect()
}

/// Dense row-major matrix (rows index the target) from sparse columns.
fn dense(cols: &[Vec<(usize, BigInt)>], rows: usize) -> Vec<Vec<BigInt>> {
    let mut m = vec![vec![BigInt::zero(); cols.len()]; rows];
    for (j, col) in cols.iter().enumerate() {
        for (i, c) in col {
            m[*i][j] = c.clone();
        }
    }
    m
}


#[cfg(test)]
mod tests {
    use super::*;

    fn groups(d: &AnnularDiagram) -> Vec<HomologyGroup> {
        let alg = Algebra::new(0);
        let cx = BimoduleComplex::new(&alg, &alg, d.clone()).unwrap();
        assert!(cx.d_squared_report().ok(), "{}", cx.d_squared_report());
        assert!(cx.grading_report().ok(), "{}", cx.grading_report());
        let ic = cx.specialize(0, 0);
        assert!(ic.d_squared_ok());
        ic.homology()
    }

    #[test]
    fn crossingless_unknots() {
        let g = groups(&AnnularDiagram::unknot());
        assert_eq!(g.len(), 2);
        for gr in &g {
            assert_eq!(gr.hdeg, 0);
            assert_eq!(gr.free_rank, 1);
            assert!(gr.torsion.is_empty());
        }
        assert_eq!(g[0].bidegree, Some(Bidegree::new(-1, 0)));
        assert_eq!(g[1].bidegree, Some(Bidegree::new(1, 0)));

        let g = groups(&AnnularDiagram::essential_unknot());
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].bidegree, Some(Bidegree::new(0, -1)));
        assert_eq!(g[1].bidegree, Some(Bidegree::new(0, 1)));
    }

    #[test]
    fn kinks_have_unknot_homology() {
        let plain = groups(&AnnularDiagram::unknot());
        assert_eq!(groups(&AnnularDiagram::kink(1)), plain);
        assert_eq!(groups(&AnnularDiagram::kink(-1)), plain);
    }

    #[test]
    fn euler_characteristic_matches_the_skein_bracket() {
        let alg = Algebra::new(0);
        for d in [
            AnnularDiagram::unknot(),
            AnnularDiagram::essential_unknot(),
            AnnularDiagram::kink(1),
            AnnularDiagram::kink(-1),
            AnnularDiagram::hopf_link(),
        ] {
            let cx = BimoduleComplex::new(&alg, &alg, d.clone()).unwrap();
            assert_eq!(cx.euler_characteristic(), d.skein_bracket());
        }
    }

    #[test]
    fn winding_census_of_the_corpus() {
        let d = AnnularDiagram::essential_unknot();
        let (c, w) = closed_circles(&d.resolution(0));
        assert_eq!(c, 0);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].abs(), 1);

        let d = AnnularDiagram::essential_kink(1);
        for state in 0..2 {
            let (_, w) = closed_circles(&d.resolution(state));
            assert_eq!(w.len(), 1, "state {state}");
        }
    }

    #[test]
    fn resolutions_follow_the_sign_convention() {
        // Bit 0 of the positive kink is the turnback: two circles.
        let d = AnnularDiagram::kink(1);
        let (c0, _) = closed_circles(&d.resolution(0));
        let (c1, _) = closed_circles(&d.resolution(1));
        assert_eq!((c0, c1), (2, 1));
        let d = AnnularDiagram::kink(-1);
        let (c0, _) = closed_circles(&d.resolution(0));
        let (c1, _) = closed_circles(&d.resolution(1));
        assert_eq!((c0, c1), (1, 2));
    }
}
