//! A brute-force planar Khovanov homology oracle for closed diagrams
//! contained in a disk away from the seam.
//!
//! Everything here is self-contained: circles of each smoothing are traced
//! by direct arc walking and the cube is built over the rank-two Frobenius
//! algebra with basis `{1, X}`, `X^2 = 0`. Only the Smith normal form
//! routine is shared with the main pipeline, so agreement with the annular
//! complex at `a1 = a2 = 0` is a genuine cross-check. Gradings follow the
//! conventions of [`crate::complex`], including the inverted quantum
//! degree.

use crate::complex::{AnnularDiagram, HomologyGroup, Slice};
use crate::ring::Bidegree;
use crate::snf;
use crate::tangle::{FlatTangle, Pt};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::HashMap;

/// An arc endpoint or a free loop of one slice: `(slice, kind, index)`
/// with kind 0 for bottom, 1 for top, 2 for a free loop.
type Node = (usize, u8, usize);

fn trace(layers: &[FlatTangle]) -> Vec<Vec<Node>> {
    let mut circles = Vec::new();
    let mut visited: HashMap<Node, ()> = HashMap::new();
    for (l0, t) in layers.iter().enumerate() {
        for f in 0..t.free_loops() {
            circles.push(vec![(l0, 2u8, f)]);
        }
        for &(u, _) in t.arcs() {
            let start = node(l0, u);
            if visited.contains_key(&start) {
                continue;
            }
            let mut nodes = Vec::new();
            let mut cur = (l0, u);
            loop {
                visited.insert(node(cur.0, cur.1), ());
                nodes.push(node(cur.0, cur.1));
                let (_, other) = layers[cur.0].partner(cur.1);
                visited.insert(node(cur.0, other), ());
                nodes.push(node(cur.0, other));
                cur = match other {
                    Pt::T(k) => (cur.0 + 1, Pt::B(k)),
                    Pt::B(k) => (cur.0 - 1, Pt::T(k)),
                    _ => unreachable!("seam point in a disk diagram"),
                };
                if node(cur.0, cur.1) == start {
                    break;
                }
            }
            nodes.sort();
            circles.push(nodes);
        }
    }
    circles
}

fn node(l: usize, p: Pt) -> Node {
    match p {
        Pt::B(k) => (l, 0, k),
        Pt::T(k) => (l, 1, k),
        _ => unreachable!("seam point in a disk diagram"),
    }
}

fn find(circles: &[Vec<Node>], n: Node) -> usize {
    circles
        .iter()
        .position(|c| c.binary_search(&n).is_ok())
        .expect("node lies on some circle")
}

/// Integral Khovanov homology of a closed disk diagram, as a sorted list
/// of nonzero groups with annular degree zero.
pub fn homology(diagram: &AnnularDiagram) -> Result<Vec<HomologyGroup>, String> {
    if !diagram.is_closed() {
        return Err("the oracle needs a closed diagram".into());
    }
    for s in diagram.slices() {
        if let Slice::Flat(t) = s {
            if t.seam() != 0 {
                return Err("the oracle needs a diagram away from the seam".into());
            }
        }
    }
    let crossings = diagram.crossings();
    let c = crossings.len();
    let n_plus = diagram.n_plus() as i64;
    let n_minus = diagram.n_minus() as i64;

    let circ: Vec<Vec<Vec<Node>>> = (0..1usize << c)
        .map(|v| trace(&diagram.resolution(v)))
        .collect();
    // Generators of a smoothing: bitmasks over its circles, set bits
    // labelled X. Quantum degree: X counts +1, 1 counts -1, plus the
    // vertex shift.
    let qdeg = |v: usize, g: usize| -> i64 {
        let m = circ[v].len();
        let x = (g as u32).count_ones() as i64;
        let shift = 2 * n_minus - n_plus - v.count_ones() as i64;
        x - (m as i64 - x) + shift
    };

    // Unsigned edge matrix at crossing `ci` from smoothing v, as columns
    // over generators of v.
    let edge = |v: usize, ci: usize| -> Vec<Vec<usize>> {
        let cr = &crossings[ci];
        let v1 = v | (1 << ci);
        let sc = &circ[v];
        let dc = &circ[v1];
        // Active circles: through B(i) and T(i) on a turnback smoothing,
        // through B(i) and B(i+1) on a vertical one. The source of the
        // edge carries the turnback exactly for a positive crossing.
        let turn = ((cr.slice, 0u8, cr.i), (cr.slice, 1u8, cr.i));
        let vert = ((cr.slice, 0u8, cr.i), (cr.slice, 0u8, cr.i + 1));
        let ((sa, sb), (ta, tb)) =
            if cr.sign > 0 { (turn, vert) } else { (vert, turn) };
        let (ca, cb) = (find(sc, sa), find(sc, sb));
        let (da, db) = (find(dc, ta), find(dc, tb));
        let map: Vec<usize> = (0..sc.len())
            .map(|k| {
                if k == ca || k == cb {
                    usize::MAX
                } else {
                    find(dc, sc[k][0])
                }
            })
            .collect();
        (0..1usize << sc.len())
            .map(|g| {
                let mut base = 0usize;
                for k in 0..sc.len() {
                    if map[k] != usize::MAX && g >> k & 1 == 1 {
                        base |= 1 << map[k];
                    }
                }
                if ca != cb {
                    // Merge: 1.1 -> 1, 1.X and X.1 -> X, X.X -> 0.
                    let (la, lb) = (g >> ca & 1, g >> cb & 1);
                    if la == 1 && lb == 1 {
                        Vec::new()
                    } else {
                        vec![base | ((la | lb) << da)]
                    }
                } else if g >> ca & 1 == 1 {
                    // Split of X: X tensor X.
                    vec![base | 1 << da | 1 << db]
                } else {
                    // Split of 1: 1 tensor X plus X tensor 1.
                    vec![base | 1 << da, base | 1 << db]
                }
            })
            .collect()
    };

    // Assemble signed level matrices and labels.
    let states_of = |w: u32| -> Vec<usize> {
        (0..1usize << c).filter(|v| v.count_ones() == w).collect()
    };
    let mut labels: Vec<Vec<i64>> = Vec::new();
    let mut mats: Vec<Vec<Vec<(usize, BigInt)>>> = Vec::new();
    for w in 0..=c as u32 {
        let src = states_of(w);
        let mut lab = Vec::new();
        for &v in &src {
            for g in 0..1usize << circ[v].len() {
                lab.push(qdeg(v, g));
            }
        }
        labels.push(lab);
        if w == c as u32 {
            break;
        }
        let dst = states_of(w + 1);
        let mut offset = HashMap::new();
        let mut off = 0;
        for &v in &dst {
            offset.insert(v, off);
            off += 1usize << circ[v].len();
        }
        let mut cols = Vec::new();
        for &v in &src {
            let mut blocks = Vec::new();
            for ci in 0..c {
                if v >> ci & 1 == 1 {
                    continue;
                }
                let below = (v & ((1 << ci) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1i64 } else { -1 };
                blocks.push((offset[&(v | (1 << ci))], sign, edge(v, ci)));
            }
            for g in 0..1usize << circ[v].len() {
                let mut col = Vec::new();
                for (off, sign, e) in &blocks {
                    for &row in &e[g] {
                        col.push((off + row, BigInt::from(*sign)));
                    }
                }
                cols.push(col);
            }
        }
        mats.push(cols);
    }

    // Homology per level, split by quantum degree.
    let mut out = Vec::new();
    for k in 0..labels.len() {
        let mut degs: Vec<i64> = labels[k].clone();
        degs.sort();
        degs.dedup();
        for q in degs {
            let keep = |lvl: usize| -> Vec<usize> {
                (0..labels[lvl].len())
                    .filter(|&i| labels[lvl][i] == q)
                    .collect()
            };
            let rows = keep(k);
            let into = if k > 0 {
                dense(&mats[k - 1], &keep(k - 1), &rows)
            } else {
                Vec::new()
            };
            let out_m = if k < mats.len() {
                dense(&mats[k], &rows, &keep(k + 1))
            } else {
                Vec::new()
            };
            let (free, torsion) = snf::homology_summand(rows.len(), &into, &out_m);
            if free > 0 || !torsion.is_empty() {
                out.push(HomologyGroup {
                    hdeg: k as i64 - n_minus,
                    bidegree: Some(Bidegree::new(q, 0)),
                    free_rank: free,
                    torsion,
                });
            }
        }
    }
    out.sort_by_key(|g| (g.hdeg, g.bidegree.map(|d| (d.qdeg, d.adeg))));
    Ok(out)
}

/// Dense target-rows-by-source-cols submatrix.
fn dense(
    m: &[Vec<(usize, BigInt)>],
    cols: &[usize],
    rows: &[usize],
) -> Vec<Vec<BigInt>> {
    let row_of: HashMap<usize, usize> =
        rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut out = vec![vec![BigInt::zero(); cols.len()]; rows.len()];
    for (j, &cj) in cols.iter().enumerate() {
        for (i, coeff) in &m[cj] {
            if let Some(&ri) = row_of.get(i) {
                out[ri][j] = coeff.clone();
            }
        }
    }
    out
}
