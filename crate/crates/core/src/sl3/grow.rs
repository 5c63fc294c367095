//! The growth algorithm: building a non-elliptic annular web from an
//! admissible `(sign, state)` pair.
//!
//! Growth maintains a cyclic fringe of dangling strands, one per remaining
//! boundary point, each carrying a sign and a state. Three local moves act
//! on cyclically adjacent pairs:
//!
//! * `U` caps two strands of opposite sign with states `(1, -1)`;
//! * `Y` joins two strands of equal sign with states `(1, 0)`, `(0, -1)`
//!   or `(1, -1)` at a new trivalent vertex, leaving one strand of the
//!   opposite sign with state `1`, `-1` or `0` respectively;
//! * `H` bridges two strands of opposite sign with states `(1, 0)`,
//!   `(0, -1)` or `(0, 0)`, swapping the signs and moving the states to
//!   `(0, 1)`, `(-1, 0)` or `(-1, 1)`.
//!
//! The state patterns do not depend on which of the two signs comes first:
//! reversing all orientations preserves every minimal cut. The deterministic
//! schedule prefers length-reducing moves, then the leftmost applicable
//! position; by the confluence of the moves any schedule yields the same
//! web, which `order_independence_check` exercises directly.

use super::path::{self, SignString, StateString};
use super::web::{Edge, Vert, Web};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MoveKind {
    U,
    Y,
    H,
}

/// One growth step: the move applied at cyclic pair `(pos, pos + 1)` of a
/// fringe of the recorded length.
#[derive(Clone, Copy, Debug)]
pub struct Move {
    pub kind: MoveKind,
    pub pos: usize,
    pub len: usize,
}

#[derive(Clone, Copy)]
struct Item {
    sign: i8,
    state: i8,
    /// Dangling edge; its end `0` is attached, end `1` is free.
    edge: usize,
}

const FREE: usize = usize::MAX;

struct Builder {
    web: Web,
    fringe: Vec<Item>,
    moves: Vec<Move>,
}

impl Builder {
    fn new(signs: &SignString, states: &StateString) -> Result<Builder, String> {
        if !path::is_admissible(signs, states) {
            return Err(format!(
                "the pair ({}; {}) is not admissible",
                signs, states
            ));
        }
        let n = signs.len();
        let mut web = Web::boundary_only(n);
        let mut fringe = Vec::with_capacity(n);
        for k in 0..n {
            let e = web.edges.len();
            web.edges.push(Edge {
                v: [k, FREE],
                forward: signs.0[k] > 0,
                alive: true,
            });
            web.rot[k].push((e, 0));
            fringe.push(Item {
                sign: signs.0[k],
                state: states.0[k],
                edge: e,
            });
        }
        Ok(Builder {
            web,
            fringe,
            moves: Vec::new(),
        })
    }

    fn applicable(&self, k: usize) -> Option<MoveKind> {
        let len = self.fringe.len();
        let l = self.fringe[k];
        let r = self.fringe[(k + 1) % len];
        let pat = (l.state, r.state);
        if l.sign != r.sign {
            match pat {
                (1, -1) => Some(MoveKind::U),
                (1, 0) | (0, -1) | (0, 0) => Some(MoveKind::H),
                _ => None,
            }
        } else {
            match pat {
                (1, 0) | (0, -1) | (1, -1) => Some(MoveKind::Y),
                _ => None,
            }
        }
    }

    fn apply(&mut self, k: usize, kind: MoveKind) {
        let len = self.fringe.len();
        let k2 = (k + 1) % len;
        self.moves.push(Move { kind, pos: k, len });
        let (l, r) = (self.fringe[k], self.fringe[k2]);
        match kind {
            MoveKind::U => {
                // Keep the plus strand; its free end takes over the minus
                // strand's attachment slot, giving one strand directed from
                // the plus attachment to the minus attachment.
                let (p, m) = if l.sign > 0 { (l, r) } else { (r, l) };
                let at = self.web.edges[m.edge].v[0];
                let slot = self.web.rot[at]
                    .iter()
                    .position(|&x| x == (m.edge, 0))
                    .expect("dangling edge listed at its attachment");
                self.web.rot[at][slot] = (p.edge, 1);
                self.web.edges[p.edge].v[1] = at;
                self.web.edges[m.edge].alive = false;
                if len == 2 {
                    // Final cap: the puncture face touches the cap on the
                    // side of its half based at the right-hand strand.
                    let end = if r.sign > 0 { 0 } else { 1 };
                    self.web.punct = Some((p.edge, end));
                }
                if k2 < k {
                    self.fringe.remove(k);
                    self.fringe.remove(k2);
                } else {
                    self.fringe.remove(k2);
                    self.fringe.remove(k);
                }
            }
            MoveKind::Y => {
                let s = l.sign;
                let v = self.web.verts.len();
                self.web.verts.push(Vert::Internal);
                let e = self.web.edges.len();
                self.web.edges.push(Edge {
                    v: [v, FREE],
                    forward: s < 0,
                    alive: true,
                });
                self.web.edges[l.edge].v[1] = v;
                self.web.edges[r.edge].v[1] = v;
                self.web.rot.push(vec![(l.edge, 1), (r.edge, 1), (e, 0)]);
                let item = Item {
                    sign: -s,
                    state: l.state + r.state,
                    edge: e,
                };
                if k2 < k {
                    self.fringe.remove(k);
                    self.fringe.remove(k2);
                    self.fringe.push(item);
                } else {
                    self.fringe.remove(k2);
                    self.fringe[k] = item;
                }
            }
            MoveKind::H => {
                let vl = self.web.verts.len();
                let vr = vl + 1;
                self.web.verts.push(Vert::Internal);
                self.web.verts.push(Vert::Internal);
                let rung = self.web.edges.len();
                // `forward` points the rung out of the vertex under the
                // plus strand, which is the source side.
                self.web.edges.push(Edge {
                    v: [vl, vr],
                    forward: l.sign < 0,
                    alive: true,
                });
                let nl = rung + 1;
                let nr = rung + 2;
                self.web.edges.push(Edge {
                    v: [vl, FREE],
                    forward: r.sign > 0,
                    alive: true,
                });
                self.web.edges.push(Edge {
                    v: [vr, FREE],
                    forward: l.sign > 0,
                    alive: true,
                });
                self.web.edges[l.edge].v[1] = vl;
                self.web.edges[r.edge].v[1] = vr;
                self.web.rot.push(vec![(l.edge, 1), (rung, 0), (nl, 0)]);
                self.web.rot.push(vec![(r.edge, 1), (nr, 0), (rung, 1)]);
                let (jl, jr) = match (l.state, r.state) {
                    (1, 0) => (0, 1),
                    (0, -1) => (-1, 0),
                    (0, 0) => (-1, 1),
                    other => unreachable!("H on states {:?}", other),
                };
                self.fringe[k] = Item {
                    sign: r.sign,
                    state: jl,
                    edge: nl,
                };
                self.fringe[k2] = Item {
                    sign: l.sign,
                    state: jr,
                    edge: nr,
                };
            }
        }
    }

    /// Deterministic schedule: leftmost length-reducing move first, the
    /// wrap-around pair after the linear ones, then the same sweep for `H`.
    fn deterministic_step(&mut self) -> Result<(), String> {
        let len = self.fringe.len();
        for want_h in [false, true] {
            for k in 0..len {
                match self.applicable(k) {
                    Some(MoveKind::H) if want_h => {
                        self.apply(k, MoveKind::H);
                        return Ok(());
                    }
                    Some(kind) if !want_h && kind != MoveKind::H => {
                        self.apply(k, kind);
                        return Ok(());
                    }
                    _ => {}
                }
            }
        }
        Err(format!("no move applies to a fringe of length {}", len))
    }

    fn random_step(&mut self, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let len = self.fringe.len();
        let options: Vec<(usize, MoveKind)> = (0..len)
            .filter_map(|k| self.applicable(k).map(|m| (k, m)))
            .collect();
        match options.choose(rng) {
            Some(&(k, kind)) => {
                self.apply(k, kind);
                Ok(())
            }
            None => Err(format!("no move applies to a fringe of length {}", len)),
        }
    }

    fn run(mut self, rng: Option<&mut ChaCha8Rng>) -> Result<(Web, Vec<Move>), String> {
        let cap = 10 * self.fringe.len() * self.fringe.len() + 16;
        let mut rng = rng;
        for _ in 0..cap {
            if self.fringe.is_empty() {
                self.web.check()?;
                return Ok((self.web, self.moves));
            }
            if self.fringe.len() == 1 {
                return Err("a single strand cannot close".into());
            }
            match rng.as_deref_mut() {
                Some(r) => self.random_step(r)?,
                None => self.deterministic_step()?,
            }
        }
        Err("growth did not terminate within the step bound".into())
    }
}

/// Grow the web of an admissible pair, also returning the moves applied.
pub fn grow_with_moves(
    signs: &SignString,
    states: &StateString,
) -> Result<(Web, Vec<Move>), String> {
    Builder::new(signs, states)?.run(None)
}

/// Grow the web of an admissible pair.
pub fn grow(signs: &SignString, states: &StateString) -> Result<Web, String> {
    grow_with_moves(signs, states).map(|(web, _)| web)
}

/// Grow with a uniformly random applicable move at every step.
pub fn grow_random(
    signs: &SignString,
    states: &StateString,
    seed: u64,
) -> Result<Web, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Builder::new(signs, states)?
        .run(Some(&mut rng))
        .map(|(web, _)| web)
}

/// Check that randomized schedules reproduce the deterministic web, up to
/// isotopy fixing the boundary.
pub fn order_independence_check(
    signs: &SignString,
    states: &StateString,
    seed: u64,
    trials: usize,
) -> Result<(), String> {
    let reference = grow(signs, states)?.canonical_form();
    for t in 0..trials {
        let form = grow_random(signs, states, seed.wrapping_add(t as u64))?.canonical_form();
        if form != reference {
            return Err(format!(
                "schedule with seed {} grew a different web for ({}; {})",
                seed.wrapping_add(t as u64),
                signs,
                states
            ));
        }
    }
    Ok(())
}

/// The webs of all admissible states over a sign string, in the state
/// order of [`path::enumerate_states`].
pub fn enumerate_webs(signs: &SignString) -> Result<Vec<(StateString, Web)>, String> {
    path::enumerate_states(signs)
        .into_iter()
        .map(|states| grow(signs, &states).map(|web| (states, web)))
        .collect()
}
