//! Sign strings, state strings and their lattice paths.
//!
//! A sign string records the boundary orientations of an annular SL(3) web,
//! `+` for a strand oriented away from the outer boundary. A state string
//! attaches a label in `{-1, 0, 1}` to each boundary point. The pair
//! translates into a walk in the weight lattice, written here in coordinates
//! over the two fundamental weights; the pair is admissible exactly when the
//! walk closes up.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;

/// A boundary orientation string over `{+1, -1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct SignString(pub Vec<i8>);

/// A state string over `{-1, 0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct StateString(pub Vec<i8>);

impl SignString {
    pub fn new(entries: Vec<i8>) -> Result<Self, String> {
        if entries.iter().any(|&s| s != 1 && s != -1) {
            return Err("signs must be +1 or -1".into());
        }
        Ok(SignString(entries))
    }

    /// Parse from a `+`/`-` string such as `"++-"`.
    pub fn parse(text: &str) -> Result<Self, String> {
        text.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(format!("unexpected sign character {:?}", other)),
            })
            .collect::<Result<Vec<i8>, String>>()
            .map(SignString)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n_plus(&self) -> usize {
        self.0.iter().filter(|&&s| s > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.0.iter().filter(|&&s| s < 0).count()
    }

    /// A sign string bounds webs only when `n+ - n-` is divisible by three.
    pub fn is_admissible(&self) -> bool {
        (self.n_plus() as i64 - self.n_minus() as i64).rem_euclid(3) == 0
    }

    pub fn negated(&self) -> Self {
        SignString(self.0.iter().map(|s| -s).collect())
    }
}

impl fmt::Display for SignString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", if s > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

impl StateString {
    pub fn new(entries: Vec<i8>) -> Result<Self, String> {
        if entries.iter().any(|&j| !(-1..=1).contains(&j)) {
            return Err("states must lie in {-1, 0, 1}".into());
        }
        Ok(StateString(entries))
    }

    /// Parse from comma-separated entries such as `"1,-1,0"`.
    pub fn parse(text: &str) -> Result<Self, String> {
        if text.trim().is_empty() {
            return Ok(StateString(Vec::new()));
        }
        let entries = text
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i8>()
                    .map_err(|e| format!("bad state entry {:?}: {}", p, e))
            })
            .collect::<Result<Vec<i8>, String>>()?;
        StateString::new(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for StateString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", j)?;
        }
        Ok(())
    }
}

/// The lattice step of one `(sign, state)` entry, in coordinates over the
/// two fundamental weights.
pub fn step(sign: i8, state: i8) -> (i64, i64) {
    let plus = match state {
        1 => (1, 0),
        0 => (-1, 1),
        -1 => (0, -1),
        _ => panic!("state out of range"),
    };
    if sign > 0 {
        plus
    } else {
        // Dual steps are the negated steps of the opposite state.
        let m = match state {
            1 => (0, -1),
            0 => (-1, 1),
            -1 => (1, 0),
            _ => unreachable!(),
        };
        (-m.0, -m.1)
    }
}

/// The walk `pi_0 = 0, pi_1, ..., pi_n` determined by a `(sign, state)` pair.
pub fn path_of(signs: &SignString, states: &StateString) -> Result<Vec<(i64, i64)>, String> {
    if signs.len() != states.len() {
        return Err(format!(
            "length mismatch: {} signs vs {} states",
            signs.len(),
            states.len()
        ));
    }
    let mut points = Vec::with_capacity(signs.len() + 1);
    let mut at = (0i64, 0i64);
    points.push(at);
    for (&s, &j) in signs.0.iter().zip(&states.0) {
        let (dx, dy) = step(s, j);
        at = (at.0 + dx, at.1 + dy);
        points.push(at);
    }
    Ok(points)
}

/// A pair is admissible when its lattice walk is closed.
pub fn is_admissible(signs: &SignString, states: &StateString) -> bool {
    match path_of(signs, states) {
        Ok(points) => *points.last().unwrap() == (0, 0),
        Err(_) => false,
    }
}

/// All state strings making the pair admissible, in lexicographic order
/// with `-1 < 0 < 1`.
///
/// The search walks the lattice depth-first, pruning any prefix whose
/// endpoint cannot return to the origin with the remaining steps.
pub fn enumerate_states(signs: &SignString) -> Vec<StateString> {
    let n = signs.len();
    // reachable[i] holds the points from which the suffix i..n can close.
    let mut reachable: Vec<std::collections::HashSet<(i64, i64)>> = vec![Default::default(); n + 1];
    reachable[n].insert((0, 0));
    for i in (0..n).rev() {
        let mut set = std::collections::HashSet::new();
        for &target in &reachable[i + 1] {
            for j in [-1i8, 0, 1] {
                let (dx, dy) = step(signs.0[i], j);
                set.insert((target.0 - dx, target.1 - dy));
            }
        }
        reachable[i] = set;
    }
    let mut out = Vec::new();
    let mut states = Vec::with_capacity(n);
    fn walk(
        signs: &[i8],
        reachable: &[std::collections::HashSet<(i64, i64)>],
        at: (i64, i64),
        i: usize,
        states: &mut Vec<i8>,
        out: &mut Vec<StateString>,
    ) {
        if i == signs.len() {
            if at == (0, 0) {
                out.push(StateString(states.clone()));
            }
            return;
        }
        for j in [-1i8, 0, 1] {
            let (dx, dy) = step(signs[i], j);
            let next = (at.0 + dx, at.1 + dy);
            if reachable[i + 1].contains(&next) {
                states.push(j);
                walk(signs, reachable, next, i + 1, states, out);
                states.pop();
            }
        }
    }
    walk(&signs.0, &reachable, (0, 0), 0, &mut states, &mut out);
    out
}

fn trinomial(n: u64, a: i64, b: i64, c: i64) -> BigInt {
    if a < 0 || b < 0 || c < 0 || (a + b + c) as u64 != n {
        return BigInt::zero();
    }
    let mut value = BigInt::one();
    // n! / a! split into binomials to stay in products of integers.
    let binom = |n: u64, k: u64| -> BigInt {
        let mut v = BigInt::one();
        for i in 0..k {
            v = v * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        v
    };
    value *= binom(n, a as u64);
    value *= binom(n - a as u64, b as u64);
    value
}

/// The number of admissible pairs `(S, J)` for this sign string, by the
/// closed-formula sum over the triangular hull of step multiplicities.
///
/// When the string has equally many `+` and `-` entries the count also
/// equals the closed honeycomb-walk sum `sum_k C(2k,k) C(n,k)^2`; the two
/// evaluations are compared and must agree.
pub fn count_closed_paths(signs: &SignString) -> BigInt {
    let np = signs.n_plus() as i64;
    let nm = signs.n_minus() as i64;
    if (np - nm).rem_euclid(3) != 0 {
        return BigInt::zero();
    }
    let shift = (np - nm) / 3;
    let mut total = BigInt::zero();
    for a1 in 0..=np {
        for a2 in 0..=(np - a1) {
            let a3 = np - a1 - a2;
            total += trinomial(np as u64, a1, a2, a3)
                * trinomial(nm as u64, a1 - shift, a2 - shift, a3 - shift);
        }
    }
    if np == nm {
        let n = np as u64;
        let binom = |n: u64, k: u64| -> BigInt {
            let mut v = BigInt::one();
            for i in 0..k {
                v = v * BigInt::from(n - i) / BigInt::from(i + 1);
            }
            v
        };
        let mut honeycomb = BigInt::zero();
        for k in 0..=n {
            let b = binom(n, k);
            honeycomb += binom(2 * k, k) * &b * &b;
        }
        assert_eq!(total, honeycomb, "hull sum disagrees with the honeycomb sum");
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> SignString {
        SignString::parse(text).unwrap()
    }

    fn j(entries: &[i8]) -> StateString {
        StateString::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn the_length_two_pair_closes() {
        assert!(is_admissible(&s("+-"), &j(&[1, -1])));
        assert!(is_admissible(&s(""), &j(&[])));
        assert!(path_of(&s("+-"), &j(&[1])).is_err());
    }

    #[test]
    fn zero_sum_does_not_imply_admissible() {
        let signs = s("+++");
        let states = j(&[0, 0, 0]);
        assert_eq!(states.0.iter().map(|&x| x as i64).sum::<i64>(), 0);
        assert!(!is_admissible(&signs, &states));
    }

    #[test]
    fn admissible_states_of_small_strings() {
        assert_eq!(
            enumerate_states(&s("+-")),
            vec![j(&[-1, 1]), j(&[0, 0]), j(&[1, -1])]
        );
        assert!(enumerate_states(&s("+")).is_empty());
        assert_eq!(enumerate_states(&s("+++")).len(), 6);
    }

    #[test]
    fn counts_match_enumeration_up_to_length_six() {
        for n in 0..=6usize {
            for mask in 0..1u32 << n {
                let signs =
                    SignString((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect());
                let count = count_closed_paths(&signs);
                assert_eq!(
                    count,
                    BigInt::from(enumerate_states(&signs).len()),
                    "{}",
                    signs
                );
                assert_eq!(count, count_closed_paths(&signs.negated()));
            }
        }
    }

    #[test]
    fn honeycomb_values() {
        assert_eq!(count_closed_paths(&s("+-")), BigInt::from(3));
        assert_eq!(count_closed_paths(&s("+-+-")), BigInt::from(15));
        assert_eq!(count_closed_paths(&s("+-+-+-")), BigInt::from(93));
        assert_eq!(count_closed_paths(&s("+++")), BigInt::from(6));
        assert_eq!(count_closed_paths(&s("")), BigInt::from(1));
    }

    #[test]
    fn adjacent_transpositions_preserve_the_count() {
        for text in ["+-+", "-++", "++-", "+--+-+", "-+-+"] {
            let signs = s(text);
            for i in 0..signs.len().saturating_sub(1) {
                if signs.0[i] != signs.0[i + 1] {
                    let mut swapped = signs.clone();
                    swapped.0.swap(i, i + 1);
                    assert_eq!(count_closed_paths(&signs), count_closed_paths(&swapped));
                }
            }
        }
    }

    #[test]
    fn admissibility_is_rotation_invariant() {
        let signs = s("++-+--");
        for states in enumerate_states(&signs) {
            for r in 0..signs.len() {
                let mut rs = signs.0.clone();
                let mut rj = states.0.clone();
                rs.rotate_left(r);
                rj.rotate_left(r);
                assert!(is_admissible(&SignString(rs), &StateString(rj)));
            }
        }
    }
}
