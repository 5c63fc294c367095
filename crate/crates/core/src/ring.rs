//! Exact arithmetic for the coefficient rings: the polynomial ring
//! `Z[a1, a2]` (with a third variable `a3` reserved for SL(3) bookkeeping)
//! and Laurent polynomials in `q` and the annular variable `A`.
//!
//! Terms are stored sorted by exponent vector (lexicographic) with no zero
//! coefficients, so structural equality is semantic equality.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A polynomial in `Z[a1, a2, a3]` with arbitrary-precision coefficients.
///
/// Each generator `a_i` sits in degree 2, so a monomial `a1^e1 a2^e2 a3^e3`
/// has degree `2 (e1 + e2 + e3)`.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PolyAlpha {
    terms: BTreeMap<[u32; 3], BigInt>,
}

impl PolyAlpha {
    pub fn zero() -> Self {
        PolyAlpha { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::from_bigint(BigInt::from(c))
    }

    pub fn from_bigint(c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert([0, 0, 0], c);
        }
        PolyAlpha { terms }
    }

    /// The generator `a_i`, for `i` in `1..=3`.
    pub fn alpha(i: usize) -> Self {
        assert!((1..=3).contains(&i), "alpha index out of range: {i}");
        let mut exp = [0u32; 3];
        exp[i - 1] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exp, BigInt::one());
        PolyAlpha { terms }
    }

    pub fn monomial(exp: [u32; 3], coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        PolyAlpha { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&[0, 0, 0]).map_or(false, |c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Constant term, if the polynomial is constant; `None` otherwise.
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.terms.is_empty() {
            return Some(BigInt::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&[0, 0, 0]) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert_term(&mut self, exp: [u32; 3], coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Degree as a graded ring element: `2 (e1 + e2 + e3)`, maximised over
    /// terms. Returns `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| 2 * (e[0] + e[1] + e[2])).max()
    }

    /// Whether all terms share one degree (the zero polynomial counts).
    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e[0] + e[1] + e[2]);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// The involution swapping `a1` and `a2` (fixing `a3`).
    pub fn tau(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| ([e[1], e[0], e[2]], c.clone()))
            .collect();
        PolyAlpha { terms }
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    /// Long division by the lexicographically leading term of `d`.
    pub fn exact_div(&self, d: &PolyAlpha) -> Option<PolyAlpha> {
        if d.is_zero() {
            return None;
        }
        let (lde, ldc) = d.terms.iter().next_back().unwrap();
        let mut rem = self.clone();
        let mut quot = PolyAlpha::zero();
        while !rem.is_zero() {
            let (re, rc) = {
                let (e, c) = rem.terms.iter().next_back().unwrap();
                (*e, c.clone())
            };
            if (0..3).any(|i| re[i] < lde[i]) || !(&rc % ldc).is_zero() {
                return None;
            }
            let exp = [re[0] - lde[0], re[1] - lde[1], re[2] - lde[2]];
            let term = PolyAlpha::monomial(exp, &rc / ldc);
            rem = &rem - &(&term * d);
            quot += &term;
        }
        Some(quot)
    }

    /// Evaluate at integer values of the generators.
    pub fn eval(&self, vals: &[BigInt; 3]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..3 {
                for _ in 0..e[i] {
                    t *= &vals[i];
                }
            }
            acc += t;
        }
        acc
    }
}

impl Add for &PolyAlpha {
    type Output = PolyAlpha;
    fn add(self, rhs: &PolyAlpha) -> PolyAlpha {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &PolyAlpha {
    type Output = PolyAlpha;
    fn sub(self, rhs: &PolyAlpha) -> PolyAlpha {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &PolyAlpha {
    type Output = PolyAlpha;
    fn mul(self, rhs: &PolyAlpha) -> PolyAlpha {
        let mut out = PolyAlpha::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let exp = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                out.insert_term(exp, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &PolyAlpha {
    type Output = PolyAlpha;
    fn neg(self) -> PolyAlpha {
        let terms = self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect();
        PolyAlpha { terms }
    }
}

impl Add for PolyAlpha {
    type Output = PolyAlpha;
    fn add(self, rhs: PolyAlpha) -> PolyAlpha {
        &self + &rhs
    }
}

impl Sub for PolyAlpha {
    type Output = PolyAlpha;
    fn sub(self, rhs: PolyAlpha) -> PolyAlpha {
        &self - &rhs
    }
}

impl Mul for PolyAlpha {
    type Output = PolyAlpha;
    fn mul(self, rhs: PolyAlpha) -> PolyAlpha {
        &self * &rhs
    }
}

impl Neg for PolyAlpha {
    type Output = PolyAlpha;
    fn neg(self) -> PolyAlpha {
        -&self
    }
}

impl AddAssign<&PolyAlpha> for PolyAlpha {
    fn add_assign(&mut self, rhs: &PolyAlpha) {
        for (e, c) in &rhs.terms {
            self.insert_term(*e, c.clone());
        }
    }
}

const ALPHA_NAMES: [&str; 3] = ["a1", "a2", "a3"];

impl fmt::Display for PolyAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest monomial first reads more naturally.
        for (i, (exp, coeff)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            for v in 0..3 {
                match exp[v] {
                    0 => {}
                    1 => factors.push(ALPHA_NAMES[v].to_string()),
                    e => factors.push(format!("{}^{}", ALPHA_NAMES[v], e)),
                }
            }
            write_term(f, i == 0, coeff, &factors)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A Laurent polynomial in `q` and the annular variable `A`, over `Z`.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LaurentQA {
    terms: BTreeMap<(i64, i64), BigInt>,
}

impl LaurentQA {
    pub fn zero() -> Self {
        LaurentQA { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, BigInt::one())
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(0, 0, BigInt::from(c))
    }

    /// `q^e1 * A^e2` with the given coefficient.
    pub fn monomial(qe: i64, ae: i64, coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((qe, ae), coeff);
        }
        LaurentQA { terms }
    }

    pub fn q_pow(e: i64) -> Self {
        Self::monomial(e, 0, BigInt::one())
    }

    pub fn a_pow(e: i64) -> Self {
        Self::monomial(0, e, BigInt::one())
    }

    /// `[2] = q + q^-1`.
    pub fn bracket2() -> Self {
        &Self::q_pow(1) + &Self::q_pow(-1)
    }

    /// `[3] = q^2 + 1 + q^-2`.
    pub fn bracket3() -> Self {
        &(&Self::q_pow(2) + &Self::one()) + &Self::q_pow(-2)
    }

    /// `A + A^-1`, the graded rank of one essential circle.
    pub fn essential_rank() -> Self {
        &Self::a_pow(1) + &Self::a_pow(-1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, qe: i64, ae: i64) -> BigInt {
        self.terms.get(&(qe, ae)).cloned().unwrap_or_else(BigInt::zero)
    }

    fn insert_term(&mut self, exp: (i64, i64), coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Specialize `q = 1` (a ring map onto Laurent polynomials in `A`).
    pub fn at_q1(&self) -> Self {
        let mut out = Self::zero();
        for (&(_, ae), c) in &self.terms {
            out.insert_term((0, ae), c.clone());
        }
        out
    }

    /// Specialize `A = 1` (a ring map onto Laurent polynomials in `q`).
    pub fn at_a1(&self) -> Self {
        let mut out = Self::zero();
        for (&(qe, _), c) in &self.terms {
            out.insert_term((qe, 0), c.clone());
        }
        out
    }

    /// Evaluate at `q = 1, A = 1`.
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Substitute `q -> q^-1`, `A -> A^-1`.
    pub fn invert_vars(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&(qe, ae), c)| ((-qe, -ae), c.clone()))
            .collect();
        LaurentQA { terms }
    }
}

impl Add for &LaurentQA {
    type Output = LaurentQA;
    fn add(self, rhs: &LaurentQA) -> LaurentQA {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentQA {
    type Output = LaurentQA;
    fn sub(self, rhs: &LaurentQA) -> LaurentQA {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentQA {
    type Output = LaurentQA;
    fn mul(self, rhs: &LaurentQA) -> LaurentQA {
        let mut out = LaurentQA::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.insert_term((e1.0 + e2.0, e1.1 + e2.1), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentQA {
    type Output = LaurentQA;
    fn neg(self) -> LaurentQA {
        let terms = self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect();
        LaurentQA { terms }
    }
}

impl AddAssign<&LaurentQA> for LaurentQA {
    fn add_assign(&mut self, rhs: &LaurentQA) {
        for (e, c) in &rhs.terms {
            self.insert_term(*e, c.clone());
        }
    }
}

impl fmt::Display for LaurentQA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(qe, ae), coeff)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            match qe {
                0 => {}
                1 => factors.push("q".to_string()),
                e => factors.push(format!("q^{e}")),
            }
            match ae {
                0 => {}
                1 => factors.push("A".to_string()),
                e => factors.push(format!("A^{e}")),
            }
            write_term(f, i == 0, coeff, &factors)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentQA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    first: bool,
    coeff: &BigInt,
    factors: &[String],
) -> fmt::Result {
    let neg = coeff.is_negative();
    if first {
        if neg {
            write!(f, "-")?;
        }
    } else if neg {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let abs = coeff.abs();
    if factors.is_empty() {
        write!(f, "{abs}")
    } else {
        if !abs.is_one() {
            write!(f, "{abs}*")?;
        }
        write!(f, "{}", factors.join("*"))
    }
}

/// The `(qdeg, adeg)` bidegree of a homogeneous element or map.
#[derive(
    Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord,
    serde::Serialize, serde::Deserialize,
)]
pub struct Bidegree {
    pub qdeg: i64,
    pub adeg: i64,
}

impl Bidegree {
    pub fn new(qdeg: i64, adeg: i64) -> Self {
        Bidegree { qdeg, adeg }
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, rhs: Bidegree) -> Bidegree {
        Bidegree::new(self.qdeg + rhs.qdeg, self.adeg + rhs.adeg)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.qdeg, self.adeg)
    }
}

/// Whether a square matrix over `Z[a1, a2, a3]` has determinant `±1`, i.e.
/// presents an isomorphism of free modules. The determinant is expanded
/// blockwise over the connected components of the nonzero pattern; graded
/// matrices decompose into small blocks, which keeps the subset expansion
/// cheap. The overall sign is not tracked, which a unit test of `±1` does
/// not need.
pub fn unimodular(m: &[Vec<PolyAlpha>]) -> bool {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return false;
    }
    if n == 0 {
        return true;
    }

    // Union-find on rows `0..n` and columns `n..2n`.
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if !m[i][j].is_zero() {
                let a = root(&mut parent, i);
                let b = root(&mut parent, n + j);
                parent[a] = b;
            }
        }
    }
    let mut blocks: std::collections::HashMap<usize, (Vec<usize>, Vec<usize>)> =
        std::collections::HashMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        blocks.entry(r).or_default().0.push(i);
    }
    for j in 0..n {
        let r = root(&mut parent, n + j);
        blocks.entry(r).or_default().1.push(j);
    }

    let mut det = PolyAlpha::one();
    for (_, (rows, cols)) in blocks {
        if rows.len() != cols.len() {
            return false;
        }
        assert!(
            rows.len() <= 22,
            "determinant block of size {} is too large to expand",
            rows.len()
        );
        let sub: Vec<Vec<PolyAlpha>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        det = &det * &block_det(&sub);
        if det.is_zero() {
            return false;
        }
    }
    det == PolyAlpha::one() || det == -PolyAlpha::one()
}

/// Solve `m x = rhs` over `Z[a1, a2, a3]` by fraction-free elimination.
/// Intended for matrices of determinant `±1`, whose unique solution is
/// again polynomial; returns `None` if the matrix is singular or the
/// solution leaves the polynomial ring.
pub fn solve_unimodular(
    m: &[Vec<PolyAlpha>],
    rhs: &[PolyAlpha],
) -> Option<Vec<PolyAlpha>> {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n) && rhs.len() == n);
    let mut a: Vec<Vec<PolyAlpha>> = m.to_vec();
    let mut b: Vec<PolyAlpha> = rhs.to_vec();
    let mut prev = PolyAlpha::one();
    for k in 0..n {
        let piv = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let num = &(&a[k][k] * &b[i]) - &(&a[i][k] * &b[k]);
            b[i] = num.exact_div(&prev)?;
            for j in k + 1..n {
                let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.exact_div(&prev)?;
            }
            a[i][k] = PolyAlpha::zero();
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![PolyAlpha::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..n {
            acc = &acc - &(&a[i][j] * &x[j]);
        }
        x[i] = acc.exact_div(&a[i][i])?;
    }
    Some(x)
}

/// Determinant by expansion over column subsets; no division needed.
fn block_det(m: &[Vec<PolyAlpha>]) -> PolyAlpha {
    fn go(
        m: &[Vec<PolyAlpha>],
        used: u32,
        row: usize,
        memo: &mut std::collections::HashMap<u32, PolyAlpha>,
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
    go(m, 0, 0, &mut std::collections::HashMap::new())
}

// ---------------------------------------------------------------------------
// Parsing. One grammar serves both rings: sums of monomials in the tokens
// a1, a2, a3, q, A with optional integer coefficients and caret exponents.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Caret,
    Star,
    Plus,
    Minus,
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut toks = Vec::new();
    let mut it = s.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            ' ' | '\t' => {
                it.next();
            }
            '^' => {
                it.next();
                toks.push(Tok::Caret);
            }
            '*' => {
                it.next();
                toks.push(Tok::Star);
            }
            '+' => {
                it.next();
                toks.push(Tok::Plus);
            }
            '-' => {
                it.next();
                toks.push(Tok::Minus);
            }
            '0'..='9' => {
                let mut num = String::new();
                while let Some(&d) = it.peek() {
                    if d.is_ascii_digit() {
                        num.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Int(num.parse().unwrap()));
            }
            'a' | 'q' | 'A' => {
                let mut id = String::new();
                id.push(c);
                it.next();
                if c == 'a' {
                    match it.peek() {
                        Some(&d @ '1'..='3') => {
                            id.push(d);
                            it.next();
                        }
                        _ => return Err("expected a1, a2 or a3".into()),
                    }
                }
                toks.push(Tok::Ident(id));
            }
            _ => return Err(format!("unexpected character {c:?}")),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

/// A monomial over the joint token alphabet: exponents for a1, a2, a3, q, A.
struct RawTerm {
    coeff: BigInt,
    exps: [i64; 5],
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_exponent(&mut self) -> Result<i64, String> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Int(n)) => {
                let v: i64 = n.to_string().parse().map_err(|_| "exponent too large")?;
                Ok(if neg { -v } else { v })
            }
            other => Err(format!("expected exponent, got {other:?}")),
        }
    }

    fn parse_term(&mut self) -> Result<RawTerm, String> {
        let mut coeff = BigInt::one();
        let mut exps = [0i64; 5];
        let mut saw_factor = false;
        loop {
            match self.peek() {
                Some(Tok::Int(_)) => {
                    if let Some(Tok::Int(n)) = self.next() {
                        coeff *= n;
                    }
                    saw_factor = true;
                }
                Some(Tok::Ident(_)) => {
                    let id = match self.next() {
                        Some(Tok::Ident(id)) => id,
                        _ => unreachable!(),
                    };
                    let idx = match id.as_str() {
                        "a1" => 0,
                        "a2" => 1,
                        "a3" => 2,
                        "q" => 3,
                        "A" => 4,
                        _ => return Err(format!("unknown token {id}")),
                    };
                    let e = if self.peek() == Some(&Tok::Caret) {
                        self.next();
                        self.parse_exponent()?
                    } else {
                        1
                    };
                    exps[idx] += e;
                    saw_factor = true;
                }
                _ => break,
            }
            if self.peek() == Some(&Tok::Star) {
                self.next();
            }
        }
        if !saw_factor {
            return Err("empty term".into());
        }
        Ok(RawTerm { coeff, exps })
    }

    fn parse_sum(&mut self) -> Result<Vec<RawTerm>, String> {
        let mut terms = Vec::new();
        let mut sign = BigInt::one();
        if self.peek() == Some(&Tok::Minus) {
            self.next();
            sign = -sign;
        } else if self.peek() == Some(&Tok::Plus) {
            self.next();
        }
        loop {
            let mut t = self.parse_term()?;
            t.coeff *= &sign;
            terms.push(t);
            match self.next() {
                None => break,
                Some(Tok::Plus) => sign = BigInt::one(),
                Some(Tok::Minus) => sign = -BigInt::one(),
                Some(other) => return Err(format!("unexpected token {other:?}")),
            }
        }
        Ok(terms)
    }
}

fn parse_raw(s: &str) -> Result<Vec<RawTerm>, String> {
    let trimmed = s.trim();
    if trimmed == "0" {
        return Ok(Vec::new());
    }
    let mut p = Parser { toks: lex(trimmed)?, pos: 0 };
    p.parse_sum()
}

impl std::str::FromStr for PolyAlpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = PolyAlpha::zero();
        for t in parse_raw(s)? {
            if t.exps[3] != 0 || t.exps[4] != 0 {
                return Err("q and A are not allowed here".into());
            }
            for i in 0..3 {
                if t.exps[i] < 0 {
                    return Err("negative alpha exponent".into());
                }
            }
            out.insert_term(
                [t.exps[0] as u32, t.exps[1] as u32, t.exps[2] as u32],
                t.coeff,
            );
        }
        Ok(out)
    }
}

impl std::str::FromStr for LaurentQA {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = LaurentQA::zero();
        for t in parse_raw(s)? {
            if t.exps[0] != 0 || t.exps[1] != 0 || t.exps[2] != 0 {
                return Err("alpha variables are not allowed here".into());
            }
            out.insert_term((t.exps[3], t.exps[4]), t.coeff);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: usize) -> PolyAlpha {
        PolyAlpha::alpha(i)
    }

    #[test]
    fn poly_difference_of_squares() {
        let sum = &a(1) + &a(2);
        let diff = &a(1) - &a(2);
        let sq = &(&a(1) * &a(1)) - &(&a(2) * &a(2));
        assert_eq!(&sum * &diff, sq);
    }

    #[test]
    fn poly_cup_relation_expansion() {
        // (X - a1)(X - a2) = X^2 - (a1 + a2) X + a1 a2, checked via a3 as
        // the stand-in variable X.
        let x = a(3);
        let lhs = &(&x - &a(1)) * &(&x - &a(2));
        let rhs = &(&(&x * &x) - &(&(&a(1) + &a(2)) * &x)) + &(&a(1) * &a(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn poly_zero_times_anything() {
        let p = &(&a(1) + &PolyAlpha::constant(5)) * &a(2);
        let z = &PolyAlpha::zero() * &p;
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn poly_degree_additive() {
        let p = &(&a(1) * &a(1)) + &(&a(1) * &a(2));
        let r = &a(2) + &a(1);
        assert!(p.is_homogeneous() && r.is_homogeneous());
        assert_eq!(
            (&p * &r).degree(),
            Some(p.degree().unwrap() + r.degree().unwrap())
        );
    }

    #[test]
    fn poly_tau_is_ring_involution() {
        let p = &(&a(1) * &a(1)) + &(&PolyAlpha::constant(3) * &a(2));
        let r = &a(2) - &a(3);
        assert_eq!(p.tau().tau(), p);
        assert_eq!((&p * &r).tau(), &p.tau() * &r.tau());
    }

    #[test]
    fn laurent_bracket_products() {
        let b2 = LaurentQA::bracket2();
        // (q + q^-1)^2 = q^2 + 2 + q^-2
        let sq = &b2 * &b2;
        assert_eq!(sq.coeff(2, 0), BigInt::from(1));
        assert_eq!(sq.coeff(0, 0), BigInt::from(2));
        assert_eq!(sq.coeff(-2, 0), BigInt::from(1));
        assert_eq!(sq.terms().count(), 3);
        // [3][2] = q^3 + 2q + 2q^-1 + q^-3
        let p = &LaurentQA::bracket3() * &b2;
        let expected: LaurentQA = "q^3 + 2*q + 2*q^-1 + q^-3".parse().unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn laurent_mixed_rank_product() {
        let p = &LaurentQA::bracket2() * &LaurentQA::essential_rank();
        let expected: LaurentQA =
            "q*A + q*A^-1 + q^-1*A + q^-1*A^-1".parse().unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn laurent_specializations_are_ring_maps() {
        let x: LaurentQA = "q^2*A - 3*q + A^-1".parse().unwrap();
        let y: LaurentQA = "q^-1 + 2*A".parse().unwrap();
        assert_eq!((&x * &y).at_q1(), &x.at_q1() * &y.at_q1());
        assert_eq!((&x * &y).at_a1(), &x.at_a1() * &y.at_a1());
        assert_eq!((&x + &y).at_q1(), &x.at_q1() + &y.at_q1());
    }

    #[test]
    fn display_round_trips() {
        let p = &(&(&a(1) * &a(1)) - &(&PolyAlpha::constant(2) * &a(2))) + &PolyAlpha::one();
        let back: PolyAlpha = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        assert_eq!(PolyAlpha::zero().to_string(), "0");
        assert_eq!("0".parse::<PolyAlpha>().unwrap(), PolyAlpha::zero());

        let l: LaurentQA = "q^-2 - A^-1 + 4".parse().unwrap();
        let back: LaurentQA = l.to_string().parse().unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn exact_division_round_trips() {
        let p = &(&a(1) + &a(2)) * &(&(&a(1) * &a(3)) - &PolyAlpha::constant(7));
        let d = &a(1) + &a(2);
        assert_eq!(
            p.exact_div(&d).unwrap(),
            &(&a(1) * &a(3)) - &PolyAlpha::constant(7)
        );
        // Not divisible: wrong variable and wrong constant.
        assert!(d.exact_div(&a(3)).is_none());
        assert!(PolyAlpha::one().exact_div(&PolyAlpha::constant(2)).is_none());
        assert!(p.exact_div(&PolyAlpha::zero()).is_none());
    }

    #[test]
    fn solve_unimodular_recovers_a_known_solution() {
        // Random-looking unimodular matrix: I + strictly upper triangular.
        let m = vec![
            vec![PolyAlpha::one(), a(1), &a(2) * &a(2)],
            vec![PolyAlpha::zero(), PolyAlpha::one(), &a(1) + &a(3)],
            vec![PolyAlpha::zero(), PolyAlpha::zero(), PolyAlpha::one()],
        ];
        let x = vec![&a(2) - &PolyAlpha::constant(3), a(3), &a(1) * &a(2)];
        let rhs: Vec<PolyAlpha> = (0..3)
            .map(|i| {
                let mut acc = PolyAlpha::zero();
                for j in 0..3 {
                    acc += &(&m[i][j] * &x[j]);
                }
                acc
            })
            .collect();
        assert_eq!(solve_unimodular(&m, &rhs).unwrap(), x);
        // A singular system has no solution.
        let sing = vec![
            vec![a(1), a(1)],
            vec![a(1), a(1)],
        ];
        assert!(solve_unimodular(&sing, &[PolyAlpha::one(), a(2)]).is_none());
    }

    #[test]
    fn bidegree_adds() {
        assert_eq!(
            Bidegree::new(1, -1) + Bidegree::new(2, 1),
            Bidegree::new(3, 0)
        );
    }
}
