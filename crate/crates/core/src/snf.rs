//! Smith normal form over the integers, and homology of integer chain
//! complexes in terms of free ranks and torsion coefficients.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// The nonzero invariant factors `d1 | d2 | ...` of an integer matrix,
/// all positive. Rows index the target, columns the source.
pub fn invariant_factors(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pick a nonzero entry of smallest magnitude as the pivot.
        let mut pivot = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j].is_zero() {
                    continue;
                }
                let better = match &pivot {
                    None => true,
                    Some((pi, pj)) => {
                        let (pi, pj): (usize, usize) = (*pi, *pj);
                        a[i][j].abs() < a[pi][pj].abs()
                    }
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = div_round(&a[i][t], &a[t][t]);
                for j in t..cols {
                    let s = &a[t][j] * &q;
                    a[i][j] -= s;
                }
                if !a[i][t].is_zero() {
                    // The remainder is strictly smaller; promote it.
                    a.swap(t, i);
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = div_round(&a[t][j], &a[t][t]);
                for i in t..rows {
                    let s = &a[i][t] * &q;
                    a[i][j] -= s;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    // Sort into a divisibility chain with gcd/lcm exchanges.
    let n = diag.len();
    for i in 0..n {
        for j in i + 1..n {
            if (&diag[j] % &diag[i]).is_zero() {
                continue;
            }
            let g = gcd(&diag[i], &diag[j]);
            let l = (&diag[i] / &g) * &diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

/// Rank of an integer matrix.
pub fn rank(m: &[Vec<BigInt>]) -> usize {
    invariant_factors(m).len()
}

/// Free rank and torsion of `ker(out) / im(into)` inside a free module of
/// rank `dim`, where `into` maps into the module and `out` maps out of it.
pub fn homology_summand(
    dim: usize,
    into: &[Vec<BigInt>],
    out: &[Vec<BigInt>],
) -> (usize, Vec<BigInt>) {
    let fi = invariant_factors(into);
    let ro = rank(out);
    let free = dim - fi.len() - ro;
    let one = BigInt::from(1);
    let torsion = fi.into_iter().filter(|d| *d > one).collect();
    (free, torsion)
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // Round to nearest so remainders shrink below |b| / 2.
    let two_a = a * 2;
    let q: BigInt = &two_a / b;
    let q = if q.is_negative() { q - 1 } else { q + 1 };
    q / 2
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut x = a.abs();
    let mut y = b.abs();
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn invariant_factors_of_small_matrices() {
        assert_eq!(invariant_factors(&m(&[&[1, 0], &[0, 1]])), vec![
            BigInt::from(1),
            BigInt::from(1)
        ]);
        assert_eq!(invariant_factors(&m(&[&[2, 4], &[6, 8]])), vec![
            BigInt::from(2),
            BigInt::from(4)
        ]);
        assert_eq!(invariant_factors(&m(&[&[2, 4], &[4, 8]])), vec![BigInt::from(2)]);
        assert_eq!(
            invariant_factors(&m(&[&[6, 0], &[0, 10]])),
            vec![BigInt::from(2), BigInt::from(30)]
        );
        assert!(invariant_factors(&m(&[&[0, 0], &[0, 0]])).is_empty());
    }

    #[test]
    fn rank_drops_on_dependent_rows() {
        assert_eq!(rank(&m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]])), 2);
    }

    #[test]
    fn klein_bottle_first_homology() {
        // d2 = (2, 0)^T into a rank-2 module, d1 = 0 out of it.
        let into = m(&[&[2], &[0]]);
        let out: Vec<Vec<BigInt>> = Vec::new();
        let (free, torsion) = homology_summand(2, &into, &out);
        assert_eq!(free, 1);
        assert_eq!(torsion, vec![BigInt::from(2)]);
    }
}
