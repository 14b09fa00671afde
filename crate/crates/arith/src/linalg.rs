//! Dense linear algebra over Q by Gaussian elimination.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type QMatrix = Vec<Vec<BigRational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let pivot = m[r][c..cols].to_vec();
                for (x, p) in m[i][c..cols].iter_mut().zip(&pivot) {
                    *x = &*x - p * &factor;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solve `A x = b` for `A` given as columns; `None` if inconsistent.
/// Free variables are set to zero.
pub fn solve_columns(columns: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = columns.len();
    let rows = b.len();
    let mut aug: QMatrix = (0..rows)
        .map(|i| {
            let mut row: Vec<BigRational> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][n].clone();
    }
    Some(x)
}

/// Determinant by elimination.
pub fn det(m: &QMatrix) -> BigRational {
    let n = m.len();
    let mut a = m.clone();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if pr != c {
            a.swap(pr, c);
            d = -d;
        }
        d = &d * &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            let (top, bottom) = a.split_at_mut(i);
            for (x, p) in bottom[0][c..n].iter_mut().zip(&top[c][c..n]) {
                *x = &*x - p * &f;
            }
        }
    }
    d
}

pub fn rank(m: &QMatrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn determinant_and_solve() {
        let m = vec![vec![q(2), q(1)], vec![q(7), q(4)]];
        assert_eq!(det(&m), q(1));
        let cols = vec![vec![q(2), q(7)], vec![q(1), q(4)]];
        assert_eq!(solve_columns(&cols, &[q(3), q(11)]), Some(vec![q(1), q(1)]));
        let dependent = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(rank(&dependent), 1);
        assert_eq!(solve_columns(&dependent, &[q(1), q(3)]), None);
    }
}
