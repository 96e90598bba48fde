//! Exact Gaussian elimination over the rationals.

use num::{One, Zero};

use crate::finite_prob::Rational;

/// Dense row-major matrix.
pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form and its pivot columns.
pub fn rref(mut m: Matrix) -> (Matrix, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..cols {
                    let delta = &factor * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m.clone()).1.len()
}

/// Basis of `{x : m x = 0}`, one vector per free column.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(m.clone());
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![Rational::zero(); cols];
            x[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                x[p] = -r[row][free].clone();
            }
            x
        })
        .collect()
}

/// A solution of `m x = b` with free variables set to zero, or `None` when
/// the system is inconsistent.
pub fn solve(m: &Matrix, b: &[Rational], cols: usize) -> Option<Vec<Rational>> {
    let augmented: Matrix = m.iter().zip(b).map(|(row, v)| row.iter().cloned().chain([v.clone()]).collect()).collect();
    let (r, pivots) = rref(augmented);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r[row][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{int, rat};
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&m), 2);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        for row in &m {
            let dot: Rational = row.iter().zip(&ns[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = mat(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&m, &[int(2), int(0)], 2), Some(vec![int(1), int(1)]));
        let singular = mat(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&singular, &[int(1), int(3)], 2), None);
        assert_eq!(solve(&singular, &[int(1), int(2)], 2), Some(vec![int(1), int(0)]));
        assert_eq!(solve(&mat(&[&[2]]), &[int(1)], 1), Some(vec![rat(1, 2)]));
    }

    proptest! {
        #[test]
        fn rank_nullity(entries in proptest::collection::vec(-3i64..=3, 12)) {
            let m: Matrix = entries.chunks(4).map(|r| r.iter().map(|&v| int(v)).collect()).collect();
            let ns = nullspace(&m, 4);
            prop_assert_eq!(rank(&m) + ns.len(), 4);
            for v in &ns {
                for row in &m {
                    let dot: Rational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                    prop_assert!(dot.is_zero());
                }
            }
        }
    }
}
