//! Small dense Gaussian elimination helpers.

use crate::scalar::Scalar;

/// Row echelon reduction with partial pivoting. Returns the rank; columns
/// whose best pivot is below `pivot_tol` are skipped.
pub fn rank<T: Scalar>(rows: &[Vec<T>], pivot_tol: T) -> usize {
    let mut a: Vec<Vec<T>> = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let (p, best) = (r..a.len())
            .map(|i| (i, a[i][c].abs()))
            .fold((r, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < pivot_tol {
            continue;
        }
        a.swap(r, p);
        for i in r + 1..a.len() {
            let f = a[i][c] / a[r][c];
            if f != T::zero() {
                for j in c..ncols {
                    let d = f * a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Solves the square system `A x = b`, or `None` when `A` is singular at
/// the default pivot threshold.
pub fn solve_square<T: Scalar>(rows: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let n = rows.len();
    if rhs.len() != n || rows.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<T>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut row = r.clone();
            row.push(b);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < T::PIVOT_TOL {
            return None;
        }
        a.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                if f != T::zero() {
                    for j in c..=n {
                        let d = f * a[c][j];
                        a[i][j] -= d;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Solves a possibly overdetermined but consistent system `A x = b` with
/// `rank A = ncols`, by elimination on the rows. Returns `None` if the rank
/// is deficient.
pub fn solve_full_rank<T: Scalar>(rows: &[Vec<T>], rhs: &[T], ncols: usize) -> Option<Vec<T>> {
    let mut a: Vec<Vec<T>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut row = r.clone();
            row.push(b);
            row
        })
        .collect();
    let m = a.len();
    let mut pivot_rows = Vec::with_capacity(ncols);
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            return None;
        }
        let p = (r..m).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < T::PIVOT_TOL {
            return None;
        }
        a.swap(r, p);
        for i in 0..m {
            if i != r {
                let f = a[i][c] / a[r][c];
                if f != T::zero() {
                    for j in c..=ncols {
                        let d = f * a[r][j];
                        a[i][j] -= d;
                    }
                }
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    Some((0..ncols).map(|c| a[pivot_rows[c]][ncols] / a[pivot_rows[c]][c]).collect())
}
