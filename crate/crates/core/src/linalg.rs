//! Small dense linear algebra: Jacobi singular values and a pivoted solver.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Singular values of the row-major `rows × cols` matrix `a`, in
/// descending order, computed by one-sided Jacobi rotations on the columns.
pub fn singular_values(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(a.len(), rows * cols, "matrix data does not match its shape");
    // Work on the transpose when it has fewer columns; the nonzero singular
    // values are the same.
    let (m, n, mut w) = if cols <= rows {
        (rows, cols, a.to_vec())
    } else {
        let mut t = alloc::vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = a[i * cols + j];
            }
        }
        (cols, rows, t)
    };
    let at = |w: &[f64], i: usize, j: usize| w[i * n + j];

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (at(&w, i, p), at(&w, i, q));
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (at(&w, i, p), at(&w, i, q));
                    w[i * n + p] = c * x - s * y;
                    w[i * n + q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| at(&w, i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if cols > rows {
        sv.resize(rows.min(cols), 0.0);
    }
    sv
}

/// Count of singular values above `rel_tol · max`.
pub fn numerical_rank(sv: &[f64], rel_tol: f64) -> usize {
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular matrix.
pub fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn diagonal_matrix() {
        let sv = singular_values(&[3.0, 0.0, 0.0, 0.0, -5.0, 0.0], 2, 3);
        assert_eq!(sv.len(), 2);
        assert_relative_eq!(sv[0], 5.0);
        assert_relative_eq!(sv[1], 3.0);
    }

    #[test]
    fn rank_deficient() {
        let a = [1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0, 0.0, 1.0, 0.0, 1.0];
        let sv = singular_values(&a, 3, 4);
        assert_eq!(numerical_rank(&sv, 1e-8), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], 1e-8), 0);
    }

    #[test]
    fn solve_small_system() {
        let x = solve([[0.0, 2.0, 1.0], [1.0, -1.0, 0.0], [3.0, 0.0, 1.0]], [5.0, -1.0, 4.0]).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 2.0, epsilon = 1e-14);
        assert_relative_eq!(x[2], 1.0, epsilon = 1e-14);
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0]).is_none());
    }

    proptest! {
        #[test]
        fn matches_nalgebra(rows in 1usize..5, data in proptest::collection::vec(-3.0f64..3.0, 16)) {
            let a = &data[..rows * 4];
            let sv = singular_values(a, rows, 4);
            let mut reference: alloc::vec::Vec<f64> = DMatrix::from_row_slice(rows, 4, a)
                .singular_values()
                .iter()
                .copied()
                .collect();
            reference.sort_by(|x, y| y.total_cmp(x));
            prop_assert_eq!(sv.len(), reference.len());
            for (s, r) in sv.iter().zip(&reference) {
                prop_assert!((s - r).abs() <= 1e-12 * (1.0 + r));
            }
        }
    }
}
