//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Product of row 2-norms, floored at 1. Used to scale determinant cutoffs.
pub fn row_norm_scale(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.norm())
        .product::<f64>()
        .max(1.0)
}

/// Numerical rank by Gaussian elimination with complete pivoting.
/// Pivots below `tol·max(1, max|m_ij|)` count as zero.
pub fn rank_full_pivot(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let cutoff = tol * a.amax().max(1.0);
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let mut best = (k, k, 0.0);
        for i in k..rows {
            for j in k..cols {
                let v = a[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= cutoff {
            break;
        }
        a.swap_rows(k, best.0);
        a.swap_columns(k, best.1);
        let pivot = a[(k, k)];
        for i in k + 1..rows {
            let f = a[(i, k)] / pivot;
            if f != 0.0 {
                for j in k..cols {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(rank_full_pivot(&z, 1e-12), 0);
        let i = DMatrix::<f64>::identity(4, 4);
        assert_eq!(rank_full_pivot(&i, 1e-12), 4);
        let r1 = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, -1.0, -2.0, -3.0]);
        assert_eq!(rank_full_pivot(&r1, 1e-12), 1);
        let anti = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]);
        assert_eq!(rank_full_pivot(&anti, 1e-12), 2);
    }

    #[test]
    fn scale_is_floored_at_one() {
        let small = DMatrix::from_row_slice(2, 2, &[0.0, 1e-3, -1e-3, 0.0]);
        assert_eq!(row_norm_scale(&small), 1.0);
        let big = DMatrix::from_row_slice(2, 2, &[0.0, 10.0, -10.0, 0.0]);
        assert_eq!(row_norm_scale(&big), 100.0);
    }
}
