//! Dense symmetric eigensolver and determinant on row-major `Vec<f64>` storage.

use faer::Mat;

fn to_mat(n: usize, a: &[f64]) -> Mat<f64> {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    Mat::from_fn(n, n, |i, j| a[i * n + j])
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut ev = to_mat(n, a).selfadjoint_eigenvalues(faer::Side::Lower);
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; `vectors[k]` is
/// the unit eigenvector of `values[k]`.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn symmetric_eigen(n: usize, a: &[f64]) -> SymmetricEigen {
    let evd = to_mat(n, a).selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| s.read(x).total_cmp(&s.read(y)));
    SymmetricEigen {
        values: order.iter().map(|&k| s.read(k)).collect(),
        vectors: order
            .iter()
            .map(|&k| (0..n).map(|r| u.read(r, k)).collect())
            .collect(),
    }
}

/// Determinant by partial-pivot LU.
pub fn determinant(n: usize, a: &[f64]) -> f64 {
    if n == 0 {
        return 1.0;
    }
    to_mat(n, a).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let a = [2.0, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(2, &a);
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 3.0, epsilon = 1e-14);
        let e = symmetric_eigen(2, &a);
        let v = &e.vectors[1];
        assert_abs_diff_eq!(v[0].abs(), v[1].abs(), epsilon = 1e-14);
        assert_abs_diff_eq!(determinant(2, &a), 3.0, epsilon = 1e-14);
    }
}
