//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::CMatrix;

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are returned in
/// ascending order with matching eigenvector columns.
pub fn herm_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Orthonormal basis of the null space of `a` (as columns) together with all
/// singular values of `a`. A singular value `<= tol` counts as zero.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, Vec<f64>) {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    // Pad to at least square so that the SVD yields a full right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let svals: Vec<f64> = svd.singular_values.iter().copied().collect();
    let null: Vec<DVector<f64>> = svals
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    let basis = if null.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&null)
    };
    let reported = svals.into_iter().take(rows.min(cols)).collect::<Vec<_>>();
    let mut all = reported;
    all.resize(cols.max(all.len()), 0.0);
    (basis, all)
}

/// Moore-Penrose pseudo-inverse with singular values `<= tol` dropped.
pub fn pinv(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let mut out = DMatrix::zeros(cols, rows);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > tol {
            out += (v_t.row(i).transpose() * u.column(i).transpose()) / *s;
        }
    }
    out
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |m, s| m.max(*s))
}

/// Modified Gram-Schmidt. Vectors whose residual norm falls below `tol` are
/// dropped, so the output is an orthonormal basis of the span.
pub fn orthonormalize(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let n = r.norm();
        if n > tol {
            out.push(r / n);
        }
    }
    out
}

/// Numerical rank: number of singular values above `tol`.
pub fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > tol)
        .count()
}
