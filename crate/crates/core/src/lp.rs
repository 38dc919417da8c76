//! Dense two-phase simplex for the small linear programs behind the
//! Wasserstein-1 / Kantorovich computations.
//!
//! Bland's rule is used throughout, so the method terminates on degenerate
//! transport polytopes. Problem sizes here are tens of variables.

use nalgebra::{DMatrix, DVector};

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
}

/// `min cᵀx` subject to `A x = b`, `x ≥ 0`.
pub fn minimize_eq(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpSolution, LpError> {
    let (m, n) = a.shape();
    assert_eq!(c.len(), n);
    assert_eq!(b.len(), m);

    // tableau rows 0..m constraints, columns 0..n original, n..n+m artificial, last rhs
    let width = n + m + 1;
    let mut t = DMatrix::<f64>::zeros(m + 1, width);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, width - 1)] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1 objective: sum of artificials, expressed in non-basic terms
    let mut obj = DVector::<f64>::zeros(width);
    for i in 0..m {
        for j in 0..width {
            if !(n..n + m).contains(&j) {
                obj[j] -= t[(i, j)];
            }
        }
    }
    set_objective(&mut t, &obj);
    run_simplex(&mut t, &mut basis, n + m)?;
    if -t[(m, width - 1)] > 1e-9 {
        return Err(LpError::Infeasible);
    }

    // drive artificials out of the basis
    let mut keep_rows: Vec<usize> = Vec::new();
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[(i, j)].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
                keep_rows.push(i);
            }
        } else {
            keep_rows.push(i);
        }
    }

    // phase 2 on the kept rows, artificial columns dropped
    let m2 = keep_rows.len();
    let w2 = n + 1;
    let mut t2 = DMatrix::<f64>::zeros(m2 + 1, w2);
    let mut basis2 = Vec::with_capacity(m2);
    for (r, &i) in keep_rows.iter().enumerate() {
        for j in 0..n {
            t2[(r, j)] = t[(i, j)];
        }
        t2[(r, n)] = t[(i, width - 1)];
        basis2.push(basis[i]);
    }
    let mut obj2 = DVector::<f64>::zeros(w2);
    for j in 0..n {
        obj2[j] = c[j];
    }
    for (r, &bj) in basis2.iter().enumerate() {
        let cb = c[bj];
        if cb != 0.0 {
            for j in 0..w2 {
                obj2[j] -= cb * t2[(r, j)];
            }
        }
    }
    set_objective(&mut t2, &obj2);
    run_simplex(&mut t2, &mut basis2, n)?;

    let mut x = DVector::zeros(n);
    for (r, &bj) in basis2.iter().enumerate() {
        x[bj] = t2[(r, n)];
    }
    let objective = c.dot(&x);
    Ok(LpSolution { x, objective })
}

/// `max cᵀx` subject to `A x ≤ b`, `x ≥ 0`.
pub fn maximize_le(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpSolution, LpError> {
    let (m, n) = a.shape();
    let mut aug = DMatrix::zeros(m, n + m);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    for i in 0..m {
        aug[(i, n + i)] = 1.0;
    }
    let mut cost = DVector::zeros(n + m);
    for j in 0..n {
        cost[j] = -c[j];
    }
    let sol = minimize_eq(&cost, &aug, b)?;
    let x = sol.x.rows(0, n).into_owned();
    Ok(LpSolution {
        objective: c.dot(&x),
        x,
    })
}

fn set_objective(t: &mut DMatrix<f64>, obj: &DVector<f64>) {
    let last = t.nrows() - 1;
    for j in 0..t.ncols() {
        t[(last, j)] = obj[j];
    }
}

fn run_simplex(t: &mut DMatrix<f64>, basis: &mut [usize], allowed: usize) -> Result<(), LpError> {
    let m = t.nrows() - 1;
    let rhs = t.ncols() - 1;
    loop {
        // Bland: lowest-index column with negative reduced cost
        let Some(enter) = (0..allowed).find(|&j| t[(m, j)] < -EPS) else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[(i, enter)];
            if a > EPS {
                let ratio = t[(i, rhs)] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || ((ratio - lr).abs() <= EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(LpError::Unbounded);
        };
        pivot(t, basis, row, enter);
    }
}

fn pivot(t: &mut DMatrix<f64>, basis: &mut [usize], row: usize, col: usize) {
    let p = t[(row, col)];
    let width = t.ncols();
    for j in 0..width {
        t[(row, j)] /= p;
    }
    for i in 0..t.nrows() {
        if i != row {
            let f = t[(i, col)];
            if f != 0.0 {
                for j in 0..width {
                    let v = t[(row, j)];
                    t[(i, j)] -= f * v;
                }
            }
        }
    }
    basis[row] = col;
}
