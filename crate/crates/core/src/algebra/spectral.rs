//! Functional calculus by per-block eigendecomposition.

use super::{CMatrix, Element, Projection};
use crate::error::{Error, Result};
use crate::linalg::herm_eigen;

/// An eigenvalue of a self-adjoint element with its spectral projection.
#[derive(Clone, Debug)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projection: Projection,
}

fn require_self_adjoint(x: &Element, what: &str) -> Result<()> {
    let defect = x.sa_defect();
    if defect > 1e-10 {
        return Err(Error::Domain(format!(
            "{what}: element is not self-adjoint (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Spectral decomposition `x = Σ λ_i p_i`, eigenvalues grouped when they lie
/// within `tol` of their neighbour, listed in decreasing order.
pub fn spectral_decompose(x: &Element, tol: f64) -> Result<Vec<SpectralComponent>> {
    require_self_adjoint(x, "spectral_decompose")?;
    let h = x.hermitian_part();
    let eig: Vec<(Vec<f64>, CMatrix)> = h.blocks().iter().map(herm_eigen).collect();

    // (eigenvalue, block, column)
    let mut pairs: Vec<(f64, usize, usize)> = eig
        .iter()
        .enumerate()
        .flat_map(|(b, (vals, _))| vals.iter().enumerate().map(move |(c, &v)| (v, b, c)))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut groups: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for p in pairs {
        match groups.last_mut() {
            Some(g) if (g.last().unwrap().0 - p.0).abs() <= tol => g.push(p),
            _ => groups.push(vec![p]),
        }
    }

    Ok(groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|p| p.0).sum::<f64>() / g.len() as f64;
            let blocks = h
                .blocks()
                .iter()
                .enumerate()
                .map(|(b, m)| {
                    let n = m.nrows();
                    let mut acc = CMatrix::zeros(n, n);
                    for &(_, pb, c) in g.iter().filter(|p| p.1 == b) {
                        let v = eig[pb].1.column(c);
                        acc += v * v.adjoint();
                    }
                    acc
                })
                .collect();
            SpectralComponent {
                eigenvalue: mean,
                projection: Projection::from_exact(Element::from_blocks_unchecked(blocks)),
            }
        })
        .collect())
}

/// Support projection of a positive element: the spectral projection onto
/// eigenvalues strictly above `tol`.
pub fn range_projection(x: &Element, tol: f64) -> Result<Projection> {
    require_self_adjoint(x, "range_projection")?;
    let h = x.hermitian_part();
    let mut blocks = Vec::with_capacity(h.blocks().len());
    for m in h.blocks() {
        let (vals, vecs) = herm_eigen(m);
        let n = m.nrows();
        let mut acc = CMatrix::zeros(n, n);
        for (c, &v) in vals.iter().enumerate() {
            if v < -tol {
                return Err(Error::Domain(format!(
                    "range_projection: element has eigenvalue {v:.3e} below -tol"
                )));
            }
            if v > tol {
                let col = vecs.column(c);
                acc += col * col.adjoint();
            }
        }
        blocks.push(acc);
    }
    Ok(Projection::from_exact(Element::from_blocks_unchecked(blocks)))
}
