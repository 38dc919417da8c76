//! Projections and the projection lattice.

use super::{Algebra, CMatrix, Element};
use crate::error::{Error, Result};
use crate::linalg::herm_eigen;

/// Idempotence tolerance for projections (max-entry of `p² - p`).
pub const TOL_IDEMPOTENT: f64 = 1e-9;
/// Eigenvalues within this distance of 0 or 1 are snapped during repair.
pub const SNAP_WINDOW: f64 = 0.1;

/// A self-adjoint idempotent element.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    element: Element,
}

impl Projection {
    /// Checks `p = p* = p²` within tolerance.
    pub fn new(element: Element) -> Result<Self> {
        let sa = element.sa_defect();
        let idem = (&(&element * &element) - &element).max_abs();
        if sa > TOL_IDEMPOTENT || idem > TOL_IDEMPOTENT {
            return Err(Error::Domain(format!(
                "not a projection: self-adjoint defect {sa:.3e}, idempotence defect {idem:.3e}"
            )));
        }
        Ok(Self { element })
    }

    /// Rebuilds a projection from an approximately idempotent element by
    /// snapping its eigenvalues to {0, 1}.
    pub fn repair(element: &Element) -> Result<Self> {
        if element.sa_defect() > SNAP_WINDOW {
            return Err(Error::Domain("projection repair: element far from self-adjoint".into()));
        }
        let h = element.hermitian_part();
        let mut blocks = Vec::with_capacity(h.blocks().len());
        for m in h.blocks() {
            let (vals, vecs) = herm_eigen(m);
            let n = m.nrows();
            let mut acc = CMatrix::zeros(n, n);
            for (c, v) in vals.iter().enumerate() {
                if (v - 1.0).abs() <= SNAP_WINDOW {
                    let col = vecs.column(c);
                    acc += col * col.adjoint();
                } else if v.abs() > SNAP_WINDOW {
                    return Err(Error::Domain(format!(
                        "projection repair: eigenvalue {v:.4} is not near 0 or 1"
                    )));
                }
            }
            blocks.push(acc);
        }
        Ok(Self {
            element: Element::from_blocks_unchecked(blocks),
        })
    }

    pub(crate) fn from_exact(element: Element) -> Self {
        Self { element }
    }

    pub fn zero(alg: &Algebra) -> Self {
        Self { element: alg.zero() }
    }

    pub fn unit(alg: &Algebra) -> Self {
        Self { element: alg.unit() }
    }

    /// Indicator of a set of points in the commutative algebra `C^n`.
    pub fn indicator(n: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut v = vec![0.0; n];
        for i in points {
            v[i] = 1.0;
        }
        Self {
            element: Element::from_real_diag(&v),
        }
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn into_element(self) -> Element {
        self.element
    }

    pub fn algebra(&self) -> Algebra {
        self.element.algebra()
    }

    /// `trace(p)`, i.e. the total rank.
    pub fn rank(&self) -> f64 {
        super::trace(&self.element).re
    }

    pub fn complement(&self) -> Projection {
        Self {
            element: &self.algebra().unit() - &self.element,
        }
    }

    /// Max-entry defect of `p ≤ q`, measured as `|q p - p|`.
    pub fn leq_defect(&self, other: &Projection) -> f64 {
        (&(&other.element * &self.element) - &self.element).max_abs()
    }

    pub fn leq(&self, other: &Projection, tol: f64) -> bool {
        self.leq_defect(other) <= tol
    }

    pub fn distance(&self, other: &Projection) -> f64 {
        (&self.element - &other.element).max_abs()
    }

    /// Points in the support of a commutative projection.
    pub fn points(&self) -> Vec<usize> {
        self.element
            .diag_values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.5)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Projection onto `range(p) ∩ range(q)`: the eigenvalue-1 spectral projection
/// of `(p + q)/2`.
pub fn proj_meet(p: &Projection, q: &Projection) -> Result<Projection> {
    p.element.ensure_same_shape(&q.element)?;
    let sum = &p.element + &q.element;
    spectral_cut(&sum, |v| v > 2.0 - 1e-8)
}

/// Projection onto `range(p) + range(q) = range(p + q)`.
pub fn proj_join(p: &Projection, q: &Projection) -> Result<Projection> {
    p.element.ensure_same_shape(&q.element)?;
    let sum = &p.element + &q.element;
    spectral_cut(&sum, |v| v > 1e-8)
}

fn spectral_cut(x: &Element, keep: impl Fn(f64) -> bool) -> Result<Projection> {
    let blocks = x
        .blocks()
        .iter()
        .map(|m| {
            let (vals, vecs) = herm_eigen(m);
            let n = m.nrows();
            let mut acc = CMatrix::zeros(n, n);
            for (c, v) in vals.iter().enumerate() {
                if keep(*v) {
                    let col = vecs.column(c);
                    acc += col * col.adjoint();
                }
            }
            acc
        })
        .collect();
    Ok(Projection::from_exact(Element::from_blocks_unchecked(blocks)))
}

/// Join of a non-empty family.
pub fn join_all<'a>(ps: impl IntoIterator<Item = &'a Projection>) -> Result<Projection> {
    let mut it = ps.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Domain("join of an empty family".into()))?
        .clone();
    it.try_fold(first, |acc, p| proj_join(&acc, p))
}
