use std::ops::{Add, Mul, Neg, Sub};

use super::{Algebra, CMatrix, C64};
use crate::error::{Error, Result};
use crate::linalg::herm_eigen;

/// A tuple of square complex blocks. The algebra is implied by the block
/// shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    blocks: Vec<CMatrix>,
}

impl Element {
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Structural("element needs at least one block".into()));
        }
        for (b, m) in blocks.iter().enumerate() {
            if m.nrows() != m.ncols() || m.nrows() == 0 {
                return Err(Error::Structural(format!(
                    "block {b} has shape {}x{}, expected a non-empty square",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMatrix>) -> Self {
        Self { blocks }
    }

    /// Diagonal element of the commutative algebra `C^n`.
    pub fn from_real_diag(values: &[f64]) -> Self {
        Self {
            blocks: values
                .iter()
                .map(|&v| CMatrix::from_element(1, 1, C64::new(v, 0.0)))
                .collect(),
        }
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|m| m.nrows()).collect()
    }

    pub fn algebra(&self) -> Algebra {
        Algebra::new(self.block_dims()).expect("element blocks are valid")
    }

    pub fn same_shape(&self, other: &Element) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
    }

    pub(crate) fn ensure_same_shape(&self, other: &Element) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "shape mismatch: {:?} vs {:?}",
                self.block_dims(),
                other.block_dims()
            )))
        }
    }

    pub fn adjoint(&self) -> Element {
        Self {
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Element {
        Self {
            blocks: self.blocks.iter().map(|m| m.scale(s)).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Element {
        Self {
            blocks: self.blocks.iter().map(|m| m * s).collect(),
        }
    }

    /// Max-entry norm.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Max-entry distance from being self-adjoint.
    pub fn sa_defect(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.sa_defect() <= tol
    }

    pub fn hermitian_part(&self) -> Element {
        (self + &self.adjoint()).scale(0.5)
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().fold(0.0, |acc, m| {
            let s = m
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .fold(0.0f64, |a, v| a.max(*v));
            acc.max(s)
        })
    }

    /// Trace norm of the Hermitian part (sum of absolute eigenvalues).
    pub fn trace_norm(&self) -> f64 {
        let h = self.hermitian_part();
        h.blocks
            .iter()
            .map(|m| herm_eigen(m).0.iter().map(|v| v.abs()).sum::<f64>())
            .sum()
    }

    /// Eigenvalues of the Hermitian part, all blocks pooled, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        let mut all: Vec<f64> = h.blocks.iter().flat_map(|m| herm_eigen(m).0).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Real diagonal of a commutative element (one entry per 1x1 block).
    pub fn diag_values(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|m| (0..m.nrows()).map(move |i| m[(i, i)].re))
            .collect()
    }
}

impl Add for &Element {
    type Output = Element;
    /// Panics if the operands have different shapes.
    fn add(self, rhs: &Element) -> Element {
        assert!(self.same_shape(rhs), "element shape mismatch");
        Element {
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        assert!(self.same_shape(rhs), "element shape mismatch");
        Element {
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        assert!(self.same_shape(rhs), "element shape mismatch");
        Element {
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a * b).collect(),
        }
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

impl Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        &self + &rhs
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        &self - &rhs
    }
}

impl Mul for Element {
    type Output = Element;
    fn mul(self, rhs: Element) -> Element {
        &self * &rhs
    }
}
