//! Finite-dimensional C*-algebras realized as direct sums of full matrix
//! blocks `M_{n_1} ⊕ ... ⊕ M_{n_B}`.
//!
//! Every algebra handled here is unital, so the multiplier algebra and the
//! enveloping von Neumann algebra both coincide with the algebra itself.
//! All states are normal and every projection is simultaneously open and
//! closed.
//!
//! The self-adjoint part is coordinatized by an orthonormal basis for the
//! real inner product `<x, y> = Re tr(x y)`. Within each block of size `n`
//! the basis runs over the diagonal units `E_ii` first, then for every pair
//! `i < j` (row-major) the two elements `(E_ij + E_ji)/√2` and
//! `i(E_ij - E_ji)/√2`. Blocks are concatenated in order. Linear maps and
//! seminorms act on these coordinates.

mod element;
mod lattice;
pub mod sample;
mod spectral;
mod state;
mod trace;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use element::Element;
pub use lattice::{join_all, proj_join, proj_meet, Projection};
pub use spectral::{range_projection, spectral_decompose, SpectralComponent};
pub use state::{state_eval, state_support, State};
pub use trace::{trace, trace_eval, Trace};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Self-adjointness tolerance (max-entry) for elements.
pub const TOL_SA: f64 = 1e-12;
/// Default eigenvalue grouping tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A direct sum of full complex matrix blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Algebra {
    block_dims: Vec<usize>,
}

impl Algebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::Structural("algebra needs at least one block".into()));
        }
        if block_dims.contains(&0) {
            return Err(Error::Structural("block dimensions must be >= 1".into()));
        }
        Ok(Self { block_dims })
    }

    /// The full matrix algebra `M_n`.
    pub fn full_matrix(n: usize) -> Self {
        Self::new(vec![n]).expect("n >= 1")
    }

    /// The commutative algebra `C^n` (functions on `n` points).
    pub fn diagonal(n: usize) -> Self {
        Self::new(vec![1; n]).expect("n >= 1")
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Real dimension of the self-adjoint part, `Σ n_b²`.
    pub fn real_dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Dimension of the Hilbert space the algebra acts on, `Σ n_b`.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub fn unit(&self) -> Element {
        Element::from_blocks_unchecked(
            self.block_dims.iter().map(|&n| CMatrix::identity(n, n)).collect(),
        )
    }

    pub fn zero(&self) -> Element {
        Element::from_blocks_unchecked(
            self.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect(),
        )
    }

    /// Element with the given blocks, checked against this algebra's shape.
    pub fn element(&self, blocks: Vec<CMatrix>) -> Result<Element> {
        let x = Element::from_blocks(blocks)?;
        self.ensure(&x)?;
        Ok(x)
    }

    /// Block-diagonal element whose block `b` is the diagonal matrix with
    /// entries taken from `diag` in order.
    pub fn diag(&self, diag: &[f64]) -> Result<Element> {
        if diag.len() != self.total_dim() {
            return Err(Error::Structural(format!(
                "expected {} diagonal entries, got {}",
                self.total_dim(),
                diag.len()
            )));
        }
        let mut offset = 0;
        let blocks = self
            .block_dims
            .iter()
            .map(|&n| {
                let m = CMatrix::from_fn(n, n, |r, c| {
                    if r == c {
                        C64::new(diag[offset + r], 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                offset += n;
                m
            })
            .collect();
        Ok(Element::from_blocks_unchecked(blocks))
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.blocks().len() == self.block_dims.len()
            && x.blocks().iter().zip(&self.block_dims).all(|(m, &n)| m.nrows() == n)
    }

    pub(crate) fn ensure(&self, x: &Element) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "element with blocks {:?} does not belong to algebra {:?}",
                x.block_dims(),
                self.block_dims
            )))
        }
    }

    /// The `k`-th orthonormal self-adjoint basis element.
    pub fn basis_element(&self, k: usize) -> Element {
        let mut v = DVector::zeros(self.real_dim());
        v[k] = 1.0;
        self.from_sa_coords(&v)
    }

    pub fn basis(&self) -> Vec<Element> {
        (0..self.real_dim()).map(|k| self.basis_element(k)).collect()
    }

    /// Coordinates of the Hermitian part `(x + x*)/2` of `x`.
    pub fn sa_coords(&self, x: &Element) -> DVector<f64> {
        assert!(self.contains(x), "element does not belong to this algebra");
        let s = std::f64::consts::SQRT_2;
        let mut out = Vec::with_capacity(self.real_dim());
        for m in x.blocks() {
            let n = m.nrows();
            for i in 0..n {
                out.push(m[(i, i)].re);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push((m[(i, j)].re + m[(j, i)].re) / s);
                    out.push((m[(i, j)].im - m[(j, i)].im) / s);
                }
            }
        }
        DVector::from_vec(out)
    }

    pub fn from_sa_coords(&self, v: &DVector<f64>) -> Element {
        assert_eq!(v.len(), self.real_dim(), "coordinate vector has wrong length");
        let s = std::f64::consts::SQRT_2;
        let mut k = 0;
        let mut blocks = Vec::with_capacity(self.block_dims.len());
        for &n in &self.block_dims {
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = C64::new(v[k], 0.0);
                k += 1;
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let z = C64::new(v[k], v[k + 1]) / s;
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                    k += 2;
                }
            }
            blocks.push(m);
        }
        Element::from_blocks_unchecked(blocks)
    }

    /// Coordinate offset of block `b` inside the self-adjoint coordinates.
    pub fn block_offset(&self, b: usize) -> usize {
        self.block_dims[..b].iter().map(|n| n * n).sum()
    }
}

/// Real matrix of a real-linear map on self-adjoint elements, built column by
/// column from the basis.
pub(crate) fn coordinate_matrix<F>(alg: &Algebra, target: &Algebra, f: F) -> DMatrix<f64>
where
    F: Fn(&Element) -> Element,
{
    let cols: Vec<DVector<f64>> = alg
        .basis()
        .iter()
        .map(|e| target.sa_coords(&f(e)))
        .collect();
    DMatrix::from_columns(&cols)
}
