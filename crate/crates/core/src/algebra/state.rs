use super::{range_projection, Algebra, CMatrix, Element, Projection, C64};
use crate::error::{Error, Result};
use crate::linalg::herm_eigen;

/// Violations up to this size are repaired on construction.
pub const REPAIR_LIMIT: f64 = 1e-8;
/// Positivity and trace tolerance of a valid density.
pub const STATE_TOL: f64 = 1e-10;

/// A state `φ(b) = trace(ρ b)` given by its density `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    density: Element,
}

impl State {
    /// Validates the density. Small violations (up to `1e-8`) of
    /// self-adjointness, positivity or unit trace are repaired by
    /// symmetrizing, clipping negative eigenvalues and renormalizing.
    pub fn new(density: Element) -> Result<Self> {
        let sa = density.sa_defect();
        if sa > REPAIR_LIMIT {
            return Err(Error::Domain(format!(
                "density is not self-adjoint (defect {sa:.3e})"
            )));
        }
        let h = density.hermitian_part();
        let eig: Vec<(Vec<f64>, CMatrix)> = h.blocks().iter().map(herm_eigen).collect();
        let min = eig
            .iter()
            .flat_map(|(v, _)| v.iter().copied())
            .fold(f64::INFINITY, f64::min);
        let tr: f64 = eig.iter().flat_map(|(v, _)| v.iter()).sum();
        if min < -REPAIR_LIMIT {
            return Err(Error::Domain(format!(
                "density has negative eigenvalue {min:.3e}"
            )));
        }
        if (tr - 1.0).abs() > REPAIR_LIMIT {
            return Err(Error::Domain(format!("density has trace {tr:.12}, expected 1")));
        }
        if min >= -STATE_TOL && (tr - 1.0).abs() <= STATE_TOL && sa <= 1e-12 {
            return Ok(Self { density: h });
        }
        let clipped_tr: f64 = eig.iter().flat_map(|(v, _)| v.iter()).map(|v| v.max(0.0)).sum();
        let blocks = eig
            .iter()
            .map(|(vals, vecs)| {
                let n = vals.len();
                let mut acc = CMatrix::zeros(n, n);
                for (c, v) in vals.iter().enumerate() {
                    if *v > 0.0 {
                        let col = vecs.column(c);
                        acc += (col * col.adjoint()) * C64::new(v / clipped_tr, 0.0);
                    }
                }
                acc
            })
            .collect();
        Ok(Self {
            density: Element::from_blocks_unchecked(blocks),
        })
    }

    /// `I / total_dim`.
    pub fn maximally_mixed(alg: &Algebra) -> Self {
        Self {
            density: alg.unit().scale(1.0 / alg.total_dim() as f64),
        }
    }

    /// Point mass at `i` in the commutative algebra `C^n`.
    pub fn dirac(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self {
            density: Element::from_real_diag(&v),
        }
    }

    /// Diagonal state on `C^n` from a probability vector.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        Self::new(Element::from_real_diag(masses))
    }

    pub fn density(&self) -> &Element {
        &self.density
    }

    pub fn algebra(&self) -> Algebra {
        self.density.algebra()
    }

    /// `φ(b) = trace(ρ b)`.
    pub fn eval(&self, b: &Element) -> Result<C64> {
        state_eval(self, b)
    }

    /// Real part of `φ(b)`; exact for self-adjoint `b`.
    pub fn eval_real(&self, b: &Element) -> Result<f64> {
        Ok(state_eval(self, b)?.re)
    }

    /// Trace-norm distance `||ρ - σ||_1`.
    pub fn trace_distance(&self, other: &State) -> f64 {
        (&self.density - &other.density).trace_norm()
    }

    /// Total mass carried by each block.
    pub fn block_weights(&self) -> Vec<f64> {
        self.density
            .blocks()
            .iter()
            .map(|m| m.trace().re)
            .collect()
    }

    /// Diagonal masses of a state on a commutative algebra.
    pub fn masses(&self) -> Vec<f64> {
        self.density.diag_values()
    }

    /// Convex combination `Σ w_i ρ_i`, repaired into a state.
    pub fn mixture(weights: &[f64], states: &[State]) -> Result<State> {
        let first = states
            .first()
            .ok_or_else(|| Error::Domain("mixture of no states".into()))?;
        let mut acc = first.algebra().zero();
        for (w, s) in weights.iter().zip(states) {
            s.density.ensure_same_shape(&acc)?;
            acc = &acc + &s.density.scale(*w);
        }
        State::new(acc)
    }
}

/// `φ(b) = trace(ρ b)`.
pub fn state_eval(rho: &State, b: &Element) -> Result<C64> {
    rho.density.ensure_same_shape(b)?;
    Ok(super::trace(&(&rho.density * b)))
}

/// Support projection `supp(φ)`: the smallest projection with `φ(p) = 1`.
pub fn state_support(rho: &State, tol: f64) -> Result<Projection> {
    range_projection(&rho.density, tol)
}
