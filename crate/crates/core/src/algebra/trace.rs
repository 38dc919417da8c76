use super::{Element, C64};
use crate::error::{Error, Result};

/// `Σ_b trace(x_b)`.
pub fn trace(x: &Element) -> C64 {
    x.blocks().iter().map(|m| m.trace()).sum()
}

/// A trace `τ(x) = Σ_b w_b trace(x_b)` with nonnegative block weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    block_weights: Vec<f64>,
}

impl Trace {
    pub fn new(block_weights: Vec<f64>) -> Result<Self> {
        if block_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("trace weights must be finite and nonnegative".into()));
        }
        if !block_weights.iter().any(|w| *w > 0.0) {
            return Err(Error::Domain("trace needs at least one positive weight".into()));
        }
        Ok(Self { block_weights })
    }

    /// All block weights equal to one.
    pub fn counting(num_blocks: usize) -> Self {
        Self {
            block_weights: vec![1.0; num_blocks],
        }
    }

    pub fn block_weights(&self) -> &[f64] {
        &self.block_weights
    }

    pub fn eval(&self, x: &Element) -> Result<f64> {
        trace_eval(self, x)
    }
}

pub fn trace_eval(tau: &Trace, x: &Element) -> Result<f64> {
    if x.blocks().len() != tau.block_weights.len() {
        return Err(Error::Structural(format!(
            "trace has {} weights, element has {} blocks",
            tau.block_weights.len(),
            x.blocks().len()
        )));
    }
    if x.sa_defect() > 1e-10 {
        return Err(Error::Domain("trace_eval needs a self-adjoint element".into()));
    }
    Ok(x
        .blocks()
        .iter()
        .zip(&tau.block_weights)
        .map(|(m, w)| w * m.trace().re)
        .sum())
}
