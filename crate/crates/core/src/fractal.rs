//! Self-similar support projections, weight independence of supports,
//! trace scaling and overlaps, and local flatness diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{
    join_all, proj_meet, sample, spectral_decompose, state_support, Algebra, Element, Projection, State, Trace,
    DEFAULT_TOL,
};
use crate::dynamics::{check_budget, fixed_state_eigen, for_each_word, markov_apply, Weights};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::orthonormalize;
use crate::morphism::{upper_preimage, DualIfs, StarHom};
use crate::seminorm::{ifs_dilations, seminorm_kernel, spectral_distance, Seminorm};

/// Fixed-point residual allowed for a state passed as self-similar.
pub const FIXED_RESIDUAL_TOL: f64 = 1e-8;
pub const BUMP_TOL: f64 = 1e-10;

/// `supp(ρ)` against `⋁_i uppreimage(f_i)(supp ρ)`.
#[derive(Clone, Debug)]
pub struct SelfSimReport {
    pub lhs: Projection,
    pub rhs: Projection,
    /// Max-entry difference `|lhs − rhs|`.
    pub defect: f64,
    /// `|q_i p − q_i|` for `q_i = uppreimage(f_i)(p)`, `p = lhs`: each
    /// pre-image must sit below the support.
    pub containment: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

fn require_strict(w: &Weights) -> Result<()> {
    if !w.is_strict() {
        return Err(Error::Precondition(
            "weights must be strictly positive: support results need the strict simplex".into(),
        ));
    }
    Ok(())
}

pub fn selfsim_support_check(ifs: &DualIfs, weights: &Weights, rho: &State, tol: f64) -> Result<SelfSimReport> {
    require_strict(weights)?;
    let residual = (markov_apply(ifs, weights, rho)?.density() - rho.density()).trace_norm();
    if residual > FIXED_RESIDUAL_TOL {
        return Err(Error::Precondition(format!(
            "state is not self-similar: fixed-point residual {residual:.3e} exceeds {FIXED_RESIDUAL_TOL:.0e}"
        )));
    }
    let lhs = state_support(rho, tol)?;
    let pre: Vec<Projection> = ifs
        .homs()
        .iter()
        .map(|f| upper_preimage(f, &lhs, DEFAULT_TOL))
        .collect::<Result<_>>()?;
    let containment: Vec<f64> = pre.iter().map(|q| q.leq_defect(&lhs)).collect();
    let rhs = join_all(&pre)?;
    let defect = (lhs.element() - rhs.element()).max_abs();
    let pass = defect <= tol && containment.iter().all(|&c| c <= tol);
    Ok(SelfSimReport {
        lhs,
        rhs,
        defect,
        containment,
        tol,
        pass,
    })
}

/// Supports of the fixed states for two weight vectors.
#[derive(Clone, Debug)]
pub struct WeightInvarianceReport {
    pub support_a: Projection,
    pub support_b: Projection,
    pub lambda_sum_a: f64,
    pub lambda_sum_b: f64,
    /// `d_L` between the two fixed states.
    pub distance: f64,
    pub defect: f64,
    pub tol: f64,
    pub pass: bool,
}

fn contractive_sum(l: &Seminorm, ifs: &DualIfs, w: &Weights) -> Result<f64> {
    match ifs_dilations(l, ifs, w)?.0 {
        ExtendedReal::Finite(s) if s < 1.0 => Ok(s),
        s => Err(Error::Precondition(format!(
            "Λ_sum = {s} ≥ 1: support invariance requires contractivity on average"
        ))),
    }
}

pub fn support_weight_invariance(
    ifs: &DualIfs,
    a: &Weights,
    b: &Weights,
    l: &Seminorm,
    tol: f64,
) -> Result<WeightInvarianceReport> {
    require_strict(a)?;
    require_strict(b)?;
    let lambda_sum_a = contractive_sum(l, ifs, a)?;
    let lambda_sum_b = contractive_sum(l, ifs, b)?;
    let phi = fixed_state_eigen(ifs, a)?.representative;
    let psi = fixed_state_eigen(ifs, b)?.representative;
    let distance = spectral_distance(l, &phi, &psi)?.finite().ok_or_else(|| {
        Error::Precondition("the two self-similar states are at infinite distance; supports may differ".into())
    })?;
    let support_a = state_support(&phi, tol)?;
    let support_b = state_support(&psi, tol)?;
    let defect = (support_a.element() - support_b.element()).max_abs();
    Ok(WeightInvarianceReport {
        support_a,
        support_b,
        lambda_sum_a,
        lambda_sum_b,
        distance,
        defect,
        tol,
        pass: defect <= tol,
    })
}

/// Join of word-fixed-state supports by maximal word length.
#[derive(Clone, Debug)]
pub struct WordSupportReport {
    /// `(M, defect)` for `M = 1..=max_len`, defect against `supp(φ_π)`.
    pub defects: Vec<(usize, f64)>,
    /// The join over all words of length ≤ `max_len`.
    pub projection: Projection,
    pub target: Projection,
    /// Smallest `M` from which the defect stays within `tol`.
    pub stabilized_at: Option<usize>,
    pub tol: f64,
}

pub fn support_from_words(
    ifs: &DualIfs,
    weights: &Weights,
    max_len: usize,
    l: &Seminorm,
    tol: f64,
    budget: usize,
) -> Result<WordSupportReport> {
    require_strict(weights)?;
    match ifs_dilations(l, ifs, weights)?.1 {
        ExtendedReal::Finite(s) if s < 1.0 => {}
        s => {
            return Err(Error::Precondition(format!(
                "Λ_sup = {s} ≥ 1: word fixed states need strict contractivity"
            )))
        }
    }
    if max_len == 0 {
        return Err(Error::Domain("word length must be at least 1".into()));
    }
    for m in 1..=max_len {
        check_budget(ifs.len(), m, budget)?;
    }
    let target = state_support(&fixed_state_eigen(ifs, weights)?.representative, tol)?;
    let mut acc = Projection::zero(ifs.algebra());
    let mut defects = Vec::with_capacity(max_len);
    for m in 1..=max_len {
        let mut supports = vec![acc.clone()];
        for_each_word(ifs, m, budget, |_, f| {
            let single = DualIfs::new(vec![f.clone()])?;
            let phi = fixed_state_eigen(&single, &Weights::uniform(1))?.representative;
            supports.push(state_support(&phi, tol)?);
            Ok(())
        })?;
        acc = join_all(&supports)?;
        defects.push((m, (acc.element() - target.element()).max_abs()));
    }
    let stabilized_at = defects
        .iter()
        .rposition(|&(_, d)| d > tol)
        .map_or(Some(1), |i| (i + 1 < defects.len()).then_some(i + 2));
    Ok(WordSupportReport {
        defects,
        projection: acc,
        target,
        stabilized_at,
        tol,
    })
}

/// Outcome of [`trace_scaling`].
#[derive(Clone, Debug, PartialEq)]
pub enum TraceScaling {
    /// `τ(uppreimage(f)(p)) = S⁻¹ τ(p)` on every sample.
    Uniform { s: f64, ratios: Vec<f64> },
    NoUniformScaling { ratios: Vec<f64> },
}

impl TraceScaling {
    pub fn factor(&self) -> Option<f64> {
        match self {
            TraceScaling::Uniform { s, .. } => Some(*s),
            TraceScaling::NoUniformScaling { .. } => None,
        }
    }

    pub fn ratios(&self) -> &[f64] {
        match self {
            TraceScaling::Uniform { ratios, .. } | TraceScaling::NoUniformScaling { ratios } => ratios,
        }
    }
}

/// Projections in the range of `f`: the unit and the spectral projections of
/// `f(b)` for seeded random self-adjoint `b`.
pub fn range_projections(f: &StarHom, n_samples: usize, seed: u64) -> Result<Vec<Projection>> {
    let alg = f.algebra();
    let mut rng = sample::rng(seed);
    let mut out = vec![Projection::unit(alg)];
    for _ in 0..n_samples {
        let b = sample::random_self_adjoint(alg, &mut rng);
        for c in spectral_decompose(&f.apply(&b), 1e-8)? {
            out.push(c.projection);
        }
    }
    Ok(out)
}

/// Fits a common ratio `τ(uppreimage(f)(p)) / τ(p)` over projections `p` in
/// the range of `f`; `S` is its inverse.
pub fn trace_scaling(tau: &Trace, f: &StarHom, n_samples: usize, seed: u64, tol: f64) -> Result<TraceScaling> {
    let mut ratios = Vec::new();
    for p in range_projections(f, n_samples, seed)? {
        let tp = tau.eval(p.element())?;
        if tp.abs() <= 1e-12 {
            continue;
        }
        let q = upper_preimage(f, &p, DEFAULT_TOL)?;
        ratios.push(tau.eval(q.element())? / tp);
    }
    if ratios.is_empty() {
        return Ok(TraceScaling::NoUniformScaling { ratios });
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if mean <= 0.0 || ratios.iter().any(|r| (r - mean).abs() > tol) {
        return Ok(TraceScaling::NoUniformScaling { ratios });
    }
    Ok(TraceScaling::Uniform { s: 1.0 / mean, ratios })
}

/// `τ(uppreimage(f_i)(p) ∧ uppreimage(f_j)(p))` for all `i, j`.
pub fn overlap_traces(tau: &Trace, ifs: &DualIfs, p: &Projection) -> Result<DMatrix<f64>> {
    let pre: Vec<Projection> = ifs
        .homs()
        .iter()
        .map(|f| upper_preimage(f, p, DEFAULT_TOL))
        .collect::<Result<_>>()?;
    let k = pre.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = if i == j {
                tau.eval(pre[i].element())?
            } else {
                tau.eval(proj_meet(&pre[i], &pre[j])?.element())?
            };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Whether `Σ S_i⁻¹ = 1` within `1e-9`.
pub fn scaling_gate(factors: &[f64]) -> bool {
    (factors.iter().map(|s| 1.0 / s).sum::<f64>() - 1.0).abs() <= 1e-9
}

/// Result of [`is_bump`]. The witness `I_a` with `I_a·a = a` is the unit.
#[derive(Clone, Debug)]
pub struct BumpCheck {
    pub is_bump: bool,
    pub witness: Element,
    pub min_eigenvalue: f64,
    pub norm: f64,
}

/// `0 ≤ a ≤ I` and `|a| = 1`, within [`BUMP_TOL`].
pub fn is_bump(a: &Element) -> BumpCheck {
    let alg = a.algebra();
    let sa = a.is_self_adjoint(BUMP_TOL);
    let eig = if sa { a.hermitian_part().eigenvalues() } else { vec![f64::NAN] };
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let norm = a.op_norm();
    let is_bump = sa && min_eigenvalue >= -BUMP_TOL && (norm - 1.0).abs() <= BUMP_TOL;
    BumpCheck {
        is_bump,
        witness: alg.unit(),
        min_eigenvalue,
        norm,
    }
}

/// Spectral clamp `min(x / level, 1)` of a positive element; a bump
/// whenever `level < |x|`.
pub fn clamp_bump(x: &Element, level: f64) -> Result<Element> {
    let alg = x.algebra();
    let mut out = alg.zero();
    for c in spectral_decompose(x, 1e-12)? {
        if c.eigenvalue < -BUMP_TOL {
            return Err(Error::Domain("clamp needs a positive element".into()));
        }
        let v = (c.eigenvalue.max(0.0) / level).min(1.0);
        out = &out + &c.projection.element().scale(v);
    }
    Ok(out)
}

/// Orthonormal basis of `locflat(a) = a·ker(L)·a`.
pub fn local_flat_space(l: &Seminorm, a: &Element) -> Result<Vec<Element>> {
    let alg: &Algebra = l.algebra();
    alg.ensure(a)?;
    if !is_bump(a).is_bump {
        return Err(Error::Precondition("element is not a compactly supported bump".into()));
    }
    let images: Vec<DVector<f64>> = seminorm_kernel(l)
        .iter()
        .map(|z| alg.sa_coords(&(&(a * z) * a).hermitian_part()))
        .collect();
    Ok(orthonormalize(&images, 1e-10)
        .iter()
        .map(|v| alg.from_sa_coords(v))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    SemiConsistent,
}

impl Consistency {
    pub fn name(self) -> &'static str {
        match self {
            Consistency::Consistent => "consistent",
            Consistency::SemiConsistent => "semi-consistent",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalClass {
    pub flat_dim: usize,
    pub classification: Consistency,
}

pub fn classify_local(l: &Seminorm, a: &Element) -> Result<LocalClass> {
    let flat_dim = local_flat_space(l, a)?.len();
    Ok(LocalClass {
        flat_dim,
        classification: if flat_dim == 1 {
            Consistency::Consistent
        } else {
            Consistency::SemiConsistent
        },
    })
}
