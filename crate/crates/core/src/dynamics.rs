//! The mixed dual action `π·F*`, its fixed states, word fixed states and
//! code-space averages, the Banach rate certificate and the Cesàro probe.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{Algebra, Element, State};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::null_space;
use crate::morphism::{word_hom, DualIfs, StarHom, Word};
use crate::seminorm::{ifs_dilations, seminorm_eval, spectral_distance, Seminorm};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const DEFAULT_BUDGET: usize = 4096;
/// Singular values below this count as zero in fixed-space solves.
pub const NULL_CUT: f64 = 1e-9;
/// Singular values in `(NULL_CUT, RANK_WARN]` trigger a rank warning.
pub const RANK_WARN: f64 = 1e-7;
/// Window over which a non-decreasing gap switches plain iteration to
/// Cesàro mode.
pub const OSCILLATION_WINDOW: usize = 20;

/// Probability weights on the maps of an IFS.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
}

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("weights must be non-empty".into()));
        }
        if values.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("weights must be finite and nonnegative".into()));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Domain(format!("weights sum to {s}, not 1")));
        }
        Ok(Self { values })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            values: vec![1.0 / k as f64; k],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All weights strictly positive.
    pub fn is_strict(&self) -> bool {
        self.values.iter().all(|&w| w > 0.0)
    }

    /// `π_ω = Π π_{ω_m}`.
    pub fn word_weight(&self, word: &[usize]) -> f64 {
        word.iter().map(|&a| self.values[a]).product()
    }
}

fn check_lengths(ifs: &DualIfs, weights: &Weights) -> Result<()> {
    if ifs.len() != weights.len() {
        return Err(Error::Structural(format!(
            "{} maps but {} weights",
            ifs.len(),
            weights.len()
        )));
    }
    Ok(())
}

/// Matrix of `π·F*` on self-adjoint coordinates: `Σ π_i F_iᵀ`.
pub fn markov_matrix(ifs: &DualIfs, weights: &Weights) -> Result<DMatrix<f64>> {
    check_lengths(ifs, weights)?;
    let n = ifs.algebra().real_dim();
    let mut t = DMatrix::zeros(n, n);
    for (f, &w) in ifs.homs().iter().zip(weights.values()) {
        t += f.matrix().transpose() * w;
    }
    Ok(t)
}

/// `(π·F*)ρ = Σ π_i f_i* ρ`.
pub fn markov_apply(ifs: &DualIfs, weights: &Weights, rho: &State) -> Result<State> {
    let alg = ifs.algebra();
    alg.ensure(rho.density())?;
    let t = markov_matrix(ifs, weights)?;
    apply_coords(alg, &t, rho)
}

fn apply_coords(alg: &Algebra, t: &DMatrix<f64>, rho: &State) -> Result<State> {
    let v = t * alg.sa_coords(rho.density());
    State::new(alg.from_sa_coords(&v)).map_err(|e| Error::Numerical(format!("iterate left the state space: {e}")))
}

/// Metric used for a convergence gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapMetric {
    TraceNorm,
    SpectralDistance,
}

impl GapMetric {
    pub fn tag(self) -> &'static str {
        match self {
            GapMetric::TraceNorm => "trace_norm",
            GapMetric::SpectralDistance => "d_L",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub gap: f64,
    pub metric: GapMetric,
}

/// Gap per iteration step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn push(&mut self, step: usize, gap: f64, metric: GapMetric) {
        debug_assert!(self.rows.last().is_none_or(|r| r.step < step));
        self.rows.push(TraceRow { step, gap, metric });
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last_gap(&self) -> Option<f64> {
        self.rows.last().map(|r| r.gap)
    }

    /// CSV with header `step,gap,metric`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,gap,metric\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.16e},{}", r.step, r.gap, r.metric.tag());
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationMode {
    Plain,
    /// Iterates the averaged map `(1 + π·F*)/2`, whose orbit converges to the
    /// Cesàro limit of the original orbit at a geometric rate.
    Cesaro,
}

/// Result of [`fixed_state_iterate`]. Non-convergence is reported through
/// `converged`, with the last iterate and the full trace.
#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub state: State,
    pub trace: ConvergenceTrace,
    pub converged: bool,
    /// Mode in effect at the end; differs from the requested one after an
    /// oscillation fallback.
    pub mode: IterationMode,
    pub steps: usize,
}

/// Iterates `π·F*` from `rho0`. The gap at step `s` is
/// `|(π·F*)ρ_s − ρ_s|_1`, so a converged state satisfies the fixed-point
/// residual bound directly. Plain mode switches to Cesàro mode if the gap has
/// not decreased over [`OSCILLATION_WINDOW`] steps.
pub fn fixed_state_iterate(
    ifs: &DualIfs,
    weights: &Weights,
    rho0: &State,
    max_steps: usize,
    gap_tol: f64,
    mode: IterationMode,
) -> Result<IterationOutcome> {
    let alg = ifs.algebra().clone();
    alg.ensure(rho0.density())?;
    let t = markov_matrix(ifs, weights)?;
    let n = t.nrows();
    let lazy = (&t + DMatrix::identity(n, n)) * 0.5;
    let mut mode = mode;
    let mut trace = ConvergenceTrace::default();
    let mut rho = rho0.clone();
    for step in 0..=max_steps {
        let image = apply_coords(&alg, &t, &rho)?;
        let gap = (image.density() - rho.density()).trace_norm();
        trace.push(step, gap, GapMetric::TraceNorm);
        if gap <= gap_tol {
            return Ok(IterationOutcome {
                state: rho,
                trace,
                converged: true,
                mode,
                steps: step,
            });
        }
        if step == max_steps {
            break;
        }
        if mode == IterationMode::Plain && step >= OSCILLATION_WINDOW {
            let earlier = trace.rows()[step - OSCILLATION_WINDOW].gap;
            if gap >= earlier {
                mode = IterationMode::Cesaro;
            }
        }
        rho = match mode {
            IterationMode::Plain => image,
            IterationMode::Cesaro => apply_coords(&alg, &lazy, &rho)?,
        };
    }
    Ok(IterationOutcome {
        state: rho,
        trace,
        converged: false,
        mode,
        steps: max_steps,
    })
}

/// The full fixed set of `π·F*`.
#[derive(Clone, Debug)]
pub struct FixedSet {
    /// Real dimension of the fixed subspace of the self-adjoint part.
    pub dimension: usize,
    /// The ergodic projection of the maximally mixed state.
    pub representative: State,
    /// Orthonormal basis of fixed self-adjoint elements.
    pub basis: Vec<Element>,
    pub warning: Option<String>,
    projector: DMatrix<f64>,
}

impl FixedSet {
    pub fn is_unique(&self) -> bool {
        self.dimension == 1
    }

    /// Ergodic projection of a state onto the fixed states.
    pub fn project(&self, rho: &State) -> Result<State> {
        apply_coords(&self.representative.algebra(), &self.projector, rho)
    }
}

/// Solves `(π·F*)ρ = ρ` exactly. The representative is `E(I/n)` where `E` is
/// the spectral projection onto the eigenvalue-1 space along the other
/// eigenspaces, i.e. the limit of Cesàro means.
pub fn fixed_state_eigen(ifs: &DualIfs, weights: &Weights) -> Result<FixedSet> {
    let alg = ifs.algebra().clone();
    let t = markov_matrix(ifs, weights)?;
    let n = t.nrows();
    let a = &t - DMatrix::identity(n, n);
    let (right, svals) = null_space(&a, NULL_CUT);
    let (left, _) = null_space(&a.transpose(), NULL_CUT);
    let dimension = right.ncols();
    let warning = svals
        .iter()
        .find(|s| **s > NULL_CUT && **s <= RANK_WARN)
        .map(|s| format!("singular value {s:.3e} lies within the rank-ambiguity band"));
    if dimension == 0 || left.ncols() != dimension {
        return Err(Error::Numerical("dual map has no clean eigenvalue-1 space".into()));
    }
    let gram = left.transpose() * &right;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvalue 1 of the dual map is not semisimple".into()))?;
    let projector = &right * inv * left.transpose();
    let mixed = State::maximally_mixed(&alg);
    let representative = apply_coords(&alg, &projector, &mixed)?;
    let basis = right
        .column_iter()
        .map(|c| alg.from_sa_coords(&DVector::from_iterator(n, c.iter().copied())))
        .collect();
    Ok(FixedSet {
        dimension,
        representative,
        basis,
        warning,
        projector,
    })
}

/// Fixed state `φ_ω` of `f_ω*`.
#[derive(Clone, Debug)]
pub struct WordFixedState {
    pub state: State,
    pub dimension: usize,
    pub unique: bool,
    pub warning: Option<String>,
}

pub fn word_fixed_state(ifs: &DualIfs, word: &Word) -> Result<WordFixedState> {
    if word.is_empty() {
        return Err(Error::Domain("word fixed state needs a non-empty word".into()));
    }
    let f = word_hom(ifs, word)?;
    hom_fixed_state(&f)
}

fn hom_fixed_state(f: &StarHom) -> Result<WordFixedState> {
    let single = DualIfs::new(vec![f.clone()])?;
    let fixed = fixed_state_eigen(&single, &Weights::uniform(1))?;
    Ok(WordFixedState {
        unique: fixed.is_unique(),
        dimension: fixed.dimension,
        state: fixed.representative,
        warning: fixed.warning,
    })
}

/// `k^m` if it fits within `budget`.
pub fn check_budget(k: usize, m: usize, budget: usize) -> Result<usize> {
    let needed = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::Budget { needed, budget });
    }
    Ok(needed as usize)
}

/// Visits every word of length `m` in lexicographic order with `f_ω`,
/// building each composition incrementally from its prefix.
pub(crate) fn for_each_word(
    ifs: &DualIfs,
    m: usize,
    budget: usize,
    mut visit: impl FnMut(&[usize], &StarHom) -> Result<()>,
) -> Result<()> {
    let k = ifs.len();
    check_budget(k, m, budget)?;
    let mut prefixes: Vec<StarHom> = vec![StarHom::identity(ifs.algebra())];
    let mut letters: Vec<usize> = Vec::with_capacity(m);
    fn rec(
        ifs: &DualIfs,
        m: usize,
        letters: &mut Vec<usize>,
        prefixes: &mut Vec<StarHom>,
        visit: &mut dyn FnMut(&[usize], &StarHom) -> Result<()>,
    ) -> Result<()> {
        if letters.len() == m {
            return visit(letters, prefixes.last().expect("non-empty"));
        }
        for a in 0..ifs.len() {
            let next = prefixes.last().expect("non-empty").compose(&ifs.homs()[a])?;
            letters.push(a);
            prefixes.push(next);
            rec(ifs, m, letters, prefixes, visit)?;
            prefixes.pop();
            letters.pop();
        }
        Ok(())
    }
    rec(ifs, m, &mut letters, &mut prefixes, &mut visit)
}

/// `φ^M = Σ_{|ω|=M} π_ω φ_ω`, reduced in lexicographic word order.
pub fn code_average(ifs: &DualIfs, weights: &Weights, m: usize, budget: usize) -> Result<State> {
    check_lengths(ifs, weights)?;
    if m == 0 {
        return Err(Error::Domain("code average needs M ≥ 1".into()));
    }
    let alg = ifs.algebra().clone();
    let mut acc = alg.zero();
    let mut total = 0.0;
    for_each_word(ifs, m, budget, |w, f| {
        let pw = weights.word_weight(w);
        total += pw;
        if pw > 0.0 {
            let phi = hom_fixed_state(f)?;
            acc = &acc + &phi.state.density().scale(pw);
        }
        Ok(())
    })?;
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Numerical(format!("word weights sum to {total}")));
    }
    State::new(acc)
}

/// Inputs and both sides of `d_L(φ_M, φ^M) ≤ CΛ^M/(1−Λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BanachCertificate {
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub c: f64,
    pub lambda: f64,
}

impl BanachCertificate {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

/// Compares the `M`-th iterate of `φ0` with the code average `φ^M`, using
/// `Λ = Λ_sup` and `C = max_i d_L(φ0, f_i*φ0)`.
pub fn banach_certificate(
    ifs: &DualIfs,
    weights: &Weights,
    l: &Seminorm,
    phi0: &State,
    m: usize,
    budget: usize,
) -> Result<BanachCertificate> {
    let (_, sup) = ifs_dilations(l, ifs, weights)?;
    let lambda = match sup {
        ExtendedReal::Finite(v) if v < 1.0 => v,
        _ => {
            return Err(Error::Precondition(format!(
                "Λ_sup = {sup} ≥ 1: the rate bound requires strict contractivity"
            )))
        }
    };
    let mut c = 0.0f64;
    for f in ifs.homs() {
        let img = crate::morphism::dual_apply(f, phi0)?;
        match spectral_distance(l, phi0, &img)? {
            ExtendedReal::Finite(d) => c = c.max(d),
            ExtendedReal::Inf => {
                return Err(Error::Precondition(
                    "C = max_i d_L(φ0, f_i*φ0) is infinite: the start must be at finite distance".into(),
                ))
            }
        }
    }
    let t = markov_matrix(ifs, weights)?;
    let alg = ifs.algebra();
    let mut phi = phi0.clone();
    for _ in 0..m {
        phi = apply_coords(alg, &t, &phi)?;
    }
    let avg = code_average(ifs, weights, m, budget)?;
    let lhs = spectral_distance(l, &phi, &avg)?
        .finite()
        .ok_or_else(|| {
            Error::Precondition("iterate and code average at infinite distance: the start is not within finite distance of the self-similar states".into())
        })?;
    let rhs = c * lambda.powi(m as i32) / (1.0 - lambda);
    Ok(BanachCertificate { m, lhs, rhs, c, lambda })
}

/// One Cesàro mean `b_n = (1/(n+1)) Σ_{i≤n} f^i(b)` with its diagnostics.
#[derive(Clone, Debug)]
pub struct CesaroStep {
    pub n: usize,
    pub average: Element,
    /// `|b_n − b_{n−1}|_op`; zero at `n = 0`.
    pub step_diff: f64,
    /// `|f(b_n) − b_n|_op`.
    pub invariance_defect: f64,
    pub seminorm: Option<f64>,
}

/// Cesàro means `b_0, ..., b_n`.
pub fn cesaro_sequence(f: &StarHom, b: &Element, n: usize, l: Option<&Seminorm>) -> Result<Vec<CesaroStep>> {
    f.algebra().ensure(b)?;
    if !b.is_self_adjoint(1e-10) {
        return Err(Error::Domain("Cesàro probe needs a self-adjoint element".into()));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut orbit = b.clone();
    let mut sum = f.algebra().zero();
    let mut prev: Option<Element> = None;
    for i in 0..=n {
        sum = &sum + &orbit;
        let avg = sum.scale(1.0 / (i + 1) as f64);
        let step_diff = prev.as_ref().map_or(0.0, |p| (&avg - p).op_norm());
        let invariance_defect = (&f.apply(&avg) - &avg).op_norm();
        let seminorm = l.map(|l| seminorm_eval(l, &avg)).transpose()?;
        out.push(CesaroStep {
            n: i,
            average: avg.clone(),
            step_diff,
            invariance_defect,
            seminorm,
        });
        prev = Some(avg);
        orbit = f.apply(&orbit);
    }
    Ok(out)
}

pub fn cesaro_average(f: &StarHom, b: &Element, n: usize, l: Option<&Seminorm>) -> Result<CesaroStep> {
    Ok(cesaro_sequence(f, b, n, l)?.pop().expect("n + 1 entries"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{sample, CMatrix, C64};
    use crate::classical::{lift_map, shift_maps, FiniteMetricSpace};
    use crate::morphism::dual_apply;

    fn shift_ifs(depth: usize) -> DualIfs {
        DualIfs::new(shift_maps(2, depth).iter().map(lift_map).collect()).unwrap()
    }

    fn sx() -> Element {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Element::from_blocks(vec![CMatrix::from_row_slice(2, 2, &[o, l, l, o])]).unwrap()
    }

    fn qubit_ifs() -> DualIfs {
        let alg = Algebra::full_matrix(2);
        DualIfs::new(vec![StarHom::identity(&alg), StarHom::from_unitary(&sx()).unwrap()]).unwrap()
    }

    fn collapse_ifs() -> DualIfs {
        let alg = Algebra::new(vec![2, 1]).unwrap();
        DualIfs::new(vec![StarHom::from_pattern(&alg, &[vec![(1, 2)], vec![(1, 1)]], None).unwrap()]).unwrap()
    }

    fn close(a: &State, b: &State, tol: f64) -> bool {
        (a.density() - b.density()).max_abs() <= tol
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(vec![0.5, 0.5]).unwrap().is_strict());
        assert!(!Weights::new(vec![1.0, 0.0]).unwrap().is_strict());
        assert!(Weights::new(vec![0.5, 0.4]).is_err());
        assert!(Weights::new(vec![1.5, -0.5]).is_err());
        assert!(Weights::new(vec![]).is_err());
        assert!((Weights::new(vec![0.3, 0.7]).unwrap().word_weight(&[0, 1, 1]) - 0.147).abs() < 1e-15);
    }

    #[test]
    fn markov_examples() {
        let alg = Algebra::full_matrix(2);
        let rho = State::new(alg.diag(&[0.3, 0.7]).unwrap()).unwrap();
        let id = DualIfs::new(vec![StarHom::identity(&alg)]).unwrap();
        assert!(close(&markov_apply(&id, &Weights::uniform(1), &rho).unwrap(), &rho, 1e-15));

        let rho = State::new(alg.diag(&[1.0, 0.0]).unwrap()).unwrap();
        let out = markov_apply(&qubit_ifs(), &Weights::uniform(2), &rho).unwrap();
        assert!(close(&out, &State::maximally_mixed(&alg), 1e-15));

        let p = 0.3;
        let out = markov_apply(&shift_ifs(2), &Weights::new(vec![p, 1.0 - p]).unwrap(), &State::dirac(4, 0)).unwrap();
        let want = [p, 0.0, 1.0 - p, 0.0];
        for (a, b) in out.masses().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(markov_apply(&shift_ifs(2), &Weights::uniform(3), &State::dirac(4, 0)).is_err());
    }

    #[test]
    fn iterate_examples() {
        let alg = Algebra::full_matrix(2);
        let mut rng = sample::rng(1);
        let rho = sample::random_state(&alg, &mut rng);
        let id = DualIfs::new(vec![StarHom::identity(&alg)]).unwrap();
        let out = fixed_state_iterate(&id, &Weights::uniform(1), &rho, 10, 1e-12, IterationMode::Plain).unwrap();
        assert!(out.converged && out.steps == 0 && close(&out.state, &rho, 0.0));

        let p = 0.3;
        let w = Weights::new(vec![p, 1.0 - p]).unwrap();
        let out = fixed_state_iterate(&shift_ifs(2), &w, &State::dirac(4, 3), 100, 1e-13, IterationMode::Plain).unwrap();
        assert!(out.converged);
        let want = [p * p, p * (1.0 - p), (1.0 - p) * p, (1.0 - p) * (1.0 - p)];
        for (a, b) in out.state.masses().iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }

        let c = collapse_ifs();
        let start = sample::random_state(c.algebra(), &mut rng);
        let out = fixed_state_iterate(&c, &Weights::uniform(1), &start, 10, 1e-12, IterationMode::Plain).unwrap();
        assert!(out.converged && out.steps == 1);
        assert!((out.state.density() - &c.algebra().diag(&[0.0, 0.0, 1.0]).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn oscillation_falls_back_to_cesaro() {
        let alg = Algebra::full_matrix(2);
        let flip = DualIfs::new(vec![StarHom::from_unitary(&sx()).unwrap()]).unwrap();
        let rho = State::new(alg.diag(&[1.0, 0.0]).unwrap()).unwrap();
        let out = fixed_state_iterate(&flip, &Weights::uniform(1), &rho, 200, 1e-12, IterationMode::Plain).unwrap();
        assert!(out.converged);
        assert_eq!(out.mode, IterationMode::Cesaro);
        assert!(close(&out.state, &State::maximally_mixed(&alg), 1e-12));

        let out = fixed_state_iterate(&flip, &Weights::uniform(1), &rho, 5, 1e-12, IterationMode::Plain).unwrap();
        assert!(!out.converged);
        assert_eq!(out.trace.rows().len(), 6);
    }

    #[test]
    fn trace_csv() {
        let mut t = ConvergenceTrace::default();
        t.push(0, 0.5, GapMetric::TraceNorm);
        t.push(1, 0.25, GapMetric::SpectralDistance);
        assert_eq!(
            t.to_csv(),
            "step,gap,metric\n0,5.0000000000000000e-1,trace_norm\n1,2.5000000000000000e-1,d_L\n"
        );
    }

    #[test]
    fn eigen_examples() {
        let alg = Algebra::new(vec![2, 1]).unwrap();
        let id = DualIfs::new(vec![StarHom::identity(&alg)]).unwrap();
        let fixed = fixed_state_eigen(&id, &Weights::uniform(1)).unwrap();
        assert_eq!(fixed.dimension, alg.real_dim());

        let fixed = fixed_state_eigen(&qubit_ifs(), &Weights::uniform(2)).unwrap();
        assert_eq!(fixed.dimension, 2);
        // every fixed element commutes with σ_x
        for b in &fixed.basis {
            assert!((&(b * &sx()) - &(&sx() * b)).max_abs() < 1e-12);
        }

        let fixed = fixed_state_eigen(&shift_ifs(2), &Weights::new(vec![0.4, 0.6]).unwrap()).unwrap();
        assert_eq!(fixed.dimension, 1);
        let want = [0.16, 0.24, 0.24, 0.36];
        for (a, b) in fixed.representative.masses().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fixed.warning.is_none());
    }

    #[test]
    fn word_fixed_state_examples() {
        let alg = Algebra::full_matrix(2);
        let id = DualIfs::new(vec![StarHom::identity(&alg)]).unwrap();
        assert!(!word_fixed_state(&id, &Word::new(vec![0], 1).unwrap()).unwrap().unique);

        let shift = shift_ifs(2);
        let w0 = word_fixed_state(&shift, &Word::new(vec![0], 2).unwrap()).unwrap();
        assert!(w0.unique && close(&w0.state, &State::dirac(4, 0), 1e-12));
        // f_{(0,1)} = f_0 ∘ f_1 is precomposition with g_1 ∘ g_0, whose fixed word is 10
        let w01 = word_fixed_state(&shift, &Word::new(vec![0, 1], 2).unwrap()).unwrap();
        assert!(w01.unique && close(&w01.state, &State::dirac(4, 2), 1e-12));
        assert!(word_fixed_state(&shift, &Word::new(vec![], 2).unwrap()).is_err());
    }

    #[test]
    fn code_average_examples() {
        let c = collapse_ifs();
        let phi = code_average(&c, &Weights::uniform(1), 3, DEFAULT_BUDGET).unwrap();
        assert!((phi.density() - &c.algebra().diag(&[0.0, 0.0, 1.0]).unwrap()).max_abs() < 1e-12);

        let shift = shift_ifs(2);
        let phi = code_average(&shift, &Weights::uniform(2), 2, DEFAULT_BUDGET).unwrap();
        assert!(close(&phi, &State::maximally_mixed(&Algebra::diagonal(4)), 1e-12));

        let w = Weights::new(vec![0.3, 0.7]).unwrap();
        let phi = code_average(&shift, &w, 1, DEFAULT_BUDGET).unwrap();
        let want = State::from_masses(&[0.3, 0.0, 0.0, 0.7]).unwrap();
        assert!(close(&phi, &want, 1e-12));

        assert_eq!(
            code_average(&shift, &w, 13, DEFAULT_BUDGET).unwrap_err(),
            Error::Budget { needed: 8192, budget: 4096 }
        );
    }

    #[test]
    fn banach_examples() {
        let shift = shift_ifs(2);
        let l = Seminorm::metric(FiniteMetricSpace::shift_space(2, 2));
        let w = Weights::uniform(2);
        for m in 1..=6 {
            let cert = banach_certificate(&shift, &w, &l, &State::dirac(4, 0), m, DEFAULT_BUDGET).unwrap();
            assert!((cert.c - 1.0).abs() < 1e-12 && (cert.lambda - 0.5).abs() < 1e-15);
            assert!(cert.holds(1e-8), "M={m}: {cert:?}");
        }
        let cert = banach_certificate(&shift, &w, &l, &State::dirac(4, 0), 1, DEFAULT_BUDGET).unwrap();
        assert!((cert.lhs - 0.25).abs() < 1e-12 && (cert.rhs - 1.0).abs() < 1e-12);

        let alg = Algebra::full_matrix(2);
        let qubit = Seminorm::unit_complement(alg.clone());
        let err = banach_certificate(&qubit_ifs(), &w, &qubit, &State::maximally_mixed(&alg), 2, 64).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn cesaro_examples() {
        let alg = Algebra::full_matrix(2);
        let b = alg.diag(&[1.0, -1.0]).unwrap();
        let id = StarHom::identity(&alg);
        assert!((cesaro_average(&id, &b, 7, None).unwrap().average - b.clone()).max_abs() < 1e-15);
        let flip = StarHom::from_unitary(&sx()).unwrap();
        let zero = cesaro_average(&flip, &b, 0, None).unwrap();
        assert!((&zero.average - &b).max_abs() < 1e-15 && zero.step_diff == 0.0);
        let seq = cesaro_sequence(&flip, &b, 101, None).unwrap();
        assert!(seq[101].average.max_abs() < 1e-15);
        assert!((seq[100].average.op_norm() - 1.0 / 101.0).abs() < 1e-14);
    }

    #[test]
    fn iterate_identity_small_words() {
        let mut rng = sample::rng(11);
        for ifs in [shift_ifs(2), qubit_ifs()] {
            let w = Weights::new(vec![0.35, 0.65]).unwrap();
            let rho = sample::random_state(ifs.algebra(), &mut rng);
            let mut it = rho.clone();
            for m in 1..=3 {
                it = markov_apply(&ifs, &w, &it).unwrap();
                let mut sum = ifs.algebra().zero();
                for word in Word::all(2, m) {
                    let f = word_hom(&ifs, &word).unwrap();
                    let img = dual_apply(&f, &rho).unwrap();
                    sum = &sum + &img.density().scale(w.word_weight(word.letters()));
                }
                assert!((it.density() - &sum).max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn eigen_and_iterate_agree() {
        let mut rng = sample::rng(12);
        let ifs = shift_ifs(3);
        let w = Weights::new(vec![0.3, 0.7]).unwrap();
        let fixed = fixed_state_eigen(&ifs, &w).unwrap();
        assert_eq!(fixed.dimension, 1);
        for _ in 0..5 {
            let start = sample::random_state(ifs.algebra(), &mut rng);
            let out = fixed_state_iterate(&ifs, &w, &start, 500, 1e-12, IterationMode::Plain).unwrap();
            assert!(out.converged);
            assert!(out.state.trace_distance(&fixed.representative) < 1e-6);
        }
    }

    #[test]
    fn fixed_set_is_convex() {
        let mut rng = sample::rng(13);
        let ifs = qubit_ifs();
        let w = Weights::uniform(2);
        let fixed = fixed_state_eigen(&ifs, &w).unwrap();
        let a = fixed.project(&sample::random_state(ifs.algebra(), &mut rng)).unwrap();
        let b = fixed.project(&sample::random_state(ifs.algebra(), &mut rng)).unwrap();
        let mid = State::mixture(&[0.5, 0.5], &[a, b]).unwrap();
        let img = markov_apply(&ifs, &w, &mid).unwrap();
        assert!((img.density() - mid.density()).max_abs() < 1e-9);
    }
}
