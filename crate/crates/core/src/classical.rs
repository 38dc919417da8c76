//! Exact commutative oracles: finite metric spaces, point-map IFS,
//! Hutchinson measures, Wasserstein-1, attractors, and the diagonal lift into
//! the noncommutative machinery.
//!
//! Continuum examples such as Cantor sets are modelled by finite ultrametric
//! word spaces (see [`FiniteMetricSpace::shift_space`]), on which every map
//! of the IFS is exactly closed.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{Algebra, State};
use crate::dynamics::Weights;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::null_space;
use crate::lp::{maximize_le, minimize_eq};
use crate::morphism::StarHom;
use crate::seminorm::Seminorm;

/// Component-mass mismatch above which two measures are infinitely apart.
pub const COMPONENT_MASS_TOL: f64 = 1e-9;

/// A finite extended metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    d: Vec<Vec<ExtendedReal>>,
}

impl FiniteMetricSpace {
    pub fn new(d: Vec<Vec<ExtendedReal>>) -> Result<Self> {
        let n = d.len();
        if n == 0 {
            return Err(Error::Structural("metric space needs at least one point".into()));
        }
        if d.iter().any(|row| row.len() != n) {
            return Err(Error::Structural("distance matrix must be square".into()));
        }
        for i in 0..n {
            if d[i][i] != ExtendedReal::ZERO {
                return Err(Error::Domain(format!("d[{i}][{i}] must be 0")));
            }
            for j in 0..n {
                if let ExtendedReal::Finite(v) = d[i][j] {
                    if !(v >= 0.0) {
                        return Err(Error::Domain(format!("d[{i}][{j}] must be nonnegative")));
                    }
                    if i != j && v == 0.0 {
                        return Err(Error::Domain(format!("distinct points {i},{j} at distance 0")));
                    }
                }
                let sym = match (d[i][j], d[j][i]) {
                    (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs() <= 1e-12,
                    (ExtendedReal::Inf, ExtendedReal::Inf) => true,
                    _ => false,
                };
                if !sym {
                    return Err(Error::Domain(format!("d is not symmetric at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if let (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) = (d[i][j], d[j][k]) {
                        let ok = match d[i][k] {
                            ExtendedReal::Finite(c) => c <= a + b + 1e-12,
                            ExtendedReal::Inf => false,
                        };
                        if !ok {
                            return Err(Error::Domain(format!(
                                "triangle inequality fails for ({i},{j},{k})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { d })
    }

    pub fn from_finite(d: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            d.into_iter()
                .map(|row| row.into_iter().map(ExtendedReal::from).collect())
                .collect(),
        )
    }

    /// `n` points at mutual distance 1.
    pub fn discrete(n: usize) -> Self {
        let d = (0..n)
            .map(|i| (0..n).map(|j| ExtendedReal::Finite(if i == j { 0.0 } else { 1.0 })).collect())
            .collect();
        Self { d }
    }

    /// Words of length `depth` over `k` letters with the ultrametric
    /// `d(u, v) = 2^{-c}` where `c` is the length of the common prefix.
    /// Word `w_1 ... w_m` has index `Σ w_j k^{m-j}`.
    pub fn shift_space(k: usize, depth: usize) -> Self {
        let n = k.pow(depth as u32);
        let words: Vec<Vec<usize>> = (0..n).map(|i| index_to_word(i, k, depth)).collect();
        let d = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            ExtendedReal::ZERO
                        } else {
                            let c = words[i].iter().zip(&words[j]).take_while(|(a, b)| a == b).count();
                            ExtendedReal::Finite(0.5f64.powi(c as i32))
                        }
                    })
                    .collect()
            })
            .collect();
        Self { d }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> ExtendedReal {
        self.d[i][j]
    }

    pub fn matrix(&self) -> &[Vec<ExtendedReal>] {
        &self.d
    }

    /// Label of the finite-distance component of each point, numbered in
    /// order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for i in 0..n {
            if label[i] == usize::MAX {
                for j in 0..n {
                    if self.d[i][j].is_finite() {
                        label[j] = next;
                    }
                }
                next += 1;
            }
        }
        label
    }

    pub fn num_components(&self) -> usize {
        self.components().iter().max().map_or(0, |m| m + 1)
    }
}

/// Digits of `index` in base `k`, most significant first.
pub fn index_to_word(index: usize, k: usize, depth: usize) -> Vec<usize> {
    let mut w = vec![0; depth];
    let mut r = index;
    for slot in w.iter_mut().rev() {
        *slot = r % k;
        r /= k;
    }
    w
}

pub fn word_to_index(word: &[usize], k: usize) -> usize {
    word.iter().fold(0, |acc, &a| acc * k + a)
}

/// A self-map of a finite point set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointMap {
    g: Vec<usize>,
}

impl PointMap {
    pub fn new(g: Vec<usize>) -> Result<Self> {
        let n = g.len();
        if let Some((i, &v)) = g.iter().enumerate().find(|(_, &v)| v >= n) {
            return Err(Error::Domain(format!("point map sends {i} to {v}, outside 0..{n}")));
        }
        Ok(Self { g })
    }

    pub fn identity(n: usize) -> Self {
        Self { g: (0..n).collect() }
    }

    pub fn constant(n: usize, target: usize) -> Self {
        Self { g: vec![target; n] }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.g[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.g
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PointMap) -> PointMap {
        PointMap {
            g: other.g.iter().map(|&i| self.g[i]).collect(),
        }
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.g[i] == i).collect()
    }
}

/// The prepend maps `g_a(w_1 ... w_m) = a w_1 ... w_{m-1}` on the depth-`m`
/// word space over `k` letters.
pub fn shift_maps(k: usize, depth: usize) -> Vec<PointMap> {
    let n = k.pow(depth as u32);
    let top = n / k;
    (0..k)
        .map(|a| PointMap {
            g: (0..n).map(|i| a * top + i / k).collect(),
        })
        .collect()
}

/// A probability vector on the points of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    masses: Vec<f64>,
}

impl Measure {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !(*m >= -1e-12)) {
            return Err(Error::Domain("measure masses must be nonnegative".into()));
        }
        let s: f64 = masses.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("measure masses sum to {s}, expected 1")));
        }
        Ok(Self {
            masses: masses.into_iter().map(|m| m.max(0.0)).collect(),
        })
    }

    pub fn dirac(n: usize, i: usize) -> Self {
        let mut masses = vec![0.0; n];
        masses[i] = 1.0;
        Self { masses }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn support(&self, tol: f64) -> BTreeSet<usize> {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Pushforward `g_* μ`.
    pub fn pushforward(&self, g: &PointMap) -> Measure {
        let mut out = vec![0.0; self.masses.len()];
        for (i, m) in self.masses.iter().enumerate() {
            out[g.apply(i)] += m;
        }
        Measure { masses: out }
    }
}

/// Lipschitz constant `sup_{x≠y} d(g x, g y) / d(x, y)` over pairs at finite
/// distance. A pair at infinite distance contributes 0; a finite pair mapped
/// to an infinitely distant pair makes the constant infinite.
pub fn lipschitz_constant(g: &PointMap, space: &FiniteMetricSpace) -> ExtendedReal {
    let n = space.len();
    let mut best = ExtendedReal::ZERO;
    for x in 0..n {
        for y in (x + 1)..n {
            if let ExtendedReal::Finite(dxy) = space.dist(x, y) {
                match space.dist(g.apply(x), g.apply(y)) {
                    ExtendedReal::Finite(dg) => best = best.max(ExtendedReal::Finite(dg / dxy)),
                    ExtendedReal::Inf => return ExtendedReal::Inf,
                }
            }
        }
    }
    best
}

/// Result of solving `μ = Σ π_i (g_i)_* μ`.
#[derive(Clone, Debug)]
pub struct HutchinsonMeasure {
    pub measure: Measure,
    /// Dimension of the space of fixed signed measures.
    pub dimension: usize,
    pub residual: f64,
    pub warning: Option<String>,
}

/// Column-stochastic transfer matrix `P[y][x] = Σ_i π_i [g_i(x) = y]`.
pub fn transfer_matrix(maps: &[PointMap], weights: &Weights) -> DMatrix<f64> {
    let n = maps[0].len();
    let mut p = DMatrix::zeros(n, n);
    for (g, w) in maps.iter().zip(weights.values()) {
        for x in 0..n {
            p[(g.apply(x), x)] += w;
        }
    }
    p
}

/// Self-similar (Hutchinson) measure. When the fixed space has dimension > 1
/// the returned measure is the image of the uniform measure under the
/// ergodic projection onto fixed measures.
pub fn hutchinson_measure(
    maps: &[PointMap],
    weights: &Weights,
    space: &FiniteMetricSpace,
) -> Result<HutchinsonMeasure> {
    check_ifs(maps, weights, space)?;
    let n = space.len();
    let p = transfer_matrix(maps, weights);
    let a = &p - DMatrix::identity(n, n);
    let cut = 1e-9;
    let (right, svals) = null_space(&a, cut);
    let (left, _) = null_space(&a.transpose(), cut);
    let dimension = right.ncols();
    let warning = svals
        .iter()
        .find(|s| **s > cut && **s <= 1e-7)
        .map(|s| format!("singular value {s:.3e} close to the null-space cut"));
    if dimension == 0 || left.ncols() != dimension {
        return Err(Error::Numerical("transfer matrix has no clean eigenvalue-1 space".into()));
    }
    let gram = left.transpose() * &right;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvalue 1 is not semisimple".into()))?;
    let uniform = DVector::from_element(n, 1.0 / n as f64);
    let mu = &right * (inv * (left.transpose() * uniform));
    let total: f64 = mu.iter().sum();
    let masses: Vec<f64> = mu.iter().map(|m| (m / total).max(0.0)).collect();
    let s: f64 = masses.iter().sum();
    let masses: Vec<f64> = masses.into_iter().map(|m| m / s).collect();
    let v = DVector::from_vec(masses.clone());
    let residual = (&p * &v - &v).abs().max();
    Ok(HutchinsonMeasure {
        measure: Measure { masses },
        dimension,
        residual,
        warning,
    })
}

fn check_ifs(maps: &[PointMap], weights: &Weights, space: &FiniteMetricSpace) -> Result<()> {
    if maps.is_empty() {
        return Err(Error::Domain("IFS needs at least one map".into()));
    }
    if maps.len() != weights.len() {
        return Err(Error::Structural(format!(
            "{} maps but {} weights",
            maps.len(),
            weights.len()
        )));
    }
    if maps.iter().any(|g| g.len() != space.len()) {
        return Err(Error::Structural("point map size differs from the space".into()));
    }
    Ok(())
}

/// Component check shared by both Kantorovich formulations: returns the
/// signed difference `μ - ν` projected to zero component sums, or `None` when
/// some component carries different mass.
fn balanced_difference(mu: &Measure, nu: &Measure, space: &FiniteMetricSpace) -> Result<Option<Vec<f64>>> {
    let n = space.len();
    if mu.masses.len() != n || nu.masses.len() != n {
        return Err(Error::Structural("measure size differs from the space".into()));
    }
    let labels = space.components();
    let nc = space.num_components();
    let mut sums = vec![0.0; nc];
    let mut counts = vec![0usize; nc];
    let mut diff: Vec<f64> = mu.masses.iter().zip(&nu.masses).map(|(a, b)| a - b).collect();
    for (i, &c) in labels.iter().enumerate() {
        sums[c] += diff[i];
        counts[c] += 1;
    }
    if sums.iter().any(|s| s.abs() > COMPONENT_MASS_TOL) {
        return Ok(None);
    }
    for (i, &c) in labels.iter().enumerate() {
        diff[i] -= sums[c] / counts[c] as f64;
    }
    Ok(Some(diff))
}

/// Wasserstein-1 distance: the optimum of the transport problem with cost
/// `d`, solved exactly by the simplex method. Infinite iff some
/// finite-distance component carries different mass.
pub fn wasserstein1(mu: &Measure, nu: &Measure, space: &FiniteMetricSpace) -> Result<ExtendedReal> {
    let Some(diff) = balanced_difference(mu, nu, space)? else {
        return Ok(ExtendedReal::Inf);
    };
    let n = space.len();
    // Transport only the signed difference: supply where diff > 0, demand
    // where diff < 0. Common mass stays in place at zero cost.
    let supply: Vec<f64> = diff.iter().map(|v| v.max(0.0)).collect();
    let demand: Vec<f64> = diff.iter().map(|v| (-v).max(0.0)).collect();
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| space.dist(i, j).finite().map(|c| (i, j, c)))
        .collect();
    let m = 2 * n;
    let mut a = DMatrix::zeros(m, pairs.len());
    let mut cost = DVector::zeros(pairs.len());
    for (col, &(i, j, c)) in pairs.iter().enumerate() {
        a[(i, col)] = 1.0;
        a[(n + j, col)] = 1.0;
        cost[col] = c;
    }
    let b = DVector::from_iterator(m, supply.into_iter().chain(demand));
    let sol = minimize_eq(&cost, &a, &b)
        .map_err(|e| Error::Numerical(format!("transport LP failed: {e:?}")))?;
    Ok(ExtendedReal::Finite(sol.objective.max(0.0)))
}

/// Kantorovich dual: `max Σ (μ_i - ν_i) f_i` over potentials with
/// `f_i - f_j ≤ d(i, j)` on finite pairs.
pub fn kantorovich_dual(mu: &Measure, nu: &Measure, space: &FiniteMetricSpace) -> Result<ExtendedReal> {
    let Some(diff) = balanced_difference(mu, nu, space)? else {
        return Ok(ExtendedReal::Inf);
    };
    Ok(ExtendedReal::Finite(lipschitz_dual_lp(&diff, space)?))
}

/// `max Σ c_i f_i` over 1-Lipschitz `f`, with `c` summing to zero on each
/// component. Potentials are split as `f = u - v` with `u, v ≥ 0`.
pub(crate) fn lipschitz_dual_lp(c: &[f64], space: &FiniteMetricSpace) -> Result<f64> {
    let n = space.len();
    let rows: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .filter_map(|(i, j)| space.dist(i, j).finite().map(|d| (i, j, d)))
        .collect();
    if rows.is_empty() {
        return Ok(0.0);
    }
    let mut a = DMatrix::zeros(rows.len(), 2 * n);
    let mut b = DVector::zeros(rows.len());
    for (r, &(i, j, d)) in rows.iter().enumerate() {
        a[(r, i)] += 1.0;
        a[(r, n + i)] -= 1.0;
        a[(r, j)] -= 1.0;
        a[(r, n + j)] += 1.0;
        b[r] = d;
    }
    let obj = DVector::from_iterator(2 * n, c.iter().copied().chain(c.iter().map(|v| -v)));
    let sol = maximize_le(&obj, &a, &b)
        .map_err(|e| Error::Numerical(format!("Kantorovich dual LP failed: {e:?}")))?;
    Ok(sol.objective.max(0.0))
}

/// Maximum number of words [`attractor_points`] will enumerate.
pub const ATTRACTOR_WORD_LIMIT: usize = 1 << 20;

/// Fixed points of all compositions `g_{ω_1} ∘ ... ∘ g_{ω_M'}`, `M' ≤ M`.
pub fn attractor_points(
    maps: &[PointMap],
    space: &FiniteMetricSpace,
    depth: usize,
) -> Result<BTreeSet<usize>> {
    if maps.is_empty() {
        return Err(Error::Domain("IFS needs at least one map".into()));
    }
    for (i, g) in maps.iter().enumerate() {
        if g.len() != space.len() {
            return Err(Error::Structural("point map size differs from the space".into()));
        }
        let lip = lipschitz_constant(g, space);
        if !(lip < ExtendedReal::Finite(1.0)) {
            return Err(Error::Precondition(format!(
                "map {i} has Lipschitz constant {lip}; attractor enumeration needs all maps strictly contractive"
            )));
        }
    }
    let k = maps.len();
    let total: u128 = (1..=depth).map(|m| (k as u128).pow(m as u32)).sum();
    if total > ATTRACTOR_WORD_LIMIT as u128 {
        return Err(Error::Budget {
            needed: total,
            budget: ATTRACTOR_WORD_LIMIT,
        });
    }
    let mut points = BTreeSet::new();
    let mut layer: Vec<PointMap> = vec![PointMap::identity(space.len())];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(layer.len() * k);
        for prefix in &layer {
            for g in maps {
                let h = prefix.compose(g);
                points.extend(h.fixed_points());
                next.push(h);
            }
        }
        layer = next;
    }
    Ok(points)
}

/// The commutative algebra `C^n` of a finite space with its Lipschitz
/// seminorm.
pub fn diagonal_lift(space: &FiniteMetricSpace) -> (Algebra, Seminorm) {
    (Algebra::diagonal(space.len()), Seminorm::metric(space.clone()))
}

/// `b ↦ b ∘ g`.
pub fn lift_map(g: &PointMap) -> StarHom {
    StarHom::from_point_map(g.as_slice()).expect("point map is validated")
}

/// The diagonal density of a measure.
pub fn lift_measure(mu: &Measure) -> State {
    State::from_masses(&mu.masses).expect("measure is a probability vector")
}
