//! Lipschitz seminorms on the self-adjoint part, their kernels, the spectral
//! distance `d_L(φ, ψ) = sup{|φ(b) - ψ(b)| : L(b) ≤ 1}` and upper dilation
//! factors `dil↑(f) = sup{L(f(b)) : L(b) ≤ 1}`.
//!
//! Two seminorm classes are supported, both with exact dual computations:
//!
//! * [`Seminorm::Euclidean`]: `L(b) = |Δ b|₂` for a real linear map `Δ` on
//!   self-adjoint coordinates. The dual norm and dilation factors are
//!   closed-form through the pseudo-inverse and SVD of `Δ`.
//! * [`Seminorm::Metric`]: the Lipschitz seminorm of a finite extended metric
//!   space on the diagonal algebra `C^n`. The dual norm is a Kantorovich
//!   linear program.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{sample, Algebra, Element, State};
use crate::classical::{self, lipschitz_constant, FiniteMetricSpace, PointMap};
use crate::dynamics::Weights;
use crate::error::{Error, Result};
use crate::linalg::{null_space, orthonormalize, pinv, spectral_norm};
use crate::morphism::{DualIfs, StarHom};

pub use crate::extended::ExtendedReal;

/// Kernel pairings above this magnitude make a distance infinite.
pub const INF_THRESHOLD: f64 = 1e-9;
const SVD_CUT: f64 = 1e-10;

/// `L(b) = |Δ b|₂` on self-adjoint coordinates.
#[derive(Clone, Debug)]
pub struct EuclideanSeminorm {
    algebra: Algebra,
    delta: DMatrix<f64>,
    delta_pinv: DMatrix<f64>,
    kernel: Vec<DVector<f64>>,
}

/// Lipschitz seminorm of a finite metric space on `C^n`.
#[derive(Clone, Debug)]
pub struct MetricSeminorm {
    algebra: Algebra,
    space: FiniteMetricSpace,
    kernel: Vec<DVector<f64>>,
}

#[derive(Clone, Debug)]
pub enum Seminorm {
    Euclidean(EuclideanSeminorm),
    Metric(MetricSeminorm),
}

fn kernel_with_unit(alg: &Algebra, raw: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut candidates = vec![alg.sa_coords(&alg.unit())];
    candidates.extend(raw.iter().cloned());
    orthonormalize(&candidates, 1e-8)
}

impl Seminorm {
    /// Euclidean seminorm from an `m × real_dim` matrix. The unit must lie in
    /// the kernel.
    pub fn euclidean(algebra: Algebra, delta: DMatrix<f64>) -> Result<Self> {
        if delta.ncols() != algebra.real_dim() {
            return Err(Error::Structural(format!(
                "delta has {} columns, algebra has real dimension {}",
                delta.ncols(),
                algebra.real_dim()
            )));
        }
        let unit = algebra.sa_coords(&algebra.unit());
        let at_unit = (&delta * &unit).norm();
        if at_unit > 1e-12 * (1.0 + delta.norm()) {
            return Err(Error::Domain(format!(
                "seminorm does not vanish on the unit (L(I) = {at_unit:.3e})"
            )));
        }
        let (null, _) = null_space(&delta, SVD_CUT * (1.0 + delta.norm()));
        let raw: Vec<DVector<f64>> = null.column_iter().map(|c| c.into_owned()).collect();
        let kernel = kernel_with_unit(&algebra, &raw);
        let delta_pinv = pinv(&delta, SVD_CUT * (1.0 + delta.norm()));
        Ok(Seminorm::Euclidean(EuclideanSeminorm {
            algebra,
            delta,
            delta_pinv,
            kernel,
        }))
    }

    /// `L(b) = |b - (tr b / tr I) I|_F`: the Frobenius norm of the part
    /// orthogonal to the unit. Its kernel is the scalars.
    pub fn unit_complement(algebra: Algebra) -> Self {
        let n = algebra.real_dim();
        let u = algebra.sa_coords(&algebra.unit());
        let u = &u / u.norm();
        let delta = DMatrix::identity(n, n) - &u * u.transpose();
        Self::euclidean(algebra, delta).expect("unit lies in the kernel")
    }

    /// Frobenius norm of the traceless part of every block. The kernel is
    /// spanned by the block units.
    pub fn block_traceless(algebra: Algebra) -> Self {
        let n = algebra.real_dim();
        let mut delta = DMatrix::identity(n, n);
        for b in 0..algebra.num_blocks() {
            let mut blocks: Vec<_> = algebra.zero().blocks().to_vec();
            let d = algebra.block_dims()[b];
            blocks[b] = crate::algebra::CMatrix::identity(d, d);
            let e = algebra.element(blocks).expect("same shape");
            let v = algebra.sa_coords(&e);
            let v = &v / v.norm();
            delta -= &v * v.transpose();
        }
        Self::euclidean(algebra, delta).expect("unit lies in the kernel")
    }

    /// `L(b) = |[D, b]|_F` for a self-adjoint `D`.
    pub fn commutator(d: &Element) -> Result<Self> {
        if !d.is_self_adjoint(1e-12) {
            return Err(Error::Domain("commutator seminorm needs a self-adjoint D".into()));
        }
        let alg = d.algebra();
        let i = crate::algebra::C64::new(0.0, 1.0);
        // i[D, b] is self-adjoint with the same Frobenius norm as [D, b]
        let delta = crate::algebra::coordinate_matrix(&alg, &alg, |b| {
            (&(d * b) - &(b * d)).scale_c(i)
        });
        Self::euclidean(alg, delta)
    }

    pub fn metric(space: FiniteMetricSpace) -> Self {
        let n = space.len();
        let algebra = Algebra::diagonal(n);
        let labels = space.components();
        let raw: Vec<DVector<f64>> = (0..space.num_components())
            .map(|c| DVector::from_iterator(n, labels.iter().map(|&l| if l == c { 1.0 } else { 0.0 })))
            .collect();
        let kernel = kernel_with_unit(&algebra, &raw);
        Seminorm::Metric(MetricSeminorm {
            algebra,
            space,
            kernel,
        })
    }

    pub fn algebra(&self) -> &Algebra {
        match self {
            Seminorm::Euclidean(e) => &e.algebra,
            Seminorm::Metric(m) => &m.algebra,
        }
    }

    pub fn space(&self) -> Option<&FiniteMetricSpace> {
        match self {
            Seminorm::Metric(m) => Some(&m.space),
            Seminorm::Euclidean(_) => None,
        }
    }

    pub fn delta(&self) -> Option<&DMatrix<f64>> {
        match self {
            Seminorm::Euclidean(e) => Some(&e.delta),
            Seminorm::Metric(_) => None,
        }
    }

    /// `L` evaluated on self-adjoint coordinates.
    pub fn eval_coords(&self, v: &DVector<f64>) -> f64 {
        match self {
            Seminorm::Euclidean(e) => (&e.delta * v).norm(),
            Seminorm::Metric(m) => {
                let n = m.space.len();
                let mut best = 0.0f64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if let ExtendedReal::Finite(d) = m.space.dist(i, j) {
                            best = best.max((v[i] - v[j]).abs() / d);
                        }
                    }
                }
                best
            }
        }
    }

    pub fn eval(&self, b: &Element) -> Result<f64> {
        seminorm_eval(self, b)
    }

    /// Orthonormal kernel basis in coordinates, the normalized unit first.
    pub fn kernel_coords(&self) -> &[DVector<f64>] {
        match self {
            Seminorm::Euclidean(e) => &e.kernel,
            Seminorm::Metric(m) => &m.kernel,
        }
    }

    pub fn kernel(&self) -> Vec<Element> {
        seminorm_kernel(self)
    }

    /// Projects coordinates onto the orthogonal complement of the kernel.
    pub fn project_off_kernel(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut r = v.clone();
        for k in self.kernel_coords() {
            let c = k.dot(&r);
            r.axpy(-c, k, 1.0);
        }
        r
    }

    /// Largest kernel pairing of a coordinate vector.
    pub fn kernel_pairing(&self, c: &DVector<f64>) -> f64 {
        self.kernel_coords()
            .iter()
            .map(|k| k.dot(c).abs())
            .fold(0.0, f64::max)
    }
}

/// `L(b)` for self-adjoint `b`.
pub fn seminorm_eval(l: &Seminorm, b: &Element) -> Result<f64> {
    l.algebra().ensure(b)?;
    if b.sa_defect() > 1e-10 {
        return Err(Error::Domain("seminorm is defined on self-adjoint elements only".into()));
    }
    Ok(l.eval_coords(&l.algebra().sa_coords(b)))
}

/// Orthonormal (trace inner product) basis of `{b : L(b) = 0}`.
pub fn seminorm_kernel(l: &Seminorm) -> Vec<Element> {
    l.kernel_coords()
        .iter()
        .map(|k| l.algebra().from_sa_coords(k))
        .collect()
}

fn difference_coords(l: &Seminorm, phi: &State, psi: &State) -> Result<DVector<f64>> {
    let alg = l.algebra();
    alg.ensure(phi.density())?;
    alg.ensure(psi.density())?;
    Ok(alg.sa_coords(&(phi.density() - psi.density())))
}

/// Spectral distance `d_L(φ, ψ)`.
pub fn spectral_distance(l: &Seminorm, phi: &State, psi: &State) -> Result<ExtendedReal> {
    let c = difference_coords(l, phi, psi)?;
    if l.kernel_pairing(&c) > INF_THRESHOLD {
        return Ok(ExtendedReal::Inf);
    }
    match l {
        Seminorm::Euclidean(e) => {
            // sup{⟨c, b⟩ : |Δ b| ≤ 1} with c ⊥ ker Δ equals |(Δ⁺)ᵀ c|
            let c = l.project_off_kernel(&c);
            Ok(ExtendedReal::Finite((e.delta_pinv.transpose() * c).norm()))
        }
        Seminorm::Metric(m) => {
            let c = l.project_off_kernel(&c);
            let v = classical::lipschitz_dual_lp(c.as_slice(), &m.space)?;
            Ok(ExtendedReal::Finite(v))
        }
    }
}

/// Brute-force lower bound on a finite `d_L(φ, ψ)`: the best ratio
/// `⟨c, u⟩ / L(u)` over random directions off the kernel, followed by a
/// shrinking-step local search from the best sample.
pub fn spectral_distance_oracle(
    l: &Seminorm,
    phi: &State,
    psi: &State,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let c = difference_coords(l, phi, psi)?;
    if c.norm() == 0.0 {
        return Ok(0.0);
    }
    let dim = l.algebra().real_dim();
    let mut rng = sample::rng(seed);
    let ratio = |u: &DVector<f64>| -> f64 {
        let lu = l.eval_coords(u);
        if lu <= 1e-14 * u.norm() {
            return 0.0;
        }
        c.dot(u).abs() / lu
    };
    let gauss = |rng: &mut sample::SampleRng| -> DVector<f64> {
        DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
    };

    // c itself and the coordinate axes are natural seeds
    let mut best_u = l.project_off_kernel(&c);
    let mut best = ratio(&best_u);
    for k in 0..dim {
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        let u = l.project_off_kernel(&e);
        let r = ratio(&u);
        if r > best {
            best = r;
            best_u = u;
        }
    }
    for _ in 0..n_samples {
        let u = l.project_off_kernel(&gauss(&mut rng));
        let r = ratio(&u);
        if r > best {
            best = r;
            best_u = u;
        }
    }
    if best_u.norm() == 0.0 {
        return Ok(best);
    }

    best_u /= best_u.norm();
    let mut step = 0.5;
    let mut failures = 0;
    let patience = 8 * dim.max(2);
    while step > 1e-10 {
        let dir = l.project_off_kernel(&gauss(&mut rng));
        let n = dir.norm();
        if n == 0.0 {
            break;
        }
        let cand = &best_u + dir * (step / n);
        let cand = &cand / cand.norm();
        let r = ratio(&cand);
        if r > best {
            best = r;
            best_u = cand;
            failures = 0;
            step *= 1.5;
        } else {
            failures += 1;
            if failures >= patience {
                step *= 0.5;
                failures = 0;
            }
        }
    }
    Ok(best)
}

/// Upper dilation factor `dil↑(f)`.
pub fn dilation_upper(l: &Seminorm, f: &StarHom) -> Result<ExtendedReal> {
    if f.algebra() != l.algebra() {
        return Err(Error::Structural("morphism and seminorm live on different algebras".into()));
    }
    match l {
        Seminorm::Euclidean(e) => {
            let composite = &e.delta * f.matrix();
            for k in &e.kernel {
                if (&composite * k).norm() > INF_THRESHOLD {
                    return Ok(ExtendedReal::Inf);
                }
            }
            Ok(ExtendedReal::Finite(spectral_norm(&(composite * &e.delta_pinv))))
        }
        Seminorm::Metric(m) => {
            let g = f.as_point_map().ok_or_else(|| {
                Error::Domain("morphism of a commutative algebra is not a point map".into())
            })?;
            Ok(lipschitz_constant(&PointMap::new(g)?, &m.space))
        }
    }
}

/// `(Λ_sum, Λ_sup) = (Σ π_i dil↑(f_i), max_i dil↑(f_i))`.
pub fn ifs_dilations(l: &Seminorm, ifs: &DualIfs, weights: &Weights) -> Result<(ExtendedReal, ExtendedReal)> {
    if ifs.len() != weights.len() {
        return Err(Error::Structural(format!(
            "{} maps but {} weights",
            ifs.len(),
            weights.len()
        )));
    }
    let mut sum = ExtendedReal::ZERO;
    let mut sup = ExtendedReal::ZERO;
    for (f, &w) in ifs.homs().iter().zip(weights.values()) {
        let d = dilation_upper(l, f)?;
        sum = sum.add(d.try_mul(ExtendedReal::Finite(w))?);
        sup = sup.max(d);
    }
    Ok((sum, sup))
}

/// A random pair of states, biased towards finite distance: the second state
/// shares the block weights (Euclidean) or component masses (metric) of the
/// first.
pub fn sample_state_pair(l: &Seminorm, rng: &mut sample::SampleRng) -> (State, State) {
    let alg = l.algebra();
    let phi = sample::random_state(alg, rng);
    let psi = match l {
        Seminorm::Euclidean(_) => sample::random_state_with_block_weights(alg, &phi.block_weights(), rng),
        Seminorm::Metric(m) => {
            let labels = m.space.components();
            let nc = m.space.num_components();
            let phi_m = phi.masses();
            let mut comp_mass = vec![0.0; nc];
            for (i, &c) in labels.iter().enumerate() {
                comp_mass[c] += phi_m[i];
            }
            let raw: Vec<f64> = (0..alg.total_dim()).map(|_| rng.random::<f64>() + 1e-3).collect();
            let mut raw_comp = vec![0.0; nc];
            for (i, &c) in labels.iter().enumerate() {
                raw_comp[c] += raw[i];
            }
            let masses: Vec<f64> = raw
                .iter()
                .zip(&labels)
                .map(|(r, &c)| r / raw_comp[c] * comp_mass[c])
                .collect();
            State::from_masses(&masses).expect("valid masses")
        }
    };
    (phi, psi)
}

/// `max(0, max ratio - L(b))` over sampled state pairs, where the ratio is
/// `|φ(b) - ψ(b)| / d_L(φ, ψ)` on pairs at positive finite distance.
pub fn lipschitz_consistency_defect(l: &Seminorm, b: &Element, n_pairs: usize, seed: u64) -> Result<f64> {
    let lb = seminorm_eval(l, b)?;
    let mut rng = sample::rng(seed);
    let mut worst = 0.0f64;
    for i in 0..n_pairs {
        let (phi, psi) = if i % 2 == 0 {
            sample_state_pair(l, &mut rng)
        } else {
            let alg = l.algebra();
            (sample::random_state(alg, &mut rng), sample::random_state(alg, &mut rng))
        };
        if let ExtendedReal::Finite(d) = spectral_distance(l, &phi, &psi)? {
            if d > 1e-12 {
                let gap = (phi.eval_real(b)? - psi.eval_real(b)?).abs();
                worst = worst.max(gap / d);
            }
        }
    }
    Ok((worst - lb).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CMatrix, C64};
    use crate::classical::shift_maps;

    fn pauli_x() -> Element {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Element::from_blocks(vec![CMatrix::from_row_slice(2, 2, &[o, l, l, o])]).unwrap()
    }

    fn two_components() -> FiniteMetricSpace {
        let f = ExtendedReal::Finite;
        let inf = ExtendedReal::Inf;
        FiniteMetricSpace::new(vec![
            vec![f(0.0), f(1.0), inf, inf],
            vec![f(1.0), f(0.0), inf, inf],
            vec![inf, inf, f(0.0), f(2.0)],
            vec![inf, inf, f(2.0), f(0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let q = Seminorm::unit_complement(Algebra::full_matrix(2));
        assert!(q.eval(&Algebra::full_matrix(2).unit()).unwrap() < 1e-12);
        assert!((q.eval(&pauli_x()).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let two = Seminorm::metric(FiniteMetricSpace::discrete(2));
        assert!((two.eval(&Element::from_real_diag(&[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_non_self_adjoint() {
        let q = Seminorm::unit_complement(Algebra::full_matrix(2));
        let x = Element::from_blocks(vec![CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0., 0.), C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.)],
        )])
        .unwrap();
        assert!(matches!(q.eval(&x), Err(Error::Domain(_))));
    }

    #[test]
    fn homogeneity() {
        let alg = Algebra::new(vec![2, 1]).unwrap();
        let l = Seminorm::block_traceless(alg.clone());
        let mut rng = sample::rng(1);
        for _ in 0..10 {
            let b = sample::random_self_adjoint(&alg, &mut rng);
            let t = -2.7;
            assert!((l.eval(&b.scale(t)).unwrap() - t.abs() * l.eval(&b).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_examples() {
        let q = Seminorm::unit_complement(Algebra::full_matrix(2));
        let k = q.kernel();
        assert_eq!(k.len(), 1);
        let half = Algebra::full_matrix(2).unit().scale(1.0 / 2f64.sqrt());
        assert!((&k[0] - &half).max_abs() < 1e-12);

        assert_eq!(Seminorm::metric(two_components()).kernel().len(), 2);

        let d = Algebra::full_matrix(2).diag(&[0.0, 1.0]).unwrap();
        let comm = Seminorm::commutator(&d).unwrap();
        let k = comm.kernel();
        assert_eq!(k.len(), 2);
        for e in &k {
            // diagonal
            assert!(e.blocks()[0][(0, 1)].norm() < 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        let alg = Algebra::full_matrix(2);
        let q = Seminorm::unit_complement(alg.clone());
        let plus = State::new((&alg.unit() + &pauli_x()).scale(0.5)).unwrap();
        let minus = State::new((&alg.unit() - &pauli_x()).scale(0.5)).unwrap();
        assert_eq!(spectral_distance(&q, &plus, &plus).unwrap(), ExtendedReal::ZERO);
        let d = spectral_distance(&q, &plus, &minus).unwrap().to_f64();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        let o = spectral_distance_oracle(&q, &plus, &minus, 200, 7).unwrap();
        assert!(o <= d + 1e-12 && (d - o) / d < 1e-3);

        let two = Seminorm::metric(FiniteMetricSpace::discrete(2));
        let d = spectral_distance(&two, &State::dirac(2, 0), &State::dirac(2, 1)).unwrap();
        assert!((d.to_f64() - 1.0).abs() < 1e-12);
        let o = spectral_distance_oracle(&two, &State::dirac(2, 0), &State::dirac(2, 1), 10, 1).unwrap();
        assert!((o - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infinite_distance_iff_kernel_pairing() {
        let l = Seminorm::metric(two_components());
        let d = spectral_distance(&l, &State::dirac(4, 0), &State::dirac(4, 2)).unwrap();
        assert_eq!(d, ExtendedReal::Inf);
        let d = spectral_distance(&l, &State::dirac(4, 2), &State::dirac(4, 3)).unwrap();
        assert!((d.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_examples() {
        let x = FiniteMetricSpace::shift_space(2, 2);
        let l = Seminorm::metric(x.clone());
        let id = StarHom::identity(l.algebra());
        assert_eq!(dilation_upper(&l, &id).unwrap(), ExtendedReal::Finite(1.0));
        let f0 = crate::classical::lift_map(&shift_maps(2, 2)[0]);
        assert_eq!(dilation_upper(&l, &f0).unwrap(), ExtendedReal::Finite(0.5));

        let alg = Algebra::full_matrix(2);
        let q = Seminorm::unit_complement(alg.clone());
        let mut rng = sample::rng(3);
        let u = sample::random_unitary(&alg, &mut rng);
        let ad = StarHom::from_unitary(&u).unwrap();
        assert!((dilation_upper(&q, &ad).unwrap().to_f64() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dilation_bounds_seminorm_growth() {
        let alg = Algebra::new(vec![2, 1]).unwrap();
        let l = Seminorm::block_traceless(alg.clone());
        let mut rng = sample::rng(12);
        let u = sample::random_unitary(&alg, &mut rng);
        let f = StarHom::from_pattern(&alg, &[vec![(0, 1)], vec![(1, 1)]], Some(&u)).unwrap();
        let dil = dilation_upper(&l, &f).unwrap().to_f64();
        for _ in 0..20 {
            let b = sample::random_self_adjoint(&alg, &mut rng);
            assert!(l.eval(&f.apply(&b)).unwrap() <= dil * l.eval(&b).unwrap() + 1e-8);
        }
    }

    #[test]
    fn ifs_dilation_examples() {
        let x = FiniteMetricSpace::shift_space(2, 2);
        let l = Seminorm::metric(x);
        let ifs = DualIfs::new(shift_maps(2, 2).iter().map(crate::classical::lift_map).collect()).unwrap();
        let (s, m) = ifs_dilations(&l, &ifs, &Weights::uniform(2)).unwrap();
        assert_eq!((s, m), (ExtendedReal::Finite(0.5), ExtendedReal::Finite(0.5)));

        let alg = Algebra::new(vec![2, 1]).unwrap();
        let l = Seminorm::block_traceless(alg.clone());
        let id = DualIfs::new(vec![StarHom::identity(&alg)]).unwrap();
        let (s, m) = ifs_dilations(&l, &id, &Weights::new(vec![1.0]).unwrap()).unwrap();
        assert!((s.to_f64() - 1.0).abs() < 1e-12 && (m.to_f64() - 1.0).abs() < 1e-12);
        let collapse = StarHom::from_pattern(&alg, &[vec![(1, 2)], vec![(1, 1)]], None).unwrap();
        let ifs = DualIfs::new(vec![collapse]).unwrap();
        let (s, m) = ifs_dilations(&l, &ifs, &Weights::new(vec![1.0]).unwrap()).unwrap();
        assert!(s.to_f64() < 1e-12 && m.to_f64() < 1e-12);
    }

    #[test]
    fn infinite_dilation_with_zero_weight_is_an_error() {
        let l = Seminorm::metric(two_components());
        let swap_half = StarHom::from_point_map(&[0, 2, 2, 3]).unwrap();
        assert_eq!(dilation_upper(&l, &swap_half).unwrap(), ExtendedReal::Inf);
        let ifs = DualIfs::new(vec![StarHom::identity(l.algebra()), swap_half]).unwrap();
        let w = Weights::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(ifs_dilations(&l, &ifs, &w), Err(Error::ExtendedArithmetic(_))));
    }

    #[test]
    fn consistency_defect_examples() {
        let l = Seminorm::metric(FiniteMetricSpace::discrete(2));
        assert!(lipschitz_consistency_defect(&l, &l.algebra().unit(), 20, 0).unwrap() <= 1e-12);
        let b = Element::from_real_diag(&[0.3, -1.2]);
        assert!(lipschitz_consistency_defect(&l, &b, 40, 1).unwrap() <= 1e-9);
        let l2 = Seminorm::metric(two_components());
        let k = Element::from_real_diag(&[1.0, 1.0, 0.0, 0.0]);
        assert!(lipschitz_consistency_defect(&l2, &k, 40, 2).unwrap() <= 1e-12);
    }
}
