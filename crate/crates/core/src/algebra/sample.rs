//! Seeded random elements, states, unitaries and projections for property
//! checks and brute-force oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Algebra, CMatrix, Element, Projection, State, C64};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut SampleRng) -> f64 {
    rng.sample(StandardNormal)
}

fn ginibre(n: usize, m: usize, rng: &mut SampleRng) -> CMatrix {
    CMatrix::from_fn(n, m, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Self-adjoint element with independent Gaussian coordinates.
pub fn random_self_adjoint(alg: &Algebra, rng: &mut SampleRng) -> Element {
    let v = nalgebra::DVector::from_fn(alg.real_dim(), |_, _| gaussian(rng));
    alg.from_sa_coords(&v)
}

/// Block-unitary element, Haar-distributed per block (QR of Ginibre with
/// phase correction).
pub fn random_unitary(alg: &Algebra, rng: &mut SampleRng) -> Element {
    let blocks = alg
        .block_dims()
        .iter()
        .map(|&n| {
            let qr = ginibre(n, n, rng).qr();
            let (q, r) = (qr.q(), qr.r());
            let mut q = q;
            for j in 0..n {
                let d = r[(j, j)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
                for i in 0..n {
                    q[(i, j)] *= phase;
                }
            }
            q
        })
        .collect();
    Element::from_blocks_unchecked(blocks)
}

/// Positive element with prescribed rank per block.
pub fn random_positive_rank(alg: &Algebra, ranks: &[usize], rng: &mut SampleRng) -> Element {
    let blocks = alg
        .block_dims()
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| {
            let g = ginibre(n, r.min(n), rng);
            &g * g.adjoint()
        })
        .collect();
    Element::from_blocks_unchecked(blocks)
}

/// A full-rank random density with random block weights.
pub fn random_state(alg: &Algebra, rng: &mut SampleRng) -> State {
    let ranks: Vec<usize> = alg.block_dims().to_vec();
    let x = random_positive_rank(alg, &ranks, rng);
    let weights: Vec<f64> = (0..alg.num_blocks()).map(|_| rng.random::<f64>() + 0.05).collect();
    normalize_blocks(&x, &weights)
}

/// A random density whose block weights are exactly `weights`.
pub fn random_state_with_block_weights(
    alg: &Algebra,
    weights: &[f64],
    rng: &mut SampleRng,
) -> State {
    let ranks: Vec<usize> = alg.block_dims().to_vec();
    let x = random_positive_rank(alg, &ranks, rng);
    normalize_blocks(&x, weights)
}

fn normalize_blocks(x: &Element, weights: &[f64]) -> State {
    let total: f64 = weights.iter().sum();
    let blocks = x
        .blocks()
        .iter()
        .zip(weights)
        .map(|(m, w)| {
            let t = m.trace().re;
            m * C64::new(w / (t * total), 0.0)
        })
        .collect();
    State::new(Element::from_blocks_unchecked(blocks)).expect("valid random density")
}

/// Random probability vector on `n` points (strictly positive entries).
pub fn random_masses(n: usize, rng: &mut SampleRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random projection: random rank per block, random orientation.
pub fn random_projection(alg: &Algebra, rng: &mut SampleRng) -> Projection {
    let ranks: Vec<usize> = alg
        .block_dims()
        .iter()
        .map(|&n| rng.random_range(0..=n))
        .collect();
    projection_with_ranks(alg, &ranks, rng)
}

pub fn projection_with_ranks(alg: &Algebra, ranks: &[usize], rng: &mut SampleRng) -> Projection {
    let u = random_unitary(alg, rng);
    let blocks = u
        .blocks()
        .iter()
        .zip(ranks)
        .map(|(q, &r)| {
            let cols = q.columns(0, r);
            cols * cols.adjoint()
        })
        .collect();
    Projection::from_exact(Element::from_blocks_unchecked(blocks))
}

/// A pair of projections sharing a random common subspace, so that their
/// meet is typically non-trivial.
pub fn random_projection_pair(alg: &Algebra, rng: &mut SampleRng) -> (Projection, Projection) {
    let u = random_unitary(alg, rng);
    let mut pb = Vec::new();
    let mut qb = Vec::new();
    for (q, &n) in u.blocks().iter().zip(alg.block_dims()) {
        let common = rng.random_range(0..=n);
        let rest = n - common;
        let extra_p = rng.random_range(0..=rest);
        let extra_q = rng.random_range(0..=rest);
        // columns beyond the common part: p takes a fresh set, q a rotated one
        let mut p_cols: Vec<usize> = (0..common).collect();
        p_cols.extend(common..common + extra_p);
        let mut pm = CMatrix::zeros(n, n);
        for &c in &p_cols {
            let v = q.column(c);
            pm += v * v.adjoint();
        }
        let mut qm = CMatrix::zeros(n, n);
        for c in 0..common {
            let v = q.column(c);
            qm += v * v.adjoint();
        }
        if extra_q > 0 {
            let g = ginibre(rest, extra_q, rng);
            let tail = q.columns(common, rest) * g;
            let orth = tail.qr().q();
            let cols = orth.columns(0, extra_q);
            qm += cols * cols.adjoint();
        }
        pb.push(pm);
        qb.push(qm);
    }
    (
        Projection::from_exact(Element::from_blocks_unchecked(pb)),
        Projection::from_exact(Element::from_blocks_unchecked(qb)),
    )
}
