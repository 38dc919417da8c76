//! Unital *-endomorphisms, their trace-adjoint action on states, word
//! compositions, and upper pre-images of projections.
//!
//! A morphism is stored as the real matrix of its restriction to the
//! self-adjoint part (in the coordinates of [`Algebra::sa_coords`]) and is
//! extended complex-linearly to the whole algebra. In a unital
//! finite-dimensional algebra the unit is its own approximate identity, so
//! relative properness of a morphism reduces to `f(I) = I`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::algebra::{
    coordinate_matrix, range_projection, sample, Algebra, CMatrix, Element, Projection, State, C64,
};
use crate::error::{Error, Result};

/// How a morphism was built; used for reporting only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Unitary,
    PointMap,
    Pattern,
    Composite,
    /// Built from an arbitrary linear map; not necessarily a *-homomorphism.
    Linear,
}

#[derive(Clone, Debug)]
pub struct StarHom {
    algebra: Algebra,
    matrix: DMatrix<f64>,
    provenance: Provenance,
}

/// Defects reported by [`validate_hom`].
#[derive(Clone, Debug, PartialEq)]
pub struct HomReport {
    pub multiplicativity: f64,
    pub adjoint: f64,
    pub unitality: f64,
    pub tol: f64,
    pub pass: bool,
}

fn is_unitary(u: &Element, tol: f64) -> bool {
    u.blocks().iter().all(|m| {
        let n = m.nrows();
        (m * m.adjoint() - CMatrix::identity(n, n)).iter().all(|z| z.norm() <= tol)
    })
}

impl StarHom {
    pub fn identity(alg: &Algebra) -> Self {
        let n = alg.real_dim();
        Self {
            algebra: alg.clone(),
            matrix: DMatrix::identity(n, n),
            provenance: Provenance::Composite,
        }
    }

    /// Inner automorphism `b ↦ u b u*`.
    pub fn from_unitary(u: &Element) -> Result<Self> {
        if !is_unitary(u, 1e-10) {
            return Err(Error::Domain("hom_from_unitary: element is not unitary".into()));
        }
        let alg = u.algebra();
        let ustar = u.adjoint();
        let matrix = coordinate_matrix(&alg, &alg, |b| &(u * b) * &ustar);
        Ok(Self {
            algebra: alg,
            matrix,
            provenance: Provenance::Unitary,
        })
    }

    /// Precomposition `(f b)_x = b_{g(x)}` on `C^n`, `n = g.len()`.
    pub fn from_point_map(g: &[usize]) -> Result<Self> {
        let n = g.len();
        if n == 0 {
            return Err(Error::Domain("point map on an empty set".into()));
        }
        if let Some((x, &gx)) = g.iter().enumerate().find(|(_, &gx)| gx >= n) {
            return Err(Error::Domain(format!("point map sends {x} to {gx}, outside 0..{n}")));
        }
        let mut matrix = DMatrix::zeros(n, n);
        for (x, &gx) in g.iter().enumerate() {
            matrix[(x, gx)] = 1.0;
        }
        Ok(Self {
            algebra: Algebra::diagonal(n),
            matrix,
            provenance: Provenance::PointMap,
        })
    }

    /// Unital embedding given by a copy pattern. `targets[t]` lists
    /// `(source_block, multiplicity)` pairs whose copies fill target block
    /// `t` along the diagonal, in order; the result is conjugated by the
    /// optional block unitary `twist`.
    pub fn from_pattern(alg: &Algebra, targets: &[Vec<(usize, usize)>], twist: Option<&Element>) -> Result<Self> {
        let dims = alg.block_dims();
        if targets.len() != dims.len() {
            return Err(Error::Domain(format!(
                "pattern lists {} target blocks, algebra has {}",
                targets.len(),
                dims.len()
            )));
        }
        for (t, parts) in targets.iter().enumerate() {
            let mut filled = 0;
            for &(s, m) in parts {
                if s >= dims.len() {
                    return Err(Error::Domain(format!("pattern source block {s} does not exist")));
                }
                filled += dims[s] * m;
            }
            if filled != dims[t] {
                return Err(Error::Domain(format!(
                    "pattern fills {filled} of the {} dimensions of target block {t}",
                    dims[t]
                )));
            }
        }
        if let Some(u) = twist {
            alg.ensure(u)?;
            if !is_unitary(u, 1e-10) {
                return Err(Error::Domain("pattern twist is not unitary".into()));
            }
        }
        let apply = |x: &Element| -> Element {
            let blocks = targets
                .iter()
                .enumerate()
                .map(|(t, parts)| {
                    let n = dims[t];
                    let mut m = CMatrix::zeros(n, n);
                    let mut at = 0;
                    for &(s, mult) in parts {
                        let src = &x.blocks()[s];
                        let d = src.nrows();
                        for _ in 0..mult {
                            m.view_mut((at, at), (d, d)).copy_from(src);
                            at += d;
                        }
                    }
                    match twist {
                        Some(u) => &u.blocks()[t] * m * u.blocks()[t].adjoint(),
                        None => m,
                    }
                })
                .collect();
            Element::from_blocks(blocks).expect("pattern blocks are square")
        };
        let matrix = coordinate_matrix(alg, alg, apply);
        Ok(Self {
            algebra: alg.clone(),
            matrix,
            provenance: Provenance::Pattern,
        })
    }

    /// Wraps an arbitrary real-linear map on self-adjoint elements (extended
    /// complex-linearly). No homomorphism property is checked; see
    /// [`validate_hom`].
    pub fn from_linear_map(alg: &Algebra, f: impl Fn(&Element) -> Element) -> Self {
        Self {
            algebra: alg.clone(),
            matrix: coordinate_matrix(alg, alg, f),
            provenance: Provenance::Linear,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    /// Matrix of the map on self-adjoint coordinates.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `f(x)`, complex-linear in `x`.
    pub fn apply(&self, x: &Element) -> Element {
        self.linear_apply(x, &self.matrix)
    }

    /// Trace-adjoint `f_*`: the unique map with
    /// `trace(f_*(x) b) = trace(x f(b))`.
    pub fn dual_apply_element(&self, x: &Element) -> Element {
        self.linear_apply(x, &self.matrix.transpose())
    }

    fn linear_apply(&self, x: &Element, m: &DMatrix<f64>) -> Element {
        let alg = &self.algebra;
        let re = x.hermitian_part();
        let im = (x - &x.adjoint()).scale_c(C64::new(0.0, -0.5));
        let fre = alg.from_sa_coords(&(m * alg.sa_coords(&re)));
        if im.max_abs() == 0.0 {
            return fre;
        }
        let fim = alg.from_sa_coords(&(m * alg.sa_coords(&im)));
        &fre + &fim.scale_c(C64::new(0.0, 1.0))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &StarHom) -> Result<StarHom> {
        if self.algebra != other.algebra {
            return Err(Error::Structural("composing morphisms of different algebras".into()));
        }
        Ok(StarHom {
            algebra: self.algebra.clone(),
            matrix: &self.matrix * &other.matrix,
            provenance: Provenance::Composite,
        })
    }

    /// The point map `g` with `f(b) = b ∘ g`, when the algebra is
    /// commutative and `f` is a precomposition.
    pub fn as_point_map(&self) -> Option<Vec<usize>> {
        if !self.algebra.is_commutative() {
            return None;
        }
        let n = self.algebra.total_dim();
        (0..n)
            .map(|x| {
                let row = self.matrix.row(x);
                let hits: Vec<usize> = (0..n).filter(|&y| (row[y] - 1.0).abs() < 1e-9).collect();
                let rest_zero = (0..n).all(|y| hits.contains(&y) || row[y].abs() < 1e-9);
                (hits.len() == 1 && rest_zero).then(|| hits[0])
            })
            .collect()
    }
}

/// Multiplicativity, adjoint-preservation and unitality defects.
pub fn validate_hom(f: &StarHom, tol: f64) -> HomReport {
    let alg = f.algebra();
    let basis = alg.basis();
    let images: Vec<Element> = basis.iter().map(|e| f.apply(e)).collect();
    let mut multiplicativity = 0.0f64;
    let mut adjoint = 0.0f64;
    let i = C64::new(0.0, 1.0);
    for (a, fa) in basis.iter().zip(&images) {
        for (b, fb) in basis.iter().zip(&images) {
            let lhs = f.apply(&(a * b));
            multiplicativity = multiplicativity.max((&lhs - &(fa * fb)).max_abs());
            let x = a + &b.scale_c(i);
            adjoint = adjoint.max((&f.apply(&x.adjoint()) - &f.apply(&x).adjoint()).max_abs());
        }
    }
    let unitality = (&f.apply(&alg.unit()) - &alg.unit()).max_abs();
    HomReport {
        multiplicativity,
        adjoint,
        unitality,
        tol,
        pass: multiplicativity <= tol && adjoint <= tol && unitality <= tol,
    }
}

/// The dual state `f*φ = φ ∘ f`.
pub fn dual_apply(f: &StarHom, rho: &State) -> Result<State> {
    f.algebra().ensure(rho.density())?;
    State::new(f.dual_apply_element(rho.density()))
        .map_err(|e| Error::Numerical(format!("dual image is not a state: {e}")))
}

/// Upper pre-image `⋀{q : f(q) ≥ p}`, computed as the support of `f_*(p)`.
pub fn upper_preimage(f: &StarHom, p: &Projection, tol: f64) -> Result<Projection> {
    f.algebra().ensure(p.element())?;
    range_projection(&f.dual_apply_element(p.element()), tol)
}

/// A dual IFS: a non-empty family of unital *-endomorphisms of one algebra.
#[derive(Clone, Debug)]
pub struct DualIfs {
    homs: Vec<StarHom>,
    names: Vec<String>,
}

impl DualIfs {
    pub fn new(homs: Vec<StarHom>) -> Result<Self> {
        let names = (0..homs.len()).map(|i| format!("f{i}")).collect();
        Self::with_names(homs, names)
    }

    pub fn with_names(homs: Vec<StarHom>, names: Vec<String>) -> Result<Self> {
        let first = homs
            .first()
            .ok_or_else(|| Error::Domain("dual IFS needs at least one morphism".into()))?;
        if homs.iter().any(|h| h.algebra() != first.algebra()) {
            return Err(Error::Structural("dual IFS morphisms act on different algebras".into()));
        }
        if names.len() != homs.len() {
            return Err(Error::Structural("one name per morphism required".into()));
        }
        Ok(Self { homs, names })
    }

    pub fn homs(&self) -> &[StarHom] {
        &self.homs
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.homs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.homs.is_empty()
    }

    pub fn algebra(&self) -> &Algebra {
        self.homs[0].algebra()
    }

    /// Validates every morphism; returns the first failing index with its
    /// report.
    pub fn validate(&self, tol: f64) -> std::result::Result<(), (usize, HomReport)> {
        for (i, h) in self.homs.iter().enumerate() {
            let r = validate_hom(h, tol);
            if !r.pass {
                return Err((i, r));
            }
        }
        Ok(())
    }
}

/// A finite word over the alphabet `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<usize>,
    k: usize,
}

impl Word {
    pub fn new(letters: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&a) = letters.iter().find(|&&a| a >= k) {
            return Err(Error::Domain(format!("letter {a} outside alphabet 0..{k}")));
        }
        Ok(Self { letters, k })
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// All words of length `m` in lexicographic order.
    pub fn all(k: usize, m: usize) -> impl Iterator<Item = Word> {
        let total = k.pow(m as u32);
        (0..total).map(move |i| Word {
            letters: crate::classical::index_to_word(i, k, m),
            k,
        })
    }
}

/// `f_ω = f_{ω_1} ∘ ... ∘ f_{ω_M}`; the empty word gives the identity.
pub fn word_hom(ifs: &DualIfs, word: &Word) -> Result<StarHom> {
    if word.alphabet() != ifs.len() {
        return Err(Error::Domain(format!(
            "word over {} letters used with an IFS of {} maps",
            word.alphabet(),
            ifs.len()
        )));
    }
    let mut acc = StarHom::identity(ifs.algebra());
    for &a in word.letters() {
        acc = acc.compose(&ifs.homs()[a])?;
    }
    if word.len() == 1 {
        acc.provenance = ifs.homs()[word.letters()[0]].provenance;
    }
    Ok(acc)
}

/// All unital copy patterns of an algebra into itself, per target block.
pub fn unital_patterns(alg: &Algebra) -> Vec<Vec<Vec<(usize, usize)>>> {
    fn fill(dims: &[usize], start: usize, left: usize, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if left == 0 {
            out.push(acc.clone());
            return;
        }
        for s in start..dims.len() {
            let d = dims[s];
            for m in 1..=left / d {
                acc.push((s, m));
                fill(dims, s + 1, left - m * d, acc, out);
                acc.pop();
            }
        }
    }
    alg.block_dims()
        .iter()
        .map(|&n| {
            let mut out = Vec::new();
            fill(alg.block_dims(), 0, n, &mut Vec::new(), &mut out);
            out
        })
        .collect()
}

/// A random unital endomorphism: a random copy pattern per target block,
/// twisted by a Haar-random block unitary.
pub fn random_hom(alg: &Algebra, rng: &mut sample::SampleRng) -> StarHom {
    let choices = unital_patterns(alg);
    let targets: Vec<Vec<(usize, usize)>> = choices
        .iter()
        .map(|opts| opts[rng.random_range(0..opts.len())].clone())
        .collect();
    let u = sample::random_unitary(alg, rng);
    StarHom::from_pattern(alg, &targets, Some(&u)).expect("enumerated pattern is unital")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::proj_meet;
    use crate::classical::shift_maps;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn m2(e: [C64; 4]) -> Element {
        Element::from_blocks(vec![CMatrix::from_row_slice(2, 2, &e)]).unwrap()
    }

    fn sx() -> Element {
        m2([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    fn sy() -> Element {
        m2([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    #[test]
    fn unitary_examples() {
        let alg = Algebra::full_matrix(2);
        let id = StarHom::from_unitary(&alg.unit()).unwrap();
        assert!((id.matrix() - DMatrix::identity(4, 4)).abs().max() < 1e-15);
        let f = StarHom::from_unitary(&sx()).unwrap();
        let img = f.apply(&alg.diag(&[2.0, 5.0]).unwrap());
        assert!((&img - &alg.diag(&[5.0, 2.0]).unwrap()).max_abs() < 1e-14);
        // diag(1, i) σ_x diag(1, -i) = [[0, -i], [i, 0]] = σ_y
        let u = m2([c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)]);
        let g = StarHom::from_unitary(&u).unwrap();
        assert!((&g.apply(&sx()) - &sy()).max_abs() < 1e-14);
        assert!(StarHom::from_unitary(&alg.diag(&[1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn point_map_examples() {
        let id = StarHom::from_point_map(&[0, 1, 2]).unwrap();
        assert!((id.matrix() - DMatrix::identity(3, 3)).abs().max() < 1e-15);
        let k = StarHom::from_point_map(&[1, 1, 1]).unwrap();
        let b = Element::from_real_diag(&[3.0, 7.0, -1.0]);
        assert_eq!(k.apply(&b).diag_values(), vec![7.0, 7.0, 7.0]);
        // prepend-0 on 00, 01, 10, 11: f(b)_{ab} = b_{0a}
        let f = crate::classical::lift_map(&shift_maps(2, 2)[0]);
        let b = Element::from_real_diag(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.apply(&b).diag_values(), vec![1.0, 1.0, 2.0, 2.0]);
        assert!(StarHom::from_point_map(&[0, 5]).is_err());
        assert_eq!(f.as_point_map().unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn pattern_examples() {
        let alg = Algebra::new(vec![2, 1]).unwrap();
        let collapse = StarHom::from_pattern(&alg, &[vec![(1, 2)], vec![(1, 1)]], None).unwrap();
        let mut rng = sample::rng(2);
        let x = sample::random_self_adjoint(&alg, &mut rng);
        let lambda = x.blocks()[1][(0, 0)];
        let img = collapse.apply(&x);
        assert!((&img.blocks()[0] - CMatrix::identity(2, 2) * lambda).iter().all(|z| z.norm() < 1e-14));
        assert!((img.blocks()[1][(0, 0)] - lambda).norm() < 1e-14);

        let id = StarHom::from_pattern(&alg, &[vec![(0, 1)], vec![(1, 1)]], None).unwrap();
        assert!((id.matrix() - DMatrix::identity(5, 5)).abs().max() < 1e-14);

        let mm = Algebra::new(vec![2, 2]).unwrap();
        let dup = StarHom::from_pattern(&mm, &[vec![(0, 1)], vec![(0, 1)]], None).unwrap();
        let x = sample::random_self_adjoint(&mm, &mut rng);
        let img = dup.apply(&x);
        assert!((&img.blocks()[1] - &x.blocks()[0]).iter().all(|z| z.norm() < 1e-14));
        assert!((&dup.apply(&mm.unit()) - &mm.unit()).max_abs() < 1e-14);

        assert!(StarHom::from_pattern(&alg, &[vec![(1, 1)], vec![(1, 1)]], None).is_err());
    }

    #[test]
    fn validation() {
        let mut rng = sample::rng(3);
        let alg = Algebra::new(vec![2, 1]).unwrap();
        for _ in 0..5 {
            assert!(validate_hom(&random_hom(&alg, &mut rng), 1e-9).pass);
        }
        let m2a = Algebra::full_matrix(2);
        let p = m2a.diag(&[1.0, 0.0]).unwrap();
        let compress = StarHom::from_linear_map(&m2a, |b| &(&p * b) * &p);
        let r = validate_hom(&compress, 1e-9);
        assert!(!r.pass);
        assert!((r.unitality - 1.0).abs() < 1e-14);
        let transpose = StarHom::from_linear_map(&m2a, |b| {
            Element::from_blocks(vec![b.blocks()[0].transpose()]).unwrap()
        });
        // transpose(σ_x σ_y) = transpose(iσ_z) = iσ_z while σ_x^T σ_y^T = -iσ_z
        let r = validate_hom(&transpose, 1e-9);
        assert!(!r.pass && r.multiplicativity > 0.5);
        let lhs = transpose.apply(&(&sx() * &sy()));
        let rhs = &transpose.apply(&sx()) * &transpose.apply(&sy());
        assert!((&lhs - &rhs).max_abs() > 1.0);
    }

    #[test]
    fn word_examples() {
        let alg = Algebra::full_matrix(2);
        let mut rng = sample::rng(4);
        let u = sample::random_unitary(&alg, &mut rng);
        let ifs = DualIfs::new(vec![StarHom::from_unitary(&u).unwrap()]).unwrap();
        let f11 = word_hom(&ifs, &Word::new(vec![0, 0], 1).unwrap()).unwrap();
        let u2 = StarHom::from_unitary(&(&u * &u)).unwrap();
        assert!((f11.matrix() - u2.matrix()).abs().max() < 1e-12);
        let f1 = word_hom(&ifs, &Word::new(vec![0], 1).unwrap()).unwrap();
        assert!((f1.matrix() - ifs.homs()[0].matrix()).abs().max() < 1e-15);
        let empty = word_hom(&ifs, &Word::new(vec![], 1).unwrap()).unwrap();
        assert!((empty.matrix() - DMatrix::identity(4, 4)).abs().max() < 1e-15);

        // shift space: f_{(0,1)} = f_0 ∘ f_1, so f_ω(b)_{ab} = b(g_1(g_0(ab))) = b_{10}
        let shift = DualIfs::new(shift_maps(2, 2).iter().map(crate::classical::lift_map).collect()).unwrap();
        let f01 = word_hom(&shift, &Word::new(vec![0, 1], 2).unwrap()).unwrap();
        let b = Element::from_real_diag(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f01.apply(&b).diag_values(), vec![3.0, 3.0, 3.0, 3.0]);
        assert!(Word::new(vec![2], 2).is_err());
    }

    #[test]
    fn dual_examples() {
        let mut rng = sample::rng(5);
        let alg = Algebra::full_matrix(2);
        let rho = sample::random_state(&alg, &mut rng);
        let id = StarHom::identity(&alg);
        assert!((dual_apply(&id, &rho).unwrap().density() - rho.density()).max_abs() < 1e-14);
        let u = sample::random_unitary(&alg, &mut rng);
        let ad = StarHom::from_unitary(&u).unwrap();
        let want = &(&u.adjoint() * rho.density()) * &u;
        assert!((dual_apply(&ad, &rho).unwrap().density() - &want).max_abs() < 1e-12);

        let mc = Algebra::new(vec![2, 1]).unwrap();
        let collapse = StarHom::from_pattern(&mc, &[vec![(1, 2)], vec![(1, 1)]], None).unwrap();
        let rho = sample::random_state(&mc, &mut rng);
        let img = dual_apply(&collapse, &rho).unwrap();
        assert!((img.density() - &mc.diag(&[0.0, 0.0, 1.0]).unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn duality_identity() {
        let mut rng = sample::rng(6);
        let alg = Algebra::new(vec![2, 1, 1]).unwrap();
        for _ in 0..10 {
            let f = random_hom(&alg, &mut rng);
            let rho = sample::random_state(&alg, &mut rng);
            let b = sample::random_self_adjoint(&alg, &mut rng);
            let lhs = dual_apply(&f, &rho).unwrap().eval_real(&b).unwrap();
            let rhs = rho.eval_real(&f.apply(&b)).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn upper_preimage_examples() {
        let mut rng = sample::rng(7);
        let alg = Algebra::full_matrix(3);
        let p = sample::random_projection(&alg, &mut rng);
        let id = StarHom::identity(&alg);
        assert!(upper_preimage(&id, &p, 1e-9).unwrap().distance(&p) < 1e-12);
        let u = sample::random_unitary(&alg, &mut rng);
        let ad = StarHom::from_unitary(&u).unwrap();
        let want = &(&u.adjoint() * p.element()) * &u;
        assert!((upper_preimage(&ad, &p, 1e-9).unwrap().element() - &want).max_abs() < 1e-10);
        // shift space: uppreimage of I under prepend-0 is the image {00, 01}
        let f = crate::classical::lift_map(&shift_maps(2, 2)[0]);
        let q = upper_preimage(&f, &Projection::unit(&Algebra::diagonal(4)), 1e-9).unwrap();
        assert_eq!(q.points(), vec![0, 1]);
    }

    #[test]
    fn upper_preimage_matches_exhaustive_search_on_shift() {
        let f = crate::classical::lift_map(&shift_maps(2, 2)[0]);
        for pmask in 0u32..16 {
            let p = Projection::indicator(4, (0..4).filter(|i| pmask & (1 << i) != 0));
            // intersect every diagonal q with f(q) ≥ p
            let mut best: Option<u32> = None;
            for qmask in 0u32..16 {
                let q = Projection::indicator(4, (0..4).filter(|i| qmask & (1 << i) != 0));
                if p.leq(&Projection::new(f.apply(q.element())).unwrap(), 1e-12) {
                    best = Some(best.map_or(qmask, |b| b & qmask));
                }
            }
            let want = best.unwrap();
            let got = upper_preimage(&f, &p, 1e-9).unwrap();
            let got_mask = got.points().iter().fold(0u32, |m, i| m | (1 << i));
            assert_eq!(got_mask, want);
        }
    }

    #[test]
    fn homs_preserve_meets() {
        let mut rng = sample::rng(8);
        let alg = Algebra::new(vec![2, 1]).unwrap();
        for _ in 0..10 {
            let f = random_hom(&alg, &mut rng);
            let (p, q) = sample::random_projection_pair(&alg, &mut rng);
            let lhs = Projection::repair(&f.apply(proj_meet(&p, &q).unwrap().element())).unwrap();
            let fp = Projection::repair(&f.apply(p.element())).unwrap();
            let fq = Projection::repair(&f.apply(q.element())).unwrap();
            assert!(lhs.distance(&proj_meet(&fp, &fq).unwrap()) < 1e-8);
        }
    }
}
