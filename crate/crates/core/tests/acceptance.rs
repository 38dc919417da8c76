//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use ncfractal::algebra::{proj_join, proj_meet, sample, state_support, Algebra, CMatrix, Projection, State, Trace, C64};
use ncfractal::classical::{hutchinson_measure, lift_map, lipschitz_constant, wasserstein1, FiniteMetricSpace, Measure, PointMap};
use ncfractal::dynamics::{
    banach_certificate, cesaro_sequence, fixed_state_eigen, markov_apply, Weights, DEFAULT_BUDGET,
};
use ncfractal::extended::ExtendedReal;
use ncfractal::fractal::{
    overlap_traces, scaling_gate, selfsim_support_check, support_from_words, support_weight_invariance, trace_scaling,
};
use ncfractal::morphism::{random_hom, upper_preimage, DualIfs, StarHom};
use ncfractal::scenario::{load_scenario, Scenario};
use ncfractal::seminorm::{ifs_dilations, sample_state_pair, spectral_distance, spectral_distance_oracle, Seminorm, INF_THRESHOLD};
use rand::Rng;

type Outcome = Result<String, String>;
type Case = (String, DualIfs, Seminorm, Vec<Weights>);

fn scenario(name: &str) -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: ncfractal::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn finite(d: ExtendedReal) -> Result<f64, String> {
    d.finite().ok_or_else(|| "unexpected infinite distance".to_string())
}

/// A commutative system on five random planar points with two seeded
/// contracting point maps whose self-similar measure is unique.
struct Random5 {
    space: FiniteMetricSpace,
    maps: Vec<PointMap>,
    ifs: DualIfs,
    weights: Weights,
}

fn random5() -> Random5 {
    let mut rng = sample::rng(5);
    let pts: Vec<(f64, f64)> = (0..5).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let d = pts
        .iter()
        .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
        .collect();
    let space = FiniteMetricSpace::from_finite(d).unwrap();
    let weights = Weights::new(vec![0.35, 0.65]).unwrap();
    loop {
        let maps: Vec<PointMap> = (0..2)
            .map(|_| PointMap::new((0..5).map(|_| rng.random_range(0..5)).collect()).unwrap())
            .collect();
        let contracting = maps.iter().all(|g| lipschitz_constant(g, &space).to_f64() < 1.0);
        if contracting && hutchinson_measure(&maps, &weights, &space).map(|h| h.dimension) == Ok(1) {
            let ifs = DualIfs::new(maps.iter().map(lift_map).collect()).unwrap();
            return Random5 { space, maps, ifs, weights };
        }
    }
}

fn oracle_equivalence() -> Outcome {
    type Lifted = (String, FiniteMetricSpace, Vec<PointMap>, DualIfs, Vec<Weights>);
    let mut cases: Vec<Lifted> = Vec::new();
    for name in ["shift2", "shift3"] {
        let sc = scenario(name);
        cases.push((name.into(), sc.space.unwrap(), sc.point_maps.unwrap(), sc.ifs, sc.weights));
    }
    let r = random5();
    cases.push(("random5".into(), r.space, r.maps, r.ifs, vec![r.weights]));
    let mut worst_mass = 0.0f64;
    let mut worst_dist = 0.0f64;
    for (name, space, maps, ifs, weights) in &cases {
        for w in weights {
            let classical = lib(hutchinson_measure(maps, w, space))?;
            let lifted = lib(fixed_state_eigen(ifs, w))?.representative.masses();
            for (a, b) in classical.measure.masses().iter().zip(&lifted) {
                worst_mass = worst_mass.max((a - b).abs());
            }
        }
        let l = Seminorm::metric(space.clone());
        let mut rng = sample::rng(1);
        for _ in 0..20 {
            let mu = Measure::new(sample::random_masses(space.len(), &mut rng)).unwrap();
            let nu = Measure::new(sample::random_masses(space.len(), &mut rng)).unwrap();
            let w1 = finite(lib(wasserstein1(&mu, &nu, space))?)?;
            let phi = State::from_masses(mu.masses()).unwrap();
            let psi = State::from_masses(nu.masses()).unwrap();
            let d = finite(lib(spectral_distance(&l, &phi, &psi))?)?;
            worst_dist = worst_dist.max((d - w1).abs());
        }
        ensure(worst_mass <= 1e-9 && worst_dist <= 1e-9, || {
            format!("{name}: mass error {worst_mass:.2e}, distance error {worst_dist:.2e}")
        })?;
    }
    Ok(format!("mass error {worst_mass:.2e}, W1 error {worst_dist:.2e} over 3 spaces x 20 pairs"))
}

fn banach_rate() -> Outcome {
    let sc = scenario("shift3");
    let phi0 = State::maximally_mixed(&sc.algebra);
    let mut summary = Vec::new();
    for w in [Weights::uniform(2), Weights::new(vec![0.3, 0.7]).unwrap()] {
        let mut gaps = Vec::new();
        for m in 1..=8 {
            let cert = lib(banach_certificate(&sc.ifs, &w, &sc.seminorm, &phi0, m, DEFAULT_BUDGET))?;
            let bound = cert.c * 0.5f64.powi(m as i32) / (1.0 - 0.5);
            ensure(cert.lhs <= bound + 1e-8, || format!("M={m}: {} > {bound}", cert.lhs))?;
            gaps.push(cert.lhs);
        }
        for m in 2..8 {
            let (g, next) = (gaps[m - 1], gaps[m]);
            ensure(next <= 0.55 * g + 1e-12, || format!("gap M={} {next:.3e} after {g:.3e}", m + 1))?;
        }
        summary.push(format!("π={:?}: gap(1..8)={:.2e}..{:.2e}", w.values(), gaps[0], gaps[7]));
    }
    Ok(summary.join("; "))
}

fn self_similar_support() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for name in ["shift2", "shift3", "m2c_collapse"] {
        let sc = scenario(name);
        for w in &sc.weights {
            let rho = lib(fixed_state_eigen(&sc.ifs, w))?.representative;
            let r = lib(selfsim_support_check(&sc.ifs, w, &rho, 1e-8))?;
            ensure(r.pass, || format!("{name}: defect {:.2e}", r.defect))?;
            worst = worst.max(r.defect);
            count += 1;
        }
    }
    let sc = scenario("qubit");
    let w = &sc.weights[0];
    let sx = sc.algebra.element(vec![CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|x| C64::new(x, 0.0)))]).unwrap();
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let rho = lib(State::new(&sc.algebra.unit().scale(0.5) + &sx.scale(0.5 * t)))?;
        let r = lib(selfsim_support_check(&sc.ifs, w, &rho, 1e-8))?;
        ensure(r.pass, || format!("qubit t={t}: defect {:.2e}", r.defect))?;
        worst = worst.max(r.defect);
        count += 1;
    }
    Ok(format!("{count} fixed states, worst defect {worst:.2e}"))
}

fn contractive_commutative() -> Vec<Case> {
    let mut out = Vec::new();
    for name in ["shift2", "shift3", "const3", "twocomp"] {
        let sc = scenario(name);
        out.push((name.to_string(), sc.ifs, sc.seminorm, sc.weights));
    }
    let r = random5();
    out.push(("random5".into(), r.ifs, Seminorm::metric(r.space), vec![r.weights]));
    out.retain(|(_, ifs, l, ws)| {
        ifs_dilations(l, ifs, &ws[0]).map(|(_, sup)| sup.to_f64() < 1.0).unwrap_or(false)
    });
    out
}

fn weight_invariance() -> Outcome {
    let mut names = Vec::new();
    let mut worst = 0.0f64;
    let mut rng = sample::rng(4);
    for (name, ifs, l, _) in contractive_commutative() {
        for _ in 0..5 {
            let a = lib(Weights::new(sample::random_masses(ifs.len(), &mut rng)))?;
            let b = lib(Weights::new(sample::random_masses(ifs.len(), &mut rng)))?;
            let r = lib(support_weight_invariance(&ifs, &a, &b, &l, 1e-8))?;
            ensure(r.pass, || format!("{name}: support difference {:.2e}", r.defect))?;
            worst = worst.max(r.defect);
        }
        names.push(name);
    }
    Ok(format!("5 pairs on each of {}; worst difference {worst:.2e}", names.join(", ")))
}

fn word_support() -> Outcome {
    let mut out = Vec::new();
    for (name, limit) in [("shift2", 3), ("shift3", 4)] {
        let sc = scenario(name);
        let r = lib(support_from_words(&sc.ifs, &sc.weights[0], limit + 2, &sc.seminorm, 1e-8, DEFAULT_BUDGET))?;
        let m0 = r.stabilized_at;
        ensure(m0.is_some_and(|m| m <= limit), || format!("{name}: M0 = {m0:?}, limit {limit}"))?;
        out.push(format!("{name} M0={}", m0.unwrap()));
    }
    Ok(out.join(", "))
}

fn exhaustive_preimage(f: &StarHom, p: &Projection, n: usize) -> Vec<usize> {
    let fits = |mask: usize| {
        let q = Projection::indicator(n, (0..n).filter(|i| mask >> i & 1 == 1));
        p.leq(&Projection::repair(&f.apply(q.element())).unwrap(), 1e-12)
    };
    let admissible: Vec<usize> = (0..1usize << n).filter(|&m| fits(m)).collect();
    let smallest = admissible.iter().fold((1usize << n) - 1, |acc, &m| acc & m);
    assert!(fits(smallest), "admissible sets are closed under intersection");
    (0..n).filter(|i| smallest >> i & 1 == 1).collect()
}

fn upper_preimage_oracle() -> Outcome {
    let mut checked = 0;
    for n in 1..=5 {
        let alg = Algebra::diagonal(n);
        let mut rng = sample::rng(600 + n as u64);
        for _ in 0..3 {
            let f = random_hom(&alg, &mut rng);
            for mask in 0..1usize << n {
                let p = Projection::indicator(n, (0..n).filter(|i| mask >> i & 1 == 1));
                let got = lib(upper_preimage(&f, &p, 1e-9))?.points();
                let want = exhaustive_preimage(&f, &p, n);
                ensure(got == want, || format!("n={n}, p={mask:b}: {got:?} vs {want:?}"))?;
                checked += 1;
            }
        }
    }
    let mut worst = 0.0f64;
    let mut rng = sample::rng(66);
    for i in 0..50 {
        let dims = [vec![2, 1], vec![3], vec![2, 2], vec![1, 1, 1], vec![3, 1]][i % 5].clone();
        let alg = Algebra::new(dims).unwrap();
        let f = random_hom(&alg, &mut rng);
        let (p, q) = sample::random_projection_pair(&alg, &mut rng);
        let up = lib(upper_preimage(&f, &p, 1e-9))?;
        let image = lib(Projection::repair(&f.apply(up.element())))?;
        let fq = lib(Projection::repair(&f.apply(q.element())))?;
        let back = lib(upper_preimage(&f, &fq, 1e-9))?;
        let up_join = lib(upper_preimage(&f, &lib(proj_join(&p, &q))?, 1e-9))?;
        let d = p.leq_defect(&image).max(back.leq_defect(&q)).max(up.leq_defect(&up_join));
        worst = worst.max(d);
    }
    ensure(worst <= 1e-8, || format!("Galois defect {worst:.2e}"))?;
    Ok(format!("{checked} exhaustive cases exact; Galois defect {worst:.2e} on 50 pairs"))
}

fn distance_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut verdicts = 0;
    let mut infinite = 0;
    for (name, seed) in [("qubit", 70u64), ("m2c_collapse", 71)] {
        let sc = scenario(name);
        let l = &sc.seminorm;
        let mut rng = sample::rng(seed);
        for i in 0..15 {
            let (phi, psi) = sample_state_pair(l, &mut rng);
            let d = finite(lib(spectral_distance(l, &phi, &psi))?)?;
            let o = lib(spectral_distance_oracle(l, &phi, &psi, 4000, seed * 100 + i))?;
            let rel = (d - o).abs() / d.max(1e-12);
            ensure(rel <= 1e-3, || format!("{name} pair {i}: d={d}, oracle={o}"))?;
            worst = worst.max(rel);
        }
        for _ in 0..15 {
            let phi = sample::random_state(&sc.algebra, &mut rng);
            let psi = sample::random_state(&sc.algebra, &mut rng);
            let c = sc.algebra.sa_coords(&(phi.density() - psi.density()));
            let d = lib(spectral_distance(l, &phi, &psi))?;
            let kernel_says_inf = l.kernel_pairing(&c) > INF_THRESHOLD;
            ensure(kernel_says_inf == !d.is_finite(), || format!("{name}: verdict {d:?}"))?;
            verdicts += 1;
            infinite += usize::from(kernel_says_inf);
        }
    }
    Ok(format!("worst relative error {worst:.2e} on 30 pairs; {verdicts} verdicts agree ({infinite} infinite)"))
}

fn overlap_vanishing() -> Outcome {
    let mut out = Vec::new();
    for name in ["shift2", "shift3"] {
        let sc = scenario(name);
        let tau = Trace::counting(sc.algebra.num_blocks());
        let mut factors = Vec::new();
        for (i, f) in sc.ifs.homs().iter().enumerate() {
            let s = lib(trace_scaling(&tau, f, 8, 80 + i as u64, 1e-9))?.factor();
            ensure(s.is_some_and(|s| (s - 2.0).abs() <= 1e-9), || format!("{name} map {i}: S={s:?}"))?;
            factors.push(s.unwrap());
        }
        ensure(scaling_gate(&factors), || format!("{name}: Σ 1/S ≠ 1"))?;
        let mut rng = sample::rng(81);
        let rho = lib(fixed_state_eigen(&sc.ifs, &sc.weights[0]))?.representative;
        let mut probes = vec![lib(state_support(&rho, 1e-9))?, Projection::unit(&sc.algebra)];
        probes.extend((0..10).map(|_| sample::random_projection(&sc.algebra, &mut rng)));
        let mut worst_off = 0.0f64;
        for p in &probes {
            let m = lib(overlap_traces(&tau, &sc.ifs, p))?;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if i != j {
                        worst_off = worst_off.max(m[(i, j)].abs());
                    }
                }
            }
        }
        ensure(worst_off <= 1e-9, || format!("{name}: overlap {worst_off:.2e}"))?;
        out.push(format!("{name} S={factors:?} overlap≤{worst_off:.1e}"));
    }
    let mut worst = 0.0f64;
    for dims in [vec![4], vec![8], vec![1; 4], vec![1; 8], vec![2], vec![2, 1]] {
        let alg = Algebra::new(dims).unwrap();
        let tau = Trace::counting(alg.num_blocks());
        let mut rng = sample::rng(82);
        for _ in 0..50 {
            let (p, q) = sample::random_projection_pair(&alg, &mut rng);
            let t = |x: &Projection| tau.eval(x.element()).unwrap();
            let join = lib(proj_join(&p, &q))?;
            let meet = lib(proj_meet(&p, &q))?;
            worst = worst.max((t(&join) - t(&q) - (t(&p) - t(&meet))).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("Kaplansky defect {worst:.2e}"))?;
    out.push(format!("Kaplansky defect {worst:.2e}"));
    Ok(out.join("; "))
}

fn contraction_inequality() -> Outcome {
    let mut out = Vec::new();
    let mut cases = contractive_commutative();
    let sc = scenario("m2c_collapse");
    cases.push(("m2c_collapse".into(), sc.ifs, sc.seminorm, sc.weights));
    for (name, ifs, l, ws) in cases {
        let w = &ws[0];
        let lambda = finite(lib(ifs_dilations(&l, &ifs, w))?.0)?;
        if lambda >= 1.0 {
            continue;
        }
        let mut rng = sample::rng(90);
        let mut pairs = 0;
        let mut worst = f64::NEG_INFINITY;
        while pairs < 50 {
            let (a, b) = sample_state_pair(&l, &mut rng);
            let ExtendedReal::Finite(before) = lib(spectral_distance(&l, &a, &b))? else {
                continue;
            };
            let ta = lib(markov_apply(&ifs, w, &a))?;
            let tb = lib(markov_apply(&ifs, w, &b))?;
            let after = finite(lib(spectral_distance(&l, &ta, &tb))?)?;
            ensure(after <= lambda * before + 1e-8, || format!("{name}: {after} > {lambda}·{before}"))?;
            worst = worst.max(after - lambda * before);
            pairs += 1;
        }
        out.push(format!("{name}(Λ={lambda:.3}, slack {worst:.1e})"));
    }
    Ok(out.join(", "))
}

fn cesaro_probe() -> Outcome {
    let sc = scenario("qubit");
    let f = sc
        .ifs
        .names()
        .iter()
        .position(|n| n == "flip")
        .map(|i| sc.ifs.homs()[i].clone())
        .ok_or("qubit scenario has no flip map")?;
    let mut rng = sample::rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let b = sample::random_self_adjoint(&sc.algebra, &mut rng);
        let norm = b.op_norm();
        for step in lib(cesaro_sequence(&f, &b, 200, Some(&sc.seminorm)))?.iter().filter(|s| s.n >= 1) {
            let n = step.n as f64;
            ensure(step.step_diff <= 2.0 * norm / n + 1e-12, || format!("n={}: step {}", step.n, step.step_diff))?;
            ensure(step.invariance_defect <= 4.0 * norm / (n + 1.0) + 1e-12, || {
                format!("n={}: invariance {}", step.n, step.invariance_defect)
            })?;
            worst = worst.max(step.invariance_defect * (n + 1.0) / norm);
        }
    }
    Ok(format!("n=1..200 on 3 elements; max (n+1)·defect/‖b‖ = {worst:.3}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("Banach rate certificate", banach_rate),
        ("self-similar support", self_similar_support),
        ("weight invariance", weight_invariance),
        ("word-support density", word_support),
        ("upper pre-image oracle", upper_preimage_oracle),
        ("spectral distance vs ray scan", distance_oracle),
        ("overlap vanishing", overlap_vanishing),
        ("contraction inequality", contraction_inequality),
        ("Cesàro probe", cesaro_probe),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.2}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.2}s]: {detail}", i + 1);
            }
        }
        if secs > 60.0 {
            failed += 1;
            println!("criterion {:>2} FAIL  {name}: exceeded 60 s", i + 1);
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.min(criteria.len()), criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
