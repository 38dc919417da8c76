//! Command-line front end: argument parsing, command dispatch over a loaded
//! scenario, and report files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{proj_join, proj_meet, sample, state_support, Projection, State};
use crate::classical::{
    attractor_points, hutchinson_measure, kantorovich_dual, lift_measure, lipschitz_constant, wasserstein1, Measure,
};
use crate::dynamics::{
    check_budget, code_average, banach_certificate, fixed_state_eigen, fixed_state_iterate, markov_apply,
    word_fixed_state, IterationMode, Weights, DEFAULT_BUDGET,
};
use crate::error::Error;
use crate::extended::ExtendedReal;
use crate::fractal::{
    classify_local, is_bump, local_flat_space, overlap_traces, scaling_gate, selfsim_support_check,
    support_weight_invariance, trace_scaling, FIXED_RESIDUAL_TOL,
};
use crate::morphism::{upper_preimage, validate_hom, Word};
use crate::report::{self, ext, floats, num, Report};
use crate::scenario::{load_scenario, Scenario, ScenarioError, HOM_TOL};
use crate::seminorm::{
    dilation_upper, ifs_dilations, lipschitz_consistency_defect, sample_state_pair, seminorm_eval, spectral_distance,
    spectral_distance_oracle,
};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Trace-norm distance allowed between iterated and solved fixed states.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// Relative error allowed between the spectral distance and its oracle.
pub const ORACLE_REL_TOL: f64 = 1e-3;
/// Tolerance for cross-checks between two exact solvers.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "ncfractal", version, about = "Self-similar states of dual iterated function systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Seed for every sampled check.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance for support and fixed-point checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Maximum number of words enumerated at one length.
    #[arg(long, global = true, env = "NCFRACTAL_BUDGET")]
    pub budget: Option<usize>,
    /// Enable brute-force cross-checks.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Directory for reports (default: beside the scenario).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the invariant suites on every component.
    Validate { scenario: PathBuf },
    /// Solve for fixed states and cross-check by iteration.
    FixedState { scenario: PathBuf },
    /// Spectral distances between the named states.
    Distance { scenario: PathBuf },
    /// Upper dilation factors and their weighted sum and maximum.
    Dilation { scenario: PathBuf },
    /// Support self-similarity of the fixed states.
    SelfsimCheck { scenario: PathBuf },
    /// Support equality for two weight vectors.
    SupportInvariance { scenario: PathBuf },
    /// Code-space averages against iterates, with the Banach rate bound.
    Codespace {
        scenario: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Named start state (default: first named state, else maximally mixed).
        #[arg(long)]
        state: Option<String>,
    },
    /// Trace scaling factors and the overlap matrix.
    Overlap { scenario: PathBuf },
    /// Local flatness around a named bump (`unit` for the unit).
    Diagnose {
        scenario: PathBuf,
        #[arg(long)]
        bump: String,
    },
    /// Commutative oracle pipeline.
    Classical { scenario: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::FixedState { .. } => "fixed-state",
            Command::Distance { .. } => "distance",
            Command::Dilation { .. } => "dilation",
            Command::SelfsimCheck { .. } => "selfsim-check",
            Command::SupportInvariance { .. } => "support-invariance",
            Command::Codespace { .. } => "codespace",
            Command::Overlap { .. } => "overlap",
            Command::Diagnose { .. } => "diagnose",
            Command::Classical { .. } => "classical",
        }
    }

    pub fn scenario(&self) -> &Path {
        match self {
            Command::Validate { scenario }
            | Command::FixedState { scenario }
            | Command::Distance { scenario }
            | Command::Dilation { scenario }
            | Command::SelfsimCheck { scenario }
            | Command::SupportInvariance { scenario }
            | Command::Codespace { scenario, .. }
            | Command::Overlap { scenario }
            | Command::Diagnose { scenario, .. }
            | Command::Classical { scenario } => scenario,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Library(#[from] Error),
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

/// Resolved run options.
#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    pub tol: f64,
    pub budget: usize,
    pub oracle: bool,
}

impl Options {
    pub fn resolve(flags: &Flags, sc: &Scenario) -> Self {
        Self {
            seed: flags.seed.or(sc.seed).unwrap_or(0),
            tol: flags.tol.or(sc.tol).unwrap_or(DEFAULT_TOL),
            budget: flags.budget.or(sc.budget).unwrap_or(DEFAULT_BUDGET),
            oracle: flags.oracle,
        }
    }
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: DEFAULT_TOL,
            budget: DEFAULT_BUDGET,
            oracle: false,
        }
    }
}

/// Files written by [`run`].
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub json_path: PathBuf,
    pub csv_path: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli.command.scenario();
    let sc = load_scenario(path)?;
    let opts = Options::resolve(&cli.flags, &sc);
    let report = execute(&cli.command, &sc, &opts)?;
    let dir = match &cli.flags.out {
        Some(d) => d.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let base = format!("{}.{}", sc.name, cli.command.name());
    let json_path = dir.join(format!("{base}.json"));
    write_file(&json_path, &report.to_json())?;
    let csv_path = match &report.csv {
        Some(csv) => {
            let p = dir.join(format!("{base}.csv"));
            write_file(&p, csv)?;
            Some(p)
        }
        None => None,
    };
    Ok(Outcome {
        report,
        json_path,
        csv_path,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Runs one command on a loaded scenario.
pub fn execute(cmd: &Command, sc: &Scenario, opts: &Options) -> Result<Report, Error> {
    let mut r = Report::new(cmd.name(), &sc.name, opts.seed, opts.tol);
    match cmd {
        Command::Validate { .. } => validate(sc, opts, &mut r)?,
        Command::FixedState { .. } => fixed_state(sc, opts, &mut r)?,
        Command::Distance { .. } => distance(sc, opts, &mut r)?,
        Command::Dilation { .. } => dilation(sc, opts, &mut r)?,
        Command::SelfsimCheck { .. } => selfsim(sc, opts, &mut r)?,
        Command::SupportInvariance { .. } => invariance(sc, opts, &mut r)?,
        Command::Codespace { depth, state, .. } => codespace(sc, opts, *depth, state.as_deref(), &mut r)?,
        Command::Overlap { .. } => overlap(sc, opts, &mut r)?,
        Command::Diagnose { bump, .. } => diagnose(sc, opts, bump, &mut r)?,
        Command::Classical { .. } => classical(sc, opts, &mut r)?,
    }
    Ok(r)
}

fn weight_label(sc: &Scenario, k: usize) -> String {
    if sc.weights.len() == 1 {
        "w".to_string()
    } else {
        format!("w{k}")
    }
}

fn validate(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let alg = &sc.algebra;
    let l = &sc.seminorm;
    let mut rng = sample::rng(o.seed);
    for (h, name) in sc.ifs.homs().iter().zip(sc.ifs.names()) {
        let v = validate_hom(h, HOM_TOL);
        r.check_le(format!("hom.{name}.multiplicativity"), v.multiplicativity, HOM_TOL);
        r.check_le(format!("hom.{name}.adjoint"), v.adjoint, HOM_TOL);
        r.check_le(format!("hom.{name}.unitality"), v.unitality, HOM_TOL);
    }

    r.check_le("seminorm.unit", seminorm_eval(l, &alg.unit())?, 1e-12);
    let mut homogeneity = 0.0f64;
    let mut triangle = 0.0f64;
    let mut consistency = 0.0f64;
    for i in 0..10 {
        let a = sample::random_self_adjoint(alg, &mut rng);
        let b = sample::random_self_adjoint(alg, &mut rng);
        let la = seminorm_eval(l, &a)?;
        let lb = seminorm_eval(l, &b)?;
        homogeneity = homogeneity.max((seminorm_eval(l, &a.scale(-2.5))? - 2.5 * la).abs());
        triangle = triangle.max(seminorm_eval(l, &(&a + &b))? - la - lb);
        if i < 3 {
            consistency = consistency.max(lipschitz_consistency_defect(l, &a, 20, o.seed + i)?);
        }
    }
    r.check_le("seminorm.homogeneity", homogeneity, EXACT_TOL);
    r.check_le("seminorm.triangle", triangle, EXACT_TOL);
    r.check_le("seminorm.distance_consistency", consistency, o.tol);

    let mut galois = 0.0f64;
    for h in sc.ifs.homs() {
        for _ in 0..10 {
            let p = sample::random_projection(alg, &mut rng);
            let up = upper_preimage(h, &p, crate::algebra::DEFAULT_TOL)?;
            let back = Projection::repair(&h.apply(up.element()))?;
            galois = galois.max(p.leq_defect(&back));
            let fq = Projection::repair(&h.apply(p.element()))?;
            galois = galois.max(upper_preimage(h, &fq, crate::algebra::DEFAULT_TOL)?.leq_defect(&p));
        }
    }
    r.check_le("upper_preimage.galois", galois, o.tol);

    let mut kaplansky = 0.0f64;
    for _ in 0..10 {
        let (p, q) = sample::random_projection_pair(alg, &mut rng);
        let t = |x: &Projection| sc.trace.eval(x.element());
        let lhs = t(&proj_join(&p, &q)?)? - t(&q)?;
        let rhs = t(&p)? - t(&proj_meet(&p, &q)?)?;
        kaplansky = kaplansky.max((lhs - rhs).abs());
    }
    r.check_le("trace.kaplansky", kaplansky, o.tol);

    for (name, s) in &sc.states {
        r.check_le(format!("state.{name}.negativity"), (-s.density().min_eigenvalue()).max(0.0), 1e-12);
    }
    for (k, w) in sc.weights.iter().enumerate() {
        let (sum, sup) = ifs_dilations(l, &sc.ifs, w)?;
        r.set(
            format!("{}.dilations", weight_label(sc, k)),
            json!({"lambda_sum": ext(sum), "lambda_sup": ext(sup), "strict": w.is_strict()}),
        );
    }
    r.set("real_dim", json!(alg.real_dim()));
    r.set("kernel_dim", json!(l.kernel_coords().len()));
    Ok(())
}

fn fixed_state(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let l = &sc.seminorm;
    let gap_tol = o.tol / 10.0;
    for (k, w) in sc.weights.iter().enumerate() {
        let label = weight_label(sc, k);
        let fixed = fixed_state_eigen(&sc.ifs, w)?;
        let rep = &fixed.representative;
        let residual = (markov_apply(&sc.ifs, w, rep)?.density() - rep.density()).trace_norm();
        r.check_le(format!("{label}.eigen.residual"), residual, o.tol);
        let support = state_support(rep, o.tol)?;
        let it = fixed_state_iterate(
            &sc.ifs,
            w,
            &State::maximally_mixed(&sc.algebra),
            10_000,
            gap_tol,
            IterationMode::Plain,
        )?;
        let last = it.trace.last_gap().unwrap_or(f64::INFINITY);
        r.check(
            format!("{label}.iterate.residual"),
            ExtendedReal::Finite(last),
            10.0 * gap_tol,
            it.converged && last <= 10.0 * gap_tol,
        );
        let agreement = it.state.trace_distance(rep);
        r.check_le(format!("{label}.iterate_vs_eigen"), agreement, AGREEMENT_TOL);
        let mut entry = json!({
            "dimension": fixed.dimension,
            "unique": fixed.is_unique(),
            "warning": fixed.warning,
            "representative": report::element(rep.density()),
            "support": report::projection(&support),
            "iterate": {
                "steps": it.steps,
                "converged": it.converged,
                "mode": format!("{:?}", it.mode).to_lowercase(),
                "d_L_to_representative": ext(spectral_distance(l, &it.state, rep)?),
            },
        });
        if !fixed.is_unique() {
            // several fixed states: report pairwise distances between sampled ones
            let mut rng = sample::rng(o.seed);
            let mut states = vec![rep.clone()];
            for _ in 0..3 {
                states.push(fixed.project(&sample::random_state(&sc.algebra, &mut rng))?);
            }
            let mut rows = Vec::new();
            for a in &states {
                let mut row = Vec::new();
                for b in &states {
                    row.push(ext(spectral_distance(l, a, b)?));
                }
                rows.push(Value::Array(row));
            }
            entry["sampled_fixed_distances"] = Value::Array(rows);
            r.note(format!(
                "{label}: fixed set has dimension {}; distances between sampled fixed states are reported, no limit is selected",
                fixed.dimension
            ));
        }
        r.set(label, entry);
        if k == 0 {
            r.csv = Some(it.trace.to_csv());
        }
    }
    r.note("supports are computed as support projections; in finite dimensions these coincide with closed supports");
    Ok(())
}

fn distance(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let l = &sc.seminorm;
    let names: Vec<&String> = sc.states.keys().collect();
    if names.len() < 2 {
        return Err(Error::Precondition("distance needs at least two named states".into()));
    }
    let mut rows = Vec::new();
    let mut csv = String::from("a,b,distance\n");
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let (pa, pb) = (&sc.states[*a], &sc.states[*b]);
            let d = spectral_distance(l, pa, pb)?;
            let pairing = l.kernel_pairing(&sc.algebra.sa_coords(&(pa.density() - pb.density())));
            let mut row = json!({"a": a, "b": b, "distance": ext(d), "kernel_pairing": num(pairing)});
            let _ = writeln!(csv, "{a},{b},{}", fmt_ext(d));
            let tag = format!("{a}~{b}");
            r.check(
                format!("{tag}.inf_verdict"),
                ExtendedReal::Finite(pairing),
                crate::seminorm::INF_THRESHOLD,
                (pairing > crate::seminorm::INF_THRESHOLD) == !d.is_finite(),
            );
            if o.oracle {
                if let ExtendedReal::Finite(dv) = d {
                    let lower = spectral_distance_oracle(l, pa, pb, 4000, o.seed)?;
                    row["oracle"] = num(lower);
                    let rel = if dv > 0.0 { (dv - lower).abs() / dv } else { lower.abs() };
                    r.check_le(format!("{tag}.oracle_rel"), rel, ORACLE_REL_TOL);
                    r.check_le(format!("{tag}.oracle_below"), lower - dv, EXACT_TOL * (1.0 + dv));
                }
                if let Some(space) = l.space() {
                    let w = wasserstein1(&Measure::new(pa.masses())?, &Measure::new(pb.masses())?, space)?;
                    row["wasserstein1"] = ext(w);
                    r.check_le(format!("{tag}.wasserstein1"), ext_gap(w, d), EXACT_TOL);
                }
            }
            rows.push(row);
        }
    }
    r.set("pairs", Value::Array(rows));
    r.csv = Some(csv);
    Ok(())
}

fn fmt_ext(x: ExtendedReal) -> String {
    match x {
        ExtendedReal::Finite(v) => format!("{v:.16e}"),
        ExtendedReal::Inf => "inf".into(),
    }
}

/// `|a − b|`, zero when both are infinite and infinite when exactly one is.
fn ext_gap(a: ExtendedReal, b: ExtendedReal) -> f64 {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs(),
        (ExtendedReal::Inf, ExtendedReal::Inf) => 0.0,
        _ => f64::INFINITY,
    }
}

fn dilation(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let l = &sc.seminorm;
    let alg = &sc.algebra;
    let mut rng = sample::rng(o.seed);
    let mut csv = String::from("map,dilation\n");
    let mut table = Vec::new();
    for (h, name) in sc.ifs.homs().iter().zip(sc.ifs.names()) {
        let d = dilation_upper(l, h)?;
        let mut sampled = 0.0f64;
        for _ in 0..200 {
            let b = sample::random_self_adjoint(alg, &mut rng);
            let lb = seminorm_eval(l, &b)?;
            if lb > 1e-9 {
                sampled = sampled.max(seminorm_eval(l, &h.apply(&b))? / lb);
            }
        }
        if let ExtendedReal::Finite(dv) = d {
            r.check_le(format!("{name}.sampled_ratio_excess"), sampled - dv, EXACT_TOL);
        }
        table.push(json!({"map": name, "dilation": ext(d), "sampled_lower_bound": num(sampled)}));
        let _ = writeln!(csv, "{name},{}", fmt_ext(d));
    }
    r.set("maps", Value::Array(table));
    for (k, w) in sc.weights.iter().enumerate() {
        let (sum, sup) = ifs_dilations(l, &sc.ifs, w)?;
        r.set(
            weight_label(sc, k),
            json!({"weights": floats(w.values()), "lambda_sum": ext(sum), "lambda_sup": ext(sup)}),
        );
    }
    r.csv = Some(csv);
    Ok(())
}

/// The representative fixed state, fixed named states, and (for a fixed set
/// of dimension > 1) projections of seeded random states.
fn fixed_candidates(sc: &Scenario, w: &Weights, seed: u64) -> Result<Vec<(String, State)>, Error> {
    let fixed = fixed_state_eigen(&sc.ifs, w)?;
    let mut out = vec![("representative".to_string(), fixed.representative.clone())];
    for (name, s) in &sc.states {
        let res = (markov_apply(&sc.ifs, w, s)?.density() - s.density()).trace_norm();
        if res <= FIXED_RESIDUAL_TOL {
            out.push((name.clone(), s.clone()));
        }
    }
    if !fixed.is_unique() {
        let mut rng = sample::rng(seed);
        for i in 0..3 {
            out.push((format!("sampled{i}"), fixed.project(&sample::random_state(&sc.algebra, &mut rng))?));
        }
    }
    Ok(out)
}

fn selfsim(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    for (k, w) in sc.weights.iter().enumerate() {
        let label = weight_label(sc, k);
        let mut entries = serde_json::Map::new();
        for (name, s) in fixed_candidates(sc, w, o.seed)? {
            let rep = selfsim_support_check(&sc.ifs, w, &s, o.tol)?;
            r.check_le(format!("{label}.{name}.defect"), rep.defect, o.tol);
            let worst = rep.containment.iter().copied().fold(0.0, f64::max);
            r.check_le(format!("{label}.{name}.containment"), worst, o.tol);
            entries.insert(
                name,
                json!({
                    "support": report::projection(&rep.lhs),
                    "join_of_preimages": report::projection(&rep.rhs),
                    "containment": floats(&rep.containment),
                    "defect": num(rep.defect),
                }),
            );
        }
        r.set(label, Value::Object(entries));
    }
    r.note("support projections stand in for closed supports; the two coincide in finite dimensions");
    Ok(())
}

fn invariance(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let a = sc.weights[0].clone();
    let b = match sc.weights.get(1) {
        Some(b) => b.clone(),
        None => {
            let mut rng = sample::rng(o.seed);
            r.note("second weight vector drawn from the seed");
            Weights::new(normalized(&sample::random_masses(sc.ifs.len(), &mut rng)))?
        }
    };
    let rep = support_weight_invariance(&sc.ifs, &a, &b, &sc.seminorm, o.tol)?;
    r.check_le("support.defect", rep.defect, o.tol);
    r.set(
        "result",
        json!({
            "weights_a": floats(a.values()),
            "weights_b": floats(b.values()),
            "lambda_sum_a": num(rep.lambda_sum_a),
            "lambda_sum_b": num(rep.lambda_sum_b),
            "distance": num(rep.distance),
            "support_a": report::projection(&rep.support_a),
            "support_b": report::projection(&rep.support_b),
        }),
    );
    Ok(())
}

/// Renormalizes to an exact-sum probability vector with positive entries.
fn normalized(m: &[f64]) -> Vec<f64> {
    let floor: Vec<f64> = m.iter().map(|x| x.max(1e-3)).collect();
    let s: f64 = floor.iter().sum();
    let mut out: Vec<f64> = floor.iter().map(|x| x / s).collect();
    let rest: f64 = out[1..].iter().sum();
    out[0] = 1.0 - rest;
    out
}

fn codespace(sc: &Scenario, o: &Options, depth: usize, start: Option<&str>, r: &mut Report) -> Result<(), Error> {
    if depth == 0 {
        return Err(Error::Domain("--depth must be at least 1".into()));
    }
    check_budget(sc.ifs.len(), depth, o.budget)?;
    let phi0 = match start {
        Some(name) => sc
            .states
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Domain(format!("no state named {name:?}")))?,
        None => sc
            .states
            .values()
            .next()
            .cloned()
            .unwrap_or_else(|| State::maximally_mixed(&sc.algebra)),
    };
    let l = &sc.seminorm;
    let mut csv = String::from("weights,m,lhs,rhs,c,lambda,code_vs_fixed,iterate_vs_fixed\n");
    for (k, w) in sc.weights.iter().enumerate() {
        let label = weight_label(sc, k);
        let target = fixed_state_eigen(&sc.ifs, w)?.representative;
        let mut phi = phi0.clone();
        let mut rows = Vec::new();
        for m in 1..=depth {
            let cert = banach_certificate(&sc.ifs, w, l, &phi0, m, o.budget)?;
            phi = markov_apply(&sc.ifs, w, &phi)?;
            let avg = code_average(&sc.ifs, w, m, o.budget)?;
            let code_gap = avg.trace_distance(&target);
            let iter_gap = phi.trace_distance(&target);
            r.check_le(format!("{label}.M{m}.banach"), cert.lhs - cert.rhs, EXACT_TOL * 10.0);
            let _ = writeln!(
                csv,
                "{k},{m},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                cert.lhs, cert.rhs, cert.c, cert.lambda, code_gap, iter_gap
            );
            rows.push(json!({
                "m": m, "lhs": num(cert.lhs), "rhs": num(cert.rhs), "c": num(cert.c),
                "lambda": num(cert.lambda), "code_vs_fixed": num(code_gap), "iterate_vs_fixed": num(iter_gap),
            }));
        }
        r.set(label, Value::Array(rows));
    }
    r.csv = Some(csv);
    Ok(())
}

fn overlap(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let mut factors = Vec::new();
    let mut scal = Vec::new();
    for (h, name) in sc.ifs.homs().iter().zip(sc.ifs.names()) {
        let s = trace_scaling(&sc.trace, h, 20, o.seed, EXACT_TOL)?;
        scal.push(json!({"map": name, "scaling": s.factor().map(num), "ratios": floats(s.ratios())}));
        factors.push(s.factor());
    }
    r.set("scaling", Value::Array(scal));
    let all: Option<Vec<f64>> = factors.into_iter().collect();
    let gate = all.as_deref().is_some_and(scaling_gate);
    r.set("scaling_gate", json!(gate));

    let w = &sc.weights[0];
    let fixed = fixed_state_eigen(&sc.ifs, w)?;
    let p = state_support(&fixed.representative, o.tol)?;
    let pre: Vec<Projection> = sc
        .ifs
        .homs()
        .iter()
        .map(|f| upper_preimage(f, &p, crate::algebra::DEFAULT_TOL))
        .collect::<Result<_, _>>()?;
    let join = crate::algebra::join_all(&pre)?;
    let self_similar = (join.element() - p.element()).max_abs() <= o.tol;
    let m = overlap_traces(&sc.trace, &sc.ifs, &p)?;
    r.set("support", report::projection(&p));
    r.set("support_self_similar", json!(self_similar));
    r.set("overlap", report::real_matrix(&m));
    if gate && self_similar {
        let mut off = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    off = off.max(m[(i, j)].abs());
                }
            }
        }
        r.check_le("overlap.off_diagonal", off, o.tol);
    } else {
        r.note("scaling gate or self-similarity fails; overlaps are reported without a vanishing check");
    }

    let mut rng = sample::rng(o.seed);
    let mut kaplansky = 0.0f64;
    for _ in 0..20 {
        let (a, b) = sample::random_projection_pair(&sc.algebra, &mut rng);
        let t = |x: &Projection| sc.trace.eval(x.element());
        kaplansky = kaplansky.max((t(&proj_join(&a, &b)?)? - t(&b)? - t(&a)? + t(&proj_meet(&a, &b)?)?).abs());
    }
    r.check_le("trace.kaplansky", kaplansky, o.tol);
    let mut csv = String::from("i,j,overlap\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(csv, "{i},{j},{:.16e}", m[(i, j)]);
        }
    }
    r.csv = Some(csv);
    Ok(())
}

fn diagnose(sc: &Scenario, o: &Options, bump: &str, r: &mut Report) -> Result<(), Error> {
    let a = match (bump, sc.bumps.get(bump)) {
        (_, Some(a)) => a.clone(),
        ("unit", None) => sc.algebra.unit(),
        (_, None) => return Err(Error::Domain(format!("no bump named {bump:?}"))),
    };
    let check = is_bump(&a);
    r.check_le("bump.norm_defect", (check.norm - 1.0).abs(), crate::fractal::BUMP_TOL);
    r.check_le("bump.negativity", (-check.min_eigenvalue).max(0.0), crate::fractal::BUMP_TOL);
    if !check.is_bump {
        return Err(Error::Precondition(format!("{bump:?} is not a compactly supported bump")));
    }
    let flat = local_flat_space(&sc.seminorm, &a)?;
    let class = classify_local(&sc.seminorm, &a)?;
    r.set(
        "local",
        json!({
            "flat_dim": class.flat_dim,
            "classification": class.classification.name(),
            "flat_basis": Value::Array(flat.iter().map(report::element).collect()),
        }),
    );
    r.note("bounded and semi-bounded coincide in finite dimensions; only consistency is classified");

    let k = sc.ifs.len();
    let mut probes = Vec::new();
    for len in 1..=2usize {
        if check_budget(k, len, o.budget).is_err() {
            break;
        }
        for word in Word::all(k, len) {
            let phi = word_fixed_state(&sc.ifs, &word)?;
            let rank = phi.state.density().eigenvalues().iter().filter(|&&v| v > 1e-9).count();
            probes.push(json!({
                "word": word.letters(),
                "unique": phi.unique,
                "density_rank": rank,
                "support_rank": num(state_support(&phi.state, o.tol)?.rank()),
            }));
        }
    }
    r.set("word_fixed_states", Value::Array(probes));
    Ok(())
}

fn classical(sc: &Scenario, o: &Options, r: &mut Report) -> Result<(), Error> {
    let (Some(space), Some(maps)) = (&sc.space, &sc.point_maps) else {
        return Err(Error::Domain("classical needs a scenario given by \"space\" and \"maps\"".into()));
    };
    let contractive = maps.iter().all(|g| lipschitz_constant(g, space) < ExtendedReal::Finite(1.0));
    let attractor = if contractive {
        let k = maps.len();
        let mut prev: Option<BTreeSet<usize>> = None;
        let mut found = None;
        for m in 1.. {
            if check_budget(k, m, o.budget).is_err() {
                break;
            }
            let pts = attractor_points(maps, space, m)?;
            if prev.as_ref() == Some(&pts) {
                found = Some((m - 1, pts));
                break;
            }
            prev = Some(pts);
        }
        if found.is_none() {
            r.note("attractor did not stabilize within the word budget");
        }
        found
    } else {
        r.note("some map is not a strict contraction; attractor enumeration skipped");
        None
    };
    if let Some((m, pts)) = &attractor {
        let image: BTreeSet<usize> = maps.iter().flat_map(|g| pts.iter().map(|&x| g.apply(x))).collect();
        r.check_le(
            "attractor.self_similarity",
            pts.symmetric_difference(&image).count() as f64,
            0.0,
        );
        r.set("attractor", json!({"depth": m, "points": pts}));
    }

    for (k, w) in sc.weights.iter().enumerate() {
        let label = weight_label(sc, k);
        let h = hutchinson_measure(maps, w, space)?;
        let lifted = fixed_state_eigen(&sc.ifs, w)?;
        let diff = h
            .measure
            .masses()
            .iter()
            .zip(lifted.representative.masses())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        r.check_le(format!("{label}.hutchinson_vs_lift"), diff, EXACT_TOL);
        r.check_le(format!("{label}.hutchinson_residual"), h.residual, 1e-10);
        let mu_support = h.measure.support(1e-12);
        let lift_support: BTreeSet<usize> = state_support(&lift_measure(&h.measure), 1e-12)?.points().into_iter().collect();
        r.check_le(
            format!("{label}.support_vs_lift"),
            mu_support.symmetric_difference(&lift_support).count() as f64,
            0.0,
        );
        if let (Some((_, pts)), true) = (&attractor, w.is_strict()) {
            r.check_le(
                format!("{label}.support_vs_attractor"),
                mu_support.symmetric_difference(pts).count() as f64,
                0.0,
            );
        }
        r.set(
            label,
            json!({
                "masses": floats(h.measure.masses()),
                "dimension": h.dimension,
                "warning": h.warning,
            }),
        );
    }

    let mut rng = sample::rng(o.seed);
    let mut w1_gap = 0.0f64;
    let mut duality_gap = 0.0f64;
    for _ in 0..20 {
        let (a, b) = sample_state_pair(&sc.seminorm, &mut rng);
        let (ma, mb) = (Measure::new(a.masses())?, Measure::new(b.masses())?);
        let w1 = wasserstein1(&ma, &mb, space)?;
        w1_gap = w1_gap.max(ext_gap(w1, spectral_distance(&sc.seminorm, &a, &b)?));
        duality_gap = duality_gap.max(ext_gap(w1, kantorovich_dual(&ma, &mb, space)?));
    }
    r.check_le("wasserstein1_vs_spectral", w1_gap, EXACT_TOL);
    r.check_le("kantorovich_duality", duality_gap, EXACT_TOL);
    Ok(())
}
