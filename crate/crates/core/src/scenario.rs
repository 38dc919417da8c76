//! JSON scenario files: an algebra, a Lipschitz seminorm, a dual IFS, one
//! or more weight vectors, named states, a trace and named bumps.
//!
//! Complex matrices are nested arrays of `[re, im]` pairs (plain numbers are
//! read as real entries); an element is a list of such matrices, one per
//! block. Commutative scenarios may instead give a finite metric space and
//! point maps:
//!
//! ```json
//! {"space": {"d": [[0, 1], [1, 0]]}, "maps": [[0, 0], [1, 1]], "weights": [0.5, 0.5]}
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::algebra::{Algebra, CMatrix, Element, State, Trace, C64};
use crate::classical::{FiniteMetricSpace, PointMap};
use crate::dynamics::Weights;
use crate::extended::ExtendedReal;
use crate::morphism::{validate_hom, DualIfs, StarHom};
use crate::seminorm::Seminorm;

/// Morphisms are rejected at load when a homomorphism defect exceeds this.
pub const HOM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("schema violation at \"{path}\": {message}")]
    Schema { path: String, message: String },
    #[error("validation failed for \"{path}\": {message}")]
    Validation { path: String, message: String },
}

fn schema(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Schema {
        path: path.into(),
        message: message.to_string(),
    }
}

fn validation(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation {
        path: path.into(),
        message: message.to_string(),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(f64),
    Complex([f64; 2]),
}

type RawMatrix = Vec<Vec<RawEntry>>;
type RawElement = Vec<RawMatrix>;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawDist {
    Finite(f64),
    Word(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    blocks: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    d: Vec<Vec<RawDist>>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawSeminorm {
    Euclidean { delta: Vec<Vec<f64>> },
    Metric { d: Vec<Vec<RawDist>> },
    UnitComplement,
    BlockTraceless,
    Commutator { d: RawElement },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawHom {
    Identity {
        name: Option<String>,
    },
    Unitary {
        u: RawElement,
        name: Option<String>,
    },
    PointMap {
        g: Vec<usize>,
        name: Option<String>,
    },
    Pattern {
        targets: Vec<Vec<(usize, usize)>>,
        u: Option<RawElement>,
        name: Option<String>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawWeights {
    One(Vec<f64>),
    Many(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElementSpec {
    element: Option<RawElement>,
    density: Option<RawElement>,
    diag: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    description: Option<String>,
    algebra: Option<RawAlgebra>,
    space: Option<RawSpace>,
    maps: Option<Vec<Vec<usize>>>,
    seminorm: Option<RawSeminorm>,
    homs: Option<Vec<RawHom>>,
    weights: Option<RawWeights>,
    #[serde(default)]
    states: BTreeMap<String, RawElementSpec>,
    trace: Option<Vec<f64>>,
    #[serde(default)]
    bumps: BTreeMap<String, RawElementSpec>,
    budget: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
}

/// A fully validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub path: Option<PathBuf>,
    pub algebra: Algebra,
    pub seminorm: Seminorm,
    pub ifs: DualIfs,
    pub weights: Vec<Weights>,
    pub states: BTreeMap<String, State>,
    pub trace: Trace,
    pub bumps: BTreeMap<String, Element>,
    /// Present for commutative scenarios given as a metric space.
    pub space: Option<FiniteMetricSpace>,
    pub point_maps: Option<Vec<PointMap>>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (before + column.saturating_sub(1)).min(text.len())
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let mut sc = parse_scenario(&text, stem)?;
    sc.path = Some(path.to_path_buf());
    Ok(sc)
}

/// Parses and validates scenario text; `default_name` is used when the file
/// has no `name`.
pub fn parse_scenario(text: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScenario = match serde_path_to_error::deserialize(de) {
        Ok(raw) => raw,
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            return Err(if inner.is_data() {
                schema(path, inner)
            } else {
                ScenarioError::Parse {
                    offset: byte_offset(text, inner.line(), inner.column()),
                    message: inner.to_string(),
                }
            });
        }
    };
    build(raw, default_name)
}

fn parse_dist(rows: &[Vec<RawDist>], path: &str) -> Result<FiniteMetricSpace, ScenarioError> {
    let d = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| match v {
                    RawDist::Finite(x) => Ok(ExtendedReal::Finite(*x)),
                    RawDist::Word(s) => ExtendedReal::parse(s)
                        .ok_or_else(|| schema(format!("{path}[{i}][{j}]"), format!("expected a number or \"inf\", got {s:?}"))),
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>, _>>()?;
    FiniteMetricSpace::new(d).map_err(|e| schema(path, e))
}

fn parse_element(alg: &Algebra, raw: &RawElement, path: &str) -> Result<Element, ScenarioError> {
    if raw.len() != alg.num_blocks() {
        return Err(schema(
            path,
            format!("{} blocks given, algebra has {}", raw.len(), alg.num_blocks()),
        ));
    }
    let blocks = raw
        .iter()
        .zip(alg.block_dims())
        .enumerate()
        .map(|(b, (rows, &n))| {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(schema(format!("{path}[{b}]"), format!("block must be {n}×{n}")));
            }
            Ok(CMatrix::from_fn(n, n, |i, j| match rows[i][j] {
                RawEntry::Real(x) => C64::new(x, 0.0),
                RawEntry::Complex([re, im]) => C64::new(re, im),
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Element::from_blocks(blocks).map_err(|e| schema(path, e))
}

fn parse_spec(alg: &Algebra, spec: &RawElementSpec, path: &str) -> Result<Element, ScenarioError> {
    match (&spec.element, &spec.density, &spec.diag) {
        (Some(e), None, None) => parse_element(alg, e, &format!("{path}.element")),
        (None, Some(e), None) => parse_element(alg, e, &format!("{path}.density")),
        (None, None, Some(d)) => alg.diag(d).map_err(|e| schema(format!("{path}.diag"), e)),
        _ => Err(schema(path, "give exactly one of \"element\", \"density\" or \"diag\"")),
    }
}

fn build(raw: RawScenario, default_name: &str) -> Result<Scenario, ScenarioError> {
    let space = raw.space.as_ref().map(|s| parse_dist(&s.d, "space.d")).transpose()?;
    let algebra = match (&raw.algebra, &space) {
        (Some(a), _) => Algebra::new(a.blocks.clone()).map_err(|e| schema("algebra.blocks", e))?,
        (None, Some(x)) => Algebra::diagonal(x.len()),
        (None, None) => return Err(schema("algebra", "missing: give \"algebra\" or \"space\"")),
    };
    if let Some(x) = &space {
        if algebra != Algebra::diagonal(x.len()) {
            return Err(schema("algebra", "a metric space requires the diagonal algebra of its size"));
        }
    }

    let seminorm = match (&raw.seminorm, &space) {
        (Some(RawSeminorm::Euclidean { delta }), _) => {
            let cols = algebra.real_dim();
            if delta.is_empty() || delta.iter().any(|r| r.len() != cols) {
                return Err(schema("seminorm.delta", format!("rows must have length {cols}")));
            }
            let m = nalgebra::DMatrix::from_fn(delta.len(), cols, |i, j| delta[i][j]);
            Seminorm::euclidean(algebra.clone(), m).map_err(|e| validation("seminorm", e))?
        }
        (Some(RawSeminorm::Metric { d }), _) => {
            let x = parse_dist(d, "seminorm.d")?;
            if algebra != Algebra::diagonal(x.len()) {
                return Err(schema("seminorm.d", "metric seminorm needs the diagonal algebra of its size"));
            }
            Seminorm::metric(x)
        }
        (Some(RawSeminorm::UnitComplement), _) => Seminorm::unit_complement(algebra.clone()),
        (Some(RawSeminorm::BlockTraceless), _) => Seminorm::block_traceless(algebra.clone()),
        (Some(RawSeminorm::Commutator { d }), _) => {
            let d = parse_element(&algebra, d, "seminorm.d")?;
            Seminorm::commutator(&d).map_err(|e| validation("seminorm", e))?
        }
        (None, Some(x)) => Seminorm::metric(x.clone()),
        (None, None) => return Err(schema("seminorm", "missing")),
    };

    let point_maps = raw
        .maps
        .as_ref()
        .map(|maps| {
            maps.iter()
                .enumerate()
                .map(|(i, g)| {
                    if g.len() != algebra.total_dim() {
                        return Err(schema(format!("maps[{i}]"), format!("expected {} entries", algebra.total_dim())));
                    }
                    PointMap::new(g.clone()).map_err(|e| schema(format!("maps[{i}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    if point_maps.is_some() && space.is_none() {
        return Err(schema("maps", "point maps need a \"space\""));
    }

    let (homs, names) = match (&raw.homs, &point_maps) {
        (Some(_), Some(_)) => return Err(schema("homs", "give either \"homs\" or \"maps\", not both")),
        (Some(list), None) => {
            let mut homs = Vec::new();
            let mut names = Vec::new();
            for (i, h) in list.iter().enumerate() {
                let path = format!("homs[{i}]");
                let (hom, name) = build_hom(&algebra, h, &path)?;
                names.push(name.unwrap_or_else(|| format!("f{i}")));
                homs.push(hom);
            }
            (homs, names)
        }
        (None, Some(maps)) => (
            maps.iter().map(crate::classical::lift_map).collect(),
            (0..maps.len()).map(|i| format!("g{i}")).collect(),
        ),
        (None, None) => return Err(schema("homs", "missing: give \"homs\" or \"maps\"")),
    };
    for (i, h) in homs.iter().enumerate() {
        let r = validate_hom(h, HOM_TOL);
        if !r.pass {
            return Err(validation(
                format!("homs[{i}]"),
                format!(
                    "not a unital *-homomorphism (multiplicativity {:.3e}, adjoint {:.3e}, unitality {:.3e})",
                    r.multiplicativity, r.adjoint, r.unitality
                ),
            ));
        }
    }
    let ifs = DualIfs::with_names(homs, names).map_err(|e| schema("homs", e))?;

    let weights = match &raw.weights {
        None => vec![Weights::uniform(ifs.len())],
        Some(RawWeights::One(w)) => vec![make_weights(w, ifs.len(), "weights")?],
        Some(RawWeights::Many(ws)) => {
            if ws.is_empty() {
                return Err(schema("weights", "empty list"));
            }
            ws.iter()
                .enumerate()
                .map(|(i, w)| make_weights(w, ifs.len(), &format!("weights[{i}]")))
                .collect::<Result<_, _>>()?
        }
    };

    let mut states = BTreeMap::new();
    for (name, spec) in &raw.states {
        let path = format!("states.{name}");
        let density = parse_spec(&algebra, spec, &path)?;
        let state = State::new(density).map_err(|e| validation(&path, e))?;
        states.insert(name.clone(), state);
    }
    let mut bumps = BTreeMap::new();
    for (name, spec) in &raw.bumps {
        bumps.insert(name.clone(), parse_spec(&algebra, spec, &format!("bumps.{name}"))?);
    }

    let trace = match &raw.trace {
        None => Trace::counting(algebra.num_blocks()),
        Some(w) => {
            if w.len() != algebra.num_blocks() {
                return Err(schema("trace", format!("expected {} block weights", algebra.num_blocks())));
            }
            Trace::new(w.clone()).map_err(|e| schema("trace", e))?
        }
    };
    if let Some(t) = raw.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(schema("tol", "must be positive"));
        }
    }

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| default_name.to_string()),
        description: raw.description,
        path: None,
        algebra,
        seminorm,
        ifs,
        weights,
        states,
        trace,
        bumps,
        space,
        point_maps,
        budget: raw.budget,
        tol: raw.tol,
        seed: raw.seed,
    })
}

fn build_hom(alg: &Algebra, h: &RawHom, path: &str) -> Result<(StarHom, Option<String>), ScenarioError> {
    Ok(match h {
        RawHom::Identity { name } => (StarHom::identity(alg), name.clone()),
        RawHom::Unitary { u, name } => {
            let u = parse_element(alg, u, &format!("{path}.u"))?;
            (StarHom::from_unitary(&u).map_err(|e| validation(path, e))?, name.clone())
        }
        RawHom::PointMap { g, name } => {
            if *alg != Algebra::diagonal(g.len()) {
                return Err(schema(format!("{path}.g"), "point map size must match the diagonal algebra"));
            }
            (StarHom::from_point_map(g).map_err(|e| schema(format!("{path}.g"), e))?, name.clone())
        }
        RawHom::Pattern { targets, u, name } => {
            let twist = u
                .as_ref()
                .map(|u| parse_element(alg, u, &format!("{path}.u")))
                .transpose()?;
            let hom = StarHom::from_pattern(alg, targets, twist.as_ref()).map_err(|e| schema(format!("{path}.targets"), e))?;
            (hom, name.clone())
        }
    })
}

fn make_weights(w: &[f64], k: usize, path: &str) -> Result<Weights, ScenarioError> {
    if w.len() != k {
        return Err(schema(path, format!("{} weights for {k} maps", w.len())));
    }
    Weights::new(w.to_vec()).map_err(|e| schema(path, e))
}
