//! Command reports: checked quantities with their tolerances, free-form
//! data, optional CSV tables, and a JSON writer that prints every float with
//! 17 significant digits.

use std::io;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use crate::algebra::{Element, Projection};
use crate::extended::ExtendedReal;

/// A quantity compared against a tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: ExtendedReal,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub scenario: String,
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
    pub notes: Vec<String>,
    pub csv: Option<String>,
}

impl Report {
    pub fn new(command: &str, scenario: &str, seed: u64, tol: f64) -> Self {
        Self {
            command: command.to_string(),
            scenario: scenario.to_string(),
            seed,
            tol,
            checks: Vec::new(),
            data: Map::new(),
            notes: Vec::new(),
            csv: None,
        }
    }

    /// Records `value ≤ tol`.
    pub fn check_le(&mut self, name: impl Into<String>, value: f64, tol: f64) -> bool {
        let pass = value <= tol;
        self.check(name, ExtendedReal::Finite(value), tol, pass)
    }

    pub fn check(&mut self, name: impl Into<String>, value: ExtendedReal, tol: f64, pass: bool) -> bool {
        self.checks.push(Check {
            name: name.into(),
            value,
            tol,
            pass,
        });
        pass
    }

    pub fn set(&mut self, key: impl Into<String>, value: Value) {
        self.data.insert(key.into(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_value(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "value": ext(c.value),
                    "tol": num(c.tol),
                    "pass": c.pass,
                })
            })
            .collect();
        json!({
            "command": self.command,
            "scenario": self.scenario,
            "seed": self.seed,
            "tol": num(self.tol),
            "pass": self.passed(),
            "checks": checks,
            "data": Value::Object(self.data.clone()),
            "notes": self.notes,
        })
    }

    pub fn to_json(&self) -> String {
        to_json_string(&self.to_value())
    }
}

/// Pretty JSON with floats in `{:.16e}` form.
struct SciFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident $(($arg:ident: $ty:ty))?),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)?) -> io::Result<()> {
            self.0.$name(writer $(, $arg)?)
        })*
    };
}

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    delegate!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        begin_object_value,
        end_object_value,
    );
}

pub fn to_json_string(value: &impl Serialize) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("JSON values serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

/// A float; non-finite values become `"inf"`, `"-inf"` or null.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x == f64::INFINITY {
        Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from(x)
    }
}

pub fn ext(x: ExtendedReal) -> Value {
    match x {
        ExtendedReal::Finite(v) => num(v),
        ExtendedReal::Inf => Value::from("inf"),
    }
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn real_matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| num(x)).collect()))
            .collect(),
    )
}

/// Blocks of `[re, im]` pairs, row-major.
pub fn element(x: &Element) -> Value {
    Value::Array(
        x.blocks()
            .iter()
            .map(|b| {
                Value::Array(
                    b.row_iter()
                        .map(|r| Value::Array(r.iter().map(|z| json!([num(z.re), num(z.im)])).collect()))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// A projection as its rank and, per block, the `{0, 1}` spectrum with the
/// matching orthonormal eigenvectors (columns).
pub fn projection(p: &Projection) -> Value {
    let blocks: Vec<Value> = p
        .element()
        .blocks()
        .iter()
        .map(|b| {
            let (vals, vecs) = crate::linalg::herm_eigen(b);
            let spectrum: Vec<f64> = vals.iter().map(|v| v.round()).collect();
            json!({
                "spectrum": floats(&spectrum),
                "eigenbasis": Value::Array(
                    vecs.row_iter()
                        .map(|r| Value::Array(r.iter().map(|z| json!([num(z.re), num(z.im)])).collect()))
                        .collect(),
                ),
            })
        })
        .collect();
    json!({ "rank": num(p.rank()), "blocks": blocks })
}
