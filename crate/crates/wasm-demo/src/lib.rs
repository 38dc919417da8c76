//! Browser bindings: the self-similar measure of the binary shift, spectral
//! distances between qubit states, and the code-space convergence curve.

use ncfractal::algebra::{Algebra, CMatrix, State, C64};
use ncfractal::classical::{hutchinson_measure, lift_map, shift_maps, FiniteMetricSpace};
use ncfractal::dynamics::{banach_certificate, Weights, DEFAULT_BUDGET};
use ncfractal::morphism::DualIfs;
use ncfractal::seminorm::{spectral_distance, Seminorm};
use ncfractal::{Error, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_DEPTH: usize = 8;

fn two_weights(p: f64) -> Result<Weights> {
    Weights::new(vec![p, 1.0 - p])
}

/// Masses of the self-similar measure on binary words of length `depth`,
/// left map weighted by `p`.
pub fn shift_masses(depth: usize, p: f64) -> Result<Vec<f64>> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Domain(format!("depth must lie in 1..={MAX_DEPTH}")));
    }
    let space = FiniteMetricSpace::shift_space(2, depth);
    let h = hutchinson_measure(&shift_maps(2, depth), &two_weights(p)?, &space)?;
    Ok(h.measure.masses().to_vec())
}

/// Qubit density `(I + r·σ)/2` for a Bloch vector with `|r| ≤ 1`.
pub fn bloch_state(r: [f64; 3]) -> Result<State> {
    let [x, y, z] = r;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        ],
    );
    State::new(Algebra::full_matrix(2).element(vec![m])?)
}

/// `d_L` between two Bloch vectors under the seminorm vanishing on the unit.
pub fn qubit_distance(a: [f64; 3], b: [f64; 3]) -> Result<f64> {
    let l = Seminorm::unit_complement(Algebra::full_matrix(2));
    Ok(spectral_distance(&l, &bloch_state(a)?, &bloch_state(b)?)?.to_f64())
}

/// Rows `(M, d_L(code average, iterate), C Λ^M / (1 − Λ))` on the depth-3
/// shift started from the maximally mixed state.
pub fn banach_rows(p: f64, max_m: usize) -> Result<Vec<(usize, f64, f64)>> {
    let depth = 3;
    let ifs = DualIfs::new(shift_maps(2, depth).iter().map(lift_map).collect())?;
    let l = Seminorm::metric(FiniteMetricSpace::shift_space(2, depth));
    let w = two_weights(p)?;
    let phi0 = State::maximally_mixed(ifs.algebra());
    (1..=max_m.min(10))
        .map(|m| {
            let c = banach_certificate(&ifs, &w, &l, &phi0, m, DEFAULT_BUDGET)?;
            Ok((m, c.lhs, c.rhs))
        })
        .collect()
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = shiftMeasure)]
pub fn shift_measure_js(depth: usize, p: f64) -> std::result::Result<Vec<f64>, JsError> {
    shift_masses(depth, p).map_err(js)
}

#[wasm_bindgen(js_name = qubitDistance)]
pub fn qubit_distance_js(a: Vec<f64>, b: Vec<f64>) -> std::result::Result<f64, JsError> {
    let vec3 = |v: &[f64]| -> std::result::Result<[f64; 3], JsError> {
        v.try_into().map_err(|_| JsError::new("Bloch vectors have three components"))
    };
    qubit_distance(vec3(&a)?, vec3(&b)?).map_err(js)
}

/// JSON array of `{m, gap, bound}`.
#[wasm_bindgen(js_name = banachCurve)]
pub fn banach_curve_js(p: f64, max_m: usize) -> std::result::Result<String, JsError> {
    let rows = banach_rows(p, max_m).map_err(js)?;
    let out: Vec<_> = rows
        .iter()
        .map(|&(m, gap, bound)| json!({"m": m, "gap": gap, "bound": bound}))
        .collect();
    Ok(serde_json::Value::Array(out).to_string())
}
