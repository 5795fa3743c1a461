//! Browser bindings. Each export has a plain Rust counterpart that the native
//! tests exercise; the wasm wrappers only convert errors into JS exceptions.

use role_diversity::diagnosis::{recommend, GuidelineThresholds};
use role_diversity::metrics::{overlap_fraction, symmetric_kl, ActionDistribution, TaskMeasurement, DEFAULT_SMOOTHING};
use wasm_bindgen::prelude::*;

/// Overlap fraction at `points` evenly spaced centre distances in `[0, 2r]`.
pub fn overlap_samples(radius: f64, points: usize) -> Result<Vec<f64>, String> {
    if radius.is_nan() || radius <= 0.0 || radius.is_infinite() {
        return Err(format!("radius must be positive, got {radius}"));
    }
    if points < 2 {
        return Err(format!("need at least 2 points, got {points}"));
    }
    let step = 2.0 * radius / (points - 1) as f64;
    Ok((0..points).map(|i| overlap_fraction(i as f64 * step, radius)).collect())
}

/// Symmetric KL between two non-negative weight vectors, normalised first.
pub fn divergence(p: &[f64], q: &[f64]) -> Result<f64, String> {
    let p = ActionDistribution::from_weights(p.to_vec()).map_err(|e| e.to_string())?;
    let q = ActionDistribution::from_weights(q.to_vec()).map_err(|e| e.to_string())?;
    symmetric_kl(&p, &q, DEFAULT_SMOOTHING).map_err(|e| e.to_string())
}

/// Recommendation under the shipped thresholds, as a JSON document.
pub fn diagnosis_json(semantic: f64, real: f64, overlap: f64, contribution: f64) -> Result<String, String> {
    let m = TaskMeasurement::new(semantic, real, overlap, contribution).map_err(|e| e.to_string())?;
    let report = recommend(&m, &GuidelineThresholds::default());
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = overlapCurve)]
pub fn overlap_curve(radius: f64, points: usize) -> Result<Vec<f64>, JsError> {
    overlap_samples(radius, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = symmetricKl)]
pub fn symmetric_kl_js(p: Vec<f64>, q: Vec<f64>) -> Result<f64, JsError> {
    divergence(&p, &q).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn diagnose(semantic: f64, real: f64, overlap: f64, contribution: f64) -> Result<String, JsError> {
    diagnosis_json(semantic, real, overlap, contribution).map_err(|e| JsError::new(&e))
}
