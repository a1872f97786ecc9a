//! Browser bindings: gain curves, fusion of a pasted readings table and
//! warning-time prediction. Every function returns a JSON string.

use serde_json::json;
use wasm_bindgen::prelude::*;

use fracfuse::fixtures;
use fracfuse::fusion::{
    check_consistency, fuse, improvement_ratio, summarize, FusionConfig, QualityGate,
};
use fracfuse::glcalc::{amplitude_curve, FracOrder};
use fracfuse::io::{readings_from_str, trend_from_str};
use fracfuse::prognosis::{diagnose, fit_trend, threshold, warning_time, Status, WarningPolicy};
use fracfuse::Error;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Gain `|ω|^ν` for each order in `orders` (comma separated) over
/// `samples` evenly spaced frequencies.
#[wasm_bindgen]
pub fn gain_curve(
    orders: &str,
    omega_min: f64,
    omega_max: f64,
    samples: usize,
) -> Result<String, JsError> {
    let orders = orders
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad order '{s}'")))
                .and_then(FracOrder::new)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(js)?;
    let rows = amplitude_curve(&orders, omega_min, omega_max, samples).map_err(js)?;
    Ok(serde_json::to_string(&rows)?)
}

/// Gates, summarizes and fuses a `sensor_id,reading_1,...` table.
#[wasm_bindgen]
pub fn fuse_readings(
    readings_csv: &str,
    gate_lo: f64,
    gate_hi: f64,
    nu: f64,
    step: f64,
) -> Result<String, JsError> {
    let sensors = readings_from_str(readings_csv, "").map_err(js)?;
    let gate = QualityGate::new(gate_lo, gate_hi).map_err(js)?;
    let summaries = sensors
        .iter()
        .map(|s| summarize(s, &gate))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js)?;
    let config = FusionConfig::new(nu, step, 0.01, 3).map_err(js)?;
    let consistency = check_consistency(&summaries, config.consistency_tol).map_err(js)?;
    let (result, converged) = match fuse(&summaries, &config) {
        Ok(r) => (r, true),
        Err(Error::NotConverged { last, .. }) => (*last, false),
        Err(e) => return Err(js(e)),
    };
    let ratio = improvement_ratio(&result);
    Ok(serde_json::to_string(&json!({
        "summaries": summaries,
        "consistency": consistency,
        "fusion": result,
        "fused_mean": result.fused_mean(),
        "improvement_ratio": ratio.is_finite().then_some(ratio),
        "converged": converged,
    }))?)
}

/// Fits a `t,value` table and finds when it reaches `k · rated_limit`.
#[wasm_bindgen]
pub fn predict_warning(
    trend_csv: &str,
    rated_limit: f64,
    k: f64,
    horizon: f64,
) -> Result<String, JsError> {
    let samples = trend_from_str(trend_csv).map_err(js)?;
    let policy = WarningPolicy::new(rated_limit, k).map_err(js)?;
    let limit = threshold(&policy).map_err(js)?;
    let trend = fit_trend(&samples).map_err(js)?;
    let current = samples[samples.len() - 1].1;
    let status = diagnose(current, limit);
    let t_y = match status {
        Status::Normal => warning_time(&trend, limit, horizon),
        Status::Warning => None,
    };
    Ok(serde_json::to_string(&json!({
        "threshold": limit,
        "status": status,
        "trend": trend,
        "t_y": t_y,
    }))?)
}

/// Raw text of a bundled fixture file, for prefilling the page.
#[wasm_bindgen]
pub fn bundled_file(dataset: &str, file: &str) -> Option<String> {
    fixtures::file(dataset, file).map(str::to_string)
}
