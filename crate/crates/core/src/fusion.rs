//! Multi-sensor fusion: outlier gating, per-sensor summaries, and the
//! fractional-differential fusion of the fitted influence-factor model.
//!
//! Each sensor's standard deviation `S_i` serves as its influence factor. A
//! polynomial `F(S)` is fitted through `(S_i, mean_i)`, the order-`ν` G-L
//! operator is applied to `F` at every `S_i` with one fixed-length expansion
//! over `[min S, max S]`, and the fused values are mapped back to the
//! physical scale by the amplification ratio `K = mean(fused) / reference`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::glcalc::{FracOrder, GlGrid, GlOperator};
use crate::lsqfit::{select_order_by, FitReport, Point2, Polynomial};
use crate::stats::{mean, population_std};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSeries {
    pub sensor_id: String,
    pub readings: Vec<f64>,
    pub unit: String,
}

impl SensorSeries {
    pub fn new(
        sensor_id: impl Into<String>,
        readings: Vec<f64>,
        unit: impl Into<String>,
    ) -> Result<Self> {
        let sensor_id = sensor_id.into();
        if readings.is_empty() {
            return Err(invalid(format!("sensor {sensor_id}: no readings")));
        }
        if readings.iter().any(|r| !r.is_finite()) {
            return Err(invalid(format!("sensor {sensor_id}: non-finite reading")));
        }
        Ok(SensorSeries {
            sensor_id,
            readings,
            unit: unit.into(),
        })
    }
}

/// Open admissible interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityGate {
    pub lo: f64,
    pub hi: f64,
}

impl QualityGate {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(invalid(format!(
                "quality gate needs lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(QualityGate { lo, hi })
    }

    pub fn admits(&self, value: f64) -> bool {
        value > self.lo && value < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSummary {
    pub sensor_id: String,
    pub retained: usize,
    pub mean: f64,
    pub std: f64,
    /// Readings the gate discarded, in input order.
    pub rejected: Vec<f64>,
}

/// Drops readings outside the gate and summarizes the survivors.
pub fn summarize(series: &SensorSeries, gate: &QualityGate) -> Result<SensorSummary> {
    let (kept, rejected): (Vec<f64>, Vec<f64>) =
        series.readings.iter().partition(|&&r| gate.admits(r));
    if kept.is_empty() {
        return Err(Error::NoValidData {
            sensor: series.sensor_id.clone(),
        });
    }
    Ok(SensorSummary {
        sensor_id: series.sensor_id.clone(),
        retained: kept.len(),
        mean: mean(&kept),
        std: population_std(&kept),
        rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub passed: bool,
    /// `max_i |mean_i - grand_mean| / |grand_mean|`
    pub max_deviation: f64,
}

pub fn check_consistency(summaries: &[SensorSummary], tol: f64) -> Result<Consistency> {
    let means: Vec<f64> = summaries.iter().map(|s| s.mean).collect();
    let max_deviation = relative_spread(&means)?;
    Ok(Consistency {
        passed: max_deviation <= tol,
        max_deviation,
    })
}

fn relative_spread(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("no summaries to compare"));
    }
    let grand = mean(values);
    if grand == 0.0 {
        return Err(Error::ZeroGrandMean);
    }
    Ok(values
        .iter()
        .map(|v| (v - grand).abs() / grand.abs())
        .fold(0.0, f64::max))
}

/// Unweighted mean of the per-sensor means.
pub fn reference_true_value(summaries: &[SensorSummary]) -> Result<f64> {
    if summaries.is_empty() {
        return Err(invalid("no summaries to average"));
    }
    Ok(summaries.iter().map(|s| s.mean).sum::<f64>() / summaries.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub nu: FracOrder,
    pub h: f64,
    pub consistency_tol: f64,
    pub max_rounds: usize,
}

impl FusionConfig {
    pub fn new(nu: f64, h: f64, consistency_tol: f64, max_rounds: usize) -> Result<Self> {
        let config = FusionConfig {
            nu: FracOrder::unit(nu)?,
            h,
            consistency_tol,
            max_rounds,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        FracOrder::unit(self.nu.value())?;
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid(format!("step must be positive, got {}", self.h)));
        }
        if !(self.consistency_tol.is_finite() && self.consistency_tol > 0.0) {
            return Err(invalid(format!(
                "consistency tolerance must be positive, got {}",
                self.consistency_tol
            )));
        }
        if self.max_rounds < 1 {
            return Err(invalid("max_rounds must be at least 1"));
        }
        Ok(())
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            nu: FracOrder::new(0.5).expect("0.5 is a valid order"),
            h: 0.01,
            consistency_tol: 0.01,
            max_rounds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub sensor_ids: Vec<String>,
    /// Influence factors `S_i`.
    pub influence: Vec<f64>,
    /// Operator-scale values `F^ν(S_i)`.
    pub fused: Vec<f64>,
    /// Fused values divided by `K`.
    pub rescaled: Vec<f64>,
    /// `K = mean(fused) / reference`.
    pub amplification: f64,
    pub reference: f64,
    pub pre_std: f64,
    pub post_std: f64,
    pub rounds: usize,
    pub n_steps: usize,
    /// Fit of the final round.
    pub fit: FitReport,
}

impl FusionResult {
    pub fn fused_mean(&self) -> f64 {
        mean(&self.fused)
    }

    pub fn rescaled_mean(&self) -> f64 {
        mean(&self.rescaled)
    }
}

struct Applied {
    fused: Vec<f64>,
    rescaled: Vec<f64>,
    amplification: f64,
}

fn apply(
    op: &GlOperator,
    poly: &Polynomial,
    influence: &[f64],
    ids: &[String],
    reference: f64,
) -> Result<Applied> {
    let mut fused = Vec::with_capacity(influence.len());
    for (&x, id) in influence.iter().zip(ids) {
        let value = match op.apply(poly, x) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(Error::NonFinite { .. }) => {
                return Err(Error::NonFiniteFused { sensor: id.clone() })
            }
            Err(e) => return Err(e),
        };
        fused.push(value);
    }
    let amplification = mean(&fused) / reference;
    if !(amplification.is_finite() && amplification > 0.0) {
        return Err(Error::Numerical(format!(
            "amplification ratio {amplification} is not positive"
        )));
    }
    let rescaled = fused.iter().map(|f| f / amplification).collect();
    Ok(Applied {
        fused,
        rescaled,
        amplification,
    })
}

/// Runs the fusion loop: fit, apply the G-L operator, rescale, and refit on
/// the rescaled values while their relative spread exceeds
/// `config.consistency_tol`.
///
/// The polynomial order is chosen per round as the one whose rescaled fused
/// values deviate least (total absolute deviation) from the values being fused.
pub fn fuse(summaries: &[SensorSummary], config: &FusionConfig) -> Result<FusionResult> {
    config.validate()?;
    if summaries.len() < 3 {
        return Err(invalid(format!(
            "fusion needs at least 3 sensors, got {}",
            summaries.len()
        )));
    }
    let ids: Vec<String> = summaries.iter().map(|s| s.sensor_id.clone()).collect();
    let influence: Vec<f64> = summaries.iter().map(|s| s.std).collect();
    let (lo, hi) = influence
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    if hi - lo <= 0.0 {
        return Err(invalid("influence factors have no spread"));
    }
    let reference = reference_true_value(summaries)?;
    if reference == 0.0 {
        return Err(Error::ZeroGrandMean);
    }
    let means: Vec<f64> = summaries.iter().map(|s| s.mean).collect();
    let pre_std = population_std(&means);

    let grid = GlGrid::new(lo, hi, config.h)?;
    let op = GlOperator::new(grid, config.nu);

    let mut values = means;
    let mut last = None;
    for round in 1..=config.max_rounds {
        let points: Vec<Point2> = influence
            .iter()
            .zip(&values)
            .map(|(&x, &y)| Point2 { x, y })
            .collect();
        let fit = select_order_by(&points, points.len() - 1, |c| {
            match apply(&op, c.poly, &influence, &ids, reference) {
                Ok(a) => a
                    .rescaled
                    .iter()
                    .zip(&values)
                    .map(|(r, v)| (r - v).abs())
                    .sum(),
                Err(_) => f64::INFINITY,
            }
        });
        // surface the operator failure rather than the generic selection error
        let fit = match fit {
            Ok(fit) => fit,
            Err(Error::InvalidArgument(_)) => {
                let poly = crate::lsqfit::fit_poly(&points, 1)?;
                apply(&op, &poly, &influence, &ids, reference)?;
                return Err(Error::Numerical(
                    "no fit order yields a usable fusion".into(),
                ));
            }
            Err(e) => return Err(e),
        };
        let applied = apply(&op, &fit.poly, &influence, &ids, reference)?;
        let spread = relative_spread(&applied.rescaled)?;
        let result = FusionResult {
            sensor_ids: ids.clone(),
            influence: influence.clone(),
            post_std: population_std(&applied.rescaled),
            fused: applied.fused,
            rescaled: applied.rescaled,
            amplification: applied.amplification,
            reference,
            pre_std,
            rounds: round,
            n_steps: grid.n_steps(),
            fit,
        };
        if spread <= config.consistency_tol {
            return Ok(result);
        }
        values = result.rescaled.clone();
        last = Some((spread, result));
    }
    let (spread, last) = last.expect("max_rounds >= 1");
    Err(Error::NotConverged {
        rounds: config.max_rounds,
        spread,
        last: Box::new(last),
    })
}

/// `pre_std / post_std`; infinite when the fused values have no spread.
pub fn improvement_ratio(result: &FusionResult) -> f64 {
    if result.post_std == 0.0 {
        f64::INFINITY
    } else {
        result.pre_std / result.post_std
    }
}
