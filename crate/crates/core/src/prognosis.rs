//! Threshold diagnosis, trend fitting, time-to-threshold prediction and the
//! vehicle-level min-rule.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lsqfit::{fit_poly, residual_totals, select_order, OrderCriterion, Point2, Polynomial};

/// Default search window for warning times, in months past the last sample.
pub const DEFAULT_HORIZON_MONTHS: f64 = 240.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarningPolicy {
    pub rated_limit: f64,
    /// Safety coefficient, strictly inside `(0, 1)`.
    pub k: f64,
}

impl WarningPolicy {
    pub fn new(rated_limit: f64, k: f64) -> Result<Self> {
        let policy = WarningPolicy { rated_limit, k };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rated_limit.is_finite() && self.rated_limit > 0.0) {
            return Err(invalid(format!(
                "rated limit must be positive, got {}",
                self.rated_limit
            )));
        }
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(invalid(format!(
                "safety coefficient must lie in (0, 1), got {}",
                self.k
            )));
        }
        Ok(())
    }
}

/// Warning threshold `k · rated_limit`.
pub fn threshold(policy: &WarningPolicy) -> Result<f64> {
    policy.validate()?;
    Ok(policy.k * policy.rated_limit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Normal,
    Warning,
}

/// Reaching the threshold already counts as a warning.
pub fn diagnose(current: f64, threshold: f64) -> Status {
    if current >= threshold {
        Status::Warning
    } else {
        Status::Normal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub poly: Polynomial,
    pub t_last: f64,
    pub total_abs_error: f64,
    pub sse: f64,
}

/// Fits value-over-time samples, choosing the order by AICc over
/// `1..=samples.len() - 1`. With fewer than 4 samples AICc is undefined for
/// every order and the fit is a straight line.
pub fn fit_trend(samples: &[(f64, f64)]) -> Result<TrendModel> {
    if samples.len() < 2 {
        return Err(invalid("trend fitting needs at least 2 samples"));
    }
    if samples
        .windows(2)
        .any(|w| w[1].0.is_nan() || w[0].0.is_nan() || w[1].0 <= w[0].0)
    {
        return Err(invalid("trend sample times must be strictly increasing"));
    }
    let points = samples
        .iter()
        .map(|&(t, v)| Point2::new(t, v))
        .collect::<Result<Vec<_>>>()?;
    let poly = if points.len() < 4 {
        fit_poly(&points, 1)?
    } else {
        select_order(&points, points.len() - 1, OrderCriterion::Aicc)?.poly
    };
    let (total_abs_error, sse) = residual_totals(&poly, &points);
    Ok(TrendModel {
        poly,
        t_last: samples[samples.len() - 1].0,
        total_abs_error,
        sse,
    })
}

/// Earliest `t` in `[t_last, t_last + horizon]` with `poly(t) = threshold`.
pub fn warning_time(trend: &TrendModel, threshold: f64, horizon: f64) -> Option<f64> {
    if !threshold.is_finite() || horizon.is_nan() || horizon < 0.0 {
        return None;
    }
    let mut shifted = trend.poly.coeffs().to_vec();
    shifted[0] -= threshold;
    let q = Polynomial::new(shifted).ok()?;
    let lo = trend.t_last;
    let hi = trend.t_last + horizon;
    real_roots_in(&q, lo, hi).into_iter().next()
}

/// Real roots of `p` in `[lo, hi]`, ascending.
pub fn real_roots_in(p: &Polynomial, lo: f64, hi: f64) -> Vec<f64> {
    let c = p.coeffs();
    let inside = |t: &f64| *t >= lo && *t <= hi;
    match p.effective_order() {
        0 => {
            if c[0] == 0.0 {
                vec![lo]
            } else {
                vec![]
            }
        }
        1 => [-c[0] / c[1]].into_iter().filter(inside).collect(),
        2 => {
            let mut roots = quadratic_roots(c[2], c[1], c[0]);
            roots.retain(inside);
            roots
        }
        _ => monotone_piece_roots(p, lo, hi),
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    // avoids cancellation between -b and the root
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / a, c / q]
    };
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

// Splits [lo, hi] at the critical points so that p is monotone on every
// piece, then bisects each piece that brackets a sign change.
fn monotone_piece_roots(p: &Polynomial, lo: f64, hi: f64) -> Vec<f64> {
    let mut knots = vec![lo];
    knots.extend(real_roots_in(&p.derivative(), lo, hi));
    knots.push(hi);
    knots.dedup();

    let scale = p.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tiny = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut roots: Vec<f64> = Vec::new();
    let push = |t: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&r| (t - r).abs() > 1e-9) {
            roots.push(t);
        }
    };
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (p.eval(a), p.eval(b));
        if fa.abs() <= tiny {
            push(a, &mut roots);
            continue;
        }
        if fa.signum() != fb.signum() && fb.abs() > tiny {
            push(bisect(p, a, b, fa), &mut roots);
        }
    }
    let end = *knots.last().expect("knots hold lo and hi");
    if p.eval(end).abs() <= tiny {
        push(end, &mut roots);
    }
    roots
}

fn bisect(p: &Polynomial, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-9 {
        let m = 0.5 * (a + b);
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPrognosis {
    pub component: String,
    pub status: Status,
    pub current_value: f64,
    pub threshold: f64,
    /// Predicted months until the threshold is crossed, when still normal.
    pub t_y: Option<f64>,
}

/// Diagnoses the current value and, while normal, predicts the crossing time.
pub fn assess(
    component: &str,
    current_value: f64,
    threshold: f64,
    trend: Option<&TrendModel>,
    horizon: f64,
) -> ComponentPrognosis {
    let status = diagnose(current_value, threshold);
    let t_y = match status {
        Status::Normal => trend.and_then(|t| warning_time(t, threshold, horizon)),
        Status::Warning => None,
    };
    ComponentPrognosis {
        component: component.to_string(),
        status,
        current_value,
        threshold,
        t_y,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehiclePrognosis {
    pub components: Vec<ComponentPrognosis>,
    pub t_min: f64,
    pub source: String,
}

/// Earliest warning across components; a component already in warning wins
/// with `t_min = 0`. Ties keep the first component.
pub fn aggregate(components: Vec<ComponentPrognosis>) -> Result<VehiclePrognosis> {
    if components.is_empty() {
        return Err(Error::NoPrognosis("no components to aggregate".into()));
    }
    let pick = components
        .iter()
        .find(|c| c.status == Status::Warning)
        .map(|c| (0.0, c.component.clone()))
        .or_else(|| {
            components
                .iter()
                .filter_map(|c| c.t_y.map(|t| (t, &c.component)))
                .fold(None, |best: Option<(f64, &String)>, (t, name)| match best {
                    Some((bt, _)) if bt <= t => best,
                    _ => Some((t, name)),
                })
                .map(|(t, name)| (t, name.clone()))
        });
    let (t_min, source) = pick.ok_or_else(|| {
        Error::NoPrognosis("no component is in warning or predicts a crossing".into())
    })?;
    Ok(VehiclePrognosis {
        components,
        t_min,
        source,
    })
}
