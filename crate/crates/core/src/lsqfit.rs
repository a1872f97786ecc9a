//! Least-squares polynomial fitting with order selection.
//!
//! Fits are solved by Householder QR on a Vandermonde matrix built from the
//! abscissae mapped affinely onto `[-1, 1]`; the solution is expanded back to
//! ascending powers of the raw abscissa.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::glcalc::Evaluable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(invalid(format!("point ({x}, {y}) is not finite")));
        }
        Ok(Point2 { x, y })
    }
}

/// `a_0 + a_1 x + … + a_n x^n`, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("polynomial needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("polynomial coefficients must be finite"));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(0.0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| j as f64 * c)
            .collect();
        Polynomial { coeffs }
    }

    /// Order after dropping trailing zero coefficients.
    pub fn effective_order(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }
}

impl Evaluable for Polynomial {
    fn eval_at(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x))
    }
}

/// Residual totals of `poly` over `points`: `(Σ|r|, Σ r²)`.
pub fn residual_totals(poly: &Polynomial, points: &[Point2]) -> (f64, f64) {
    points.iter().fold((0.0, 0.0), |(abs, sq), p| {
        let r = poly.eval(p.x) - p.y;
        (abs + r.abs(), sq + r * r)
    })
}

fn distinct_abscissae(points: &[Point2]) -> usize {
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.len()
}

fn validate(points: &[Point2]) -> Result<()> {
    if points.is_empty() {
        return Err(invalid("cannot fit an empty point set"));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.x.is_finite() && p.y.is_finite()))
    {
        return Err(invalid(format!("point ({}, {}) is not finite", p.x, p.y)));
    }
    Ok(())
}

/// Least-squares polynomial of the given order.
pub fn fit_poly(points: &[Point2], order: usize) -> Result<Polynomial> {
    validate(points)?;
    if order >= points.len() {
        return Err(Error::OrderTooHigh {
            order,
            points: points.len(),
        });
    }
    let distinct = distinct_abscissae(points);
    if distinct <= order {
        return Err(Error::RankDeficient { order, distinct });
    }

    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.x), hi.max(p.x))
        });
    let center = 0.5 * (lo + hi);
    let half = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    let cols = order + 1;
    let mut a: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let z = (p.x - center) / half;
            let mut row = Vec::with_capacity(cols);
            let mut zp = 1.0;
            for _ in 0..cols {
                row.push(zp);
                zp *= z;
            }
            row
        })
        .collect();
    let mut rhs: Vec<f64> = points.iter().map(|p| p.y).collect();
    let scaled = householder_solve(&mut a, &mut rhs, cols)?;

    Polynomial::new(expand_shifted(&scaled, center, half))
}

// Solves min ||A b - y|| in place; `a` is m x n row-major with m >= n.
#[allow(clippy::needless_range_loop)]
fn householder_solve(a: &mut [Vec<f64>], y: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let m = a.len();
    for k in 0..n {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient {
                order: n - 1,
                distinct: k,
            });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in column k below the diagonal
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    a[i][j] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                y[i] -= f * v[i - k];
            }
        }
    }
    let mut b = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| a[k][j] * b[j]).sum();
        b[k] = (y[k] - s) / a[k][k];
    }
    Ok(b)
}

// Coefficients of Σ b_k ((x - c)/s)^k in powers of x.
fn expand_shifted(b: &[f64], center: f64, half: f64) -> Vec<f64> {
    let n = b.len();
    let mut out = vec![0.0; n];
    // binomial row for (x - c)^k, built incrementally
    let mut row = vec![1.0];
    let mut inv_scale = 1.0;
    for (k, &bk) in b.iter().enumerate() {
        if k > 0 {
            let mut next = vec![0.0; k + 1];
            for (j, &r) in row.iter().enumerate() {
                next[j + 1] += r;
                next[j] -= center * r;
            }
            row = next;
            inv_scale /= half;
        }
        for (j, &r) in row.iter().enumerate() {
            out[j] += bk * inv_scale * r;
        }
    }
    out
}

/// How candidate orders are ranked by [`select_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderCriterion {
    /// Σ|poly(x_i) - y_i|; favours interpolation on noisy data.
    TotalAbsError,
    /// Corrected Akaike information criterion on the residual sum of squares.
    Aicc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScore {
    pub order: usize,
    pub total_abs_error: f64,
    pub sse: f64,
    /// `None` when the criterion could not score this order.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub poly: Polynomial,
    pub total_abs_error: f64,
    pub sse: f64,
    pub order_scanned: RangeInclusive<usize>,
    pub scan: Vec<OrderScore>,
}

impl FitReport {
    pub fn order(&self) -> usize {
        self.poly.order()
    }
}

/// One fitted candidate passed to a custom scoring function.
#[derive(Debug, Clone)]
pub struct Candidate<'a> {
    pub poly: &'a Polynomial,
    pub points: &'a [Point2],
    pub total_abs_error: f64,
    pub sse: f64,
}

fn aicc(candidate: &Candidate<'_>) -> f64 {
    let n = candidate.points.len() as f64;
    let k = (candidate.poly.order() + 1) as f64;
    if n - k - 1.0 <= 0.0 {
        return f64::INFINITY;
    }
    let scale = candidate
        .points
        .iter()
        .fold(0.0f64, |m, p| m.max(p.y.abs()))
        .max(f64::MIN_POSITIVE);
    // exact fits all land on the same floor so the penalty decides
    let floor = n * (1e-12 * scale).powi(2);
    let sse = candidate.sse.max(floor);
    n * (sse / n).ln() + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0)
}

/// Fits orders `1..=max_order` and keeps the lowest score under `criterion`.
pub fn select_order(
    points: &[Point2],
    max_order: usize,
    criterion: OrderCriterion,
) -> Result<FitReport> {
    select_order_by(points, max_order, |c| match criterion {
        OrderCriterion::TotalAbsError => c.total_abs_error,
        OrderCriterion::Aicc => aicc(c),
    })
}

/// Like [`select_order`] with a caller-supplied score (lower is better;
/// non-finite scores never win). Scores within `1e-9` relative of the best
/// so far count as ties and keep the lower order. Scanning stops at the first
/// order the abscissae cannot support (too few distinct values).
pub fn select_order_by<F>(points: &[Point2], max_order: usize, mut score: F) -> Result<FitReport>
where
    F: FnMut(&Candidate<'_>) -> f64,
{
    validate(points)?;
    if points.len() < 2 {
        return Err(invalid("order selection needs at least 2 points"));
    }
    if max_order < 1 || max_order >= points.len() {
        return Err(invalid(format!(
            "max_order must lie in 1..={}, got {max_order}",
            points.len() - 1
        )));
    }
    let feasible = (distinct_abscissae(points) - 1).min(max_order);
    if feasible < 1 {
        return Err(Error::RankDeficient {
            order: 1,
            distinct: 1,
        });
    }

    let mut scan = Vec::with_capacity(feasible);
    let mut best: Option<(f64, Polynomial, f64, f64)> = None;
    for order in 1..=feasible {
        let poly = fit_poly(points, order)?;
        let (total_abs_error, sse) = residual_totals(&poly, points);
        let s = score(&Candidate {
            poly: &poly,
            points,
            total_abs_error,
            sse,
        });
        scan.push(OrderScore {
            order,
            total_abs_error,
            sse,
            score: s.is_finite().then_some(s),
        });
        let better = match &best {
            _ if !s.is_finite() => false,
            None => true,
            Some((b, ..)) => s < *b - 1e-9 * b.abs().max(1.0),
        };
        if better {
            best = Some((s, poly, total_abs_error, sse));
        }
    }

    let (_, poly, total_abs_error, sse) = best.ok_or_else(|| {
        invalid(format!(
            "no order in 1..={feasible} produced a finite selection score"
        ))
    })?;
    Ok(FitReport {
        poly,
        total_abs_error,
        sse,
        order_scanned: 1..=feasible,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xy: &[(f64, f64)]) -> Vec<Point2> {
        xy.iter().map(|&(x, y)| Point2 { x, y }).collect()
    }

    // engine sensor summaries: (S_i, F_i)
    pub(crate) const ENGINE_S: [f64; 9] = [0.38, 0.14, 0.22, 0.28, 0.34, 0.24, 0.32, 0.29, 0.38];
    pub(crate) const ENGINE_F: [f64; 9] = [
        70.83, 71.30, 70.88, 71.04, 71.08, 71.08, 71.13, 71.14, 70.88,
    ];

    fn engine() -> Vec<Point2> {
        ENGINE_S
            .iter()
            .zip(ENGINE_F)
            .map(|(&x, y)| Point2 { x, y })
            .collect()
    }

    #[test]
    fn exact_line() {
        let p = fit_poly(&pts(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]), 1).unwrap();
        assert_eq!(p.order(), 1);
        assert!((p.coeffs()[0] - 1.0).abs() < 1e-12);
        assert!((p.coeffs()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_exact_cubic() {
        let truth = [2.0, -1.5, 0.25, 0.75];
        let p = Polynomial::new(truth.to_vec()).unwrap();
        let points: Vec<_> = (0..12)
            .map(|i| {
                let x = -3.0 + 0.5 * i as f64;
                Point2 { x, y: p.eval(x) }
            })
            .collect();
        let fit = fit_poly(&points, 3).unwrap();
        for (a, b) in fit.coeffs().iter().zip(truth) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn engine_quadratic() {
        let p = fit_poly(&engine(), 2).unwrap();
        let c = p.coeffs();
        assert!((c[2] + 0.4923).abs() < 0.05, "{c:?}");
        assert!((c[1] + 0.9140).abs() < 0.05, "{c:?}");
        assert!((c[0] - 71.37).abs() < 0.05, "{c:?}");
    }

    #[test]
    fn body_trend_line() {
        let t: Vec<f64> = (0..6).map(|i| 0.5 * i as f64).collect();
        let c = [1.358, 1.362, 1.376, 1.383, 1.395, 1.412];
        let points: Vec<_> = t.iter().zip(c).map(|(&x, y)| Point2 { x, y }).collect();
        let p = fit_poly(&points, 1).unwrap();
        assert!((p.coeffs()[0] - 1.3541).abs() < 5e-4);
        assert!((p.coeffs()[1] - 0.0215).abs() < 5e-4);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_poly(&[], 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            fit_poly(&pts(&[(0.0, 1.0), (1.0, 2.0)]), 2),
            Err(Error::OrderTooHigh { .. })
        ));
        assert!(matches!(
            fit_poly(&pts(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]), 1),
            Err(Error::RankDeficient { .. })
        ));
        // order 0 on identical abscissae is fine: the mean
        let p = fit_poly(&pts(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]), 0).unwrap();
        assert!((p.coeffs()[0] - 2.0).abs() < 1e-12);
        // duplicated x with full column rank is accepted
        assert!(fit_poly(&pts(&[(0.0, 1.0), (0.0, 1.2), (1.0, 2.0)]), 1).is_ok());
        assert!(fit_poly(&pts(&[(0.0, f64::NAN), (1.0, 2.0)]), 1).is_err());
    }

    #[test]
    fn exact_line_selects_order_one() {
        let points = pts(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]);
        for crit in [OrderCriterion::TotalAbsError, OrderCriterion::Aicc] {
            let r = select_order(&points, 3, crit).unwrap();
            assert_eq!(r.order(), 1, "{crit:?}");
        }
    }

    #[test]
    fn total_abs_error_interpolates_noisy_data() {
        // the engine summaries have 8 distinct abscissae, so order 7 interpolates the
        // duplicated point pair's mean; the raw metric always goes there.
        let r = select_order(&engine(), 8, OrderCriterion::TotalAbsError).unwrap();
        assert_eq!(r.order_scanned, 1..=7);
        assert_eq!(r.order(), 7);
        assert!((r.total_abs_error - 0.05).abs() < 1e-6);
    }

    #[test]
    fn report_totals_are_consistent() {
        let r = select_order(&engine(), 4, OrderCriterion::Aicc).unwrap();
        let (abs, sse) = residual_totals(&r.poly, &engine());
        assert_eq!(abs, r.total_abs_error);
        assert_eq!(sse, r.sse);
        assert_eq!(r.scan.len(), 4);
    }

    #[test]
    fn select_order_argument_errors() {
        let points = pts(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]);
        assert!(select_order(&points, 0, OrderCriterion::Aicc).is_err());
        assert!(select_order(&points, 3, OrderCriterion::Aicc).is_err());
        assert!(select_order(&points[..1], 1, OrderCriterion::Aicc).is_err());
        let flat = pts(&[(1.0, 1.0), (1.0, 3.0), (1.0, 5.0)]);
        assert!(matches!(
            select_order(&flat, 2, OrderCriterion::Aicc),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn custom_score_ties_prefer_lower_order() {
        let points = pts(&[(0.0, 1.0), (1.0, 2.5), (2.0, 5.0), (3.0, 7.5), (4.0, 8.0)]);
        let r = select_order_by(&points, 4, |_| 1.0).unwrap();
        assert_eq!(r.order(), 1);
        let r =
            select_order_by(&points, 4, |c| if c.poly.order() == 3 { 0.0 } else { 1.0 }).unwrap();
        assert_eq!(r.order(), 3);
        let r = select_order_by(&points, 4, |_| f64::NAN);
        assert!(r.is_err());
    }

    #[test]
    fn polynomial_helpers() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(p.eval(2.0), 9.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        assert_eq!(Polynomial::constant(4.0).derivative().coeffs(), &[0.0]);
        assert_eq!(
            Polynomial::new(vec![1.0, 2.0, 0.0])
                .unwrap()
                .effective_order(),
            1
        );
        assert!(Polynomial::new(vec![]).is_err());
        assert!(Polynomial::new(vec![f64::INFINITY]).is_err());
    }
}
