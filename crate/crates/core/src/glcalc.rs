//! Grünwald–Letnikov fractional differences.
//!
//! The order-`ν` G-L differintegral on a uniform grid of step `h` is the
//! truncated sum
//!
//! ```text
//! D^ν f(x) ≈ h^(-ν) · Σ_{i=0}^{N} w_i · f(x - i·h),   w_i = (-1)^i · C(ν, i)
//! ```
//!
//! The weights follow the recurrence `w_0 = 1`, `w_i = w_{i-1} · (i - 1 - ν) / i`.
//! A frequently quoted variant, `w_i = w_{i-1} · (i - (ν - 1)) / i`, produces the
//! coefficients of order `ν - 2` instead (for `ν = 0.5` it gives `w_1 = 1.5`
//! where the binomial form gives `-0.5`) and is not used here.
//!
//! Unlike the classical definition, the number of terms `N` is fixed per grid
//! (`floor((b - a) / h)`) rather than per evaluation point, so every point of
//! a grid is processed with the same expansion. For points near `a` this
//! reaches below the lower terminal; that is allowed for analytic functions
//! such as [`Polynomial`](crate::lsqfit::Polynomial) and rejected for sampled data.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A fractional differentiation order `ν ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(invalid(format!(
                "fractional order must be finite, got {nu}"
            )));
        }
        if nu < 0.0 {
            return Err(invalid(format!("fractional order must be >= 0, got {nu}")));
        }
        Ok(FracOrder(nu))
    }

    /// Orders accepted by the fusion pipeline, `0 ≤ ν ≤ 1`.
    pub fn unit(nu: f64) -> Result<Self> {
        let order = Self::new(nu)?;
        if nu > 1.0 {
            return Err(invalid(format!(
                "fusion order must lie in [0, 1], got {nu}"
            )));
        }
        Ok(order)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        FracOrder::new(nu)
    }
}

impl From<FracOrder> for f64 {
    fn from(order: FracOrder) -> f64 {
        order.0
    }
}

/// Cached coefficients `w_0 … w_N` for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct GlWeights {
    order: FracOrder,
    weights: Vec<f64>,
}

impl GlWeights {
    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the last weight, `N`.
    pub fn last_index(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Weights `w_0 … w_count`.
pub fn gl_weights(nu: FracOrder, count: usize) -> GlWeights {
    let v = nu.value();
    let mut weights = Vec::with_capacity(count + 1);
    weights.push(1.0);
    for i in 1..=count {
        let prev = weights[i - 1];
        let i = i as f64;
        weights.push(prev * ((i - 1.0 - v) / i));
    }
    GlWeights { order: nu, weights }
}

/// Uniform grid `[a, b]` with step `h` and `floor((b - a) / h)` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlGrid {
    a: f64,
    b: f64,
    h: f64,
    n_steps: usize,
}

impl GlGrid {
    pub fn new(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && h.is_finite()) {
            return Err(invalid("grid bounds and step must be finite"));
        }
        if a >= b {
            return Err(invalid(format!("grid needs a < b, got a = {a}, b = {b}")));
        }
        if h <= 0.0 {
            return Err(invalid(format!("grid step must be positive, got {h}")));
        }
        let n_steps = step_count((b - a) / h);
        if n_steps < 1 {
            return Err(invalid(format!(
                "step {h} exceeds the grid width {}",
                b - a
            )));
        }
        Ok(GlGrid { a, b, h, n_steps })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

// (0.38 - 0.14) / 0.01 evaluates to 23.999999999999996; a ratio that is an
// integer up to rounding counts as that integer.
fn step_count(ratio: f64) -> usize {
    if !ratio.is_finite() || ratio < 0.0 {
        return 0;
    }
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.floor() as usize
    }
}

/// Something the G-L sum can evaluate at arbitrary abscissae.
pub trait Evaluable {
    fn eval_at(&self, x: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> f64> Evaluable for F {
    fn eval_at(&self, x: f64) -> Result<f64> {
        Ok(self(x))
    }
}

/// Values sampled at `start + k·step`. Evaluation is exact lookup; points off
/// the lattice or outside the sampled range are errors.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSamples {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl Evaluable for UniformSamples {
    fn eval_at(&self, x: f64) -> Result<f64> {
        let hi = self.start + self.step * self.values.len().saturating_sub(1) as f64;
        let pos = (x - self.start) / self.step;
        let k = pos.round();
        let on_lattice = (pos - k).abs() <= 1e-9 * k.abs().max(1.0);
        if !on_lattice || k < 0.0 || k as usize >= self.values.len() {
            return Err(Error::OutsideSamples {
                x,
                lo: self.start,
                hi,
            });
        }
        Ok(self.values[k as usize])
    }
}

/// A G-L operator bound to a grid and order; the weights are computed once.
#[derive(Debug, Clone)]
pub struct GlOperator {
    grid: GlGrid,
    weights: GlWeights,
    scale: f64,
}

impl GlOperator {
    pub fn new(grid: GlGrid, nu: FracOrder) -> Self {
        GlOperator {
            grid,
            weights: gl_weights(nu, grid.n_steps()),
            scale: grid.h().powf(-nu.value()),
        }
    }

    pub fn grid(&self) -> &GlGrid {
        &self.grid
    }

    pub fn weights(&self) -> &GlWeights {
        &self.weights
    }

    pub fn apply<E: Evaluable + ?Sized>(&self, f: &E, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::OutsideGrid {
                x,
                a: self.grid.a(),
                b: self.grid.b(),
            });
        }
        let h = self.grid.h();
        let mut acc = 0.0;
        for (i, &w) in self.weights.as_slice().iter().enumerate() {
            let at = x - i as f64 * h;
            let value = f.eval_at(at)?;
            if !value.is_finite() {
                return Err(Error::NonFinite { value, at });
            }
            acc += w * value;
        }
        Ok(self.scale * acc)
    }
}

/// `h^(-ν) · Σ_{i=0}^{N} w_i · f(x - i·h)` with `N = grid.n_steps()`.
pub fn gl_differintegral<E: Evaluable + ?Sized>(
    f: &E,
    x: f64,
    grid: &GlGrid,
    nu: FracOrder,
) -> Result<f64> {
    GlOperator::new(*grid, nu).apply(f, x)
}

/// Magnitude response `|ω|^ν` of the order-`ν` differential operator.
pub fn operator_gain(omega: f64, nu: FracOrder) -> Result<f64> {
    if !omega.is_finite() {
        return Err(invalid(format!("frequency must be finite, got {omega}")));
    }
    Ok(omega.abs().powf(nu.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub nu: f64,
    pub omega: f64,
    pub gain: f64,
}

/// Samples `operator_gain` on `samples` evenly spaced frequencies in
/// `[lo, hi]` for every order, sorted by `(nu, omega)`.
pub fn amplitude_curve(
    nu_list: &[FracOrder],
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<Vec<GainRow>> {
    if nu_list.is_empty() {
        return Err(invalid("amplitude curve needs at least one order"));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo >= hi {
        return Err(invalid(format!(
            "frequency range needs 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if samples < 2 {
        return Err(invalid("amplitude curve needs at least 2 samples"));
    }
    let mut orders = nu_list.to_vec();
    orders.sort_by(|a, b| a.value().total_cmp(&b.value()));

    let span = hi - lo;
    let last = (samples - 1) as f64;
    let mut rows = Vec::with_capacity(orders.len() * samples);
    for nu in orders {
        for k in 0..samples {
            let omega = if k + 1 == samples {
                hi
            } else {
                lo + span * k as f64 / last
            };
            rows.push(GainRow {
                nu: nu.value(),
                omega,
                gain: operator_gain(omega, nu)?,
            });
        }
    }
    Ok(rows)
}

/// Comma-delimited `nu,omega,gain` table with a header row.
pub fn write_gain_table<W: Write>(rows: &[GainRow], mut out: W) -> io::Result<()> {
    writeln!(out, "nu,omega,gain")?;
    for row in rows {
        writeln!(out, "{},{},{}", row.nu, row.omega, row.gain)?;
    }
    Ok(())
}
