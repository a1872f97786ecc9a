use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fusion::{Consistency, FusionResult, QualityGate, SensorSummary};
use crate::io::published::{DeviationNote, KnownTypo, Tolerance};
use crate::lsqfit::Polynomial;
use crate::prognosis::{ComponentPrognosis, Status, TrendModel, VehiclePrognosis, WarningPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub name: String,
    pub unit: String,
    pub gate: QualityGate,
    pub summaries: Vec<SensorSummary>,
    pub consistency: Consistency,
    pub fusion: FusionResult,
    /// `pre_std / post_std`; `None` when the fused spread is zero.
    pub improvement_ratio: Option<f64>,
    /// Absent for fusion-only runs.
    pub policy: Option<WarningPolicy>,
    pub trend: Option<TrendModel>,
    pub prognosis: Option<ComponentPrognosis>,
    pub known_typos: Vec<KnownTypo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub components: Vec<ComponentReport>,
    pub vehicle: Option<VehiclePrognosis>,
    /// Published values the recomputed results disagree with.
    pub deviations: Vec<DeviationNote>,
}

/// Output of a trend-only prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub component: String,
    pub policy: WarningPolicy,
    pub threshold: f64,
    pub horizon_months: f64,
    pub trend: TrendModel,
    /// Months from the first sample; `None` when no crossing lies in the horizon.
    pub t_y: Option<f64>,
    pub deviations: Vec<DeviationNote>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(invalid(format!("unknown format '{other}' (json or text)"))),
        }
    }
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => Ok(render_text(report)),
    }
}

pub fn render_prediction(p: &Prediction, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(p)?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "component {}", p.component);
            let _ = writeln!(
                s,
                "  threshold {} (k={} of {})",
                format_sig(p.threshold, 6),
                p.policy.k,
                p.policy.rated_limit
            );
            write_trend(&mut s, &p.trend, p.t_y);
            write_deviations(&mut s, &p.deviations);
            Ok(s)
        }
    }
}

pub fn emit(report: &Report, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render(report, format)?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// `x` rounded to `digits` significant digits, without exponent notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.9996 -> 10.000)
    let rounded: f64 = s.parse().unwrap_or(x);
    let new_mag = rounded.abs().log10().floor() as i32;
    if new_mag > magnitude && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

fn compact(x: f64) -> String {
    let s = format_sig(x, 6);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn format_poly(poly: &Polynomial, var: &str) -> String {
    let mut out = String::new();
    for (j, &c) in poly.coeffs().iter().enumerate().rev() {
        let term = match j {
            0 => compact(c.abs()),
            1 => format!("{}·{var}", compact(c.abs())),
            _ => format!("{}·{var}^{j}", compact(c.abs())),
        };
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        out.push_str(&term);
    }
    out
}

fn render_text(report: &Report) -> String {
    let mut s = String::new();
    for c in &report.components {
        let f = &c.fusion;
        let _ = writeln!(s, "component {} [{}]", c.name, c.unit);
        let rejected: usize = c.summaries.iter().map(|x| x.rejected.len()).sum();
        let _ = writeln!(
            s,
            "  gate ({}, {}): {} readings rejected",
            c.gate.lo, c.gate.hi, rejected
        );
        let _ = writeln!(
            s,
            "  {:<10} {:>8} {:>12} {:>10} {:>12} {:>12}",
            "sensor", "retained", "mean", "std", "fused", "rescaled"
        );
        for (i, m) in c.summaries.iter().enumerate() {
            let _ = writeln!(
                s,
                "  {:<10} {:>8} {:>12.4} {:>10.4} {:>12.4} {:>12.4}",
                m.sensor_id, m.retained, m.mean, m.std, f.fused[i], f.rescaled[i]
            );
        }
        let _ = writeln!(
            s,
            "  consistency: max relative deviation {:.3e} ({})",
            c.consistency.max_deviation,
            if c.consistency.passed { "pass" } else { "fail" }
        );
        let _ = writeln!(s, "  reference value: {}", format_sig(f.reference, 6));
        let _ = writeln!(
            s,
            "  influence fit (order {}): F(x) = {}",
            f.fit.order(),
            format_poly(&f.fit.poly, "x")
        );
        let _ = writeln!(
            s,
            "  fit residuals: total |r| = {}, SSE = {}",
            format_sig(f.fit.total_abs_error, 4),
            format_sig(f.fit.sse, 4)
        );
        let _ = writeln!(s, "  steps: {}, rounds: {}", f.n_steps, f.rounds);
        let _ = writeln!(s, "  fused mean: {}", format_sig(f.fused_mean(), 6));
        let _ = writeln!(s, "  K={}", format_sig(f.amplification, 4));
        let _ = writeln!(
            s,
            "  std before/after: {} / {}",
            format_sig(f.pre_std, 4),
            format_sig(f.post_std, 4)
        );
        match c.improvement_ratio {
            Some(r) => {
                let _ = writeln!(s, "  improvement ratio: {}", format_sig(r, 4));
            }
            None => {
                let _ = writeln!(s, "  improvement ratio: unbounded");
            }
        }
        if let (Some(p), Some(policy)) = (&c.prognosis, &c.policy) {
            let status = match p.status {
                Status::Normal => "normal",
                Status::Warning => "warning",
            };
            let _ = writeln!(
                s,
                "  threshold {} (k={} of {}), current {}: {}",
                format_sig(p.threshold, 6),
                policy.k,
                policy.rated_limit,
                format_sig(p.current_value, 6),
                status
            );
            match &c.trend {
                Some(t) => write_trend(&mut s, t, p.t_y),
                None => {
                    let _ = writeln!(s, "  warning time: no trend samples");
                }
            }
        }
    }
    if let Some(v) = &report.vehicle {
        let _ = writeln!(
            s,
            "vehicle: earliest warning {} months, source {}",
            format_sig(v.t_min, 4),
            v.source
        );
    }
    write_deviations(&mut s, &report.deviations);
    s
}

fn write_trend(s: &mut String, t: &TrendModel, t_y: Option<f64>) {
    let _ = writeln!(
        s,
        "  trend (order {}): F(t) = {}",
        t.poly.order(),
        format_poly(&t.poly, "t")
    );
    match t_y {
        Some(t) => {
            let _ = writeln!(s, "  warning time: {} months", format_sig(t, 4));
        }
        None => {
            let _ = writeln!(s, "  warning time: none within horizon");
        }
    }
}

fn write_deviations(s: &mut String, deviations: &[DeviationNote]) {
    if deviations.is_empty() {
        return;
    }
    let _ = writeln!(s, "deviations from published values:");
    for d in deviations {
        let index = d.index.map(|i| format!("[{i}]")).unwrap_or_default();
        let computed = d
            .computed
            .map(|x| format_sig(x, 6))
            .unwrap_or_else(|| "none".into());
        let tol = match d.tolerance {
            Tolerance::Abs(t) => format!("±{t}"),
            Tolerance::Band([lo, hi]) => format!("in [{lo}, {hi}]"),
        };
        let _ = writeln!(
            s,
            "  {} {}{} ({}): published {}, computed {} (tolerance {}){}",
            d.component,
            d.quantity.key(),
            index,
            d.source,
            d.published,
            computed,
            tol,
            if d.known_typo {
                " [known misprint]"
            } else {
                ""
            }
        );
    }
}
