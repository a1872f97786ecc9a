//! Printed reference values shipped with a dataset and the deviation ledger
//! that compares them with recomputed results.

use serde::{Deserialize, Serialize};

/// Quantities a published value can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "summary.mean")]
    SummaryMean,
    #[serde(rename = "summary.std")]
    SummaryStd,
    #[serde(rename = "reference")]
    Reference,
    #[serde(rename = "fusion.pre_std")]
    PreStd,
    #[serde(rename = "fit.coeffs")]
    FitCoeffs,
    #[serde(rename = "fit.sse")]
    FitSse,
    #[serde(rename = "fusion.fused")]
    Fused,
    #[serde(rename = "fusion.fused_mean")]
    FusedMean,
    #[serde(rename = "fusion.amplification")]
    Amplification,
    #[serde(rename = "fusion.rescaled")]
    Rescaled,
    #[serde(rename = "fusion.post_std")]
    PostStd,
    #[serde(rename = "trend.coeffs")]
    TrendCoeffs,
    #[serde(rename = "trend.warning_time")]
    WarningTime,
}

impl Quantity {
    pub fn key(self) -> &'static str {
        match self {
            Quantity::SummaryMean => "summary.mean",
            Quantity::SummaryStd => "summary.std",
            Quantity::Reference => "reference",
            Quantity::PreStd => "fusion.pre_std",
            Quantity::FitCoeffs => "fit.coeffs",
            Quantity::FitSse => "fit.sse",
            Quantity::Fused => "fusion.fused",
            Quantity::FusedMean => "fusion.fused_mean",
            Quantity::Amplification => "fusion.amplification",
            Quantity::Rescaled => "fusion.rescaled",
            Quantity::PostStd => "fusion.post_std",
            Quantity::TrendCoeffs => "trend.coeffs",
            Quantity::WarningTime => "trend.warning_time",
        }
    }

    /// Quantities produced by the trend fit rather than the fusion stage.
    pub fn is_trend(self) -> bool {
        matches!(self, Quantity::TrendCoeffs | Quantity::WarningTime)
    }

    /// Coefficient vectors are compared with missing entries read as zero.
    fn is_coefficients(self) -> bool {
        matches!(self, Quantity::FitCoeffs | Quantity::TrendCoeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Abs(f64),
    Band([f64; 2]),
}

impl Tolerance {
    fn admits(self, published: f64, computed: f64) -> bool {
        match self {
            Tolerance::Abs(tol) => (computed - published).abs() <= tol,
            Tolerance::Band([lo, hi]) => computed >= lo && computed <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedValue {
    pub quantity: Quantity,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
}

impl PublishedValue {
    pub fn tolerance(&self) -> Tolerance {
        match (self.band, self.tol) {
            (Some(band), _) => Tolerance::Band(band),
            (None, Some(tol)) => Tolerance::Abs(tol),
            (None, None) => Tolerance::Abs(0.0),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Published {
    #[serde(default)]
    pub value: Vec<PublishedValue>,
}

/// A printed cell known to be wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownTypo {
    pub source: String,
    pub quantity: Quantity,
    #[serde(default)]
    pub index: Option<usize>,
    pub printed: f64,
    pub corrected: f64,
    pub note: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TypoFile {
    #[serde(default)]
    pub typo: Vec<KnownTypo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationNote {
    pub component: String,
    pub quantity: Quantity,
    pub source: String,
    pub index: Option<usize>,
    pub published: f64,
    /// `None` when the pipeline produced no value (e.g. no crossing found).
    pub computed: Option<f64>,
    pub tolerance: Tolerance,
    pub known_typo: bool,
}

/// Recomputed values, indexed by [`Quantity`].
#[derive(Debug, Clone, Default)]
pub struct Computed {
    pub summary_mean: Vec<f64>,
    pub summary_std: Vec<f64>,
    pub reference: Option<f64>,
    pub pre_std: Option<f64>,
    pub fit_coeffs: Vec<f64>,
    pub fit_sse: Option<f64>,
    pub fused: Vec<f64>,
    pub fused_mean: Option<f64>,
    pub amplification: Option<f64>,
    pub rescaled: Vec<f64>,
    pub post_std: Option<f64>,
    pub trend_coeffs: Vec<f64>,
    pub warning_time: Option<f64>,
}

impl Computed {
    fn vector(&self, q: Quantity) -> Option<&[f64]> {
        match q {
            Quantity::SummaryMean => Some(&self.summary_mean),
            Quantity::SummaryStd => Some(&self.summary_std),
            Quantity::FitCoeffs => Some(&self.fit_coeffs),
            Quantity::Fused => Some(&self.fused),
            Quantity::Rescaled => Some(&self.rescaled),
            Quantity::TrendCoeffs => Some(&self.trend_coeffs),
            _ => None,
        }
    }

    fn scalar(&self, q: Quantity) -> Option<f64> {
        match q {
            Quantity::Reference => self.reference,
            Quantity::PreStd => self.pre_std,
            Quantity::FitSse => self.fit_sse,
            Quantity::FusedMean => self.fused_mean,
            Quantity::Amplification => self.amplification,
            Quantity::PostStd => self.post_std,
            Quantity::WarningTime => self.warning_time,
            _ => None,
        }
    }
}

/// Every published value that the computed results miss by more than its
/// tolerance.
pub fn compare(
    component: &str,
    published: &Published,
    typos: &[KnownTypo],
    computed: &Computed,
) -> Vec<DeviationNote> {
    let mut notes = Vec::new();
    for entry in &published.value {
        let tolerance = entry.tolerance();
        let mut check = |index: Option<usize>, printed: f64, got: Option<f64>| {
            let ok = got.is_some_and(|g| tolerance.admits(printed, g));
            if !ok {
                let known_typo = typos.iter().any(|t| {
                    t.quantity == entry.quantity && t.source == entry.source && t.index == index
                });
                notes.push(DeviationNote {
                    component: component.to_string(),
                    quantity: entry.quantity,
                    source: entry.source.clone(),
                    index,
                    published: printed,
                    computed: got,
                    tolerance,
                    known_typo,
                });
            }
        };
        if let Some(values) = &entry.values {
            let got = computed.vector(entry.quantity).unwrap_or(&[]);
            let n = if entry.quantity.is_coefficients() {
                values.len().max(got.len())
            } else {
                values.len()
            };
            for i in 0..n {
                let printed = values.get(i).copied().unwrap_or(0.0);
                let g = match got.get(i) {
                    Some(&g) => Some(g),
                    None if entry.quantity.is_coefficients() => Some(0.0),
                    None => None,
                };
                check(Some(i), printed, g);
            }
        }
        if let Some(value) = entry.value {
            check(None, value, computed.scalar(entry.quantity));
        }
    }
    notes
}
