//! End-to-end run: summarize, check consistency, fuse, diagnose, fit the
//! trend, predict and aggregate.

use std::thread;

use crate::error::{invalid, Error, Result};
use crate::fusion::{check_consistency, fuse, improvement_ratio, summarize, SensorSummary};
use crate::io::published::{compare, Computed, DeviationNote, Published};
use crate::io::report::{ComponentReport, Prediction, Report};
use crate::io::{Dataset, RunConfig};
use crate::prognosis::{aggregate, assess, fit_trend, threshold, warning_time, WarningPolicy};

/// How far [`run_component`] goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Summaries and fusion only; no policy is needed.
    Fusion,
    /// Fusion, diagnosis and, with trend samples, the warning time.
    Prognosis,
}

/// Runs one dataset and returns its report section plus the deviations of
/// its published values.
pub fn run_component(
    dataset: &Dataset,
    config: &RunConfig,
    stage: Stage,
) -> Result<(ComponentReport, Vec<DeviationNote>)> {
    run_inner(dataset, config, stage).map_err(|e| e.in_component(&dataset.name))
}

fn run_inner(
    dataset: &Dataset,
    config: &RunConfig,
    stage: Stage,
) -> Result<(ComponentReport, Vec<DeviationNote>)> {
    let name = dataset.name.as_str();
    let summaries = dataset
        .sensors
        .iter()
        .map(|s| summarize(s, &dataset.gate))
        .collect::<Result<Vec<SensorSummary>>>()?;
    let fusion_config = config.fusion_config(name)?;
    let consistency = check_consistency(&summaries, fusion_config.consistency_tol)?;
    let fusion = fuse(&summaries, &fusion_config)?;

    let (policy, trend, prognosis) = match stage {
        Stage::Fusion => (None, None, None),
        Stage::Prognosis => {
            let policy = config.policy(name)?;
            let limit = threshold(&policy)?;
            let trend = dataset
                .trend_samples
                .as_deref()
                .map(fit_trend)
                .transpose()?;
            // the measured true value is the component's current reading
            let prognosis = assess(
                name,
                fusion.reference,
                limit,
                trend.as_ref(),
                config.horizon_months,
            );
            (Some(policy), trend, Some(prognosis))
        }
    };

    let computed = Computed {
        summary_mean: summaries.iter().map(|s| s.mean).collect(),
        summary_std: summaries.iter().map(|s| s.std).collect(),
        reference: Some(fusion.reference),
        pre_std: Some(fusion.pre_std),
        fit_coeffs: fusion.fit.poly.coeffs().to_vec(),
        fit_sse: Some(fusion.fit.sse),
        fused: fusion.fused.clone(),
        fused_mean: Some(fusion.fused_mean()),
        amplification: Some(fusion.amplification),
        rescaled: fusion.rescaled.clone(),
        post_std: Some(fusion.post_std),
        trend_coeffs: trend
            .as_ref()
            .map(|t| t.poly.coeffs().to_vec())
            .unwrap_or_default(),
        warning_time: prognosis.as_ref().and_then(|p| p.t_y),
    };
    let published = match stage {
        Stage::Fusion => only(&dataset.published, |q| !q.is_trend()),
        Stage::Prognosis => dataset.published.clone(),
    };
    let deviations = compare(name, &published, &dataset.typos, &computed);
    let ratio = improvement_ratio(&fusion);
    let report = ComponentReport {
        name: name.to_string(),
        unit: dataset.unit.clone(),
        gate: dataset.gate,
        summaries,
        consistency,
        fusion,
        improvement_ratio: ratio.is_finite().then_some(ratio),
        policy,
        trend,
        prognosis,
        known_typos: dataset.typos.clone(),
    };
    Ok((report, deviations))
}

fn only(published: &Published, keep: impl Fn(crate::io::Quantity) -> bool) -> Published {
    Published {
        value: published
            .value
            .iter()
            .filter(|v| keep(v.quantity))
            .cloned()
            .collect(),
    }
}

/// Single-dataset report. At [`Stage::Prognosis`] the vehicle verdict is
/// filled in when the component yields one.
pub fn run_pipeline(dataset: &Dataset, config: &RunConfig, stage: Stage) -> Result<Report> {
    let (component, deviations) = run_component(dataset, config, stage)?;
    let vehicle = component
        .prognosis
        .clone()
        .and_then(|p| aggregate(vec![p]).ok());
    Ok(Report {
        components: vec![component],
        vehicle,
        deviations,
    })
}

/// Multi-component report; datasets run concurrently. Fails with
/// [`Error::NoPrognosis`] when no component gives a verdict.
pub fn run_vehicle(datasets: &[Dataset], config: &RunConfig) -> Result<Report> {
    if datasets.is_empty() {
        return Err(invalid("no datasets given"));
    }
    let results: Vec<Result<(ComponentReport, Vec<DeviationNote>)>> = thread::scope(|scope| {
        let handles: Vec<_> = datasets
            .iter()
            .map(|d| scope.spawn(move || run_component(d, config, Stage::Prognosis)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("pipeline thread panicked"))
            .collect()
    });
    let mut components = Vec::with_capacity(results.len());
    let mut deviations = Vec::new();
    for r in results {
        let (c, d) = r?;
        components.push(c);
        deviations.extend(d);
    }
    let verdicts = components
        .iter()
        .filter_map(|c| c.prognosis.clone())
        .collect();
    let vehicle = aggregate(verdicts)?;
    Ok(Report {
        components,
        vehicle: Some(vehicle),
        deviations,
    })
}

/// Fits a trend and predicts when it reaches the policy threshold. Only the
/// trend entries of `published` are compared.
pub fn predict(
    component: &str,
    samples: &[(f64, f64)],
    policy: WarningPolicy,
    horizon_months: f64,
    published: &Published,
    typos: &[crate::io::KnownTypo],
) -> Result<Prediction> {
    let inner = || -> Result<Prediction> {
        let limit = threshold(&policy)?;
        if !(horizon_months.is_finite() && horizon_months >= 0.0) {
            return Err(invalid(format!("invalid horizon {horizon_months}")));
        }
        let trend = fit_trend(samples)?;
        let t_y = warning_time(&trend, limit, horizon_months);
        let computed = Computed {
            trend_coeffs: trend.poly.coeffs().to_vec(),
            warning_time: t_y,
            ..Default::default()
        };
        let deviations = compare(
            component,
            &only(published, |q| q.is_trend()),
            typos,
            &computed,
        );
        Ok(Prediction {
            component: component.to_string(),
            policy,
            threshold: limit,
            horizon_months,
            trend,
            t_y,
            deviations,
        })
    };
    inner().map_err(|e: Error| e.in_component(component))
}
