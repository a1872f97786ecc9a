//! Acceptance criteria 1 to 9. Each criterion prints one PASS/FAIL line;
//! printed values that the recomputation contradicts are listed as BREACH
//! lines and must appear in the report's deviation ledger.

mod common;

use std::time::{Duration, Instant};

use common::*;
use fracfuse::fixtures;
use fracfuse::fusion::{fuse, reference_true_value, summarize, FusionConfig, FusionResult};
use fracfuse::glcalc::{gl_differintegral, gl_weights, FracOrder, GlGrid};
use fracfuse::io::published::{compare, Computed, DeviationNote, Quantity};
use fracfuse::io::report::{render, Format, Report};
use fracfuse::io::{Dataset, RunConfig};
use fracfuse::lsqfit::Polynomial;
use fracfuse::pipeline::{run_pipeline, run_vehicle, Stage};
use fracfuse::prognosis::{
    aggregate, diagnose, fit_trend, threshold, warning_time, ComponentPrognosis, Status,
    WarningPolicy,
};
use fracfuse::synth::{generate, SynthSpec};
use fracfuse::Error;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn builtin(name: &str) -> Dataset {
    fixtures::load(name).expect("bundled").expect("parses")
}

fn c1_weights() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for nu in [0.25, 0.5, 0.75, 1.0] {
        let w = gl_weights(FracOrder::new(nu).unwrap(), 200);
        for i in 0..=200 {
            let direct = binomial_weight(nu, i);
            let got = w.as_slice()[i];
            let err = if direct == 0.0 {
                got.abs()
            } else {
                ((got - direct) / direct).abs()
            };
            worst = worst.max(err);
        }
    }
    check(worst <= 1e-12, format!("worst relative error {worst:e}"))?;
    let half = gl_weights(FracOrder::new(0.5).unwrap(), 3);
    check(
        half.as_slice() == [1.0, -0.5, -0.125, -0.0625],
        format!("nu=0.5 prefix {:?}", half.as_slice()),
    )?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "worst relative error {worst:.1e}, prefix [1, -0.5, -0.125, -0.0625]"
    ))
}

fn c2_half_derivative() -> Outcome {
    let start = Instant::now();
    let grid = GlGrid::new(0.0, 1.0, 1e-4).unwrap();
    let got = gl_differintegral(&|t: f64| t, 1.0, &grid, FracOrder::new(0.5).unwrap())
        .map_err(|e| e.to_string())?;
    let exact = 2.0 / std::f64::consts::PI.sqrt();
    check((got - exact).abs() <= 5e-3, format!("{got} vs {exact}"))?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("{got:.6} vs 2/sqrt(pi) = {exact:.6}"))
}

fn c3_summaries() -> Outcome {
    let start = Instant::now();
    let d = builtin("engine_noise");
    let summaries: Vec<_> = d
        .sensors
        .iter()
        .map(|s| summarize(s, &d.gate))
        .collect::<Result<_, _>>()
        .map_err(|e: Error| e.to_string())?;
    let mut removed: Vec<f64> = summaries.iter().flat_map(|s| s.rejected.clone()).collect();
    removed.sort_by(f64::total_cmp);
    check(
        removed == [62.1, 78.8, 79.28],
        format!("removed {removed:?}"),
    )?;

    let printed_summary = ENGINE_F;
    for (i, s) in summaries.iter().enumerate() {
        check(
            close(s.mean, printed_summary[i], 0.01),
            format!(
                "sensor {} mean {} vs {}",
                s.sensor_id, s.mean, printed_summary[i]
            ),
        )?;
    }
    // the raw-readings table prints 71.29 for F5#; the sidecar lists it
    let typo = d
        .typos
        .iter()
        .find(|t| t.quantity == Quantity::SummaryMean && t.index == Some(4))
        .ok_or("F5# misprint not listed")?;
    check(
        !close(summaries[4].mean, typo.printed, 0.01)
            && close(summaries[4].mean, typo.corrected, 1e-9),
        "F5# misprint not confirmed",
    )?;

    let grand = reference_true_value(&summaries).map_err(|e| e.to_string())?;
    let oracle = mean(&summaries.iter().map(|s| s.mean).collect::<Vec<_>>());
    check(
        close(grand, oracle, 1e-12),
        "grand mean differs from mean of means",
    )?;
    check(close(grand, 71.038, 0.005), format!("grand mean {grand}"))?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "removed {{78.8, 79.28, 62.1}}, means within 0.01, F5# printed {} corrected {}, grand mean {grand:.4}",
        typo.printed, typo.corrected
    ))
}

fn engine_fusion() -> FusionResult {
    fuse(
        &engine_summaries(),
        &FusionConfig::new(0.5, 0.01, 0.01, 3).unwrap(),
    )
    .unwrap()
}

fn c4_fit() -> Outcome {
    let r = engine_fusion();
    let fit = &r.fit;
    check(fit.order() == 2, format!("selected order {}", fit.order()))?;
    let oracle = normal_equations(&ENGINE_S, &ENGINE_F, 2);
    for (c, o) in fit.poly.coeffs().iter().zip(&oracle) {
        check(
            (c - o).abs() <= 1e-9 * o.abs().max(1.0),
            format!("coefficient {c} vs oracle {o}"),
        )?;
    }
    let printed = [71.347, -0.9140, -0.4923];
    for (c, p) in fit.poly.coeffs().iter().zip(printed) {
        check(
            close(*c, p, 0.05),
            format!("coefficient {c} vs printed {p}"),
        )?;
    }
    let a0 = fit.poly.coeffs()[0];
    let matches = if (a0 - 71.347).abs() < (a0 - 71.37465).abs() {
        "71.347 (equation)"
    } else {
        "71.37465 (prose)"
    };
    Ok(format!(
        "order 2 by fusion-level score; a0 = {a0:.4} matches {matches}; total |r| = {:.4}, SSE = {:.4} vs printed 0.1153",
        fit.total_abs_error, fit.sse
    ))
}

fn engine_computed(r: &FusionResult) -> Computed {
    Computed {
        fit_coeffs: r.fit.poly.coeffs().to_vec(),
        fused: r.fused.clone(),
        fused_mean: Some(r.fused_mean()),
        amplification: Some(r.amplification),
        rescaled: r.rescaled.clone(),
        post_std: Some(r.post_std),
        ..Default::default()
    }
}

fn c5_fusion(breaches: &mut Vec<String>) -> Outcome {
    let start = Instant::now();
    let r = engine_fusion();
    check(r.n_steps == 24, format!("{} steps", r.n_steps))?;
    let poly: &Polynomial = &r.fit.poly;
    for (x, got) in ENGINE_S.iter().zip(&r.fused) {
        let direct = gl_direct(|t| poly.eval(t), *x, 0.14, 0.38, 0.01, 0.5);
        check(
            (got - direct).abs() <= 1e-9 * direct.abs(),
            format!("fused {got} vs direct sum {direct}"),
        )?;
    }
    for (got, printed) in r.rescaled.iter().zip(ENGINE_RESCALED) {
        check(
            close(*got, printed, 0.15),
            format!("rescaled {got} vs {printed}"),
        )?;
    }
    check(
        (mean(&r.rescaled) - mean(&ENGINE_F)).abs() <= 1e-9,
        "rescaled mean differs from the reference",
    )?;

    let d = builtin("engine_noise");
    let notes = compare("engine_noise", &d.published, &d.typos, &engine_computed(&r));
    let flagged = |q: Quantity| notes.iter().any(|n: &DeviationNote| n.quantity == q);
    let items = [
        (
            Quantity::FusedMean,
            "fused mean",
            r.fused_mean(),
            112.252,
            2.0,
        ),
        (Quantity::Amplification, "K", r.amplification, 1.582, 0.03),
    ];
    for (q, label, got, printed, tol) in items {
        if !close(got, printed, tol) {
            check(
                flagged(q),
                format!("{label} breach not in the deviation ledger"),
            )?;
            breaches.push(format!(
                "{label}: computed {got:.4}, printed {printed} (tolerance {tol})"
            ));
        }
    }
    if !(0.02..=0.06).contains(&r.post_std) {
        check(
            flagged(Quantity::PostStd),
            "post-fusion std breach not in the ledger",
        )?;
        breaches.push(format!(
            "post-fusion std: computed {:.4}, printed 0.034 (band [0.02, 0.06])",
            r.post_std
        ));
    }
    check(!flagged(Quantity::Rescaled), "rescaled values flagged")?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "24-term sum equals direct-summation oracle; rescaled within 0.15; fused mean {:.3}, K {:.4}, post std {:.4} (breaches ledgered)",
        r.fused_mean(),
        r.amplification,
        r.post_std
    ))
}

fn c6_thresholds() -> Outcome {
    let engine = threshold(&WarningPolicy::new(74.0, 0.98).unwrap()).unwrap();
    let body = threshold(&WarningPolicy::new(1.5, 0.98).unwrap()).unwrap();
    check(engine == 72.52, format!("engine threshold {engine}"))?;
    check(body == 1.47, format!("body threshold {body}"))?;
    check(
        diagnose(71.038, engine) == Status::Normal,
        "engine not normal",
    )?;
    check(diagnose(1.374, body) == Status::Normal, "body not normal")?;
    Ok("72.52 and 1.47 exactly; both components normal".into())
}

fn quadratic_root(a: f64, b: f64, c: f64) -> f64 {
    (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
}

fn c7_warning_times() -> Outcome {
    let engine = fit_trend(&trend(&ENGINE_TREND)).map_err(|e| e.to_string())?;
    let printed = [71.0735, -0.1865, 0.2488];
    check(
        engine.poly.coeffs().len() == 3,
        "engine trend is not quadratic",
    )?;
    for (c, p) in engine.poly.coeffs().iter().zip(printed) {
        check(close(*c, p, 5e-3), format!("engine trend {c} vs {p}"))?;
    }
    let t_engine = warning_time(&engine, 72.52, 240.0).ok_or("no engine crossing")?;
    let from_printed = quadratic_root(0.2488, -0.1865, 71.0735 - 72.52);
    check(
        close(t_engine, 2.815, 0.01),
        format!("engine crossing {t_engine}"),
    )?;
    check(
        close(from_printed, 2.815, 0.01),
        format!("printed-equation root {from_printed}"),
    )?;
    let c = engine.poly.coeffs();
    let from_fit = quadratic_root(c[2], c[1], c[0] - 72.52);
    check(
        close(t_engine, from_fit, 1e-8),
        "root differs from quadratic formula",
    )?;

    let body = fit_trend(&trend(&BODY_TREND)).map_err(|e| e.to_string())?;
    check(body.poly.coeffs().len() == 2, "body trend is not a line")?;
    for (c, p) in body.poly.coeffs().iter().zip([1.3541, 0.0215]) {
        check(close(*c, p, 5e-4), format!("body trend {c} vs {p}"))?;
    }
    let t_body = warning_time(&body, 1.47, 240.0).ok_or("no body crossing")?;
    check(
        close(t_body, 5.391, 0.005),
        format!("body crossing {t_body}"),
    )?;
    let c = body.poly.coeffs();
    check(
        close(t_body, (1.47 - c[0]) / c[1], 1e-8),
        "root differs from line solution",
    )?;

    for (name, printed) in [("engine_noise", 22.63), ("body_vibration", 53.91)] {
        let report = run_pipeline(&builtin(name), &RunConfig::default(), Stage::Prognosis)
            .map_err(|e| e.to_string())?;
        check(
            report
                .deviations
                .iter()
                .any(|n| n.quantity == Quantity::WarningTime && n.published == printed),
            format!("printed {printed} not flagged"),
        )?;
    }
    Ok(format!(
        "engine t* = {t_engine:.3}, body t* = {t_body:.3}; printed 22.63 and 53.91 flagged"
    ))
}

fn c8_vehicle() -> Outcome {
    let config = RunConfig::default();
    let both = [builtin("engine_noise"), builtin("body_vibration")];
    let report = run_vehicle(&both, &config).map_err(|e| e.to_string())?;
    let v = report.vehicle.as_ref().ok_or("no verdict")?;
    check(v.source == "engine_noise", format!("source {}", v.source))?;
    let reversed = [both[1].clone(), both[0].clone()];
    let again = run_vehicle(&reversed, &config).map_err(|e| e.to_string())?;
    let w = again.vehicle.as_ref().ok_or("no verdict")?;
    check(
        w.source == "engine_noise" && w.t_min == v.t_min,
        "order dependent verdict",
    )?;
    Ok(format!("source engine_noise at {:.3} months", v.t_min))
}

fn synth_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        n_sensors: 9,
        true_value: 71.0,
        sensor_noise_std: vec![0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55],
        readings_per_sensor: 5,
        outlier_rate: 0.05,
        outlier_offset: 8.0,
        seed,
    }
}

/// Fusion on a synthetic dataset; an unconverged run still yields its last round.
pub fn synth_fusion(seed: u64) -> Option<FusionResult> {
    let d = generate(&synth_spec(seed)).ok()?;
    let summaries: Vec<_> = d
        .sensors
        .iter()
        .map(|s| summarize(s, &d.gate))
        .collect::<Result<_, _>>()
        .ok()?;
    match fuse(&summaries, &FusionConfig::default()) {
        Ok(r) => Some(r),
        Err(Error::NotConverged { last, .. }) => Some(*last),
        Err(_) => None,
    }
}

fn c9_properties() -> Outcome {
    // identity collapse
    let s = engine_summaries();
    let r = fuse(&s, &FusionConfig::new(0.0, 0.01, 0.01, 3).unwrap()).map_err(|e| e.to_string())?;
    for (x, f) in ENGINE_S.iter().zip(&r.fused) {
        check(*f == r.fit.poly.eval(*x), "nu = 0 is not the identity")?;
    }

    // rescaled mean and improvement over synthetic seeds
    let mut ratios = Vec::new();
    for seed in 0..100 {
        let r = synth_fusion(seed).ok_or(format!("seed {seed}: fusion failed"))?;
        check(
            (r.rescaled_mean() - r.reference).abs() <= 1e-9 * r.reference.abs(),
            format!("seed {seed}: rescaled mean drift"),
        )?;
        ratios.push(if r.post_std == 0.0 {
            f64::INFINITY
        } else {
            r.pre_std / r.post_std
        });
    }
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[49] + ratios[50]);
    check(median > 1.0, format!("median improvement {median}"))?;

    // permutation invariance of aggregation
    let comps: Vec<ComponentPrognosis> = [("a", 5.0), ("b", 2.5), ("c", 9.0), ("d", 2.5)]
        .iter()
        .map(|&(n, t)| ComponentPrognosis {
            component: n.into(),
            status: Status::Normal,
            current_value: 1.0,
            threshold: 2.0,
            t_y: Some(t),
        })
        .collect();
    let base = aggregate(comps.clone()).map_err(|e| e.to_string())?;
    let mut rotated = comps.clone();
    for _ in 0..comps.len() {
        rotated.rotate_left(1);
        let v = aggregate(rotated.clone()).map_err(|e| e.to_string())?;
        check(v.t_min == base.t_min, "t_min depends on order")?;
    }

    // json round trip
    let config = RunConfig::default();
    let report = run_vehicle(
        &[builtin("engine_noise"), builtin("body_vibration")],
        &config,
    )
    .map_err(|e| e.to_string())?;
    let json = render(&report, Format::Json).map_err(|e| e.to_string())?;
    let back: Report = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    check(back == report, "json round trip changed the report")?;
    check(
        render(&back, Format::Json).map_err(|e| e.to_string())? == json,
        "json round trip is not byte stable",
    )?;
    Ok(format!(
        "identity at nu=0, rescaled mean within 1e-9, aggregation order-free, median improvement {median:.2} over 100 seeds, json round trip exact"
    ))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut breaches = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 G-L weights", c1_weights()),
        ("2 half-derivative of t", c2_half_derivative()),
        ("3 engine summaries", c3_summaries()),
        ("4 influence fit", c4_fit()),
        ("5 engine fusion", c5_fusion(&mut breaches)),
        ("6 thresholds and diagnosis", c6_thresholds()),
        ("7 warning times", c7_warning_times()),
        ("8 vehicle verdict", c8_vehicle()),
        ("9 property suites", c9_properties()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    for b in &breaches {
        println!("BREACH {b}");
    }
    println!("acceptance run took {:?}", start.elapsed());
    assert_eq!(failed, 0, "{failed} criteria failed");
}
