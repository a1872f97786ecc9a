use fracfuse::fusion::summarize;
use fracfuse::io::{load_dataset, write_dataset};
use fracfuse::synth::{generate, generate_with_truth, SynthSpec};

fn spec(seed: u64, readings: usize, outlier_rate: f64) -> SynthSpec {
    SynthSpec {
        n_sensors: 6,
        true_value: 12.0,
        sensor_noise_std: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.6],
        readings_per_sensor: readings,
        outlier_rate,
        outlier_offset: 20.0,
        seed,
    }
}

fn pop_std(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

#[test]
fn empirical_std_matches_spec() {
    let s = spec(11, 400, 0.0);
    let d = generate(&s).unwrap();
    for (series, &sd) in d.sensors.iter().zip(&s.sensor_noise_std) {
        let n = series.readings.len() as f64;
        // standard error of the std estimator for normal data
        let se = sd / (2.0 * n).sqrt();
        let got = pop_std(&series.readings);
        assert!((got - sd).abs() <= 3.0 * se, "{got} vs {sd}");
    }
}

#[test]
fn gate_removes_exactly_the_displaced_readings() {
    for seed in 0..10 {
        let s = generate_with_truth(&spec(seed, 50, 0.1)).unwrap();
        for (series, flags) in s.dataset.sensors.iter().zip(&s.displaced) {
            let summary = summarize(series, &s.dataset.gate).unwrap();
            let displaced: Vec<f64> = series
                .readings
                .iter()
                .zip(flags)
                .filter(|(_, &f)| f)
                .map(|(&r, _)| r)
                .collect();
            assert_eq!(summary.rejected, displaced);
        }
    }
}

#[test]
fn grand_mean_recovers_truth() {
    let s = spec(3, 1000, 0.05);
    let d = generate(&s).unwrap();
    let mut total = 0.0;
    let mut count = 0.0;
    let mut var = 0.0;
    for (series, &sd) in d.sensors.iter().zip(&s.sensor_noise_std) {
        let kept: Vec<f64> = series
            .readings
            .iter()
            .copied()
            .filter(|&r| d.gate.admits(r))
            .collect();
        total += kept.iter().sum::<f64>();
        count += kept.len() as f64;
        var += sd * sd * kept.len() as f64;
    }
    let grand = total / count;
    let se = var.sqrt() / count;
    assert!(
        (grand - s.true_value).abs() <= 3.0 * se,
        "{grand} vs {}",
        s.true_value
    );
}

#[test]
fn generated_datasets_use_the_dataset_format() {
    let dir = tempfile::tempdir().unwrap();
    let d = generate(&spec(5, 7, 0.1)).unwrap();
    let manifest = write_dataset(&d, dir.path()).unwrap();
    let back = load_dataset(manifest).unwrap();
    assert_eq!(back.sensors, d.sensors);
    assert_eq!(back.gate, d.gate);
}

#[test]
fn outlier_fraction_tracks_the_rate() {
    let s = generate_with_truth(&spec(9, 1000, 0.2)).unwrap();
    let n: usize = s.displaced.iter().map(Vec::len).sum();
    let k = s.displaced.iter().flatten().filter(|&&f| f).count();
    let rate = k as f64 / n as f64;
    let se = (0.2f64 * 0.8 / n as f64).sqrt();
    assert!((rate - 0.2).abs() <= 4.0 * se, "{rate}");
}
