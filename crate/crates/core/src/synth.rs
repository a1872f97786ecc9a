//! Seeded synthetic multi-sensor datasets with known ground truth.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`, so a seed gives
//! the same readings on every platform. Noise is normal, truncated at ±4
//! standard deviations by rejection. Outliers are displaced by
//! `±outlier_offset` with a random sign.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fusion::{QualityGate, SensorSeries};
use crate::io::Dataset;

/// Half-width of the synthetic quality gate, in units of the largest sensor std.
pub const GATE_WIDTH_SD: f64 = 4.5;
const TRUNCATE_SD: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_sensors: usize,
    pub true_value: f64,
    pub sensor_noise_std: Vec<f64>,
    pub readings_per_sensor: usize,
    pub outlier_rate: f64,
    pub outlier_offset: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sensors < 3 {
            return Err(invalid(format!(
                "need at least 3 sensors, got {}",
                self.n_sensors
            )));
        }
        if self.sensor_noise_std.len() != self.n_sensors {
            return Err(invalid(format!(
                "{} noise stds for {} sensors",
                self.sensor_noise_std.len(),
                self.n_sensors
            )));
        }
        if self.readings_per_sensor < 2 {
            return Err(invalid("need at least 2 readings per sensor"));
        }
        if !self.true_value.is_finite() {
            return Err(invalid("true value must be finite"));
        }
        if self
            .sensor_noise_std
            .iter()
            .any(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(invalid("noise stds must be positive"));
        }
        let first = self.sensor_noise_std[0];
        if self.sensor_noise_std.iter().all(|&s| s == first) {
            return Err(invalid("noise stds must not all be equal"));
        }
        if !(0.0..=1.0).contains(&self.outlier_rate) {
            return Err(invalid(format!(
                "outlier rate {} outside [0, 1]",
                self.outlier_rate
            )));
        }
        if !(self.outlier_offset.is_finite() && self.outlier_offset >= 0.0) {
            return Err(invalid("outlier offset must be non-negative"));
        }
        Ok(())
    }

    /// `true_value ± 4.5 · max std`: every undisplaced reading passes.
    pub fn gate(&self) -> Result<QualityGate> {
        let max = self.sensor_noise_std.iter().copied().fold(0.0, f64::max);
        let half = GATE_WIDTH_SD * max;
        QualityGate::new(self.true_value - half, self.true_value + half)
    }
}

/// A generated dataset and, per sensor and reading, whether it was displaced.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub displaced: Vec<Vec<bool>>,
}

pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    generate_with_truth(spec).map(|s| s.dataset)
}

pub fn generate_with_truth(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sensors = Vec::with_capacity(spec.n_sensors);
    let mut displaced = Vec::with_capacity(spec.n_sensors);
    for (i, &sd) in spec.sensor_noise_std.iter().enumerate() {
        let normal = Normal::new(0.0, sd).map_err(|e| invalid(e.to_string()))?;
        let mut readings = Vec::with_capacity(spec.readings_per_sensor);
        let mut flags = Vec::with_capacity(spec.readings_per_sensor);
        for _ in 0..spec.readings_per_sensor {
            let noise = loop {
                let z: f64 = normal.sample(&mut rng);
                if z.abs() <= TRUNCATE_SD * sd {
                    break z;
                }
            };
            let mut value = spec.true_value + noise;
            let outlier = rng.random::<f64>() < spec.outlier_rate;
            if outlier {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                value += sign * spec.outlier_offset;
            }
            readings.push(value);
            flags.push(outlier);
        }
        sensors.push(SensorSeries::new(format!("S{}", i + 1), readings, "au")?);
        displaced.push(flags);
    }
    Ok(Synthetic {
        dataset: Dataset {
            name: format!("synthetic_{}", spec.seed),
            unit: "au".into(),
            sensors,
            gate: spec.gate()?,
            trend_samples: None,
            published: Default::default(),
            typos: Vec::new(),
        },
        displaced,
    })
}
