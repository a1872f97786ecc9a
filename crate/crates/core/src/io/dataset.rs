//! Dataset files.
//!
//! A dataset is a small TOML manifest naming its companion files:
//!
//! ```toml
//! name = "engine_noise"
//! unit = "dB"
//! readings = "readings.csv"      # sensor_id,reading_1,...,reading_n
//! trend = "trend.csv"            # optional: t,value
//! published = "published.toml"   # optional: printed reference values
//! typos = "typos.toml"           # optional: known misprints
//!
//! [gate]
//! lo = 64.0
//! hi = 78.0
//! ```
//!
//! Paths are relative to the manifest. The readings table may carry an extra
//! `unit` column, which must then match the manifest unit on every row.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{QualityGate, SensorSeries};
use crate::io::published::{KnownTypo, Published, TypoFile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub unit: String,
    pub sensors: Vec<SensorSeries>,
    pub gate: QualityGate,
    pub trend_samples: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub published: Published,
    #[serde(default)]
    pub typos: Vec<KnownTypo>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Manifest {
    pub name: String,
    pub unit: String,
    pub readings: String,
    pub trend: Option<String>,
    pub published: Option<String>,
    pub typos: Option<String>,
    pub gate: GateSpec,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct GateSpec {
    pub lo: f64,
    pub hi: f64,
}

/// Resolves a manifest-relative file name to its display path and contents.
pub(crate) trait Source {
    fn read(&self, name: &str) -> Result<(PathBuf, String)>;
}

struct Directory<'a>(&'a Path);

impl Source for Directory<'_> {
    fn read(&self, name: &str) -> Result<(PathBuf, String)> {
        let path = self.0.join(name);
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok((path, text))
    }
}

/// Loads and validates a dataset manifest and its companion files.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_dataset(path, &text, &Directory(dir))
}

/// Loads a standalone `t,value` trend table.
pub fn load_trend(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trend(path, &text)
}

/// Parses a readings table held in memory; errors name it `<input>`.
pub fn readings_from_str(text: &str, unit: &str) -> Result<Vec<SensorSeries>> {
    parse_readings(Path::new("<input>"), text, unit)
}

/// Parses a `t,value` trend table held in memory.
pub fn trend_from_str(text: &str) -> Result<Vec<(f64, f64)>> {
    parse_trend(Path::new("<input>"), text)
}

pub(crate) fn parse_dataset(path: &Path, text: &str, source: &dyn Source) -> Result<Dataset> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "empty dataset manifest".into(),
        });
    }
    let manifest: Manifest = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    let gate = QualityGate::new(manifest.gate.lo, manifest.gate.hi).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;

    let (rpath, rtext) = source.read(&manifest.readings)?;
    let sensors = parse_readings(&rpath, &rtext, &manifest.unit)?;

    let trend_samples = match &manifest.trend {
        Some(name) => {
            let (tpath, ttext) = source.read(name)?;
            Some(parse_trend(&tpath, &ttext)?)
        }
        None => None,
    };
    let published = match &manifest.published {
        Some(name) => {
            let (ppath, ptext) = source.read(name)?;
            toml::from_str::<Published>(&ptext).map_err(|e| Error::Parse {
                path: ppath,
                message: e.message().to_string(),
            })?
        }
        None => Published::default(),
    };
    let typos = match &manifest.typos {
        Some(name) => {
            let (ypath, ytext) = source.read(name)?;
            toml::from_str::<TypoFile>(&ytext)
                .map_err(|e| Error::Parse {
                    path: ypath,
                    message: e.message().to_string(),
                })?
                .typo
        }
        None => Vec::new(),
    };

    Ok(Dataset {
        name: manifest.name,
        unit: manifest.unit,
        sensors,
        gate,
        trend_samples,
        published,
        typos,
    })
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn line_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::ParseLine {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_number(path: &Path, line: u64, column: &str, cell: &str) -> Result<f64> {
    let value: f64 = cell.parse().map_err(|_| {
        line_error(
            path,
            line,
            format!("column {column}: '{cell}' is not a number"),
        )
    })?;
    if !value.is_finite() {
        return Err(line_error(
            path,
            line,
            format!("column {column}: value is not finite"),
        ));
    }
    Ok(value)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    line_error(path, line, e.to_string())
}

pub(crate) fn parse_readings(path: &Path, text: &str, unit: &str) -> Result<Vec<SensorSeries>> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "empty readings file".into(),
        });
    }
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let columns: Vec<&str> = header.iter().collect();
    let id_col = columns
        .iter()
        .position(|&c| c == "sensor_id")
        .ok_or_else(|| line_error(path, 1, "missing column sensor_id"))?;
    let unit_col = columns.iter().position(|&c| c == "unit");
    let reading_cols: Vec<usize> = columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.starts_with("reading_"))
        .map(|(i, _)| i)
        .collect();
    if reading_cols.is_empty() {
        return Err(line_error(path, 1, "no reading_<n> columns"));
    }

    let mut sensors = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != columns.len() {
            return Err(line_error(
                path,
                line,
                format!("expected {} cells, found {}", columns.len(), record.len()),
            ));
        }
        let id = &record[id_col];
        if id.is_empty() {
            return Err(line_error(path, line, "empty sensor_id"));
        }
        if let Some(uc) = unit_col {
            if &record[uc] != unit {
                return Err(line_error(
                    path,
                    line,
                    format!(
                        "unit mismatch: sensor {id} uses '{}', dataset uses '{unit}'",
                        &record[uc]
                    ),
                ));
            }
        }
        let mut readings = Vec::with_capacity(reading_cols.len());
        for &c in &reading_cols {
            let cell = &record[c];
            // blank cells mark readings that were not taken
            if cell.is_empty() {
                continue;
            }
            readings.push(parse_number(path, line, columns[c], cell)?);
        }
        if readings.is_empty() {
            return Err(line_error(
                path,
                line,
                format!("sensor {id} has no readings"),
            ));
        }
        sensors.push(SensorSeries {
            sensor_id: id.to_string(),
            readings,
            unit: unit.to_string(),
        });
    }
    if sensors.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "no sensor rows".into(),
        });
    }
    Ok(sensors)
}

pub(crate) fn parse_trend(path: &Path, text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let t_col = header
        .iter()
        .position(|c| c == "t")
        .ok_or_else(|| line_error(path, 1, "missing column t"))?;
    let v_col = header
        .iter()
        .position(|c| c == "value")
        .ok_or_else(|| line_error(path, 1, "missing column value"))?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(line_error(
                path,
                line,
                format!("expected {} cells, found {}", header.len(), record.len()),
            ));
        }
        let t = parse_number(path, line, "t", &record[t_col])?;
        let v = parse_number(path, line, "value", &record[v_col])?;
        if let Some(&(prev, _)) = samples.last() {
            if t <= prev {
                return Err(line_error(path, line, "times must be strictly increasing"));
            }
        }
        samples.push((t, v));
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "no trend samples".into(),
        });
    }
    Ok(samples)
}

/// Writes `dataset.toml` and `readings.csv` (plus `trend.csv` when present)
/// into `dir`, in the format [`load_dataset`] reads. Published values and
/// typo lists are not written.
pub fn write_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let width = dataset
        .sensors
        .iter()
        .map(|s| s.readings.len())
        .max()
        .unwrap_or(0);
    let mut csv = String::from("sensor_id");
    for i in 1..=width {
        csv.push_str(&format!(",reading_{i}"));
    }
    csv.push('\n');
    for s in &dataset.sensors {
        csv.push_str(&s.sensor_id);
        for i in 0..width {
            csv.push(',');
            if let Some(r) = s.readings.get(i) {
                csv.push_str(&format!("{r:?}"));
            }
        }
        csv.push('\n');
    }
    let readings = dir.join("readings.csv");
    fs::write(&readings, csv).map_err(io_err(&readings))?;

    let trend = match &dataset.trend_samples {
        Some(samples) => {
            let mut text = String::from("t,value\n");
            for (t, v) in samples {
                text.push_str(&format!("{t:?},{v:?}\n"));
            }
            let path = dir.join("trend.csv");
            fs::write(&path, text).map_err(io_err(&path))?;
            Some("trend.csv".to_string())
        }
        None => None,
    };

    let manifest = Manifest {
        name: dataset.name.clone(),
        unit: dataset.unit.clone(),
        readings: "readings.csv".into(),
        trend,
        published: None,
        typos: None,
        gate: GateSpec {
            lo: dataset.gate.lo,
            hi: dataset.gate.hi,
        },
    };
    let path = dir.join("dataset.toml");
    let text = toml::to_string(&manifest).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}
