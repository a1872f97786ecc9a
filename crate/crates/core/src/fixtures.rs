//! Datasets bundled into the binary: engine noise and body vibration
//! measurements with their printed reference values.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::dataset::{parse_dataset, Source};
use crate::io::Dataset;

pub const NAMES: [&str; 2] = ["engine_noise", "body_vibration"];

macro_rules! fixture_files {
    ($dir:literal) => {
        &[
            (
                "dataset.toml",
                include_str!(concat!("../fixtures/", $dir, "/dataset.toml")),
            ),
            (
                "readings.csv",
                include_str!(concat!("../fixtures/", $dir, "/readings.csv")),
            ),
            (
                "trend.csv",
                include_str!(concat!("../fixtures/", $dir, "/trend.csv")),
            ),
            (
                "published.toml",
                include_str!(concat!("../fixtures/", $dir, "/published.toml")),
            ),
            (
                "typos.toml",
                include_str!(concat!("../fixtures/", $dir, "/typos.toml")),
            ),
        ]
    };
}

type Files = &'static [(&'static str, &'static str)];

fn files(name: &str) -> Option<Files> {
    match name {
        "engine_noise" => Some(fixture_files!("engine_noise")),
        "body_vibration" => Some(fixture_files!("body_vibration")),
        _ => None,
    }
}

/// Raw text of one bundled file.
pub fn file(name: &str, file: &str) -> Option<&'static str> {
    files(name)?
        .iter()
        .find(|(f, _)| *f == file)
        .map(|(_, text)| *text)
}

struct Bundled {
    name: String,
    files: Files,
}

impl Source for Bundled {
    fn read(&self, file: &str) -> Result<(PathBuf, String)> {
        let path = PathBuf::from(format!("builtin:{}/{file}", self.name));
        self.files
            .iter()
            .find(|(f, _)| *f == file)
            .map(|(_, text)| (path.clone(), text.to_string()))
            .ok_or_else(|| Error::Parse {
                path,
                message: "no such bundled file".into(),
            })
    }
}

/// Parses a bundled dataset; `None` for unknown names.
pub fn load(name: &str) -> Option<Result<Dataset>> {
    let files = files(name)?;
    let source = Bundled {
        name: name.to_string(),
        files,
    };
    let manifest = file(name, "dataset.toml")?;
    let path = Path::new("builtin:").join(name).join("dataset.toml");
    Some(parse_dataset(&path, manifest, &source))
}
