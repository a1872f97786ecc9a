use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracfuse::error::{Error, ErrorKind, Result};
use fracfuse::fixtures;
use fracfuse::glcalc::{amplitude_curve, write_gain_table, FracOrder};
use fracfuse::io::report::{render, render_prediction};
use fracfuse::io::{load_dataset, load_trend, ComponentConfig, Dataset, Format, RunConfig};
use fracfuse::pipeline::{predict, run_pipeline, run_vehicle, Stage};

#[derive(Parser)]
#[command(
    name = "fracfuse",
    version,
    about = "Fractional-order sensor fusion and fault prognosis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gate, summarize and fuse one dataset.
    Fuse {
        /// Dataset manifest, its directory, or builtin:<name>.
        dataset: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fuse one dataset and diagnose it against its warning threshold.
    Diagnose {
        dataset: String,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit a trend and predict when it reaches the warning threshold.
    Predict {
        /// Dataset with trend samples, or a t,value CSV file.
        input: String,
        /// Component name used to look up the policy for a CSV input.
        #[arg(long)]
        component: Option<String>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run several components and report the earliest warning.
    Vehicle {
        #[arg(required = true)]
        datasets: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Gain table |omega|^nu of the fractional operator.
    Curve {
        /// Orders, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 0.75, 1.0])]
        nu: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        omega_min: f64,
        #[arg(long, default_value_t = 10.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
    /// Step h for every component.
    #[arg(long)]
    step: Option<f64>,
    /// Prediction horizon in months past the last trend sample.
    #[arg(long)]
    horizon: Option<f64>,
    /// json or text.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolicyArgs {
    /// Rated limit of the monitored quantity.
    #[arg(long)]
    limit: Option<f64>,
    /// Warning coefficient in (0, 1).
    #[arg(long)]
    k: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(nu) = self.nu {
            config.nu = nu;
        }
        if let Some(step) = self.step {
            config.override_step(step);
        }
        if let Some(h) = self.horizon {
            config.horizon_months = h;
        }
        config.validate()?;
        Ok(config)
    }

    fn format(&self) -> Result<Format> {
        self.format.parse()
    }
}

impl PolicyArgs {
    fn apply(&self, config: &mut RunConfig, component: &str) -> Result<()> {
        if self.limit.is_none() && self.k.is_none() {
            return Ok(());
        }
        let existing = config.components.get(component).cloned();
        let rated_limit = self
            .limit
            .or(existing.as_ref().map(|c| c.rated_limit))
            .ok_or_else(|| Error::InvalidArgument(format!("--limit needed for {component}")))?;
        let k = self
            .k
            .or(existing.as_ref().map(|c| c.k))
            .ok_or_else(|| Error::InvalidArgument(format!("--k needed for {component}")))?;
        let entry = ComponentConfig {
            rated_limit,
            k,
            step: existing.as_ref().and_then(|c| c.step),
            consistency_tol: existing.and_then(|c| c.consistency_tol),
        };
        config.components.insert(component.to_string(), entry);
        config.validate()
    }
}

fn resolve(spec: &str) -> Result<Dataset> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return fixtures::load(name).unwrap_or_else(|| {
            Err(Error::InvalidArgument(format!(
                "unknown bundled dataset '{name}' (available: {})",
                fixtures::NAMES.join(", ")
            )))
        });
    }
    let path = Path::new(spec);
    if path.is_dir() {
        load_dataset(path.join("dataset.toml"))
    } else {
        load_dataset(path)
    }
}

fn write_out(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Runs a command; `Ok(false)` means output was written but no prognosis exists.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Fuse { dataset, run } => {
            let format = run.format()?;
            let config = run.config()?;
            let dataset = resolve(&dataset)?;
            let report = run_pipeline(&dataset, &config, Stage::Fusion)?;
            write_out(&render(&report, format)?, run.out.as_deref())?;
            Ok(true)
        }
        Command::Diagnose {
            dataset,
            policy,
            run,
        } => {
            let format = run.format()?;
            let mut config = run.config()?;
            let dataset = resolve(&dataset)?;
            policy.apply(&mut config, &dataset.name)?;
            let report = run_pipeline(&dataset, &config, Stage::Prognosis)?;
            write_out(&render(&report, format)?, run.out.as_deref())?;
            Ok(true)
        }
        Command::Predict {
            input,
            component,
            policy,
            run,
        } => {
            let format = run.format()?;
            let mut config = run.config()?;
            let is_csv = Path::new(&input)
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let (name, samples, published, typos) = if is_csv {
                let name = component.unwrap_or_else(|| "trend".to_string());
                (name, load_trend(&input)?, Default::default(), Vec::new())
            } else {
                let d = resolve(&input)?;
                let samples = d.trend_samples.ok_or_else(|| {
                    Error::InvalidArgument(format!("dataset {} has no trend samples", d.name))
                })?;
                (component.unwrap_or(d.name), samples, d.published, d.typos)
            };
            policy.apply(&mut config, &name)?;
            let p = predict(
                &name,
                &samples,
                config.policy(&name)?,
                config.horizon_months,
                &published,
                &typos,
            )?;
            write_out(&render_prediction(&p, format)?, run.out.as_deref())?;
            Ok(p.t_y.is_some())
        }
        Command::Vehicle { datasets, run } => {
            let format = run.format()?;
            let config = run.config()?;
            let datasets = datasets
                .iter()
                .map(|d| resolve(d))
                .collect::<Result<Vec<_>>>()?;
            let report = run_vehicle(&datasets, &config)?;
            write_out(&render(&report, format)?, run.out.as_deref())?;
            Ok(true)
        }
        Command::Curve {
            nu,
            omega_min,
            omega_max,
            samples,
            out,
        } => {
            let orders = nu
                .into_iter()
                .map(FracOrder::new)
                .collect::<Result<Vec<_>>>()?;
            let rows = amplitude_curve(&orders, omega_min, omega_max, samples)?;
            let mut buf = Vec::new();
            write_gain_table(&rows, &mut buf).map_err(|source| Error::Io {
                path: PathBuf::from("<buffer>"),
                source,
            })?;
            write_out(&String::from_utf8_lossy(&buf), out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("no threshold crossing within the horizon");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Input => 1,
                ErrorKind::Numerical => 2,
                ErrorKind::NoPrognosis => 3,
            })
        }
    }
}
