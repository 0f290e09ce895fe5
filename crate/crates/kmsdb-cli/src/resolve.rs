//! Turning command-line strings into models, profiles, grids and output
//! files.

use std::fs;
use std::path::Path;

use kmsdb::analysis::{Construction, DiscreteScheme, Instance, JumpChoice};
use kmsdb::hamiltonian::{Entries, ModelKind, ModelSpec};
use kmsdb::profile::WeightProfile;
use kmsdb::random;
use kmsdb::serial::MatrixJson;
use serde::Serialize;

use crate::{CliError, Format, ModelArgs, OutputArgs, SCHEMA_VERSION};

/// Read `arg` as a file when such a file exists, otherwise use it verbatim.
fn inline_or_file(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if !arg.trim_start().starts_with('{') && path.is_file() {
        Ok(fs::read_to_string(path)?)
    } else {
        Ok(arg.to_string())
    }
}

/// Model descriptor; `random-d<n>` draws a Hamiltonian of dimension n from
/// the seed and embeds its entries so the report reproduces it.
pub fn model(arg: &str, seed: u64) -> Result<ModelSpec, CliError> {
    if let Some(rest) = arg.trim().strip_prefix("random-d") {
        let d: usize = rest.parse().map_err(|_| CliError::usage(format!("bad dimension in '{arg}'")))?;
        if !(1..=64).contains(&d) {
            return Err(CliError::usage(format!("random models need 1 <= d <= 64, got {d}")));
        }
        let h = random::default_hamiltonian(&mut random::rng(seed), d)?;
        return Ok(ModelSpec {
            model: ModelKind::Matrix,
            l: None,
            beta: 1.0,
            j: 1.0,
            hx: 0.0,
            hz: 0.0,
            periodic: false,
            entries: Some(Entries::Complex(MatrixJson::from_matrix(h.h()))),
        });
    }
    Ok(ModelSpec::parse(&inline_or_file(arg)?)?)
}

/// Everything a model-based command needs, resolved once.
pub struct Setup {
    pub spec: ModelSpec,
    pub construction: Construction,
    pub profile: WeightProfile,
    pub profile_arg: String,
    pub jumps: JumpChoice,
    pub discrete: Option<DiscreteScheme>,
    pub instance: Instance,
}

impl Setup {
    pub fn new(a: &ModelArgs) -> Result<Self, CliError> {
        if !(a.sigma > 0.0 && a.sigma.is_finite()) {
            return Err(CliError::usage(format!("--sigma must be positive, got {}", a.sigma)));
        }
        let spec = model(&a.model, a.output.seed)?;
        let construction = Construction::parse(&a.construction)?;
        let profile_arg = inline_or_file(&a.profile)?;
        let profile = kmsdb::analysis::resolve_profile(&profile_arg, construction)?;
        let jumps = JumpChoice::parse(&a.jumps)?;
        let discrete = a.discrete.as_deref().map(DiscreteScheme::parse).transpose()?;
        let instance = Instance::new(&spec, jumps)?;
        Ok(Setup { spec, construction, profile, profile_arg, jumps, discrete, instance })
    }

    pub fn config(&self, a: &ModelArgs) -> Config {
        Config {
            model: self.spec.clone(),
            construction: self.construction.name().into(),
            profile: self.profile_arg.clone(),
            profile_resolved: self.profile.name().into(),
            sigma: a.sigma,
            discrete: self.discrete.map(|d| d.label()),
            jumps: self.jumps,
            jump_labels: self.instance.jumps.labels.clone(),
            seed: a.output.seed,
            format: a.output.format,
        }
    }
}

/// Resolved configuration embedded in every model-based report.
#[derive(Serialize)]
pub struct Config {
    pub model: ModelSpec,
    pub construction: String,
    pub profile: String,
    pub profile_resolved: String,
    pub sigma: f64,
    pub discrete: Option<String>,
    pub jumps: JumpChoice,
    pub jump_labels: Vec<String>,
    pub seed: u64,
    pub format: Format,
}

/// Thresholds applied by the run.
#[derive(Serialize)]
pub struct Tolerances {
    pub db_residual: f64,
    pub trace_residual: f64,
    pub cp_min_eig: f64,
    pub fixed_point_residual: f64,
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances { db_residual: tol, trace_residual: tol, cp_min_eig: -tol, fixed_point_residual: tol }
    }
}

/// Inclusive grid `start:stop:step`, rounded to 12 decimals so printed
/// values are clean.
pub fn grid(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("{what} grid '{arg}' must be start:stop:step with step > 0"));
    let parts: Vec<f64> = arg.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(CliError::usage(format!("{what} grid has {count} points; at most 100000 allowed")));
    }
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Report header shared by all commands.
#[derive(Serialize)]
pub struct Report<'a, C: Serialize, B: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config: C,
    pub tolerances: Tolerances,
    #[serde(flatten)]
    pub body: B,
}

impl<'a, C: Serialize, B: Serialize> Report<'a, C, B> {
    pub fn new(command: &'a str, config: C, tolerances: Tolerances, body: B) -> Self {
        Report { schema_version: SCHEMA_VERSION, command, config, tolerances, body }
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Write `name` under `--out`, or print to stdout.
fn emit(out: &OutputArgs, name: &str, text: &str) -> Result<(), CliError> {
    match &out.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn emit_json<T: Serialize>(out: &OutputArgs, stem: &str, report: &T) -> Result<(), CliError> {
    emit(out, &format!("{stem}.json"), &pretty(report)?)
}

/// CSV table plus a `<stem>.meta.json` sidecar carrying the full report
/// header (written only with `--out`; stdout receives the table alone).
pub fn emit_csv<T: Serialize>(out: &OutputArgs, stem: &str, csv_text: &str, meta: &T) -> Result<(), CliError> {
    emit(out, &format!("{stem}.csv"), csv_text)?;
    if let Some(dir) = &out.out {
        fs::write(dir.join(format!("{stem}.meta.json")), pretty(meta)?)?;
    }
    Ok(())
}

pub fn csv_from_records(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new("io", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new("io", e.to_string()))
}

pub fn require_json(out: &OutputArgs, command: &str) -> Result<(), CliError> {
    if out.format != Format::Json {
        return Err(CliError::usage(format!("{command} only writes JSON")));
    }
    Ok(())
}
