use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellProfile, HabitatProfile, InitialData, ModelParams, Table};
use crate::solver::StepperConfig;

pub const DEFAULT_AMPLITUDE: f64 = 0.1;

/// The `initial` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    /// `v0 = v_amplitude·cos(πx/(2h0))`, `w0 = w_amplitude·cos(πx/(2h0))`,
    /// `u0` constant. Both amplitudes default to `amplitude`, `u0` to `θ/a`.
    Cosine {
        amplitude: f64,
        #[serde(default)]
        v_amplitude: Option<f64>,
        #[serde(default)]
        w_amplitude: Option<f64>,
        #[serde(default)]
        u0: Option<f64>,
    },
    /// Samples from a CSV with header `x,v,w` spanning `[-h0, h0]`; `u0`
    /// either constant or from a CSV with header `x,u`.
    Tabulated {
        file: PathBuf,
        #[serde(default)]
        u0: Option<f64>,
        #[serde(default)]
        u0_file: Option<PathBuf>,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Cosine { amplitude: DEFAULT_AMPLITUDE, v_amplitude: None, w_amplitude: None, u0: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// `series.csv` and `profiles.csv`.
    Csv,
    /// `summary.json`.
    Json,
}

/// The `outputs` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Cadence of profile snapshots; a multiple of `stepper.snapshot_every`.
    /// `None` writes no profiles.
    pub profile_every: Option<f64>,
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("viralfb_out"), profile_every: None, formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelParams,
    #[serde(default)]
    initial: InitialSpec,
    #[serde(default)]
    stepper: StepperConfig,
    #[serde(default)]
    outputs: OutputSpec,
}

/// A parsed and validated configuration. File paths are absolute and every
/// default is filled in, so [`RunConfig::effective_json`] reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub initial: InitialSpec,
    pub stepper: StepperConfig,
    pub outputs: OutputSpec,
    #[serde(skip)]
    pub data: InitialData,
}

impl RunConfig {
    pub fn effective_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config always serializes");
        s.push('\n');
        s
    }

    /// Number of series rows between profile snapshots, if profiles are on.
    pub fn profile_stride(&self) -> Option<usize> {
        self.outputs.profile_every.map(|pe| (pe / self.stepper.snapshot_every).round() as usize)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_columns(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if found != header {
        return Err(Error::Config(format!(
            "{}: header must be `{}`, found `{}`",
            path.display(),
            header.join(","),
            found.join(",")
        )));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (j, cell) in rec.iter().enumerate() {
            let x: f64 = cell.parse().map_err(|_| {
                Error::Config(format!("{}: row {}: `{cell}` is not a number", path.display(), i + 2))
            })?;
            if !x.is_finite() {
                return Err(Error::Config(format!("{}: row {}: non-finite value", path.display(), i + 2)));
            }
            cols[j].push(x);
        }
    }
    Ok(cols)
}

/// Builds the initial data described by `spec`, returning it together with
/// the spec with defaults filled and paths resolved.
pub fn build_initial(spec: &InitialSpec, p: &ModelParams, base: &Path) -> Result<(InitialData, InitialSpec)> {
    match spec {
        InitialSpec::Cosine { amplitude, v_amplitude, w_amplitude, u0 } => {
            let v = v_amplitude.unwrap_or(*amplitude);
            let w = w_amplitude.unwrap_or(*amplitude);
            let u = u0.unwrap_or(p.u_free());
            let filled = InitialSpec::Cosine {
                amplitude: *amplitude,
                v_amplitude: Some(v),
                w_amplitude: Some(w),
                u0: Some(u),
            };
            Ok((InitialData::cosine(u, v, w), filled))
        }
        InitialSpec::Tabulated { file, u0, u0_file } => {
            if u0.is_some() && u0_file.is_some() {
                return Err(Error::Config("initial: give at most one of `u0` and `u0_file`".into()));
            }
            let file = resolve(base, file);
            let cols = read_columns(&file, &["x", "v", "w"])?;
            let v0 = HabitatProfile::Tabulated(Table::new(cols[0].clone(), cols[1].clone())?);
            let w0 = HabitatProfile::Tabulated(Table::new(cols[0].clone(), cols[2].clone())?);
            let (u_prof, u0_spec, u0_file_spec) = match u0_file {
                Some(uf) => {
                    let uf = resolve(base, uf);
                    let c = read_columns(&uf, &["x", "u"])?;
                    (CellProfile::Tabulated(Table::new(c[0].clone(), c[1].clone())?), None, Some(uf))
                }
                None => {
                    let u = u0.unwrap_or(p.u_free());
                    (CellProfile::Constant(u), Some(u), None)
                }
            };
            let filled = InitialSpec::Tabulated { file, u0: u0_spec, u0_file: u0_file_spec };
            Ok((InitialData { u0: u_prof, v0, w0 }, filled))
        }
    }
}

fn validate_outputs(o: &OutputSpec, stepper: &StepperConfig) -> Result<()> {
    if let Some(pe) = o.profile_every {
        if !(pe > 0.0 && pe.is_finite()) {
            return Err(Error::InvalidParameter("outputs.profile_every must be positive".into()));
        }
        let ratio = pe / stepper.snapshot_every;
        if ratio.round() < 1.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::InvalidParameter(
                "outputs.profile_every must be a whole multiple of stepper.snapshot_every".into(),
            ));
        }
    }
    Ok(())
}

/// Parses and validates configuration text. Relative paths are taken
/// relative to `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let loc = format!("line {}, column {}", inner.line(), inner.column());
        if path == "." || path.is_empty() {
            Error::Config(format!("{inner} ({loc})"))
        } else {
            Error::Config(format!("at `{path}`: {inner} ({loc})"))
        }
    })?;
    raw.model.validate()?;
    raw.stepper.validate()?;
    validate_outputs(&raw.outputs, &raw.stepper)?;
    let (data, initial) = build_initial(&raw.initial, &raw.model, base)?;
    data.validate(raw.model.h0)?;
    let mut outputs = raw.outputs;
    outputs.dir = resolve(base, &outputs.dir);
    Ok(RunConfig { model: raw.model, initial, stepper: raw.stepper, outputs, data })
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
    let base = base.canonicalize().unwrap_or(base);
    parse_config_str(&text, &base)
}
