//! Run configuration: a small TOML schema shared by the command-line tools.
//!
//! Parsing is deliberately strict and deliberately complete: every key is
//! checked against the schema, unknown keys are errors, and validation does
//! not stop at the first problem. `parse_config` returns either a fully
//! validated [`RunConfig`] or the list of *all* violations, so a bad file is
//! fixed in one round instead of one message at a time.
//!
//! Cross-field rules enforced here rather than at run time:
//!
//! * the smoothing threshold must leave headroom under the grid cutoff,
//!   2N < πn/L, so that the transition region of m is actually resolved;
//! * the time step must satisfy dt < Δx²/π, the stability edge for the
//!   split-step phase rotation at the Nyquist mode;
//! * the coupling exponent must satisfy 0 < γ < d or the potential kernel
//!   |x|^{-γ} is not locally integrable on the torus.

use std::path::Path;

use toml::value::{Table, Value};

use crate::dynamics::{EvolveConfig, Integrator, ModelParams, Probe};
use crate::error::{LabError, Result};
use crate::grid::{make_grid, Field, Grid};
use crate::initial_data::{gaussian, rough_noise, RoughSpec};
use crate::symbols::IParams;

/// Probe names accepted in `evolution.probes`, in the column order they take
/// when sampled.
pub const PROBE_NAMES: [&str; 9] = [
    "mass",
    "energy",
    "modified_energy",
    "hs_norm",
    "l4_norm4",
    "morawetz_action",
    "commutator",
    "lambda_m4",
    "lambda_m6",
];

/// Initial data choices available from a config file. Richer data (multi-bump
/// trains, hand-built spectra) stays a library-level affair.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Gaussian { amplitude: f64, width: f64 },
    Rough { spec: RoughSpec, seed: u64 },
}

/// Everything a run needs, with defaults chosen so that the empty config is
/// a valid small 3d run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub modes: usize,
    pub length: f64,
    pub gamma: f64,
    pub threshold: f64,
    pub s: f64,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub integrator: Integrator,
    pub sample_every: usize,
    pub snapshot_every: Option<usize>,
    pub probes: Vec<String>,
    pub data: DataSpec,
    pub sweep_thresholds: Vec<f64>,
    pub sweep_window: f64,
    pub sweep_control: bool,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            dimension: 3,
            modes: 64,
            length: 16.0,
            gamma: 2.5,
            threshold: 4.0,
            s: 0.6,
            dt: 0.01,
            t_final: 0.5,
            dealias: true,
            integrator: Integrator::Strang,
            sample_every: 5,
            snapshot_every: None,
            probes: vec![
                "mass".into(),
                "energy".into(),
                "modified_energy".into(),
                "hs_norm".into(),
            ],
            data: DataSpec::Rough {
                spec: RoughSpec { s_data: 0.6, shells: 3, envelope_width: 2.0, amplitude: 0.5 },
                seed: 7,
            },
            sweep_thresholds: vec![2.0, 4.0],
            sweep_window: 0.5,
            sweep_control: true,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.dimension, self.modes, self.length)
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.dimension, self.gamma)
    }

    pub fn smoothing(&self) -> Result<IParams> {
        IParams::new(self.threshold, self.s)
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            dt: self.dt,
            t_final: self.t_final,
            dealias: self.dealias,
            sample_every: self.sample_every,
            integrator: self.integrator,
            snapshot_every: self.snapshot_every,
        }
    }

    /// Resolve the configured probe names against the smoothing parameters.
    pub fn probe_list(&self) -> Result<Vec<Probe>> {
        let p = self.smoothing()?;
        self.probes
            .iter()
            .map(|name| match name.as_str() {
                "mass" => Ok(Probe::Mass),
                "energy" => Ok(Probe::Energy),
                "modified_energy" => Ok(Probe::ModifiedEnergy(p)),
                "hs_norm" => Ok(Probe::SobolevNorm { s: self.s, homogeneous: false }),
                "l4_norm4" => Ok(Probe::L4Norm4),
                "morawetz_action" => Ok(Probe::MorawetzAction),
                "commutator" => Ok(Probe::CommutatorNorm { p, derivative: true }),
                "lambda_m4" => Ok(Probe::LambdaM4(p)),
                "lambda_m6" => Ok(Probe::LambdaM6(p)),
                other => Err(LabError::InvalidParam(format!("unknown probe {other:?}"))),
            })
            .collect()
    }

    /// Build the configured initial data on the given grid.
    pub fn initial_field(&self, grid: &Grid) -> Result<Field> {
        match &self.data {
            DataSpec::Gaussian { amplitude, width } => {
                let center = vec![0.0; grid.d()];
                Ok(gaussian(grid, *amplitude, *width, &center))
            }
            DataSpec::Rough { spec, seed } => rough_noise(grid, spec, *seed),
        }
    }

    /// Sweep settings assembled from the config. Sweeps draw rough data.
    pub fn sweep_spec(&self) -> Result<crate::experiments::SweepSpec> {
        let (spec, seed) = match &self.data {
            DataSpec::Rough { spec, seed } => (spec.clone(), *seed),
            DataSpec::Gaussian { .. } => {
                return Err(LabError::InvalidParam(
                    "sweeps need rough initial data: set data.kind = \"rough\"".into(),
                ))
            }
        };
        Ok(crate::experiments::SweepSpec {
            thresholds: self.sweep_thresholds.clone(),
            s: self.s,
            mp: self.model()?,
            grid_n: self.modes,
            grid_len: self.length,
            data: spec,
            seed,
            dt: self.dt,
            window: self.sweep_window,
            dealias: self.dealias,
            sample_every: self.sample_every,
            control_s1: self.sweep_control,
        })
    }

    /// All rule violations, in schema order. Empty means the config is sound.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let grid_ok = match make_grid(self.dimension, self.modes, self.length) {
            Ok(_) => true,
            Err(e) => {
                v.push(format!("grid: {e}"));
                false
            }
        };
        if let Err(e) = ModelParams::new(self.dimension.max(1), self.gamma) {
            v.push(format!("model: {e}"));
        }
        if let Err(e) = IParams::new(self.threshold, self.s) {
            v.push(format!("smoothing: {e}"));
        }
        if grid_ok {
            let nyquist = std::f64::consts::PI * self.modes as f64 / self.length;
            if !(2.0 * self.threshold < nyquist) {
                v.push(format!(
                    "smoothing.threshold crowds the grid cutoff: need 2N < πn/L = {:.4}, got 2N = {}",
                    nyquist,
                    2.0 * self.threshold
                ));
            }
            let dx = self.length / self.modes as f64;
            let dt_cap = dx * dx / std::f64::consts::PI;
            if !(self.dt > 0.0) || !self.dt.is_finite() {
                v.push("evolution.dt must be positive and finite".into());
            } else if self.dt >= dt_cap {
                v.push(format!(
                    "evolution.dt breaks the stability rule dt < Δx²/π = {:.4e}, got {:.4e}",
                    dt_cap, self.dt
                ));
            }
            for &t in &self.sweep_thresholds {
                if !(2.0 * t < nyquist) {
                    v.push(format!(
                        "sweep.thresholds entry {t} crowds the grid cutoff: need 2N < πn/L = {nyquist:.4}"
                    ));
                }
            }
            if let DataSpec::Rough { spec, .. } = &self.data {
                let cap = (2.0f64).powi(spec.shells as i32);
                if cap >= nyquist {
                    v.push(format!(
                        "data.shells too deep: shell cap 2^{} = {cap} reaches the Nyquist frequency {nyquist:.4}",
                        spec.shells
                    ));
                }
            }
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            v.push("evolution.t_final must be finite and nonnegative".into());
        }
        if self.sample_every == 0 {
            v.push("evolution.sample_every must be at least 1".into());
        }
        if self.probes.is_empty() {
            v.push("evolution.probes must name at least one probe".into());
        }
        for name in &self.probes {
            if !PROBE_NAMES.contains(&name.as_str()) {
                v.push(format!(
                    "evolution.probes: unknown probe {name:?}, expected one of {PROBE_NAMES:?}"
                ));
            }
        }
        match &self.data {
            DataSpec::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() {
                    v.push("data.amplitude must be finite".into());
                }
                if !(*width > 0.0) || !width.is_finite() {
                    v.push("data.width must be positive and finite".into());
                }
            }
            DataSpec::Rough { spec, .. } => {
                if !spec.s_data.is_finite() {
                    v.push("data.s_data must be finite".into());
                }
                if !spec.amplitude.is_finite() {
                    v.push("data.amplitude must be finite".into());
                }
                if !(spec.envelope_width > 0.0) || !spec.envelope_width.is_finite() {
                    v.push("data.envelope_width must be positive and finite".into());
                }
            }
        }
        if self.sweep_thresholds.is_empty() {
            v.push("sweep.thresholds must not be empty".into());
        }
        for &t in &self.sweep_thresholds {
            // dyadic check only; s is reported once above
            if let Err(e) = IParams::new(t, 0.5) {
                v.push(format!("sweep.thresholds: {e}"));
            }
        }
        if !(self.sweep_window > 0.0) || !self.sweep_window.is_finite() {
            v.push("sweep.window must be positive and finite".into());
        }
        v
    }

    /// The config as a TOML table, with every field spelled out. Writing this
    /// next to a run's outputs records the full input; the table parses back
    /// to an identical config.
    pub fn manifest(&self) -> Table {
        let mut grid = Table::new();
        grid.insert("dimension".into(), Value::Integer(self.dimension as i64));
        grid.insert("modes".into(), Value::Integer(self.modes as i64));
        grid.insert("length".into(), Value::Float(self.length));

        let mut model = Table::new();
        model.insert("gamma".into(), Value::Float(self.gamma));

        let mut smoothing = Table::new();
        smoothing.insert("threshold".into(), Value::Float(self.threshold));
        smoothing.insert("s".into(), Value::Float(self.s));

        let mut evolution = Table::new();
        evolution.insert("dt".into(), Value::Float(self.dt));
        evolution.insert("t_final".into(), Value::Float(self.t_final));
        evolution.insert("dealias".into(), Value::Boolean(self.dealias));
        let integ = match self.integrator {
            Integrator::Strang => "strang",
            Integrator::ReferenceRk4 => "rk4",
        };
        evolution.insert("integrator".into(), Value::String(integ.into()));
        evolution.insert("sample_every".into(), Value::Integer(self.sample_every as i64));
        evolution.insert(
            "snapshot_every".into(),
            Value::Integer(self.snapshot_every.unwrap_or(0) as i64),
        );
        evolution.insert(
            "probes".into(),
            Value::Array(self.probes.iter().map(|p| Value::String(p.clone())).collect()),
        );

        let mut data = Table::new();
        match &self.data {
            DataSpec::Gaussian { amplitude, width } => {
                data.insert("kind".into(), Value::String("gaussian".into()));
                data.insert("amplitude".into(), Value::Float(*amplitude));
                data.insert("width".into(), Value::Float(*width));
            }
            DataSpec::Rough { spec, seed } => {
                data.insert("kind".into(), Value::String("rough".into()));
                data.insert("amplitude".into(), Value::Float(spec.amplitude));
                data.insert("s_data".into(), Value::Float(spec.s_data));
                data.insert("shells".into(), Value::Integer(spec.shells as i64));
                data.insert("envelope_width".into(), Value::Float(spec.envelope_width));
                data.insert("seed".into(), Value::Integer(*seed as i64));
            }
        }

        let mut sweep = Table::new();
        sweep.insert(
            "thresholds".into(),
            Value::Array(self.sweep_thresholds.iter().map(|&t| Value::Float(t)).collect()),
        );
        sweep.insert("window".into(), Value::Float(self.sweep_window));
        sweep.insert("control_s1".into(), Value::Boolean(self.sweep_control));

        let mut root = Table::new();
        root.insert("grid".into(), Value::Table(grid));
        root.insert("model".into(), Value::Table(model));
        root.insert("smoothing".into(), Value::Table(smoothing));
        root.insert("evolution".into(), Value::Table(evolution));
        root.insert("data".into(), Value::Table(data));
        root.insert("sweep".into(), Value::Table(sweep));
        root
    }
}

fn take_table(root: &mut Table, name: &str, errs: &mut Vec<String>) -> Table {
    match root.remove(name) {
        None => Table::new(),
        Some(Value::Table(t)) => t,
        Some(other) => {
            errs.push(format!("{name}: expected a table, found {}", other.type_str()));
            Table::new()
        }
    }
}

fn take_f64(tbl: &mut Table, section: &str, key: &str, default: f64, errs: &mut Vec<String>) -> f64 {
    match tbl.remove(key) {
        None => default,
        Some(Value::Float(x)) => x,
        Some(Value::Integer(i)) => i as f64,
        Some(other) => {
            errs.push(format!("{section}.{key}: expected a number, found {}", other.type_str()));
            default
        }
    }
}

fn take_usize(tbl: &mut Table, section: &str, key: &str, default: usize, errs: &mut Vec<String>) -> usize {
    match tbl.remove(key) {
        None => default,
        Some(Value::Integer(i)) if i >= 0 => i as usize,
        Some(other) => {
            errs.push(format!(
                "{section}.{key}: expected a nonnegative integer, found {other}"
            ));
            default
        }
    }
}

fn take_u64(tbl: &mut Table, section: &str, key: &str, default: u64, errs: &mut Vec<String>) -> u64 {
    match tbl.remove(key) {
        None => default,
        Some(Value::Integer(i)) if i >= 0 => i as u64,
        Some(other) => {
            errs.push(format!(
                "{section}.{key}: expected a nonnegative integer, found {other}"
            ));
            default
        }
    }
}

fn take_bool(tbl: &mut Table, section: &str, key: &str, default: bool, errs: &mut Vec<String>) -> bool {
    match tbl.remove(key) {
        None => default,
        Some(Value::Boolean(b)) => b,
        Some(other) => {
            errs.push(format!("{section}.{key}: expected a boolean, found {}", other.type_str()));
            default
        }
    }
}

fn take_string(
    tbl: &mut Table,
    section: &str,
    key: &str,
    default: &str,
    errs: &mut Vec<String>,
) -> String {
    match tbl.remove(key) {
        None => default.to_string(),
        Some(Value::String(s)) => s,
        Some(other) => {
            errs.push(format!("{section}.{key}: expected a string, found {}", other.type_str()));
            default.to_string()
        }
    }
}

fn take_f64_array(
    tbl: &mut Table,
    section: &str,
    key: &str,
    default: &[f64],
    errs: &mut Vec<String>,
) -> Vec<f64> {
    match tbl.remove(key) {
        None => default.to_vec(),
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::Float(x) => out.push(x),
                    Value::Integer(i) => out.push(i as f64),
                    other => {
                        errs.push(format!(
                            "{section}.{key}: expected an array of numbers, found {}",
                            other.type_str()
                        ));
                        return default.to_vec();
                    }
                }
            }
            out
        }
        Some(other) => {
            errs.push(format!(
                "{section}.{key}: expected an array of numbers, found {}",
                other.type_str()
            ));
            default.to_vec()
        }
    }
}

fn take_string_array(
    tbl: &mut Table,
    section: &str,
    key: &str,
    default: &[String],
    errs: &mut Vec<String>,
) -> Vec<String> {
    match tbl.remove(key) {
        None => default.to_vec(),
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::String(s) => out.push(s),
                    other => {
                        errs.push(format!(
                            "{section}.{key}: expected an array of strings, found {}",
                            other.type_str()
                        ));
                        return default.to_vec();
                    }
                }
            }
            out
        }
        Some(other) => {
            errs.push(format!(
                "{section}.{key}: expected an array of strings, found {}",
                other.type_str()
            ));
            default.to_vec()
        }
    }
}

fn reject_leftovers(tbl: &Table, section: &str, errs: &mut Vec<String>) {
    for key in tbl.keys() {
        if section.is_empty() {
            errs.push(format!("unknown key {key}"));
        } else {
            errs.push(format!("unknown key {section}.{key}"));
        }
    }
}

/// Parse a TOML config. On failure the error lists every violation found:
/// syntax, schema (unknown keys, wrong types), and cross-field rules.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, Vec<String>> {
    let mut root: Table = match text.parse::<Table>() {
        Ok(t) => t,
        Err(e) => return Err(vec![format!("toml syntax: {e}")]),
    };
    let mut errs = Vec::new();
    let defaults = RunConfig::default();
    let mut cfg = defaults.clone();

    let mut grid = take_table(&mut root, "grid", &mut errs);
    cfg.dimension = take_usize(&mut grid, "grid", "dimension", defaults.dimension, &mut errs);
    cfg.modes = take_usize(&mut grid, "grid", "modes", defaults.modes, &mut errs);
    cfg.length = take_f64(&mut grid, "grid", "length", defaults.length, &mut errs);
    reject_leftovers(&grid, "grid", &mut errs);

    let mut model = take_table(&mut root, "model", &mut errs);
    cfg.gamma = take_f64(&mut model, "model", "gamma", defaults.gamma, &mut errs);
    reject_leftovers(&model, "model", &mut errs);

    let mut smoothing = take_table(&mut root, "smoothing", &mut errs);
    cfg.threshold = take_f64(&mut smoothing, "smoothing", "threshold", defaults.threshold, &mut errs);
    cfg.s = take_f64(&mut smoothing, "smoothing", "s", defaults.s, &mut errs);
    reject_leftovers(&smoothing, "smoothing", &mut errs);

    let mut evolution = take_table(&mut root, "evolution", &mut errs);
    cfg.dt = take_f64(&mut evolution, "evolution", "dt", defaults.dt, &mut errs);
    cfg.t_final = take_f64(&mut evolution, "evolution", "t_final", defaults.t_final, &mut errs);
    cfg.dealias = take_bool(&mut evolution, "evolution", "dealias", defaults.dealias, &mut errs);
    let integ = take_string(&mut evolution, "evolution", "integrator", "strang", &mut errs);
    cfg.integrator = match integ.as_str() {
        "strang" => Integrator::Strang,
        "rk4" => Integrator::ReferenceRk4,
        other => {
            errs.push(format!(
                "evolution.integrator: unknown integrator {other:?}, expected \"strang\" or \"rk4\""
            ));
            Integrator::Strang
        }
    };
    cfg.sample_every =
        take_usize(&mut evolution, "evolution", "sample_every", defaults.sample_every, &mut errs);
    let snap = take_usize(&mut evolution, "evolution", "snapshot_every", 0, &mut errs);
    cfg.snapshot_every = if snap == 0 { None } else { Some(snap) };
    cfg.probes = take_string_array(&mut evolution, "evolution", "probes", &defaults.probes, &mut errs);
    reject_leftovers(&evolution, "evolution", &mut errs);

    let mut data = take_table(&mut root, "data", &mut errs);
    let kind = take_string(&mut data, "data", "kind", "rough", &mut errs);
    cfg.data = match kind.as_str() {
        "gaussian" => {
            let amplitude = take_f64(&mut data, "data", "amplitude", 0.5, &mut errs);
            let width = take_f64(&mut data, "data", "width", 2.0, &mut errs);
            DataSpec::Gaussian { amplitude, width }
        }
        "rough" => {
            let amplitude = take_f64(&mut data, "data", "amplitude", 0.5, &mut errs);
            let s_data = take_f64(&mut data, "data", "s_data", 0.6, &mut errs);
            let shells = take_usize(&mut data, "data", "shells", 3, &mut errs);
            let envelope_width = take_f64(&mut data, "data", "envelope_width", 2.0, &mut errs);
            let seed = take_u64(&mut data, "data", "seed", 7, &mut errs);
            DataSpec::Rough {
                spec: RoughSpec { s_data, shells: shells as u32, envelope_width, amplitude },
                seed,
            }
        }
        other => {
            errs.push(format!(
                "data.kind: unknown kind {other:?}, expected \"gaussian\" or \"rough\""
            ));
            defaults.data.clone()
        }
    };
    reject_leftovers(&data, "data", &mut errs);

    let mut sweep = take_table(&mut root, "sweep", &mut errs);
    cfg.sweep_thresholds =
        take_f64_array(&mut sweep, "sweep", "thresholds", &defaults.sweep_thresholds, &mut errs);
    cfg.sweep_window = take_f64(&mut sweep, "sweep", "window", defaults.sweep_window, &mut errs);
    cfg.sweep_control =
        take_bool(&mut sweep, "sweep", "control_s1", defaults.sweep_control, &mut errs);
    reject_leftovers(&sweep, "sweep", &mut errs);

    reject_leftovers(&root, "", &mut errs);

    errs.extend(cfg.violations());
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(errs)
    }
}

/// Read and parse a config file. IO problems count as one violation.
pub fn load_config(path: &Path) -> std::result::Result<RunConfig, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("{}: {e}", path.display())])?;
    parse_config(&text)
}
