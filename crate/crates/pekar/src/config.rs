//! Run configuration: built-in defaults, then a `key = value` file, then flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pekar_core::solver::Method;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Shooting,
    Scf,
}

impl MethodArg {
    pub fn method(self) -> Method {
        match self {
            MethodArg::Shooting => Method::Shooting,
            MethodArg::Scf => Method::Scf,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, true).ok()
    }
}

/// Fully resolved settings. Paths are kept out of the serialized form so that
/// reports written to different files stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub radius: f64,
    pub grid: usize,
    pub method: MethodArg,
    pub tol_el: f64,
    pub l_max: u32,
    /// `None` means the command's own default.
    pub samples: Option<usize>,
    pub seed: u64,
    pub radii: Vec<f64>,
    /// Cells per unit radius for sweeps.
    pub density: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub solution: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            grid: 2000,
            method: MethodArg::Shooting,
            tol_el: 1e-6,
            l_max: 6,
            samples: None,
            seed: 0,
            radii: vec![2.0, 4.0, 8.0, 12.0, 16.0],
            density: 500.0,
            out: None,
            solution: None,
        }
    }
}

/// Flag values; `None` leaves the lower layer in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub radius: Option<f64>,
    pub grid: Option<usize>,
    pub method: Option<MethodArg>,
    pub tol_el: Option<f64>,
    pub l_max: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub radii: Option<Vec<f64>>,
    pub density: Option<f64>,
    pub out: Option<PathBuf>,
    pub solution: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| usage(format!("bad value for {key}: {v:?}")))
}

pub fn parse_radii(v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| num::<f64>("radii", s.trim())).collect()
}

impl RunConfig {
    /// Applies one `key = value` pair; keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key.replace('-', "_").as_str() {
            "radius" => self.radius = num(key, value)?,
            "grid" => self.grid = num(key, value)?,
            "method" => {
                self.method = MethodArg::parse(value).ok_or_else(|| usage(format!("unknown method {value:?}")))?
            }
            "tol_el" => self.tol_el = num(key, value)?,
            "l_max" => self.l_max = num(key, value)?,
            "samples" => self.samples = Some(num(key, value)?),
            "seed" => self.seed = num(key, value)?,
            "radii" => self.radii = parse_radii(value)?,
            "density" => self.density = num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "solution" => self.solution = Some(PathBuf::from(value)),
            _ => return Err(usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_file_text(&mut self, text: &str) -> Result<(), CliError> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", no + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        take!(radius, grid, method, tol_el, l_max, seed, radii, density);
        if o.samples.is_some() {
            self.samples = o.samples;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        if o.solution.is_some() {
            self.solution = o.solution;
        }
    }

    /// Layers defaults, the optional file and the flags.
    pub fn resolve(file: Option<&Path>, flags: Overrides) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        if let Some(p) = file {
            cfg.apply_file(p)?;
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.radius) {
            return Err(usage(format!("radius must be positive, got {}", self.radius)));
        }
        if self.grid < pekar_core::grid::MIN_CELLS {
            return Err(usage(format!("grid must have at least {} cells", pekar_core::grid::MIN_CELLS)));
        }
        if !pos(self.tol_el) {
            return Err(usage("tol-el must be positive"));
        }
        if self.samples == Some(0) {
            return Err(usage("samples must be positive"));
        }
        if self.radii.is_empty() || !self.radii.iter().all(|r| pos(*r)) {
            return Err(usage("radii must be a non-empty list of positive radii"));
        }
        if !pos(self.density) {
            return Err(usage("density must be positive"));
        }
        Ok(())
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}
