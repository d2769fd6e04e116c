//! Command line and configuration file handling.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::si_space::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Constants,
    Spectrum,
    Experiment,
    Sweep,
    Verify,
}

/// Fully resolved run parameters; also the shape of a `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub generator: String,
    /// Sweep generators; empty means `[generator]`.
    pub generators: Vec<String>,
    pub dim: usize,
    /// Quadrature step `2^-grid`.
    pub grid: u32,
    pub seed: u64,
    /// Cube side; defaults to 8 for n = 1 and 4 for n = 2.
    #[serde(rename = "R")]
    pub r_cube: Option<f64>,
    #[serde(rename = "R_grid")]
    pub r_grid: Vec<f64>,
    #[serde(rename = "K")]
    pub truncation: Option<i64>,
    pub delta: Option<f64>,
    pub nu: f64,
    pub eps: f64,
    pub gamma: f64,
    pub trials: usize,
    pub samples: Option<u64>,
    pub test_functions: usize,
    /// Factor of a downward sweep in `s` after an experiment.
    pub sweep_down: Option<f64>,
    pub mc_samples: usize,
    pub sequential: bool,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Constants,
            generator: "bspline:2".into(),
            generators: Vec::new(),
            dim: 1,
            grid: 7,
            seed: 0,
            r_cube: None,
            r_grid: vec![2.0, 4.0, 8.0, 16.0],
            truncation: None,
            delta: None,
            nu: 0.3,
            eps: 0.1,
            gamma: 0.5,
            trials: 500,
            samples: None,
            test_functions: 20,
            sweep_down: None,
            mc_samples: 100_000,
            sequential: false,
            out: None,
            csv: None,
        }
    }
}

impl RunConfig {
    pub fn r(&self) -> f64 {
        self.r_cube.unwrap_or(if self.dim == 2 { 4.0 } else { 8.0 })
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { q: self.grid, ..GridSpec::default() }
    }

    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn sweep_generators(&self) -> Vec<String> {
        if self.generators.is_empty() {
            vec![self.generator.clone()]
        } else {
            self.generators.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Usage(format!("--{key}: {why}")));
        if !(1..=2).contains(&self.dim) {
            return bad("dim", format!("{} not in 1..=2", self.dim));
        }
        if !(4..=20).contains(&self.grid) {
            return bad("grid", format!("{} not in 4..=20", self.grid));
        }
        if let Some(r) = self.r_cube {
            if !(r > 0.0 && r.is_finite()) {
                return bad("R", format!("{r} must be positive"));
            }
        }
        if self.command == Command::Sweep {
            if self.r_grid.is_empty() {
                return bad("R-grid", "grid is empty".into());
            }
            if let Some(r) = self.r_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
                return bad("R-grid", format!("{r} must be positive"));
            }
        }
        if let Some(k) = self.truncation {
            if k < 0 {
                return bad("K", format!("{k} must be nonnegative"));
            }
        }
        for (key, v) in [("nu", Some(self.nu)), ("eps", Some(self.eps)), ("gamma", Some(self.gamma)), ("delta", self.delta)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return bad(key, format!("{v} not in (0, 1)"));
                }
            }
        }
        if let Some(f) = self.sweep_down {
            if !(f > 0.0 && f < 1.0) {
                return bad("sweep-down", format!("{f} not in (0, 1)"));
            }
        }
        if self.samples == Some(0) {
            return bad("samples", "must be at least 1".into());
        }
        if self.mc_samples < 2 {
            return bad("mc-samples", "must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "relsamp", version, about = "Random sampling experiments in shift-invariant spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Estimate the structural constants of a generator set.
    Constants(Flags),
    /// Spectrum of the localization operator on a cube.
    Spectrum(Flags),
    /// Monte Carlo test of the random sampling inequality.
    Experiment(Flags),
    /// Grid over generators and cube sizes.
    Sweep(Flags),
    /// Run the invariant suite; exits 1 on any violation.
    Verify(Flags),
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// JSON file with any `RunConfig` keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Generator spec such as `bspline:2` or `box,box@0.5/2`; repeat for sweeps.
    #[arg(long)]
    pub generator: Vec<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Quadrature step 2^-q.
    #[arg(long)]
    pub grid: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "R")]
    pub r_cube: Option<f64>,
    #[arg(long = "R-grid", value_delimiter = ',')]
    pub r_grid: Vec<f64>,
    #[arg(long = "K")]
    pub truncation: Option<i64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sample count; overrides the planned minimum.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub test_functions: Option<usize>,
    #[arg(long)]
    pub sweep_down: Option<f64>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Disable data parallelism.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn read_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

/// Merge parsed flags over the optional config file.
pub fn resolve(args: CommandArgs) -> Result<RunConfig> {
    let (command, f) = match args {
        CommandArgs::Constants(f) => (Command::Constants, f),
        CommandArgs::Spectrum(f) => (Command::Spectrum, f),
        CommandArgs::Experiment(f) => (Command::Experiment, f),
        CommandArgs::Sweep(f) => (Command::Sweep, f),
        CommandArgs::Verify(f) => (Command::Verify, f),
    };
    let mut c = match &f.config {
        Some(p) => read_config_file(p)?,
        None => RunConfig::default(),
    };
    c.command = command;
    match (command, f.generator.len()) {
        (_, 0) => {}
        (Command::Sweep, _) => {
            c.generator = f.generator[0].clone();
            c.generators = f.generator.clone();
        }
        (_, 1) => c.generator = f.generator[0].clone(),
        _ => return Err(Error::Usage("--generator: given more than once".into())),
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
    }
    macro_rules! set_opt {
        ($($field:ident),*) => { $( if f.$field.is_some() { c.$field = f.$field; } )* };
    }
    set!(dim, grid, seed, nu, eps, gamma, trials, test_functions, mc_samples);
    set_opt!(r_cube, truncation, delta, samples, sweep_down, out, csv);
    if !f.r_grid.is_empty() {
        c.r_grid = f.r_grid;
    }
    if f.sequential {
        c.sequential = true;
    }
    c.validate()?;
    Ok(c)
}

/// Parse an argument vector (program name first).
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    resolve(cli.command)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_flags() {
        let c = parse_config(["relsamp", "spectrum", "--generator", "bspline:2", "--dim", "1", "--R", "8"]).unwrap();
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.generator, "bspline:2");
        assert_eq!((c.dim, c.r_cube), (1, Some(8.0)));
    }

    #[test]
    fn unknown_flag_named() {
        let e = parse_config(["relsamp", "spectrum", "--foo"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("--foo"));
    }

    #[test]
    fn flag_beats_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"generator": "box", "R": 4.0, "nu": 0.2}"#).unwrap();
        let c = parse_config(["relsamp", "spectrum", "--config", p.to_str().unwrap(), "--R", "6"]).unwrap();
        assert_eq!(c.generator, "box");
        assert_eq!(c.r_cube, Some(6.0));
        assert_eq!(c.nu, 0.2);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
        let e = parse_config(["relsamp", "constants", "--config", p.to_str().unwrap()]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("bogus"));
        let e = parse_config(["relsamp", "constants", "--config", "/nonexistent/c.json"]).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn ranges_checked() {
        assert!(parse_config(["relsamp", "experiment", "--nu", "1.5"]).is_err());
        assert!(parse_config(["relsamp", "sweep", "--dim", "3"]).is_err());
        assert!(parse_config(["relsamp", "constants", "--generator", "box", "--generator", "box"]).is_err());
        let c = parse_config(["relsamp", "sweep", "--generator", "box", "--generator", "bspline:2", "--R-grid", "2,4"]).unwrap();
        assert_eq!(c.sweep_generators(), vec!["box".to_string(), "bspline:2".to_string()]);
        assert_eq!(c.r_grid, vec![2.0, 4.0]);
    }
}
