//! Run configuration: built-in defaults, then a flat `key=value` file, then
//! command-line flags.

use std::path::{Path, PathBuf};

use axipot::Params;

/// Flags shared by every command. `None` means "not given".
#[derive(Debug, Default, Clone, clap::Args)]
pub struct CommonArgs {
    /// Weight exponent, 0 < 2·alpha < 1
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Hemisphere radius
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Polar rows of the surface mesh
    #[arg(long, global = true)]
    pub ntheta: Option<usize>,
    /// Azimuthal columns of the surface mesh (default 2·ntheta)
    #[arg(long, global = true)]
    pub nphi: Option<usize>,
    /// Radial rows of the base disk (default ntheta)
    #[arg(long, global = true)]
    pub nr: Option<usize>,
    /// Polar grading exponent toward the rim
    #[arg(long, global = true)]
    pub grading: Option<f64>,
    /// Tolerance for the pass/fail check of the command
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized probe points
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// key=value configuration file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub radius: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_r: usize,
    pub grading: f64,
    pub tol: f64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub output_path: Option<PathBuf>,
}

/// Per-command fallbacks for values the user did not set.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub n_theta: usize,
    pub tol: f64,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("config key `{key}`: cannot parse `{v}`"))
}

/// Reads a `key=value` file into `args`, leaving already-set fields alone.
fn merge_file(args: &mut CommonArgs, path: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value, got `{line}`", i + 1))?;
        let (key, value) = (key.trim().replace(['-', '_'], ""), value.trim());
        match key.as_str() {
            "alpha" => args.alpha = args.alpha.or(Some(parse_value(&key, value)?)),
            "radius" => args.radius = args.radius.or(Some(parse_value(&key, value)?)),
            "ntheta" => args.ntheta = args.ntheta.or(Some(parse_value(&key, value)?)),
            "nphi" => args.nphi = args.nphi.or(Some(parse_value(&key, value)?)),
            "nr" => args.nr = args.nr.or(Some(parse_value(&key, value)?)),
            "grading" => args.grading = args.grading.or(Some(parse_value(&key, value)?)),
            "tol" => args.tol = args.tol.or(Some(parse_value(&key, value)?)),
            "seed" => args.seed = args.seed.or(Some(parse_value(&key, value)?)),
            "threads" => args.threads = args.threads.or(Some(parse_value(&key, value)?)),
            "out" | "outputpath" => args.out = args.out.clone().or(Some(PathBuf::from(value))),
            _ => {
                return Err(format!("config line {}: unknown key `{}`", i + 1, line.split('=').next().unwrap().trim()))
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, defaults: Defaults) -> Result<Self, String> {
        let mut args = args.clone();
        if let Some(path) = args.config.clone() {
            merge_file(&mut args, &path)?;
        }
        let n_theta = args.ntheta.unwrap_or(defaults.n_theta);
        let cfg = RunConfig {
            alpha: args.alpha.unwrap_or(0.25),
            radius: args.radius.unwrap_or(1.0),
            n_theta,
            n_phi: args.nphi.unwrap_or(2 * n_theta),
            n_r: args.nr.unwrap_or(n_theta),
            grading: args.grading.unwrap_or(3.0),
            tol: args.tol.unwrap_or(defaults.tol),
            seed: args.seed.unwrap_or(0),
            threads: args.threads,
            output_path: args.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        Params::new(3, self.alpha).map_err(|e| e.to_string())?;
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(format!("radius must be positive, got {}", self.radius));
        }
        for (name, n) in [("ntheta", self.n_theta), ("nphi", self.n_phi), ("nr", self.n_r)] {
            if n < 4 {
                return Err(format!("{name} must be at least 4, got {n}"));
            }
        }
        if !(self.grading >= 1.0) {
            return Err(format!("grading must be at least 1, got {}", self.grading));
        }
        if !(self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if self.threads == Some(0) {
            return Err("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        Params::new(3, self.alpha).expect("validated")
    }
}
