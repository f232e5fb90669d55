//! Argument surface, config-file merging, and dispatch.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Default violation tolerance on the command line. Looser than the
/// library's strict tolerance so that probabilities quoted to a few
/// significant digits (which alone perturb boundary-state margins by
/// around 1e-5) are not flagged; genuine detections in the bundled
/// families sit orders of magnitude above it.
pub const DEFAULT_CLI_TOL: f64 = 1e-4;

#[derive(Parser)]
#[command(
    name = "fockcert",
    version,
    about = "Certify bosonic nonclassicality from Fock-state probabilities"
)]
pub struct Cli {
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Primary output format; defaults to json for certify and csv for
    /// the other subcommands.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Violation tolerance, relative to each criterion's scale.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Flat key=value file supplying defaults for any long flag
    /// (kebab-case keys); explicit flags win on conflict.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
pub enum Command {
    /// Certify a probability vector: exit 0 = classical-compatible,
    /// 1 = nonclassical, 2 = input error.
    Certify(CertifyArgs),
    /// Evaluate criteria across one or two swept family parameters;
    /// emits one row per grid point plus detection intervals.
    Sweep(SweepArgs),
    /// Sample the boundary of the classical region in a probability
    /// slice: coherent curve plus ruled sheets or closure chord.
    Boundary(BoundaryArgs),
    /// Evaluate a state's Wigner function on a grid and report its
    /// minimum.
    Wigner(WignerArgs),
}

/// Parameters selecting a state family; which ones are consumed depends
/// on --family.
#[derive(Args, Clone, Default)]
pub struct FamilyArgs {
    /// State family: coherent | fock | thermal | noisy-fock |
    /// boson-added-coherent | prob-boson-added-coherent (alias
    /// mixed-boson-added-poisson) | boson-added-thermal |
    /// mixed-boson-added-thermal | thermally-averaged-fock |
    /// squeezed-thermal.
    #[arg(long)]
    pub family: Option<String>,

    /// Mean photon number.
    #[arg(long)]
    pub mu: Option<f64>,

    /// Mixing probability in [0, 1].
    #[arg(long)]
    pub p: Option<f64>,

    /// Fock index (noisy-fock; also accepted for fock).
    #[arg(long)]
    pub k: Option<usize>,

    /// Fock index (fock; also accepted for noisy-fock).
    #[arg(long)]
    pub n: Option<usize>,

    /// Number of added quanta (boson-added-coherent).
    #[arg(long)]
    pub ell: Option<usize>,

    /// Squeezing parameter (squeezed-thermal).
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
}

#[derive(Args)]
pub struct CertifyArgs {
    /// Inline probability vector "P0,P1,...". Treated as a truncated
    /// prefix when it sums to less than 1.
    #[arg(long)]
    pub probs: Option<String>,

    /// JSON file holding {"probs": [...], "truncated": bool}.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Force the inline vector to be treated as truncated.
    #[arg(long)]
    pub truncated: bool,

    #[command(flatten)]
    pub family: FamilyArgs,

    /// Truncation index when generating from a family.
    #[arg(long)]
    pub n_max: Option<usize>,

    /// Longest product-criterion tuple (default 4).
    #[arg(long)]
    pub max_tuple_len: Option<usize>,

    /// Cap on product-criterion indices (default: the vector's top index).
    #[arg(long)]
    pub majorization_n_max: Option<usize>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Truncation index for generated distributions (default 8).
    #[arg(long)]
    pub n_max: Option<usize>,

    /// Swept parameter name: mu, p, or xi (default mu).
    #[arg(long)]
    pub sweep: Option<String>,

    /// First value of the swept parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,

    /// Last value of the swept parameter (inclusive).
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,

    /// Grid spacing (> 0).
    #[arg(long)]
    pub step: Option<f64>,

    /// Optional second swept parameter (row-major inner loop; detection
    /// intervals are only computed for single-parameter sweeps).
    #[arg(long)]
    pub sweep2: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    pub start2: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub stop2: Option<f64>,

    #[arg(long)]
    pub step2: Option<f64>,

    /// Criterion id, repeatable: K1, Kk:3, Kinf:2, triple:0,1,3,
    /// maj:1,1|2,0. Default: K1 and Kinf:2.
    #[arg(long = "criteria", action = clap::ArgAction::Append)]
    pub criteria: Vec<String>,
}

#[derive(Args)]
pub struct BoundaryArgs {
    /// Probability slice as comma-separated indices: 0,K for a planar
    /// slice or 0,1,2 for the spatial one (default 0,1,2).
    #[arg(long)]
    pub slice: Option<String>,

    /// Samples along the coherent curve (default 200).
    #[arg(long)]
    pub samples: Option<usize>,

    /// Points per ruling segment or chord (default 21).
    #[arg(long)]
    pub rulings: Option<usize>,

    /// Largest coherent-curve parameter sampled (default 8).
    #[arg(long)]
    pub lambda_max: Option<f64>,
}

#[derive(Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Truncation index for Fock-diagonal states (default: grown until
    /// the missing tail is below 1e-13).
    #[arg(long)]
    pub n_max: Option<usize>,

    /// Half-width of the scanned phase-space region (default 6).
    #[arg(long)]
    pub radius: Option<f64>,

    /// Grid resolution: points per axis, or radial points for
    /// rotationally symmetric states (defaults 201 and 2001).
    #[arg(long)]
    pub grid: Option<usize>,
}

/// Keys every subcommand accepts from a config file.
const GLOBAL_KEYS: &[&str] = &["out", "format", "tol"];

/// Parsed key=value config file.
pub struct Config(HashMap<String, String>);

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(format!(
                        "config {}:{}: expected key=value, got {line:?}",
                        path.display(),
                        lineno + 1
                    ));
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    /// Reject keys the active subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        for key in self.0.keys() {
            if !allowed.contains(&key.as_str()) && !GLOBAL_KEYS.contains(&key.as_str()) {
                return Err(format!("unknown config key {key:?}"));
            }
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(text) => text
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {text:?}")),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, String> {
        match self.0.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(format!("config key {key}: expected true/false, got {other:?}")),
        }
    }
}

/// Global options after config merging.
pub struct GlobalOpts {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: f64,
}

pub fn run(cli: Cli) -> Result<u8, String> {
    let config = Config::load(cli.config.as_deref())?;
    let format = match (cli.format, config.get_str("format")) {
        (Some(f), _) => Some(f),
        (None, Some(text)) => match text.as_str() {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            other => return Err(format!("config key format: expected json or csv, got {other:?}")),
        },
        (None, None) => None,
    };
    let global = GlobalOpts {
        out: cli.out.or_else(|| config.get_str("out").map(PathBuf::from)),
        format,
        tol: match cli.tol {
            Some(t) => t,
            None => config.get_parsed::<f64>("tol")?.unwrap_or(DEFAULT_CLI_TOL),
        },
    };
    if !(global.tol >= 0.0) {
        return Err(format!("--tol must be nonnegative, got {}", global.tol));
    }
    match cli.command {
        Command::Certify(args) => certify::run(args, &config, &global),
        Command::Sweep(args) => sweep::run(args, &config, &global),
        Command::Boundary(args) => boundary::run(args, &config, &global),
        Command::Wigner(args) => wigner::run(args, &config, &global),
    }
}

use crate::{boundary, certify, sweep, wigner};

/// Fill family parameters that were not given as flags from the config.
pub fn merge_family(args: &FamilyArgs, config: &Config) -> Result<FamilyArgs, String> {
    Ok(FamilyArgs {
        family: args.family.clone().or_else(|| config.get_str("family")),
        mu: merge(args.mu, config, "mu")?,
        p: merge(args.p, config, "p")?,
        k: merge(args.k, config, "k")?,
        n: merge(args.n, config, "n")?,
        ell: merge(args.ell, config, "ell")?,
        xi: merge(args.xi, config, "xi")?,
    })
}

/// Flag value if present, else the config value.
pub fn merge<T: std::str::FromStr>(
    flag: Option<T>,
    config: &Config,
    key: &str,
) -> Result<Option<T>, String> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get_parsed::<T>(key),
    }
}
