//! Flag definitions and the JSON config file that mirrors them.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use subfrac::bernstein::BernsteinSpec;
use subfrac::kernels::HeatKernelSpec;
use subfrac::validate::logspace;
use subfrac::Error;

#[derive(Debug, Parser)]
#[command(
    name = "subfrac",
    version,
    about = "Subordinators, fundamental solutions and estimate validation"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SUBFRAC_WORKERS")]
    pub workers: Option<usize>,

    /// JSON file whose keys mirror the flags; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Evaluate a quantity on a grid and write CSV or JSON.
    Eval {
        #[arg(value_enum)]
        what: EvalTarget,
        #[command(flatten)]
        args: EvalArgs,
    },
    /// Run an acceptance suite and print a pass/fail table.
    Validate {
        /// scaling, unimodality, sub-envelope, identities, conjugate, q-envelope, pde, montecarlo or all.
        suite: String,
        #[command(flatten)]
        args: ValidateArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalTarget {
    Phi,
    Density,
    InverseDensity,
    Potential,
    Qkernel,
    Pkernel,
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    /// Laplace exponent: `stable:β` or `mixture:w1@β1,w2@β2`.
    #[arg(long)]
    pub spec: Option<String>,
    /// Shorthand for `--spec stable:β`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Base kernel: gaussian, cauchy, stable, jump or diffusion.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Kernel index α (stable kernels and envelopes).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimension for envelope kernels.
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    /// Grids are `min:max:count` (log-spaced) or `lin:min:max:count`.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long)]
    pub r_grid: Option<String>,
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub z_grid: Option<String>,
    #[arg(long)]
    pub x_grid: Option<String>,
    /// Source for `solve`: none or cos (f = cos x).
    #[arg(long)]
    pub source: Option<String>,
    /// Initial data for `solve`: none or gaussian (g = e^{-x²}).
    #[arg(long)]
    pub initial: Option<String>,
    /// Relative tolerance of the density evaluator.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateArgs {
    /// Halve grid densities and relax tolerances 5×.
    #[arg(long)]
    #[serde(default)]
    pub quick: bool,
    #[arg(long)]
    pub beta: Option<f64>,
    /// cauchy or gaussian (q-envelope suite).
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path (default: validate-<suite>.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Overlays the flags that were set on the contents of the config file.
pub fn merge<T: Clone + Serialize + serde::de::DeserializeOwned>(
    cli: &T,
    config: Option<&PathBuf>,
) -> subfrac::Result<T> {
    let Some(path) = config else {
        return Ok(cli.clone());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let file: Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    // keys may be spelled like the flags (`t-grid`) or like the fields (`t_grid`)
    let mut base: Map<String, Value> = file.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect();
    if let Value::Object(flags) = serde_json::to_value(cli).map_err(config_error)? {
        for (k, v) in flags {
            if !v.is_null() && v != Value::Bool(false) {
                base.insert(k, v);
            }
        }
    }
    for v in base.values_mut() {
        // objects are accepted for structured fields and passed on as JSON text
        if v.is_object() {
            *v = Value::String(v.to_string());
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn parse_grid(name: &str, s: &str) -> subfrac::Result<Vec<f64>> {
    let bad = |m: &str| Error::Config(format!("--{name} \"{s}\": {m}"));
    let parts: Vec<&str> = s.split(':').collect();
    let (linear, nums) = match parts.as_slice() {
        ["lin", rest @ ..] => (true, rest.to_vec()),
        _ => (false, parts.clone()),
    };
    let [a, b, n] = nums.as_slice() else {
        return Err(bad("expected min:max:count or lin:min:max:count"));
    };
    let a: f64 = a.trim().parse().map_err(|_| bad("min is not a number"))?;
    let b: f64 = b.trim().parse().map_err(|_| bad("max is not a number"))?;
    let n: usize = n.trim().parse().map_err(|_| bad("count is not an integer"))?;
    if n < 2 {
        return Err(bad("count must be at least 2"));
    }
    if linear {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(bad("need finite min < max"));
        }
        Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
    } else {
        logspace(a, b, n).map_err(|e| bad(&e.to_string()))
    }
}

/// The grid flag if present, else the single-value flag.
pub fn axis(name: &str, grid: &Option<String>, single: Option<f64>) -> subfrac::Result<Vec<f64>> {
    match (grid, single) {
        (Some(g), _) => parse_grid(&format!("{name}-grid"), g),
        (None, Some(v)) => Ok(vec![v]),
        (None, None) => Err(Error::Config(format!("one of --{name} or --{name}-grid is required"))),
    }
}

impl EvalArgs {
    pub fn bernstein(&self) -> subfrac::Result<BernsteinSpec> {
        match (&self.spec, self.beta) {
            (Some(s), _) if s.trim_start().starts_with('{') => {
                serde_json::from_str(s).map_err(|e| Error::Config(format!("spec: {e}")))
            }
            (Some(s), _) => s.parse(),
            (None, Some(b)) => BernsteinSpec::stable(b),
            (None, None) => Err(Error::Config("one of --spec or --beta is required".into())),
        }
    }

    pub fn heat_kernel(&self) -> subfrac::Result<HeatKernelSpec> {
        let Some(k) = &self.kernel else {
            return Err(Error::Config("--kernel is required".into()));
        };
        let json = if k.trim_start().starts_with('{') {
            k.clone()
        } else {
            let mut m = Map::new();
            m.insert("kind".into(), Value::String(k.clone()));
            if let Some(a) = self.alpha {
                m.insert("alpha".into(), a.into());
            }
            if let Some(d) = self.d {
                m.insert("d".into(), d.into());
            }
            Value::Object(m).to_string()
        };
        serde_json::from_str(&json).map_err(|e| Error::Config(format!("kernel: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("t-grid", "0.01:100:5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-14);
        assert_eq!(parse_grid("x-grid", "lin:-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        for bad in ["0:1:5", "1:2", "1:2:1", "a:2:3", "lin:1:1:3"] {
            assert!(parse_grid("t-grid", bad).is_err(), "{bad}");
        }
        assert_eq!(axis("r", &None, Some(2.0)).unwrap(), vec![2.0]);
        assert!(axis("r", &None, None).is_err());
    }

    #[test]
    fn specs_and_kernels() {
        let a = EvalArgs {
            beta: Some(0.5),
            kernel: Some("stable".into()),
            alpha: Some(1.5),
            ..Default::default()
        };
        assert_eq!(a.bernstein().unwrap(), BernsteinSpec::stable(0.5).unwrap());
        assert_eq!(a.heat_kernel().unwrap(), HeatKernelSpec::stable(1.5).unwrap());
        let b = EvalArgs {
            spec: Some(r#"{"kind":"stable","beta":0.3}"#.into()),
            ..Default::default()
        };
        assert_eq!(b.bernstein().unwrap(), BernsteinSpec::stable(0.3).unwrap());
        assert!(EvalArgs::default().bernstein().is_err());
        assert!(EvalArgs {
            kernel: Some("stable".into()),
            ..Default::default()
        }
        .heat_kernel()
        .is_err());
    }
}
