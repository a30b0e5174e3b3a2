mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use subfrac::solutions::{duhamel_solve, kernel_field, Quantity, SolutionField};
use subfrac::subordinator::DensityEval;
use subfrac::validate::{run_suite, EnvelopeCase, Suite, ValidateOptions};
use subfrac::Error;

use config::{axis, merge, Cli, Command, EvalArgs, EvalTarget, Format, ValidateArgs};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

enum Failure {
    Lib(Error),
    Io(io::Error),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match &cli.command {
        Command::Eval { what, args } => merge(args, cli.config.as_ref())
            .map_err(Failure::from)
            .and_then(|a| eval(*what, &a)),
        Command::Validate { suite, args } => merge(args, cli.config.as_ref())
            .map_err(Failure::from)
            .and_then(|a| validate(suite, &a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) {
                EXIT_CONFIG
            } else {
                EXIT_NUMERIC
            })
        }
    }
}

fn sink(args: &EvalArgs) -> io::Result<Box<dyn Write>> {
    Ok(match &args.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of plain values, as CSV or a JSON array of objects.
fn write_table(args: &EvalArgs, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
    let mut out = sink(args)?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for row in rows {
                writeln!(out, "{}", row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","))?;
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    header
                        .iter()
                        .zip(row)
                        .map(|(h, v)| (h.to_string(), serde_json::json!(v)))
                        .collect()
                })
                .collect();
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&items).map_err(|e| Error::Config(e.to_string()))?
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_field(args: &EvalArgs, field: &SolutionField) -> Result<(), Failure> {
    let mut out = sink(args)?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => field.write_csv(&mut out)?,
        Format::Json => writeln!(out, "{}", field.to_json()?)?,
    }
    out.flush()?;
    Ok(())
}

fn grid2(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn evaluator(args: &EvalArgs) -> subfrac::Result<DensityEval> {
    let e = DensityEval::auto(args.bernstein()?);
    Ok(match args.tol {
        Some(t) if t > 0.0 => e.with_tol(t),
        Some(t) => return Err(Error::Config(format!("--tol {t} must be positive"))),
        None => e,
    })
}

fn eval(what: EvalTarget, args: &EvalArgs) -> Result<(), Failure> {
    use rayon::prelude::*;
    match what {
        EvalTarget::Phi => {
            let spec = args.bernstein()?;
            let rows = axis("lambda", &args.lambda_grid, args.lambda)?
                .into_iter()
                .map(|l| Ok(vec![l, spec.phi(l)?]))
                .collect::<subfrac::Result<Vec<_>>>()?;
            write_table(args, &["lambda", "phi"], &rows)
        }
        EvalTarget::Density => {
            let e = evaluator(args)?;
            let cells = grid2(&axis("r", &args.r_grid, args.r)?, &axis("t", &args.t_grid, args.t)?);
            let rows = cells
                .par_iter()
                .map(|&(r, t)| e.density_estimate(r, t).map(|v| vec![r, t, v.value, v.error]))
                .collect::<subfrac::Result<Vec<_>>>()?;
            write_table(args, &["r", "t", "value", "error"], &rows)
        }
        EvalTarget::InverseDensity => {
            let e = evaluator(args)?;
            let cells = grid2(&axis("t", &args.t_grid, args.t)?, &axis("r", &args.r_grid, args.r)?);
            let rows = cells
                .par_iter()
                .map(|&(t, r)| subfrac::solutions::inverse_density(&e, t, r).map(|v| vec![t, r, v]))
                .collect::<subfrac::Result<Vec<_>>>()?;
            write_table(args, &["t", "r", "value"], &rows)
        }
        EvalTarget::Potential => {
            let e = evaluator(args)?;
            let rows = axis("t", &args.t_grid, args.t)?
                .par_iter()
                .map(|&t| e.potential_density(t).map(|v| vec![t, v]))
                .collect::<subfrac::Result<Vec<_>>>()?;
            write_table(args, &["t", "value"], &rows)
        }
        EvalTarget::Qkernel | EvalTarget::Pkernel => {
            let e = evaluator(args)?;
            let k = args.heat_kernel()?;
            let q = if what == EvalTarget::Qkernel {
                Quantity::Q
            } else {
                Quantity::P
            };
            let field = kernel_field(
                q,
                &k,
                &e,
                &axis("t", &args.t_grid, args.t)?,
                &axis("z", &args.z_grid, args.z)?,
            )?;
            write_field(args, &field)
        }
        EvalTarget::Solve => {
            let e = evaluator(args)?;
            let k = args.heat_kernel()?;
            let times = axis("t", &args.t_grid, args.t)?;
            let xs = axis("x", &args.x_grid, None)?;
            let cos = |_: f64, y: f64| y.cos();
            let bump = |x: f64| (-x * x).exp();
            let f: Option<subfrac::solutions::Source<'_>> = match args.source.as_deref().unwrap_or("none") {
                "none" => None,
                "cos" => Some(&cos),
                other => return Err(Error::Config(format!("unknown source '{other}'; expected none or cos")).into()),
            };
            let g: Option<subfrac::solutions::InitialData<'_>> = match args.initial.as_deref().unwrap_or("none") {
                "none" => None,
                "gaussian" => Some(&bump),
                other => {
                    return Err(
                        Error::Config(format!("unknown initial data '{other}'; expected none or gaussian")).into(),
                    )
                }
            };
            if f.is_none() && g.is_none() {
                return Err(Error::Config("solve needs --source or --initial".into()).into());
            }
            let field = duhamel_solve(&k, &e, g, f, &times, &xs)?;
            write_field(args, &field)
        }
    }
}

fn validate(suite: &str, args: &ValidateArgs) -> Result<(), Failure> {
    let s: Suite = suite.parse()?;
    let case = args.case.as_deref().map(str::parse::<EnvelopeCase>).transpose()?;
    let mut opts = ValidateOptions {
        quick: args.quick,
        beta: args.beta,
        case,
        ..Default::default()
    };
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let report = run_suite(s, &opts)?;
    print!("{}", report.render());
    let path = args
        .report
        .clone()
        .unwrap_or_else(|| format!("validate-{s}.json").into());
    std::fs::write(&path, report.to_json()? + "\n")?;
    eprintln!("report written to {}", path.display());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}
