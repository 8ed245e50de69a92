//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 numerical
//! failure (non-convergence), 4 exact counting above the size ceiling.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::canonical::{fit, FitOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::covariance::{covariance_report, matrix_to_csv};
use crate::degrees::{classify_regime, is_graphical, scale_parameter, DegreeSequence, DEFAULT_REGIME_C};
use crate::distributions::degree_marginal;
use crate::entropy::{entropy_report, EntropyRequest};
use crate::error::Error;
use crate::io::{read_degree_file, with_schema};
use crate::microcanonical::{count_graphs, DEFAULT_CEILING};
use crate::sampler::{empirical_report, sample_graph};
use crate::scan::{rows_to_csv, run_scan, Family, ScanSpec, SCAN_SCHEMA};
use crate::verify::run_verification;

pub const CEILING_ENV: &str = "ENSEMBLE_GAP_CEILING";

pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const INVALID_INPUT: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const SIZE_CEILING: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "ensemble-gap", version, about = "Canonical vs microcanonical degree-constrained random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Degree file: integers separated by whitespace/commas, or {"n", "degrees"} JSON.
    #[arg(long, value_name = "FILE")]
    pub degrees: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

impl FitArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Args)]
pub struct CeilingArg {
    /// Largest n for exact counting (default: $ENSEMBLE_GAP_CEILING or 16).
    #[arg(long, value_name = "N")]
    pub ceiling: Option<usize>,
}

impl CeilingArg {
    fn resolve(&self) -> Result<usize, Error> {
        if let Some(c) = self.ceiling {
            return Ok(c);
        }
        match std::env::var(CEILING_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{CEILING_ENV}={v:?} is not an integer"))),
            Err(_) => Ok(DEFAULT_CEILING),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the canonical multipliers and print the model JSON.
    Fit {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Relative entropy report (exact, asymptotic, sparse).
    Entropy {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        asymptotic: bool,
        #[arg(long)]
        sparse: bool,
        #[command(flatten)]
        ceiling: CeilingArg,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Entropy table over a family of sequences.
    Scan {
        #[arg(long, value_enum, default_value = "regular")]
        family: Family,
        #[arg(long, default_value_t = 0.5)]
        k_frac: f64,
        /// Fixed degree for the regular families (overrides --k-frac).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.3)]
        k_min_frac: f64,
        #[arg(long, default_value_t = 0.7)]
        k_max_frac: f64,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Degree files for the file_list family.
        #[arg(long, value_delimiter = ',')]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        ceiling: CeilingArg,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
    /// Run the invariant suite on one sequence.
    Verify {
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        ceiling: CeilingArg,
    },
    /// Exact number of graphs realising the sequence.
    Count {
        #[arg(long, value_name = "FILE")]
        degrees: PathBuf,
        #[command(flatten)]
        ceiling: CeilingArg,
    },
    /// Covariance report (JSON) or the matrix Q (CSV).
    Covariance {
        #[command(flatten)]
        fit: FitArgs,
        /// Also report #{eigenvalues of Q <= R} and its ratio to alpha_n.
        #[arg(long, value_name = "R")]
        tail: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Sample from the fitted canonical ensemble.
    Sample {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Print one sampled graph as an edge list instead of statistics.
        #[arg(long)]
        edge_list: bool,
    },
    /// Marginal degree PMF of one node as CSV.
    Pmf {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value_t = 0)]
        node: usize,
    },
    /// Scale parameter and regime flags.
    Regime {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value_t = DEFAULT_REGIME_C)]
        c: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::BoundUndefined(_)
        | Error::SingularDiagonal(_) => exit::NON_CONVERGENCE,
        Error::TooLarge { .. } => exit::SIZE_CEILING,
        _ => exit::INVALID_INPUT,
    }
}

fn load_fit_domain(path: &Path) -> Result<DegreeSequence, Error> {
    let d = DegreeSequence::new(read_degree_file(path)?)?;
    if !is_graphical(&d) {
        return Err(Error::NotGraphical);
    }
    Ok(d)
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), Error> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { exit::INVALID_INPUT } else { exit::OK };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, Error> {
    match cmd {
        Command::Fit { fit: args, out: fmt } => {
            let model = fit(&load_fit_domain(&args.degrees)?, &args.options())?;
            match fmt {
                OutFormat::Json => print_json(out, &serde_json::to_value(model.to_file())?)?,
                OutFormat::Csv => {
                    writeln!(out, "node,theta,x,expected_degree")?;
                    let expected = crate::canonical::expected_degrees(&model);
                    for (i, ((t, x), e)) in model.theta().iter().zip(model.x()).zip(&expected).enumerate() {
                        writeln!(out, "{i},{t},{x},{e}")?;
                    }
                }
            }
        }
        Command::Entropy {
            fit: args,
            exact,
            asymptotic,
            sparse,
            ceiling,
            out: fmt,
        } => {
            let d = load_fit_domain(&args.degrees)?;
            let ceiling = ceiling.resolve()?;
            let request = if exact || asymptotic || sparse {
                EntropyRequest { exact, asymptotic, sparse }
            } else {
                EntropyRequest {
                    exact: d.n() <= ceiling,
                    ..EntropyRequest::ALL
                }
            };
            let report = entropy_report(&d, &args.options(), ceiling, request)?;
            match fmt {
                OutFormat::Json => print_json(out, &serde_json::to_value(&report)?)?,
                OutFormat::Csv => {
                    let row = crate::scan::ScanRow {
                        n: report.n,
                        degrees: report.degrees.clone(),
                        s_exact: report.s_exact,
                        s_asymptotic: report.s_asymptotic,
                        s_sparse: report.s_sparse,
                        alpha_n: Some(report.alpha_n),
                        s_alpha_exact: report.s_alpha_exact,
                        s_alpha_asymptotic: report.s_alpha_asymptotic,
                        ratio: report.ratio_exact_over_asymptotic,
                        status: "ok".into(),
                    };
                    write!(out, "{}", rows_to_csv(&[row]))?;
                }
            }
        }
        Command::Scan {
            family,
            k_frac,
            k,
            k_min_frac,
            k_max_frac,
            n_list,
            files,
            tol,
            max_iter,
            ceiling,
            out: fmt,
        } => {
            let spec = ScanSpec {
                family,
                k_frac,
                k,
                k_min_frac,
                k_max_frac,
                n_list,
                files,
            };
            let rows = run_scan(&spec, &FitOptions { tol, max_iter }, ceiling.resolve()?)?;
            match fmt {
                OutFormat::Csv => write!(out, "{}", rows_to_csv(&rows))?,
                OutFormat::Json => print_json(
                    out,
                    &serde_json::json!({ "schema": SCAN_SCHEMA, "spec": spec, "rows": rows }),
                )?,
            }
        }
        Command::Verify { fit: args, ceiling } => {
            let d = load_fit_domain(&args.degrees)?;
            let report = run_verification(&d, &args.options(), ceiling.resolve()?)?;
            print_json(out, &serde_json::to_value(&report)?)?;
            if !report.all_passed {
                return Ok(exit::VERIFY_FAILED);
            }
        }
        Command::Count { degrees, ceiling } => {
            let d = DegreeSequence::relaxed(read_degree_file(&degrees)?)?;
            let count = count_graphs(&d, ceiling.resolve()?)?;
            let v = serde_json::json!({
                "schema": "ensemble-gap/count/v1",
                "degrees": d.degrees(),
                "graphical": is_graphical(&d),
                "omega": count.omega.to_str_radix(10),
                "log_omega": count.log_omega.is_finite().then_some(count.log_omega),
            });
            print_json(out, &v)?;
        }
        Command::Covariance { fit: args, tail, out: fmt } => {
            let d = load_fit_domain(&args.degrees)?;
            let model = fit(&d, &args.options())?;
            let report = covariance_report(&model)?;
            match fmt {
                OutFormat::Csv => write!(out, "{}", matrix_to_csv(&report.q))?,
                OutFormat::Json => {
                    let mut v = with_schema("ensemble-gap/covariance/v1", &report)?;
                    if let Some(r) = tail {
                        let count = report.tail_count(r);
                        let alpha = scale_parameter(&d)?.alpha_n;
                        v["tail"] = serde_json::json!({
                            "r": r,
                            "count": count,
                            "alpha_n": alpha,
                            "ratio": count as f64 / alpha,
                        });
                    }
                    print_json(out, &v)?;
                }
            }
        }
        Command::Sample {
            fit: args,
            seed,
            samples,
            edge_list,
        } => {
            let model = fit(&load_fit_domain(&args.degrees)?, &args.options())?;
            if edge_list {
                write!(out, "{}", sample_graph(&model, seed).to_edge_list())?;
            } else {
                if samples < 2 {
                    return Err(Error::Parse("--samples must be at least 2".into()));
                }
                let report = empirical_report(&model, samples, seed);
                print_json(out, &with_schema("ensemble-gap/sample/v1", &report)?)?;
            }
        }
        Command::Pmf { fit: args, node } => {
            let model = fit(&load_fit_domain(&args.degrees)?, &args.options())?;
            write!(out, "{}", degree_marginal(&model, node)?.to_csv())?;
        }
        Command::Regime { fit: args, c, delta } => {
            let d = load_fit_domain(&args.degrees)?;
            let model = fit(&d, &args.options())?;
            let v = serde_json::json!({
                "schema": "ensemble-gap/regime/v1",
                "scale": scale_parameter(&d)?,
                "regime": classify_regime(&d, Some(&model), c, delta),
            });
            print_json(out, &v)?;
        }
    }
    Ok(exit::OK)
}
