//! `glvortex` command-line front end.

mod config;
mod export;
mod failure;
mod sweep;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glvortex::asymptotics::{c_hat, c_tilde, defect_for, second_coeffs, select_envelope, Branch};
use glvortex::diagnostics::{
    monotonicity_classify, quantization_check, verify_suite, VerifyTolerances, DEFAULT_SLOPE_TOL,
};
use glvortex::model::Component;
use glvortex::solver::continuation_solve;
use glvortex::{FarField, Profile};
use serde::Serialize;
use serde_json::json;

use config::{load, Overrides};
use export::ExportKind;
use failure::{Failure, EXIT_CHECK, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "glvortex",
    version,
    about = "Radial vortex profiles of the two-component Ginzburg-Landau system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write the profile as JSON.
    Solve(RunArgs),
    /// Solve along a range of couplings B and write JSON plus CSV.
    Sweep(RunArgs),
    /// Run the named check suite on a stored profile.
    Verify {
        profile: PathBuf,
        /// Configuration whose `verify` section sets the tolerances.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail coefficients, envelope selection and exact defect coefficients.
    Asymptotics {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        branch: Option<BranchArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot data for a stored profile as CSV.
    Export {
        profile: PathBuf,
        #[arg(long, value_enum)]
        kind: ExportKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grid cells.
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Newton stopping tolerance on the sup-norm residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    far_field: Option<FarField>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid_n: self.grid_n,
            r_max: self.r_max,
            tol: self.tol,
            far_field: self.far_field,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    UpperPlusLowerMinus,
    LowerPlusUpperMinus,
    UpperBoth,
    LowerBoth,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::UpperPlusLowerMinus => Branch::UpperPlusLowerMinus,
            BranchArg::LowerPlusUpperMinus => Branch::LowerPlusUpperMinus,
            BranchArg::UpperBoth => Branch::UpperBoth,
            BranchArg::LowerBoth => Branch::LowerBoth,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output values serialize")
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::config_kind("Io", format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::config_kind("Io", format!("{}: {e}", path.display())))
}

/// Prints a line to standard output; a reader that has gone away is not an
/// error.
fn print_line(text: &str) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

/// Writes to the file when given, to standard output otherwise.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print_line(text);
            Ok(())
        }
    }
}

fn read_profile(path: &Path) -> Result<Profile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config_kind("Io", format!("{}: {e}", path.display())))?;
    Ok(Profile::from_json(&text)?)
}

fn warn(message: String) {
    eprintln!("{}", json!({ "warning": message }));
}

fn cmd_solve(args: &RunArgs) -> Result<(), Failure> {
    let run = load(&args.config, args.overrides())?;
    if run.options.far_field == FarField::Dirichlet {
        let tail = second_coeffs(&run.params, run.degrees);
        let shift = tail.a_plus.abs().max(tail.a_minus.abs()) / run.grid.r_max().powi(2);
        if shift >= run.options.tolerance {
            warn(format!(
                "Dirichlet far field: |a|/R_max^2 = {shift:e} exceeds the tolerance {:e}",
                run.options.tolerance
            ));
        }
    }
    let out = args
        .out
        .clone()
        .or(run.out.clone())
        .unwrap_or_else(|| PathBuf::from("profile.json"));
    let profile = continuation_solve(run.params, run.degrees, &run.grid, &run.options)?;
    write_text(&out, &profile.to_json()?)?;
    let q = quantization_check(&profile)?;
    let class = monotonicity_classify(&profile, DEFAULT_SLOPE_TOL);
    let summary = json!({
        "profile": out,
        "converged": profile.report.converged,
        "residual": profile.report.residual,
        "iterations": profile.report.iterations,
        "wall_time_s": profile.report.wall_time_s,
        "quantization_gap": q.gap,
        "class": class.name(),
        "witness": class.witness(),
        "epsilon": run.epsilon,
        "conjugated": run.conjugated,
    });
    print_line(&to_json(&summary));
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<(), Failure> {
    let run = load(&args.config, args.overrides())?;
    let range = run.sweep.ok_or_else(|| {
        Failure::config("sweep needs a \"sweep\" section with B_start, B_stop, B_step")
    })?;
    let points = range.points()?;
    let out = args
        .out
        .clone()
        .or(run.out.clone())
        .unwrap_or_else(|| PathBuf::from("sweep.json"));
    let result = sweep::sweep(&run, &points);
    write_text(&out, &to_json(&result))?;
    let csv_path = out.with_extension("csv");
    let mut file = create(&csv_path)?;
    sweep::write_csv(&result, &mut file)?;
    file.flush()?;
    let failed = result.records.iter().filter(|r| !r.converged).count();
    print_line(&to_json(&json!({
        "json": out,
        "csv": csv_path,
        "points": result.records.len(),
        "failed": failed,
        "B0_lower_bound": result.b0_lower_bound,
    })));
    Ok(())
}

fn cmd_verify(profile: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let profile = read_profile(profile)?;
    let tol = match config {
        Some(path) => load(path, Overrides::default())?.tolerances,
        None => VerifyTolerances::default(),
    };
    // A profile that parses but cannot be evaluated is still a parse-level error.
    let checks =
        verify_suite(&profile, &tol).map_err(|e| Failure::config_kind(e.kind(), e.to_string()))?;
    emit(out, &to_json(&checks))?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_CHECK,
            "CheckFailed",
            format!("failed checks: {}", failed.join(", ")),
        ))
    }
}

fn cmd_asymptotics(
    config: &Path,
    branch: Option<BranchArg>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let run = load(config, Overrides::default())?;
    let branch = branch
        .map(Branch::from)
        .unwrap_or_else(|| Branch::default_for(run.params.b));
    let tail = second_coeffs(&run.params, run.degrees);
    let (ctp, ctm) = c_tilde(&run.params);
    let (chp, chm) = c_hat(&run.params);
    let mut report = json!({
        "a_plus": tail.a_plus,
        "a_minus": tail.a_minus,
        "b_plus": tail.b_plus,
        "b_minus": tail.b_minus,
        "c_tilde": [ctp, ctm],
        "c_hat": [chp, chm],
        "branch": branch.name(),
        "delta": null,
        "R": null,
        "M_coefficients": null,
    });
    let selected = select_envelope(&run.params, run.degrees, branch);
    match &selected {
        Ok(spec) => {
            let m = defect_for(&run.params, run.degrees, branch, spec.delta, spec.r)?;
            let table = |c: Component| {
                m.fraction_strings(c)
                    .into_iter()
                    .map(|(k, v)| (k, json!(v)))
                    .collect::<serde_json::Map<String, serde_json::Value>>()
            };
            report["delta"] = json!(spec.delta);
            report["R"] = json!(spec.r);
            report["M_coefficients"] = json!({
                "plus": table(Component::Plus),
                "minus": table(Component::Minus),
            });
        }
        Err(e) => report["selection_error"] = json!(e.to_string()),
    }
    emit(out, &to_json(&report))?;
    match selected {
        Ok(_) => Ok(()),
        Err(e) => Err(Failure::new(EXIT_CHECK, e.kind(), e.to_string())),
    }
}

fn cmd_export(profile: &Path, kind: ExportKind, out: Option<&Path>) -> Result<(), Failure> {
    let profile = read_profile(profile)?;
    let result = match out {
        Some(path) => {
            let mut file = create(path)?;
            export::export(&profile, kind, &mut file)?;
            file.flush().map_err(Failure::from)
        }
        None => export::export(&profile, kind, io::stdout().lock()),
    };
    // Every export failure, including envelope selection, exits with 1.
    result.map_err(|f| Failure {
        code: EXIT_CONFIG,
        ..f
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify {
            profile,
            config,
            out,
        } => cmd_verify(profile, config.as_deref(), out.as_deref()),
        Command::Asymptotics {
            config,
            branch,
            out,
        } => cmd_asymptotics(config, *branch, out.as_deref()),
        Command::Export { profile, kind, out } => cmd_export(profile, *kind, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.is_broken_pipe() => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code)
        }
    }
}
