use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use epsoliton::acceptance;
use epsoliton::analysis::convergence_campaign;
use epsoliton::dynamics::saddle_eigenvalue;
use epsoliton::io::{profile_to_csv, report_to_json, to_json_string, write_atomic};
use epsoliton::kdv::{default_alpha, kdv_residual, uniform_grid, DerivativeMode};
use epsoliton::{
    check_admissible, compute_remainders, solve_critical_densities, solve_profile, Error,
    KdvReference, ModelParams, SolverConfig,
};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "epsoliton", version, about = "Euler-Poisson solitary waves and their KdV limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one wave and write the mirrored profile with its remainders.
    Solve(RunArgs),
    /// Run an epsilon ladder and write the convergence report.
    Sweep(RunArgs),
    /// Run the acceptance suite.
    Verify(RunArgs),
    /// Print the critical constants as name=value lines.
    Roots(RunArgs),
    /// Check the soliton against the traveling KdV equation.
    KdvCheck(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Amplitude parameter; repeat for a sweep.
    #[arg(long = "epsilon")]
    epsilon: Vec<f64>,
    #[arg(long)]
    dxi: Option<f64>,
    #[arg(long)]
    xi_max: Option<f64>,
    #[arg(long)]
    tail_cut: Option<f64>,
    /// Weight rate of the remainder norms [default: sqrt(2 V gamma)/2].
    #[arg(long)]
    alpha: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Use finite differences in kdv-check.
    #[arg(long)]
    finite_difference: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        // an unwritable --out path is a configuration problem
        let code = if err.is_invalid_input() || matches!(err, Error::Io(_)) {
            EXIT_INVALID
        } else {
            EXIT_NUMERICAL
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Failure>;

impl RunArgs {
    fn solver_config(&self) -> Result<SolverConfig, Failure> {
        let mut cfg = SolverConfig::default();
        for (name, value, slot) in [
            ("dxi", self.dxi, &mut cfg.dxi),
            ("xi-max", self.xi_max, &mut cfg.xi_max),
            ("tail-cut", self.tail_cut, &mut cfg.tail_cut),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("--{name} must be > 0, got {v}")));
                }
                *slot = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn alpha(&self) -> Result<Option<f64>, Failure> {
        match self.alpha {
            Some(a) if !(a > 0.0 && a.is_finite()) => Err(invalid(format!("--alpha must be > 0, got {a}"))),
            a => Ok(a),
        }
    }

    fn single_params(&self) -> Result<ModelParams, Failure> {
        match self.epsilon.as_slice() {
            [eps] => Ok(ModelParams::new(self.sigma, self.gamma, *eps)),
            [] => Err(invalid("--epsilon is required")),
            _ => Err(invalid("this command takes a single --epsilon")),
        }
    }

    fn admissible_params(&self) -> Result<ModelParams, Failure> {
        let params = self.single_params()?;
        let verdict = check_admissible(&params);
        if verdict.admissible {
            Ok(params)
        } else {
            Err(Error::Inadmissible(verdict).into())
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => write_atomic(path, text).map_err(Failure::from),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn cmd_solve(args: &RunArgs) -> CmdResult {
    let params = args.admissible_params()?;
    let config = args.solver_config()?;
    let alpha = args.alpha()?.unwrap_or_else(|| default_alpha(&params));
    let profile = solve_profile(&params, &config)?;
    let field = compute_remainders(&profile, alpha)?;
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => profile_to_csv(&profile, &field)?,
        Format::Json => to_json_string(&(&profile, &field))?,
    };
    args.emit(&text)?;
    Ok(0)
}

fn cmd_sweep(args: &RunArgs) -> CmdResult {
    if args.format == Some(Format::Csv) {
        return Err(invalid("sweep writes JSON only"));
    }
    let config = args.solver_config()?;
    let report = convergence_campaign(args.sigma, args.gamma, &args.epsilon, &config, args.alpha()?)?;
    args.emit(&report_to_json(&report)?)?;
    for failure in &report.failures {
        eprintln!("epsilon {}: {}", failure.epsilon, failure.error);
    }
    if report.succeeded().next().is_none() {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: "every solve in the sweep failed".into(),
        });
    }
    Ok(0)
}

fn cmd_verify(args: &RunArgs) -> CmdResult {
    let config = args.solver_config()?;
    let outcomes = acceptance::run_all(&config);
    let mut text = String::new();
    for outcome in &outcomes {
        text.push_str(&outcome.to_string());
        text.push('\n');
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    text.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
    if args.format == Some(Format::Json) {
        args.emit(&to_json_string(&outcomes)?)?;
        eprint!("{text}");
    } else {
        args.emit(&text)?;
    }
    Ok(if passed == outcomes.len() {
        0
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_roots(args: &RunArgs) -> CmdResult {
    let params = args.admissible_params()?;
    let crit = solve_critical_densities(&params)?;
    let verdict = check_admissible(&params);
    let mut rows = vec![
        ("sigma", params.sigma.to_string()),
        ("gamma", params.gamma.to_string()),
        ("epsilon", params.epsilon.to_string()),
        ("V", format!("{:.16e}", params.sound_speed)),
        ("J", format!("{:.16e}", params.speed())),
        ("zeta", format!("{:.16e}", crit.zeta)),
        ("n_c", format!("{:.16e}", crit.n_c)),
        ("n_ce", format!("{:.16e}", crit.n_ce)),
        ("n_star", format!("{:.16e}", crit.n_star)),
    ];
    if let Some(n_s) = crit.n_s {
        rows.push(("n_s", format!("{n_s:.16e}")));
    }
    rows.push(("lambda", format!("{:.16e}", saddle_eigenvalue(&params))));
    rows.push(("admissible", verdict.admissible.to_string()));
    rows.push(("verdict", verdict.to_string()));
    let text: String = rows.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    args.emit(&text)?;
    Ok(0)
}

fn cmd_kdv_check(args: &RunArgs) -> CmdResult {
    let sound_speed = ModelParams::new(args.sigma, args.gamma, 0.0).sound_speed;
    if !(args.gamma > 0.0 && sound_speed.is_finite()) {
        return Err(invalid("need gamma > 0 and sigma >= 0"));
    }
    let reference = KdvReference::new(args.gamma, sound_speed);
    let step = args.dxi.unwrap_or(1e-3);
    if !(step > 0.0 && step <= 1e-2) {
        return Err(invalid(format!("--dxi must lie in (0, 0.01] for kdv-check, got {step}")));
    }
    let grid = uniform_grid(-10.0, 10.0, step);
    let mode = if args.finite_difference {
        DerivativeMode::FiniteDifference
    } else {
        DerivativeMode::Analytic
    };
    let residual = kdv_residual(&reference, &grid, mode);
    let text = format!(
        "gamma={}\nV={:.16e}\namplitude={:.16e}\nwidth_rate={:.16e}\nmode={}\nresidual={residual:.16e}\n",
        args.gamma,
        sound_speed,
        reference.amplitude,
        reference.width_rate,
        if args.finite_difference { "finite-difference" } else { "analytic" },
    );
    args.emit(&text)?;
    Ok(0)
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Roots(a) => cmd_roots(a),
        Command::KdvCheck(a) => cmd_kdv_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

