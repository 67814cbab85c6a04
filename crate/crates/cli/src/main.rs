use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chained_bell::{
    approx_state, classical, entropy, kl_vs_maxent, maxent_value_closed_form, optimal_violation,
    run_sweep, run_verify, BellMatrix, Error, Grid, LimitReport, MatvecMode, Outputs,
    ProbabilityTable, Scenario, SchmidtVector, SolverConfig, SweepSpec, ViolationResult,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "chained-bell",
    version,
    about = "Chained Bell inequalities: bounds, violations, optimal states"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Smallest eigenvalue of the Bell matrix and its optimal state.
    Violation {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print the Schmidt coefficients.
        #[arg(long)]
        show_state: bool,
    },
    /// Bell value of the maximally entangled state.
    Maxent {
        #[command(flatten)]
        size: Size,
    },
    /// Closed-form approximation of the optimal state.
    Approx {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        show_state: bool,
    },
    /// CSV sweep over a grid of (N, d).
    Sweep(SweepArgs),
    /// Large-N and large-d limits.
    Limits {
        #[arg(long)]
        n: usize,
        /// Also report the large-N limit at this d.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Exhaustive classical minimum over deterministic strategies.
    Classical {
        #[command(flatten)]
        size: Size,
        /// Maximum number of strategy pairs to enumerate.
        #[arg(long, default_value_t = classical::DEFAULT_CAP)]
        cap: u64,
    },
    /// Full outcome distribution P(a,b|x,y) as CSV.
    Probtable {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value_t = StateKind::Maxent)]
        state: StateKind,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the built-in cross-check suite.
    Verify,
}

#[derive(Args, Debug)]
struct Size {
    /// Number of settings per party.
    #[arg(long)]
    n: usize,
    /// Number of outcomes per setting.
    #[arg(long)]
    d: usize,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Iteration limit for the power method.
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Run exactly 20 power steps without a convergence test.
    #[arg(long)]
    paper_faithful: bool,
    #[arg(long, value_enum, default_value_t = MatvecArg::Fast)]
    matvec: MatvecArg,
    /// Single-threaded, bit-reproducible evaluation.
    #[arg(long)]
    deterministic: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.iters,
            residual_tolerance: self.tol,
            paper_faithful: self.paper_faithful,
            matvec_mode: match self.matvec {
                MatvecArg::Naive => MatvecMode::Naive,
                MatvecArg::Fast => MatvecMode::Fast,
            },
            deterministic: self.deterministic,
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Settings counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[arg(long, default_value_t = 1000)]
    d_max: usize,
    #[arg(long, value_enum, default_value_t = GridArg::Geometric)]
    grid: GridArg,
    /// Step factor of the geometric grid.
    #[arg(long, default_value_t = 1.25)]
    ratio: f64,
    /// Subset of opt,maxent,approx,entropy,kl (or all).
    #[arg(long, default_value = "all")]
    outputs: String,
    /// Accept d_max above the desk-scale cap.
    #[arg(long)]
    allow_large: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MatvecArg {
    Naive,
    Fast,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GridArg {
    Geometric,
    Linear,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StateKind {
    Maxent,
    Optimal,
    Approx,
}

/// Failure with the process exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::NotConverged { .. }) {
            2
        } else {
            1
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn write_violation(
    out: &mut dyn Write,
    r: &ViolationResult,
    d: usize,
    show_state: bool,
) -> io::Result<()> {
    writeln!(out, "B_opt={}", r.min_eigenvalue)?;
    writeln!(out, "I_opt={}", d as f64 * r.min_eigenvalue - 1.0)?;
    match entropy(&r.optimal_state) {
        Ok(e) => writeln!(out, "E={e}")?,
        Err(_) => writeln!(out, "E=")?,
    }
    writeln!(out, "KL={}", kl_vs_maxent(&r.optimal_state))?;
    writeln!(out, "iterations={}", r.iterations_used)?;
    writeln!(out, "residual={:e}", r.residual)?;
    writeln!(out, "converged={}", r.converged)?;
    if show_state {
        writeln!(out, "state={}", join(r.optimal_state.coefficients()))?;
    }
    Ok(())
}

fn solve(scenario: Scenario, config: &SolverConfig) -> Result<ViolationResult, Error> {
    config.validate()?;
    optimal_violation(scenario, config)
}

fn run(cli: Cli) -> CliResult {
    let mut out = open_output(cli.out.as_ref())?;
    match cli.command {
        Command::Violation {
            size,
            solver,
            show_state,
        } => {
            let scenario = Scenario::new(size.n, size.d)?;
            writeln!(out, "N={}\nd={}", size.n, size.d)?;
            match solve(scenario, &solver.config()) {
                Ok(r) => write_violation(&mut out, &r, size.d, show_state)?,
                Err(Error::NotConverged { partial }) => {
                    write_violation(&mut out, &partial, size.d, show_state)?;
                    out.flush()?;
                    return Err(Error::NotConverged { partial }.into());
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Maxent { size } => {
            let scenario = Scenario::new(size.n, size.d)?;
            let value = BellMatrix::new(scenario).maxent_value();
            writeln!(out, "N={}\nd={}", size.n, size.d)?;
            writeln!(out, "B_maxent={value}")?;
            writeln!(
                out,
                "B_maxent_closed_form={}",
                maxent_value_closed_form(&scenario)
            )?;
            writeln!(out, "I_maxent={}", size.d as f64 * value - 1.0)?;
        }
        Command::Approx { size, show_state } => {
            let scenario = Scenario::new(size.n, size.d)?;
            let approx = approx_state(scenario);
            let value = BellMatrix::new(scenario).quadratic_form(approx.vector.coefficients())?;
            writeln!(out, "N={}\nd={}", size.n, size.d)?;
            writeln!(out, "B_approx={value}")?;
            match entropy(&approx.vector) {
                Ok(e) => writeln!(out, "E={e}")?,
                Err(_) => writeln!(out, "E=")?,
            }
            writeln!(out, "KL={}", kl_vs_maxent(&approx.vector))?;
            writeln!(out, "normalization={}", approx.normalization)?;
            if show_state {
                writeln!(out, "state={}", join(approx.vector.coefficients()))?;
            }
        }
        Command::Sweep(args) => {
            let spec = SweepSpec {
                n_values: args.n,
                d_min: args.d_min,
                d_max: args.d_max,
                grid: match args.grid {
                    GridArg::Geometric => Grid::Geometric,
                    GridArg::Linear => Grid::Linear,
                },
                ratio: args.ratio,
                solver: args.solver.config(),
                outputs: args.outputs.parse::<Outputs>()?,
                allow_large: args.allow_large,
            };
            spec.validate()?;
            run_sweep(&spec, &mut out)?;
        }
        Command::Limits { n, d } => {
            let r = LimitReport::new(n, d)?;
            writeln!(out, "N={n}")?;
            writeln!(out, "maxent_limit_large_d={}", r.maxent_limit_large_d)?;
            writeln!(out, "entropy_limit={}", r.approx_entropy_limit)?;
            writeln!(out, "kl_limit={}", r.kl_limit)?;
            if let Some(c) = r.c_n {
                writeln!(out, "c_n={c}")?;
            }
            if let Some((d, v)) = r.maxent_limit_large_n {
                writeln!(out, "d={d}\nmaxent_limit_large_n={v}")?;
            }
        }
        Command::Classical { size, cap } => {
            let scenario = Scenario::new(size.n, size.d)?;
            let (min, strategy) = classical::classical_min_bruteforce(&scenario, cap)?;
            let fmt = |v: &[usize]| {
                v.iter()
                    .map(|o| o.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            writeln!(out, "N={}\nd={}", size.n, size.d)?;
            writeln!(out, "min={min}")?;
            writeln!(out, "alice={}", fmt(&strategy.alice_outputs))?;
            writeln!(out, "bob={}", fmt(&strategy.bob_outputs))?;
        }
        Command::Probtable {
            size,
            state,
            solver,
        } => {
            let scenario = Scenario::new(size.n, size.d)?;
            let table = match state {
                StateKind::Maxent => ProbabilityTable::maxent(scenario)?,
                StateKind::Optimal | StateKind::Approx => {
                    let vector: SchmidtVector = if state == StateKind::Optimal {
                        solve(scenario, &solver.config())?.optimal_state
                    } else {
                        approx_state(scenario).vector
                    };
                    ProbabilityTable::from_state(scenario, &vector)?
                }
            };
            writeln!(out, "x,y,a,b,p")?;
            for (x, y, a, b, p) in table.iter() {
                writeln!(out, "{x},{y},{a},{b},{p:.16e}")?;
            }
        }
        Command::Verify => {
            let report = run_verify();
            writeln!(out, "{report}")?;
            out.flush()?;
            if !report.all_passed() {
                return Err(Failure {
                    code: 1,
                    message: "verification failed".into(),
                });
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
