use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robust_mimo::bench::{dbw_to_linear, epsilon_for, generate_channel, run_to_dir, BenchConfig};
use robust_mimo::design::{alternating_design, nonrobust_design, robust_design, Method, Transceiver};
use robust_mimo::linalg::{format_matrix, parse_matrix, ComplexMatrix};
use robust_mimo::worstcase::{worst_case_error_general, DesignProblem, WorstCaseCertificate};
use robust_mimo::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "robust-mimo", version, about = "Worst-case robust MIMO transceiver design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design a transceiver for one channel and print it with its worst-case certificate.
    Design(DesignArgs),
    /// Compute the worst-case channel error for a given precoder and equalizer.
    Worstcase(WorstcaseArgs),
    /// Run a Monte Carlo benchmark from a config file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Seed for an i.i.d. CN(0,1) channel (ignored when --channel is given).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Channel matrix file (rows on lines, entries `re` or `re,im`).
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Number of streams; also the antenna count for a generated channel.
    #[arg(long = "L", short = 'L', default_value_t = 2)]
    streams: usize,
    /// Normalized uncertainty, epsilon^2 = rho ||H||_F^2.
    #[arg(long, conflicts_with = "epsilon")]
    rho: Option<f64>,
    /// Uncertainty radius on ||E||_F.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "power-dbw", default_value_t = 20.0, allow_negative_numbers = true)]
    power_dbw: f64,
    #[arg(long = "noise-var", default_value_t = 1.0)]
    noise_var: f64,
    /// robust_optimal, alternating_I, alternating_II, alternating_III or nonrobust.
    #[arg(long, default_value = "robust_optimal")]
    method: Method,
}

#[derive(Debug, Args)]
struct WorstcaseArgs {
    /// Precoder F: a file path or an inline matrix such as "1 0; 0 1".
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    /// Equalizer G, same format as --f.
    #[arg(long, allow_hyphen_values = true)]
    g: String,
    /// Channel estimate H, same format as --f.
    #[arg(long, allow_hyphen_values = true)]
    h: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long = "noise-var", default_value_t = 1.0)]
    noise_var: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving results.csv and summary.csv.
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

fn read_matrix(arg: &str) -> Result<ComplexMatrix> {
    let path = Path::new(arg);
    if path.is_file() {
        parse_matrix(&std::fs::read_to_string(path)?)
    } else {
        parse_matrix(arg)
    }
}

fn print_matrix(name: &str, m: &ComplexMatrix) {
    println!("{name} ({}x{}):", m.rows(), m.cols());
    print!("{}", format_matrix(m));
}

fn print_certificate(cert: &WorstCaseCertificate) {
    println!("worst_case_mse: {:.12}", cert.mse_value);
    println!("omega: {:.12}", cert.omega);
    println!("kkt_residual: {:e}", cert.kkt_residual);
    println!("hard_case: {}", cert.hard_case);
    print_matrix("E*", &cert.e_star);
}

fn run_design(args: DesignArgs) -> Result<()> {
    let h = match &args.channel {
        Some(path) => parse_matrix(&std::fs::read_to_string(path)?)?,
        None => generate_channel(args.streams, args.streams, args.seed),
    };
    let epsilon = match (args.rho, args.epsilon) {
        (Some(rho), None) => {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidInput(format!("rho must lie in [0, 1), got {rho}")));
            }
            epsilon_for(&h, rho)
        }
        (None, Some(eps)) => eps,
        _ => 0.0,
    };
    let problem = DesignProblem::new(h, epsilon, args.noise_var, dbw_to_linear(args.power_dbw), args.streams)?;

    let (t, cert): (Transceiver, WorstCaseCertificate) = match args.method {
        Method::RobustOptimal => {
            let d = robust_design(&problem)?;
            println!("solver_iterations: {}", d.solution.iterations);
            (d.transceiver, d.certificate)
        }
        method => {
            let t = match method {
                Method::Alternating(scheme) => {
                    let (t, trace) = alternating_design(
                        &problem,
                        scheme,
                        robust_mimo::design::DEFAULT_MAX_ITERS,
                        robust_mimo::design::DEFAULT_TOL,
                        args.seed,
                    )
                    .map_err(|e| e.source)?;
                    println!("alternation_steps: {}", trace.entries.len());
                    t
                }
                _ => nonrobust_design(&problem)?,
            };
            let cert = worst_case_error_general(&t.f, &t.g, &problem)?;
            (t, cert)
        }
    };
    println!("method: {}", t.method);
    println!("epsilon: {:.12}", problem.epsilon);
    println!("power: {:.12} of {:.12}", t.transmit_power(), problem.power);
    print_matrix("F", &t.f);
    print_matrix("G", &t.g);
    print_certificate(&cert);
    Ok(())
}

fn run_worstcase(args: WorstcaseArgs) -> Result<()> {
    let f = read_matrix(&args.f)?;
    let g = read_matrix(&args.g)?;
    let h = read_matrix(&args.h)?;
    if !(args.epsilon >= 0.0 && args.epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {}", args.epsilon)));
    }
    if !(args.noise_var > 0.0 && args.noise_var.is_finite()) {
        return Err(Error::InvalidInput(format!("noise variance must be > 0, got {}", args.noise_var)));
    }
    // power and stream count play no role in the inner maximization
    let problem = DesignProblem {
        streams: f.cols(),
        power: f.frobenius_norm_sqr().max(1.0),
        h_tilde: h,
        epsilon: args.epsilon,
        noise_var: args.noise_var,
    };
    let cert = worst_case_error_general(&f, &g, &problem)?;
    print_certificate(&cert);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let cfg = BenchConfig::load(&args.config)?;
    let out = run_to_dir(&cfg, &args.out_dir)?;
    println!("rows: {} (failures: {})", out.rows, out.failures);
    println!("results: {}", out.results.display());
    println!("summary: {}", out.summary.display());
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
    let outcome = match cli.command {
        Command::Design(args) => run_design(args),
        Command::Worstcase(args) => run_worstcase(args),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
