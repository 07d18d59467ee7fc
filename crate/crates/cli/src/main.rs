use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use egap::bench::{run_command, ProblemSource, RunManifest, RunSummary};
use egap::{run, Algorithm, SolverConfig};

#[derive(Parser)]
#[command(name = "egap", version, about = "Excessive-gap decomposition solvers for separable convex problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and print a JSON summary.
    Solve(SolveArgs),
    /// Run a manifest of instances and algorithms, writing traces, a summary and profiles.
    Profile {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory (defaults to the manifest's `output` field).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    /// A problem JSON file, or gen:example1, gen:alloc:SEED:M:NX, gen:sconvex:SEED:M:NX.
    #[arg(long)]
    problem: String,
    /// alg1, alg2, alg2sym, alg3 or baseline.
    #[arg(long)]
    alg: Algorithm,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eps_p: Option<f64>,
    #[arg(long)]
    eps_d: Option<f64>,
    #[arg(long)]
    eps_phi: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// Write the convergence trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Abort on the first excessive-gap violation.
    #[arg(long)]
    check_invariants: bool,
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    let source = ProblemSource::parse(&args.problem)?;
    let problem = source.load().with_context(|| format!("loading {}", args.problem))?;
    let mut config = SolverConfig::new(args.alg);
    config.tau0 = args.tau0;
    if let Some(v) = args.max_iter {
        config.max_iter = v;
    }
    if let Some(v) = args.eps_p {
        config.eps_p = v;
    }
    if let Some(v) = args.eps_d {
        config.eps_d = v;
    }
    if let Some(v) = args.eps_phi {
        config.eps_phi = v;
    }
    if let Some(v) = args.omega {
        config.omega = v;
    }
    config.check_invariant = args.check_invariants;
    let start = Instant::now();
    let result = run(&problem, &config)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut summary = RunSummary::from_result(&args.problem, args.alg, source.seed(), &result, elapsed);
    if let Some(path) = &args.trace {
        result
            .trace
            .write_csv_file(path)
            .with_context(|| format!("writing trace {}", path.display()))?;
        summary.trace = Some(path.display().to_string());
    }
    println!("{}", summary.to_json());
    Ok(())
}

fn profile(manifest: PathBuf, out: Option<PathBuf>) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let parsed = RunManifest::from_json(&text)?;
    let Some(dir) = out.or_else(|| parsed.output.clone()) else {
        bail!("no output directory: pass --out or set `output` in the manifest");
    };
    let outcome = run_command(&parsed, &dir)?;
    for s in &outcome.summaries {
        match &s.error {
            Some(e) => eprintln!("{} {}: error: {e}", s.instance, s.algorithm),
            None => eprintln!("{} {}: {} after {} iterations", s.instance, s.algorithm, s.stop_reason, s.iterations),
        }
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => solve(args).map(|()| 0),
        Command::Profile { manifest, out } => profile(manifest, out),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
