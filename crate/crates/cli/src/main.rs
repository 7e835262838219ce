use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use weakjoint_cli::commands::{self, Run};
use weakjoint_cli::report::{emit_report, Metadata, Report, Verdict};

/// Weak values, joint-measurement inference and no-go checks.
#[derive(Parser, Debug)]
#[command(name = "weakjoint", version, about)]
struct Cli {
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true, default_value = "weakjoint-out")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "WEAKJOINT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Infer joint weak values of (x1 - x2, p1 + p2) with an EPR ancilla.
    InferXp(commands::InferXpArgs),
    /// Four-variable inference on (x, p, x_a, p_a) and the uncertainty sweep.
    InferXp4(commands::InferXp4Args),
    /// Scan the obstruction profile of a joint value for two finite observables.
    Nogo(commands::NogoArgs),
    /// Approximate joint assignment and its error scaling.
    Approx(commands::ApproxArgs),
    /// Realize target weak values from an operator spec.
    Assign(commands::AssignArgs),
    /// Odd-dimensional discrete Weyl phase-point realization.
    Weyl(commands::WeylArgs),
    /// Continuum kernel root condition and quadrature check.
    Kernel(commands::KernelArgs),
    /// Fast invariant checks.
    Selftest(commands::SelftestArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::InferXp(_) => "infer-xp",
            Command::InferXp4(_) => "infer-xp4",
            Command::Nogo(_) => "nogo",
            Command::Approx(_) => "approx",
            Command::Assign(_) => "assign",
            Command::Weyl(_) => "weyl",
            Command::Kernel(_) => "kernel",
            Command::Selftest(_) => "selftest",
        }
    }

    fn run(&self) -> Result<Run> {
        match self {
            Command::InferXp(a) => commands::infer_xp(a),
            Command::InferXp4(a) => commands::infer_xp4(a),
            Command::Nogo(a) => commands::nogo(a),
            Command::Approx(a) => commands::approx(a),
            Command::Assign(a) => commands::assign(a),
            Command::Weyl(a) => commands::weyl(a),
            Command::Kernel(a) => commands::kernel(a),
            Command::Selftest(a) => commands::selftest(a),
        }
    }
}

fn main_inner(cli: Cli) -> Result<Verdict> {
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring thread pool")?;
    let run = cli.command.run()?;
    let report = Report {
        command: cli.command.name().into(),
        config: run.config,
        verdict: run.verdict,
        summary: run.summary,
        results: run.results,
        metadata: Metadata::now(threads),
    };
    emit_report(&report, &run.tables, &cli.out)?;
    for (name, text) in &run.files {
        let path = cli.out.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{}: {}", report.command, report.summary);
    Ok(report.verdict)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match main_inner(cli) {
        Ok(Verdict::Positive) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
