use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vbscd::harness::{run_probe, run_rate, run_solve, run_verify, Experiment, ExperimentConfig};
use vbscd::Result;

#[derive(Parser)]
#[command(name = "vbscd", version, about = "Variable Bregman stochastic coordinate descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver once and write its trajectory.
    Solve(Common),
    /// Run the invariant suite; exits nonzero when any check fails.
    Verify(Common),
    /// Run replications and fit the linear rate of the mean gap.
    Rate(Common),
    /// Estimate error-bound constants around the reference point.
    ProbeEb(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Base seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start each replication near the reference point.
    #[arg(long)]
    near_start: bool,
}

fn load(c: &Common) -> Result<Experiment> {
    let mut config = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = &c.out {
        config.experiment.out = out.clone();
    }
    config.experiment.near_start |= c.near_start;
    Experiment::new(config)
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Solve(c) => {
            let mut exp = load(&c)?;
            let o = run_solve(&mut exp)?;
            let t = &o.trajectory;
            println!("instance: {}", exp.problem.info().name);
            println!("iterations: {} ({:?})", t.records.len(), t.termination);
            println!("final value: {:.16e}", t.final_value());
            if let Some(f) = o.f_bar {
                println!("final gap: {:.16e}", t.final_value() - f);
            }
            println!("wrote {}", o.path.display());
            Ok(true)
        }
        Command::Verify(c) => {
            let mut exp = load(&c)?;
            let o = run_verify(&mut exp)?;
            for s in &o.tally.summaries {
                let status = if s.failed == 0 { "pass" } else { "FAIL" };
                println!(
                    "{status} {}/{}: {} of {} failed, worst slack {:.3e}",
                    s.worst.check, s.worst.name, s.failed, s.evaluated, s.worst.slack
                );
            }
            for note in &o.skipped {
                println!("skipped {note}");
            }
            println!("evaluated {}, failed {}", o.tally.evaluated(), o.tally.failed());
            println!("wrote {}", o.path.display());
            Ok(o.tally.all_pass())
        }
        Command::Rate(c) => {
            let mut exp = load(&c)?;
            let o = run_rate(&mut exp)?;
            let r = &o.report;
            println!("instance: {}", exp.problem.info().name);
            println!("replications: {}", o.set.mean.replications);
            println!("reference value: {:.16e} ({})", o.reference.value, r.label());
            println!("fit window: {}..{}", r.window.start, r.window.end);
            println!("contraction factor: {:.6}", r.factor());
            println!("r squared: {:.6}", r.r_squared());
            if let Some(b) = r.theoretical_beta {
                println!("theoretical beta: {b:.6}");
            }
            if let Some(l) = &o.r_linear {
                println!("iterate factor: {:.6} (bound {:.6}, {})", l.fit.factor, l.bound, if l.pass { "pass" } else { "fail" });
            }
            if let Some(n) = &o.near_start {
                println!("stayed within {:.3e}: {} of {}", n.bound, n.stayed, n.replications);
            }
            println!("wrote {}", exp.out_dir().display());
            Ok(true)
        }
        Command::ProbeEb(c) => {
            let mut exp = load(&c)?;
            let o = run_probe(&mut exp)?;
            for e in &o.estimates {
                println!("{}: {:.6} ({} of {} samples)", e.kind.as_str(), e.constant, e.used, e.samples);
            }
            println!("wrote {}", o.path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
