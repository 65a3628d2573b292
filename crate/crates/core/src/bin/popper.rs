use clap::{Args, Parser, Subcommand};
use popper_optics::cli::{load_config, run_scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "popper", about = "Scalar wave-optics simulator for an unfolded ghost-imaging two-slit experiment", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and emit CSV profiles plus summary.json
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario: kim-shih, psf, single-slit, conditional-tests, phase-matching
    #[arg(long)]
    scenario: String,
    /// Optional key = value config file (units in key suffixes, e.g. slit_a_width_mm)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON files
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// RNG seed for randomized scenarios (overrides any config-file seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Inline override, repeatable: --set key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    let run = match load_config(&args.scenario, args.config.as_deref(), &args.set, &args.out, args.seed) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&run) {
        Ok(summary) => {
            for (key, value) in &summary.entries {
                println!("{key} = {value}");
            }
            println!(
                "scenario {} finished in {:.3} s ({})",
                summary.scenario,
                summary.duration.as_secs_f64(),
                if summary.all_pass { "all checks passed" } else { "SOME CHECKS FAILED" }
            );
            if summary.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
