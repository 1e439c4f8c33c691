use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indiga_session::fixtures::{fixture, run_suite, FIXTURES};
use indiga_session::{run_script, RunConfig};

#[derive(Parser)]
#[command(name = "indiga", version, about = "Exact computations with derivations and exponentials of complete rings")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a session script (a path, or the name of a bundled fixture).
    Run {
        script: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// List the bundled fixtures, or run them all with --run.
    Examples {
        #[arg(long)]
        run: bool,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Opts {
    /// Default depth for checks and renderings.
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Default maximal power of the integrability window.
    #[arg(long, default_value_t = 12)]
    power: usize,
    /// Default degree bound for invariants and random samples.
    #[arg(long, default_value_t = 4)]
    deg: u32,
    /// Cap on Gröbner pair and reduction steps.
    #[arg(long, default_value_t = 100_000)]
    groebner_cap: usize,
    /// Seed of the sample generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Stop at the first failed record.
    #[arg(long)]
    fail_fast: bool,
    /// Record wall-clock time per statement (makes reports non-reproducible).
    #[arg(long)]
    timings: bool,
}

impl Opts {
    fn config(&self) -> RunConfig {
        RunConfig {
            depth: self.depth,
            power: self.power,
            deg: self.deg,
            groebner_cap: self.groebner_cap,
            seed: self.seed,
            fail_fast: self.fail_fast,
            timings: self.timings,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { script, opts } => {
            let path = PathBuf::from(&script);
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => match fixture(&script) {
                    Some(t) => t.to_string(),
                    None => {
                        eprintln!("indiga: cannot read {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                },
            };
            let report = run_script(&script, &text, &opts.config());
            match opts.format {
                Format::Json => print!("{}", report.to_json_string()),
                Format::Text => print!("{}", report.to_text()),
            }
            if report.failed() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Cmd::Examples { run, opts } => {
            if !run {
                for (name, about, _) in FIXTURES {
                    println!("{name:<12} {about}");
                }
                return ExitCode::SUCCESS;
            }
            let suite = run_suite(&opts.config());
            match opts.format {
                Format::Json => print!("{}", suite.to_json_string()),
                Format::Text => print!("{}", suite.to_text()),
            }
            if suite.failed() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
