use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hawkit_cli::commands::{cmd_badness, cmd_dani, cmd_play, cmd_systole, cmd_verify, parse_point, CommandError, Outcome};
use hawkit_cli::config::RunConfig;

#[derive(Parser)]
#[command(name = "hawkit", version, about = "Potential-game strategy engine and verification suites")]
struct Cli {
    /// TOML run configuration.
    #[arg(short, long, global = true, default_value = "hawkit.toml")]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the strategy against the configured Bob, one game per seed.
    Play,
    /// Run verification suites; all of them when none are named.
    Verify {
        suites: Vec<String>,
        /// Small instance counts for smoke runs.
        #[arg(long)]
        quick: bool,
    },
    /// Systole profile along the flow, as CSV.
    Systole {
        /// `x,y,z` as rationals.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        float: bool,
    },
    /// Exact badness constant up to `q_max`.
    Badness {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1000)]
        q_max: u64,
        #[arg(long)]
        float: bool,
    },
    /// Truncated systole/badness correspondence at one point.
    Dani {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Defaults to `dynamics.q_max`.
        #[arg(long)]
        q_max: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<Outcome, CommandError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    match cli.command {
        Command::Play => cmd_play(&cfg),
        Command::Verify { suites, quick } => cmd_verify(&cfg, &suites, quick),
        Command::Systole { point, float } => cmd_systole(&cfg, &parse_point(&point)?, float),
        Command::Badness { point, q_max, float } => cmd_badness(&cfg, &parse_point(&point)?, q_max, float),
        Command::Dani { point, q_max } => {
            let q = q_max.unwrap_or(cfg.dani_q_max);
            cmd_dani(&cfg, &parse_point(&point)?, q)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.text);
            for f in &o.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(if o.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
