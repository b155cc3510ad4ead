use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gapbound_cli::output::write_outputs;
use gapbound_cli::{builtin_scenarios, run_batch, run_scenario_seeded, CliError, RunReport, Scenario};

#[derive(Parser)]
#[command(name = "gapbound", version, about = "Sensitivity-based bounds on generator model gaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "GAPBOUND_OUT_DIR")]
        out: PathBuf,
        /// Also write an SVG plot.
        #[arg(long)]
        svg: bool,
        /// Recorded in the summary; the pipeline itself is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// Exit with status 4 unless the δ gap stays inside every requested bound.
        #[arg(long)]
        assert_containment: bool,
    },
    /// Run the three built-in case studies and write CSV and SVG for each.
    PaperFigs {
        #[arg(long, env = "GAPBOUND_OUT_DIR")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        assert_containment: bool,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn report_line(r: &RunReport) {
    for s in &r.summaries {
        println!(
            "{}: {} delta {} (looseness {:.3}), omega {} (looseness {:.3})",
            r.scenario.name,
            s.kind,
            if s.contained[0] { "contained" } else { "NOT contained" },
            s.looseness[0],
            if s.contained[1] { "contained" } else { "NOT contained" },
            s.looseness[1],
        );
    }
    if let Some(f) = &r.failure {
        println!("{}: incomplete: {f}", r.scenario.name);
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("{}: ok", cfg.name);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, out, svg, seed, assert_containment } => {
            let cfg = load(&config)?;
            let report = run_scenario_seeded(&cfg, seed)?;
            write_outputs(&report, &out, svg)?;
            report_line(&report);
            Ok(if assert_containment && !report.contained(0) { ExitCode::from(4) } else { ExitCode::SUCCESS })
        }
        Command::PaperFigs { out, seed, assert_containment } => {
            let mut ok = true;
            for r in run_batch(&builtin_scenarios(), seed) {
                let r = r?;
                write_outputs(&r, &out, true)?;
                report_line(&r);
                ok &= r.contained(0);
            }
            Ok(if assert_containment && !ok { ExitCode::from(4) } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gapbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
