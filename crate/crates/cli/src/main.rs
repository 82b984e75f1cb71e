use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use lanesim::config::parse_config;
use lanesim::diagnostics::verify_run;
use lanesim::output::write_run;
use lanesim::scenarios::{reproduce_table1, run_all, ScenarioPreset};
use lanesim::{Config, Output};

/// Multilane traffic simulator with nonlocal lane changing.
#[derive(Parser)]
#[command(name = "lanesim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configuration in F and write snapshots to D.
    Simulate {
        #[arg(long, value_name = "F")]
        config: PathBuf,
        #[arg(long, value_name = "D")]
        out: PathBuf,
    },
    /// Run a shipped scenario.
    Preset {
        /// two_lane_local_flux, table1, nonlocal_flux_bump or source_kernel_cases
        #[arg(long, value_name = "N")]
        name: String,
        #[arg(long, value_name = "D")]
        out: PathBuf,
    },
    /// Reproduce the ν-sweep error table.
    Table1 {
        #[arg(long, value_name = "D")]
        out: PathBuf,
    },
    /// Check every step of a run against the discrete estimates.
    Verify {
        #[arg(long, value_name = "F")]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Simulate { config, out } => {
            let configs = parse_config(&config).with_context(|| format!("reading {}", config.display()))?;
            write_all(&configs, &run_all(&configs)?, &out)?;
            Ok(true)
        }
        Command::Preset { name, out } => {
            let configs = name.parse::<ScenarioPreset>()?.configs::<f64>();
            write_all(&configs, &run_all(&configs)?, &out)?;
            Ok(true)
        }
        Command::Table1 { out } => {
            let (table, outputs) = reproduce_table1::<f64>()?;
            let configs = ScenarioPreset::NuSweep.configs::<f64>();
            write_all(&configs, &outputs, &out)?;
            let csv = table.to_csv();
            fs::write(out.join("table1.csv"), &csv)?;
            fs::write(out.join("table1.json"), serde_json::to_string_pretty(&table)? + "\n")?;
            print!("{csv}");
            let flagged = table.flagged_count();
            println!("{flagged} of 24 cells deviate by more than 15% from the reference table");
            Ok(flagged == 0)
        }
        Command::Verify { config } => {
            let configs = parse_config(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut ok = true;
            let mut reports = Vec::new();
            for c in &configs {
                let report = verify_run(c)?;
                ok &= report.passed();
                reports.push(report);
            }
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(ok)
        }
    }
}

fn write_all(configs: &[Config], outputs: &[Output], dir: &Path) -> Result<()> {
    for (c, o) in configs.iter().zip(outputs) {
        let files = write_run(c, o, dir).with_context(|| format!("writing {}", dir.display()))?;
        println!("{}: {} steps, {} files", o.name, o.steps, files.len());
    }
    Ok(())
}
