use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scramble_cli::output::write_atomic;
use scramble_cli::plotdata::{emit_plotdata, PLOTDATA_FILE};
use scramble_cli::presets::{preset, summary, PRESETS};
use scramble_cli::verify::verify_run;
use scramble_cli::{load_config, output_dir_for, run_experiment, CliError, CliResult, RunOptions};

#[derive(Parser)]
#[command(name = "scramble", version, about = "Information scrambling under decoherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config or a previous run's manifest.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Write a long-format CSV of the quantifier series of one or more runs.
    EmitPlotdata {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Output file (default: <first dir>/plotdata_v1.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check hashes, schemas and invariants of a completed run.
    Verify { dir: PathBuf },
    /// Bundled figure configs.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
    /// Write a preset to a file (default: <name>.toml).
    Write {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Input(format!("{} is not a file path", path.display())))?;
    write_atomic(dir, &name.to_string_lossy(), bytes)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, output_dir } => {
            let loaded = load_config(&config)?;
            let opts = RunOptions::from_env()?;
            let dir = output_dir_for(&loaded, output_dir.as_deref());
            let manifest = run_experiment(&loaded, &dir, &opts)?;
            println!(
                "run {} complete: {} files in {} ({:.1} s, {} workers)",
                &manifest.run_id[..12],
                manifest.files.len(),
                dir.display(),
                manifest.wall_clock_seconds,
                manifest.workers
            );
        }
        Command::EmitPlotdata { dirs, out } => {
            let refs: Vec<&Path> = dirs.iter().map(PathBuf::as_path).collect();
            let bytes = emit_plotdata(&refs)?;
            let out = out.unwrap_or_else(|| dirs[0].join(PLOTDATA_FILE));
            write_file(&out, &bytes)?;
            println!("wrote {}", out.display());
        }
        Command::Verify { dir } => {
            let report = verify_run(&dir)?;
            for c in &report.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{mark} {}", c.name);
                } else {
                    println!("{mark} {}: {}", c.name, c.detail);
                }
            }
            if !report.passed() {
                return Err(CliError::Invariant(format!("{} failed verification", dir.display())));
            }
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for (name, text) in PRESETS {
                    println!("{name:<22}{}", summary(text));
                }
            }
            PresetAction::Show { name } => print!("{}", preset(&name)?),
            PresetAction::Write { name, out } => {
                let text = preset(&name)?;
                let out = out.unwrap_or_else(|| PathBuf::from(format!("{name}.toml")));
                write_file(&out, text.as_bytes())?;
                println!("wrote {}", out.display());
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
