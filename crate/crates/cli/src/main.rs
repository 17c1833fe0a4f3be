use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radarsim::scenario::{
    process_frame_file, replay_detections, run_scenario, trace_dump, validate_config, DspOptions, ScenarioConfig,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Chirp-sequence radar baseband simulator and localization runner.
#[derive(Debug, Parser)]
#[command(name = "radarsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the number of frames.
    #[arg(long, global = true)]
    frames: Option<usize>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate, process and localize every frame.
    Run,
    /// Check the config and list every problem found.
    Validate,
    /// Write channel paths per frame without synthesizing signals.
    TraceDump,
    /// Process a saved baseband frame into maps and detections.
    DspOnly {
        /// Frame file written by `run` (frame_XXXX.bin).
        #[arg(long)]
        input: PathBuf,
    },
    /// Replay saved detections through the particle filter.
    PfOnly {
        /// Directory with detections_XXXX.csv files (default: the config's output directory).
        #[arg(long)]
        detections: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required for this command".into()))?;
    let mut cfg = ScenarioConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(frames) = cli.frames {
        cfg.frames = frames;
    }
    Ok(cfg)
}

fn checked_config(cli: &Cli) -> Result<ScenarioConfig, Failure> {
    let cfg = load_config(cli)?;
    let diagnostics = validate_config(&cfg);
    if diagnostics.is_empty() {
        Ok(cfg)
    } else {
        Err(Failure::Config(diagnostics.join("\n")))
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let say = |line: &str| {
        if !cli.quiet {
            println!("{line}");
        }
    };
    match &cli.command {
        Command::Validate => {
            let cfg = load_config(cli)?;
            let diagnostics = validate_config(&cfg);
            if !diagnostics.is_empty() {
                return Err(Failure::Config(diagnostics.join("\n")));
            }
            say("config ok");
        }
        Command::Run => {
            let cfg = checked_config(cli)?;
            let summary = run_scenario(&cfg, &mut |line| say(line)).map_err(|e| Failure::Runtime(e.to_string()))?;
            let total: usize = summary.detections.iter().sum();
            say(&format!(
                "{} frames, {total} detections, output in {}",
                summary.frames,
                summary.out_dir.display()
            ));
            if let Some(err) = summary.mean_error {
                say(&format!("mean localization error {err:.4} m"));
            }
        }
        Command::TraceDump => {
            let cfg = checked_config(cli)?;
            let files = trace_dump(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
            for f in files {
                say(&format!("wrote {}", f.display()));
            }
        }
        Command::DspOnly { input } => {
            let (dsp, csv, out) = match &cli.config {
                Some(_) => {
                    let cfg = load_config(cli)?;
                    (cfg.dsp, cfg.export.map_csv, cfg.out_dir)
                }
                None => (DspOptions::default(), true, cli.out.clone().unwrap_or_else(|| PathBuf::from("out"))),
            };
            let processed = process_frame_file(input, &dsp, &out, csv).map_err(|e| match e {
                radarsim::Error::Io { .. } | radarsim::Error::Format { .. } | radarsim::Error::Validation(_) => {
                    Failure::Config(e.to_string())
                }
                other => Failure::Runtime(other.to_string()),
            })?;
            say(&format!("{} detections, output in {}", processed.features.len(), out.display()));
        }
        Command::PfOnly { detections } => {
            let cfg = checked_config(cli)?;
            let dir = detections.clone().unwrap_or_else(|| cfg.out_dir.clone());
            let summary = replay_detections(&cfg, &dir).map_err(|e| Failure::Runtime(e.to_string()))?;
            if let Some(err) = summary.mean_error {
                say(&format!("mean localization error {err:.4} m"));
            }
            say(&format!("wrote {}", cfg.out_dir.join("trajectory.csv").display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error:\n{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
