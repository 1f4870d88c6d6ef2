use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use eventsync::scenario::slope_change_times;
use eventsync::{emit_plots, load_config, run_simulation, Preset, SimConfig};

#[derive(Parser)]
#[command(
    name = "eventsync",
    version,
    about = "Event segmentation via anticipating synchronization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write trace, events, ground truth, and figures.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Config file (key=value lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the configured controller preset.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,

    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Skip figure emission.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Full,
    #[value(name = "no-anticipation")]
    NoAnticipation,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Full => Preset::Full,
            PresetArg::NoAnticipation => Preset::NoAnticipation,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let Command::Simulate(args) = cli.command;

    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(preset) = args.preset {
        cfg.preset = preset.into();
    }
    cfg.validate()?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let out = run_simulation(cfg.clone())?;
    println!(
        "simulated {} steps ({} s at T={} s), preset {}",
        out.trace.len(),
        cfg.duration,
        cfg.step,
        cfg.preset.as_str()
    );
    if out.trace.is_empty() {
        println!("warning: zero-duration run, trace is empty");
    }

    let trace_path = args.out.join("trace.csv");
    eventsync::write_trace(&out.trace, &trace_path)?;
    let events_path = args.out.join("events.csv");
    eventsync::write_events(&out.events, &events_path)?;
    let truth_path = args.out.join("ground_truth.csv");
    let crossings = slope_change_times(&cfg.segments, cfg.g);
    eventsync::write_ground_truth(&crossings, &cfg.segments, cfg.g, &truth_path)?;
    println!("wrote {}", trace_path.display());
    println!("wrote {}", events_path.display());
    println!("wrote {}", truth_path.display());

    for ev in out.events.iter() {
        println!("event at t={:.3} s (b={:.2})", ev.time, ev.b_value);
    }
    if out.events.is_empty() {
        println!("no events detected");
    }

    if !args.no_plots {
        if out.trace.is_empty() {
            println!("warning: skipping figures for an empty trace");
        } else {
            // The comparison figure needs the opposite preset of the same
            // configuration.
            let companion_cfg = SimConfig {
                preset: cfg.preset.flipped(),
                ..cfg.clone()
            };
            let companion = run_simulation(companion_cfg)?;
            let files = emit_plots(
                &out.trace,
                &out.events,
                cfg.preset,
                Some(&companion.trace),
                &args.out,
            )?;
            for f in &files {
                println!("wrote {}", f.display());
            }
        }
    }

    Ok(())
}
