//! Command-line front end for gait training, evaluation and plotting.
//!
//! Exit codes: 0 on success, 1 for usage problems (bad flags, unparseable
//! config or schedule, invalid gait arguments), 2 for runtime faults
//! (unreadable inputs, checkpoint mismatches, training or evaluation
//! failures).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaitrl_cli::config::{parse_family, RunConfig};
use gaitrl::gait::{
    classify_gait, duty_factor, leg_phase, stride_period, Direction, GaitSpec, LegId,
};
use gaitrl::rl::{evaluate, train, write_metrics_csv, CommandSchedule, PolicyParams};
use gaitrl::sim::Morphology;
use gaitrl::symmetry::{
    expected_indicator, morphological_pairs, PhaseIndicatorConfig, PhaseKind, DEFAULT_KAPPA,
};
use gaitrl::trace::Trace;
use gaitrl::util::wrap_unit;
use gaitrl_cli::plot::{footfall_svg, trace_svg, FootfallDiagram};

#[derive(Parser)]
#[command(
    name = "gaitctl",
    version,
    about = "Train, evaluate and visualize reference-free quadruped gaits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a policy from a run configuration file.
    Train {
        /// Sectioned `key = value` configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Print a progress line every N updates (0 silences progress).
        #[arg(long, default_value_t = 1)]
        log_every: usize,
    },
    /// Roll out a trained policy deterministically and export the trace.
    Eval {
        /// Policy checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Gait family name (pronk, trot, bound, half_bound, gallop).
        #[arg(long)]
        gait: Option<String>,
        /// Explicit phase offsets "LH LF RF" as an alternative to --gait.
        #[arg(long)]
        offsets: Option<String>,
        /// Speed command: a number, `ramp:FROM:TO`, or `steps:T=V,T=V,...`.
        #[arg(long, allow_hyphen_values = true)]
        schedule: String,
        /// Seconds to simulate.
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        /// Indicator sharpness for the agreement measure.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for trace.csv and summary.txt.
        #[arg(long)]
        output: PathBuf,
    },
    /// Draw a footfall diagram from a phase set or a rollout trace.
    PlotGait {
        /// Gait family name for an ideal diagram.
        #[arg(long)]
        gait: Option<String>,
        /// Explicit phase offsets "LH LF RF" as an alternative to --gait.
        #[arg(long)]
        offsets: Option<String>,
        /// Commanded speed for the ideal diagram.
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        v_cmd: f64,
        /// Strides to draw for the ideal diagram.
        #[arg(long, default_value_t = 2)]
        strides: usize,
        /// Trace CSV from `eval`; draws measured bars and curves instead.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Indicator sharpness for the expected-weight overlay.
        #[arg(long)]
        kappa: Option<f64>,
        /// Output SVG path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Print stride timing, classification, pairs and indicator samples.
    Inspect {
        /// Gait family name.
        #[arg(long)]
        gait: Option<String>,
        /// Explicit phase offsets "LH LF RF" as an alternative to --gait.
        #[arg(long)]
        offsets: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        v_cmd: f64,
        /// Indicator sharpness.
        #[arg(long)]
        kappa: Option<f64>,
        /// Phase samples across one period.
        #[arg(long, default_value_t = 12)]
        samples: usize,
    },
}

/// Failures split by exit code: usage problems exit 1, runtime faults 2.
enum Failure {
    Usage(String),
    Runtime(String),
}

use Failure::{Runtime, Usage};

fn runtime(e: impl std::fmt::Display) -> Failure {
    Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Train {
            config,
            output,
            seed,
            log_every,
        } => cmd_train(&config, output, seed, log_every),
        Cmd::Eval {
            checkpoint,
            gait,
            offsets,
            schedule,
            duration,
            kappa,
            seed,
            output,
        } => cmd_eval(
            &checkpoint,
            gait.as_deref(),
            offsets.as_deref(),
            &schedule,
            duration,
            kappa.unwrap_or(DEFAULT_KAPPA),
            seed,
            &output,
        ),
        Cmd::PlotGait {
            gait,
            offsets,
            v_cmd,
            strides,
            trace,
            kappa,
            output,
        } => cmd_plot_gait(
            gait.as_deref(),
            offsets.as_deref(),
            v_cmd,
            strides,
            trace.as_deref(),
            kappa.unwrap_or(DEFAULT_KAPPA),
            &output,
        ),
        Cmd::Inspect {
            gait,
            offsets,
            v_cmd,
            kappa,
            samples,
        } => cmd_inspect(
            gait.as_deref(),
            offsets.as_deref(),
            v_cmd,
            kappa.unwrap_or(DEFAULT_KAPPA),
            samples,
        ),
    }
}

/// Build a gait from `--gait NAME` or `--offsets "LH LF RF"`.
fn gait_from_args(
    gait: Option<&str>,
    offsets: Option<&str>,
    v_cmd: f64,
) -> Result<GaitSpec, Failure> {
    match (gait, offsets) {
        (Some(_), Some(_)) => Err(Usage("pass --gait or --offsets, not both".into())),
        (None, None) => Err(Usage("pass --gait NAME or --offsets \"LH LF RF\"".into())),
        (Some(name), None) => {
            let fam = parse_family(name)
                .ok_or_else(|| Usage(format!("unknown gait name '{name}'")))?;
            GaitSpec::named(fam, v_cmd).map_err(|e| Usage(e.to_string()))
        }
        (None, Some(text)) => {
            let parts: Vec<f64> = text
                .split([' ', ','])
                .filter(|p| !p.is_empty())
                .map(|p| p.parse().map_err(|_| Usage(format!("bad offset '{p}'"))))
                .collect::<Result<_, _>>()?;
            if parts.len() != 3 {
                return Err(Usage(format!(
                    "--offsets needs exactly three values, got {}",
                    parts.len()
                )));
            }
            GaitSpec::new(parts[0], parts[1], parts[2], v_cmd).map_err(|e| Usage(e.to_string()))
        }
    }
}

/// Parse `--schedule`: a plain number, `ramp:FROM:TO`, or `steps:T=V,...`.
fn parse_schedule(text: &str) -> Result<CommandSchedule, Failure> {
    let num = |p: &str| -> Result<f64, Failure> {
        p.trim()
            .parse()
            .map_err(|_| Usage(format!("schedule: '{p}' is not a number")))
    };
    let schedule = if let Some(rest) = text.strip_prefix("ramp:") {
        let (from, to) = rest
            .split_once(':')
            .ok_or_else(|| Usage("schedule: ramp needs ramp:FROM:TO".into()))?;
        CommandSchedule::Ramp {
            from: num(from)?,
            to: num(to)?,
        }
    } else if let Some(rest) = text.strip_prefix("steps:") {
        let steps: Vec<(f64, f64)> = rest
            .split(',')
            .map(|pair| {
                let (t, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Usage(format!("schedule: step '{pair}' needs T=V")))?;
                Ok((num(t)?, num(v)?))
            })
            .collect::<Result<_, Failure>>()?;
        CommandSchedule::Steps(steps)
    } else {
        CommandSchedule::Constant(num(text)?)
    };
    schedule
        .validate()
        .map_err(|e| Usage(format!("schedule: {e}")))?;
    Ok(schedule)
}

fn cmd_train(
    config_path: &Path,
    output: Option<PathBuf>,
    seed: Option<u64>,
    log_every: usize,
) -> Result<(), Failure> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| Usage(format!("cannot read {}: {e}", config_path.display())))?;
    let mut rc = RunConfig::parse(&text).map_err(|e| Usage(e.to_string()))?;
    if let Some(dir) = output {
        rc.output_dir = dir;
    }
    if let Some(s) = seed {
        rc.seed = s;
    }
    let train_cfg = rc.to_train_config().map_err(|e| Usage(e.to_string()))?;

    fs::create_dir_all(&rc.output_dir).map_err(runtime)?;
    // Echo the fully resolved configuration first so interrupted runs can
    // still be reproduced; it re-parses to the same RunConfig.
    fs::write(rc.output_dir.join("config.resolved"), rc.serialize()).map_err(runtime)?;

    let outcome = train(&train_cfg, |row| {
        if log_every > 0 && row.update as usize % log_every == 0 {
            println!(
                "update {:5}  steps {:9}  reward/step {:6.3}  track |v_x err| {:5.3}  \
                 agreement {:5.3}  episodes {}",
                row.update,
                row.env_steps,
                row.mean_reward,
                row.rolling_tracking,
                row.rolling_agreement,
                row.episodes
            );
        }
    })
    .map_err(runtime)?;

    write_metrics_csv(&outcome.metrics, &rc.output_dir.join("metrics.csv")).map_err(runtime)?;
    println!(
        "done: {} env steps, {} updates, {} episodes{}",
        outcome.env_steps,
        outcome.updates,
        outcome.episodes,
        if outcome.stopped_early {
            " (stopped early on the rolling thresholds)"
        } else {
            ""
        }
    );
    println!(
        "wrote {} and checkpoints under {}",
        rc.output_dir.join("metrics.csv").display(),
        rc.output_dir.join("checkpoints").display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    checkpoint: &Path,
    gait: Option<&str>,
    offsets: Option<&str>,
    schedule_text: &str,
    duration: f64,
    kappa: f64,
    seed: u64,
    output: &Path,
) -> Result<(), Failure> {
    let schedule = parse_schedule(schedule_text)?;
    let v0 = schedule.value(0.0, duration.max(1e-9));
    let spec = gait_from_args(gait, offsets, v0)?;
    let params = PolicyParams::load(checkpoint).map_err(runtime)?;

    let (trace, summary) = evaluate(
        &params,
        &Morphology::default(),
        &spec,
        &schedule,
        duration,
        kappa,
        seed,
    )
    .map_err(runtime)?;

    fs::create_dir_all(output).map_err(runtime)?;
    let mut file = fs::File::create(output.join("trace.csv")).map_err(runtime)?;
    trace.write_csv(&mut file).map_err(runtime)?;
    let report = format_summary(&summary);
    fs::write(output.join("summary.txt"), &report).map_err(runtime)?;
    print!("{report}");
    println!("wrote {}", output.join("trace.csv").display());
    Ok(())
}

fn format_summary(s: &gaitrl::rl::EvalSummary) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("steps", s.steps.to_string());
    kv("duration", format!("{:.3}", s.duration));
    kv("mean_abs_vx_err", format!("{:.4}", s.mean_abs_vx_err));
    kv("agreement", format!("{:.4}", s.agreement));
    kv("mean_reward", format!("{:.4}", s.mean_reward));
    kv("mean_command", format!("{:.4}", s.mean_command));
    kv("mean_smoothness", format!("{:.4}", s.mean_smoothness));
    kv("mean_temporal", format!("{:.4}", s.mean_temporal));
    kv("mean_morphological", format!("{:.4}", s.mean_morphological));
    kv("fell", s.fell.to_string());
    kv("faulted", s.faulted.to_string());
    out
}

fn cmd_plot_gait(
    gait: Option<&str>,
    offsets: Option<&str>,
    v_cmd: f64,
    strides: usize,
    trace_path: Option<&Path>,
    kappa: f64,
    output: &Path,
) -> Result<(), Failure> {
    let (svg, diag) = if let Some(path) = trace_path {
        let file = fs::File::open(path)
            .map_err(|e| Runtime(format!("cannot open {}: {e}", path.display())))?;
        let trace = Trace::read_csv(std::io::BufReader::new(file)).map_err(runtime)?;
        let title = format!("measured footfall: {}", path.display());
        let svg = trace_svg(&trace, kappa, &title).map_err(runtime)?;
        (svg, FootfallDiagram::from_trace(&trace).map_err(runtime)?)
    } else {
        if strides == 0 {
            return Err(Usage("--strides must be at least 1".into()));
        }
        let spec = gait_from_args(gait, offsets, v_cmd)?;
        let diag = FootfallDiagram::from_spec(&spec, strides).map_err(runtime)?;
        let name = gait
            .map(str::to_string)
            .unwrap_or_else(|| format!("offsets {:?}", spec.offsets()));
        let svg = footfall_svg(&diag, &format!("ideal footfall: {name}, v = {v_cmd} m/s"));
        (svg, diag)
    };
    for leg in LegId::ALL {
        println!(
            "{} stance fraction: {:.3}",
            leg.label(),
            diag.stance_fraction(leg)
        );
    }
    if let Some(dir) = output.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(runtime)?;
        }
    }
    fs::write(output, svg).map_err(runtime)?;
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_inspect(
    gait: Option<&str>,
    offsets: Option<&str>,
    v_cmd: f64,
    kappa: f64,
    samples: usize,
) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Usage("--samples must be at least 1".into()));
    }
    let spec = gait_from_args(gait, offsets, v_cmd)?;
    let period = stride_period(v_cmd, 0.0).map_err(runtime)?;
    let duty = duty_factor(v_cmd, 0.0).map_err(runtime)?;
    let family = classify_gait(&spec, 0.01);
    let group = morphological_pairs(&spec, 0.01).map_err(runtime)?;
    let cfg = PhaseIndicatorConfig::new(duty, kappa).map_err(runtime)?;
    let direction = Direction::from_command(v_cmd);

    let off = spec.offsets();
    let mut out = std::io::stdout().lock();
    let w = &mut out;
    let _ = writeln!(
        w,
        "phase set        : LH={:.3} LF={:.3} RF={:.3} RH={:.3}",
        off[0], off[1], off[2], off[3]
    );
    let _ = writeln!(w, "command          : {v_cmd} m/s");
    let _ = writeln!(w, "stride period T  : {period:.6} s");
    let _ = writeln!(w, "duty factor      : {duty:.6}");
    let _ = writeln!(w, "classified family: {family}");
    let pairs: Vec<String> = group.active_pairs().map(|p| p.to_string()).collect();
    let _ = writeln!(
        w,
        "active pairs     : {}",
        if pairs.is_empty() {
            "none".to_string()
        } else {
            pairs.join(" ")
        }
    );
    let _ = writeln!(w);
    let _ = writeln!(
        w,
        "{:>6}  {:>13}  {:>13}  {:>13}  {:>13}",
        "phase", "LH st/sw", "LF st/sw", "RF st/sw", "RH st/sw"
    );
    for k in 0..samples {
        let phase = k as f64 / samples as f64;
        let t = phase * period;
        let mut cells = Vec::with_capacity(4);
        for leg in LegId::ALL {
            let local = leg_phase(t, period, spec.offset(leg), direction).map_err(runtime)?;
            let local = wrap_unit(local);
            let swing = expected_indicator(local, &cfg, PhaseKind::Swing).map_err(runtime)?;
            cells.push(format!("{:.3}/{:.3}", 1.0 - swing, swing));
        }
        let _ = writeln!(
            w,
            "{phase:>6.3}  {:>13}  {:>13}  {:>13}  {:>13}",
            cells[0], cells[1], cells[2], cells[3]
        );
    }
    Ok(())
}
