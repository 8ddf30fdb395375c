//! `deldyn`: model checking, bisimulation, metrics, product updates, orbits
//! and Turing machine emulation from the command line.
//!
//! Exit codes: 0 success, 1 negative answer (formula false, models not
//! bisimilar), 2 bad input, 3 an update guard failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use deldyn::action::{make_clean_map, product_update};
use deldyn::bisim::{bisimilar, n_bisimilar};
use deldyn::dynamics::{
    convergence, detect_period, distance_trace, iterate_capped, iterate_with, recurrence_at_depth, write_trace_csv,
    Metric, Orbit, Reference,
};
use deldyn::metrics::{build_prop6_spec, d_b, d_w};
use deldyn::turing::{compile_tm, period_machine, period_start, successor_phases, TapeConfig, TuringMachine};
use deldyn::{ActionModel, Error, Formula, MetricSpec, PointedModel};
use serde_json::json;

#[derive(Parser)]
#[command(name = "deldyn", version, about = "Dynamic epistemic logic as a dynamical system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at the point of a model; prints true or false.
    Check { model: PathBuf, formula: String },
    /// Decide (n-)bisimilarity of two pointed models.
    Bisim {
        x: PathBuf,
        y: PathBuf,
        /// Only compare up to this modal depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Distance between two pointed models, as JSON.
    Dist {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value = "nbisim")]
        metric: MetricKind,
        /// Metric spec JSON, for `--metric spec`.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Extra sample models for `--metric prop6`; x and y are always included.
        #[arg(long)]
        sample: Vec<PathBuf>,
        /// Levels materialized for `--metric prop6`.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Apply an action model repeatedly and write the resulting model JSON.
    Update {
        model: PathBuf,
        action: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Skip contraction after each update.
        #[arg(long)]
        raw: bool,
        /// Reject action models known to be non-exhaustive or non-deterministic.
        #[arg(long)]
        strict: bool,
    },
    /// Iterate a clean map and report period, convergence and recurrence.
    Orbit {
        model: PathBuf,
        action: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_steps: usize,
        /// Stop once an iterate has more states than this.
        #[arg(long, default_value_t = 10_000)]
        max_states: usize,
        /// Write the successive d_B trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also report which iterates agree up to this modal depth.
        #[arg(long)]
        recur_depth: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Turing machines emulated by product updates.
    Turing {
        #[command(subcommand)]
        command: TuringCommand,
    },
    /// Write a model as Graphviz DOT.
    ExportDot {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TuringCommand {
    /// Run the binary successor machine and print the decoded tape after
    /// each completed phase.
    Succ {
        #[arg(long, default_value_t = 8)]
        phases: usize,
        #[arg(long, default_value_t = 10)]
        width: usize,
        /// Print every phase, not just the last.
        #[arg(long)]
        all: bool,
    },
    /// Iterate the compiled loop machine of period n and report its period.
    Period {
        #[arg(long)]
        n: usize,
    },
    /// Emulate a machine given as JSON and print each decoded configuration.
    Run {
        #[arg(long)]
        tm: PathBuf,
        /// Tape such as `>0110`.
        #[arg(long)]
        tape: String,
        #[arg(long, default_value_t = 0)]
        head: usize,
        /// Start state name; defaults to the machine's initial state.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        width: usize,
    },
    /// Print the compiled action model of a machine as JSON.
    Compile {
        #[arg(long)]
        tm: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Nbisim,
    Prop6,
    Spec,
}

/// Outcome of a command that answers a yes/no question.
enum Answer {
    Yes,
    No,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DELDYN_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Answer::Yes) => ExitCode::SUCCESS,
        Ok(Answer::No) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let guard = err.chain().any(|e| e.downcast_ref::<Error>().is_some_and(Error::is_guard_violation));
            ExitCode::from(if guard { 3 } else { 2 })
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<PointedModel> {
    PointedModel::from_json(&read(path)?).with_context(|| format!("loading model {}", path.display()))
}

fn load_action(path: &Path, model: &PointedModel) -> anyhow::Result<ActionModel> {
    ActionModel::from_json(&read(path)?, model.sig()).with_context(|| format!("loading action model {}", path.display()))
}

fn load_machine(path: &Path) -> anyhow::Result<TuringMachine> {
    TuringMachine::from_json(&read(path)?).with_context(|| format!("loading machine {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => say(text),
    }
}

/// Print a line to stdout. A closed pipe (`deldyn ... | head`) is not an error.
fn say(text: impl std::fmt::Display) -> anyhow::Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize")
}

fn answer(yes: bool) -> anyhow::Result<Answer> {
    say(yes)?;
    Ok(if yes { Answer::Yes } else { Answer::No })
}

fn run(command: Command) -> anyhow::Result<Answer> {
    match command {
        Command::Check { model, formula } => {
            let x = load_model(&model)?;
            let f = Formula::parse(&formula, x.sig()).with_context(|| format!("parsing `{formula}`"))?;
            answer(x.eval(&f)?)
        }
        Command::Bisim { x, y, depth } => {
            let (x, y) = (load_model(&x)?, load_model(&y)?);
            let same = match depth {
                Some(n) => n_bisimilar(&x, &y, n)?,
                None => bisimilar(&x, &y)?,
            };
            answer(same)
        }
        Command::Dist {
            x,
            y,
            metric,
            spec,
            sample,
            depth,
            eps,
        } => {
            let (x, y) = (load_model(&x)?, load_model(&y)?);
            let d = match metric {
                MetricKind::Nbisim => d_b(&x, &y)?,
                MetricKind::Prop6 => {
                    let mut models = vec![x.clone(), y.clone()];
                    for path in &sample {
                        models.push(load_model(path)?);
                    }
                    d_w(&x, &y, &build_prop6_spec(&models, depth)?, eps)?
                }
                MetricKind::Spec => {
                    let Some(path) = spec else { bail!("--metric spec needs --spec FILE") };
                    let spec = MetricSpec::from_json(&read(&path)?)
                        .with_context(|| format!("loading metric spec {}", path.display()))?;
                    d_w(&x, &y, &spec, eps)?
                }
            };
            say(pretty(&json!({ "value": d.value, "error_bound": d.error_bound })))?;
            Ok(Answer::Yes)
        }
        Command::Update {
            model,
            action,
            steps,
            output,
            raw,
            strict,
        } => {
            let mut x = load_model(&model)?;
            let map = make_clean_map(load_action(&action, &x)?, std::slice::from_ref(&x), strict)?;
            for step in 1..=steps {
                let next = if raw { product_update(&x, map.model()) } else { map.apply(&x) };
                x = next.map_err(|e| e.at_step(step))?;
                log::info!("step {step}: {} states", x.num_states());
            }
            emit(output.as_deref(), &x.to_json())?;
            Ok(Answer::Yes)
        }
        Command::Orbit {
            model,
            action,
            max_steps,
            max_states,
            trace,
            recur_depth,
            output,
            strict,
        } => {
            let x = load_model(&model)?;
            let map = make_clean_map(load_action(&action, &x)?, std::slice::from_ref(&x), strict)?;
            let orbit = iterate_capped(&map, &x, max_steps, max_states)?;
            orbit_report(&orbit, trace.as_deref(), recur_depth, output.as_deref())?;
            Ok(Answer::Yes)
        }
        Command::Turing { command } => turing(command),
        Command::ExportDot { model, output } => {
            emit(output.as_deref(), &load_model(&model)?.to_dot())?;
            Ok(Answer::Yes)
        }
    }
}

fn orbit_report(
    orbit: &Orbit,
    trace: Option<&Path>,
    recur_depth: Option<usize>,
    output: Option<&Path>,
) -> anyhow::Result<()> {
    let period = detect_period(orbit)?;
    let mut report = serde_json::to_value(&period)?;
    report["steps"] = json!(orbit.step_count());
    report["stop"] = serde_json::to_value(orbit.stop())?;
    report["states"] = json!(orbit.iterates().iter().map(PointedModel::num_states).collect::<Vec<_>>());
    report["convergence"] = serde_json::to_value(convergence(orbit)?)?;
    if let Some(n) = recur_depth {
        report["recurrence"] = serde_json::to_value(recurrence_at_depth(orbit, n)?)?;
    }
    if let Some(path) = trace {
        let distances = distance_trace(orbit, Metric::Bisimulation, Reference::Successive)?;
        let mut file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(&distances, &mut file)?;
        file.flush()?;
    }
    emit(output, &pretty(&report))
}

fn turing(command: TuringCommand) -> anyhow::Result<Answer> {
    match command {
        TuringCommand::Succ { phases, width, all } => {
            let tapes = successor_phases(phases, width)?;
            if all {
                for (k, c) in tapes.iter().enumerate() {
                    say(format!("{k} {}", c.tape_string()))?;
                }
            } else {
                say(tapes[phases].tape_string())?;
            }
            Ok(Answer::Yes)
        }
        TuringCommand::Period { n } => {
            let tm = period_machine(n)?;
            let start = period_start(n);
            let compiled = compile_tm(&tm, start.extent() + 1)?;
            let x0 = compiled.encode(&start)?;
            let orbit = iterate_with(|x| compiled.step(x), &x0, 4 * n, None)?;
            orbit_report(&orbit, None, None, None)?;
            Ok(Answer::Yes)
        }
        TuringCommand::Run {
            tm,
            tape,
            head,
            state,
            steps,
            width,
        } => {
            let tm = load_machine(&tm)?;
            let state = match state {
                Some(name) => tm.state_index(&name).with_context(|| format!("unknown state `{name}`"))?,
                None => tm.initial(),
            };
            let compiled = compile_tm(&tm, width)?;
            let configs = compiled.emulate(&TapeConfig::parse(&tape, head, state)?, steps)?;
            for (k, c) in configs.iter().enumerate() {
                say(format!("{k} {} {} {}", c.tape_string(), c.head(), tm.states()[c.state()]))?;
            }
            Ok(Answer::Yes)
        }
        TuringCommand::Compile { tm } => {
            let tm = load_machine(&tm)?;
            say(compile_tm(&tm, 1)?.action_model().to_json())?;
            Ok(Answer::Yes)
        }
    }
}
