use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use girg_nav::config::parse_config;
use girg_nav::experiments::{
    read_trials_csv, run_experiment, summarize, sweep_wmin, write_curve_csv, write_summary_csv, write_trials_csv,
    ModelSpec,
};
use girg_nav::hyperbolic::sample_hyperbolic_graph;
use girg_nav::io::{load_graph, save_graph, write_girg_graph};
use girg_nav::model::sample_graph;
use girg_nav::patching::{default_patch_step_limit, patch_route, patch_route_history};
use girg_nav::rng::{phase_rng, Phase};
use girg_nav::routing::{default_step_limit, greedy_route, ObjectiveSpec, Relaxation};
use girg_nav::{Error, Graph};

#[derive(Parser)]
#[command(name = "girg-nav", version, about = "Random graph sampling and greedy routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph from the model section of a config file.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Route one message on a stored graph.
    Route {
        #[arg(long)]
        graph: PathBuf,
        /// Vertex id or `random`.
        #[arg(long, default_value = "random")]
        source: String,
        /// Vertex id or `random`.
        #[arg(long, default_value = "random")]
        target: String,
        #[arg(long, value_enum, default_value_t = Algo::Greedy)]
        algo: Algo,
        #[arg(long, value_enum, default_value_t = Obj::Phi)]
        objective: Obj,
        /// Seed for random endpoints.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seed of the relaxed objective.
        #[arg(long, default_value_t = 0)]
        relax_seed: u64,
        #[arg(long)]
        step_limit: Option<usize>,
        /// Print the per-step trace or event log.
        #[arg(long)]
        trace: bool,
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the trials of a config file and write one CSV row per trial.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the summary table.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Also write the failure-rate curve of a w_min sweep.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Summarize a trial CSV.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a hyperbolic graph in embedded GIRG coordinates.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Greedy,
    Patch,
    PatchHistory,
}

#[derive(Clone, Copy, ValueEnum)]
enum Obj {
    Phi,
    PhiRelaxed,
    PhiH,
}

/// Exit status: 2 for configuration or argument errors, 3 for I/O and
/// file-format errors.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidInput(_) => 2,
        Error::Io(_) | Error::Parse { .. } => 3,
    }
}

fn read_config(path: &Path) -> Result<girg_nav::experiments::ExperimentConfig, Error> {
    parse_config(&fs::read_to_string(path)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn endpoint(arg: &str, g: &Graph, rng: &mut impl Rng, avoid: Option<usize>) -> Result<usize, Error> {
    let n = g.vertex_count();
    if arg != "random" {
        let v: usize = arg
            .parse()
            .map_err(|_| Error::InvalidInput(format!("`{arg}` is not a vertex id or `random`")))?;
        g.check_vertex(v)?;
        return Ok(v);
    }
    match avoid {
        Some(s) if n >= 2 => {
            let t = rng.random_range(0..n - 1);
            Ok(if t >= s { t + 1 } else { t })
        }
        None if n >= 1 => Ok(rng.random_range(0..n)),
        _ => Err(Error::InvalidInput("graph too small for random endpoints".into())),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate { config, out } => {
            let cfg = read_config(&config)?;
            let g = match &cfg.model {
                ModelSpec::Girg(p) => sample_graph(p)?,
                ModelSpec::Hyperbolic(p) => sample_hyperbolic_graph(p)?,
            };
            save_graph(&g, out)
        }
        Command::Route {
            graph,
            source,
            target,
            algo,
            objective,
            seed,
            relax_seed,
            step_limit,
            trace,
            out,
        } => {
            let g = load_graph(graph)?;
            let mut rng = phase_rng(seed, Phase::Pairs);
            let s = endpoint(&source, &g, &mut rng, None)?;
            let t = endpoint(&target, &g, &mut rng, Some(s))?;
            let spec = match objective {
                Obj::Phi => ObjectiveSpec::Phi,
                Obj::PhiRelaxed => ObjectiveSpec::PhiRelaxed(Relaxation {
                    seed: relax_seed,
                    ..Relaxation::default()
                }),
                Obj::PhiH => ObjectiveSpec::PhiH,
            };
            let obj = spec.bind(&g, t)?;
            let n = g.vertex_count();
            let mut text = format!("source {s}\ntarget {t}\nobjective {}\n", spec.name());
            match algo {
                Algo::Greedy => {
                    let r = greedy_route(&g, s, obj.as_ref(), step_limit.unwrap_or_else(|| default_step_limit(n)))?;
                    let _ = writeln!(text, "algorithm greedy\nstatus {}\nsteps {}", r.status, r.steps);
                    write_path(&mut text, &r.path);
                    if trace {
                        text.push_str("trace\n");
                        for (i, st) in r.trace.iter().enumerate() {
                            let _ = writeln!(text, "{} {} {} {}", i + 1, st.vertex, st.score, st.inspected);
                        }
                    }
                }
                Algo::Patch | Algo::PatchHistory => {
                    let limit = step_limit.unwrap_or_else(|| default_patch_step_limit(n));
                    let (name, o) = if matches!(algo, Algo::Patch) {
                        ("patch", patch_route(&g, s, obj.as_ref(), limit)?)
                    } else {
                        ("patch-history", patch_route_history(&g, s, obj.as_ref(), limit)?)
                    };
                    let _ = writeln!(
                        text,
                        "algorithm {name}\nstatus {}\nsteps {}\ndistinct_visited {}\nmax_vertex_memory_words {}",
                        o.status, o.steps, o.distinct_visited, o.max_vertex_memory_words
                    );
                    write_path(&mut text, &o.path);
                    if trace {
                        text.push_str("events\n");
                        text.push_str(&o.event_log_text());
                    }
                }
            }
            let mut w = output(out.as_deref())?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
            Ok(())
        }
        Command::Experiment {
            config,
            out,
            summary,
            curve,
        } => {
            let cfg = read_config(&config)?;
            let records = if curve.is_some() {
                let (c, records) = sweep_wmin(&cfg)?;
                write_curve_csv(&c, File::create(curve.as_deref().expect("checked"))?)?;
                records
            } else {
                run_experiment(&cfg)?
            };
            write_trials_csv(&records, File::create(&out)?)?;
            if let Some(path) = summary {
                if !records.is_empty() {
                    write_summary_csv(&summarize(&records)?, File::create(path)?)?;
                }
            }
            Ok(())
        }
        Command::Stats { input, out } => {
            let records = read_trials_csv(BufReader::new(File::open(input)?))?;
            let rows = summarize(&records)?;
            let mut w = output(out.as_deref())?;
            write_summary_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Convert { input, out } => {
            let g = load_graph(input)?;
            if g.hyperbolic().is_none() {
                return Err(Error::InvalidInput("input is not a hyperbolic graph".into()));
            }
            write_girg_graph(&g, File::create(out)?)
        }
    }
}

fn write_path(text: &mut String, path: &[usize]) {
    text.push_str("path");
    for v in path {
        let _ = write!(text, " {v}");
    }
    text.push('\n');
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("girg-nav: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
