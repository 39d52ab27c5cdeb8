//! Command-line front end: plan weave schedules, execute them on the
//! simulation backends, reproduce operation counts and sweep the QND
//! error model. Exit codes: 0 success, 2 input error, 3 capacity error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use graphweaver_core::entangler::{
    reconstruct_target, run_schedule, Backend, RunConfig, SimError,
};
use graphweaver_core::graph::{GraphSpec, LatticeKind};
use graphweaver_core::plan::{
    count_operations, formula_counts, plan_schedule, validate_schedule, PlannerOptions,
    WeaveSchedule,
};
use graphweaver_core::qubus::{qnd_error_formula, qnd_error_sum, ProbeModel, QubusParams};
use graphweaver_core::state::{StateError, DEFAULT_QUBIT_CAPACITY};

const EXIT_INPUT: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match &e {
            SimError::State(StateError::Capacity { .. }) => EXIT_CAPACITY,
            _ => EXIT_INPUT,
        };
        let mut message = e.to_string();
        if code == EXIT_CAPACITY {
            message.push_str("; use --backend symbolic (or raise GRAPHWEAVER_CAPACITY)");
        }
        Self { code, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "graphweaver",
    version,
    about = "Plan and simulate spider-photon weaving of photonic graph states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    /// Vector when the register fits the qubit capacity, else symbolic.
    #[default]
    Auto,
    Vector,
    Symbolic,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a weave schedule for a target graph (edge-list file or lattice).
    Plan {
        /// Edge-list file: one "u v" pair per line, '#' comments.
        graph_file: Option<PathBuf>,
        /// Lattice shorthand: square:RxC, honeycomb:RxC or cubic:N.
        #[arg(long)]
        lattice: Option<String>,
        /// Pre-linked chain (comma-separated vertex ids); repeatable.
        #[arg(long = "block")]
        blocks: Vec<String>,
        /// Write the schedule JSON here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print entangler-operation counts (lattice formulas or a schedule).
    Count {
        /// Schedule JSON produced by `plan`.
        schedule_file: Option<PathBuf>,
        /// Cubic lattice shorthand, e.g. cubic:3.
        #[arg(long)]
        lattice: Option<String>,
    },
    /// Execute a schedule on a simulation backend.
    Simulate {
        schedule_file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        backend: BackendArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pin qubus outcomes (comma-separated integers, consumed in
        /// entangler-invocation order).
        #[arg(long)]
        force_outcomes: Option<String>,
        /// Include wall time in the report (off by default so identical
        /// seeds give byte-identical reports).
        #[arg(long)]
        timing: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep qubus parameters and emit a CSV of QND error probabilities.
    QndSweep {
        /// Qubus amplitude values: X, a,b,c or start:stop:count.
        #[arg(long, default_value = "400")]
        alpha: String,
        /// XPM phase values.
        #[arg(long, default_value = "0.01")]
        theta: String,
        /// Probe amplitude values.
        #[arg(long, default_value = "1000")]
        gamma: String,
        /// Detector efficiency values.
        #[arg(long, default_value = "1")]
        eta: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the target graph in DOT format.
    Dot {
        graph_file: Option<PathBuf>,
        #[arg(long)]
        lattice: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn qubit_capacity() -> Result<usize, CliError> {
    match std::env::var("GRAPHWEAVER_CAPACITY") {
        Err(_) => Ok(DEFAULT_QUBIT_CAPACITY),
        Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
            CliError::input(format!("GRAPHWEAVER_CAPACITY must be a positive integer, got '{}'", raw))
        }),
    }
}

fn load_graph(file: &Option<PathBuf>, lattice: &Option<String>) -> Result<GraphSpec, CliError> {
    match (file, lattice) {
        (Some(_), Some(_)) => Err(CliError::input("give either a graph file or --lattice, not both")),
        (None, None) => Err(CliError::input("a graph file or --lattice is required")),
        (Some(path), None) => {
            let text = fs::read_to_string(path)?;
            GraphSpec::parse_edge_list(&text)
                .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
        }
        (None, Some(spec)) => {
            let kind: LatticeKind = spec.parse().map_err(|e| CliError::input(format!("{}", e)))?;
            kind.build().map_err(|e| CliError::input(e.to_string()))
        }
    }
}

fn load_schedule(path: &PathBuf) -> Result<WeaveSchedule, CliError> {
    let text = fs::read_to_string(path)?;
    WeaveSchedule::from_json(&text)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

/// Value list spec: a single number, a comma list, or an inclusive
/// `start:stop:count` range.
fn parse_values(spec: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::input(format!("--{} '{}': {}", name, spec, msg));
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range must be start:stop:count"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("bad range start"))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad("bad range stop"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("bad range count"))?;
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad("not a number")))
        .collect()
}

fn cmd_plan(
    graph_file: Option<PathBuf>,
    lattice: Option<String>,
    blocks: Vec<String>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let g = load_graph(&graph_file, &lattice)?;
    let opts = PlannerOptions {
        blocks: blocks
            .iter()
            .map(|chain| chain.split(',').map(|s| s.trim().to_string()).collect())
            .collect(),
    };
    let schedule = plan_schedule(&g, &opts).map_err(|e| CliError::input(e.to_string()))?;
    let violations = validate_schedule(&schedule, &g);
    if !violations.is_empty() {
        return Err(CliError::input(format!(
            "planned schedule failed validation: {}",
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        )));
    }
    emit(&format!("{}\n", schedule.to_json()), &output)
}

fn cmd_count(schedule_file: Option<PathBuf>, lattice: Option<String>) -> Result<(), CliError> {
    match (schedule_file, lattice) {
        (Some(_), Some(_)) => Err(CliError::input("give either a schedule file or --lattice, not both")),
        (None, None) => Err(CliError::input("a schedule file or --lattice cubic:N is required")),
        (None, Some(spec)) => {
            let kind: LatticeKind =
                spec.parse().map_err(|e| CliError::input(format!("{}", e)))?;
            let n = match kind {
                LatticeKind::Cubic { n } => n as u64,
                _ => {
                    return Err(CliError::input(
                        "counting formulas are defined for cubic lattices (use --lattice cubic:N)",
                    ))
                }
            };
            let report = formula_counts(n).map_err(|e| CliError::input(e.to_string()))?;
            let g = kind.build().map_err(|e| CliError::input(e.to_string()))?;
            println!("target: cubic n={} ({} vertices, {} edges)", n, g.vertex_count(), g.edge_count());
            println!("cascade_ops {}", report.cascade_ops);
            println!("box_ops     {}", report.box_ops);
            println!("direct_ops  {}", report.direct_ops);
            Ok(())
        }
        (Some(path), None) => {
            let schedule = load_schedule(&path)?;
            println!("schedule_ops {}", count_operations(&schedule));
            Ok(())
        }
    }
}

fn cmd_simulate(
    schedule_file: PathBuf,
    backend: BackendArg,
    seed: u64,
    force_outcomes: Option<String>,
    timing: bool,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let schedule = load_schedule(&schedule_file)?;
    let capacity = qubit_capacity()?;
    let backend = match backend {
        BackendArg::Vector => Backend::Vector,
        BackendArg::Symbolic => Backend::Symbolic,
        BackendArg::Auto => {
            let target = reconstruct_target(&schedule)?;
            if target.vertex_count() + 1 <= capacity {
                Backend::Vector
            } else {
                Backend::Symbolic
            }
        }
    };
    let mut config = RunConfig::new(backend, seed);
    config.capacity = capacity;
    if let Some(raw) = force_outcomes {
        config.forced_outcomes = raw
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::input(format!("--force-outcomes: '{}' is not an integer", t)))
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    let mut report = run_schedule(&schedule, &config)?;
    if !timing {
        report.wall_time_ms = None;
    }
    emit(&format!("{}\n", report.to_json()), &output)
}

fn cmd_qnd_sweep(
    alpha: String,
    theta: String,
    gamma: String,
    eta: String,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let alphas = parse_values(&alpha, "alpha")?;
    let thetas = parse_values(&theta, "theta")?;
    let gammas = parse_values(&gamma, "gamma")?;
    let etas = parse_values(&eta, "eta")?;
    let mut csv = String::from("alpha,theta,gamma,eta,formula,sum_linearized,sum_cosine\n");
    for &a in &alphas {
        for &t in &thetas {
            for &g in &gammas {
                for &e in &etas {
                    let params = QubusParams::new(a, t, g, e)
                        .map_err(|err| CliError::input(err.to_string()))?;
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        a,
                        t,
                        g,
                        e,
                        qnd_error_formula(&params),
                        qnd_error_sum(&params, ProbeModel::Linearized),
                        qnd_error_sum(&params, ProbeModel::Cosine),
                    ));
                }
            }
        }
    }
    emit(&csv, &output)
}

fn cmd_dot(
    graph_file: Option<PathBuf>,
    lattice: Option<String>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let g = load_graph(&graph_file, &lattice)?;
    emit(&g.to_dot(), &output)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan { graph_file, lattice, blocks, output } => {
            cmd_plan(graph_file, lattice, blocks, output)
        }
        Command::Count { schedule_file, lattice } => cmd_count(schedule_file, lattice),
        Command::Simulate { schedule_file, backend, seed, force_outcomes, timing, output } => {
            cmd_simulate(schedule_file, backend, seed, force_outcomes, timing, output)
        }
        Command::QndSweep { alpha, theta, gamma, eta, output } => {
            cmd_qnd_sweep(alpha, theta, gamma, eta, output)
        }
        Command::Dot { graph_file, lattice, output } => cmd_dot(graph_file, lattice, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
