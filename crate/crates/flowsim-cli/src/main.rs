use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use flowsim::ca::{ring_sample, sweep_densities, CaParams};
use flowsim::geom::Vec2;
use flowsim::motion::{
    check_limits, field_plan, grid_plan, quintic_connect, sample_plan, Boundary, ControlLimits, FieldGains, MotionError,
};
use flowsim::network::RoadNetwork;
use flowsim::routing::{Algorithm, Graph, RouteError, Router, Weighting};
use flowsim::sim::{self, ScenarioConfig, SimError, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const COLLISION: u8 = 2;
    pub const UNREACHABLE: u8 = 3;
    pub const DISAGREEMENT: u8 = 4;
    /// Ran cleanly, but not every agent parked.
    pub const INCOMPLETE: u8 = 5;
}

#[derive(Parser)]
#[command(name = "flowsim", version, about = "Deterministic microscopic traffic simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.jsonl and metrics.json.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Shortest route between two nodes.
    Route {
        network: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// dijkstra, astar, alt, arcflags, ch or reach
        #[arg(long, default_value = "dijkstra")]
        algo: String,
    },
    /// Compare every routing technique on random queries (CSV on stdout).
    Bench {
        network: PathBuf,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ring-road cellular automaton; fundamental diagram as CSV on stdout.
    Ca {
        #[arg(long, default_value_t = 1000)]
        length: usize,
        /// A single density; without it, 21 densities from 0 to 1.
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, default_value_t = 5)]
        vmax: u32,
        /// Random slowdown probability.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write a flow-vs-density scatter plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Local path between two points on a network's occupancy grid.
    Plan {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, value_parser = parse_point)]
        from: Vec2,
        #[arg(long, value_parser = parse_point)]
        to: Vec2,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a scenario in both steering modes; write eval.json and eval.svg.
    Eval {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Astar,
    Rrt,
    Field,
    Quintic,
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got \"{s}\""))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    Ok(Vec2::new(num(x)?, num(y)?))
}

/// A failure with its exit code and one-line diagnostic.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl std::fmt::Display) -> Self {
        Failure { code: exit::USAGE, message: message.to_string() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Unreachable { .. } | SimError::Route(RouteError::Unreachable) => exit::UNREACHABLE,
            _ => exit::USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn load_network(path: &Path) -> Result<RoadNetwork, Failure> {
    RoadNetwork::load(path).map_err(Failure::usage)
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let fail = |e: &dyn std::fmt::Display| Failure::usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_run(scenario: &Path, out: &Path, seed: Option<u64>) -> Result<u8, Failure> {
    let mut cfg = ScenarioConfig::load(scenario)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let net = load_network(&cfg.network)?;
    create_dir(out)?;
    log::info!("running {} agents for up to {} s", cfg.agents.len(), cfg.duration);
    let (records, report) = World::new(cfg, net)?.run();
    let mut trace = String::new();
    for r in &records {
        trace.push_str(&r.to_line());
        trace.push('\n');
    }
    write_atomic(&out.join("trace.jsonl"), trace.as_bytes())?;
    write_atomic(&out.join("metrics.json"), (report.to_json() + "\n").as_bytes())?;
    Ok(if report.summary.total_collisions > 0 {
        exit::COLLISION
    } else if report.all_parked_safely() {
        exit::OK
    } else {
        exit::INCOMPLETE
    })
}

fn cmd_route(network: &Path, from: &str, to: &str, algo: &str) -> Result<u8, Failure> {
    let algo: Algorithm = algo.parse().map_err(Failure::usage)?;
    let net = load_network(network)?;
    let (s, t) = (net.node_index(from).map_err(Failure::usage)?, net.node_index(to).map_err(Failure::usage)?);
    let started = Instant::now();
    let router = Router::build(Graph::from_network(&net, Weighting::Length), algo, 0).map_err(Failure::usage)?;
    let preprocess_ms = started.elapsed().as_secs_f64() * 1e3;
    let started = Instant::now();
    let result = router.query(s, t);
    let query_us = started.elapsed().as_secs_f64() * 1e6;
    match result {
        Ok(route) => {
            let path: Vec<&str> = route.nodes.iter().map(|&v| net.node_id(v)).collect();
            let out = json!({
                "cost": route.cost,
                "path": path,
                "scanned_vertices": route.scanned_vertices,
                "preprocess_ms": preprocess_ms,
                "query_us": query_us,
            });
            println!("{out}");
            Ok(exit::OK)
        }
        Err(RouteError::Unreachable) => {
            println!("{}", json!({"error": "unreachable"}));
            Ok(exit::UNREACHABLE)
        }
        Err(e) => Err(Failure::usage(e)),
    }
}

fn cmd_bench(network: &Path, queries: usize, seed: u64) -> Result<u8, Failure> {
    let net = load_network(network)?;
    let n = net.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> =
        if n == 0 { Vec::new() } else { (0..queries).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect() };
    println!("algorithm,preprocess_ms,mean_scanned_vertices,mean_query_us,unreachable,cost_checksum");
    if pairs.is_empty() {
        return Ok(exit::OK);
    }
    let mut reference: Option<Vec<Option<f64>>> = None;
    let mut disagreements = 0;
    for algo in Algorithm::ALL {
        let started = Instant::now();
        let router = Router::build(Graph::from_network(&net, Weighting::Length), algo, seed).map_err(Failure::usage)?;
        let preprocess_ms = started.elapsed().as_secs_f64() * 1e3;
        let (mut scanned, mut micros) = (0usize, 0.0);
        let mut costs = Vec::with_capacity(pairs.len());
        for &(s, t) in &pairs {
            let started = Instant::now();
            let r = router.query(s, t);
            micros += started.elapsed().as_secs_f64() * 1e6;
            match r {
                Ok(route) => {
                    scanned += route.scanned_vertices;
                    costs.push(Some(route.cost));
                }
                Err(RouteError::Unreachable) => costs.push(None),
                Err(e) => return Err(Failure::usage(e)),
            }
        }
        let unreachable = costs.iter().filter(|c| c.is_none()).count();
        let checksum: f64 = costs.iter().flatten().sum();
        let q = pairs.len() as f64;
        println!("{algo},{preprocess_ms:.3},{:.3},{:.3},{unreachable},{checksum}", scanned as f64 / q, micros / q);
        match &reference {
            None => reference = Some(costs),
            Some(expected) => {
                for (i, (a, b)) in expected.iter().zip(&costs).enumerate() {
                    if a != b {
                        disagreements += 1;
                        log::error!("{algo} disagrees with dijkstra on query {i} {:?}: {b:?} vs {a:?}", pairs[i]);
                    }
                }
            }
        }
    }
    if disagreements > 0 {
        return Err(Failure { code: exit::DISAGREEMENT, message: format!("{disagreements} query results disagree with dijkstra") });
    }
    Ok(exit::OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_ca(
    length: usize,
    density: Option<f64>,
    vmax: u32,
    p: f64,
    steps: usize,
    seed: u64,
    svg: Option<&Path>,
) -> Result<u8, Failure> {
    if let Some(d) = density {
        if !(0.0..=1.0).contains(&d) {
            return Err(Failure::usage(format!("density {d} not in [0, 1]")));
        }
    }
    if steps == 0 {
        return Err(Failure::usage("steps must be at least 1"));
    }
    let params = CaParams { length, closed: true, vmax, p_slow: p, seed, ..CaParams::default() };
    let densities = density.map_or_else(|| sweep_densities(21), |d| vec![d]);
    let mut csv = String::from("density,flow,mean_speed\n");
    let mut points = Vec::with_capacity(densities.len());
    for d in densities {
        let s = ring_sample(&params, d, steps).map_err(Failure::usage)?;
        csv.push_str(&format!("{},{},{}\n", s.density, s.flow, s.mean_speed));
        points.push((s.density, s.flow));
    }
    print!("{csv}");
    if let Some(path) = svg {
        write_atomic(path, flowsim::svg::scatter(&points, "density", "flow").as_bytes())?;
    }
    Ok(exit::OK)
}

fn cmd_plan(grid: &Path, from: Vec2, to: Vec2, method: Method, seed: u64) -> Result<u8, Failure> {
    let net = load_network(grid)?;
    let grid = net.grid();
    let no_path = |e: MotionError| match e {
        MotionError::NoPath | MotionError::Stalled { .. } => {
            println!("{}", json!({"error": e.to_string()}));
            Ok(exit::UNREACHABLE)
        }
        other => Err(Failure::usage(other)),
    };
    let needs_grid = || if grid.is_empty() { Err(Failure::usage("network has no occupancy grid")) } else { Ok(()) };
    let (name, points, extra) = match method {
        Method::Astar => {
            needs_grid()?;
            let cell = |p: Vec2| grid.cell_of(p).ok_or_else(|| Failure::usage(format!("({}, {}) is outside the grid", p.x, p.y)));
            match grid_plan(grid, cell(from)?, cell(to)?) {
                Ok(path) => ("astar", path.points, json!({"cost": path.cost, "expanded": path.expanded})),
                Err(e) => return no_path(e),
            }
        }
        Method::Rrt => {
            needs_grid()?;
            match sample_plan(grid, from, to, 20_000, seed) {
                Ok(points) => ("rrt", points, json!({})),
                Err(e) => return no_path(e),
            }
        }
        Method::Field => match field_plan(from, to, &[], &FieldGains::default(), 0.5, 10_000) {
            Ok(points) => ("field", points, json!({})),
            Err(e) => return no_path(e),
        },
        Method::Quintic => {
            // rest to rest, as fast as the default acceleration limit allows
            let limits = ControlLimits::default();
            let d = from.distance(to);
            let duration = (10.0 * 3f64.sqrt() / 3.0 * d / limits.max_accel).sqrt().max(0.1);
            let traj = quintic_connect(&Boundary::at_rest(from), &Boundary::at_rest(to), duration).map_err(Failure::usage)?;
            let samples = traj.sample(0.1).map_err(Failure::usage)?;
            let violations = check_limits(&samples, &limits).map_err(Failure::usage)?;
            ("quintic", samples.points(), json!({"duration": duration, "limit_violations": violations.len()}))
        }
    };
    let length: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
    let pts: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let mut out = json!({"method": name, "length": length, "points": pts});
    if let (Some(o), Some(e)) = (out.as_object_mut(), extra.as_object()) {
        o.extend(e.clone());
    }
    println!("{out}");
    Ok(exit::OK)
}

fn cmd_eval(scenario: &Path, out: &Path) -> Result<u8, Failure> {
    let cfg = ScenarioConfig::load(scenario)?;
    let net = load_network(&cfg.network)?;
    create_dir(out)?;
    let started = Instant::now();
    let (report, runs) = sim::evaluate_modes(&cfg, &net)?;
    // wall time varies run to run, so it stays out of the files
    eprintln!("evaluated {} modes in {:.3} s", runs.len(), started.elapsed().as_secs_f64());
    write_atomic(&out.join("eval.json"), (report.to_json() + "\n").as_bytes())?;
    write_atomic(&out.join("eval.svg"), sim::overlay_svg(&net, &runs).as_bytes())?;
    Ok(exit::OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLOWSIM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { scenario, out, seed } => cmd_run(scenario, out, *seed),
        Command::Route { network, from, to, algo } => cmd_route(network, from, to, algo),
        Command::Bench { network, queries, seed } => cmd_bench(network, *queries, *seed),
        Command::Ca { length, density, vmax, p, steps, seed, svg } => {
            cmd_ca(*length, *density, *vmax, *p, *steps, *seed, svg.as_deref())
        }
        Command::Plan { grid, from, to, method, seed } => cmd_plan(grid, *from, *to, *method, *seed),
        Command::Eval { scenario, out } => cmd_eval(scenario, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
