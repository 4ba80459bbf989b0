//! Writes the bundled scenarios and their networks into a directory.
//!
//! cargo run -p flowsim --example gen_scenarios -- scenarios

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use flowsim::geom::Vec2;
use flowsim::motion::CircleObstacle;
use flowsim::network::{Edge, LightColor, Node, OccupancyGrid, Phase, RoadNetwork, Spline, TrafficLight};
use flowsim::sim::{AgentSpec, Mode, ScenarioConfig};

const CELL: f64 = 1.0;

fn node(id: &str, x: f64, y: f64) -> Node {
    Node { id: id.into(), position: Vec2::new(x, y) }
}

fn edge(nodes: &[Node], from: usize, to: usize, speed_limit: f64, points: Vec<Vec2>) -> Edge {
    let spline = Spline::new(points).unwrap();
    let _ = (&nodes[from], &nodes[to]);
    Edge { from, to, length: spline.length(), speed_limit, spline }
}

fn straight(nodes: &[Node], from: usize, to: usize, speed_limit: f64) -> Edge {
    edge(nodes, from, to, speed_limit, vec![nodes[from].position, nodes[to].position])
}

/// Quarter arc of `radius` leaving `start` heading east, turning toward `side` (+1 north, -1 south).
fn quarter_turn(start: Vec2, radius: f64, side: f64, pieces: usize) -> Vec<Vec2> {
    let centre = start + Vec2::new(0.0, side * radius);
    (0..=pieces)
        .map(|i| {
            let a = FRAC_PI_2 * i as f64 / pieces as f64;
            centre + Vec2::new(radius * a.sin(), -side * radius * a.cos())
        })
        .collect()
}

fn with_grid(nodes: Vec<Node>, edges: Vec<Edge>, lights: Vec<TrafficLight>, threshold: f64) -> RoadNetwork {
    let pts: Vec<Vec2> = edges.iter().flat_map(|e| e.spline.points().iter().copied()).collect();
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = threshold + 3.0;
    let origin = Vec2::new(lo.x - pad, lo.y - pad);
    let width = ((hi.x - lo.x + 2.0 * pad) / CELL).ceil() as usize;
    let height = ((hi.y - lo.y + 2.0 * pad) / CELL).ceil() as usize;
    let grid = OccupancyGrid::rasterize_lanes(origin, CELL, width, height, edges.iter().map(|e| &e.spline), threshold).unwrap();
    RoadNetwork::new(nodes, edges, lights, grid).unwrap()
}

fn agent(spawn: &str, goal: &str, spawn_time: f64) -> AgentSpec {
    AgentSpec { spawn: spawn.into(), goal: goal.into(), mode: None, spawn_time }
}

fn base(network: &str, duration: f64, agents: Vec<AgentSpec>) -> ScenarioConfig {
    let mut cfg: ScenarioConfig =
        serde_json::from_value(serde_json::json!({"schema": "flowsim/1", "network": network, "duration": duration, "agents": []}))
            .unwrap();
    cfg.agents = agents;
    cfg
}

/// Four signalized intersections on a one-way main street with side streets.
fn town() -> (RoadNetwork, ScenarioConfig) {
    let xs = [0.0, 100.0, 200.0, 300.0];
    let mut nodes = vec![node("W", -80.0, 0.0)];
    for (k, &x) in xs.iter().enumerate() {
        nodes.push(node(&format!("I{}", k + 1), x, 0.0));
    }
    nodes.push(node("E", 380.0, 0.0));
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push(straight(&nodes, i, i + 1, 12.0));
    }
    for (k, &x) in xs.iter().enumerate() {
        for (name, side) in [("S", -1.0), ("N", 1.0)] {
            let to = nodes.len();
            nodes.push(node(&format!("{name}{}", k + 1), x + 8.0, side * 60.0));
            let mut pts = quarter_turn(Vec2::new(x, 0.0), 8.0, side, 8);
            pts.push(nodes[to].position);
            edges.push(edge(&nodes, k + 1, to, 8.0, pts));
        }
    }
    // staggered 30 s cycles on the four main approaches
    let lights = (0..4)
        .map(|k| {
            let lead = [6.0, 12.0, 15.0, 3.0][k];
            let schedule = vec![
                Phase { color: LightColor::Green, duration: lead },
                Phase { color: LightColor::Red, duration: 12.0 },
                Phase { color: LightColor::Green, duration: 18.0 - lead },
            ];
            TrafficLight::new(nodes[k + 1].position, k, schedule).unwrap()
        })
        .collect();
    let net = with_grid(nodes, edges, lights, 1.5);
    let goals = ["S1", "S2", "S3", "S4", "E", "N3"];
    let agents = goals.iter().enumerate().map(|(i, g)| agent("W", g, 4.0 * i as f64)).collect();
    let mut cfg = base("town.network.json", 240.0, agents);
    cfg.seed = 42;
    // the default clamp map is too soft to hold an 8 m turn radius inside the lane
    cfg.steering.full_lock_angle = 45.0;
    (net, cfg)
}

/// A wide straight road with an obstacle its lane spline knows nothing about.
fn obstacle() -> (RoadNetwork, ScenarioConfig) {
    let nodes = vec![node("A", 0.0, 0.0), node("B", 120.0, 0.0)];
    let edges = vec![straight(&nodes, 0, 1, 10.0)];
    let net = with_grid(nodes, edges, vec![], 6.5);
    let mut cfg = base("obstacle.network.json", 90.0, vec![agent("A", "B", 0.0)]);
    cfg.behavior.lane_half_width = 7.0;
    cfg.behavior.grid_clearance = 2.0;
    cfg.steering.full_lock_angle = 45.0;
    cfg.obstacles = vec![CircleObstacle { center: Vec2::new(60.0, 0.0), radius: 1.0 }];
    (net, cfg)
}

/// Two agents driving at each other with avoidance switched off.
fn head_on() -> (RoadNetwork, ScenarioConfig) {
    let nodes = vec![node("A", 0.0, 0.0), node("B", 100.0, 0.0)];
    let edges = vec![straight(&nodes, 0, 1, 10.0), straight(&nodes, 1, 0, 10.0)];
    let net = with_grid(nodes, edges, vec![], 1.5);
    let mut cfg = base("head_on.network.json", 60.0, vec![agent("A", "B", 0.0), agent("B", "A", 0.0)]);
    cfg.behavior.avoidance = false;
    (net, cfg)
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "scenarios".into());
    let out = Path::new(&out);
    std::fs::create_dir_all(out).unwrap();
    for (name, (net, mut cfg)) in [("town", town()), ("obstacle", obstacle()), ("head_on", head_on())] {
        cfg.mode = Mode::SplineFollow;
        std::fs::write(out.join(format!("{name}.network.json")), net.to_json() + "\n").unwrap();
        std::fs::write(out.join(format!("{name}.json")), cfg.to_json() + "\n").unwrap();
    }
}
