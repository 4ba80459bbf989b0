use std::path::{Path, PathBuf};

use flowsim::routing::{dijkstra, Graph, Weighting};
use flowsim::sim::{Mode, ScenarioConfig, Status, World};
use flowsim::RoadNetwork;

fn scenario(name: &str) -> (ScenarioConfig, RoadNetwork) {
    let dir: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let cfg = ScenarioConfig::load(dir.join(name)).unwrap();
    let net = RoadNetwork::load(&cfg.network).unwrap();
    (cfg, net)
}

/// Speed limit of the route edge under the agent's projection onto its lane route.
fn lane_limit(net: &RoadNetwork, agent: &flowsim::sim::Agent) -> f64 {
    let s = agent.lane.nearest(agent.state.position).s;
    let mut start = 0.0;
    for &e in &agent.route_edges {
        let edge = &net.edges()[e];
        if s <= start + edge.spline.length() {
            return edge.speed_limit;
        }
        start += edge.spline.length();
    }
    net.edges()[*agent.route_edges.last().unwrap()].speed_limit
}

#[test]
fn town_invariants_hold_every_tick() {
    let (cfg, net) = scenario("town.json");
    for mode in Mode::BOTH {
        let mut world = World::new(cfg.with_mode(mode), net.clone()).unwrap();
        let mut frozen: Vec<Option<(f64, f64, f64)>> = vec![None; world.agents().len()];
        let mut last_tick = None;
        loop {
            let rec = world.observe();
            assert!(last_tick.is_none_or(|t| rec.tick > t));
            last_tick = Some(rec.tick);
            assert_eq!(rec.agents.len(), world.agents().iter().filter(|a| a.spawned).count());
            for a in world.agents().iter().filter(|a| a.spawned) {
                let limit = lane_limit(&net, a);
                assert!(a.state.speed <= limit + 1e-6, "{mode:?} agent {} at {} over {limit}", a.id, a.state.speed);
                let now = (a.state.position.x, a.state.position.y, a.state.speed);
                match frozen[a.id] {
                    Some(then) => assert_eq!(then, now, "agent {} moved after terminating", a.id),
                    None if a.is_terminal() => frozen[a.id] = Some(now),
                    None => {}
                }
            }
            if world.tick() >= world.max_ticks() || world.is_finished() {
                break;
            }
            world.step();
        }
        assert!(world.agents().iter().all(|a| a.status == Status::Parked));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (cfg, net) = scenario("town.json");
    let render = || {
        let (records, report) = World::new(cfg.clone(), net.clone()).unwrap().run();
        let mut text: String = records.iter().map(|r| r.to_line() + "\n").collect();
        text.push_str(&report.to_json());
        text
    };
    assert_eq!(render(), render());
}

#[test]
fn routes_match_dijkstra_on_a_diamond() {
    let text = r#"{
      "nodes": [{"id": "S", "x": 0, "y": 0}, {"id": "U", "x": 10, "y": 10}, {"id": "D", "x": 10, "y": -10}, {"id": "T", "x": 20, "y": 0}],
      "edges": [
        {"from": "S", "to": "U", "length": 14.2, "speed_limit": 10, "spline": [[0,0],[10,10]]},
        {"from": "U", "to": "T", "length": 14.2, "speed_limit": 10, "spline": [[10,10],[20,0]]},
        {"from": "S", "to": "D", "length": 14.0, "speed_limit": 10, "spline": [[0,0],[10,-10]]},
        {"from": "D", "to": "T", "length": 14.5, "speed_limit": 10, "spline": [[10,-10],[20,0]]}
      ]
    }"#;
    let net = RoadNetwork::from_json(text).unwrap();
    let mut cfg: ScenarioConfig = serde_json::from_value(serde_json::json!({
        "schema": "flowsim/1", "network": "unused", "duration": 10,
        "agents": [{"spawn": "S", "goal": "T"}]
    }))
    .unwrap();
    cfg.mode = Mode::SplineFollow;
    let world = World::new(cfg, net.clone()).unwrap();
    let g = Graph::from_network(&net, Weighting::Length);
    let oracle = dijkstra(&g, 0, 3).unwrap();
    let agent = &world.agents()[0];
    assert_eq!(agent.route.nodes, oracle.nodes);
    assert_eq!(agent.route.cost, 28.4);
    assert_eq!(agent.route_edges, vec![0, 1]);
}

#[test]
fn single_edge_guidance_is_the_lane() {
    let (cfg, net) = scenario("obstacle.json");
    let world = World::new(cfg.with_mode(Mode::SplineFollow), net.clone()).unwrap();
    let a = &world.agents()[0];
    assert_eq!(a.route_edges, vec![0]);
    assert_eq!(a.guidance, net.edges()[0].spline);
}
