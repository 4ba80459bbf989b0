use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Segment, Vec2};
use crate::motion::{
    grid_plan, kinematic_step, pure_pursuit, spline_steering_in_range, VehicleState,
};
use crate::network::{LightColor, OccupancyGrid, RoadNetwork, Spline};
use crate::perception::{Listener, PerceptionSystem, Pose, SightConfig, SourceId, Stimulus, StimulusKind};
use crate::routing::{Graph, Route, RouteError, Router, Weighting};

use super::metrics::{AgentMetrics, MetricsReport, WorkCounters};
use super::trace::{AgentRecord, EventRecord, LightRecord, TickRecord};
use super::{Mode, ScenarioConfig, SimError, Status};

/// Below this speed an agent counts as standing still.
const STANDSTILL: f64 = 0.1;
/// Time constant of the final approach to a standstill point, seconds.
const SETTLE_TIME: f64 = 1.0;
/// Closer than this to a standstill point counts as there, meters.
const STOP_DEADBAND: f64 = 0.05;
/// How far behind the last projection a new one may land, meters.
const TRACK_BACK: f64 = 5.0;
/// How far ahead of the last projection a new one may land, meters.
const TRACK_AHEAD: f64 = 25.0;

#[derive(Debug, Clone, Copy)]
struct Section {
    s0: f64,
    speed_limit: f64,
}

#[derive(Debug, Clone, Copy)]
struct StopLine {
    light: usize,
    /// Arc length on the lane route.
    s: f64,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub id: usize,
    pub mode: Mode,
    pub spawn_time: f64,
    pub spawned: bool,
    pub state: VehicleState,
    pub status: Status,
    pub route: Route,
    pub route_edges: Vec<usize>,
    pub goal: Vec2,
    /// Concatenated lane splines of the route.
    pub lane: Spline,
    /// What the steering follows: the lane route or the grid path.
    pub guidance: Spline,
    sections: Vec<Section>,
    stops: Vec<StopLine>,
    curves: Vec<(f64, f64)>,
    lane_s: f64,
    guide_s: f64,
    target_speed: f64,
    held_controls: (f64, f64),
    pub metrics: AgentMetrics,
    prev_accel: Option<f64>,
}

impl Agent {
    pub fn is_terminal(&self) -> bool {
        matches!(self.status, Status::Parked | Status::Collided)
    }

    pub fn is_active(&self) -> bool {
        self.spawned && !self.is_terminal()
    }

    pub fn front(&self, radius: f64) -> Vec2 {
        self.state.position + self.state.direction() * radius
    }

    fn record(&self) -> AgentRecord {
        AgentRecord {
            id: self.id,
            x: self.state.position.x,
            y: self.state.position.y,
            heading: self.state.heading,
            speed: self.state.speed,
            steering: self.state.steering,
            status: self.status,
        }
    }
}

/// Simulation state advanced by [`World::step`].
pub struct World {
    cfg: ScenarioConfig,
    net: RoadNetwork,
    agents: Vec<Agent>,
    perception: PerceptionSystem,
    lane_segments: Vec<Segment>,
    tick: u64,
    touching: BTreeSet<(usize, Contact)>,
    work: WorkCounters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Contact {
    Agent(usize),
    Obstacle(usize),
}

fn speed_to_stop(distance: f64, decel: f64) -> f64 {
    if distance <= STOP_DEADBAND {
        0.0
    } else {
        (2.0 * decel * distance).sqrt().min(distance / SETTLE_TIME)
    }
}

/// Time to cover `d` starting at `v`, accelerating at `a` up to `cap`.
fn eta(d: f64, v: f64, a: f64, cap: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let cap = cap.max(v);
    let t_ramp = (cap - v) / a;
    let d_ramp = v * t_ramp + 0.5 * a * t_ramp * t_ramp;
    if d <= d_ramp {
        ((v * v + 2.0 * a * d).sqrt() - v) / a
    } else {
        t_ramp + (d - d_ramp) / cap.max(1e-9)
    }
}

impl World {
    /// Loads nothing itself: the caller passes the already-loaded network.
    pub fn new(cfg: ScenarioConfig, net: RoadNetwork) -> Result<Self, SimError> {
        cfg.validate()?;
        let graph = Graph::from_network(&net, Weighting::Length);
        let router = Router::build(graph, cfg.routing, cfg.seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let plan_grid = stamp_obstacles(&net, &cfg);
        let mut work = WorkCounters::default();
        let mut agents = Vec::with_capacity(cfg.agents.len());
        for (id, spec) in cfg.agents.iter().enumerate() {
            let from = net.node_index(&spec.spawn)?;
            let to = net.node_index(&spec.goal)?;
            let route = router.query(from, to).map_err(|e| match e {
                RouteError::Unreachable => SimError::Unreachable { agent: id, from: spec.spawn.clone(), to: spec.goal.clone() },
                other => SimError::Route(other),
            })?;
            work.route_scanned += route.scanned_vertices as u64;
            let mode = spec.mode.unwrap_or(cfg.mode);
            let jitter = if cfg.behavior.spawn_jitter > 0.0 { rng.random_range(0.0..cfg.behavior.spawn_jitter) } else { 0.0 };
            agents.push(build_agent(id, spec.spawn_time + jitter, mode, route, &net, &cfg, &plan_grid, &mut work)?);
        }
        let lane_segments = net.edges().iter().flat_map(|e| (0..e.spline.segment_count()).map(|i| e.spline.segment(i))).collect();
        let mut world = World {
            cfg,
            net,
            agents,
            perception: PerceptionSystem::new(),
            lane_segments,
            tick: 0,
            touching: BTreeSet::new(),
            work,
        };
        world.spawn_due();
        Ok(world)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn network(&self) -> &RoadNetwork {
        &self.net
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.dt
    }

    pub fn max_ticks(&self) -> u64 {
        (self.cfg.duration / self.cfg.dt).round() as u64
    }

    /// Every agent has spawned and reached a terminal status.
    pub fn is_finished(&self) -> bool {
        self.agents.iter().all(|a| a.spawned && a.is_terminal())
    }

    fn spawn_due(&mut self) {
        let t = self.time();
        let r = self.cfg.vehicle.radius;
        let clearance = 2.0 * r + self.cfg.behavior.min_gap;
        for i in 0..self.agents.len() {
            let a = &self.agents[i];
            if a.spawned || a.spawn_time > t + 1e-9 {
                continue;
            }
            let at = a.state.position;
            let blocked = self.agents.iter().any(|o| o.spawned && o.state.position.distance(at) < clearance)
                || self.cfg.obstacles.iter().any(|o| o.center.distance(at) < o.radius + r);
            if blocked {
                continue;
            }
            let sense = SightConfig::new(
                self.cfg.perception.radius,
                self.cfg.perception.fov_half_angle,
                self.cfg.perception.requires_line_of_sight,
            )
            .expect("validated perception config");
            let listener = Listener::new(i, Pose::new(at, a.state.heading), vec![sense]).with_body(SourceId::vehicle(i));
            self.perception.register(listener).expect("each agent registers once");
            let a = &mut self.agents[i];
            a.spawned = true;
            a.metrics.spawned_at = Some(t);
            log::debug!("t={t:.2}: agent {i} spawned");
        }
    }

    fn light_colors(&self, t: f64) -> Vec<LightColor> {
        self.net.lights().iter().map(|l| l.phase_at(t)).collect()
    }

    /// Perceives the current state and returns the trace record for it.
    pub fn observe(&mut self) -> TickRecord {
        let t = self.time();
        let mut stimuli: Vec<Stimulus> = self
            .agents
            .iter()
            .filter(|a| a.spawned)
            .map(|a| Stimulus::new(SourceId::vehicle(a.id), a.state.position))
            .collect();
        stimuli.extend(self.cfg.obstacles.iter().enumerate().map(|(i, o)| Stimulus::new(SourceId::obstacle(i), o.center)));
        stimuli.extend(self.net.lights().iter().enumerate().map(|(i, l)| Stimulus::new(SourceId::light(i), l.position)));
        for a in self.agents.iter().filter(|a| a.spawned) {
            if self.perception.contains(a.id) {
                self.perception.set_pose(a.id, Pose::new(a.state.position, a.state.heading)).expect("registered");
            }
        }
        let events = self.perception.tick(&stimuli, &[], self.tick);
        let mut rec = TickRecord::new(self.tick, t);
        rec.agents = self.agents.iter().filter(|a| a.spawned).map(Agent::record).collect();
        rec.events = events.iter().map(EventRecord::from).collect();
        rec.lights = self.light_colors(t).into_iter().enumerate().map(|(index, color)| LightRecord { index, color }).collect();
        rec
    }

    /// Advances one tick: decide and steer every active agent from the
    /// current snapshot, move them all, then resolve contacts and arrivals.
    pub fn step(&mut self) {
        let dt = self.cfg.dt;
        let t = self.time();
        let now = self.light_colors(t);
        let next = self.light_colors(t + dt);
        let snapshot: Vec<(bool, Vec2, f64, f64)> =
            self.agents.iter().map(|a| (a.spawned, a.state.position, a.state.heading, a.state.speed)).collect();
        let mut controls = vec![None; self.agents.len()];
        for i in 0..self.agents.len() {
            if !self.agents[i].is_active() {
                continue;
            }
            controls[i] = Some(self.decide(i, t, &now, &next, &snapshot));
        }
        let limits = self.cfg.vehicle.limits;
        for (a, c) in self.agents.iter_mut().zip(&controls) {
            let Some((throttle, steering)) = *c else { continue };
            a.state = kinematic_step(&a.state, throttle, steering, &limits, dt).expect("validated dt");
            self.work.agent_updates += 1;
        }
        self.tick += 1;
        self.resolve_contacts();
        self.update_status_and_metrics(&controls);
        self.spawn_due();
    }

    fn decide(&mut self, i: usize, t: f64, now: &[LightColor], next: &[LightColor], snapshot: &[(bool, Vec2, f64, f64)]) -> (f64, f64) {
        let cfg = &self.cfg;
        let b = &cfg.behavior;
        let r = cfg.vehicle.radius;
        let a = &self.agents[i];
        let s = a.state;

        // progress along the lane route and the guidance
        let lane_s = a.lane.nearest_in_range(s.position, a.lane_s - TRACK_BACK, a.lane_s + TRACK_AHEAD).s;
        let (steer, guide_s) = match a.mode {
            Mode::SplineFollow => spline_steering_in_range(
                &s,
                &a.guidance,
                &cfg.steering,
                a.guide_s - TRACK_BACK,
                a.guide_s + TRACK_AHEAD + cfg.steering.smoothing,
            ),
            Mode::GridFollow => pure_pursuit(
                &s,
                &a.guidance,
                b.pursuit_lookahead,
                cfg.steering.full_lock_angle,
                a.guide_s - TRACK_BACK,
                a.guide_s + TRACK_AHEAD,
            ),
        };
        let perceived = self.perception.perceived_set(i).cloned().unwrap_or_default();
        let decel = b.comfort_decel;

        // speed limit of the current lane and the ones coming up
        let mut target = f64::INFINITY;
        let here = a.sections.iter().rposition(|sec| sec.s0 <= lane_s + 1e-9).unwrap_or(0);
        let limit_here = a.sections[here].speed_limit;
        target = target.min(limit_here);
        // a slower lane must already be respected wherever this tick ends
        let reach = lane_s + limit_here * cfg.dt;
        for sec in &a.sections[here + 1..] {
            target = target.min((sec.speed_limit.powi(2) + 2.0 * decel * (sec.s0 - reach).max(0.0)).sqrt());
        }
        for &(sc, vc) in &a.curves {
            if sc + 2.0 >= lane_s {
                target = target.min((vc * vc + 2.0 * decel * (sc - lane_s).max(0.0)).sqrt());
            }
        }
        // arrive at the goal
        let to_goal = a.guidance.length() - guide_s;
        target = target.min(speed_to_stop(to_goal, decel));

        if b.avoidance {
            let front_s = lane_s + r;
            let cap = target;
            for stop in &a.stops {
                let d = stop.s - front_s;
                if d < 0.0 || !perceived.contains(&SourceId::light(stop.light)) {
                    continue;
                }
                let light = &self.net.lights()[stop.light];
                let must_stop = if now[stop.light] == LightColor::Red || next[stop.light] == LightColor::Red {
                    true
                } else {
                    let to_red = light.time_until(t, LightColor::Red).unwrap_or(f64::INFINITY);
                    eta(d, s.speed, 0.5 * cfg.vehicle.limits.max_accel, cap) > to_red - b.clearance_margin
                };
                if must_stop {
                    target = target.min(speed_to_stop(d - b.stop_margin, decel));
                }
            }
            let tangent_angle = a.guidance.tangent_clamped(guide_s).angle();
            let horizon = (guide_s, guide_s + cfg.perception.radius);
            for src in &perceived {
                let (centre, speed, heading, clearance) = match src.kind {
                    StimulusKind::Vehicle => {
                        let (spawned, p, h, v) = snapshot[src.index];
                        if !spawned {
                            continue;
                        }
                        (p, v, h, 2.0 * r)
                    }
                    StimulusKind::Obstacle => {
                        let o = &cfg.obstacles[src.index];
                        (o.center, 0.0, 0.0, o.radius + r)
                    }
                    StimulusKind::TrafficLight => continue,
                };
                let near = a.guidance.nearest_in_range(centre, horizon.0, horizon.1);
                if near.distance >= clearance || near.s <= guide_s {
                    continue;
                }
                let along = (speed * (heading - tangent_angle).cos()).max(0.0);
                let gap = near.s - guide_s - clearance - b.min_gap;
                let v_follow = if gap <= 0.0 {
                    0.0
                } else {
                    (gap / b.headway).min((along * along + 2.0 * decel * gap).sqrt())
                };
                target = target.min(v_follow);
            }
        }
        let target = target.max(0.0);

        let limits = &cfg.vehicle.limits;
        let dt = cfg.dt;
        let dv = target - s.speed;
        let throttle = if dv >= 0.0 { dv / (limits.max_accel * dt) } else { dv / (limits.max_decel * dt) };
        let mut controls = (throttle.clamp(-1.0, 1.0), steer);
        let interval = u64::from(b.grid_decision_interval);
        let a = &mut self.agents[i];
        if a.mode == Mode::GridFollow && interval > 1 {
            if self.tick % interval == 0 {
                a.held_controls = controls;
            } else {
                controls = a.held_controls;
            }
        }
        a.lane_s = lane_s;
        a.guide_s = guide_s;
        a.target_speed = target;
        controls
    }

    fn resolve_contacts(&mut self) {
        let r = self.cfg.vehicle.radius;
        let mut now = BTreeSet::new();
        let n = self.agents.len();
        for i in 0..n {
            if !self.agents[i].spawned {
                continue;
            }
            let p = self.agents[i].state.position;
            for j in i + 1..n {
                if self.agents[j].spawned && p.distance(self.agents[j].state.position) < 2.0 * r {
                    now.insert((i, Contact::Agent(j)));
                }
            }
            for (k, o) in self.cfg.obstacles.iter().enumerate() {
                if p.distance(o.center) < o.radius + r {
                    now.insert((i, Contact::Obstacle(k)));
                }
            }
        }
        for &(i, c) in now.difference(&self.touching) {
            log::info!("tick {}: agent {i} collided with {c:?}", self.tick);
            let hit = |idx: usize, agents: &mut [Agent]| {
                let a = &mut agents[idx];
                a.metrics.collision_count += 1;
                if a.status != Status::Parked {
                    a.status = Status::Collided;
                    a.state.speed = 0.0;
                }
            };
            hit(i, &mut self.agents);
            if let Contact::Agent(j) = c {
                hit(j, &mut self.agents);
            }
        }
        self.touching = now;
    }

    fn update_status_and_metrics(&mut self, controls: &[Option<(f64, f64)>]) {
        let dt = self.cfg.dt;
        let t = self.time();
        let b = self.cfg.behavior;
        for (i, a) in self.agents.iter_mut().enumerate() {
            if controls[i].is_none() {
                continue;
            }
            if a.status == Status::Collided {
                self.perception.unregister(i).ok();
                continue;
            }
            // lateral excursion past the paved width
            let off = self
                .lane_segments
                .iter()
                .map(|seg| seg.closest_point(a.state.position).0.distance(a.state.position))
                .fold(f64::INFINITY, f64::min);
            a.metrics.offroad_distance_integral += (off - b.lane_half_width).max(0.0) * dt;
            let accel = (a.state.speed - a.metrics.last_speed) / dt;
            if let Some(prev) = a.prev_accel {
                a.metrics.jerk_sum += ((accel - prev) / dt).abs();
                a.metrics.jerk_samples += 1;
            }
            a.prev_accel = Some(accel);
            a.metrics.last_speed = a.state.speed;
            if a.state.position.distance(a.goal) <= b.parking_tolerance && a.state.speed < STANDSTILL {
                a.status = Status::Parked;
                a.state.speed = 0.0;
                a.metrics.parking_error = Some(a.state.position.distance(a.goal));
                a.metrics.travel_time = a.metrics.spawned_at.map(|s| t - s);
                log::debug!("t={t:.2}: agent {i} parked");
                self.perception.unregister(i).ok();
            } else if a.state.speed < STANDSTILL && a.target_speed < STANDSTILL {
                a.status = Status::Stopped;
            } else {
                a.status = Status::Driving;
            }
        }
    }

    /// Runs to completion, collecting the trace records.
    pub fn run(mut self) -> (Vec<TickRecord>, MetricsReport) {
        let mut records = Vec::new();
        loop {
            records.push(self.observe());
            if self.tick >= self.max_ticks() || self.is_finished() {
                break;
            }
            self.step();
        }
        let report = self.report();
        (records, report)
    }

    pub fn report(&self) -> MetricsReport {
        let mut work = self.work;
        work.ticks = self.tick;
        MetricsReport::new(
            self.cfg.mode,
            self.time(),
            self.agents.iter().map(|a| a.metrics.finish(a.id, a.mode, a.status, a.spawned)).collect(),
            work,
        )
    }
}

fn stamp_obstacles(net: &RoadNetwork, cfg: &ScenarioConfig) -> OccupancyGrid {
    let mut grid = net.grid().clone();
    for o in &cfg.obstacles {
        grid.block_disc(o.center, o.radius + cfg.vehicle.radius + cfg.behavior.grid_clearance);
    }
    grid
}

#[allow(clippy::too_many_arguments)]
fn build_agent(
    id: usize,
    spawn_time: f64,
    mode: Mode,
    route: Route,
    net: &RoadNetwork,
    cfg: &ScenarioConfig,
    grid: &OccupancyGrid,
    work: &mut WorkCounters,
) -> Result<Agent, SimError> {
    let start = net.nodes()[route.nodes[0]].position;
    let goal = net.nodes()[*route.nodes.last().expect("routes are non-empty")].position;
    let route_edges: Vec<usize> = route
        .nodes
        .windows(2)
        .map(|w| net.edge_between(w[0], w[1]).expect("route follows network edges"))
        .collect();
    if route_edges.is_empty() {
        return Err(SimError::Config(format!("agent {id}: spawn and goal are the same node")));
    }
    let lane = Spline::concat(route_edges.iter().map(|&e| &net.edges()[e].spline))?;
    // per-edge arc ranges on the concatenated lane
    let mut sections = Vec::with_capacity(route_edges.len());
    let mut stops = Vec::new();
    let mut offset = 0.0;
    for &e in &route_edges {
        let edge = &net.edges()[e];
        sections.push(Section { s0: offset, speed_limit: edge.speed_limit });
        for (li, light) in net.lights().iter().enumerate() {
            if light.controlled_edge == e {
                stops.push(StopLine { light: li, s: offset + edge.spline.nearest(light.position).s });
            }
        }
        offset += edge.spline.length();
    }
    let lateral = cfg.behavior.lateral_accel;
    let curves = lane
        .vertex_turns()
        .filter(|&(_, turn)| turn > 1e-6)
        .map(|(s, turn)| {
            let i = lane.segment_at(s);
            let pts = lane.cumulative_arc_length();
            let before = pts[i] - pts[i.saturating_sub(1)];
            let after = pts[(i + 1).min(pts.len() - 1)] - pts[i];
            let span = before.min(after).min(cfg.steering.smoothing).max(1e-6);
            (s, (lateral * span / turn).sqrt())
        })
        .collect();
    let guidance = match mode {
        Mode::SplineFollow => lane.clone(),
        Mode::GridFollow => {
            let cell = |p: Vec2, blocked: SimError| grid.cell_of(p).filter(|&c| grid.is_passable(c)).ok_or(blocked);
            let s = cell(start, SimError::SpawnBlocked { agent: id })?;
            let g = cell(goal, SimError::GoalBlocked { agent: id })?;
            let path = grid_plan(grid, s, g).map_err(|e| SimError::Plan { agent: id, source: e })?;
            work.planner_expanded += path.expanded as u64;
            let n = path.points.len();
            let mut pts = Vec::with_capacity(n + 2);
            pts.push(start);
            // drop the end cell centers in favor of the exact endpoints
            pts.extend(path.points.iter().copied().skip(1).take(n.saturating_sub(2)));
            pts.push(goal);
            Spline::from_points_dedup(pts)?
        }
    };
    let heading = lane.tangent_clamped(0.0).angle();
    let state = VehicleState::new(start, heading, 0.0, cfg.vehicle.wheelbase);
    Ok(Agent {
        id,
        mode,
        spawn_time,
        spawned: false,
        state,
        status: Status::Driving,
        route,
        route_edges,
        goal,
        lane,
        guidance,
        sections,
        stops,
        curves,
        lane_s: 0.0,
        guide_s: 0.0,
        target_speed: 0.0,
        held_controls: (0.0, 0.0),
        metrics: AgentMetrics::default(),
        prev_accel: None,
    })
}
