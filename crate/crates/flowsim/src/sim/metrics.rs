use serde::{Deserialize, Serialize};

use super::{Mode, Status, SCHEMA};

/// Running per-agent accumulators.
#[derive(Debug, Clone, Default)]
pub struct AgentMetrics {
    pub spawned_at: Option<f64>,
    pub collision_count: u32,
    pub offroad_distance_integral: f64,
    pub parking_error: Option<f64>,
    pub travel_time: Option<f64>,
    pub(crate) last_speed: f64,
    pub(crate) jerk_sum: f64,
    pub(crate) jerk_samples: u64,
}

impl AgentMetrics {
    pub fn finish(&self, id: usize, mode: Mode, status: Status, spawned: bool) -> AgentReport {
        AgentReport {
            id,
            mode,
            status,
            spawned,
            collision_count: self.collision_count,
            offroad_distance_integral: self.offroad_distance_integral,
            parking_error: self.parking_error,
            travel_time: self.travel_time,
            mean_abs_jerk: if self.jerk_samples == 0 { 0.0 } else { self.jerk_sum / self.jerk_samples as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub id: usize,
    pub mode: Mode,
    pub status: Status,
    pub spawned: bool,
    pub collision_count: u32,
    /// m·s beyond the lane half-width.
    pub offroad_distance_integral: f64,
    /// Only for parked agents.
    pub parking_error: Option<f64>,
    pub travel_time: Option<f64>,
    /// m/s³, from the speed series.
    pub mean_abs_jerk: f64,
}

/// Deterministic effort counters; wall-clock time is kept out of reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkCounters {
    pub ticks: u64,
    pub agent_updates: u64,
    pub route_scanned: u64,
    pub planner_expanded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub agents: usize,
    pub parked: usize,
    pub collided: usize,
    pub total_collisions: u32,
    pub mean_offroad_distance_integral: f64,
    pub mean_parking_error: Option<f64>,
    pub mean_travel_time: Option<f64>,
    pub mean_abs_jerk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: String,
    pub mode: Mode,
    pub end_time: f64,
    pub agents: Vec<AgentReport>,
    pub summary: Summary,
    pub work: WorkCounters,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl MetricsReport {
    pub fn new(mode: Mode, end_time: f64, agents: Vec<AgentReport>, work: WorkCounters) -> Self {
        let summary = Summary {
            agents: agents.len(),
            parked: agents.iter().filter(|a| a.status == Status::Parked).count(),
            collided: agents.iter().filter(|a| a.status == Status::Collided).count(),
            total_collisions: agents.iter().map(|a| a.collision_count).sum(),
            mean_offroad_distance_integral: mean(agents.iter().map(|a| a.offroad_distance_integral)).unwrap_or(0.0),
            mean_parking_error: mean(agents.iter().filter_map(|a| a.parking_error)),
            mean_travel_time: mean(agents.iter().filter_map(|a| a.travel_time)),
            mean_abs_jerk: mean(agents.iter().map(|a| a.mean_abs_jerk)).unwrap_or(0.0),
        };
        MetricsReport { schema: SCHEMA.to_owned(), mode, end_time, agents, summary, work }
    }

    /// Every agent parked and nobody touched anything.
    pub fn all_parked_safely(&self) -> bool {
        self.agents.iter().all(|a| a.status == Status::Parked) && self.summary.total_collisions == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_nothing() {
        let r = MetricsReport::new(Mode::SplineFollow, 0.0, vec![], WorkCounters::default());
        assert_eq!(r.summary.agents, 0);
        assert_eq!(r.summary.mean_parking_error, None);
        assert!(r.all_parked_safely());
    }

    #[test]
    fn parking_error_mean_skips_unparked() {
        let mut a = AgentMetrics { parking_error: Some(0.2), ..Default::default() };
        let parked = a.finish(0, Mode::GridFollow, Status::Parked, true);
        a.parking_error = None;
        a.collision_count = 1;
        let crashed = a.finish(1, Mode::GridFollow, Status::Collided, true);
        let r = MetricsReport::new(Mode::GridFollow, 10.0, vec![parked, crashed], WorkCounters::default());
        assert_eq!(r.summary.mean_parking_error, Some(0.2));
        assert_eq!(r.summary.collided, 1);
        assert!(!r.all_parked_safely());
    }
}
