use serde::{Deserialize, Serialize};

use crate::network::RoadNetwork;

use super::{MetricsReport, Mode, ScenarioConfig, SimError, TickRecord, World, SCHEMA};

/// One mode's run, kept whole for plotting.
#[derive(Debug, Clone)]
pub struct ModeRun {
    pub mode: Mode,
    pub records: Vec<TickRecord>,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub mode: Mode,
    pub metrics: MetricsReport,
    /// Agent updates plus planner expansions, per tick.
    pub work_per_tick: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub seed: u64,
    pub modes: Vec<ModeEntry>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Runs the same scenario once per mode, every agent forced into that mode.
pub fn evaluate_modes(cfg: &ScenarioConfig, net: &RoadNetwork) -> Result<(EvalReport, Vec<ModeRun>), SimError> {
    let mut runs = Vec::with_capacity(2);
    for mode in Mode::BOTH {
        let (records, report) = World::new(cfg.with_mode(mode), net.clone())?.run();
        runs.push(ModeRun { mode, records, report });
    }
    let modes = runs
        .iter()
        .map(|r| {
            let w = r.report.work;
            let work = (w.agent_updates + w.planner_expanded) as f64;
            ModeEntry { mode: r.mode, metrics: r.report.clone(), work_per_tick: if w.ticks == 0 { 0.0 } else { work / w.ticks as f64 } }
        })
        .collect();
    Ok((EvalReport { schema: SCHEMA.to_owned(), seed: cfg.seed, modes }, runs))
}

/// Lanes as gray paths, then one polyline per agent per mode, grouped by mode.
pub fn overlay_svg(net: &RoadNetwork, runs: &[ModeRun]) -> String {
    let mut d = crate::svg::Drawing::new();
    for e in net.edges() {
        d.path(e.spline.points(), "#bbbbbb", 1.0);
    }
    for run in runs {
        let colour = match run.mode {
            Mode::SplineFollow => "#1f77b4",
            Mode::GridFollow => "#d62728",
        };
        d.group(&format!("{:?}", run.mode));
        let mut ids: Vec<usize> = run.records.iter().flat_map(|r| r.agents.iter().map(|a| a.id)).collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            let pts: Vec<crate::geom::Vec2> = run
                .records
                .iter()
                .filter_map(|r| r.agents.iter().find(|a| a.id == id))
                .map(|a| crate::geom::Vec2::new(a.x, a.y))
                .collect();
            d.polyline(&pts, colour, 0.6);
        }
    }
    d.render(5.0)
}
