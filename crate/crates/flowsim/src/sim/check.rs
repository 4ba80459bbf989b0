//! Trace post-processing: did anyone run a red light?

use serde::Serialize;

use crate::geom::Segment;
use crate::network::{LightColor, RoadNetwork};

use super::TickRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedLightViolation {
    pub agent: usize,
    pub light: usize,
    /// Tick of the record after the crossing.
    pub tick: u64,
}

/// Flags every front-point crossing of a stop line, in the lane direction,
/// between two consecutive records where the light shows red in either.
///
/// The stop line sits at the light's projection onto its controlled lane,
/// perpendicular to the lane, `half_width` to either side.
pub fn red_light_violations(
    records: &[TickRecord],
    net: &RoadNetwork,
    front_offset: f64,
    half_width: f64,
) -> Vec<RedLightViolation> {
    let lines: Vec<(Segment, crate::geom::Vec2, crate::geom::Vec2)> = net
        .lights()
        .iter()
        .map(|l| {
            let lane = &net.edges()[l.controlled_edge].spline;
            let near = lane.nearest(l.position);
            let dir = lane.tangent_clamped(near.s);
            let across = dir.perp() * half_width;
            (Segment::new(near.point - across, near.point + across), near.point, dir)
        })
        .collect();
    let is_red = |rec: &TickRecord, light: usize| rec.lights.iter().any(|l| l.index == light && l.color == LightColor::Red);
    let mut out = Vec::new();
    for pair in records.windows(2) {
        let (r0, r1) = (&pair[0], &pair[1]);
        for a1 in &r1.agents {
            let Some(a0) = r0.agents.iter().find(|a| a.id == a1.id) else { continue };
            let front = |a: &super::AgentRecord| {
                crate::geom::Vec2::new(a.x, a.y) + crate::geom::Vec2::from_angle(a.heading) * front_offset
            };
            let (f0, f1) = (front(a0), front(a1));
            for (li, (line, centre, dir)) in lines.iter().enumerate() {
                let before = (f0 - *centre).dot(*dir) < 0.0;
                let after = (f1 - *centre).dot(*dir) >= 0.0;
                if before && after && line.intersects(&Segment::new(f0, f1)) && (is_red(r0, li) || is_red(r1, li)) {
                    out.push(RedLightViolation { agent: a1.id, light: li, tick: r1.tick });
                }
            }
        }
    }
    out
}
