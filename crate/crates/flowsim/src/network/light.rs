use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::NetworkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LightColor {
    Red,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub color: LightColor,
    pub duration: f64,
}

/// Fixed-cycle signal controlling one edge. `position` is the stop line.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficLight {
    pub position: Vec2,
    pub controlled_edge: usize,
    schedule: Vec<Phase>,
    cycle: f64,
}

impl TrafficLight {
    pub fn new(position: Vec2, controlled_edge: usize, schedule: Vec<Phase>) -> Result<Self, NetworkError> {
        if schedule.is_empty() {
            return Err(NetworkError::Light("empty phase schedule".into()));
        }
        if let Some(p) = schedule.iter().find(|p| !(p.duration > 0.0 && p.duration.is_finite())) {
            return Err(NetworkError::Light(format!("phase duration must be positive, got {}", p.duration)));
        }
        let cycle = schedule.iter().map(|p| p.duration).sum();
        Ok(TrafficLight { position, controlled_edge, schedule, cycle })
    }

    pub fn schedule(&self) -> &[Phase] {
        &self.schedule
    }

    pub fn cycle_length(&self) -> f64 {
        self.cycle
    }

    /// Color at time `t`. A phase boundary belongs to the later phase.
    pub fn phase_at(&self, t: f64) -> LightColor {
        let mut local = t.rem_euclid(self.cycle);
        for phase in &self.schedule {
            if local < phase.duration {
                return phase.color;
            }
            local -= phase.duration;
        }
        // rounding can leave `local` a hair past the final boundary
        self.schedule[0].color
    }

    /// Seconds from `t` until the light next shows `color`; zero if it
    /// already does, `None` if the schedule never does.
    pub fn time_until(&self, t: f64, color: LightColor) -> Option<f64> {
        if !self.schedule.iter().any(|p| p.color == color) {
            return None;
        }
        if self.phase_at(t) == color {
            return Some(0.0);
        }
        let local = t.rem_euclid(self.cycle);
        let mut start = 0.0;
        // walk two cycles so a wrap-around is found
        for phase in self.schedule.iter().chain(self.schedule.iter()) {
            if phase.color == color && start > local {
                return Some(start - local);
            }
            start += phase.duration;
        }
        Some(self.cycle - local)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn red_green() -> TrafficLight {
        TrafficLight::new(
            Vec2::ZERO,
            0,
            vec![
                Phase { color: LightColor::Red, duration: 10.0 },
                Phase { color: LightColor::Green, duration: 10.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn phase_lookup() {
        let l = red_green();
        assert_eq!(l.phase_at(5.0), LightColor::Red);
        assert_eq!(l.phase_at(10.0), LightColor::Green);
        assert_eq!(l.phase_at(25.0), LightColor::Red);
        assert_eq!(l.phase_at(0.0), LightColor::Red);
        assert_eq!(l.phase_at(20.0), LightColor::Red);
    }

    #[test]
    fn time_until_next_phase() {
        let l = red_green();
        assert_eq!(l.time_until(12.0, LightColor::Red), Some(8.0));
        assert_eq!(l.time_until(3.0, LightColor::Green), Some(7.0));
        assert_eq!(l.time_until(3.0, LightColor::Red), Some(0.0));
        assert_eq!(l.time_until(39.5, LightColor::Red), Some(0.5));
        let always = TrafficLight::new(Vec2::ZERO, 0, vec![Phase { color: LightColor::Green, duration: 5.0 }]).unwrap();
        assert_eq!(always.time_until(1.0, LightColor::Red), None);
    }

    #[test]
    fn invalid_schedules() {
        assert!(TrafficLight::new(Vec2::ZERO, 0, vec![]).is_err());
        assert!(TrafficLight::new(Vec2::ZERO, 0, vec![Phase { color: LightColor::Red, duration: 0.0 }]).is_err());
    }
}
