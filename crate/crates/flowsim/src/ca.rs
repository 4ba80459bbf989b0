//! Single-lane Nagel–Schreckenberg cellular automaton.
//!
//! ```
//! use flowsim::ca::{CaParams, CellLattice};
//!
//! let mut lat = CellLattice::new(CaParams { length: 10, vmax: 3, p_slow: 0.0, ..CaParams::default() }).unwrap();
//! lat.place(0, 0).unwrap();
//! let speeds: Vec<u32> = (0..3).map(|_| { lat.step(); lat.vehicles().next().unwrap().1.speed }).collect();
//! assert_eq!(speeds, [1, 2, 3]);
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cell {0} is outside the lattice")]
    OutOfRange(usize),
    #[error("cell {0} is already occupied")]
    Occupied(usize),
    #[error("injection needs an open lane")]
    ClosedLattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaParams {
    pub length: usize,
    /// Ring (true) or open lane (false).
    pub closed: bool,
    pub cell_length: f64,
    pub vmax: u32,
    pub p_slow: f64,
    pub seed: u64,
}

impl Default for CaParams {
    fn default() -> Self {
        CaParams { length: 100, closed: true, cell_length: 7.5, vmax: 5, p_slow: 0.3, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vehicle {
    pub id: u32,
    /// Cells per step.
    pub speed: u32,
}

/// Outcome of one synchronous update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    /// Vehicles that moved past the detector boundary.
    pub crossings: u32,
    /// Vehicles that left an open lane.
    pub exited: u32,
}

#[derive(Debug, Clone)]
pub struct CellLattice {
    params: CaParams,
    cells: Vec<Option<Vehicle>>,
    rng: ChaCha8Rng,
    next_id: u32,
    /// Crossings are counted between this cell and the next one.
    detector: usize,
}

impl CellLattice {
    pub fn new(params: CaParams) -> Result<Self, CaError> {
        if params.length == 0 {
            return Err(CaError::InvalidParameter("length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&params.p_slow) {
            return Err(CaError::InvalidParameter(format!("p_slow {} not in [0, 1]", params.p_slow)));
        }
        if !(params.cell_length > 0.0 && params.cell_length.is_finite()) {
            return Err(CaError::InvalidParameter("cell_length must be positive".into()));
        }
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Ok(CellLattice {
            cells: vec![None; params.length],
            detector: params.length - 1,
            params,
            rng,
            next_id: 0,
        })
    }

    /// A ring holding `round(density * length)` vehicles at seeded random
    /// cells, all at rest.
    pub fn random_ring(params: CaParams, density: f64) -> Result<Self, CaError> {
        if !(0.0..=1.0).contains(&density) {
            return Err(CaError::InvalidParameter(format!("density {density} not in [0, 1]")));
        }
        let mut lat = CellLattice::new(CaParams { closed: true, ..params })?;
        let count = (density * lat.len() as f64).round() as usize;
        let len = lat.len();
        let mut picked = rand::seq::index::sample(&mut lat.rng, len, count).into_vec();
        picked.sort_unstable();
        for c in picked {
            lat.place(c, 0)?;
        }
        Ok(lat)
    }

    /// A ring with `count` vehicles spaced as evenly as the cells allow.
    pub fn equally_spaced_ring(params: CaParams, count: usize, speed: u32) -> Result<Self, CaError> {
        let mut lat = CellLattice::new(CaParams { closed: true, ..params })?;
        if count > lat.len() {
            return Err(CaError::InvalidParameter(format!("{count} vehicles on {} cells", lat.len())));
        }
        for i in 0..count {
            lat.place(i * lat.len() / count, speed)?;
        }
        Ok(lat)
    }

    pub fn params(&self) -> &CaParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicle_count() == 0
    }

    pub fn set_detector(&mut self, cell: usize) -> Result<(), CaError> {
        if cell >= self.len() {
            return Err(CaError::OutOfRange(cell));
        }
        self.detector = cell;
        Ok(())
    }

    pub fn place(&mut self, cell: usize, speed: u32) -> Result<u32, CaError> {
        if cell >= self.len() {
            return Err(CaError::OutOfRange(cell));
        }
        if self.cells[cell].is_some() {
            return Err(CaError::Occupied(cell));
        }
        if speed > self.params.vmax {
            return Err(CaError::InvalidParameter(format!("speed {speed} above vmax")));
        }
        let id = self.next_id;
        self.next_id += 1;
        self.cells[cell] = Some(Vehicle { id, speed });
        Ok(id)
    }

    pub fn remove(&mut self, cell: usize) -> Option<Vehicle> {
        self.cells.get_mut(cell).and_then(Option::take)
    }

    pub fn cells(&self) -> &[Option<Vehicle>] {
        &self.cells
    }

    /// `(cell, vehicle)` in ascending cell order.
    pub fn vehicles(&self) -> impl Iterator<Item = (usize, Vehicle)> + '_ {
        self.cells.iter().enumerate().filter_map(|(i, c)| c.map(|v| (i, v)))
    }

    pub fn vehicle_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Empty cells in front of the vehicle at `cell`; on an open lane the
    /// exit counts as unlimited space.
    fn gap(&self, cell: usize, occupied: &[usize], k: usize) -> u32 {
        let n = self.len();
        let limit = self.params.vmax;
        if occupied.len() == 1 {
            return if self.params.closed { (n as u32 - 1).min(limit) } else { limit };
        }
        let next = if k + 1 < occupied.len() {
            Some(occupied[k + 1])
        } else if self.params.closed {
            Some(occupied[0] + n)
        } else {
            None
        };
        match next {
            Some(ahead) => (ahead - cell - 1) as u32,
            None => limit,
        }
    }

    /// One synchronous update: accelerate, brake to gap, randomize, move.
    pub fn step(&mut self) -> StepStats {
        let n = self.len();
        let occupied: Vec<usize> = (0..n).filter(|&i| self.cells[i].is_some()).collect();
        let mut next = vec![None; n];
        let mut stats = StepStats::default();
        for (k, &cell) in occupied.iter().enumerate() {
            let mut v = self.cells[cell].expect("occupied");
            v.speed = (v.speed + 1).min(self.params.vmax);
            v.speed = v.speed.min(self.gap(cell, &occupied, k));
            // one draw per vehicle, ascending cell order
            if self.rng.random_bool(self.params.p_slow) {
                v.speed = v.speed.saturating_sub(1);
            }
            let speed = v.speed as usize;
            // detector boundary sits between `detector` and `detector + 1`
            let ahead = (self.detector + n - cell) % n;
            if ahead < speed {
                stats.crossings += 1;
            }
            let target = cell + speed;
            if target < n {
                next[target] = Some(v);
            } else if self.params.closed {
                next[target - n] = Some(v);
            } else {
                stats.exited += 1;
            }
        }
        self.cells = next;
        stats
    }
}

/// Open-boundary feeder for a lane's first cell.
#[derive(Debug, Clone)]
pub struct Injector {
    rate: f64,
    rng: ChaCha8Rng,
}

impl Injector {
    pub fn new(entry_rate: f64, seed: u64) -> Result<Self, CaError> {
        if !(0.0..=1.0).contains(&entry_rate) {
            return Err(CaError::InvalidParameter(format!("entry rate {entry_rate} not in [0, 1]")));
        }
        Ok(Injector { rate: entry_rate, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    /// Draws once; on success places a stopped vehicle in cell 0 if it is free.
    pub fn inject(&mut self, lat: &mut CellLattice) -> Result<bool, CaError> {
        if lat.params.closed {
            return Err(CaError::ClosedLattice);
        }
        let fire = self.rng.random_bool(self.rate);
        Ok(fire && lat.cells[0].is_none() && lat.place(0, 0).is_ok())
    }
}

/// Macroscopic observables over a measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroSample {
    /// Vehicles per cell at the end of the window.
    pub density: f64,
    /// Detector crossings per step.
    pub flow: f64,
    /// Cells per step, averaged over every vehicle-step in the window.
    pub mean_speed: f64,
}

/// Steps the lattice `window` times and aggregates.
pub fn measure(lat: &mut CellLattice, window: usize) -> Result<MacroSample, CaError> {
    if window == 0 {
        return Err(CaError::InvalidParameter("window must be at least 1".into()));
    }
    let mut crossings = 0u64;
    let mut speed_sum = 0u64;
    let mut samples = 0u64;
    for _ in 0..window {
        crossings += u64::from(lat.step().crossings);
        for (_, v) in lat.vehicles() {
            speed_sum += u64::from(v.speed);
            samples += 1;
        }
    }
    Ok(MacroSample {
        density: lat.vehicle_count() as f64 / lat.len() as f64,
        flow: crossings as f64 / window as f64,
        mean_speed: if samples == 0 { 0.0 } else { speed_sum as f64 / samples as f64 },
    })
}

/// Ring started at `density`, warmed up for `steps / 2`, measured over the rest.
pub fn ring_sample(params: &CaParams, density: f64, steps: usize) -> Result<MacroSample, CaError> {
    let mut lat = CellLattice::random_ring(params.clone(), density)?;
    let warm = steps / 2;
    for _ in 0..warm {
        lat.step();
    }
    measure(&mut lat, (steps - warm).max(1))
}

/// Densities 0, 1/(points-1), ..., 1.
pub fn sweep_densities(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(length: usize, vmax: u32) -> CaParams {
        CaParams { length, vmax, p_slow: 0.0, ..CaParams::default() }
    }

    #[test]
    fn single_vehicle_accelerates() {
        let mut lat = CellLattice::new(det(10, 3)).unwrap();
        lat.place(0, 0).unwrap();
        let mut speeds = Vec::new();
        for _ in 0..3 {
            lat.step();
            speeds.push(lat.vehicles().next().unwrap().1.speed);
        }
        assert_eq!(speeds, [1, 2, 3]);
    }

    #[test]
    fn free_flow_in_exactly_vmax_steps() {
        let mut lat = CellLattice::new(det(1000, 5)).unwrap();
        lat.place(0, 0).unwrap();
        for k in 1..=5 {
            lat.step();
            assert_eq!(lat.vehicles().next().unwrap().1.speed, k);
        }
    }

    #[test]
    fn blocked_rear_vehicle_stays() {
        let mut lat = CellLattice::new(det(10, 5)).unwrap();
        lat.place(3, 2).unwrap();
        lat.place(4, 0).unwrap();
        // front car moves first in position, but braking uses pre-step gaps
        lat.step();
        let v: Vec<_> = lat.vehicles().collect();
        assert!(v.iter().any(|&(c, veh)| c == 3 && veh.speed == 0 && veh.id == 0));
    }

    #[test]
    fn ring_conserves_vehicles() {
        let mut lat = CellLattice::random_ring(CaParams { length: 200, seed: 3, ..CaParams::default() }, 0.3).unwrap();
        let n = lat.vehicle_count();
        for _ in 0..10_000 {
            lat.step();
        }
        assert_eq!(lat.vehicle_count(), n);
    }

    #[test]
    fn open_lane_drains() {
        let mut lat = CellLattice::new(CaParams { length: 10, closed: false, ..det(10, 5) }).unwrap();
        lat.place(8, 5).unwrap();
        let s = lat.step();
        assert_eq!((s.exited, s.crossings), (1, 1));
        assert!(lat.is_empty());
    }

    #[test]
    fn injector_rules() {
        let mut ring = CellLattice::new(det(5, 1)).unwrap();
        assert_eq!(Injector::new(1.0, 0).unwrap().inject(&mut ring), Err(CaError::ClosedLattice));
        let mut open = CellLattice::new(CaParams { closed: false, ..det(5, 1) }).unwrap();
        assert!(!Injector::new(0.0, 0).unwrap().inject(&mut open).unwrap());
        assert!(open.is_empty());
        assert!(Injector::new(1.0, 0).unwrap().inject(&mut open).unwrap());
        assert!(open.cells()[0].is_some());
        assert!(Injector::new(1.5, 0).is_err());
    }

    #[test]
    fn injection_rate_matches() {
        let mut buf = CellLattice::new(CaParams { length: 1, closed: false, ..det(1, 1) }).unwrap();
        let mut inj = Injector::new(0.5, 11).unwrap();
        let steps = 10_000;
        let mut hits = 0;
        for _ in 0..steps {
            if inj.inject(&mut buf).unwrap() {
                hits += 1;
            }
            buf.remove(0);
        }
        let rate = hits as f64 / steps as f64;
        assert!((rate - 0.5).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn empty_measure() {
        let mut lat = CellLattice::new(det(50, 5)).unwrap();
        let m = measure(&mut lat, 10).unwrap();
        assert_eq!((m.density, m.flow, m.mean_speed), (0.0, 0.0, 0.0));
        assert!(measure(&mut lat, 0).is_err());
    }

    #[test]
    fn lone_vehicle_free_speed() {
        let mut lat = CellLattice::new(det(100, 5)).unwrap();
        lat.place(0, 0).unwrap();
        for _ in 0..10 {
            lat.step();
        }
        assert_eq!(measure(&mut lat, 100).unwrap().mean_speed, 5.0);
    }

    /// Independent reference: positions on a ring as an ordered list,
    /// deterministic rules only.
    fn reference_flow(len: usize, count: usize, vmax: usize, steps: usize) -> f64 {
        let mut pos: Vec<usize> = (0..count).map(|i| i * len / count).collect();
        let mut vel = vec![0usize; count];
        let mut moved = 0usize;
        for _ in 0..steps {
            let old = pos.clone();
            for i in 0..count {
                let ahead = old[(i + 1) % count];
                let gap = if count == 1 { len - 1 } else { (ahead + len - old[i] - 1) % len };
                vel[i] = (vel[i] + 1).min(vmax).min(gap);
                pos[i] = (old[i] + vel[i]) % len;
                moved += vel[i];
            }
        }
        // mean flow through any fixed boundary equals total movement / (len * steps)
        moved as f64 / (len * steps) as f64
    }

    #[test]
    fn small_rings_match_reference() {
        for len in 2..=12usize {
            for count in 0..=len {
                let mut lat = CellLattice::equally_spaced_ring(det(len, 3), count, 0).unwrap();
                let steps = 240;
                let mut moved = 0u64;
                for _ in 0..steps {
                    lat.step();
                    moved += lat.vehicles().map(|(_, v)| u64::from(v.speed)).sum::<u64>();
                }
                let ours = moved as f64 / (len * steps) as f64;
                let reference = if count == 0 { 0.0 } else { reference_flow(len, count, 3, steps) };
                assert!((ours - reference).abs() < 1e-12, "len {len} count {count}");
            }
        }
    }

    #[test]
    fn diagram_shape_on_ring_100() {
        let params = det(100, 5);
        let mut flows = Vec::new();
        for i in 1..=19 {
            let rho = i as f64 * 0.05;
            flows.push((rho, ring_sample(&params, rho, 2000).unwrap().flow));
        }
        assert!(flows.iter().all(|f| f.1 >= 0.0));
        assert_eq!(ring_sample(&params, 1.0, 100).unwrap().flow, 0.0);
        let peak = flows.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((peak.0 - 1.0 / 6.0).abs() <= 0.1, "{peak:?}");
    }

    proptest! {
        #[test]
        fn invariants_hold(seed in 0u64..1000, density in 0.0f64..1.0, p in 0.0f64..1.0, vmax in 1u32..7) {
            let params = CaParams { length: 60, vmax, p_slow: p, seed, ..CaParams::default() };
            let mut lat = CellLattice::random_ring(params.clone(), density).unwrap();
            let order = |l: &CellLattice| l.vehicles().map(|(_, v)| v.id).collect::<Vec<_>>();
            let count = lat.vehicle_count();
            let mut twin = CellLattice::random_ring(params, density).unwrap();
            for _ in 0..50 {
                let before = order(&lat);
                lat.step();
                twin.step();
                prop_assert_eq!(lat.vehicle_count(), count);
                prop_assert!(lat.vehicles().all(|(_, v)| v.speed <= vmax));
                // the id sequence is a rotation of the previous one: nobody overtakes
                let after = order(&lat);
                if !after.is_empty() {
                    let k = before.iter().position(|&id| id == after[0]).unwrap();
                    let rotated: Vec<_> = before[k..].iter().chain(&before[..k]).copied().collect();
                    prop_assert_eq!(&rotated, &after);
                }
                prop_assert_eq!(lat.cells(), twin.cells());
            }
        }

        #[test]
        fn free_flow_from_even_spacing(count in 1usize..=16, vmax in 1u32..6) {
            let len = 100usize;
            prop_assume!(count as f64 / len as f64 <= 1.0 / (vmax as f64 + 1.0));
            let mut lat = CellLattice::equally_spaced_ring(det(len, vmax), count, 0).unwrap();
            for _ in 0..vmax {
                lat.step();
            }
            for _ in 0..50 {
                lat.step();
                prop_assert!(lat.vehicles().all(|(_, v)| v.speed == vmax));
            }
        }
    }
}
