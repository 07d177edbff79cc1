use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{TrafficConfig, VEHICLE_COUNT};
use crate::error::TrafficError;
use crate::geometry::TrackGeometry;

/// Who drives a vehicle. The tag is fixed at reset; the experiment mode
/// decides how it is interpreted (the all-IDM baseline drives every vehicle
/// with the IDM controller regardless of tag).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Controller {
    Baseline,
    Learner(usize),
}

/// One vehicle. `arc_pos` is the front bumper, so the body covers
/// `[arc_pos - length, arc_pos]` along the lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub id: usize,
    pub arc_pos: f64,
    pub speed: f64,
    pub length: f64,
    pub controller: Controller,
}

/// Full simulation state for one epoch. Vehicles are stored in cyclic
/// arc-length order, which the single one-way lane preserves step to step.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub vehicles: Vec<VehicleState>,
    pub sim_time: f64,
    pub step_index: u32,
    pub epoch_index: u32,
    pub crashed: bool,
}

impl WorldState {
    pub fn vehicle(&self, id: usize) -> Result<&VehicleState, TrafficError> {
        self.vehicles
            .iter()
            .find(|v| v.id == id)
            .ok_or(TrafficError::UnknownVehicle(id))
    }

    pub fn mean_speed(&self) -> f64 {
        if self.vehicles.is_empty() {
            return 0.0;
        }
        self.vehicles.iter().map(|v| v.speed).sum::<f64>() / self.vehicles.len() as f64
    }
}

/// The arc-length neighbors of one vehicle, with bumper-to-bumper gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbors {
    pub ahead: VehicleState,
    pub gap_ahead: f64,
    pub behind: VehicleState,
    pub gap_behind: f64,
}

/// Finds the vehicles ahead of and behind `id` along the lane.
///
/// "Ahead" is the vehicle at the smallest positive forward arc distance.
/// Gaps are bumper-to-bumper: front-to-front distance minus the leading
/// vehicle's length, clamped at zero.
pub fn neighbors(
    world: &WorldState,
    geom: &TrackGeometry,
    id: usize,
) -> Result<Neighbors, TrafficError> {
    if world.vehicles.len() < 2 {
        return Err(TrafficError::TooFewVehicles(world.vehicles.len()));
    }
    let me = world.vehicle(id)?;
    let mut ahead: Option<(f64, &VehicleState)> = None;
    let mut behind: Option<(f64, &VehicleState)> = None;
    for other in &world.vehicles {
        if other.id == id {
            continue;
        }
        let d_fwd = geom.forward_distance(me.arc_pos, other.arc_pos);
        if ahead.map_or(true, |(best, _)| d_fwd < best) {
            ahead = Some((d_fwd, other));
        }
        let d_back = geom.forward_distance(other.arc_pos, me.arc_pos);
        if behind.map_or(true, |(best, _)| d_back < best) {
            behind = Some((d_back, other));
        }
    }
    let (d_ahead, ahead) = ahead.expect("at least one other vehicle");
    let (d_behind, behind) = behind.expect("at least one other vehicle");
    Ok(Neighbors {
        ahead: *ahead,
        gap_ahead: (d_ahead - ahead.length).max(0.0),
        behind: *behind,
        gap_behind: (d_behind - me.length).max(0.0),
    })
}

/// The 6-component normalized local observation of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub own_pos: f64,
    pub own_speed: f64,
    pub gap_ahead: f64,
    pub ahead_speed: f64,
    pub gap_behind: f64,
    pub behind_speed: f64,
}

impl Observation {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.own_pos,
            self.own_speed,
            self.gap_ahead,
            self.ahead_speed,
            self.gap_behind,
            self.behind_speed,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            own_pos: a[0],
            own_speed: a[1],
            gap_ahead: a[2],
            ahead_speed: a[3],
            gap_behind: a[4],
            behind_speed: a[5],
        }
    }
}

/// Builds the local observation of `vehicle_id`: own position and speed plus
/// gap and speed of the vehicles ahead and behind, positions and gaps
/// normalized by track length, speeds by `v_max`.
pub fn observe(
    world: &WorldState,
    geom: &TrackGeometry,
    vehicle_id: usize,
    v_max: f64,
) -> Result<Observation, TrafficError> {
    let me = world.vehicle(vehicle_id)?;
    let nb = neighbors(world, geom, vehicle_id)?;
    Ok(Observation {
        own_pos: me.arc_pos / geom.total_length,
        own_speed: me.speed / v_max,
        gap_ahead: nb.gap_ahead / geom.total_length,
        ahead_speed: nb.ahead.speed / v_max,
        gap_behind: nb.gap_behind / geom.total_length,
        behind_speed: nb.behind.speed / v_max,
    })
}

/// Shared per-step reward: the fleet's mean speed normalized by `v_max`,
/// minus `crash_penalty` on the step that ends in a crash. Identical for all
/// agents by construction.
pub fn reward(
    world_before: &WorldState,
    world_after: &WorldState,
    v_max: f64,
    crash_penalty: f64,
) -> f64 {
    debug_assert_eq!(world_after.step_index, world_before.step_index + 1);
    let mut r = world_after.mean_speed() / v_max;
    if world_after.crashed {
        r -= crash_penalty;
    }
    r
}

/// Places the 14 vehicles for a fresh epoch: even spacing plus a seeded
/// jitter of up to `placement_jitter` meters, all speeds zero, controllers
/// alternating Baseline / Learner so each class gets 7 slots. The whole
/// pattern is shifted half a spacing so nobody spawns on the crossing.
///
/// Consumes exactly 14 uniform draws from a ChaCha8 stream seeded with
/// `rng_seed`, so identical seeds give identical worlds.
pub fn reset_epoch(geom: &TrackGeometry, rng_seed: u64, cfg: &TrafficConfig) -> WorldState {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let spacing = geom.total_length / VEHICLE_COUNT as f64;
    let offset = spacing / 2.0;
    let vehicles = (0..VEHICLE_COUNT)
        .map(|i| {
            let jitter = (rng.random::<f64>() * 2.0 - 1.0) * cfg.placement_jitter;
            let controller = if i % 2 == 1 && i / 2 < cfg.learner_count {
                Controller::Learner(i / 2)
            } else {
                Controller::Baseline
            };
            VehicleState {
                id: i,
                arc_pos: geom.wrap(offset + i as f64 * spacing + jitter),
                speed: 0.0,
                length: cfg.vehicle_length,
                controller,
            }
        })
        .collect();
    WorldState {
        vehicles,
        sim_time: 0.0,
        step_index: 0,
        epoch_index: 0,
        crashed: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_figure_eight;

    fn two_vehicle_world(geom: &TrackGeometry) -> WorldState {
        WorldState {
            vehicles: vec![
                VehicleState {
                    id: 0,
                    arc_pos: 0.0,
                    speed: 0.0,
                    length: 5.0,
                    controller: Controller::Baseline,
                },
                VehicleState {
                    id: 1,
                    arc_pos: 100.0,
                    speed: 0.0,
                    length: 5.0,
                    controller: Controller::Baseline,
                },
            ],
            sim_time: 0.0,
            step_index: 0,
            epoch_index: 0,
            crashed: false,
        }
    }

    #[test]
    fn gap_is_center_distance_minus_leader_length() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let world = two_vehicle_world(&geom);
        let nb = neighbors(&world, &geom, 0).unwrap();
        assert_eq!(nb.ahead.id, 1);
        assert!((nb.gap_ahead - 95.0).abs() < 1e-12);
    }

    #[test]
    fn two_vehicle_world_wraps_to_same_neighbor() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let world = two_vehicle_world(&geom);
        let nb = neighbors(&world, &geom, 1).unwrap();
        assert_eq!(nb.ahead.id, 0);
        assert_eq!(nb.behind.id, 0);
        // Forward from 100 to 0 wraps around the track.
        assert!((nb.gap_ahead - (geom.total_length - 100.0 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn unknown_id_is_an_error() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let world = two_vehicle_world(&geom);
        assert_eq!(
            neighbors(&world, &geom, 7).unwrap_err(),
            TrafficError::UnknownVehicle(7)
        );
    }

    #[test]
    fn evenly_spaced_fleet_has_uniform_gaps() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let cfg = TrafficConfig {
            placement_jitter: 0.0,
            ..TrafficConfig::default()
        };
        let world = reset_epoch(&geom, 42, &cfg);
        let expected = geom.total_length / 14.0 - 5.0;
        for v in &world.vehicles {
            let nb = neighbors(&world, &geom, v.id).unwrap();
            assert!(
                (nb.gap_ahead - expected).abs() < 1e-9,
                "gap {} vs {}",
                nb.gap_ahead,
                expected
            );
        }
        assert!((expected - 21.927936).abs() < 1e-3);
    }

    #[test]
    fn reset_is_deterministic_and_balanced() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let cfg = TrafficConfig::default();
        let a = reset_epoch(&geom, 7, &cfg);
        let b = reset_epoch(&geom, 7, &cfg);
        assert_eq!(a, b);
        let c = reset_epoch(&geom, 8, &cfg);
        assert_ne!(a, c);

        let learners = a
            .vehicles
            .iter()
            .filter(|v| matches!(v.controller, Controller::Learner(_)))
            .count();
        assert_eq!(learners, 7);
        assert_eq!(a.vehicles.len(), VEHICLE_COUNT);
        assert!(a.vehicles.iter().all(|v| v.speed == 0.0));
    }

    #[test]
    fn observation_normalizes_position() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let mut world = two_vehicle_world(&geom);
        world.vehicles[0].arc_pos = geom.total_length / 2.0;
        let obs = observe(&world, &geom, 0, 8.0).unwrap();
        assert!((obs.own_pos - 0.5).abs() < 1e-12);
        assert_eq!(obs.own_speed, 0.0);
        assert_eq!(obs.ahead_speed, 0.0);
    }

    #[test]
    fn observation_symmetry_under_even_spacing() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let cfg = TrafficConfig {
            placement_jitter: 0.0,
            ..TrafficConfig::default()
        };
        let world = reset_epoch(&geom, 1, &cfg);
        let first = observe(&world, &geom, 0, cfg.v_max).unwrap();
        for v in &world.vehicles {
            let obs = observe(&world, &geom, v.id, cfg.v_max).unwrap();
            assert!((obs.gap_ahead - first.gap_ahead).abs() < 1e-9);
            assert!((obs.gap_behind - first.gap_behind).abs() < 1e-9);
        }
    }

    #[test]
    fn reward_matches_definition() {
        let geom = build_figure_eight(30.0, 5.0).unwrap();
        let cfg = TrafficConfig::default();
        let before = reset_epoch(&geom, 3, &cfg);
        let mut after = before.clone();
        after.step_index = 1;

        // All speeds zero, no crash.
        assert_eq!(reward(&before, &after, 8.0, 10.0), 0.0);

        // All speeds at v_max.
        for v in &mut after.vehicles {
            v.speed = 8.0;
        }
        assert!((reward(&before, &after, 8.0, 10.0) - 1.0).abs() < 1e-12);

        // Mean speed 4 with a crash: 0.5 - 10.
        for v in &mut after.vehicles {
            v.speed = 4.0;
        }
        after.crashed = true;
        assert!((reward(&before, &after, 8.0, 10.0) - (-9.5)).abs() < 1e-12);
    }
}
