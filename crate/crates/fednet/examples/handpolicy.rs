//! Drives the learner vehicles with IDM quantized onto the discrete action
//! set, no learning. Checks whether the action set can express a surviving
//! policy at all. `cargo run --example handpolicy -- <epochs>`

use std::collections::BTreeMap;

use fedring_fednet::{derive_seed, SeedStream};
use fedring_traffic::{
    build_figure_eight, conflict_yield_acceleration, idm_control, intersection_gate, reset_epoch,
    step, Controller, TrafficConfig, MAX_STEPS_PER_EPOCH, STEP_SECONDS,
};

fn main() {
    let epochs: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(5);
    let actions = [-3.0, -1.5, 0.0, 1.5, 3.0];
    let cfg = TrafficConfig::default();
    let geom = build_figure_eight(cfg.loop_radius, cfg.conflict_half_length).unwrap();
    let world_seed = derive_seed(1, SeedStream::World);

    for epoch in 0..epochs {
        let mut world = reset_epoch(&geom, world_seed, &cfg);
        let mut speed_sum = 0.0;
        for _ in 0..MAX_STEPS_PER_EPOCH {
            let gated = intersection_gate(&world, &geom, cfg.lookahead_horizon);
            let mut accel: BTreeMap<usize, f64> = BTreeMap::new();
            for v in &world.vehicles {
                let a = match v.controller {
                    Controller::Baseline => {
                        idm_control(&world, &geom, &cfg, &gated, v.id).unwrap()
                    }
                    Controller::Learner(_) => {
                        let ideal = idm_control(&world, &geom, &cfg, &gated, v.id).unwrap();
                        // Nearest discrete action, then the gate cap.
                        let mut best = actions[0];
                        for a in actions {
                            if (a - ideal).abs() < (best - ideal).abs() {
                                best = a;
                            }
                        }
                        if gated.contains(&v.id) {
                            best = best
                                .min(conflict_yield_acceleration(&world, &geom, &cfg, v.id).unwrap());
                        }
                        best
                    }
                };
                accel.insert(v.id, a);
            }
            world = step(&world, &accel, STEP_SECONDS, &geom, &cfg).unwrap();
            speed_sum += world.mean_speed();
            if world.crashed {
                break;
            }
        }
        println!(
            "epoch {epoch}: steps {} crashed {} mean_speed {:.3}",
            world.step_index,
            world.crashed,
            speed_sum / f64::from(MAX_STEPS_PER_EPOCH)
        );
    }
}
