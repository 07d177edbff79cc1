use std::collections::{BTreeMap, BTreeSet};

use crate::config::TrafficConfig;
use crate::error::TrafficError;
use crate::geometry::TrackGeometry;
use crate::idm::idm_acceleration;
use crate::intersection::{conflict_entry_distance, occupies_conflict};
use crate::world::{neighbors, WorldState};

/// Gap floor fed into IDM when a vehicle is effectively bumper to bumper.
const GAP_FLOOR: f64 = 1e-3;

/// Constant deceleration needed to reach the leader's speed exactly when the
/// gap closes. Zero when not closing in.
pub fn required_deceleration(v: f64, v_lead: f64, gap: f64) -> f64 {
    if v <= v_lead {
        return 0.0;
    }
    (v * v - v_lead * v_lead) / (2.0 * gap.max(1e-9))
}

/// Whether executing `a_cmd` this step would require braking harder than
/// `b_emergency` afterwards to keep the bumper gap above `crash_threshold`,
/// even if the leader itself brakes at `b_emergency` from now on.
///
/// The required-deceleration test quantified for the discrete step: one step
/// of travel at the commanded speed is lost to control lag before braking
/// can bite.
fn emergency_brake_needed(
    v: f64,
    v_lead: f64,
    gap: f64,
    a_cmd: f64,
    dt: f64,
    cfg: &TrafficConfig,
) -> bool {
    let v_next = (v + a_cmd * dt).clamp(0.0, cfg.v_max);
    let braking = 2.0 * cfg.b_emergency;
    let own_reach = v_next * dt + v_next * v_next / braking;
    let leader_travel = v_lead * v_lead / braking;
    gap + leader_travel - own_reach < cfg.crash_threshold
}

/// Advances the world by one step of `dt` seconds.
///
/// Commanded accelerations are clamped at `-b_emergency`; any vehicle whose
/// current gap would need harder braking than `b_emergency` to avoid its
/// leader gets the brakes slammed to `-b_emergency` outright. Integration is
/// semi-implicit Euler with speeds saturating in `[0, v_max]`. After
/// integration the epoch ends in a crash if any bumper gap falls below
/// `crash_threshold` or vehicles occupy the physical crossing from both
/// conflict intervals at once.
pub fn step(
    world: &WorldState,
    accel: &BTreeMap<usize, f64>,
    dt: f64,
    geom: &TrackGeometry,
    cfg: &TrafficConfig,
) -> Result<WorldState, TrafficError> {
    if world.crashed {
        return Err(TrafficError::EpochTerminated);
    }

    let n = world.vehicles.len();
    let mut applied = Vec::with_capacity(n);
    let mut old_gaps = Vec::with_capacity(n);
    let mut ahead_index = Vec::with_capacity(n);
    for v in &world.vehicles {
        let commanded = *accel
            .get(&v.id)
            .ok_or(TrafficError::IncompleteControl(v.id))?;
        let mut a = commanded.max(-cfg.b_emergency);
        let nb = neighbors(world, geom, v.id)?;
        if emergency_brake_needed(v.speed, nb.ahead.speed, nb.gap_ahead, a, dt, cfg) {
            a = -cfg.b_emergency;
        }
        applied.push(a);
        old_gaps.push(nb.gap_ahead);
        ahead_index.push(
            world
                .vehicles
                .iter()
                .position(|o| o.id == nb.ahead.id)
                .expect("neighbor exists"),
        );
    }

    let mut next = world.clone();
    let mut displacement = Vec::with_capacity(n);
    for (i, v) in next.vehicles.iter_mut().enumerate() {
        let new_speed = (v.speed + applied[i] * dt).clamp(0.0, cfg.v_max);
        let disp = new_speed * dt;
        v.speed = new_speed;
        v.arc_pos = geom.wrap(v.arc_pos + disp);
        displacement.push(disp);
    }
    next.step_index = world.step_index + 1;
    next.sim_time = f64::from(next.step_index) * dt;

    // Rear-end detection against the pre-step leader, displacement-adjusted
    // so a numeric pass-through still registers as a collision.
    for i in 0..n {
        let j = ahead_index[i];
        let new_gap = old_gaps[i] + displacement[j] - displacement[i];
        if new_gap < cfg.crash_threshold {
            next.crashed = true;
            if std::env::var_os("FEDRING_CRASH_DEBUG").is_some() {
                eprintln!(
                    "[crash-debug] rear-end: follower {} (v={:.2}) into {} (v={:.2}), gap {:.3} at step {}",
                    world.vehicles[i].id,
                    next.vehicles[i].speed,
                    world.vehicles[j].id,
                    next.vehicles[j].speed,
                    new_gap,
                    next.step_index
                );
            }
        }
    }

    // Simultaneous occupancy of the crossing from opposite intervals.
    if !next.crashed {
        let mut in_zone = [false, false];
        for v in &next.vehicles {
            for which in 0..2 {
                if occupies_conflict(v, geom, which) {
                    in_zone[which] = true;
                }
            }
        }
        if in_zone[0] && in_zone[1] {
            next.crashed = true;
            if std::env::var_os("FEDRING_CRASH_DEBUG").is_some() {
                let occupants: Vec<String> = next
                    .vehicles
                    .iter()
                    .flat_map(|v| {
                        (0..2).filter_map(move |w| {
                            occupies_conflict(v, geom, w)
                                .then(|| format!("{}@zone{w}(v={:.2})", v.id, v.speed))
                        })
                    })
                    .collect();
                eprintln!(
                    "[crash-debug] conflict co-occupancy at step {}: {}",
                    next.step_index,
                    occupants.join(", ")
                );
            }
        }
    }

    Ok(next)
}

/// Deceleration toward a stopped virtual leader at the nearer conflict-zone
/// entry. The gate rule is the lane's intersection controller: a gated
/// vehicle's commanded acceleration is capped by this regardless of who (or
/// what) drives it.
pub fn conflict_yield_acceleration(
    world: &WorldState,
    geom: &TrackGeometry,
    cfg: &TrafficConfig,
    id: usize,
) -> Result<f64, TrafficError> {
    let me = world.vehicle(id)?;
    let entry_gap = (0..2)
        .map(|w| conflict_entry_distance(geom, me.arc_pos, w))
        .fold(f64::INFINITY, f64::min);
    Ok(idm_acceleration(
        me.speed,
        0.0,
        entry_gap.max(GAP_FLOOR),
        &cfg.idm,
        cfg.b_emergency,
    ))
}

/// IDM control law for one baseline-driven vehicle: follow the leader, and
/// when gated at the crossing also yield to a stopped virtual leader at the
/// conflict-zone entry.
pub fn idm_control(
    world: &WorldState,
    geom: &TrackGeometry,
    cfg: &TrafficConfig,
    gated: &BTreeSet<usize>,
    id: usize,
) -> Result<f64, TrafficError> {
    let me = world.vehicle(id)?;
    let nb = neighbors(world, geom, id)?;
    let mut a = idm_acceleration(
        me.speed,
        nb.ahead.speed,
        nb.gap_ahead.max(GAP_FLOOR),
        &cfg.idm,
        cfg.b_emergency,
    );
    if gated.contains(&id) {
        a = a.min(conflict_yield_acceleration(world, geom, cfg, id)?);
    }
    Ok(a)
}
