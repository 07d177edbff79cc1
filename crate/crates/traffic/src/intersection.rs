use std::collections::BTreeSet;

use crate::geometry::TrackGeometry;
use crate::world::{VehicleState, WorldState};

/// Floor used when projecting time-to-entry, so a vehicle stopped right at
/// the entry line still registers as an approacher instead of creeping
/// blindly into an occupied crossing.
const CREEP_SPEED: f64 = 0.5;

/// Whether a vehicle's body has positive overlap with conflict interval
/// `which` (0 or 1). A zero-measure touch does not count, so with
/// `conflict_half_length = 0` nothing ever occupies the crossing.
pub fn occupies_conflict(vehicle: &VehicleState, geom: &TrackGeometry, which: usize) -> bool {
    let center = geom.conflict_centers[which];
    let interval_len = 2.0 * geom.conflict_half_length;
    if interval_len <= 0.0 {
        return false;
    }
    let body_start = geom.wrap(vehicle.arc_pos - vehicle.length);
    let zone_start = geom.wrap(center - geom.conflict_half_length);
    geom.circular_overlap(body_start, vehicle.length, zone_start, interval_len) > 0.0
}

/// Forward distance from a front bumper to the entry of conflict interval
/// `which`.
pub fn conflict_entry_distance(geom: &TrackGeometry, front_pos: f64, which: usize) -> f64 {
    let entry = geom.wrap(geom.conflict_centers[which] - geom.conflict_half_length);
    geom.forward_distance(front_pos, entry)
}

/// Priority rule at the self-crossing.
///
/// Returns the ids that must treat the conflict-zone entry as a stopped
/// virtual leader this step:
/// - while either conflict interval is occupied, every vehicle approaching
///   the crossing through the other interval within the lookahead horizon is
///   gated (both sides if both intervals are occupied);
/// - with the crossing clear, the sides' nearest approachers are compared by
///   time-to-entry (ties to the lower id) and the losing side yields.
pub fn intersection_gate(
    world: &WorldState,
    geom: &TrackGeometry,
    lookahead_horizon: f64,
) -> BTreeSet<usize> {
    let mut gated = BTreeSet::new();
    if geom.conflict_half_length <= 0.0 {
        return gated;
    }

    let occupied = [
        world
            .vehicles
            .iter()
            .any(|v| occupies_conflict(v, geom, 0)),
        world
            .vehicles
            .iter()
            .any(|v| occupies_conflict(v, geom, 1)),
    ];

    // (time_to_entry, id) per side, for vehicles not already in either zone.
    let mut approachers: [Vec<(f64, usize)>; 2] = [Vec::new(), Vec::new()];
    for v in &world.vehicles {
        if occupies_conflict(v, geom, 0) || occupies_conflict(v, geom, 1) {
            continue;
        }
        for which in 0..2 {
            let t = conflict_entry_distance(geom, v.arc_pos, which) / v.speed.max(CREEP_SPEED);
            if t <= lookahead_horizon {
                approachers[which].push((t, v.id));
            }
        }
    }

    match (occupied[0], occupied[1]) {
        (true, true) => {
            gated.extend(approachers[0].iter().map(|&(_, id)| id));
            gated.extend(approachers[1].iter().map(|&(_, id)| id));
        }
        (true, false) => gated.extend(approachers[1].iter().map(|&(_, id)| id)),
        (false, true) => gated.extend(approachers[0].iter().map(|&(_, id)| id)),
        (false, false) => {
            let nearest = |side: &[(f64, usize)]| {
                side.iter()
                    .copied()
                    .min_by(|a, b| a.partial_cmp(b).expect("finite approach times"))
            };
            if let (Some(a), Some(b)) = (nearest(&approachers[0]), nearest(&approachers[1])) {
                // Smaller (time, id) wins the crossing; the other side yields.
                let losing_side = if a < b { 1 } else { 0 };
                gated.extend(approachers[losing_side].iter().map(|&(_, id)| id));
            }
        }
    }
    gated
}
