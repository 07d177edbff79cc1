use crate::error::TrafficError;

/// Arc-length parameterization of the figure-eight lane.
///
/// The lane is two equal circular loops joined at one physical crossing.
/// Arc positions live in `[0, total_length)` and the crossing appears twice
/// along arc-length, once per loop: the intervals
/// `[c - h, c + h]` around each conflict center are disjoint in arc-length
/// but map to the same patch of asphalt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackGeometry {
    pub loop_radius: f64,
    pub total_length: f64,
    /// Arc positions of the two conflict-zone centers.
    pub conflict_centers: [f64; 2],
    pub conflict_half_length: f64,
}

/// Builds the figure-eight track: two loops of `loop_radius`, total length
/// `4 * pi * loop_radius`, crossing centers half a track apart.
pub fn build_figure_eight(
    loop_radius: f64,
    conflict_half_length: f64,
) -> Result<TrackGeometry, TrafficError> {
    if !(loop_radius > 0.0) || !loop_radius.is_finite() {
        return Err(TrafficError::InvalidGeometry(format!(
            "loop_radius must be positive and finite, got {loop_radius}"
        )));
    }
    if !(conflict_half_length >= 0.0) || !conflict_half_length.is_finite() {
        return Err(TrafficError::InvalidGeometry(format!(
            "conflict_half_length must be non-negative and finite, got {conflict_half_length}"
        )));
    }
    let quarter_loop = std::f64::consts::PI * loop_radius / 2.0;
    if conflict_half_length >= quarter_loop {
        return Err(TrafficError::InvalidGeometry(format!(
            "conflict_half_length {conflict_half_length} must be below a quarter loop ({quarter_loop})"
        )));
    }
    let total_length = 4.0 * std::f64::consts::PI * loop_radius;
    Ok(TrackGeometry {
        loop_radius,
        total_length,
        conflict_centers: [0.0, total_length / 2.0],
        conflict_half_length,
    })
}

impl TrackGeometry {
    /// Reduces an arc position into `[0, total_length)`.
    pub fn wrap(&self, pos: f64) -> f64 {
        let mut r = pos % self.total_length;
        if r < 0.0 {
            r += self.total_length;
        }
        if r >= self.total_length {
            r = 0.0;
        }
        r
    }

    /// Forward arc distance from `from` to `to`, in `[0, total_length)`.
    pub fn forward_distance(&self, from: f64, to: f64) -> f64 {
        self.wrap(to - from)
    }

    /// Overlap length between two circular intervals given as (start, len).
    pub(crate) fn circular_overlap(
        &self,
        a_start: f64,
        a_len: f64,
        b_start: f64,
        b_len: f64,
    ) -> f64 {
        debug_assert!(a_len >= 0.0 && a_len <= self.total_length);
        debug_assert!(b_len >= 0.0 && b_len <= self.total_length);
        // Shift so interval A starts at 0, then B covers [b0, b0+b_len),
        // possibly wrapping past total_length.
        let b0 = self.forward_distance(a_start, b_start);
        let mut overlap = (b0 + b_len).min(self.total_length).min(a_len) - b0;
        if overlap < 0.0 {
            overlap = 0.0;
        }
        let wrapped = b0 + b_len - self.total_length;
        if wrapped > 0.0 {
            overlap += wrapped.min(a_len);
        }
        overlap
    }
}
