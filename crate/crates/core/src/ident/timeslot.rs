/// Regular handover period, seconds.
pub const SLOT_LENGTH_S: f64 = 15.0;
/// Slots start at 12, 27, 42 and 57 s past each UTC minute.
pub const SLOT_PHASE_S: f64 = 12.0;

/// Half-open scheduling slot `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Timeslot {
    pub start: f64,
    pub end: f64,
}

impl Timeslot {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    /// True when `t` is at least `guard_s` away from both slot edges.
    pub fn is_mid_slot(&self, t: f64, guard_s: f64) -> bool {
        t - self.start >= guard_s && self.end - t >= guard_s
    }

    pub fn next(&self) -> Timeslot {
        Timeslot { start: self.end, end: self.end + SLOT_LENGTH_S }
    }
}

/// The slot containing Unix time `t`.
pub fn timeslot_of(t: f64) -> Timeslot {
    let start = ((t - SLOT_PHASE_S) / SLOT_LENGTH_S).floor() * SLOT_LENGTH_S + SLOT_PHASE_S;
    // guard against the division landing one ulp short of a boundary
    let start = if t >= start + SLOT_LENGTH_S { start + SLOT_LENGTH_S } else { start };
    Timeslot { start, end: start + SLOT_LENGTH_S }
}
