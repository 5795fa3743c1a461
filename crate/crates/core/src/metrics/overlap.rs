use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance used when checking that two disks share a radius.
const RADIUS_TOLERANCE: f64 = 1e-12;

/// Circular observable area of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationDisk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl ObservationDisk {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn distance_to(&self, other: &ObservationDisk) -> f64 {
        let dx = self.center[0] - other.center[0];
        let dy = self.center[1] - other.center[1];
        dx.hypot(dy)
    }
}

/// Fraction of one disk's area shared with another disk of the same radius.
///
/// The lens is two circular segments: the sector pair `2 acos(l / 2r) r^2`
/// minus the kite spanned by the two centres and the chord endpoints, whose
/// area comes from Heron's formula on the `(l, r, r)` triangle with
/// semi-perimeter `(l + 2r) / 2`.
pub fn observation_overlap(a: &ObservationDisk, b: &ObservationDisk) -> Result<f64> {
    let r = a.radius;
    if (a.radius - b.radius).abs() > RADIUS_TOLERANCE * a.radius.max(b.radius) {
        return Err(Error::UnequalRadius { a: a.radius, b: b.radius });
    }
    Ok(overlap_fraction(a.distance_to(b), r))
}

/// Overlap fraction for centre distance `l` and shared radius `r > 0`.
pub fn overlap_fraction(l: f64, r: f64) -> f64 {
    debug_assert!(r > 0.0);
    if l <= 0.0 {
        return 1.0;
    }
    if l >= 2.0 * r {
        return 0.0;
    }
    let p = (l + 2.0 * r) / 2.0;
    let heron = (p * (p - l) * (p - r) * (p - r)).max(0.0);
    let kite = 2.0 * heron.sqrt();
    let lens = 2.0 * (l / (2.0 * r)).acos() * r * r - kite;
    (lens / (PI * r * r)).clamp(0.0, 1.0)
}
