//! Stationary integer renewal traces and the two-sided counting function.

use crate::error::CoreError;
use crate::laws::RenewalLaw;
use crate::rng::RngStream;
use rand::Rng;

/// A realization of a stationary integer renewal process restricted to
/// a window `[lo, hi]`. Points are sorted, distinct and in-window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenewalTrace {
    pub lo: i64,
    pub hi: i64,
    pub points: Vec<i64>,
    pub law: RenewalLaw,
}

impl RenewalTrace {
    pub fn contains(&self, i: i64) -> bool {
        self.points.binary_search(&i).is_ok()
    }

    /// Number of points in the closed integer interval [a, b].
    pub fn count_in(&self, a: i64, b: i64) -> usize {
        if a > b {
            return 0;
        }
        let lo = self.points.partition_point(|&p| p < a);
        let hi = self.points.partition_point(|&p| p <= b);
        hi - lo
    }

    pub fn density(&self) -> f64 {
        self.points.len() as f64 / (self.hi - self.lo + 1) as f64
    }
}

/// Sample a stationary trace on `[lo, hi]`.
///
/// The first point at or after the left edge is placed by the
/// stationary delay law P(D = j) = P(X > j)/E X; subsequent points are
/// i.i.d. inter-renewal draws.
pub fn sample_stationary_trace(
    lo: i64,
    hi: i64,
    law: RenewalLaw,
    rng: &mut impl Rng,
) -> Result<RenewalTrace, CoreError> {
    if lo > hi {
        return Err(CoreError::EmptyWindow);
    }
    let mut points = Vec::new();
    let mut p = lo + law.sample_delay(rng) as i64;
    while p <= hi {
        points.push(p);
        p += law.sample(rng) as i64;
    }
    Ok(RenewalTrace { lo, hi, points, law })
}

/// Convenience wrapper taking an [`RngStream`].
pub fn sample_stationary_trace_stream(
    lo: i64,
    hi: i64,
    law: RenewalLaw,
    stream: RngStream,
) -> Result<RenewalTrace, CoreError> {
    sample_stationary_trace(lo, hi, law, &mut stream.rng())
}

/// The two-sided counting function
/// N(i) = |points ∩ [0, i]| - |points ∩ [-i, 0)|.
pub fn counting_function(trace: &RenewalTrace, i: i64) -> Result<i64, CoreError> {
    let span = i.abs();
    if -span < trace.lo || span > trace.hi {
        return Err(CoreError::OutsideWindow {
            index: i,
            lo: trace.lo,
            hi: trace.hi,
        });
    }
    let plus = trace.count_in(0, i) as i64;
    let minus = trace.count_in(-i, -1) as i64;
    Ok(plus - minus)
}
