//! Row-literal variant of the gap dynamics.
//!
//! The averaging map takes each output gap to the mean of the gap and
//! one fair-coin-chosen neighbor, with independent coins per row. The
//! folding map sums the two gaps at each site of an independently
//! sampled stationary merge trace and rescales by 3/4.
//!
//! This pipeline is kept distinct from the exact coin-coupled dynamics:
//! composed with an independent merge trace it matches the point model
//! in distribution of the one-step operators, not pathwise. The
//! analysis layer reports the gap-marginal distance between the two.

use rand::Rng;

use crate::error::CoreError;
use crate::laws::{GapSequence, RenewalLaw};
use crate::renewal::RenewalTrace;

/// Averaging with independent fair-coin rows: out_i is the mean of
/// gap i and one of its neighbors.
pub fn averaging_paper_literal(gaps: &GapSequence, rng: &mut impl Rng) -> Vec<f64> {
    let n = gaps.len();
    let g = &gaps.gaps;
    (0..n)
        .map(|i| {
            if rng.gen::<bool>() {
                0.5 * (g[i] + g[(i + 1) % n])
            } else {
                0.5 * (g[i] + g[(i + n - 1) % n])
            }
        })
        .collect()
}

/// Folding with an explicit merge trace: each trace site i sums gaps i
/// and i+1 into one output gap; every output is scaled by 3/4.
///
/// The trace must have the forward merge law and its window must cover
/// the gap indices. Sites are taken circularly; a site whose pair would
/// collide with another site across the wrap is dropped (the stationary
/// law makes this an O(1)-probability edge event on a linear window).
pub fn folding_paper_literal(
    averaged: &[f64],
    trace: &RenewalTrace,
) -> Result<GapSequence, CoreError> {
    if trace.law != RenewalLaw::Tau {
        return Err(CoreError::WrongRenewalLaw {
            expected: RenewalLaw::Tau,
            got: trace.law,
        });
    }
    let n = averaged.len();
    if trace.lo > 0 || trace.hi < n as i64 - 1 {
        return Err(CoreError::WindowTooSmall {
            lo: trace.lo,
            hi: trace.hi,
        });
    }
    let mut consumed = vec![false; n]; // second member of a merged pair
    let mut site = vec![false; n];
    for &p in &trace.points {
        if p < 0 || p >= n as i64 {
            continue;
        }
        let i = p as usize;
        let j = (i + 1) % n;
        if consumed[i] || site[j] || consumed[j] || site[i] {
            continue; // wrap collision; inter-site spacing >= 2 otherwise
        }
        site[i] = true;
        consumed[j] = true;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if consumed[i] {
            continue;
        }
        let v = if site[i] {
            averaged[i] + averaged[(i + 1) % n]
        } else {
            averaged[i]
        };
        out.push(0.75 * v);
    }
    if out.len() < 2 {
        return Err(CoreError::Degenerate);
    }
    GapSequence::new(out)
}

/// One literal step: averaging with fresh coins, folding against a
/// freshly sampled stationary merge trace.
pub fn literal_step(gaps: &GapSequence, rng: &mut impl Rng) -> Result<GapSequence, CoreError> {
    let averaged = averaging_paper_literal(gaps, rng);
    let n = gaps.len() as i64;
    let trace = crate::renewal::sample_stationary_trace(0, n - 1, RenewalLaw::Tau, rng)?;
    folding_paper_literal(&averaged, &trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{sample_gaps, GapLaw};
    use crate::rng::RngStream;

    #[test]
    fn averaging_fixes_the_lattice() {
        let gaps = GapSequence::new(vec![1.0; 32]).unwrap();
        let mut rng = RngStream::new(51, 0).rng();
        let out = averaging_paper_literal(&gaps, &mut rng);
        assert!(out.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn folding_with_empty_trace_is_pure_rescale() {
        let trace = RenewalTrace {
            lo: 0,
            hi: 2,
            points: vec![],
            law: RenewalLaw::Tau,
        };
        let out = folding_paper_literal(&[1.0, 1.0, 1.0], &trace).unwrap();
        assert_eq!(out.gaps, vec![0.75, 0.75, 0.75]);
    }

    #[test]
    fn folding_sums_pairs_at_sites() {
        let trace = RenewalTrace {
            lo: 0,
            hi: 4,
            points: vec![1],
            law: RenewalLaw::Tau,
        };
        let out = folding_paper_literal(&[1.0, 2.0, 3.0, 4.0, 5.0], &trace).unwrap();
        assert_eq!(out.gaps, vec![0.75, 0.75 * 5.0, 3.0, 0.75 * 5.0]);
    }

    #[test]
    fn folding_rejects_wrong_law() {
        let trace = RenewalTrace {
            lo: 0,
            hi: 4,
            points: vec![],
            law: RenewalLaw::Rho,
        };
        assert!(folding_paper_literal(&[1.0; 5], &trace).is_err());
    }

    #[test]
    fn folding_rejects_small_window() {
        let trace = RenewalTrace {
            lo: 0,
            hi: 2,
            points: vec![],
            law: RenewalLaw::Tau,
        };
        assert!(folding_paper_literal(&[1.0; 5], &trace).is_err());
    }

    #[test]
    fn one_step_preserves_unit_mean() {
        // each output gap is a mean-one nonnegative combination
        let n = 100_000;
        let gaps = sample_gaps(n, GapLaw::Exponential, RngStream::new(52, 0)).unwrap();
        let mut rng = RngStream::new(52, 1).rng();
        let out = literal_step(&gaps, &mut rng).unwrap();
        assert!((out.mean_gap() - 1.0).abs() < 0.01, "{}", out.mean_gap());
    }
}
