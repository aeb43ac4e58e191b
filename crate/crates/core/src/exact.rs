//! Exact expectations for the reverse weight process by exhaustive
//! enumeration of un-merge patterns, with exact rational probabilities.
//!
//! A pattern is the restriction of the stationary renewal trace to the
//! step window of the current state; its probability is the delay pmf
//! of the first point, the inter-renewal pmf of the spacings, and the
//! survival of the right margin. Enumeration doubles the leaf count per
//! window index, so this is only usable for a handful of steps — which
//! is exactly what an oracle needs.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::laws::RenewalLaw;
use crate::renewal::RenewalTrace;
use crate::reverse::{mass, reverse_step, WeightSequence};

/// All subsets of `[lo, hi]` as stationary-trace restrictions, with
/// their exact probabilities. Probabilities sum to one.
pub fn enumerate_patterns(
    lo: i64,
    hi: i64,
    law: RenewalLaw,
) -> Result<Vec<(Vec<i64>, BigRational)>, CoreError> {
    if lo > hi {
        return Err(CoreError::EmptyWindow);
    }
    let width = (hi - lo + 1) as u32;
    assert!(width <= 24, "pattern enumeration window too wide: {width}");
    let mut out = Vec::with_capacity(1usize << width);
    for bits in 0u32..(1u32 << width) {
        let points: Vec<i64> = (0..width)
            .filter(|&b| bits >> b & 1 == 1)
            .map(|b| lo + b as i64)
            .collect();
        out.push((points.clone(), pattern_probability(lo, hi, &points, law)));
    }
    Ok(out)
}

/// Exact probability that the stationary trace restricted to `[lo, hi]`
/// equals exactly `points` (sorted).
pub fn pattern_probability(lo: i64, hi: i64, points: &[i64], law: RenewalLaw) -> BigRational {
    if points.is_empty() {
        // P(delay > hi - lo)
        let mut p = BigRational::one();
        for j in 0..=(hi - lo) as u64 {
            p -= law.delay_pmf_exact(j);
        }
        return p;
    }
    let first = points[0];
    let last = *points.last().unwrap();
    let mut p = law.delay_pmf_exact((first - lo) as u64);
    for w in points.windows(2) {
        p *= law.pmf_exact((w[1] - w[0]) as u64);
    }
    p * law.survival_exact((hi - last) as u64)
}

/// Exact E[mass after `steps` reverse steps | eta0], by recursive
/// enumeration over all pattern sequences.
pub fn expected_mass_exact(eta0: &WeightSequence, steps: u32) -> Result<BigRational, CoreError> {
    if steps == 0 {
        return Ok(mass(eta0));
    }
    let (w_lo, w_hi) = eta0.step_window()?;
    let mut total = BigRational::zero();
    for (points, prob) in enumerate_patterns(w_lo, w_hi, RenewalLaw::Rho)? {
        if prob.is_zero() {
            continue;
        }
        let trace = RenewalTrace {
            lo: w_lo - 1,
            hi: w_hi + 1,
            points,
            law: RenewalLaw::Rho,
        };
        let next = reverse_step(eta0, &trace)?;
        total += prob * expected_mass_exact(&next, steps - 1)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reverse::ReverseVariant;

    #[test]
    fn pattern_probabilities_sum_to_one() {
        for law in [RenewalLaw::Rho, RenewalLaw::Tau] {
            for width in 1..=6i64 {
                let pats = enumerate_patterns(-2, -2 + width - 1, law).unwrap();
                let total: BigRational = pats.into_iter().map(|(_, p)| p).sum();
                assert_eq!(total, BigRational::one(), "{law:?} width {width}");
            }
        }
    }

    #[test]
    fn singleton_window_membership_probability() {
        // P(i in rho) = density 1/3 for the reverse law
        let pats = enumerate_patterns(0, 0, RenewalLaw::Rho).unwrap();
        let p_in = pats
            .iter()
            .find(|(pts, _)| pts == &vec![0])
            .map(|(_, p)| p.clone())
            .unwrap();
        assert_eq!(p_in, BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn tau_min_spacing_patterns_impossible() {
        // adjacent merge sites have probability zero under Tau
        let p = pattern_probability(0, 1, &[0, 1], RenewalLaw::Tau);
        assert!(p.is_zero());
        // but not under Rho
        assert!(!pattern_probability(0, 1, &[0, 1], RenewalLaw::Rho).is_zero());
    }

    #[test]
    fn one_step_mass_is_conditionally_preserved() {
        // E[M^{t+1} | eta] = M(eta) for arbitrary states
        let states = [
            WeightSequence::unit(0, ReverseVariant::Gap),
            WeightSequence {
                offset: 0,
                weights: vec![1, 2, 1],
                t: 1,
                variant: ReverseVariant::Gap,
            },
            WeightSequence {
                offset: -1,
                weights: vec![2, 3, 0, 1],
                t: 2,
                variant: ReverseVariant::Gap,
            },
            WeightSequence::unit(0, ReverseVariant::Cluster),
        ];
        for eta in &states {
            assert_eq!(expected_mass_exact(eta, 1).unwrap(), mass(eta));
        }
    }

    #[test]
    fn multi_step_expected_mass_is_one() {
        let eta = WeightSequence::unit(0, ReverseVariant::Gap);
        for steps in 0..=3 {
            assert_eq!(expected_mass_exact(&eta, steps).unwrap(), BigRational::one());
        }
    }
}
