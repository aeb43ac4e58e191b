//! The forward/reverse duality check: the expected pairing of an
//! initial weight sequence with the time-t gap sequence equals the
//! expected pairing of the time-t scaled weights with a fresh initial
//! gap sequence.

use rand::Rng;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::forward::{run_forward, Algorithm, ForwardState, IntensityMode};
use crate::laws::{sample_gaps, GapLaw, GapSequence};
use crate::reverse::{run_reverse, WeightSequence};
use crate::rng::RngStream;

/// Monte Carlo estimates of both sides of the duality identity.
#[derive(Debug, Clone)]
pub struct DualityReport {
    pub t: u32,
    pub eta0_support: Vec<i64>,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub replicas: usize,
}

impl DualityReport {
    pub fn pooled_se(&self) -> f64 {
        (self.lhs_se.powi(2) + self.rhs_se.powi(2)).sqrt()
    }

    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Σ_i (3/8)^t η_i Γ_{anchor+i}, indices taken circularly around the
/// anchored gap sequence.
pub fn inner_product(
    eta: &WeightSequence,
    gaps: &GapSequence,
    anchor: usize,
) -> Result<f64, CoreError> {
    let n = gaps.len();
    if eta.weights.len() > n {
        return Err(CoreError::SupportExceedsGaps {
            support: eta.weights.len(),
            gaps: n,
        });
    }
    let unit = 0.375f64.powi(eta.t as i32);
    let mut total = 0.0;
    for (k, &w) in eta.weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let i = eta.offset + k as i64;
        let idx = (anchor as i64 + i).rem_euclid(n as i64) as usize;
        total += unit * w as f64 * gaps.gaps[idx];
    }
    Ok(total)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimate both sides of the duality identity.
///
/// LHS: forward runs of the gap dynamics (fair coins, 3/4 rescale) from
/// `law`-distributed gaps, paired against `eta0` anchored at a
/// uniformly chosen point of the evolved configuration — the typical
/// (Palm) point. Tracking the survivor of a fixed initial point would
/// pick clusters size-biased by multiplicity and overestimate the
/// anchored gaps. RHS: reverse runs from `eta0`, each paired against a
/// fresh initial draw. At t = 0 both sides are evaluated on shared
/// samples with anchor 0, so the estimates agree exactly.
pub fn duality_check(
    eta0: &WeightSequence,
    law: GapLaw,
    t: u32,
    n_points: usize,
    replicas: usize,
    stream: RngStream,
) -> Result<DualityReport, CoreError> {
    let lhs_samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let s = stream.substream(1).substream(r as u64);
            let gaps = sample_gaps(n_points, law, s.substream(0))?;
            let traj = run_forward(
                ForwardState::new(gaps),
                t,
                Algorithm::Alg1,
                IntensityMode::Theoretical,
                s.substream(1),
                false,
            )?;
            let fin = traj.final_state();
            let anchor = if t == 0 {
                fin.anchor
            } else {
                s.substream(3).rng().gen_range(0..fin.gaps.len())
            };
            let mut eta_t0 = eta0.clone();
            eta_t0.t = 0; // LHS pairs the unscaled initial weights
            inner_product(&eta_t0, &fin.gaps, anchor)
        })
        .collect::<Result<_, _>>()?;
    let rhs_samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            // at t = 0 reuse the LHS gap stream so the samples coincide
            let s = if t == 0 {
                stream.substream(1).substream(r as u64)
            } else {
                stream.substream(2).substream(r as u64)
            };
            let gaps = sample_gaps(n_points, law, s.substream(0))?;
            let traj = run_reverse(eta0.clone(), t, s.substream(2))?;
            inner_product(traj.final_state(), &gaps, 0)
        })
        .collect::<Result<_, _>>()?;
    let (lhs, lhs_se) = mean_and_se(&lhs_samples);
    let (rhs, rhs_se) = mean_and_se(&rhs_samples);
    let support = eta0
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(k, _)| eta0.offset + k as i64)
        .collect();
    Ok(DualityReport {
        t,
        eta0_support: support,
        lhs,
        lhs_se,
        rhs,
        rhs_se,
        replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reverse::ReverseVariant;

    fn seed(indices: &[i64]) -> WeightSequence {
        WeightSequence::from_support(indices, ReverseVariant::Gap).unwrap()
    }

    #[test]
    fn inner_product_unit_seed_picks_anchor_gap() {
        let gaps = GapSequence::new(vec![0.5, 1.5, 2.5]).unwrap();
        let eta = seed(&[0]);
        assert_eq!(inner_product(&eta, &gaps, 1).unwrap(), 1.5);
    }

    #[test]
    fn inner_product_reproduces_mass_on_unit_gaps() {
        // (1,2,1) at t=1 on unit gaps: (3/8)(1+2+1) = 3/2
        let eta = WeightSequence {
            offset: 0,
            weights: vec![1, 2, 1],
            t: 1,
            variant: ReverseVariant::Gap,
        };
        let gaps = GapSequence::new(vec![1.0; 8]).unwrap();
        assert_eq!(inner_product(&eta, &gaps, 0).unwrap(), 1.5);
    }

    #[test]
    fn inner_product_is_linear_in_gaps() {
        let eta = WeightSequence {
            offset: -1,
            weights: vec![2, 0, 5],
            t: 2,
            variant: ReverseVariant::Gap,
        };
        let gaps = GapSequence::new(vec![0.3, 0.9, 2.1, 0.7]).unwrap();
        let scaled =
            GapSequence::new(gaps.gaps.iter().map(|g| g * 3.0).collect()).unwrap();
        let a = inner_product(&eta, &gaps, 2).unwrap();
        let b = inner_product(&eta, &scaled, 2).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn inner_product_rejects_wide_support() {
        let eta = WeightSequence {
            offset: 0,
            weights: vec![1; 9],
            t: 0,
            variant: ReverseVariant::Gap,
        };
        let gaps = GapSequence::new(vec![1.0; 4]).unwrap();
        assert!(inner_product(&eta, &gaps, 0).is_err());
    }

    #[test]
    fn t_zero_sides_agree_exactly() {
        let report = duality_check(
            &seed(&[0, 1]),
            GapLaw::Exponential,
            0,
            64,
            200,
            RngStream::new(81, 0),
        )
        .unwrap();
        assert_eq!(report.lhs, report.rhs);
        // both sides estimate E[G_0 + G_1] = 2
        assert!((report.lhs - 2.0).abs() < 8.0 * report.lhs_se);
    }

    #[test]
    fn unit_seed_duality_holds() {
        // exact value 1 on both sides
        let report = duality_check(
            &seed(&[0]),
            GapLaw::Exponential,
            2,
            512,
            2000,
            RngStream::new(82, 0),
        )
        .unwrap();
        assert!((report.lhs - 1.0).abs() <= 4.0 * report.lhs_se, "{report:?}");
        assert!((report.rhs - 1.0).abs() <= 4.0 * report.rhs_se, "{report:?}");
        assert!(report.discrepancy() <= 4.0 * report.pooled_se(), "{report:?}");
    }

    #[test]
    fn two_seed_duality_holds() {
        let report = duality_check(
            &seed(&[0, 3]),
            GapLaw::Exponential,
            1,
            512,
            2000,
            RngStream::new(83, 0),
        )
        .unwrap();
        assert!(report.discrepancy() <= 4.0 * report.pooled_se(), "{report:?}");
    }
}
