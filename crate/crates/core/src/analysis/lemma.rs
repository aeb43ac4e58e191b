//! The pathwise one-step identity between consecutive step
//! distributions along a reverse trajectory.
//!
//! With m = ⌊(4/3)^t x⌋, ρ the trace driving step t → t+1, and
//!   α_x = (3/4) Σ_{n=0}^{m} (3/8)^t η_n (𝟙_{n∈ρ} − 1/3),
//!   x + β_x = (3/4) x + (3/4)^{t+1} |ρ ∩ [0, m]|,
//! the identity
//!   F^(t)(x) + α_x − (3/8)^{t+1} η_m = F^(t+1)(x + β_x)
//! holds exactly (rationally) for every outcome of ρ. The boundary term
//! (3/8)^{t+1} η_m accounts for index m's tuple being only partially
//! covered by the shifted cut; without it the two sides differ by
//! exactly that amount, which is reported as a diagnostic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::CoreError;
use crate::renewal::RenewalTrace;
use crate::reverse::{ReverseTrajectory, WeightSequence};

/// Max residuals of the identity for one step t → t+1.
#[derive(Debug, Clone)]
pub struct LemmaResidual {
    pub t: u32,
    pub grid_len: usize,
    /// Max relative residual of the corrected identity in f64.
    pub max_residual: f64,
    /// Max magnitude of the boundary term (the defect of the identity
    /// without the correction), relative.
    pub max_uncorrected: f64,
    /// Whether the exact rational residual was evaluated and is zero at
    /// every grid point (computed for t ≤ 4).
    pub exact_zero: Option<bool>,
}

fn require_anchored(eta: &WeightSequence) -> Result<(), CoreError> {
    if eta.offset != 0 || eta.weights.first().copied().unwrap_or(0) == 0 {
        return Err(CoreError::UnanchoredSupport);
    }
    Ok(())
}

/// Evaluate the identity for every grid point of one step.
fn check_step(
    eta: &WeightSequence,
    rho: &RenewalTrace,
    next: &WeightSequence,
    x_grid: &[f64],
    exact: bool,
) -> Result<LemmaResidual, CoreError> {
    require_anchored(eta)?;
    require_anchored(next)?;
    let t = eta.t;
    // prefix sums: pref[k] = Σ_{n<k} η_n, pref_split over n ∈ ρ
    let len = eta.weights.len();
    let mut pref = vec![0u128; len + 1];
    let mut pref_split = vec![0u128; len + 1];
    for (n, &w) in eta.weights.iter().enumerate() {
        pref[n + 1] = pref[n] + w as u128;
        pref_split[n + 1] = pref_split[n] + if rho.contains(n as i64) { w as u128 } else { 0 };
    }
    let mut next_pref = vec![0u128; next.weights.len() + 1];
    for (k, &w) in next.weights.iter().enumerate() {
        next_pref[k + 1] = next_pref[k] + w as u128;
    }
    let unit_t = 0.375f64.powi(t as i32);
    let unit_t1 = 0.375f64.powi(t as i32 + 1);
    let total_next = unit_t1 * *next_pref.last().unwrap() as f64;
    let pow43 = (4.0f64 / 3.0).powi(t as i32);

    let mut max_residual = 0.0f64;
    let mut max_uncorrected = 0.0f64;
    let mut exact_zero = exact.then_some(true);
    for &x in x_grid {
        let m = (pow43 * x).floor() as i64;
        if m < 0 {
            continue;
        }
        let cut = ((m as usize) + 1).min(len); // prefix end for index m
        let a = pref_split[cut]; // split-site weight ≤ m
        let b = pref[cut] - a; // off-site weight ≤ m
        let eta_m = if (m as usize) < len {
            eta.weights[m as usize] as u128
        } else {
            0
        };
        let count = rho.count_in(0, m.min(rho.hi)) as i64;
        let m1 = m + count;
        let cut1 = ((m1 as usize) + 1).min(next.weights.len());

        // float evaluation
        let f_t = unit_t * pref[cut] as f64;
        let alpha = 0.75 * unit_t * (2.0 * a as f64 - b as f64) / 3.0;
        let boundary = unit_t1 * eta_m as f64;
        let f_t1 = unit_t1 * next_pref[cut1] as f64;
        let residual = (f_t + alpha - boundary - f_t1).abs() / total_next.max(1.0);
        max_residual = max_residual.max(residual);
        max_uncorrected = max_uncorrected.max(boundary / total_next.max(1.0));

        if exact {
            // exact rational evaluation of the same quantities
            let p8t = BigInt::from(8u8).pow(t);
            let p3t = BigInt::from(3u8).pow(t);
            let f_t = BigRational::new(&p3t * BigInt::from(pref[cut]), p8t.clone());
            let alpha = BigRational::new(
                &p3t * (BigInt::from(2u8) * BigInt::from(a) - BigInt::from(b)),
                BigInt::from(4u8) * &p8t,
            );
            let boundary = BigRational::new(
                &p3t * BigInt::from(3u8) * BigInt::from(eta_m),
                BigInt::from(8u8) * &p8t,
            );
            let f_t1 = BigRational::new(
                &p3t * BigInt::from(3u8) * BigInt::from(next_pref[cut1]),
                BigInt::from(8u8) * &p8t,
            );
            if !(f_t + alpha - boundary - f_t1).is_zero() {
                exact_zero = Some(false);
            }
        }
    }
    Ok(LemmaResidual {
        t,
        grid_len: x_grid.len(),
        max_residual,
        max_uncorrected,
        exact_zero,
    })
}

/// Check the identity at every step of a recorded trajectory.
///
/// Exact rational evaluation is performed for t ≤ `exact_up_to`; all
/// steps are also evaluated in floating point.
pub fn lemma_identity_check(
    traj: &ReverseTrajectory,
    x_grid: &[f64],
    exact_up_to: u32,
) -> Result<Vec<LemmaResidual>, CoreError> {
    if traj.traces.len() + 1 != traj.states.len() {
        return Err(CoreError::MissingTrace(traj.traces.len() as u32));
    }
    (0..traj.traces.len())
        .map(|s| {
            check_step(
                &traj.states[s],
                &traj.traces[s],
                &traj.states[s + 1],
                x_grid,
                traj.states[s].t <= exact_up_to,
            )
        })
        .collect()
}

/// Evenly spaced grid over [0, hi] with `len` points.
pub fn linear_grid(hi: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| hi * i as f64 / (len - 1).max(1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::RenewalLaw;
    use crate::reverse::{run_reverse, ReverseVariant};
    use crate::rng::RngStream;

    fn rho_with(points: Vec<i64>) -> RenewalTrace {
        RenewalTrace {
            lo: -2,
            hi: 8,
            points,
            law: RenewalLaw::Rho,
        }
    }

    fn check_pair(
        eta: &WeightSequence,
        rho: &RenewalTrace,
        grid: &[f64],
    ) -> LemmaResidual {
        let next = crate::reverse::reverse_step(eta, rho).unwrap();
        check_step(eta, rho, &next, grid, true).unwrap()
    }

    #[test]
    fn unit_seed_both_outcomes_exact() {
        let eta = WeightSequence::unit(0, ReverseVariant::Gap);
        for rho in [rho_with(vec![]), rho_with(vec![0])] {
            let r = check_pair(&eta, &rho, &[0.0]);
            assert_eq!(r.exact_zero, Some(true));
            assert!(r.max_residual < 1e-15);
        }
    }

    #[test]
    fn boundary_term_is_nonzero_at_the_origin() {
        // without the correction the two sides differ by (3/8) η_0 at x=0
        let eta = WeightSequence::unit(0, ReverseVariant::Gap);
        let r = check_pair(&eta, &rho_with(vec![0]), &[0.0]);
        assert!((r.max_uncorrected * 1.5 - 0.375).abs() < 1e-12);
    }

    #[test]
    fn hand_state_is_exact_on_a_grid() {
        let eta = WeightSequence {
            offset: 0,
            weights: vec![1, 2, 1],
            t: 1,
            variant: ReverseVariant::Gap,
        };
        let grid = linear_grid(2.0, 101);
        for rho in [
            rho_with(vec![]),
            rho_with(vec![1]),
            rho_with(vec![0, 2]),
            rho_with(vec![0, 1, 2]),
        ] {
            let r = check_pair(&eta, &rho, &grid);
            assert_eq!(r.exact_zero, Some(true), "rho {:?}", rho.points);
            assert!(r.max_residual < 1e-14);
        }
    }

    #[test]
    fn beyond_support_saturates() {
        let eta = WeightSequence {
            offset: 0,
            weights: vec![1, 2, 1],
            t: 1,
            variant: ReverseVariant::Gap,
        };
        let r = check_pair(&eta, &rho_with(vec![1]), &[5.0, 100.0]);
        assert_eq!(r.exact_zero, Some(true));
        assert_eq!(r.max_uncorrected, 0.0);
    }

    #[test]
    fn trajectory_check_is_exact_through_t4() {
        for rep in 0..20 {
            let traj = run_reverse(
                WeightSequence::unit(0, ReverseVariant::Gap),
                5,
                RngStream::new(91, rep),
            )
            .unwrap();
            let grid = linear_grid(3.0, 64);
            let rows = lemma_identity_check(&traj, &grid, 4).unwrap();
            for row in rows {
                assert_eq!(row.exact_zero, Some(true), "t={}", row.t);
                assert!(row.max_residual <= 1e-12, "t={} r={}", row.t, row.max_residual);
            }
        }
    }

    #[test]
    fn float_residual_small_through_t12() {
        let traj = run_reverse(
            WeightSequence::unit(0, ReverseVariant::Gap),
            12,
            RngStream::new(92, 0),
        )
        .unwrap();
        let grid = linear_grid(4.0, 200);
        let rows = lemma_identity_check(&traj, &grid, 0).unwrap();
        for row in rows {
            assert!(row.max_residual <= 1e-9, "t={} r={}", row.t, row.max_residual);
        }
    }

    #[test]
    fn unanchored_state_rejected() {
        let eta = WeightSequence::unit(2, ReverseVariant::Gap);
        let rho = rho_with(vec![]);
        let next = crate::reverse::reverse_step(&eta, &rho).unwrap();
        assert!(check_step(&eta, &rho, &next, &[0.0], false).is_err());
    }
}
