//! The exact integer-valued time-reversed weight process, its
//! cluster-size variant, the scaled mass martingale, and the step
//! distribution with its Laplace transform.
//!
//! Weights stay exact integers; masses are exact rationals with
//! denominator a power of 8, so the martingale identities can be tested
//! with equality rather than tolerances.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::laws::{rational_to_f64, RenewalLaw};
use crate::renewal::{sample_stationary_trace, RenewalTrace};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReverseVariant {
    /// Un-merge tuple (w, 2w, w): weights measure initial gaps.
    Gap,
    /// Un-merge tuple (0, 2w, 2w): weights measure cluster sizes.
    Cluster,
}

/// Nonnegative integer weights with a scale exponent.
///
/// `weights[k]` is the weight at absolute index `offset + k`. Index 0
/// tracks the designated anchor across steps. When started from a unit
/// weight at 0, the support stays within [-2^t, 2^t] and every weight
/// is at most 2^t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSequence {
    pub offset: i64,
    pub weights: Vec<u64>,
    pub t: u32,
    pub variant: ReverseVariant,
}

impl WeightSequence {
    /// A single unit weight at absolute index `i`.
    pub fn unit(i: i64, variant: ReverseVariant) -> Self {
        Self {
            offset: i,
            weights: vec![1],
            t: 0,
            variant,
        }
    }

    /// Unit weights at the given (distinct) absolute indices.
    pub fn from_support(indices: &[i64], variant: ReverseVariant) -> Result<Self, CoreError> {
        if indices.is_empty() {
            return Err(CoreError::AllZeroWeights);
        }
        let lo = *indices.iter().min().unwrap();
        let hi = *indices.iter().max().unwrap();
        let mut weights = vec![0u64; (hi - lo + 1) as usize];
        for &i in indices {
            weights[(i - lo) as usize] += 1;
        }
        Ok(Self {
            offset: lo,
            weights,
            t: 0,
            variant,
        })
    }

    pub fn get(&self, i: i64) -> u64 {
        if i < self.offset || i >= self.offset + self.weights.len() as i64 {
            0
        } else {
            self.weights[(i - self.offset) as usize]
        }
    }

    pub fn total_weight(&self) -> u128 {
        self.weights.iter().map(|&w| w as u128).sum()
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.weights.iter().map(|&w| (w as u128) * (w as u128)).sum()
    }

    /// Absolute index range of the nonzero entries, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.weights.iter().position(|&w| w > 0)?;
        let last = self.weights.iter().rposition(|&w| w > 0).unwrap();
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// Window of indices whose tuple expansion matters for a step: the
    /// support, extended to include index 0 (zero-weight indices
    /// between the anchor and the support still shift the indexing).
    pub fn step_window(&self) -> Result<(i64, i64), CoreError> {
        let (lo, hi) = self.support().ok_or(CoreError::AllZeroWeights)?;
        Ok((lo.min(0), hi.max(0)))
    }
}

/// One reverse step driven by the un-merge sites of `rho`.
///
/// Each index expands to a tuple — (w, w) off-trace, (w, 2w, w) on it
/// for the gap variant, (0, 2w, 2w) for the cluster variant — and
/// adjacent tuple ends are summed. The output is re-indexed so the sum
/// of tuple 0's left-most element and tuple -1's right-most element
/// sits at index 0.
pub fn reverse_step(
    eta: &WeightSequence,
    rho: &RenewalTrace,
) -> Result<WeightSequence, CoreError> {
    if rho.law != RenewalLaw::Rho {
        return Err(CoreError::WrongRenewalLaw {
            expected: RenewalLaw::Rho,
            got: rho.law,
        });
    }
    let (w_lo, w_hi) = eta.step_window()?;
    if rho.lo > w_lo - 1 || rho.hi < w_hi + 1 {
        return Err(CoreError::WindowTooSmall {
            lo: rho.lo,
            hi: rho.hi,
        });
    }
    let mut vals: Vec<u64> = Vec::with_capacity(2 * eta.weights.len() + 4);
    let mut offset_of_first = 0i64; // new absolute index of vals[0]
    for i in w_lo..=w_hi {
        let w = eta.get(i);
        let split = rho.contains(i);
        let tuple: [u64; 3] = match (eta.variant, split) {
            (_, false) => [w, w, 0],
            (ReverseVariant::Gap, true) => [w, 2 * w, w],
            (ReverseVariant::Cluster, true) => [0, 2 * w, 2 * w],
        };
        let len = if split { 3 } else { 2 };
        if vals.is_empty() {
            vals.extend_from_slice(&tuple[..len]);
        } else {
            *vals.last_mut().unwrap() += tuple[0];
            vals.extend_from_slice(&tuple[1..len]);
        }
        if i < 0 {
            // elements contributed left of the new index 0
            offset_of_first -= (len - 1) as i64;
        }
    }
    let mut out = WeightSequence {
        offset: offset_of_first,
        weights: vals,
        t: eta.t + 1,
        variant: eta.variant,
    };
    shrink_storage(&mut out);
    Ok(out)
}

/// Drop stored zeros outside [support ∪ {0}].
fn shrink_storage(eta: &mut WeightSequence) {
    let Some((lo, hi)) = eta.support() else {
        return;
    };
    let keep_lo = lo.min(0);
    let keep_hi = hi.max(0);
    let start = (keep_lo - eta.offset) as usize;
    let end = (keep_hi - eta.offset + 1) as usize;
    eta.weights.drain(end..);
    eta.weights.drain(..start);
    eta.offset = keep_lo;
}

/// Scaled mass M = (3/8)^t * total weight, exact.
pub fn mass(eta: &WeightSequence) -> BigRational {
    scaled(eta.t, eta.total_weight())
}

/// Exact (3/8)^t * v.
fn scaled(t: u32, v: u128) -> BigRational {
    BigRational::new(
        BigInt::from(3u8).pow(t) * BigInt::from(v),
        BigInt::from(8u8).pow(t),
    )
}

/// Exact (3/8)^{2t} * sum of squared weights.
pub fn scaled_sum_sq(eta: &WeightSequence) -> BigRational {
    BigRational::new(
        BigInt::from(9u8).pow(eta.t) * BigInt::from(eta.sum_of_squares()),
        BigInt::from(64u8).pow(eta.t),
    )
}

/// Per-step exact bookkeeping of the mass martingale.
#[derive(Debug, Clone)]
pub struct LedgerRow {
    pub t: u32,
    pub total_weight: u128,
    pub m: BigRational,
    pub increment: BigRational,
    pub sum_sq: BigRational,
}

/// A recorded reverse run: states, the traces that drove each step
/// (kept for replay), and the mass ledger.
#[derive(Debug, Clone)]
pub struct ReverseTrajectory {
    pub states: Vec<WeightSequence>,
    pub traces: Vec<RenewalTrace>,
    pub ledger: Vec<LedgerRow>,
}

impl ReverseTrajectory {
    pub fn final_state(&self) -> &WeightSequence {
        self.states.last().unwrap()
    }
}

/// Run `steps` reverse steps with freshly sampled stationary traces.
///
/// Asserts the supremum bound (max weight <= 2^t) and the second-moment
/// bound (sum of squared weights <= 2^t * total weight, the integer
/// form of sum_sq <= (3/4)^t M) on every step.
pub fn run_reverse(
    eta0: WeightSequence,
    steps: u32,
    stream: RngStream,
) -> Result<ReverseTrajectory, CoreError> {
    let mut rng = stream.rng();
    let mut ledger = vec![ledger_row(&eta0, None)];
    let mut states = vec![eta0];
    let mut traces = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let eta = states.last().unwrap();
        let (w_lo, w_hi) = eta.step_window()?;
        // one index of slack plus one inter-renewal draw of margin
        let trace = sample_stationary_trace(w_lo - 2, w_hi + 2, RenewalLaw::Rho, &mut rng)?;
        let next = reverse_step(eta, &trace)?;
        // both bounds are specific to the gap-variant tuples: cluster
        // tuples can overlap-sum to 2w + w' and exceed 2^t
        if next.variant == ReverseVariant::Gap {
            assert!(
                next.max_weight() as u128 <= 1u128 << next.t,
                "supremum bound violated at t={}",
                next.t
            );
            assert!(
                next.sum_of_squares() <= (1u128 << next.t) * next.total_weight(),
                "second-moment bound violated at t={}",
                next.t
            );
        }
        ledger.push(ledger_row(&next, Some(ledger.last().unwrap())));
        traces.push(trace);
        states.push(next);
    }
    Ok(ReverseTrajectory {
        states,
        traces,
        ledger,
    })
}

fn ledger_row(eta: &WeightSequence, prev: Option<&LedgerRow>) -> LedgerRow {
    let m = mass(eta);
    let increment = match prev {
        Some(p) => &m - &p.m,
        None => BigRational::zero(),
    };
    LedgerRow {
        t: eta.t,
        total_weight: eta.total_weight(),
        m,
        increment,
        sum_sq: scaled_sum_sq(eta),
    }
}

/// Re-index from 0 at the first nonzero weight; trailing zeros dropped.
pub fn trim(eta: &WeightSequence) -> Result<WeightSequence, CoreError> {
    let (lo, hi) = eta.support().ok_or(CoreError::AllZeroWeights)?;
    let start = (lo - eta.offset) as usize;
    let end = (hi - eta.offset + 1) as usize;
    Ok(WeightSequence {
        offset: 0,
        weights: eta.weights[start..end].to_vec(),
        t: eta.t,
        variant: eta.variant,
    })
}

/// The step distribution built from trimmed weights: mass
/// (3/8)^t * w_i at support point (3/4)^t * i.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    pub t: u32,
    pub weights: Vec<u64>,
}

impl StepDistribution {
    pub fn support_point(&self, i: usize) -> f64 {
        0.75f64.powi(self.t as i32) * i as f64
    }

    pub fn mass_exact(&self, i: usize) -> BigRational {
        scaled(self.t, self.weights.get(i).copied().unwrap_or(0) as u128)
    }

    pub fn total_mass(&self) -> BigRational {
        scaled(self.t, self.weights.iter().map(|&w| w as u128).sum())
    }

    /// Index cut for the cumulative at x: floor((4/3)^t x).
    pub fn cut_index(&self, x: f64) -> i64 {
        ((4.0f64 / 3.0).powi(self.t as i32) * x).floor() as i64
    }

    /// Exact prefix mass through index m (inclusive).
    pub fn cumulative_at_index(&self, m: i64) -> BigRational {
        if m < 0 {
            return BigRational::zero();
        }
        let end = (m as usize + 1).min(self.weights.len());
        scaled(self.t, self.weights[..end].iter().map(|&w| w as u128).sum())
    }

    /// Cumulative function F(x).
    pub fn cumulative(&self, x: f64) -> f64 {
        rational_to_f64(&self.cumulative_at_index(self.cut_index(x)))
    }

    /// Largest support point carrying mass.
    pub fn support_length(&self) -> f64 {
        self.support_point(self.weights.len().saturating_sub(1))
    }
}

/// Build the step distribution of a trimmed weight sequence.
pub fn step_distribution(eta: &WeightSequence) -> Result<StepDistribution, CoreError> {
    if eta.offset != 0 || eta.weights.first().copied().unwrap_or(0) == 0 {
        // accept already-trimmed input only
        let trimmed = trim(eta)?;
        return Ok(StepDistribution {
            t: trimmed.t,
            weights: trimmed.weights,
        });
    }
    Ok(StepDistribution {
        t: eta.t,
        weights: eta.weights.clone(),
    })
}

/// Laplace transform of the step distribution at s >= 0.
pub fn laplace_transform(dist: &StepDistribution, s: f64) -> f64 {
    let unit = 0.375f64.powi(dist.t as i32);
    dist.weights
        .iter()
        .enumerate()
        .map(|(i, &w)| unit * w as f64 * (-s * dist.support_point(i)).exp())
        .sum()
}
