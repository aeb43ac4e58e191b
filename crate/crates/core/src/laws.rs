//! Distribution laws: unit-mean gap laws for initial configurations and
//! the two integer renewal laws driving merges (forward) and un-merges
//! (reverse).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::rng::RngStream;

/// Initial gap laws. Each has unit mean and finite variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapLaw {
    /// Exp(1).
    Exponential,
    /// Unif(0, 2).
    Uniform02,
    /// Point mass at 1 (the integer lattice).
    Deterministic,
    /// Gamma(shape, scale = 1/shape), unit mean.
    Gamma { shape: f64 },
}

impl GapLaw {
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            GapLaw::Exponential => Exp::new(1.0).unwrap().sample(rng),
            GapLaw::Uniform02 => Uniform::new(0.0, 2.0).sample(rng),
            GapLaw::Deterministic => 1.0,
            GapLaw::Gamma { shape } => Gamma::new(*shape, 1.0 / shape).unwrap().sample(rng),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            GapLaw::Exponential => 1.0,
            GapLaw::Uniform02 => 1.0 / 3.0,
            GapLaw::Deterministic => 0.0,
            GapLaw::Gamma { shape } => 1.0 / shape,
        }
    }
}

/// Integer renewal laws on {1, 2, ...}.
///
/// `Tau` is the law of forward inter-merge distances, the sum of two
/// independent Geom(1/2) variables on {1,2,...}; its minimum is 2 and
/// its mean is 4. `Rho` is the reverse un-merge law, Geom + Geom - 1,
/// with minimum 1 and mean 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewalLaw {
    Tau,
    Rho,
}

impl RenewalLaw {
    pub fn mean(&self) -> u64 {
        match self {
            RenewalLaw::Tau => 4,
            RenewalLaw::Rho => 3,
        }
    }

    pub fn min_value(&self) -> u64 {
        match self {
            RenewalLaw::Tau => 2,
            RenewalLaw::Rho => 1,
        }
    }

    /// P(X = k). Tau: (k-1) 2^{-k} for k >= 2; Rho: k 2^{-(k+1)} for k >= 1.
    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.min_value() {
            return 0.0;
        }
        match self {
            RenewalLaw::Tau => (k - 1) as f64 * 0.5f64.powi(k as i32),
            RenewalLaw::Rho => k as f64 * 0.5f64.powi(k as i32 + 1),
        }
    }

    /// Exact P(X = k) as a rational.
    pub fn pmf_exact(&self, k: u64) -> BigRational {
        if k < self.min_value() {
            return BigRational::zero();
        }
        let (num, exp) = match self {
            RenewalLaw::Tau => (k - 1, k),
            RenewalLaw::Rho => (k, k + 1),
        };
        BigRational::new(BigInt::from(num), BigInt::from(2u8).pow(exp as u32))
    }

    /// P(X > j), exact. Tail of the shifted negative-binomial pmf.
    pub fn survival_exact(&self, j: u64) -> BigRational {
        let mut s = BigRational::zero();
        for k in self.min_value()..=j {
            s += self.pmf_exact(k);
        }
        BigRational::one() - s
    }

    pub fn survival(&self, j: u64) -> f64 {
        rational_to_f64(&self.survival_exact(j))
    }

    /// Stationary delay pmf: P(D = j) = P(X > j) / E X, j >= 0.
    pub fn delay_pmf_exact(&self, j: u64) -> BigRational {
        self.survival_exact(j) / BigRational::from(BigInt::from(self.mean()))
    }

    /// One inter-renewal draw.
    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let g1 = sample_geometric_half(rng);
        let g2 = sample_geometric_half(rng);
        match self {
            RenewalLaw::Tau => g1 + g2,
            RenewalLaw::Rho => g1 + g2 - 1,
        }
    }

    /// One stationary delay draw, by inversion of the delay pmf.
    pub fn sample_delay(&self, rng: &mut impl Rng) -> u64 {
        let u: f64 = rng.gen();
        let mean = self.mean() as f64;
        let mut acc = 0.0;
        let mut surv = 1.0; // P(X > j), updated incrementally
        let mut j = 0u64;
        loop {
            acc += surv / mean;
            if u < acc || surv < 1e-15 {
                return j;
            }
            surv -= self.pmf(j + 1);
            j += 1;
        }
    }
}

/// Geom(1/2) on {1, 2, ...}: number of fair coin flips up to and
/// including the first heads.
fn sample_geometric_half(rng: &mut impl Rng) -> u64 {
    let mut g = 1u64;
    while rng.gen::<bool>() {
        g += 1;
    }
    g
}

/// Circular sequence of positive gaps; the forward state.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSequence {
    pub gaps: Vec<f64>,
}

impl GapSequence {
    pub fn new(gaps: Vec<f64>) -> Result<Self, CoreError> {
        if gaps.len() < 2 {
            return Err(CoreError::TooFewGaps(gaps.len()));
        }
        if gaps.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(CoreError::NonPositiveGap);
        }
        Ok(Self { gaps })
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.gaps.iter().sum()
    }

    pub fn mean_gap(&self) -> f64 {
        self.total_length() / self.len() as f64
    }
}

/// `n` independent draws from `law` arranged on a circle.
pub fn sample_gaps(n: usize, law: GapLaw, stream: RngStream) -> Result<GapSequence, CoreError> {
    if n < 2 {
        return Err(CoreError::TooFewGaps(n));
    }
    let mut rng = stream.rng();
    GapSequence::new((0..n).map(|_| law.sample(&mut rng)).collect())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    // Oracle: pmf of G1 + G2 (and the shifted Rho variant) by direct
    // enumeration of the two geometric factors.
    fn convolution_pmf(law: RenewalLaw, k: u64) -> f64 {
        let shift = if law == RenewalLaw::Rho { 1 } else { 0 };
        let target = k + shift;
        let mut p = 0.0;
        for g1 in 1..target {
            let g2 = target - g1;
            p += 0.5f64.powi(g1 as i32) * 0.5f64.powi(g2 as i32);
        }
        p
    }

    #[test]
    fn pmf_matches_convolution_oracle() {
        for law in [RenewalLaw::Tau, RenewalLaw::Rho] {
            for k in 1..=30 {
                assert!((law.pmf(k) - convolution_pmf(law, k)).abs() < 1e-15, "{law:?} k={k}");
            }
        }
    }

    #[test]
    fn rho_small_values() {
        // P(R=1) = 1/4, P(R=2) = 1/4, P(R=3) = 3/16
        assert_eq!(RenewalLaw::Rho.pmf_exact(1), BigRational::new(1.into(), 4.into()));
        assert_eq!(RenewalLaw::Rho.pmf_exact(2), BigRational::new(1.into(), 4.into()));
        assert_eq!(RenewalLaw::Rho.pmf_exact(3), BigRational::new(3.into(), 16.into()));
    }

    #[test]
    fn rho_pmf_tail_is_analytic() {
        // remainder after K terms is < 2^{-K/2} * K for K >= 60
        for kmax in [60u64, 80, 100] {
            let mut s = BigRational::zero();
            for k in 1..=kmax {
                s += RenewalLaw::Rho.pmf_exact(k);
            }
            let rem = (BigRational::one() - s).to_f64().unwrap();
            assert!(rem > 0.0);
            assert!(rem < 0.5f64.powf(kmax as f64 / 2.0) * kmax as f64);
        }
    }

    #[test]
    fn rho_empirical_mean() {
        let mut rng = RngStream::new(11, 0).rng();
        let n = 1_000_000u64;
        let sum: u64 = (0..n).map(|_| RenewalLaw::Rho.sample(&mut rng)).sum();
        let mean = sum as f64 / n as f64;
        assert!((mean - 3.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn tau_minimum_is_two() {
        let mut rng = RngStream::new(12, 0).rng();
        assert!((0..100_000).all(|_| RenewalLaw::Tau.sample(&mut rng) >= 2));
    }

    #[test]
    fn rho_chi_square_fit() {
        // chi-square goodness of fit of 1e6 draws at significance 1e-3
        let mut rng = RngStream::new(13, 0).rng();
        let n = 1_000_000usize;
        const KMAX: usize = 20; // pool the tail
        let mut counts = [0u64; KMAX + 1];
        for _ in 0..n {
            let k = RenewalLaw::Rho.sample(&mut rng) as usize;
            counts[k.min(KMAX)] += 1;
        }
        let mut stat = 0.0;
        for k in 1..=KMAX {
            let p = if k < KMAX {
                RenewalLaw::Rho.pmf(k as u64)
            } else {
                RenewalLaw::Rho.survival(KMAX as u64 - 1)
            };
            let expect = p * n as f64;
            stat += (counts[k] as f64 - expect).powi(2) / expect;
        }
        let crit = statrs::distribution::ChiSquared::new((KMAX - 1) as f64)
            .unwrap()
            .inverse_cdf_upper(1e-3);
        assert!(stat < crit, "chi2 {stat} >= {crit}");
    }

    #[test]
    fn stationary_delay_formula() {
        // P(delay = 0) = P(R > 0)/3 = 1/3 for Rho
        assert_eq!(RenewalLaw::Rho.delay_pmf_exact(0), BigRational::new(1.into(), 3.into()));
        // Tau: P(delay = 0) = P(delay = 1) = 1/4
        assert_eq!(RenewalLaw::Tau.delay_pmf_exact(0), BigRational::new(1.into(), 4.into()));
        assert_eq!(RenewalLaw::Tau.delay_pmf_exact(1), BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn deterministic_gaps() {
        let g = sample_gaps(4, GapLaw::Deterministic, RngStream::new(0, 0)).unwrap();
        assert_eq!(g.gaps, vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn exponential_mean_lln() {
        let n = 100_000;
        let g = sample_gaps(n, GapLaw::Exponential, RngStream::new(5, 0)).unwrap();
        assert!((g.mean_gap() - 1.0).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn uniform_variance() {
        let n = 100_000;
        let g = sample_gaps(n, GapLaw::Uniform02, RngStream::new(6, 0)).unwrap();
        let m = g.mean_gap();
        let var = g.gaps.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0 / 3.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gamma_unit_mean() {
        let n = 100_000;
        let g = sample_gaps(n, GapLaw::Gamma { shape: 2.0 }, RngStream::new(7, 0)).unwrap();
        assert!((g.mean_gap() - 1.0).abs() < 4.0 * (0.5f64 / n as f64).sqrt());
    }

    #[test]
    fn rejects_tiny_n() {
        assert!(sample_gaps(1, GapLaw::Exponential, RngStream::new(0, 0)).is_err());
    }
}

#[cfg(test)]
trait InverseCdfUpper {
    fn inverse_cdf_upper(&self, alpha: f64) -> f64;
}

#[cfg(test)]
impl InverseCdfUpper for statrs::distribution::ChiSquared {
    fn inverse_cdf_upper(&self, alpha: f64) -> f64 {
        use statrs::distribution::ContinuousCDF;
        self.inverse_cdf(1.0 - alpha)
    }
}
