//! Empirical distributions, Kolmogorov-Smirnov distances, and the
//! energy distance for two-dimensional marginals.

use crate::error::CoreError;

/// A one-dimensional empirical distribution: sorted values, optional
/// normalized weights.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    pub values: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl EmpiricalDistribution {
    pub fn from_samples(mut values: Vec<f64>) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonPositiveGap);
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self {
            values,
            weights: None,
        })
    }

    pub fn from_weighted(
        mut pairs: Vec<(f64, f64)>,
    ) -> Result<Self, CoreError> {
        if pairs.is_empty() {
            return Err(CoreError::EmptySample);
        }
        if pairs.iter().any(|(v, w)| !v.is_finite() || !(*w >= 0.0)) {
            return Err(CoreError::NonPositiveGap);
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let total: f64 = pairs.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(CoreError::EmptySample);
        }
        let (values, weights) = pairs
            .into_iter()
            .map(|(v, w)| (v, w / total))
            .unzip();
        Ok(Self {
            values,
            weights: Some(weights),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// F(x) = fraction (or weight) of sample ≤ x.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        match &self.weights {
            None => k as f64 / self.values.len() as f64,
            Some(w) => w[..k].iter().sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.weights {
            None => self.values.iter().sum::<f64>() / self.values.len() as f64,
            Some(w) => self.values.iter().zip(w).map(|(v, w)| v * w).sum(),
        }
    }
}

/// Sup-norm distance between two empirical CDFs (unweighted samples),
/// evaluated by the merge walk over the pooled sample.
pub fn ks_distance(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
) -> Result<f64, CoreError> {
    if a.is_empty() || b.is_empty() {
        return Err(CoreError::EmptySample);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a.values[i].min(b.values[j]);
        while i < a.len() && a.values[i] <= x {
            i += 1;
        }
        while j < b.len() && b.values[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Two-sample KS critical value at level `alpha`:
/// c(alpha) * sqrt((n + m) / (n m)), c = sqrt(-ln(alpha/2) / 2).
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Energy distance between two samples of 2-d points:
/// 2 E|X−Y| − E|X−X'| − E|Y−Y'| with Euclidean norms. Quadratic cost;
/// callers should subsample.
pub fn energy_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64, CoreError> {
    if a.is_empty() || b.is_empty() {
        return Err(CoreError::EmptySample);
    }
    let d = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let mean_cross = a
        .iter()
        .map(|&p| b.iter().map(|&q| d(p, q)).sum::<f64>())
        .sum::<f64>()
        / (a.len() * b.len()) as f64;
    let mean_within = |s: &[(f64, f64)]| {
        if s.len() < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for (i, &p) in s.iter().enumerate() {
            for &q in &s[i + 1..] {
                total += d(p, q);
            }
        }
        2.0 * total / (s.len() * s.len()) as f64
    };
    Ok(2.0 * mean_cross - mean_within(a) - mean_within(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{sample_gaps, GapLaw};
    use crate::rng::RngStream;

    #[test]
    fn identical_samples_distance_zero() {
        let a = EmpiricalDistribution::from_samples(vec![0.3, 1.7, 0.9]).unwrap();
        let b = EmpiricalDistribution::from_samples(vec![1.7, 0.3, 0.9]).unwrap();
        assert_eq!(ks_distance(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn point_masses_distance_one() {
        let a = EmpiricalDistribution::from_samples(vec![0.0; 5]).unwrap();
        let b = EmpiricalDistribution::from_samples(vec![1.0; 3]).unwrap();
        assert_eq!(ks_distance(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn ks_is_symmetric_and_bounded() {
        let a = EmpiricalDistribution::from_samples(
            sample_gaps(1000, GapLaw::Exponential, RngStream::new(71, 0))
                .unwrap()
                .gaps,
        )
        .unwrap();
        let b = EmpiricalDistribution::from_samples(
            sample_gaps(800, GapLaw::Uniform02, RngStream::new(71, 1))
                .unwrap()
                .gaps,
        )
        .unwrap();
        let d1 = ks_distance(&a, &b).unwrap();
        let d2 = ks_distance(&b, &a).unwrap();
        assert_eq!(d1, d2);
        assert!((0.0..=1.0).contains(&d1));
    }

    #[test]
    fn two_exponential_samples_are_close() {
        // critical value at alpha = 1e-3 for n = m = 1e5 is ~0.0123
        let n = 100_000;
        let a = EmpiricalDistribution::from_samples(
            sample_gaps(n, GapLaw::Exponential, RngStream::new(72, 0))
                .unwrap()
                .gaps,
        )
        .unwrap();
        let b = EmpiricalDistribution::from_samples(
            sample_gaps(n, GapLaw::Exponential, RngStream::new(72, 1))
                .unwrap()
                .gaps,
        )
        .unwrap();
        let d = ks_distance(&a, &b).unwrap();
        assert!(d <= ks_critical_value(n, n, 1e-3), "{d}");
        assert!(d <= 0.012, "{d}");
    }

    #[test]
    fn exp_vs_uniform_ks_is_large() {
        // KS(Exp(1), Unif(0,2)) = 0.1534 at x = ln 2; empirical version
        // approaches it for large n
        let n = 100_000;
        let a = EmpiricalDistribution::from_samples(
            sample_gaps(n, GapLaw::Exponential, RngStream::new(73, 0))
                .unwrap()
                .gaps,
        )
        .unwrap();
        let b = EmpiricalDistribution::from_samples(
            sample_gaps(n, GapLaw::Uniform02, RngStream::new(73, 1))
                .unwrap()
                .gaps,
        )
        .unwrap();
        let d = ks_distance(&a, &b).unwrap();
        let exact = 0.5 - 0.5 * 2.0f64.ln(); // F_exp(ln2) - F_unif(ln2)
        assert!((d - exact).abs() < 0.01, "{d} vs {exact}");
    }

    #[test]
    fn ks_against_exact_cdf_values() {
        // sample {1, 2, 3} vs {1.5}: sup |F_a - F_b| at x = 1 is 1/3,
        // at 1.5 it is |1/3 - 1| = 2/3, at 3 it is 0
        let a = EmpiricalDistribution::from_samples(vec![1.0, 2.0, 3.0]).unwrap();
        let b = EmpiricalDistribution::from_samples(vec![1.5]).unwrap();
        assert!((ks_distance(&a, &b).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_cdf_normalizes() {
        let d = EmpiricalDistribution::from_weighted(vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert!((d.cdf(0.0) - 0.25).abs() < 1e-15);
        assert_eq!(d.cdf(1.0), 1.0);
        assert!((d.mean() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(EmpiricalDistribution::from_samples(vec![]).is_err());
    }

    #[test]
    fn energy_distance_identical_zero_ish() {
        let pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, (i * i) as f64 % 7.0)).collect();
        let d = energy_distance(&pts, &pts).unwrap();
        assert!(d.abs() < 1e-9, "{d}");
    }

    #[test]
    fn energy_distance_separated_clouds() {
        let a: Vec<(f64, f64)> = (0..40).map(|i| (i as f64 * 0.01, 0.0)).collect();
        let b: Vec<(f64, f64)> = (0..40).map(|i| (10.0 + i as f64 * 0.01, 0.0)).collect();
        let d = energy_distance(&a, &b).unwrap();
        assert!(d > 10.0, "{d}");
    }
}
