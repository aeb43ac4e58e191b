//! Cluster-size scaling diagnostics: the scaled multiplicity of a
//! typical point has mean one at every step, and the per-trajectory
//! scaled size of the tracked point's cluster is probed for L²
//! convergence via Cauchy differences.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::forward::{run_forward, Algorithm, ForwardState, IntensityMode};
use crate::laws::{sample_gaps, GapLaw};
use crate::rng::RngStream;

/// Per-step statistics of the scaled cluster size.
#[derive(Debug, Clone)]
pub struct ClusterScalingRow {
    pub t: u32,
    /// Mean over replicas of (3/4)^t × (population-average multiplicity).
    pub mean: f64,
    pub se: f64,
    pub variance: f64,
}

/// Cauchy difference E|Y_t − Y_{t+k}|² of the tracked point's scaled
/// cluster size, with its standard error.
#[derive(Debug, Clone)]
pub struct CauchyRow {
    pub t: u32,
    pub t_next: u32,
    pub statistic: f64,
    pub se: f64,
}

#[derive(Debug, Clone)]
pub struct ClusterScalingReport {
    pub rows: Vec<ClusterScalingRow>,
    pub cauchy: Vec<CauchyRow>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt(), var)
}

/// Run `replicas` forward trajectories and tabulate scaled cluster
/// sizes at every step plus Cauchy differences at lag `cauchy_lag` for
/// the anchor-tracked sequence.
pub fn cluster_scaling_diagnostic(
    law: GapLaw,
    n_points: usize,
    steps: u32,
    replicas: usize,
    cauchy_lag: u32,
    stream: RngStream,
) -> Result<ClusterScalingReport, CoreError> {
    // per replica: scaled population mean per t, scaled anchor size per t
    let per_replica: Vec<(Vec<f64>, Vec<f64>)> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<_, CoreError> {
            let s = stream.substream(3).substream(r as u64);
            let gaps = sample_gaps(n_points, law, s.substream(0))?;
            let traj = run_forward(
                ForwardState::new(gaps),
                steps,
                Algorithm::Alg1,
                IntensityMode::Theoretical,
                s.substream(1),
                false,
            )?;
            let mut pop = Vec::with_capacity(steps as usize + 1);
            let mut anchor = Vec::with_capacity(steps as usize + 1);
            for state in &traj.states {
                let scale = 0.75f64.powi(state.t as i32);
                let m = state.genealogy.multiplicity.len() as f64;
                pop.push(scale * state.genealogy.total() as f64 / m);
                anchor.push(scale * state.genealogy.multiplicity[state.anchor] as f64);
            }
            Ok((pop, anchor))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(steps as usize + 1);
    for t in 0..=steps as usize {
        let samples: Vec<f64> = per_replica.iter().map(|(pop, _)| pop[t]).collect();
        let (mean, se, variance) = mean_and_se(&samples);
        rows.push(ClusterScalingRow {
            t: t as u32,
            mean,
            se,
            variance,
        });
    }
    let mut cauchy = Vec::new();
    let lag = cauchy_lag as usize;
    for t in (lag..=(steps as usize).saturating_sub(lag)).step_by(lag.max(1)) {
        let sq: Vec<f64> = per_replica
            .iter()
            .map(|(_, y)| (y[t] - y[t + lag]).powi(2))
            .collect();
        let (statistic, se, _) = mean_and_se(&sq);
        cauchy.push(CauchyRow {
            t: t as u32,
            t_next: (t + lag) as u32,
            statistic,
            se,
        });
    }
    Ok(ClusterScalingReport { rows, cauchy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_mean_is_one_within_band() {
        let report = cluster_scaling_diagnostic(
            GapLaw::Exponential,
            20_000,
            12,
            200,
            5,
            RngStream::new(111, 0),
        )
        .unwrap();
        // t = 0 exactly one, zero variance
        assert_eq!(report.rows[0].mean, 1.0);
        assert_eq!(report.rows[0].variance, 0.0);
        for row in &report.rows[1..] {
            assert!(
                (row.mean - 1.0).abs() <= 4.0 * row.se.max(1e-9),
                "t={} mean={} se={}",
                row.t,
                row.mean,
                row.se
            );
        }
    }

    #[test]
    fn cauchy_rows_have_requested_lags() {
        let report = cluster_scaling_diagnostic(
            GapLaw::Exponential,
            4_000,
            15,
            50,
            5,
            RngStream::new(112, 0),
        )
        .unwrap();
        let lags: Vec<(u32, u32)> =
            report.cauchy.iter().map(|c| (c.t, c.t_next)).collect();
        assert_eq!(lags, vec![(5, 10), (10, 15)]);
        for c in &report.cauchy {
            assert!(c.statistic >= 0.0 && c.se > 0.0);
        }
    }
}
