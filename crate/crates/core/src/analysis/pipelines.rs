//! Comparison of the exact coin-coupled dynamics against the
//! row-literal averaging/folding pipeline with an independent merge
//! trace: a report of the KS distance between their gap marginals.

use rayon::prelude::*;

use crate::analysis::ecdf::{ks_critical_value, ks_distance, EmpiricalDistribution};
use crate::error::CoreError;
use crate::forward::{run_forward, Algorithm, ForwardState, IntensityMode};
use crate::laws::{sample_gaps, GapLaw, GapSequence};
use crate::literal::literal_step;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct PipelineComparison {
    pub t: u32,
    pub ks: f64,
    pub critical_value: f64,
    pub exceeds_critical: bool,
    /// sanity columns: both pipelines are renormalized to unit mean
    pub mean_exact: f64,
    pub mean_literal: f64,
    pub sample_sizes: (usize, usize),
}

/// Run both pipelines from the same initial law (independent draws) and
/// compare the pooled gap marginals at time t. Both are normalized to
/// unit mean intensity so the comparison is scale-free.
pub fn pipeline_comparison(
    law: GapLaw,
    t: u32,
    n_points: usize,
    replicas: usize,
    stream: RngStream,
) -> Result<PipelineComparison, CoreError> {
    let exact: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<_, CoreError> {
            let s = stream.substream(4).substream(r as u64);
            let gaps = sample_gaps(n_points, law, s.substream(0))?;
            let traj = run_forward(
                ForwardState::new(gaps),
                t,
                Algorithm::Alg1,
                IntensityMode::Empirical,
                s.substream(1),
                false,
            )?;
            Ok(traj.final_state().gaps.gaps.clone())
        })
        .collect::<Result<_, _>>()?;
    let literal: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<_, CoreError> {
            // at t = 0 share the exact pipeline's draws: distance 0
            let salt = if t == 0 { 4 } else { 5 };
            let s = stream.substream(salt).substream(r as u64);
            let mut gaps = sample_gaps(n_points, law, s.substream(0))?;
            let mut rng = s.substream(1).rng();
            for _ in 0..t {
                let stepped = literal_step(&gaps, &mut rng)?;
                // renormalize to unit mean, matching the empirical
                // rescale of the exact pipeline
                let m = stepped.mean_gap();
                gaps = GapSequence::new(stepped.gaps.iter().map(|g| g / m).collect())?;
            }
            Ok(gaps.gaps)
        })
        .collect::<Result<_, _>>()?;
    let a = EmpiricalDistribution::from_samples(exact.into_iter().flatten().collect())?;
    let b = EmpiricalDistribution::from_samples(literal.into_iter().flatten().collect())?;
    let ks = ks_distance(&a, &b)?;
    let critical_value = ks_critical_value(a.len(), b.len(), 1e-3);
    Ok(PipelineComparison {
        t,
        ks,
        critical_value,
        exceeds_critical: ks > critical_value,
        mean_exact: a.mean(),
        mean_literal: b.mean(),
        sample_sizes: (a.len(), b.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_zero_distance_is_zero() {
        let report =
            pipeline_comparison(GapLaw::Exponential, 0, 50_000, 1, RngStream::new(121, 0))
                .unwrap();
        assert_eq!(report.ks, 0.0);
        assert!((report.mean_exact - 1.0).abs() < 0.02);
    }

    #[test]
    fn both_pipelines_keep_unit_mean() {
        let report =
            pipeline_comparison(GapLaw::Exponential, 3, 20_000, 2, RngStream::new(122, 0))
                .unwrap();
        assert!((report.mean_exact - 1.0).abs() < 1e-9, "{report:?}");
        assert!((report.mean_literal - 1.0).abs() < 1e-9, "{report:?}");
    }

    #[test]
    fn one_step_report_is_well_formed() {
        let report =
            pipeline_comparison(GapLaw::Exponential, 1, 20_000, 2, RngStream::new(123, 0))
                .unwrap();
        assert!((0.0..=1.0).contains(&report.ks));
        assert!(report.critical_value > 0.0);
    }
}
