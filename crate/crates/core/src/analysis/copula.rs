//! Joint-convergence diagnostics: the empirical copula of (gap, scaled
//! cluster size) across time, and the merge-replay coupling that drives
//! a reverse run with the recorded forward merge history.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::forward::{run_forward, Algorithm, ForwardState, ForwardTrajectory, IntensityMode};
use crate::laws::{sample_gaps, GapLaw, RenewalLaw};
use crate::renewal::RenewalTrace;
use crate::reverse::{reverse_step, ReverseVariant, WeightSequence};
use crate::rng::RngStream;

/// Per current point: (gap to its right, (3/4)^t × multiplicity).
pub fn joint_sample(state: &ForwardState) -> Vec<(f64, f64)> {
    let scale = 0.75f64.powi(state.t as i32);
    state
        .gaps
        .gaps
        .iter()
        .zip(&state.genealogy.multiplicity)
        .map(|(&g, &m)| (g, scale * m as f64))
        .collect()
}

fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut r = vec![0usize; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        r[i] = rank + 1;
    }
    r
}

/// Sup distance between the empirical copulas of two bivariate samples,
/// evaluated on a `grid × grid` lattice of the unit square.
pub fn copula_distance(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    grid: usize,
) -> Result<f64, CoreError> {
    if a.is_empty() || b.is_empty() || grid == 0 {
        return Err(CoreError::EmptySample);
    }
    let table = |s: &[(f64, f64)]| -> Vec<Vec<f64>> {
        let n = s.len();
        let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = s.iter().map(|p| p.1).collect();
        let (rx, ry) = (ranks(&xs), ranks(&ys));
        // histogram of (⌈u·grid⌉, ⌈v·grid⌉) cells, then 2-d prefix sums
        let mut h = vec![vec![0f64; grid + 1]; grid + 1];
        for i in 0..n {
            let cu = (rx[i] * grid).div_ceil(n);
            let cv = (ry[i] * grid).div_ceil(n);
            h[cu][cv] += 1.0 / n as f64;
        }
        for u in 1..=grid {
            for v in 1..=grid {
                h[u][v] += h[u - 1][v] + h[u][v - 1] - h[u - 1][v - 1];
            }
        }
        h
    };
    let (ha, hb) = (table(a), table(b));
    let mut sup = 0.0f64;
    for u in 1..=grid {
        for v in 1..=grid {
            sup = sup.max((ha[u][v] - hb[u][v]).abs());
        }
    }
    Ok(sup)
}

/// Convert the recorded forward merge history into un-merge site traces
/// in reversed step order, recentered at the tracked point's gap.
pub fn replay_rho_traces(traj: &ForwardTrajectory, window: i64) -> Vec<RenewalTrace> {
    let mut traces: Vec<RenewalTrace> = traj
        .merges
        .iter()
        .enumerate()
        .map(|(s, record)| {
            let state = &traj.states[s];
            let n = state.gaps.len() as i64;
            let anchor = state.anchor as i64;
            let mut points: Vec<i64> = record
                .merged_gap_indices
                .iter()
                .map(|&j| {
                    let mut d = (j as i64 - anchor).rem_euclid(n);
                    if d > n / 2 {
                        d -= n;
                    }
                    d
                })
                .filter(|d| d.abs() <= window)
                .collect();
            points.sort_unstable();
            points.dedup();
            RenewalTrace {
                lo: -window,
                hi: window,
                points,
                law: RenewalLaw::Rho,
            }
        })
        .collect();
    traces.reverse();
    traces
}

/// Drive a reverse run from a unit seed with the replayed traces and
/// return the final scaled mass.
pub fn replayed_reverse_mass(
    traces: &[RenewalTrace],
    variant: ReverseVariant,
) -> Result<f64, CoreError> {
    let mut eta = WeightSequence::unit(0, variant);
    for trace in traces {
        eta = reverse_step(&eta, trace)?;
    }
    Ok(crate::laws::rational_to_f64(&crate::reverse::mass(&eta)))
}

#[derive(Debug, Clone)]
pub struct CopulaRow {
    pub t: u32,
    pub t_next: u32,
    pub distance: f64,
    /// Pearson correlation of (gap, scaled size) at time t.
    pub joint_correlation: f64,
}

#[derive(Debug, Clone)]
pub struct Corollary2Report {
    pub rows: Vec<CopulaRow>,
    /// Correlation across replicas between the forward tracked-cluster
    /// scaled size and the merge-replay reverse mass.
    pub replay_correlation: f64,
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut cov, mut vx, mut vy) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx).powi(2);
        vy += (y - my).powi(2);
    }
    cov / (vx * vy).sqrt()
}

/// Pooled copula stabilization report across checkpoint times, plus the
/// merge-replay coupling correlation.
pub fn corollary2_report(
    law: GapLaw,
    n_points: usize,
    checkpoints: &[u32],
    replicas: usize,
    stream: RngStream,
) -> Result<Corollary2Report, CoreError> {
    let steps = *checkpoints.iter().max().ok_or(CoreError::EmptySample)?;
    struct PerReplica {
        samples: Vec<Vec<(f64, f64)>>, // per checkpoint
        forward_scaled: f64,
        replay_mass: f64,
    }
    let runs: Vec<PerReplica> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<_, CoreError> {
            let s = stream.substream(6).substream(r as u64);
            let gaps = sample_gaps(n_points, law, s.substream(0))?;
            let traj = run_forward(
                ForwardState::new(gaps),
                steps,
                Algorithm::Alg1,
                IntensityMode::Theoretical,
                s.substream(1),
                false,
            )?;
            let samples = checkpoints
                .iter()
                .map(|&t| joint_sample(&traj.states[t as usize]))
                .collect();
            let fin = traj.final_state();
            let forward_scaled = 0.75f64.powi(steps as i32)
                * fin.genealogy.multiplicity[fin.anchor] as f64;
            let window = 2i64.pow(steps.min(20)) + 2;
            let traces = replay_rho_traces(&traj, window);
            let replay_mass = replayed_reverse_mass(&traces, ReverseVariant::Cluster)?;
            Ok(PerReplica {
                samples,
                forward_scaled,
                replay_mass,
            })
        })
        .collect::<Result<_, _>>()?;
    let pooled: Vec<Vec<(f64, f64)>> = (0..checkpoints.len())
        .map(|k| {
            runs.iter()
                .flat_map(|r| r.samples[k].iter().copied())
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for k in 0..checkpoints.len().saturating_sub(1) {
        let xs: Vec<f64> = pooled[k].iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pooled[k].iter().map(|p| p.1).collect();
        rows.push(CopulaRow {
            t: checkpoints[k],
            t_next: checkpoints[k + 1],
            distance: copula_distance(&pooled[k], &pooled[k + 1], 20)?,
            joint_correlation: pearson(&xs, &ys),
        });
    }
    let fwd: Vec<f64> = runs.iter().map(|r| r.forward_scaled).collect();
    let rev: Vec<f64> = runs.iter().map(|r| r.replay_mass).collect();
    Ok(Corollary2Report {
        rows,
        replay_correlation: pearson(&fwd, &rev),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copula_distance_of_identical_sample_is_zero() {
        let pts: Vec<(f64, f64)> =
            (0..200).map(|i| (i as f64, (i * 7 % 31) as f64)).collect();
        assert_eq!(copula_distance(&pts, &pts, 10).unwrap(), 0.0);
    }

    #[test]
    fn copula_detects_dependence_flip() {
        // comonotone vs countermonotone samples are maximally far
        let a: Vec<(f64, f64)> = (0..500).map(|i| (i as f64, i as f64)).collect();
        let b: Vec<(f64, f64)> = (0..500).map(|i| (i as f64, -(i as f64))).collect();
        let d = copula_distance(&a, &b, 20).unwrap();
        assert!(d > 0.4, "{d}");
    }

    #[test]
    fn replay_traces_align_with_merges() {
        let gaps = sample_gaps(256, GapLaw::Exponential, RngStream::new(131, 0)).unwrap();
        let traj = run_forward(
            ForwardState::new(gaps),
            4,
            Algorithm::Alg1,
            IntensityMode::Theoretical,
            RngStream::new(131, 1),
            false,
        )
        .unwrap();
        let traces = replay_rho_traces(&traj, 64);
        assert_eq!(traces.len(), 4);
        // reversed order: trace 0 comes from the last forward step
        let last = &traj.merges[3];
        assert!(traces[0].points.len() <= last.merged_gap_indices.len());
        let mass = replayed_reverse_mass(&traces, ReverseVariant::Cluster).unwrap();
        assert!(mass > 0.0);
    }

    #[test]
    fn report_shape_and_replay_correlation() {
        let report = corollary2_report(
            GapLaw::Exponential,
            1024,
            &[2, 4, 6],
            40,
            RngStream::new(132, 0),
        )
        .unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert!((0.0..=1.0).contains(&row.distance));
        }
        // the replayed reverse mass shares the tracked point's merge
        // history, so it should co-move with the forward cluster size
        assert!(report.replay_correlation > 0.2, "{}", report.replay_correlation);
    }
}
