//! Laplace transforms of the step distributions along reverse
//! trajectories: per-s Cauchy increments and the transported/created
//! mass decomposition of each step.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::laws::rational_to_f64;
use crate::renewal::RenewalTrace;
use crate::reverse::{
    laplace_transform, mass, step_distribution, ReverseTrajectory, WeightSequence,
};

/// G^(t)(s) for every recorded state of a trajectory: rows indexed by
/// t, columns by the s-grid.
pub fn g_values(traj: &ReverseTrajectory, s_grid: &[f64]) -> Result<Vec<Vec<f64>>, CoreError> {
    traj.states
        .iter()
        .map(|eta| {
            let f = step_distribution(eta)?;
            Ok(s_grid.iter().map(|&s| laplace_transform(&f, s)).collect())
        })
        .collect()
}

/// Split of G^(t+1)(s) into transported mass (both copies of each old
/// weight) and created mass (the doubled middles at split sites):
///   H_beta(s) = Σ_n (3/8)^{t+1} η_n (e^{−s p(q_n)} + e^{−s p(q_n+1+𝟙_{n∈ρ})})
///   H_alpha(s) = Σ_{n∈ρ} (3/8)^{t+1} 2 η_n e^{−s p(q_n+1)}
/// with q_n the new index of old index n and p(k) = (3/4)^{t+1} k.
/// By construction H_beta + H_alpha = G^(t+1) exactly.
pub fn h_split(
    eta: &WeightSequence,
    rho: &RenewalTrace,
    s: f64,
) -> Result<(f64, f64), CoreError> {
    if eta.offset != 0 || eta.weights.first().copied().unwrap_or(0) == 0 {
        return Err(CoreError::UnanchoredSupport);
    }
    let unit = 0.375f64.powi(eta.t as i32 + 1);
    let spacing = 0.75f64.powi(eta.t as i32 + 1);
    let mut h_beta = 0.0;
    let mut h_alpha = 0.0;
    let mut q = 0i64; // new index of old index n
    for (n, &w) in eta.weights.iter().enumerate() {
        let split = rho.contains(n as i64);
        let width = if split { 2 } else { 1 };
        if w > 0 {
            let wf = unit * w as f64;
            h_beta += wf * (-s * spacing * q as f64).exp();
            h_beta += wf * (-s * spacing * (q + width) as f64).exp();
            if split {
                h_alpha += 2.0 * wf * (-s * spacing * (q + 1) as f64).exp();
            }
        }
        q += width;
    }
    Ok((h_beta, h_alpha))
}

/// Convergence diagnostics over a family of trajectories.
#[derive(Debug, Clone)]
pub struct LaplaceReport {
    pub s_grid: Vec<f64>,
    /// median over replicas of |G^(t+1)(s) − G^(t)(s)|, rows by t.
    pub median_increments: Vec<Vec<f64>>,
    /// max over replicas/steps/s of |H_beta + H_alpha − G^(t+1)| / G^(t+1).
    pub max_split_error: f64,
    /// max over replicas/t of |G^(t)(0) − M^(t)|, exact-zero check.
    pub max_s0_defect: f64,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn laplace_convergence(
    trajectories: &[ReverseTrajectory],
    s_grid: &[f64],
) -> Result<LaplaceReport, CoreError> {
    if trajectories.is_empty() {
        return Err(CoreError::EmptySample);
    }
    let steps = trajectories
        .iter()
        .map(|tr| tr.traces.len())
        .min()
        .unwrap();
    struct PerReplica {
        g: Vec<Vec<f64>>,
        split_err: f64,
        s0_defect: f64,
    }
    let rows: Vec<PerReplica> = trajectories
        .par_iter()
        .map(|traj| -> Result<PerReplica, CoreError> {
            let g = g_values(traj, s_grid)?;
            let mut split_err = 0.0f64;
            for (t, trace) in traj.traces.iter().enumerate() {
                for &s in s_grid {
                    let (hb, ha) = h_split(&traj.states[t], trace, s)?;
                    let f = step_distribution(&traj.states[t + 1])?;
                    let g1 = laplace_transform(&f, s);
                    split_err = split_err.max((hb + ha - g1).abs() / g1);
                }
            }
            let mut s0_defect = 0.0f64;
            if let Some(k) = s_grid.iter().position(|&s| s == 0.0) {
                for (t, eta) in traj.states.iter().enumerate() {
                    s0_defect = s0_defect.max((g[t][k] - rational_to_f64(&mass(eta))).abs());
                }
            }
            Ok(PerReplica {
                g,
                split_err,
                s0_defect,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut median_increments = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut row = Vec::with_capacity(s_grid.len());
        for k in 0..s_grid.len() {
            let mut incs: Vec<f64> = rows
                .iter()
                .map(|r| (r.g[t + 1][k] - r.g[t][k]).abs())
                .collect();
            row.push(median(&mut incs));
        }
        median_increments.push(row);
    }
    Ok(LaplaceReport {
        s_grid: s_grid.to_vec(),
        median_increments,
        max_split_error: rows.iter().fold(0.0, |m, r| m.max(r.split_err)),
        max_s0_defect: rows.iter().fold(0.0, |m, r| m.max(r.s0_defect)),
    })
}
