//! The verification suite: named statistical and exact checks over the
//! forward and reverse dynamics, returning structured results suitable
//! for JSON/CSV emission and for gating test runs.

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ecdf::{ks_distance, EmpiricalDistribution};
use crate::analysis::lemma::{lemma_identity_check, linear_grid};
use crate::analysis::{cluster_scaling_diagnostic, duality_check};
use crate::error::CoreError;
use crate::exact::expected_mass_exact;
use crate::forward::{
    forward_step_with_directions, run_forward, sample_directions, Algorithm, ForwardState,
    IntensityMode, PointConfiguration,
};
use crate::laws::{rational_to_f64, sample_gaps, GapLaw, RenewalLaw};
use crate::reverse::{run_reverse, step_distribution, ReverseVariant, WeightSequence};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Assert,
    Report,
}

/// One verdict line: a named statistic compared against a threshold.
/// Report-kind lines never gate an exit status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub kind: CheckKind,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn assert_leq(check: &str, statistic: f64, threshold: f64) -> Self {
        Self {
            check: check.to_string(),
            kind: CheckKind::Assert,
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }

    fn assert_geq(check: &str, statistic: f64, threshold: f64) -> Self {
        Self {
            check: check.to_string(),
            kind: CheckKind::Assert,
            statistic,
            threshold,
            pass: statistic >= threshold,
        }
    }

    fn report(check: &str, statistic: f64, threshold: f64) -> Self {
        Self {
            check: check.to_string(),
            kind: CheckKind::Report,
            statistic,
            threshold,
            pass: true,
        }
    }

    pub fn gate_failed(&self) -> bool {
        self.kind == CheckKind::Assert && !self.pass
    }
}

/// Scales of the verification suite. Defaults match the acceptance
/// budget; `quick` shrinks everything for smoke tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub martingale_replicas: usize,
    pub martingale_steps: u32,
    pub merge_points: usize,
    pub equivalence_replicas: usize,
    pub equivalence_points: usize,
    pub equivalence_steps: u32,
    pub theorem1_points: usize,
    pub theorem1_steps: u32,
    pub theorem1_replicas: usize,
    pub lemma_replicas: usize,
    pub lemma_steps: u32,
    pub lemma_grid: usize,
    pub duality_replicas: usize,
    pub duality_points: usize,
    pub cluster_replicas: usize,
    pub cluster_points: usize,
    pub cluster_steps: u32,
    pub figure5_replicas: usize,
    pub figure5_steps: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            martingale_replicas: 10_000,
            martingale_steps: 20,
            merge_points: 100_000,
            equivalence_replicas: 100,
            equivalence_points: 1_000,
            equivalence_steps: 10,
            theorem1_points: 200_000,
            theorem1_steps: 25,
            theorem1_replicas: 400,
            lemma_replicas: 100,
            lemma_steps: 12,
            lemma_grid: 1_000,
            duality_replicas: 10_000,
            duality_points: 256,
            cluster_replicas: 1_000,
            cluster_points: 100_000,
            cluster_steps: 20,
            figure5_replicas: 1_000,
            figure5_steps: 20,
        }
    }
}

impl VerifyOptions {
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            martingale_replicas: 400,
            martingale_steps: 10,
            merge_points: 20_000,
            equivalence_replicas: 5,
            equivalence_points: 300,
            equivalence_steps: 5,
            theorem1_points: 20_000,
            theorem1_steps: 12,
            theorem1_replicas: 20,
            lemma_replicas: 5,
            lemma_steps: 8,
            lemma_grid: 100,
            duality_replicas: 400,
            duality_points: 128,
            cluster_replicas: 50,
            cluster_points: 10_000,
            cluster_steps: 15,
            figure5_replicas: 30,
            figure5_steps: 12,
        }
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Criterion 1: exact expected mass by pattern enumeration.
pub fn check_martingale_exact(_opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let eta = WeightSequence::unit(0, ReverseVariant::Gap);
    let mut worst = 0.0f64;
    for t in 0..=3 {
        let e = expected_mass_exact(&eta, t)?;
        let defect = if e == BigRational::one() {
            0.0
        } else {
            (rational_to_f64(&e) - 1.0).abs().max(f64::MIN_POSITIVE)
        };
        worst = worst.max(defect);
    }
    Ok(vec![CheckResult::assert_leq(
        "martingale_exact_t0_3",
        worst,
        0.0,
    )])
}

/// Criterion 2: Monte Carlo martingale with hard pathwise bounds.
pub fn check_martingale_mc(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let steps = opts.martingale_steps;
    let base = RngStream::new(opts.seed, 0).substream(10);
    let masses: Vec<Vec<f64>> = (0..opts.martingale_replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>, CoreError> {
            let traj = run_reverse(
                WeightSequence::unit(0, ReverseVariant::Gap),
                steps,
                base.substream(r as u64),
            )?;
            Ok(traj.ledger.iter().map(|row| rational_to_f64(&row.m)).collect())
        })
        .collect::<Result<_, _>>()?;
    // max over t of |mean - 1| in SE units
    let mut worst = 0.0f64;
    for t in 1..=steps as usize {
        let col: Vec<f64> = masses.iter().map(|m| m[t]).collect();
        let (mean, se) = mean_and_se(&col);
        worst = worst.max((mean - 1.0).abs() / se);
    }
    // conditional increments: pooled mean of M^(t+1) - M^(t)
    let mut worst_inc = 0.0f64;
    for t in 0..steps.min(15) as usize {
        let inc: Vec<f64> = masses.iter().map(|m| m[t + 1] - m[t]).collect();
        let (mean, se) = mean_and_se(&inc);
        worst_inc = worst_inc.max(mean.abs() / se);
    }
    // variance trajectory is nondecreasing in t (martingale), reported
    let var_at = |t: usize| {
        let col: Vec<f64> = masses.iter().map(|m| m[t]).collect();
        let (mean, _) = mean_and_se(&col);
        col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64
    };
    let final_var = var_at(steps as usize);
    Ok(vec![
        CheckResult::assert_leq("martingale_mc_mean_4se", worst, 4.0),
        CheckResult::assert_leq("martingale_mc_increments_4se", worst_inc, 4.0),
        CheckResult::report("martingale_mc_final_variance", final_var, f64::INFINITY),
    ])
}

/// Criterion 3: one-step merge statistics against the inter-merge law.
pub fn check_merge_statistics(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let n = opts.merge_points;
    let stream = RngStream::new(opts.seed, 0).substream(11);
    let gaps = sample_gaps(n, GapLaw::Exponential, stream.substream(0))?;
    let state = ForwardState::new(gaps);
    let dirs = sample_directions(&state.gaps, Algorithm::Alg1, &mut stream.substream(1).rng());
    let (_, record) = crate::forward::tentative_gaps(&state.gaps, &dirs)?;
    let frac = record.merge_count() as f64 / n as f64;
    let frac_err = (frac - 0.25).abs();

    // chi-square of consecutive inter-merge distances against the
    // two-geometric convolution pmf (k-1) 2^{-k}, tail pooled
    let sites = &record.merged_gap_indices;
    let distances: Vec<u64> = sites.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    const KMAX: usize = 16;
    let mut counts = [0u64; KMAX + 1];
    for &d in &distances {
        counts[(d as usize).min(KMAX)] += 1;
    }
    let total = distances.len() as f64;
    let mut stat = 0.0;
    for k in 2..=KMAX {
        let p = if k < KMAX {
            RenewalLaw::Tau.pmf(k as u64)
        } else {
            RenewalLaw::Tau.survival(KMAX as u64 - 1)
        };
        let expect = p * total;
        stat += (counts[k] as f64 - expect).powi(2) / expect;
    }
    // upper 1e-3 quantile of chi-square with KMAX-2 dof
    let dof = (KMAX - 2) as f64;
    let crit = chi_square_upper_quantile(dof, 1e-3);
    Ok(vec![
        CheckResult::assert_leq("merge_fraction_error", frac_err, 0.01),
        CheckResult::assert_leq(
            "merge_distance_chi_square",
            stat / crit,
            1.0,
        ),
    ])
}

fn chi_square_upper_quantile(dof: f64, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - alpha)
}

/// Criterion 4: point-level and gap-level pipelines agree under shared
/// coins, to 1e-12 relative to the mean gap.
pub fn check_pipeline_equivalence(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let base = RngStream::new(opts.seed, 0).substream(12);
    let worst = (0..opts.equivalence_replicas)
        .into_par_iter()
        .map(|r| -> Result<f64, CoreError> {
            let s = base.substream(r as u64);
            let gaps = sample_gaps(opts.equivalence_points, GapLaw::Exponential, s.substream(0))?;
            let mut state = ForwardState::new(gaps.clone());
            let mut points = PointConfiguration::from_gaps(&gaps, 0.0);
            let mut rng = s.substream(1).rng();
            let mut worst = 0.0f64;
            for _ in 0..opts.equivalence_steps {
                let dirs = sample_directions(&state.gaps, Algorithm::Alg1, &mut rng);
                points = points.step(&dirs)?.rescale(0.75);
                let (next, _) =
                    forward_step_with_directions(&state, &dirs, IntensityMode::Theoretical)?;
                state = next;
                let from_points = state_diff(&points, &state)?;
                worst = worst.max(from_points);
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(vec![CheckResult::assert_leq(
        "pipeline_equivalence_rel_error",
        worst,
        1e-12,
    )])
}

fn state_diff(points: &PointConfiguration, state: &ForwardState) -> Result<f64, CoreError> {
    let from_points = points.gap_sequence()?;
    if from_points.len() != state.gaps.len() {
        return Ok(f64::INFINITY);
    }
    let scale = state.gaps.mean_gap();
    Ok(from_points
        .gaps
        .iter()
        .zip(&state.gaps.gaps)
        .map(|(a, b)| ((a - b) / scale).abs())
        .fold(0.0, f64::max))
}

/// Criterion 5: limit-law reproduction. Palm gap marginals of runs
/// started from Exp(1) and Unif(0,2) come together; a self-calibration
/// baseline (two independent Exp(1) arms) scales the comparison.
pub fn check_theorem1(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let base = RngStream::new(opts.seed, 0).substream(13);
    let run_arm = |salt: u64, law: GapLaw| -> Result<(Vec<f64>, Vec<f64>), CoreError> {
        // returns (initial gaps from replica 0, pooled final gaps)
        let finals: Vec<(Vec<f64>, Vec<f64>)> = (0..opts.theorem1_replicas)
            .into_par_iter()
            .map(|r| -> Result<_, CoreError> {
                let s = base.substream(salt).substream(r as u64);
                let gaps = sample_gaps(opts.theorem1_points, law, s.substream(0))?;
                let initial = if r == 0 { gaps.gaps.clone() } else { vec![] };
                let traj = run_forward(
                    ForwardState::new(gaps),
                    opts.theorem1_steps,
                    Algorithm::Alg1,
                    IntensityMode::Theoretical,
                    s.substream(1),
                    false,
                )?;
                Ok((initial, traj.final_state().gaps.gaps.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut initial = Vec::new();
        let mut pooled = Vec::new();
        for (i, f) in finals {
            initial.extend(i);
            pooled.extend(f);
        }
        Ok((initial, pooled))
    };
    let (exp_initial, exp_final) = run_arm(0, GapLaw::Exponential)?;
    let (_, exp_final_b) = run_arm(1, GapLaw::Exponential)?;
    let (unif_initial, unif_final) = run_arm(2, GapLaw::Uniform02)?;
    let e = EmpiricalDistribution::from_samples(exp_final)?;
    let e2 = EmpiricalDistribution::from_samples(exp_final_b)?;
    let u = EmpiricalDistribution::from_samples(unif_final)?;
    let baseline = ks_distance(&e, &e2)?;
    let cross = ks_distance(&e, &u)?;
    let e0 = EmpiricalDistribution::from_samples(exp_initial)?;
    let u0 = EmpiricalDistribution::from_samples(unif_initial)?;
    let initial = ks_distance(&e0, &u0)?;
    Ok(vec![
        CheckResult::assert_leq("theorem1_final_ks_over_baseline", cross / baseline, 3.0),
        CheckResult::assert_geq("theorem1_initial_ks_over_baseline", initial / baseline, 10.0),
        CheckResult::report("theorem1_baseline_ks", baseline, f64::INFINITY),
    ])
}

/// Criterion 6: the pathwise step-distribution identity.
pub fn check_lemma_identity(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let base = RngStream::new(opts.seed, 0).substream(14);
    let results: Vec<(f64, bool)> = (0..opts.lemma_replicas)
        .into_par_iter()
        .map(|r| -> Result<(f64, bool), CoreError> {
            let traj = run_reverse(
                WeightSequence::unit(0, ReverseVariant::Gap),
                opts.lemma_steps,
                base.substream(r as u64),
            )?;
            let mut worst = 0.0f64;
            let mut all_exact = true;
            for (s, state) in traj.states[..traj.states.len() - 1].iter().enumerate() {
                let f = step_distribution(state)?;
                let hi = (f.support_length() * 1.05).max(1.0);
                let grid = linear_grid(hi, opts.lemma_grid);
                let rows = lemma_identity_check(
                    &crate::reverse::ReverseTrajectory {
                        states: traj.states[s..=s + 1].to_vec(),
                        traces: traj.traces[s..=s].to_vec(),
                        ledger: traj.ledger[s..=s].to_vec(),
                    },
                    &grid,
                    4,
                )?;
                let row = &rows[0];
                worst = worst.max(row.max_residual);
                if row.exact_zero == Some(false) {
                    all_exact = false;
                }
            }
            Ok((worst, all_exact))
        })
        .collect::<Result<_, _>>()?;
    let worst = results.iter().fold(0.0f64, |m, (w, _)| m.max(*w));
    let exact_ok = results.iter().all(|(_, e)| *e);
    Ok(vec![
        CheckResult::assert_leq("lemma_identity_float_residual", worst, 1e-9),
        CheckResult::assert_leq(
            "lemma_identity_exact_defects",
            if exact_ok { 0.0 } else { 1.0 },
            0.0,
        ),
    ])
}

/// Criterion 7: forward/reverse duality at small times.
pub fn check_duality(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let base = RngStream::new(opts.seed, 0).substream(15);
    let seeds: Vec<(&str, Vec<i64>)> = vec![
        ("e0", vec![0]),
        ("e0_e1", vec![0, 1]),
        ("e0_e3", vec![0, 3]),
    ];
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for (name, support) in &seeds {
        let eta0 = WeightSequence::from_support(support, ReverseVariant::Gap)?;
        // t = 0 exact agreement on shared samples
        let r0 = duality_check(
            &eta0,
            GapLaw::Exponential,
            0,
            opts.duality_points,
            (opts.duality_replicas / 10).max(10),
            base.substream(100),
        )?;
        out.push(CheckResult::assert_leq(
            &format!("duality_{name}_t0_exact"),
            (r0.lhs - r0.rhs).abs(),
            0.0,
        ));
        for t in 1..=3u32 {
            let report = duality_check(
                &eta0,
                GapLaw::Exponential,
                t,
                opts.duality_points,
                opts.duality_replicas,
                base.substream(t as u64),
            )?;
            let z = report.discrepancy() / report.pooled_se();
            worst = worst.max(z);
            out.push(CheckResult::assert_leq(
                &format!("duality_{name}_t{t}_4se"),
                z,
                4.0,
            ));
        }
    }
    out.push(CheckResult::report("duality_worst_z", worst, 4.0));
    Ok(out)
}

/// Criterion 8: scaled cluster-size mean and Cauchy diagnostics.
pub fn check_cluster_scaling(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let report = cluster_scaling_diagnostic(
        GapLaw::Exponential,
        opts.cluster_points,
        opts.cluster_steps,
        opts.cluster_replicas,
        5,
        RngStream::new(opts.seed, 0).substream(16),
    )?;
    let mut worst = 0.0f64;
    for row in &report.rows[1..] {
        worst = worst.max((row.mean - 1.0).abs() / row.se);
    }
    let mut out = vec![CheckResult::assert_leq(
        "cluster_scaling_mean_4se",
        worst,
        4.0,
    )];
    // Cauchy statistic decreasing across consecutive lags (report)
    let mut decreasing = true;
    for w in report.cauchy.windows(2) {
        if w[1].statistic >= w[0].statistic {
            decreasing = false;
        }
        out.push(CheckResult::report(
            &format!("cluster_cauchy_t{}_t{}", w[0].t, w[0].t_next),
            w[0].statistic,
            f64::INFINITY,
        ));
    }
    if let Some(last) = report.cauchy.last() {
        out.push(CheckResult::report(
            &format!("cluster_cauchy_t{}_t{}", last.t, last.t_next),
            last.statistic,
            f64::INFINITY,
        ));
    }
    out.push(CheckResult::report(
        "cluster_cauchy_decreasing",
        if decreasing { 1.0 } else { 0.0 },
        1.0,
    ));
    Ok(out)
}

/// Sup-norm distance between consecutive step distributions, exact in
/// integer arithmetic on the common 8^{t+1} denominator lattice.
fn sup_diff_consecutive(
    f: &crate::reverse::StepDistribution,
    g: &crate::reverse::StepDistribution,
) -> f64 {
    debug_assert_eq!(g.t, f.t + 1);
    let scale_f = 8u128 * 3u128.pow(f.t); // numerator unit of one f-weight
    let scale_g = 3u128.pow(g.t);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut pf, mut pg) = (0u128, 0u128);
    let mut sup = 0u128;
    let nf = f.weights.len();
    let ng = g.weights.len();
    while i < nf || j < ng {
        // f breakpoint at x = (3/4)^t i, g at (3/4)^{t+1} j: f first
        // iff 4i < 3j
        let take_f = j >= ng || (i < nf && 4 * i as u64 <= 3 * j as u64);
        let take_g = i >= nf || (j < ng && 3 * j as u64 <= 4 * i as u64);
        if take_f {
            pf += scale_f * f.weights[i] as u128;
            i += 1;
        }
        if take_g {
            pg += scale_g * g.weights[j] as u128;
            j += 1;
        }
        sup = sup.max(pf.abs_diff(pg));
    }
    sup = sup.max(pf.abs_diff(pg));
    sup as f64 / 8f64.powi(g.t as i32)
}

/// Criterion 9: convergence diagnostics of the step distributions.
pub fn check_figure5(opts: &VerifyOptions) -> Result<Vec<CheckResult>, CoreError> {
    let base = RngStream::new(opts.seed, 0).substream(17);
    let steps = opts.figure5_steps;
    let tail_start = (steps / 2) as usize;
    let monotone: Vec<bool> = (0..opts.figure5_replicas)
        .into_par_iter()
        .map(|r| -> Result<bool, CoreError> {
            let traj = run_reverse(
                WeightSequence::unit(0, ReverseVariant::Gap),
                steps,
                base.substream(r as u64),
            )?;
            let dists: Vec<f64> = (0..steps as usize)
                .map(|t| {
                    Ok(sup_diff_consecutive(
                        &step_distribution(&traj.states[t])?,
                        &step_distribution(&traj.states[t + 1])?,
                    ))
                })
                .collect::<Result<_, CoreError>>()?;
            Ok(dists[tail_start..].windows(2).all(|w| w[1] <= w[0]))
        })
        .collect::<Result<_, _>>()?;
    let frac = monotone.iter().filter(|&&b| b).count() as f64 / monotone.len() as f64;
    Ok(vec![CheckResult::report(
        "figure5_nonincreasing_fraction",
        frac,
        0.9,
    )])
}

/// Run every check whose name contains `filter` (or all).
pub fn run_all(opts: &VerifyOptions, filter: Option<&str>) -> Result<Vec<CheckResult>, CoreError> {
    type CheckFn = fn(&VerifyOptions) -> Result<Vec<CheckResult>, CoreError>;
    let checks: Vec<(&str, CheckFn)> = vec![
        ("martingale_exact", check_martingale_exact),
        ("martingale_mc", check_martingale_mc),
        ("merge", check_merge_statistics),
        ("pipeline", check_pipeline_equivalence),
        ("theorem1", check_theorem1),
        ("lemma", check_lemma_identity),
        ("duality", check_duality),
        ("cluster", check_cluster_scaling),
        ("figure5", check_figure5),
    ];
    let mut out = Vec::new();
    for (name, f) in checks {
        if filter.map_or(true, |pat| name.contains(pat)) {
            out.extend(f(opts)?);
        }
    }
    Ok(out)
}
