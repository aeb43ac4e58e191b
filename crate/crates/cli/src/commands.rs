//! Subcommand implementations. Each command reads the (already
//! resolved) configuration, runs the corresponding simulation, and
//! writes CSV tables plus SVG figures into the output directory. Every
//! SVG has a sidecar CSV containing exactly the plotted numbers.

use clusterflow_core::analysis::duality_check;
use clusterflow_core::forward::{run_forward, Algorithm, ForwardState, IntensityMode};
use clusterflow_core::laws::{sample_gaps, GapLaw};
use clusterflow_core::reverse::{laplace_transform, run_reverse, StepDistribution, WeightSequence};
use clusterflow_core::verify::run_all;
use clusterflow_core::{CheckKind, RngStream};

use crate::config::{ExperimentConfig, GapLawTag};
use crate::output::{Csv, OutDir, SvgPlot};

/// Failure classes mapped to process exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// exit 2: the configuration could not be parsed or validated
    Config(String),
    /// exit 3: a simulation or I/O failure at runtime
    Runtime(String),
    /// exit 1: at least one assert-kind verification check failed
    GateFailed(usize),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<clusterflow_core::CoreError> for CliError {
    fn from(e: clusterflow_core::CoreError) -> Self {
        CliError::Runtime(format!("simulation error: {e}"))
    }
}

fn law_name(law: GapLaw) -> &'static str {
    match law {
        GapLaw::Exponential => "exponential",
        GapLaw::Uniform02 => "uniform02",
        GapLaw::Deterministic => "deterministic",
        GapLaw::Gamma { .. } => "gamma",
    }
}

/// Positions on [0, total length) obtained by accumulating gaps from
/// the anchor point.
fn positions_from_anchor(state: &ForwardState) -> Vec<f64> {
    let n = state.gaps.len();
    let mut pos = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 0..n {
        pos.push(acc);
        acc += state.gaps.gaps[(state.anchor + k) % n];
    }
    pos
}

/// Evenly spaced quantile points of an empirical CDF, for plotting.
fn cdf_polyline(samples: &mut [f64], k: usize) -> Vec<(f64, f64)> {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let k = k.min(n).max(2);
    (0..k)
        .map(|j| {
            let idx = j * (n - 1) / (k - 1);
            (samples[idx], (idx + 1) as f64 / n as f64)
        })
        .collect()
}

/// Forward dynamics: per-checkpoint gap and point tables for the
/// configured law, plus CDF overlay figures comparing the configured
/// law with a second reference law (exponential vs uniform).
pub fn cmd_forward(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let f = &cfg.forward;
    let law_a = f.law();
    let law_b = match f.gap_law {
        GapLawTag::Uniform02 => GapLaw::Exponential,
        _ => GapLaw::Uniform02,
    };

    let mut gaps_csv = Csv::new("replica,t,index,gap");
    let mut points_csv = Csv::new("replica,t,point_index,position,multiplicity");
    // pooled gaps per (arm, checkpoint) for the overlay figure
    let mut pooled: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); f.checkpoints.len()]; 2];

    for (arm, &law) in [law_a, law_b].iter().enumerate() {
        for r in 0..f.replicas {
            let stream = RngStream::new(cfg.seed, 100 * (arm as u64 + 1) + r as u64);
            let gaps = sample_gaps(f.n_points, law, stream.substream(0))?;
            let traj = run_forward(
                ForwardState::new(gaps),
                f.steps,
                f.algorithm,
                f.intensity_mode,
                stream.substream(1),
                false,
            )?;
            for (c, &t) in f.checkpoints.iter().enumerate() {
                let state = &traj.states[t as usize];
                pooled[arm][c].extend_from_slice(&state.gaps.gaps);
                if arm == 0 {
                    for (i, &g) in state.gaps.gaps.iter().enumerate() {
                        gaps_csv.row(&[&r, &t, &i, &g]);
                    }
                    let pos = positions_from_anchor(state);
                    for (i, (&p, &m)) in pos
                        .iter()
                        .zip(state.genealogy.multiplicity.iter())
                        .enumerate()
                    {
                        points_csv.row(&[&r, &t, &i, &p, &m]);
                    }
                }
            }
        }
    }
    out.write("forward_gaps.csv", &gaps_csv.finish())?;
    out.write("forward_points.csv", &points_csv.finish())?;

    let colors = ["#1f77b4", "#d62728"];
    for (c, &t) in f.checkpoints.iter().enumerate() {
        let mut sidecar = Csv::new("law,x,cdf");
        let mut x_hi = 0.0f64;
        let mut curves = Vec::new();
        for (arm, &law) in [law_a, law_b].iter().enumerate() {
            let pts = cdf_polyline(&mut pooled[arm][c], 400);
            if let Some(&(x, _)) = pts.last() {
                x_hi = x_hi.max(x);
            }
            for &(x, y) in &pts {
                sidecar.row(&[&law_name(law), &x, &y]);
            }
            curves.push((law_name(law), colors[arm], pts));
        }
        let mut plot = SvgPlot::new(
            &format!("gap CDF at t = {t}"),
            (0.0, x_hi.max(1e-12)),
            (0.0, 1.0),
        );
        for (name, color, pts) in &curves {
            plot.polyline(pts, color, name);
        }
        out.write(&format!("forward_cdf_t{t}.svg"), &plot.render())?;
        out.write(&format!("forward_cdf_t{t}.csv"), &sidecar.finish())?;
    }
    Ok(())
}

/// Genealogy figure: a small unrescaled run where every point's
/// trajectory is drawn until it merges into its survivor.
pub fn cmd_tree(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let tc = &cfg.tree;
    let stream = RngStream::new(cfg.seed, 300);
    let gaps = sample_gaps(tc.n_points, GapLaw::Exponential, stream.substream(0))?;
    let traj = run_forward(
        ForwardState::new(gaps),
        tc.steps,
        Algorithm::Alg1,
        IntensityMode::None,
        stream.substream(1),
        true,
    )?;
    let trace = traj
        .unrescaled
        .as_ref()
        .expect("unrescaled positions were requested");

    let mut csv = Csv::new("t,point_id,parent_id,position_unrescaled");
    let minus_one = -1i64;
    for (j, &p) in trace[0].positions.iter().enumerate() {
        csv.row(&[&0u32, &j, &minus_one, &p]);
    }
    let circumference = trace[0].circumference;
    let mut plot = SvgPlot::new(
        "merging trajectories",
        (0.0, circumference),
        (0.0, tc.steps as f64),
    );
    for (k, rec) in traj.merges.iter().enumerate() {
        let t = (k + 1) as u32;
        let prev = &trace[k];
        let cur = &trace[k + 1];
        for (j, &s) in rec.point_survivor.iter().enumerate() {
            csv.row(&[&t, &s, &j, &cur.positions[s]]);
            let (x0, x1) = (prev.positions[j], cur.positions[s]);
            // suppress the visual artifact of a segment crossing the
            // circular wrap-around
            if (x1 - x0).abs() <= circumference / 2.0 {
                plot.segment((x0, (t - 1) as f64), (x1, t as f64), "#2ca02c");
            }
        }
    }
    out.write("tree.csv", &csv.finish())?;
    out.write("tree.svg", &plot.render())?;
    Ok(())
}

/// Time-reversed weight dynamics: exact ledger, raw weights, step
/// CDFs, Laplace transforms, and a per-replica CDF figure.
pub fn cmd_reverse(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let rc = &cfg.reverse;
    let eta0 = WeightSequence::from_support(&rc.eta0, rc.variant)?;

    let mut ledger_csv = Csv::new("replica,t,total_weight,M_num,M_den,sum_sq_num,sum_sq_den");
    let mut weights_csv = Csv::new("replica,t,index,weight");
    let mut cdf_csv = Csv::new("replica,t,x,cumulative_mass");
    let mut laplace_csv = Csv::new("replica,t,s,value");

    for r in 0..rc.replicas {
        let stream = RngStream::new(cfg.seed, 400 + r as u64);
        let traj = run_reverse(eta0.clone(), rc.steps, stream)?;

        for row in &traj.ledger {
            ledger_csv.row(&[
                &r,
                &row.t,
                &row.total_weight,
                row.m.numer(),
                row.m.denom(),
                row.sum_sq.numer(),
                row.sum_sq.denom(),
            ]);
        }

        // figure: CDF curves at a handful of times, per replica
        let picks: Vec<u32> = {
            let step = (rc.steps / 4).max(1);
            (0..=rc.steps).step_by(step as usize).collect()
        };
        let mut plot_x_hi = 1e-12f64;
        let mut curves: Vec<(u32, Vec<(f64, f64)>)> = Vec::new();

        for state in &traj.states {
            let t = state.t;
            let unit_x = 0.75f64.powi(t as i32);
            let unit_m = 0.375f64.powi(t as i32);
            let mut running = 0u128;
            let mut curve = vec![(unit_x * state.offset as f64, 0.0)];
            for (k, &w) in state.weights.iter().enumerate() {
                let i = state.offset + k as i64;
                if w > 0 {
                    weights_csv.row(&[&r, &t, &i, &w]);
                }
                running += w as u128;
                let x = unit_x * i as f64;
                let fx = unit_m * running as f64;
                cdf_csv.row(&[&r, &t, &x, &fx]);
                // step function: horizontal run, then the jump
                curve.push((x, curve.last().unwrap().1));
                curve.push((x, fx));
            }
            if picks.contains(&t) {
                plot_x_hi = plot_x_hi.max(curve.last().unwrap().0);
                curves.push((t, curve));
            }
            let dist = StepDistribution {
                t,
                weights: state.weights.clone(),
            };
            for &s in &rc.s_grid {
                laplace_csv.row(&[&r, &t, &s, &laplace_transform(&dist, s)]);
            }
        }

        let y_hi = curves
            .iter()
            .flat_map(|(_, c)| c.iter().map(|p| p.1))
            .fold(1.0f64, f64::max);
        let mut plot = SvgPlot::new(
            &format!("cumulative step mass, replica {r}"),
            (0.0, plot_x_hi),
            (0.0, y_hi * 1.05),
        );
        let palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
        let mut sidecar = Csv::new("t,x,y");
        for (k, (t, curve)) in curves.iter().enumerate() {
            for &(x, y) in curve {
                sidecar.row(&[t, &x, &y]);
            }
            plot.polyline(curve, palette[k % palette.len()], &format!("t = {t}"));
        }
        out.write(&format!("reverse_cdf_r{r}.svg"), &plot.render())?;
        out.write(&format!("reverse_cdf_r{r}_plot.csv"), &sidecar.finish())?;
    }

    out.write("reverse_ledger.csv", &ledger_csv.finish())?;
    out.write("reverse_weights.csv", &weights_csv.finish())?;
    out.write("reverse_cdf.csv", &cdf_csv.finish())?;
    out.write("reverse_laplace.csv", &laplace_csv.finish())?;
    Ok(())
}

/// Duality: pair forward and reverse Monte Carlo estimates of the same
/// inner product at each requested time.
pub fn cmd_duality(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let dc = &cfg.duality;
    let law = crate::config::resolve_law(dc.gap_law, dc.gamma_shape);
    let eta0 = WeightSequence::from_support(
        &dc.eta0,
        clusterflow_core::ReverseVariant::Gap,
    )?;
    let mut csv = Csv::new("t,lhs,lhs_se,rhs,rhs_se,discrepancy,pooled_se,replicas");
    for &t in &dc.t_values {
        let stream = RngStream::new(cfg.seed, 500 + t as u64);
        let rep = duality_check(&eta0, law, t, dc.n_points, dc.replicas, stream)?;
        csv.row(&[
            &rep.t,
            &rep.lhs,
            &rep.lhs_se,
            &rep.rhs,
            &rep.rhs_se,
            &rep.discrepancy(),
            &rep.pooled_se(),
            &rep.replicas,
        ]);
    }
    out.write("duality.csv", &csv.finish())?;
    Ok(())
}

/// Run the verification suite, print one verdict line per check, write
/// the machine-readable verdict file, and gate the exit status on
/// assert-kind failures.
pub fn cmd_verify(
    cfg: &ExperimentConfig,
    out: &OutDir,
    filter: Option<&str>,
) -> Result<(), CliError> {
    let opts = cfg.verify_options();
    let results = run_all(&opts, filter)?;
    if results.is_empty() {
        return Err(CliError::Runtime(format!(
            "filter {:?} matched no checks",
            filter.unwrap_or("")
        )));
    }
    for res in &results {
        let status = if res.pass { "PASS" } else { "FAIL" };
        let kind = match res.kind {
            CheckKind::Assert => "assert",
            CheckKind::Report => "report",
        };
        println!(
            "{status} [{kind}] {}: statistic = {}, threshold = {}",
            res.check, res.statistic, res.threshold
        );
    }
    let json = serde_json::to_string_pretty(&results)
        .map_err(|e| CliError::Runtime(format!("verdict serialization failed: {e}")))?;
    out.write("verdict.json", &(json + "\n"))?;
    let mut csv = Csv::new("check,kind,statistic,threshold,pass");
    for res in &results {
        let kind = match res.kind {
            CheckKind::Assert => "assert",
            CheckKind::Report => "report",
        };
        csv.row(&[&res.check, &kind, &res.statistic, &res.threshold, &res.pass]);
    }
    out.write("verdict.csv", &csv.finish())?;

    let failed = results.iter().filter(|r| r.gate_failed()).count();
    let total_asserts = results
        .iter()
        .filter(|r| r.kind == CheckKind::Assert)
        .count();
    println!(
        "{} of {total_asserts} assertions passed ({} report-only lines)",
        total_asserts - failed,
        results.len() - total_asserts
    );
    if failed > 0 {
        return Err(CliError::GateFailed(failed));
    }
    Ok(())
}
