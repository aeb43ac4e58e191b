//! Hot-path benchmarks: one forward step, one reverse step, and the
//! two-sample KS statistic.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use clusterflow_core::analysis::{ks_distance, EmpiricalDistribution};
use clusterflow_core::forward::{forward_step, Algorithm, ForwardState, IntensityMode};
use clusterflow_core::laws::{sample_gaps, GapLaw};
use clusterflow_core::renewal::sample_stationary_trace;
use clusterflow_core::reverse::{reverse_step, run_reverse, WeightSequence};
use clusterflow_core::{RenewalLaw, ReverseVariant, RngStream};

fn bench_forward_step(c: &mut Criterion) {
    let stream = RngStream::new(1, 1);
    let gaps = sample_gaps(100_000, GapLaw::Exponential, stream.substream(0)).unwrap();
    let state = ForwardState::new(gaps);
    c.bench_function("forward_step_100k", |b| {
        let mut rng = stream.substream(1).rng();
        b.iter_batched(
            || state.clone(),
            |s| forward_step(&s, Algorithm::Alg1, IntensityMode::Theoretical, &mut rng),
            BatchSize::LargeInput,
        )
    });
}

fn bench_reverse_step(c: &mut Criterion) {
    let stream = RngStream::new(2, 1);
    let eta0 = WeightSequence::unit(0, ReverseVariant::Gap);
    let traj = run_reverse(eta0, 15, stream.substream(0)).unwrap();
    let eta = traj.final_state().clone();
    let (lo, hi) = eta.step_window().unwrap();
    c.bench_function("reverse_step_t15", |b| {
        let mut rng = stream.substream(1).rng();
        b.iter(|| {
            let trace = sample_stationary_trace(lo - 2, hi + 2, RenewalLaw::Rho, &mut rng).unwrap();
            reverse_step(&eta, &trace).unwrap()
        })
    });
}

fn bench_ks_distance(c: &mut Criterion) {
    let stream = RngStream::new(3, 1);
    let a = sample_gaps(10_000, GapLaw::Exponential, stream.substream(0)).unwrap();
    let b_ = sample_gaps(10_000, GapLaw::Uniform02, stream.substream(1)).unwrap();
    let da = EmpiricalDistribution::from_samples(a.gaps).unwrap();
    let db = EmpiricalDistribution::from_samples(b_.gaps).unwrap();
    c.bench_function("ks_distance_10k", |b| b.iter(|| ks_distance(&da, &db).unwrap()));
}

criterion_group!(kernels, bench_forward_step, bench_reverse_step, bench_ks_distance);
criterion_main!(kernels);
