use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use afdm_core::channel::ChannelModel;
use afdm_core::harness::{Execution, FrameRunner, Scheme, SweepSpec};
use afdm_core::params::{build_config, Constellation};

fn sweep_point(c: &mut Criterion) {
    let cfg = build_config(4, 2, 3, 512, Constellation::Qpsk)
        .unwrap()
        .with_bandwidth(1.36e6)
        .unwrap();
    let model = ChannelModel::EvaTaps;
    let runner = FrameRunner::new(Scheme::ZpAfdm, &cfg, &model).unwrap();
    let spec = SweepSpec {
        min_bits: 128 * runner.bits_per_frame() as u64,
        min_errors: 0,
        max_frames: 128,
        ..SweepSpec::default()
    };
    let mut group = c.benchmark_group("zp_afdm_128_frames");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| runner.run_point(Scheme::ZpAfdm, cfg.chi, 15.0, &spec, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_point);
criterion_main!(benches);
