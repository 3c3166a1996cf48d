use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use tracelab_core::cipher::Block128;
use tracelab_core::cpa::{build_hypotheses, pearson_correlate_with, SelectionModel};
use tracelab_core::leakage::{random_plaintexts, synthesize_trace_set_with, ScheduleProfile, SynthConfig};
use tracelab_core::Execution;

const PATHS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn config() -> SynthConfig {
    SynthConfig::new(ScheduleProfile::AES_FULL, Block128::from_hex("677689798898a65765f765775b87688c").unwrap())
}

fn correlation(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlate_byte");
    for n in [500usize, 4000] {
        let ts = synthesize_trace_set_with(&config(), &random_plaintexts(1, n), 1, Execution::Parallel).unwrap();
        let h = build_hypotheses(&ts.traces, &SelectionModel::aes_sbox(), 0).unwrap();
        group.throughput(Throughput::Elements((n * ts.samples_per_trace() * 256) as u64));
        for (name, exec) in PATHS {
            group.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
                b.iter(|| pearson_correlate_with(black_box(&ts.traces), &h, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize_trace_set");
    let mut cfg = config();
    cfg.countermeasures.shuffle_sbox = true;
    let pts = random_plaintexts(2, 2000);
    group.throughput(Throughput::Elements(pts.len() as u64));
    for (name, exec) in PATHS {
        group.bench_function(name, |b| {
            b.iter(|| synthesize_trace_set_with(&cfg, black_box(&pts), 2, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = correlation, synthesis
}
criterion_main!(benches);
