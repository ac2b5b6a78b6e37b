//! Sequential vs rayon execution of the expensive stages. Built without the
//! `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use soundtexture::signal_io::generate_white_noise;
use soundtexture::texture::texture_maps;
use soundtexture::{Execution, Pipeline, RunConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn setup() -> (Pipeline, soundtexture::signal_io::Signal) {
    let mut cfg = RunConfig::default();
    cfg.noise.duration_s = 20.0;
    let pipeline = Pipeline::new(cfg, Execution::Parallel).unwrap();
    let spec = pipeline.config().noise.with_seed(42).with_duration(3.0);
    let signal = generate_white_noise(&spec, 44_100).unwrap();
    (pipeline, signal)
}

fn filterbank(c: &mut Criterion) {
    let (pipeline, signal) = setup();
    let mut group = c.benchmark_group("cochleagram_3s");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| pipeline.filterbank().cochleagram(black_box(&signal), exec).unwrap())
        });
    }
    group.finish();
}

fn texture(c: &mut Criterion) {
    let (pipeline, signal) = setup();
    let profile = pipeline.calibrate().unwrap();
    let cg = pipeline.cochleagram(&signal, "bench").unwrap();
    let cfg = pipeline.config();
    let mut group = c.benchmark_group("texture_maps_3s");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| texture_maps(black_box(&cg), &profile, &cfg.tract, cfg.offset_mode, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, filterbank, texture);
criterion_main!(benches);
