use criterion::{black_box, criterion_group, criterion_main, Criterion};
use owc_core::channel::{SpectrumAnalyzer, Tracer};
use owc_core::scene::builtin_scenario;
use owc_core::{Scene, TraceParams};

fn trace(c: &mut Criterion) {
    let scene = Scene::build(builtin_scenario("office").unwrap()).unwrap();
    let params = TraceParams::default();
    let mut g = c.benchmark_group("trace");
    g.sample_size(10);
    g.bench_function("tracer_setup/office", |b| {
        b.iter(|| Tracer::new(black_box(&scene), &params).unwrap())
    });
    let tracer = Tracer::new(&scene, &params).unwrap();
    g.bench_function("receiver/office", |b| {
        b.iter(|| tracer.trace_receiver(black_box(0), 0).unwrap())
    });
    g.finish();

    let ir = tracer.trace_receiver(0, 0).unwrap().swap_remove(0).ir;
    let analyzer = SpectrumAnalyzer::new(params.fft_len);
    c.bench_function("bandwidth_3db/2^20", |b| {
        b.iter(|| analyzer.bandwidth_3db(black_box(&ir)).unwrap())
    });
}

criterion_group!(benches, trace);
criterion_main!(benches);
