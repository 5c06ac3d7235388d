use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use motpipe_bench::{grid_boxes, lanes_stream};
use motpipe_core::association::{build_cost_matrix, solve_dense, AssociationWeights};
use motpipe_core::fingerprint::{FingerprintProvider, HistogramEmbedder};
use motpipe_core::geometry::ImageGeometry;
use motpipe_core::synth::texture_patch;
use motpipe_core::tracker::{run_stream, Tracker, TrackerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bench_hungarian(c: &mut Criterion) {
    let mut group = c.benchmark_group("hungarian");
    for &n in &[10usize, 50, 100, 200] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..3.0)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| solve_dense(n, n, |r, col| entries[r * n + col]));
        });
    }
    group.finish();
}

fn bench_cost_matrix(c: &mut Criterion) {
    let geometry = ImageGeometry::new(1920.0, 1080.0);
    let weights = AssociationWeights::default();
    let embedder = HistogramEmbedder::new(100);
    let mut group = c.benchmark_group("cost_matrix");
    for &n in &[10usize, 50, 100] {
        let tracks = grid_boxes(n, 0.0);
        let dets = grid_boxes(n, 2.0);
        let patches: Vec<_> = (0..n).map(|i| texture_patch(i as u32)).collect();
        let fps = embedder.embed_batch(&patches).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| build_cost_matrix(&tracks, &fps, &dets, &fps, &weights, &geometry));
        });
    }
    group.finish();
}

fn bench_embed_batch(c: &mut Criterion) {
    let embedder = HistogramEmbedder::new(100);
    let mut group = c.benchmark_group("embed_batch");
    for &n in &[25usize, 100, 400] {
        let patches: Vec<_> = (0..n).map(|i| texture_patch(i as u32)).collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| embedder.embed_batch(&patches).unwrap());
        });
    }
    group.finish();
}

fn bench_end_to_end(c: &mut Criterion) {
    let mut group = c.benchmark_group("end_to_end");
    group.sample_size(10);
    for &n in &[10u32, 50] {
        let (spec, stream) = lanes_stream(n, 120);
        let geometry = ImageGeometry::new(spec.width as f64, spec.height as f64);
        group.throughput(Throughput::Elements(120));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let embedder = HistogramEmbedder::new(100);
                let mut tracker = Tracker::new(TrackerConfig::default(), geometry);
                run_stream(stream.clone(), Some(&embedder), &mut tracker).unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_hungarian, bench_cost_matrix, bench_embed_batch, bench_end_to_end);
criterion_main!(benches);
