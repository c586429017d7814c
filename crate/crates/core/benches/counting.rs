use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use dotprods::generators::{gen_equally_spaced_circle, gen_geometric_line, gen_random_disk};
use dotprods::{count_distinct, Configuration, CountOptions, Mode, Parallelism, Quantization, Scalar};

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn bench_family(c: &mut Criterion, name: &str, quantization: Quantization, instances: &[(usize, Configuration)]) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    for (n, cfg) in instances {
        group.throughput(Throughput::Elements((n * n) as u64));
        for (label, parallelism) in MODES {
            let opts = CountOptions::new(quantization).with_parallelism(parallelism);
            group.bench_with_input(BenchmarkId::new(label, n), cfg, |b, cfg| {
                b.iter(|| count_distinct(cfg, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn counting(c: &mut Criterion) {
    let sizes = [250, 1000, 2000];
    let geometric: Vec<_> = sizes
        .iter()
        .map(|&n| {
            (
                n,
                gen_geometric_line(&Scalar::ratio(7, 3), &Scalar::ratio(3, 2), n).unwrap(),
            )
        })
        .collect();
    bench_family(c, "geometric_line_exact", Quantization::Exact, &geometric);

    let lattice: Vec<_> = sizes
        .iter()
        .map(|&n| (n, gen_random_disk(n, 1, &Scalar::int(1), Mode::Exact).unwrap()))
        .collect();
    bench_family(c, "random_disk_exact", Quantization::Exact, &lattice);

    let circle: Vec<_> = sizes
        .iter()
        .map(|&n| (n, gen_equally_spaced_circle(n, &Scalar::int(1), 0.0).unwrap()))
        .collect();
    bench_family(c, "circle_grid", Quantization::Grid(None), &circle);
}

criterion_group!(benches, counting);
criterion_main!(benches);
