use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairot::rng::stream;
use fairot::{build_repair_plan, solve_transport, wasserstein2_1d, EmpiricalMeasure, Group, LabeledDataset, Row};
use rand::Rng;

fn points(rng: &mut impl Rng, n: usize, dim: usize, shift: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0) + shift).collect()).collect()
}

fn dataset(n: usize, dim: usize) -> LabeledDataset {
    let mut rng = stream(7);
    let x0 = points(&mut rng, n / 3, dim, -0.5);
    let x1 = points(&mut rng, n - n / 3, dim, 0.5);
    let rows = x0
        .into_iter()
        .map(|x| Row { x, group: Group::Minority, label: None })
        .chain(x1.into_iter().map(|x| Row { x, group: Group::Default, label: None }))
        .collect();
    LabeledDataset::from_rows(rows).unwrap()
}

fn network_simplex(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_transport");
    group.sample_size(10);
    for n in [100, 300, 1000] {
        let mut rng = stream(n as u64);
        let mu0 = EmpiricalMeasure::uniform(points(&mut rng, n, 3, 0.0)).unwrap();
        let mu1 = EmpiricalMeasure::uniform(points(&mut rng, n + n / 2, 3, 0.3)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &(mu0, mu1), |b, (mu0, mu1)| {
            b.iter(|| solve_transport(mu0, mu1).unwrap())
        });
    }
    group.finish();
}

fn quantile_w2(c: &mut Criterion) {
    let mut rng = stream(1);
    let mu0 = EmpiricalMeasure::uniform(points(&mut rng, 100_000, 1, 0.0)).unwrap();
    let mu1 = EmpiricalMeasure::uniform(points(&mut rng, 70_000, 1, 1.0)).unwrap();
    c.bench_function("wasserstein2_1d/100k x 70k", |b| b.iter(|| wasserstein2_1d(&mu0, &mu1).unwrap()));
}

fn procedure_b(c: &mut Criterion) {
    let data = dataset(1500, 5);
    let mut group = c.benchmark_group("repair");
    group.sample_size(10);
    group.bench_function("plan+total_b/1500x5", |b| b.iter(|| build_repair_plan(&data).unwrap().total_b()));
    group.finish();
}

criterion_group!(benches, network_simplex, quantile_w2, procedure_b);
criterion_main!(benches);
