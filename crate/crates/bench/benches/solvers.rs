use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dicke_ngs::scf::{solve, ScfConfig, SeedStrategy};
use dicke_ngs::spin::dense::DenseOperator;
use dicke_ngs::spin::{ground_state, SolverConfig};
use dicke_ngs::ModelSpec;
use dicke_ngs_bench::{start_vector, xxz_couplings};

fn dense_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense-matvec");
    for n in [12, 16] {
        let op = DenseOperator::new(&xxz_couplings(n));
        let x = start_vector(n);
        let mut y = vec![0.0; x.len()];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| op.apply(black_box(&x), &mut y)));
    }
    group.finish();
}

fn lanczos(c: &mut Criterion) {
    let cfg = SolverConfig::dense();
    let couplings = xxz_couplings(12);
    c.bench_function("lanczos-n12", |b| b.iter(|| ground_state(black_box(&couplings), &cfg, None).unwrap()));
}

fn dmrg(c: &mut Criterion) {
    let cfg = SolverConfig { bond_dim: 32, sweeps: 4, ..SolverConfig::mps() };
    let couplings = xxz_couplings(16);
    let mut group = c.benchmark_group("dmrg");
    group.sample_size(10);
    group.bench_function("n16-chi32", |b| b.iter(|| ground_state(black_box(&couplings), &cfg, None).unwrap()));
    group.finish();
}

fn collective_scf(c: &mut Criterion) {
    let spec = ModelSpec::dicke(200, 1.0).unwrap();
    let mut group = c.benchmark_group("scf");
    group.sample_size(10);
    group.bench_function("dicke-n200-collective", |b| {
        b.iter(|| solve(&spec, &SeedStrategy::Superradiant, &ScfConfig::default(), &SolverConfig::collective()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, dense_matvec, lanczos, dmrg, collective_scf);
criterion_main!(benches);
