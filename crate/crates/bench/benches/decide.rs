use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use glpstar_bench::decide_corpus;
use glpstar_core::decide::{decide_with, DecideOptions, Engine};
use glpstar_core::oracle::{brute_force_countermodel, SearchBudget};
use glpstar_core::testgen::{random_formula, FormulaShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide");
    for (text, phi, system) in decide_corpus() {
        group.bench_with_input(BenchmarkId::new(system.name(), &text), &phi, |b, phi| {
            b.iter(|| decide_with(system, black_box(phi), &DecideOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn engines(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shape = FormulaShape::default();
    let formulas: Vec<_> = (0..20).map(|_| random_formula(&mut rng, &shape)).collect();
    let mut group = c.benchmark_group("engines");
    group.sample_size(10);
    for (name, engine) in [("lazy", Engine::Lazy), ("full", Engine::Full)] {
        let opts = DecideOptions { engine, ..Default::default() };
        group.bench_function(name, |b| {
            b.iter(|| {
                for phi in &formulas {
                    let _ = decide_with(glpstar_core::SystemId::Jstar, black_box(phi), &opts);
                }
            })
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let phi = glpstar_core::parse_formula("<1>p -> <0>p").unwrap();
    let budget = SearchBudget { max_worlds: 3, ..SearchBudget::for_formula(&phi) };
    c.bench_function("oracle/3-worlds", |b| b.iter(|| brute_force_countermodel(black_box(&phi), &budget)));
}

criterion_group!(benches, corpus, engines, oracle);
criterion_main!(benches);
