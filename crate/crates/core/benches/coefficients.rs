use std::hint::black_box;

use boundary_reps::boundary_measure::{quasi_regular_coefficient_with, CylinderMeasure};
use boundary_reps::multrep::{coefficient_with, unit_forms, Backend, MultVector, SystemWithForms};
use boundary_reps::par::Execution;
use boundary_reps::system::{normalize, MatrixSystem};
use boundary_reps::words::{Alphabet, Word};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(len: usize) -> (MultVector, Word) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let al = Alphabet::standard(2);
    let raw = MatrixSystem::random(al.clone(), vec![3, 2, 3, 2], &mut rng);
    let n = normalize(&raw).unwrap();
    let sys = SystemWithForms::new(n.system, unit_forms(&n.forms)).unwrap().shared();
    let f = MultVector::random(sys, 2, &mut rng).unwrap();
    let mut letters = Vec::with_capacity(len);
    while letters.len() < len {
        let l = rng.random_range(0..al.len());
        if letters.last().map(|&p| al.inverse(p)) != Some(l) {
            letters.push(l);
        }
    }
    (f, Word::from_letters_unchecked(letters))
}

fn brute(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute");
    group.sample_size(10);
    for len in [4, 7, 9] {
        let (f, x) = setup(len);
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, len), &x, |b, x| {
                b.iter(|| coefficient_with(black_box(x), &f, &f, Backend::Brute, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn fast(c: &mut Criterion) {
    let mut group = c.benchmark_group("fast");
    for len in [4, 9, 16] {
        let (f, x) = setup(len);
        group.bench_with_input(BenchmarkId::from_parameter(len), &x, |b, x| {
            b.iter(|| coefficient_with(black_box(x), &f, &f, Backend::Fast, Execution::Sequential).unwrap())
        });
    }
    group.finish();
}

fn quasi_regular(c: &mut Criterion) {
    let mut group = c.benchmark_group("quasi_regular");
    group.sample_size(10);
    let (f, x) = setup(3);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mu = CylinderMeasure::spectral(&f);
                quasi_regular_coefficient_with(&mu, black_box(&x), 8, exec).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, brute, fast, quasi_regular);
criterion_main!(benches);
