//! Sequential vs parallel multistart. Without the `parallel` feature both
//! groups run on the calling thread.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hermitia::separability::{separable_search, SepSearch};
use hermitia::spectral::{herm_eigenpairs, EigenSearch};
use hermitia::{Execution, HermitianTensor, Shape, Tolerances, VectorTuple};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn eigenpairs(c: &mut Criterion) {
    let tol = Tolerances::default();
    let h = HermitianTensor::random(Shape::new(vec![3, 3, 3]).unwrap(), 1);
    let mut g = c.benchmark_group("herm_eigenpairs");
    for (name, exec) in MODES {
        let search = EigenSearch {
            starts: 64,
            exec,
            ..EigenSearch::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| herm_eigenpairs(black_box(&h), &search, &tol))
        });
    }
    g.finish();
}

fn separable(c: &mut Criterion) {
    let tol = Tolerances::default();
    let s = Shape::new(vec![2, 3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut a = HermitianTensor::zeros(s.clone());
    for _ in 0..3 {
        let x = VectorTuple::random_unit(&s, &mut rng, false);
        a = a.add(&HermitianTensor::rank1(1.0, &x).unwrap()).unwrap();
    }
    let mut g = c.benchmark_group("separable_search");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SepSearch {
            starts: 32,
            exec,
            ..SepSearch::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| separable_search(black_box(&a), 3, &opts, &tol).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, eigenpairs, separable);
criterion_main!(benches);
