use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use finob_core::chain::{homology, ProjModule};
use finob_core::constructions::{laurent_window_check, realize, swindle_prefix};
use finob_core::corpus::mixed_members;
use finob_core::linalg::{smith_normal_form, IntMatrix, Mat};
use finob_core::ranicki::{build_instant, finiteness_obstruction};
use finob_core::ring::RingDescriptor;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> IntMatrix {
    let data = (0..n * n).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect();
    IntMatrix::from_vec(n, n, data)
}

fn ideal() -> ProjModule {
    let q = RingDescriptor::quadratic(-5).unwrap();
    let e = |a, b| q.quad(a, b).unwrap();
    ProjModule::new(Mat::from_rows(&q, vec![vec![e(-2, 0), e(-1, -1)], vec![e(1, -1), e(3, 0)]]).unwrap()).unwrap()
}

fn linalg(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ms: Vec<IntMatrix> = (0..16).map(|_| random_matrix(&mut rng, 12)).collect();
    c.bench_function("smith 12x12", |b| {
        b.iter(|| {
            for m in &ms {
                black_box(smith_normal_form(m));
            }
        })
    });
}

fn ranicki(c: &mut Criterion) {
    let members = mixed_members(3, 20);
    c.bench_function("build_instant corpus(20)", |b| {
        b.iter(|| {
            for m in &members {
                black_box(build_instant(&m.domination).unwrap());
            }
        })
    });
    let (_, d) = realize(&ideal(), 1).unwrap();
    c.bench_function("obstruction ideal class", |b| b.iter(|| black_box(finiteness_obstruction(&d, None).unwrap())));
}

fn constructions(c: &mut Criterion) {
    let z = RingDescriptor::Integers;
    let p = ProjModule::new(Mat::from_ints(&z, &[&[1, 0, 2], &[0, 1, -1], &[0, 0, 0]])).unwrap();
    c.bench_function("laurent window N=8", |b| b.iter(|| black_box(laurent_window_check(&p, 8).unwrap())));
    c.bench_function("swindle N=8 homology", |b| {
        b.iter(|| black_box(homology(&swindle_prefix(&p, 8).unwrap().complex).unwrap()))
    });
}

criterion_group!(benches, linalg, ranicki, constructions);
criterion_main!(benches);
