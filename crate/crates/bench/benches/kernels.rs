use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use mqslab::metrics::{DistanceModel, SweepOptions};
use mqslab::states::{self, amplified_pole_state};
use mqslab::{
    apply_loss, fidelity, lift_mode_unitary, BasisLabel, DensityOperator, Family, GainParams, LossParams, ModeUnitary,
    Pole, TwoModeSpace,
};

const TAIL: f64 = 1e-8;

fn pole_pair(g: f64) -> (DensityOperator, DensityOperator) {
    let gain = GainParams::new(g).unwrap();
    let space = TwoModeSpace::new(states::pole_cutoff(gain, TAIL).unwrap(), BasisLabel::hv());
    let rho = |p| {
        DensityOperator::from_pure(
            &amplified_pole_state(gain, p, &space, TAIL)
                .unwrap()
                .normalized()
                .unwrap(),
        )
        .unwrap()
    };
    (rho(Pole::H), rho(Pole::V))
}

fn loss(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_loss");
    for g in [0.4, 0.8] {
        let (h, _) = pole_pair(g);
        group.bench_with_input(BenchmarkId::new("pole", g), &h, |b, h| {
            b.iter(|| apply_loss(black_box(h), LossParams::new(0.3).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn fidelity_lossy(c: &mut Criterion) {
    let mut group = c.benchmark_group("fidelity");
    for g in [0.4, 0.8] {
        let (h, v) = pole_pair(g);
        let r = LossParams::new(0.3).unwrap();
        let (a, b) = (apply_loss(&h, r).unwrap(), apply_loss(&v, r).unwrap());
        group.bench_with_input(BenchmarkId::new("pole", g), &(a, b), |bench, (a, b)| {
            // rebuilt each time so the cached spectrum of `a` is not reused
            let fresh = || DensityOperator::from_matrix(a.space(), &a.to_dense()).unwrap();
            bench.iter_batched(fresh, |a| fidelity(&a, b).unwrap(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn lift(c: &mut Criterion) {
    let mut group = c.benchmark_group("lift_mode_unitary");
    for cutoff in [10, 30] {
        let space = TwoModeSpace::new(cutoff, BasisLabel::hv());
        let u = ModeUnitary::from_angles(0.7, 0.3, 1.1);
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &space, |b, space| {
            b.iter(|| lift_mode_unitary(black_box(space), u))
        });
    }
    group.finish();
}

fn sweep_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance_at");
    let opts = SweepOptions::default();
    for (family, g) in [
        (Family::EquatorialMqs, 0.8),
        (Family::EquatorialMqs, 1.1),
        (Family::PolePair, 0.8),
    ] {
        let model = DistanceModel::new(family, g, &opts).unwrap();
        group.bench_with_input(BenchmarkId::new(family.name(), g), &model, |b, m| {
            b.iter(|| m.at(black_box(1.0)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, loss, fidelity_lossy, lift, sweep_point);
criterion_main!(benches);
