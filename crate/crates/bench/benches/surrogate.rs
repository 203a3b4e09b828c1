use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mixed_ego::gp::Reduction;
use mixed_ego::metrics::igd_plus;
use mixed_ego::problems::{analytic, multiobjective};
use mixed_ego::{CategoricalKind, DesignSpace, FitOptions, GpModel, Kernel, KernelOptions, Variable};

fn mixed_space() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("x1", 0.0, 1.0),
        Variable::continuous("x2", 0.0, 1.0),
        Variable::integer("z", 0, 5),
        Variable::categorical_n("c", 5),
    ])
    .unwrap()
}

fn kernel_matrix(c: &mut Criterion) {
    let space = mixed_space();
    let points = space.lhs(100, 1).unwrap().points;
    let mut group = c.benchmark_group("kernel_matrix_n100");
    for (kind, name) in [(CategoricalKind::Gd, "gd"), (CategoricalKind::Cr, "cr"), (CategoricalKind::Ehh, "ehh"), (CategoricalKind::Hh, "hh")] {
        let kernel = Kernel::new(&space, KernelOptions::default().with_categorical(kind)).unwrap();
        let theta = kernel.default_theta();
        let table = kernel.pair_table(&points).unwrap();
        group.bench_function(name, |b| b.iter(|| kernel.prepare(black_box(&theta), false).unwrap().matrix(&table)));
    }
    group.finish();
}

fn gp_fit(c: &mut Criterion) {
    let p = analytic::mb(10).unwrap();
    let mut group = c.benchmark_group("gp_fit_mb10");
    group.sample_size(10);
    for n in [20, 50] {
        let points = p.space.lhs(n, 2).unwrap().points;
        let y: Vec<f64> = points.iter().map(|x| p.evaluate(x).unwrap().f[0]).collect();
        for (reduction, name) in [(Reduction::None, "full"), (Reduction::Kpls(2), "kpls2")] {
            let opts = FitOptions {
                reduction,
                n_starts: 3,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| b.iter(|| GpModel::fit(&p.space, &points, &y, &opts).unwrap()));
        }
    }
    group.finish();
}

fn gp_predict(c: &mut Criterion) {
    let space = mixed_space();
    let points = space.lhs(60, 3).unwrap().points;
    let y: Vec<f64> = points.iter().map(|x| x.real(0).sin() + x.real(1) * x.real(2) + x.level(3) as f64).collect();
    let model = GpModel::fit(&space, &points, &y, &FitOptions::default()).unwrap();
    let queries = space.lhs(1000, 4).unwrap().points;
    c.bench_function("gp_predict_1000", |b| b.iter(|| model.predict_many(black_box(&queries)).unwrap()));
}

fn igd(c: &mut Criterion) {
    let front = multiobjective::zdt_front(1, 500);
    let approx: Vec<Vec<f64>> = front.iter().step_by(5).map(|p| vec![p[0] + 0.01, p[1] + 0.02]).collect();
    c.bench_function("igd_plus_100x500", |b| b.iter(|| igd_plus(black_box(&approx), &front, false).unwrap()));
}

criterion_group!(benches, kernel_matrix, gp_fit, gp_predict, igd);
criterion_main!(benches);
