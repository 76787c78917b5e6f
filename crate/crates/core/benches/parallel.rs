use std::hint::black_box;

use actiscreen::eval::run_cv5;
use actiscreen::features::{build_dataset, build_dataset_from_hours, hours_for_all};
use actiscreen::model::fit_forest;
use actiscreen::synth::{cohort, CohortSpec};
use actiscreen::{Exec, ForestConfig, HourlyScaling, ScalerKind};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn bench_forest(c: &mut Criterion) {
    let subjects = cohort(&CohortSpec::default(), 1);
    let data = build_dataset(&subjects, ScalerKind::Robust).unwrap();
    let mut group = c.benchmark_group("fit_forest");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = ForestConfig {
            exec,
            ..ForestConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, cfg| {
            b.iter(|| fit_forest(black_box(&data), cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_cv5(c: &mut Criterion) {
    let subjects = cohort(&CohortSpec::default(), 2);
    let data = build_dataset(&subjects, ScalerKind::Robust).unwrap();
    let mut group = c.benchmark_group("run_cv5");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = ForestConfig {
            exec,
            ..ForestConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, cfg| {
            b.iter(|| run_cv5(black_box(&data), cfg, 42).unwrap())
        });
    }
    group.finish();
}

fn bench_features(c: &mut Criterion) {
    let subjects = cohort(&CohortSpec::default(), 3);
    let mut group = c.benchmark_group("hourly_features");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let hours = hours_for_all(black_box(&subjects), exec);
                build_dataset_from_hours(&hours, HourlyScaling::Fit(ScalerKind::Robust), exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_forest, bench_cv5, bench_features);
criterion_main!(benches);
