use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use defectlab::{predefined_pipeline, LearnerSpec};
use defectlab_bench::synthetic;

fn fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    let specs = [
        ("knn", LearnerSpec::by_name("knn").unwrap()),
        ("decision_tree", LearnerSpec::by_name("decision_tree").unwrap()),
        ("svm", LearnerSpec::by_name("svm").unwrap()),
        ("random_forest", LearnerSpec::by_name("random_forest").unwrap()),
        ("cm1_default", LearnerSpec::Stacked(predefined_pipeline("cm1_default").unwrap())),
    ];
    for n in [500, 2000] {
        let data = synthetic(n, 21, 1);
        for (name, spec) in &specs {
            group.bench_with_input(BenchmarkId::new(*name, n), &data, |b, d| b.iter(|| spec.fit(d).unwrap()));
        }
    }
    group.finish();
}

fn predict(c: &mut Criterion) {
    let train = synthetic(2000, 21, 2);
    let probe = synthetic(200, 21, 3);
    let mut group = c.benchmark_group("predict_200");
    for name in ["knn", "decision_tree", "svm", "random_forest"] {
        let model = LearnerSpec::by_name(name).unwrap().fit(&train).unwrap();
        group.bench_function(name, |b| b.iter(|| model.predict_dataset(&probe)));
    }
    group.finish();
}

criterion_group!(benches, fit, predict);
criterion_main!(benches);
