use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coxperc::{
    build_clusters, make_environment, sample_marked, EnvironmentSpec, RadiusLaw, Seed, Window,
};

fn bench_sample(c: &mut Criterion) {
    let law = RadiusLaw::Constant { r: 1.0 };
    let mut group = c.benchmark_group("sample_marked");
    for (name, spec) in [
        ("homogeneous", EnvironmentSpec::Homogeneous),
        (
            "shot_noise",
            EnvironmentSpec::ShotNoise {
                height: 1.0,
                support_radius: 1.0,
                mu: 1.0,
            },
        ),
        (
            "boolean_count",
            EnvironmentSpec::BooleanCount {
                mu: 1.0,
                radius_law: RadiusLaw::Pareto {
                    scale: 1.0,
                    tail: 4.0,
                },
            },
        ),
    ] {
        let window = Window::new(2, 32.0, spec.required_margin().max(1.0)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &spec, |b, spec| {
            let mut i = 0u64;
            b.iter(|| {
                i += 1;
                let env = make_environment(spec, &window, Seed(i)).unwrap();
                sample_marked(&env, 0.5, &law, Seed(i).child(1)).unwrap()
            });
        });
    }
    group.finish();
}

fn bench_cluster(c: &mut Criterion) {
    let law = RadiusLaw::Constant { r: 1.0 };
    let window = Window::new(2, 64.0, 1.0).unwrap();
    let env = make_environment(&EnvironmentSpec::Homogeneous, &window, Seed(7)).unwrap();
    let mps = sample_marked(&env, 0.6, &law, Seed(8)).unwrap();
    c.bench_function("build_clusters_10k", |b| {
        b.iter(|| build_clusters(&mps.points, &mps.radii))
    });
}

criterion_group!(benches, bench_sample, bench_cluster);
criterion_main!(benches);
