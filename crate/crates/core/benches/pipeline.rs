use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use respwin::classifier::{loocv_evaluate_with, KnnConfig, ZScoreMode};
use respwin::experiment::{
    default_window_sizes, extract_window_features, generate_synthetic_corpus, run_sweep_with,
    SweepConfig, SweepOptions,
};
use respwin::{load_manifest, ClassLabel, Execution, FeatureVector, MfccConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn random_features(n: usize, dim: usize) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..n)
        .map(|i| {
            let label = if i % 3 == 0 {
                ClassLabel::Normal
            } else {
                ClassLabel::Abnormal
            };
            let shift = if label == ClassLabel::Normal {
                0.0
            } else {
                0.5
            };
            let values = (0..dim).map(|_| rng.gen_range(-1.0..1.0) + shift).collect();
            FeatureVector::new(values, label, format!("r{i:03}"))
        })
        .collect()
}

fn bench_loocv(c: &mut Criterion) {
    let data = random_features(127, 84);
    let mut group = c.benchmark_group("loocv_127x84");
    for (name, exec) in MODES {
        for mode in [ZScoreMode::Global, ZScoreMode::PerFold] {
            group.bench_with_input(
                BenchmarkId::new(name, format!("{mode:?}")),
                &mode,
                |b, &mode| {
                    b.iter(|| {
                        loocv_evaluate_with(&data, &KnnConfig::default(), mode, exec).unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

fn bench_corpus(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let manifest = generate_synthetic_corpus(8, 8, 1, dir.path()).unwrap();
    let dataset = load_manifest(&manifest).unwrap();
    let sizes = default_window_sizes();
    let mfcc = MfccConfig::default();

    let mut group = c.benchmark_group("corpus_16_clips");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("features", name), |b| {
            b.iter(|| {
                extract_window_features(
                    &dataset,
                    &sizes,
                    0.0,
                    &mfcc,
                    SweepOptions { cache: None, exec },
                )
                .unwrap()
            })
        });
        let config = SweepConfig {
            record_timings: false,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::new("sweep", name), |b| {
            b.iter(|| {
                run_sweep_with(&dataset, &config, SweepOptions { cache: None, exec }).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_loocv, bench_corpus);
criterion_main!(benches);
