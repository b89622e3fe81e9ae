//! Sequential versus pooled execution on the same workloads.
//!
//! `cargo bench -p regionsynth-core` compares 1 job against 2, 4 and 8 jobs;
//! built with `--no-default-features` every executor is sequential, which
//! gives the baseline for the fallback path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use regionsynth::exec::Executor;
use regionsynth::fixtures::running;
use regionsynth::reductions::{example_nine_pairs, generate_instance, HittingSetInstance, ReductionFamily};
use regionsynth::removal::RemovalMode;
use regionsynth::repair::{min_removal, RepairOptions, Target};
use regionsynth::separation::{check_property, CheckOptions, Property};

const JOBS: [usize; 4] = [1, 2, 4, 8];

fn label(jobs: usize) -> String {
    let executor = Executor::new(jobs);
    if executor.is_parallel() {
        format!("rayon-{jobs}")
    } else {
        format!("sequential-{jobs}")
    }
}

fn separation(c: &mut Criterion) {
    let nine = example_nine_pairs();
    let (gadgets, _) = generate_instance(&nine, ReductionFamily::EdgeLangReal).unwrap();
    let mut group = c.benchmark_group("check-both-nine-pairs");
    group.sample_size(10);
    for jobs in JOBS {
        let options = CheckOptions {
            shrink: false,
            executor: Executor::new(jobs),
        };
        group.bench_with_input(BenchmarkId::from_parameter(label(jobs)), &options, |b, o| {
            b.iter(|| check_property(&gadgets, Property::Both, o).is_ok())
        });
    }
    group.finish();
}

fn exact_repair(c: &mut Criterion) {
    let triangle = HittingSetInstance::new(
        &["X0", "X1", "X2"],
        &[vec!["X0", "X1"], vec!["X0", "X2"], vec!["X1", "X2"]],
        2,
    )
    .unwrap();
    let workloads = [
        ("running-edge-language", running(), RemovalMode::Edge, Target::Language),
        (
            "triangle-event",
            generate_instance(&triangle, ReductionFamily::EventAll).unwrap().0,
            RemovalMode::Event,
            Target::Realization,
        ),
        (
            "triangle-state-embedding",
            generate_instance(&triangle, ReductionFamily::StateEmb).unwrap().0,
            RemovalMode::State,
            Target::Embedding,
        ),
    ];
    for (name, lts, mode, target) in workloads {
        let mut group = c.benchmark_group(format!("min-removal-{name}"));
        group.sample_size(10);
        for jobs in JOBS {
            let options = RepairOptions {
                executor: Executor::new(jobs),
                shrink: false,
            };
            group.bench_with_input(BenchmarkId::from_parameter(label(jobs)), &options, |b, o| {
                b.iter(|| min_removal(&lts, mode, target, 3, o).map(|r| r.k()))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, separation, exact_repair);
criterion_main!(benches);
