mod common;

use common::write_corpus;
use submix_core::baselines::{
    em_budgets, epm_global_indices, run_baseline, BaselineConfig, BaselineStrategy,
};
use submix_core::formats::{load_manifest, Strategy};
use submix_core::seed::{derive_seed, rng_for, shuffle_prefix};
use submix_core::{DatasetManifest, Error};

fn corpus(dir: &std::path::Path, sizes: &[usize]) -> DatasetManifest {
    let names: Vec<String> = (0..sizes.len()).map(|i| format!("t{i}")).collect();
    let tasks: Vec<_> = names
        .iter()
        .zip(sizes)
        .map(|(id, &n)| {
            let rows = (0..n).map(|j| vec![1.0f32, j as f32]).collect();
            let tags = (0..n)
                .map(|j| Some(if j % 2 == 0 { "a" } else { "b" }))
                .collect();
            (id.as_str(), rows, tags)
        })
        .collect();
    load_manifest(write_corpus(dir, &tasks)).unwrap()
}

fn run(
    m: &DatasetManifest,
    strategy: BaselineStrategy,
    budget: u64,
    seed: u64,
) -> submix_core::MixtureManifest {
    run_baseline(
        m,
        &BaselineConfig {
            strategy,
            instance_budget: budget,
            seed,
        },
    )
    .unwrap()
}

#[test]
fn em_budget_examples() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        em_budgets(&corpus(dir.path(), &[50, 50]), 10).unwrap(),
        [5, 5]
    );
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        em_budgets(&corpus(dir.path(), &[50, 50, 50]), 10).unwrap(),
        [4, 3, 3]
    );
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        em_budgets(&corpus(dir.path(), &[2, 50, 50]), 12).unwrap(),
        [2, 5, 5]
    );
}

#[test]
fn em_rows_are_seeded_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(dir.path(), &[20, 30]);
    let out = run(&m, BaselineStrategy::Em, 10, 4);
    assert_eq!(out.strategy, Strategy::Em);
    for t in &out.tasks {
        let task = m.tasks.iter().find(|r| r.task_id == t.task_id).unwrap();
        let mut expect = shuffle_prefix(
            &mut rng_for(derive_seed(4, &t.task_id, "")),
            task.instance_count,
            5,
        );
        expect.sort_unstable();
        let mut got: Vec<usize> = t
            .templates
            .iter()
            .flat_map(|s| s.selected.clone())
            .collect();
        got.sort_unstable();
        assert_eq!(got, expect);
        assert!(t.gain.is_none() && t.weight.is_none());
    }
}

#[test]
fn epm_full_budget_takes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(dir.path(), &[7, 3, 5]);
    let out = run(&m, BaselineStrategy::Epm, 15, 1);
    assert_eq!(out.total_selected, 15);
    for (t, r) in out.tasks.iter().zip(&m.tasks) {
        assert_eq!(t.budget as usize, r.instance_count);
        let a = &t.templates[0];
        assert_eq!(a.template, "a");
        assert!(a.selected.iter().all(|j| j % 2 == 0));
    }
}

#[test]
fn epm_single_task_is_the_seeded_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(dir.path(), &[40]);
    let out = run(&m, BaselineStrategy::Epm, 12, 99);
    let mut expect = epm_global_indices(&m, 12, 99).unwrap();
    expect.sort_unstable();
    let mut got: Vec<usize> = out.tasks[0]
        .templates
        .iter()
        .flat_map(|s| s.selected.clone())
        .collect();
    got.sort_unstable();
    assert_eq!(got, expect);
}

#[test]
fn epm_depends_only_on_the_pooled_order() {
    // splitting one pool into tasks differently leaves the global draw intact
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = corpus(a.path(), &[10, 20]);
    let mb = corpus(b.path(), &[25, 5]);
    assert_eq!(
        epm_global_indices(&ma, 9, 3).unwrap(),
        epm_global_indices(&mb, 9, 3).unwrap()
    );
}

#[test]
fn baselines_are_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(dir.path(), &[30, 30, 30]);
    for s in [BaselineStrategy::Epm, BaselineStrategy::Em] {
        let a = run(&m, s, 20, 5).to_canonical_json();
        assert_eq!(a, run(&m, s, 20, 5).to_canonical_json());
        assert_ne!(a, run(&m, s, 20, 6).to_canonical_json());
    }
}

#[test]
fn budget_errors() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(dir.path(), &[3, 4]);
    for s in [BaselineStrategy::Epm, BaselineStrategy::Em] {
        let cfg = BaselineConfig {
            strategy: s,
            instance_budget: 8,
            seed: 0,
        };
        assert!(matches!(
            run_baseline(&m, &cfg),
            Err(Error::BudgetExceedsCorpus {
                requested: 8,
                available: 7
            })
        ));
        let zero = BaselineConfig {
            instance_budget: 0,
            ..cfg
        };
        assert!(matches!(
            run_baseline(&m, &zero),
            Err(Error::InvalidConfig(_))
        ));
    }
}
