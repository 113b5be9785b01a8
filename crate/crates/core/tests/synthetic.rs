use gradecast::data::{AssessmentRecord, DatasetView, Feature, Maxima};
use gradecast::eda::{correlation_matrix, gradient_map, labeled_correlations, DEFAULT_MAP_BINS};
use gradecast::ingest::{generate_synthetic, SynthSpec};

fn reference_cohort() -> Vec<AssessmentRecord> {
    generate_synthetic(&SynthSpec::default()).unwrap()
}

#[test]
fn reference_cohort_matches_target_correlations() {
    let recs = reference_cohort();
    assert_eq!(recs.len(), 1000);
    let view = DatasetView::select("all", &recs, &Feature::ALL).unwrap();
    let corr = correlation_matrix(&view).unwrap();
    for (f, target) in [
        (Feature::T1, 0.69),
        (Feature::T2, 0.64),
        (Feature::Mte, 0.88),
        (Feature::Ete, 0.96),
    ] {
        let r = corr.get(f.name(), "total").unwrap();
        assert!((r - target).abs() <= 0.05, "{f}: {r} vs {target}");
    }
    let ete = corr.get("ete", "total").unwrap();
    assert!((0.91..=1.0).contains(&ete));
}

#[test]
fn mte_ete_map_trends_more_than_t1_t2() {
    let recs = reference_cohort();
    let tests = gradient_map(&recs, Feature::T1, Feature::T2, DEFAULT_MAP_BINS).unwrap();
    let exams = gradient_map(&recs, Feature::Mte, Feature::Ete, DEFAULT_MAP_BINS).unwrap();
    let (a, b) = (tests.x_trend().unwrap(), exams.x_trend().unwrap());
    assert!(b > a, "t1/t2 trend {a}, mte/ete trend {b}");
    for m in [&tests, &exams] {
        for (means, counts) in m.cell_mean.iter().zip(&m.cell_count) {
            for (mean, c) in means.iter().zip(counts) {
                assert_eq!(mean.is_some(), *c > 0);
            }
        }
        assert_eq!(m.cell_count.iter().flatten().sum::<usize>(), 1000);
    }
}

#[test]
fn generated_records_respect_invariants() {
    let spec = SynthSpec {
        n_students: 500,
        seed: 99,
        ..SynthSpec::default()
    };
    for r in generate_synthetic(&spec).unwrap() {
        let again = AssessmentRecord::new(
            r.student_id.clone(),
            *r.scores(),
            r.total(),
            &Maxima::default(),
        );
        assert!(again.is_ok());
    }
}

#[test]
fn unreachable_targets_are_reported() {
    let spec = SynthSpec {
        noise_sd: 15.0,
        ..SynthSpec::default()
    };
    assert!(generate_synthetic(&spec).is_err());
}

#[test]
fn duplicated_column_correlates_perfectly() {
    let a = vec![1.0, 4.0, 2.0, 8.0];
    let m = labeled_correlations(
        vec!["a".into(), "b".into(), "c".into()],
        &[a.clone(), a, vec![3.0, 1.0, 2.0, 0.5]],
    )
    .unwrap();
    assert_eq!(m.get("a", "b"), Some(1.0));
    assert_eq!(m.get("c", "c"), Some(1.0));
}
