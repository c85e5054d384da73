// Every example must run and produce sensible output.

#[allow(dead_code)]
#[path = "../examples/generate_sequence.rs"]
mod generate_sequence;
#[allow(dead_code)]
#[path = "../examples/ctig_model.rs"]
mod ctig_model;
#[allow(dead_code)]
#[path = "../examples/model_distance.rs"]
mod model_distance;
#[allow(dead_code)]
#[path = "../examples/variance_study.rs"]
mod variance_study;
#[allow(dead_code)]
#[path = "../examples/causal_shift.rs"]
mod causal_shift;
#[allow(dead_code)]
#[path = "../examples/timestamp_shuffle.rs"]
mod timestamp_shuffle;
#[allow(dead_code)]
#[path = "../examples/causal_properties.rs"]
mod causal_properties;
#[allow(dead_code)]
#[path = "../examples/dataset_export.rs"]
mod dataset_export;
#[allow(dead_code)]
#[path = "../examples/config_run.rs"]
mod config_run;

#[test]
fn generate_sequence_accepts_a_subset() {
    let (triggers, accepted, ok) = generate_sequence::run_example().unwrap();
    assert!(ok);
    assert!(accepted > 0 && accepted < triggers);
}

#[test]
fn ctig_model_has_ten_edge_types() {
    let (types, events) = ctig_model::run_example().unwrap();
    assert_eq!(types, 10);
    assert!(events > 0);
}

#[test]
fn model_distances_are_in_unit_interval() {
    let (d, s, m) = model_distance::run_example().unwrap();
    for v in [d, s, m] {
        assert!((0.0..=1.0).contains(&v), "{v}");
    }
}

#[test]
fn variance_shrinks_with_iterations() {
    let rows = variance_study::run_example().unwrap();
    assert!(rows[1].1 < rows[0].1, "{rows:?}");
}

#[test]
fn causal_shift_hurts_the_oracle() {
    let (y, y_cf, delta) = causal_shift::run_example().unwrap();
    assert!(y > y_cf);
    assert!(delta > 0.0);
}

#[test]
fn shuffling_hurts_the_oracle() {
    let (orig, shuffled) = timestamp_shuffle::run_example().unwrap();
    assert!(shuffled.iter().all(|&s| s < orig));
}

#[test]
fn pns_estimate_tracks_intervention() {
    let (monotone, est, oracle) = causal_properties::run_example().unwrap();
    assert!(monotone);
    assert!((est - oracle).abs() < 0.05);
}

#[test]
fn constant_predictor_scores_half() {
    let dir = tempfile::tempdir().unwrap();
    let acc = dataset_export::run_example(dir.path()).unwrap();
    assert!((acc - 0.5).abs() < 1e-12);
}

#[test]
fn config_run_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let written = config_run::run_example(dir.path()).unwrap();
    assert!(written.iter().all(|p| p.exists()));
    assert!(written.iter().any(|p| p.ends_with("report.json")));
}
