use proptest::prelude::*;

use rsmax_core::harness::{
    csv_string, guarantee, run_algorithm, run_experiment, strip_timing, AlgorithmConfig, AlgorithmId, ExperimentConfig,
    OptValue, CSV_COLUMNS,
};
use rsmax_core::instances::gen_greedy_failure;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

#[test]
fn header_is_fixed() {
    let recs = run_experiment(&config(r#"{"instances":[],"algorithms":[{"id":"greedy"}]}"#)).unwrap();
    let csv = csv_string(&recs).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
}

#[test]
fn config_errors() {
    for bad in [
        r#"{"instances":[],"algorithms":[{"id":"unknown"}]}"#,
        r#"{"instances":[],"algorithms":[],"budget":0}"#,
        r#"{"instances":[{"generator":"nope"}],"algorithms":[]}"#,
        r#"{"instances":[],"algorithms":[],"typo":1}"#,
    ] {
        assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
    }
}

#[test]
fn missing_instance_file_is_fatal() {
    let cfg = config(r#"{"instances":[{"generator":"file","path":"/nonexistent/x.json"}],"algorithms":[]}"#);
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn greedy_failure_rows() {
    let inst = gen_greedy_failure(6).unwrap();
    let greedy = run_algorithm(&AlgorithmConfig::new(AlgorithmId::Greedy), &inst).unwrap();
    assert_eq!(greedy.g_value, Some(0.0));
    let naive = run_algorithm(&AlgorithmConfig::new(AlgorithmId::NaiveTopk), &inst).unwrap();
    assert!(naive.g_value.unwrap() > 0.0);
    assert_eq!(guarantee(AlgorithmId::Greedy, &inst), None);
    assert!(guarantee(AlgorithmId::NaiveTopk, &inst).is_some());
}

#[test]
fn opt_status_in_csv() {
    let cfg = config(
        r#"{"instances":[{"generator":"greedy-failure","k":4}],"algorithms":[{"id":"greedy"}],"compute_opt":false}"#,
    );
    let recs = run_experiment(&cfg).unwrap();
    assert_eq!(recs[0].opt, OptValue::Status(String::new()));
    assert_eq!(recs[0].ratio, None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn guarantees_hold_and_runs_repeat(seed in 0u64..10_000, n in 6usize..10, k in 2usize..6) {
        let k = k.min(n - 1);
        let text = format!(
            r#"{{"instances":[
                {{"generator":"random-coverage","n":{n},"universe":{u},"density":0.3,"k":{k},"tau":1,"seeds":[{seed}]}},
                {{"generator":"random-coverage","n":{n},"universe":{u},"density":0.3,"k":{k},"tau":0,"seeds":[{seed}]}}],
              "algorithms":[{{"id":"greedy"}},{{"id":"naive-topk"}},{{"id":"general"}},{{"id":"ignore-first"}}],
              "check_bounds":true}}"#,
            u = 2 * n
        );
        let cfg = config(&text);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        prop_assert_eq!(strip_timing(&csv_string(&a).unwrap()), strip_timing(&csv_string(&b).unwrap()));
        for r in &a {
            prop_assert!(r.within_bound != Some(false), "{:?}", r);
            if let Some(q) = r.ratio {
                prop_assert!((0.0..=1.0 + 1e-9).contains(&q));
            }
        }
    }
}
