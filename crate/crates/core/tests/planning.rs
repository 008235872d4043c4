use std::collections::BTreeSet;

use regplan_core::plan::{build_plan, plan_to_json, FractionBasis, PlanError, Rationale};
use regplan_core::question::{Answer, QuestionId};
use regplan_core::rational::Rational;
use regplan_core::sim::{generate_scenario, generate_tree, GeneratorParams};
use regplan_core::suite::{load_suite, Cost, TestCase, TestStatus, TestSuite};
use regplan_core::tree::{classify_suite, default_tree, MissingAnswer};
use regplan_core::{Decision, Disposition, PlanOptions, Policy};

fn q(n: u8) -> QuestionId {
    QuestionId::new(n).unwrap()
}

fn suite_for(seed: u64, n_tests: usize) -> TestSuite {
    generate_scenario(&GeneratorParams {
        seed,
        n_tests,
        ..GeneratorParams::default()
    })
    .unwrap()
    .suite
}

#[test]
fn classify_suite_skips_obsolete_and_reports_missing() {
    let mut a = TestCase::new("A", Cost::new(3).unwrap());
    a.answers = [(q(1), Answer::Low), (q(2), Answer::Medium), (q(3), Answer::High), (q(7), Answer::High)]
        .into_iter()
        .collect();
    let mut b = a.clone();
    b.id = "B".into();
    b.answers.remove(&q(7));
    let mut c = a.clone();
    c.id = "C".into();
    c.status = TestStatus::Obsolete;
    let suite = TestSuite {
        name: "s".into(),
        tests: vec![a, b, c],
    };
    let out = classify_suite(&default_tree(), &suite);
    assert_eq!(out.keys().collect::<Vec<_>>(), vec!["A", "B"]);
    assert_eq!(out["A"].as_ref().unwrap().decision, Decision::Automate);
    assert_eq!(out["A"].as_ref().unwrap().path_string(), "1:L → 2:M → 3:H → 7:H");
    assert_eq!(out["B"], Err(MissingAnswer(q(7))));
}

#[test]
fn hybrid_automates_exactly_what_the_tree_automates() {
    for seed in 0..100 {
        let suite = suite_for(seed, 1 + (seed as usize % 40));
        let tree = if seed % 2 == 0 { default_tree() } else { generate_tree(seed) };
        let opts = PlanOptions::default();
        let pt = build_plan(Policy::Pt, &suite, Some(&tree), &opts).unwrap();
        let atvm = build_plan(Policy::Atvm, &suite, Some(&tree), &opts).unwrap();
        let tsra = build_plan(Policy::Tsra, &suite, None, &opts).unwrap();
        assert_eq!(pt.ids_with(Disposition::Automate), atvm.ids_with(Disposition::Automate));
        assert!(pt.counts().skip <= tsra.counts().skip, "seed {seed}");
        assert_eq!(pt.entries.len(), suite.tests.len());
        for e in pt.entries.iter().chain(&atvm.entries).chain(&tsra.entries) {
            assert!(e.rationale.consistent_with(e.disposition), "{e:?}");
        }
        // selection honours the pool quota
        let pool = pt.counts().select + pt.counts().skip;
        let expected = (opts.fraction * Rational::from(pool)).ceil_int() as usize;
        assert_eq!(pt.counts().select, expected);
    }
}

#[test]
fn total_basis_can_exhaust_the_pool() {
    let suite = suite_for(4, 30);
    let tree = default_tree();
    let opts = PlanOptions {
        fraction: Rational::ONE,
        fraction_basis: FractionBasis::Total,
        ..PlanOptions::default()
    };
    let plan = build_plan(Policy::Pt, &suite, Some(&tree), &opts).unwrap();
    let sel = plan.selection.as_ref().unwrap();
    // the quota over all 30 tests is capped at the tree-manual pool
    let pool = plan.counts().select + plan.counts().skip;
    assert!(pool < 30);
    assert_eq!(sel.quota, pool);
    assert_eq!(plan.counts().skip, 0);
    assert_eq!(sel.shortfall, 0);
}

#[test]
fn tree_policies_need_a_tree_and_complete_answers() {
    let suite = suite_for(1, 10);
    let opts = PlanOptions::default();
    assert!(matches!(build_plan(Policy::Pt, &suite, None, &opts), Err(PlanError::TreeRequired(_))));

    let mut broken = suite.clone();
    broken.tests[3].answers.clear();
    match build_plan(Policy::Atvm, &broken, Some(&default_tree()), &opts) {
        Err(PlanError::MissingAnswers(m)) => assert_eq!(m, vec![(broken.tests[3].id.clone(), q(1))]),
        other => panic!("unexpected {other:?}"),
    }
    // risk-only planning ignores answers
    assert!(build_plan(Policy::Tsra, &broken, None, &opts).is_ok());
}

#[test]
fn plan_document_is_self_describing() {
    let suite = load_suite(
        r#"{"suite": "doc", "tests": [
            {"id": "a", "cost": 5, "timing": {"manual_minutes": 10, "automated_minutes": 1},
             "answers": {"1": "L", "2": "L", "6": "L"},
             "defects": [{"id": "d1", "severity": 4, "version": "v1"}]},
            {"id": "b", "cost": 2, "timing": {"manual_minutes": 10, "automated_minutes": 1},
             "answers": {"1": "H", "7": "H"}}
        ]}"#,
    )
    .unwrap();
    let plan = build_plan(Policy::Pt, &suite, Some(&default_tree()), &PlanOptions::default()).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&plan_to_json(&plan)).unwrap();
    assert_eq!(doc["policy"], "pt");
    assert_eq!(doc["parameters"]["fraction"], 0.7);
    assert_eq!(doc["parameters"]["fraction_basis"], "pool");
    assert_eq!(doc["summary"]["automate"], 1);
    assert_eq!(doc["summary"]["select"], 1);
    let ids: BTreeSet<&str> = doc["entries"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["a", "b"].into_iter().collect());
    let a = &doc["entries"][1];
    assert_eq!(a["id"], "a");
    assert_eq!(a["disposition"], "select-manual");
    assert_eq!(a["rationale"], Rationale::TreeNoRiskSelected.as_str());
    assert_eq!(a["risk"]["P"], 5);
    assert_eq!(a["re"], 25);
}
